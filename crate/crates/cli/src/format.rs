use std::fmt::Write as _;

use qchain::LogBase;

/// Ten significant digits, plain decimal where practical.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..=15).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{x:.9e}")
    }
}

/// Configuration echoed at the top of every output.
pub struct Header<'a> {
    pub command: &'a str,
    pub seed: u64,
    pub log_base: LogBase,
    pub fields: Vec<(&'a str, String)>,
}

impl Header<'_> {
    pub fn comment_lines(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# qchain {}", env!("CARGO_PKG_VERSION")).unwrap();
        write!(out, "# command={} seed={} log_base={}", self.command, self.seed, self.log_base.label()).unwrap();
        for (k, v) in &self.fields {
            write!(out, " {k}={v}").unwrap();
        }
        out.push('\n');
        out
    }

    pub fn json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("qchain".into(), env!("CARGO_PKG_VERSION").into());
        map.insert("command".into(), self.command.into());
        map.insert("seed".into(), self.seed.into());
        map.insert("log_base".into(), self.log_base.label().into());
        for (k, v) in &self.fields {
            map.insert((*k).into(), v.clone().into());
        }
        serde_json::Value::Object(map)
    }
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn significant_digits() {
        assert_eq!(num(0.917_627_123_456_7), "0.9176271235");
        assert_eq!(num(1.936_155), "1.936155");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(123.0), "123");
        assert_eq!(num(-0.000_012_345_678_912_3), "-0.00001234567891");
        assert_eq!(num(1e-12), "1.000000000e-12");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(0.0), "0");
    }
}
