use std::process::{Command, Output};

use qchain::channel_div::fixed_input_rel_entropy;
use qchain::channels::Channel;
use qchain::linalg::HermitianMatrix;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qchain")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn scan_header_and_endpoint() {
    let o = run(&["scan", "--resolution", "21"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), format!("# qchain {}", env!("CARGO_PKG_VERSION")));
    let config = lines.next().unwrap();
    for key in ["command=scan", "seed=42", "log_base=2", "resolution=21"] {
        assert!(config.contains(key), "{config}");
    }
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 21);
    let e = Channel::gad(0.3, 0.0).unwrap();
    let f = Channel::gad(0.5, 0.9).unwrap();
    let at_zero = fixed_input_rel_entropy(&e, &f, &HermitianMatrix::diag(&[0.0, 1.0])).unwrap().to_f64();
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[0][1] - at_zero).abs() < 1e-9);
    assert!(text.lines().last().unwrap().starts_with("# optimum p=0.835"));
}

#[test]
fn scan_of_equal_channels_is_zero() {
    let o = run(&["scan", "--resolution", "11", "--channel-f", "gad:0.3:0"]);
    assert!(o.status.success());
    assert!(csv_rows(&stdout(&o)).iter().all(|r| r[1].abs() < 1e-9));
}

#[test]
fn natural_log_scales_values() {
    let bits = csv_rows(&stdout(&run(&["scan", "--resolution", "5"])));
    let nats = csv_rows(&stdout(&run(&["scan", "--resolution", "5", "--log-base", "e"])));
    for (b, n) in bits.iter().zip(&nats) {
        assert!((b[1] * std::f64::consts::LN_2 - n[1]).abs() < 1e-8);
    }
}

#[test]
fn malformed_channel_file_names_the_field() {
    let dir = std::env::temp_dir().join(format!("qchain-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{"dim_in": 2, "dim_out": 2, "kraus": [[[[1,0],[0,0]]]]}"#).unwrap();
    let o = run(&["scan", "--channel-e", path.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("--channel-e") && err.contains("kraus[0]"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn identity_divergence_is_zero() {
    let o = run(&["divergence", "--channel-e", "identity:2", "--channel-f", "identity:2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["value"].as_f64().unwrap().abs() < 1e-9);
    assert!(v["channel_dmax"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(v["config"]["seed"], 42);
}

#[test]
fn stein_rates_decrease() {
    let o = run(&["stein", "--n-max", "4"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 4);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
}

#[test]
fn smoke_check_reports_json_lines() {
    let o = run(&["check", "--smoke"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(header["command"], "check");
    let mut failed = Vec::new();
    for line in lines {
        let r: serde_json::Value = serde_json::from_str(line).unwrap();
        if r["asserted"] == true && r["pass"] == false {
            failed.push(r["name"].as_str().unwrap().to_string());
        }
    }
    // only the counterexample's stated bound on the G term fails
    assert!(failed.iter().all(|n| n == "remark.g_term" || n == "remark.chain_rule_fails"), "{failed:?}");
    assert_eq!(o.status.code(), Some(if failed.is_empty() { 0 } else { 1 }));
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("qchain-out-{}.csv", std::process::id()));
    let o = run(&["scan", "--resolution", "5", "--out", path.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv_rows(&written).len(), 5);
    std::fs::remove_file(&path).unwrap();
}
