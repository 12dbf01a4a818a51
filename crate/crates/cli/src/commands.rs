use std::fs;
use std::io::Write;

use anyhow::{bail, Context, Result};
use qchain::chain_checks::suites::{run_all, SuiteSizes};
use qchain::chain_checks::stein_convergence;
use qchain::channel_div::{
    channel_dmax, channel_rel_entropy, heatmap as heat_grid, scan_diag1, InputAnsatz,
};
use qchain::channels::{parse_channel_spec, Channel};
use qchain::divergences::{DensityMatrix, ExtendedReal};
use serde_json::json;

use crate::format::{num, Header};
use crate::{AnsatzArg, Common};

fn channels(c: &Common) -> Result<(Channel, Channel)> {
    let e = parse_channel_spec(&c.channel_e).with_context(|| format!("--channel-e {}", c.channel_e))?;
    let f = parse_channel_spec(&c.channel_f).with_context(|| format!("--channel-f {}", c.channel_f))?;
    Ok((e, f))
}

fn emit(c: &Common, text: &str) -> Result<()> {
    match &c.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn ext_json(x: ExtendedReal, c: &Common) -> serde_json::Value {
    match x {
        ExtendedReal::Finite(v) => json!(c.log_base.from_bits(v)),
        ExtendedReal::PosInf => json!("inf"),
    }
}

pub fn scan(c: &Common) -> Result<bool> {
    let (e, f) = channels(c)?;
    let resolution = c.resolution.unwrap_or(1001);
    let (rows, (p_star, v_star)) = scan_diag1(&e, &f, resolution)?;
    let header = Header {
        command: "scan",
        seed: c.seed,
        log_base: c.log_base,
        fields: vec![
            ("resolution", resolution.to_string()),
            ("ansatz", "diag-1param".into()),
            ("channel_e", c.channel_e.clone()),
            ("channel_f", c.channel_f.clone()),
        ],
    };
    let mut out = header.comment_lines();
    out.push_str("p,value\n");
    for (p, v) in rows {
        out.push_str(&format!("{},{}\n", num(p), num(c.log_base.from_bits(v))));
    }
    out.push_str(&format!("# optimum p={} value={}\n", num(p_star), num(c.log_base.from_bits(v_star))));
    emit(c, &out)?;
    Ok(true)
}

pub fn heatmap(c: &Common, beta_e: f64, beta_f: f64) -> Result<bool> {
    let resolution = c.resolution.unwrap_or(9);
    if resolution < 2 {
        bail!("--resolution must be at least 2 for the heat map");
    }
    let gammas: Vec<f64> = (0..resolution)
        .map(|k| 0.1 + 0.8 * k as f64 / (resolution - 1) as f64)
        .collect();
    let ansatz = InputAnsatz::diag_2param();
    let cells = heat_grid(&gammas, &gammas, beta_e, beta_f, &ansatz);
    let header = Header {
        command: "heatmap",
        seed: c.seed,
        log_base: c.log_base,
        fields: vec![
            ("resolution", resolution.to_string()),
            ("ansatz", ansatz.kind.label().into()),
            ("two_copy_resolution", ansatz.resolution.to_string()),
            ("beta_e", num(beta_e)),
            ("beta_f", num(beta_f)),
        ],
    };
    let mut out = header.comment_lines();
    out.push_str("gamma1,gamma2,gap\n");
    for cell in cells {
        out.push_str(&format!(
            "{},{},{}\n",
            num(cell.gamma1),
            num(cell.gamma2),
            num(c.log_base.from_bits(cell.gap))
        ));
    }
    emit(c, &out)?;
    Ok(true)
}

pub fn check(c: &Common, smoke: bool) -> Result<bool> {
    let sizes = if smoke { SuiteSizes::smoke() } else { SuiteSizes::default() };
    let results = run_all(c.seed, &sizes);
    let header = Header {
        command: "check",
        seed: c.seed,
        log_base: c.log_base,
        fields: vec![
            ("units", "bits".into()),
            ("sizes", if smoke { "smoke".into() } else { "default".into() }),
        ],
    };
    let mut out = format!("{}\n", header.json());
    for r in &results {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    emit(c, &out)?;
    let failures: Vec<_> = results.iter().filter(|r| !r.ok()).collect();
    eprintln!("{} checks, {} failed", results.len(), failures.len());
    for r in &failures {
        eprintln!("FAIL {} lhs={} rhs={} [{}]", r.name, num(r.lhs), num(r.rhs), r.instance_digest);
    }
    Ok(failures.is_empty())
}

pub fn divergence(c: &Common, ansatz: AnsatzArg, restarts: usize) -> Result<bool> {
    let (mut e, mut f) = channels(c)?;
    let (spec, copies) = match ansatz {
        AnsatzArg::Diag1 => (InputAnsatz::diag_1param(), 1),
        AnsatzArg::Diag2 => {
            e = e.tensor_pow(2)?;
            f = f.tensor_pow(2)?;
            (InputAnsatz::diag_2param(), 2)
        }
        AnsatzArg::Multistart => (InputAnsatz::multistart(restarts, c.seed), 1),
    };
    let spec = match c.resolution {
        Some(r) if ansatz != AnsatzArg::Multistart => spec.with_resolution(r),
        _ => spec,
    };
    let report = channel_rel_entropy(&e, &f, &spec)?;
    let dmax = channel_dmax(&e, &f)?;
    let state = &report.argmax_state;
    let matrix: Vec<Vec<[f64; 2]>> = (0..state.dim())
        .map(|i| (0..state.dim()).map(|j| [state.get(i, j).re, state.get(i, j).im]).collect())
        .collect();
    let header = Header {
        command: "divergence",
        seed: c.seed,
        log_base: c.log_base,
        fields: vec![
            ("ansatz", spec.kind.label().into()),
            ("resolution", spec.resolution.to_string()),
            ("restarts", spec.restarts.to_string()),
            ("channel_e", c.channel_e.clone()),
            ("channel_f", c.channel_f.clone()),
        ],
    };
    let body = json!({
        "config": header.json(),
        "copies": copies,
        "value": ext_json(report.value, c),
        "channel_dmax": ext_json(dmax, c),
        "argmax_state": matrix,
        "iterations": report.iterations,
        "certified": report.certified,
    });
    emit(c, &format!("{}\n", serde_json::to_string_pretty(&body)?))?;
    Ok(true)
}

pub fn stein(c: &Common, n_max: usize, input_p: Option<f64>, with_reference: bool) -> Result<bool> {
    let (e, f) = channels(c)?;
    let phi = match input_p {
        Some(p) => {
            if !(0.0..=1.0).contains(&p) {
                bail!("--input-p must lie in [0, 1], got {p}");
            }
            DensityMatrix::diag(&[p, 1.0 - p])?
        }
        None => channel_rel_entropy(&e, &f, &InputAnsatz::diag_1param())
            .context("default input needs Z-covariant qubit channels; pass --input-p")?
            .argmax_state,
    };
    let report = stein_convergence(&e, &f, &phi, c.eps, n_max, with_reference)?;
    let header = Header {
        command: "stein",
        seed: c.seed,
        log_base: c.log_base,
        fields: vec![
            ("eps", num(c.eps)),
            ("n_max", n_max.to_string()),
            ("input_p", num(phi.get(0, 0).re)),
            ("reference", with_reference.to_string()),
            ("channel_e", c.channel_e.clone()),
            ("channel_f", c.channel_f.clone()),
        ],
    };
    let mut out = header.comment_lines();
    out.push_str(&format!("# benchmark={}\n", num(c.log_base.from_bits(report.benchmark))));
    out.push_str("n,rate\n");
    for (n, rate) in report.rates {
        out.push_str(&format!("{n},{}\n", num(c.log_base.from_bits(rate))));
    }
    emit(c, &out)?;
    Ok(true)
}
