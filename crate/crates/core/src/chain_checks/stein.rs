use serde::Serialize;

use crate::channels::{pull_through, Channel};
use crate::divergences::{hypothesis_testing_div, rel_entropy, DensityMatrix};
use crate::error::{Error, Result};

/// Largest tensor-power dimension handled.
pub const STEIN_MAX_DIM: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteinReport {
    /// (n, (1/n) D_H^ε(ρ^{⊗n}‖σ^{⊗n})).
    pub rates: Vec<(usize, f64)>,
    /// Single-letter D(ρ‖σ).
    pub benchmark: f64,
    pub with_reference: bool,
}

/// Finite-n non-adaptive discrimination rates for E versus F on input φ.
/// With `with_reference` the input is purified (ρ = √φ J^E √φ on R ⊗ B);
/// otherwise the outputs E(φ), F(φ) are compared directly.
pub fn stein_convergence(
    e: &Channel,
    f: &Channel,
    phi: &DensityMatrix,
    eps: f64,
    n_max: usize,
    with_reference: bool,
) -> Result<SteinReport> {
    if e.dim_in() != f.dim_in() || e.dim_out() != f.dim_out() || phi.dim() != e.dim_in() {
        return Err(Error::DimensionMismatch("channels and input state disagree".into()));
    }
    let (rho, sigma) = if with_reference {
        (pull_through(phi, &e.choi())?, pull_through(phi, &f.choi())?)
    } else {
        (e.apply_full(phi)?, f.apply_full(phi)?)
    };
    let fits = rho.dim().checked_pow(n_max as u32).is_some_and(|d| d <= STEIN_MAX_DIM);
    if n_max == 0 || !fits {
        return Err(Error::InvalidParameter(format!(
            "n_max = {n_max} with single-copy dimension {} exceeds {STEIN_MAX_DIM}",
            rho.dim()
        )));
    }
    let benchmark = rel_entropy(&rho, &sigma)?.to_f64();
    let mut rates = Vec::with_capacity(n_max);
    let (mut rn, mut sn) = (rho.clone(), sigma.clone());
    for n in 1..=n_max {
        if n > 1 {
            rn = rn.kron(&rho);
            sn = sn.kron(&sigma);
        }
        let v = hypothesis_testing_div(&rn, &sn, eps)?.to_f64();
        rates.push((n, v / n as f64));
    }
    Ok(SteinReport {
        rates,
        benchmark,
        with_reference,
    })
}
