use super::dmax_chain::vec_tensor_pow;
use super::{classical::kl, CheckResult, DEFAULT_TOL};
use crate::divergences::smooth_dmax_classical;
use crate::error::{Error, Result};

/// Largest tensor-power dimension handled.
pub const AEP_MAX_DIM: usize = 4096;

/// Which power of g(ε) multiplies the finite-size correction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AepForm {
    /// 4 log(μ) √g(ε) / √n
    SqrtG,
    /// 4 log(μ) g(ε) / √n
    LinearG,
}

impl AepForm {
    fn label(self) -> &'static str {
        match self {
            AepForm::SqrtG => "sqrt_g",
            AepForm::LinearG => "linear_g",
        }
    }
}

/// g(ε) = log(2/ε²).
pub fn aep_g(eps: f64) -> f64 {
    (2.0 / (eps * eps)).log2()
}

/// μ = 1 + Σ pᵢ^{3/2} qᵢ^{−1/2} + Σ pᵢ^{1/2} qᵢ^{1/2}.
pub fn aep_mu(p: &[f64], q: &[f64]) -> f64 {
    let mut mu = 1.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            mu += if b > 0.0 { a.powf(1.5) / b.sqrt() } else { f64::INFINITY };
        }
        mu += (a * b).sqrt();
    }
    mu
}

/// (1/n) D^ε_max(p^{⊗n}‖q^{⊗n}) against D(p‖q) plus the finite-size
/// correction. When n < 2g(ε) the result is marked not asserted and carries
/// `.inapplicable` in its name.
pub fn aep_bound_eval(p: &[f64], q: &[f64], eps: f64, n: usize, form: AepForm, digest: &str) -> Result<CheckResult> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::DimensionMismatch("distributions must have equal nonzero length".into()));
    }
    if !(eps > 0.0 && eps < 1.0) || n == 0 {
        return Err(Error::InvalidParameter(format!("need 0 < eps < 1 and n > 0, got {eps}, {n}")));
    }
    let dim = p.len().checked_pow(n as u32).filter(|&d| d <= AEP_MAX_DIM);
    if dim.is_none() {
        return Err(Error::InvalidParameter(format!("{}^{n} exceeds {AEP_MAX_DIM}", p.len())));
    }
    let g = aep_g(eps);
    let nf = n as f64;
    let lhs = smooth_dmax_classical(&vec_tensor_pow(p, n), &vec_tensor_pow(q, n), eps)?.to_f64() / nf;
    let factor = match form {
        AepForm::SqrtG => g.sqrt(),
        AepForm::LinearG => g,
    };
    let rhs = kl(p, q) + 4.0 * aep_mu(p, q).log2() * factor / nf.sqrt();
    let name = format!("aep.{}", form.label());
    if nf < 2.0 * g {
        return Ok(CheckResult::inequality(format!("{name}.inapplicable"), lhs, rhs, DEFAULT_TOL, digest).reported());
    }
    Ok(CheckResult::inequality(name, lhs, rhs, DEFAULT_TOL, digest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_scalar_oracle() {
        let (p, q) = ([0.9, 0.1], [0.5, 0.5]);
        let want = 1.0 + 0.9f64.powf(1.5) / 0.5f64.sqrt() + 0.1f64.powf(1.5) / 0.5f64.sqrt()
            + (0.45f64).sqrt()
            + (0.05f64).sqrt();
        assert!((aep_mu(&p, &q) - want).abs() < 1e-15);
        assert!((aep_mu(&p, &p) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn equal_pair_holds() {
        let p = [0.3, 0.7];
        let r = aep_bound_eval(&p, &p, 0.4, 8, AepForm::SqrtG, "").unwrap();
        assert!(r.lhs <= 0.0 && r.pass && r.asserted);
    }

    #[test]
    fn bernoulli_pair() {
        let (p, q) = ([0.9, 0.1], [0.5, 0.5]);
        // 2g(0.3) ≈ 8.94, so n = 8 falls outside the hypothesis
        let r8 = aep_bound_eval(&p, &q, 0.3, 8, AepForm::SqrtG, "").unwrap();
        assert!(!r8.asserted && r8.name.ends_with("inapplicable"));
        assert!(r8.pass);
        for n in [9, 10, 12] {
            for form in [AepForm::SqrtG, AepForm::LinearG] {
                let r = aep_bound_eval(&p, &q, 0.3, n, form, "").unwrap();
                assert!(r.asserted && r.pass, "{r:?}");
            }
        }
    }

    #[test]
    fn rejects_oversized_powers() {
        assert!(aep_bound_eval(&[0.5, 0.5], &[0.5, 0.5], 0.3, 13, AepForm::SqrtG, "").is_err());
    }
}
