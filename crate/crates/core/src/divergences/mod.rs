//! State-level divergences and distance measures.
//!
//! Every entropic quantity is computed in bits. Functions that can be infinite
//! because a support condition fails return [`ExtendedReal`].

mod hypothesis;
mod smooth;

use std::fmt;
use std::ops::Deref;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

pub use hypothesis::{hypothesis_testing_div, hypothesis_testing_div_classical};
pub use smooth::{smooth_dmax, smooth_dmax_classical, SmoothingMode};

/// Minimum eigenvalue accepted for positive semidefinite inputs.
pub const PSD_TOL: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-9;
/// tr(Π_ker(σ) ρ) at or below this value counts as supp(ρ) ⊆ supp(σ).
pub const SUPPORT_INCLUSION_TOL: f64 = 1e-9;

/// A real number or +∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            ExtendedReal::PosInf => None,
        }
    }

    /// The value as an `f64`, mapping +∞ to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// Unwraps a finite value; panics on +∞.
    pub fn expect_finite(self, what: &str) -> f64 {
        self.finite().unwrap_or_else(|| panic!("{what} is +inf"))
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Self {
        match self {
            ExtendedReal::Finite(x) => ExtendedReal::Finite(f(x)),
            ExtendedReal::PosInf => ExtendedReal::PosInf,
        }
    }

    pub fn plus(self, other: ExtendedReal) -> ExtendedReal {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::PosInf,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(x: f64) -> Self {
        ExtendedReal::Finite(x)
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::PosInf => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(x) => s.serialize_f64(*x),
            ExtendedReal::PosInf => s.serialize_str("inf"),
        }
    }
}

/// Positive semidefinite operator with unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub fn new(op: HermitianMatrix) -> Result<Self> {
        op.ensure_psd(PSD_TOL)?;
        let t = op.trace();
        if (t - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(t));
        }
        Ok(Self(op))
    }

    pub fn diag(p: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::diag(p))
    }

    /// Maximally mixed state on `d` levels.
    pub fn maximally_mixed(d: usize) -> Self {
        Self(HermitianMatrix::identity(d).scale(1.0 / d as f64))
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn into_inner(self) -> HermitianMatrix {
        self.0
    }
}

impl Deref for DensityMatrix {
    type Target = HermitianMatrix;
    fn deref(&self) -> &HermitianMatrix {
        &self.0
    }
}

/// Positive semidefinite operator with trace at most one.
#[derive(Clone, Debug, PartialEq)]
pub struct SubnormalizedState(HermitianMatrix);

impl SubnormalizedState {
    pub fn new(op: HermitianMatrix) -> Result<Self> {
        op.ensure_psd(PSD_TOL)?;
        let t = op.trace();
        if t > 1.0 + TRACE_TOL {
            return Err(Error::InvalidTrace(t));
        }
        Ok(Self(op))
    }

    pub fn into_inner(self) -> HermitianMatrix {
        self.0
    }
}

impl Deref for SubnormalizedState {
    type Target = HermitianMatrix;
    fn deref(&self) -> &HermitianMatrix {
        &self.0
    }
}

impl From<DensityMatrix> for SubnormalizedState {
    fn from(d: DensityMatrix) -> Self {
        SubnormalizedState(d.0)
    }
}

fn check_pair(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operators of dimension {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    rho.ensure_psd(PSD_TOL)?;
    sigma.ensure_psd(PSD_TOL)
}

/// tr(Π_ker(σ) ρ): the weight of ρ outside the support of σ.
pub fn kernel_weight(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> f64 {
    let thr = sigma.support_threshold();
    let e = sigma.eig();
    e.values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l.abs() <= thr)
        .map(|(k, _)| rho.matrix().expectation(&e.vector(k)).re)
        .sum()
}

pub fn support_included(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> bool {
    kernel_weight(rho, sigma) <= SUPPORT_INCLUSION_TOL
}

/// tr ρ log₂ X restricted to the support of X.
fn trace_rho_log(rho: &HermitianMatrix, x: &HermitianMatrix) -> f64 {
    let thr = x.support_threshold();
    let e = x.eig();
    e.values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > thr)
        .map(|(k, &l)| l.log2() * rho.matrix().expectation(&e.vector(k)).re)
        .sum()
}

/// −Σ λ log₂ λ over the positive spectrum.
pub fn von_neumann_entropy(rho: &HermitianMatrix) -> f64 {
    let thr = rho.support_threshold();
    -rho.eig()
        .values
        .iter()
        .filter(|&&l| l > thr)
        .map(|&l| l * l.log2())
        .sum::<f64>()
}

/// Quantum relative entropy D(ρ‖σ) = tr ρ(log ρ − log σ), +∞ unless
/// supp(ρ) ⊆ supp(σ). Accepts any PSD ρ; for density matrices this is the
/// usual Umegaki divergence.
pub fn rel_entropy(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<ExtendedReal> {
    check_pair(rho, sigma)?;
    if !support_included(rho, sigma) {
        return Ok(ExtendedReal::PosInf);
    }
    let thr = rho.support_threshold();
    let rho_log_rho: f64 = rho
        .eig()
        .values
        .iter()
        .filter(|&&l| l > thr)
        .map(|&l| l * l.log2())
        .sum();
    Ok(ExtendedReal::Finite(rho_log_rho - trace_rho_log(rho, sigma)))
}

/// Max-relative entropy: log₂ of the largest eigenvalue of σ^{-1/2} ρ σ^{-1/2}
/// on supp(σ), or +∞ when supp(ρ) ⊄ supp(σ).
pub fn dmax(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<ExtendedReal> {
    check_pair(rho, sigma)?;
    if !support_included(rho, sigma) {
        return Ok(ExtendedReal::PosInf);
    }
    let s = sigma.inv_sqrt()?;
    let gamma = rho.sandwich(&s);
    let top = gamma.max_eigenvalue();
    if top <= 0.0 {
        return Err(Error::InvalidParameter(
            "max-relative entropy of the zero operator is -inf".into(),
        ));
    }
    Ok(ExtendedReal::Finite(top.log2()))
}

/// ‖√ρ √σ‖₁.
pub fn root_fidelity(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    check_pair(rho, sigma)?;
    let s = sigma.sqrt()?;
    let m = rho.sandwich(&s);
    Ok(m.eig().values.iter().map(|&l| l.max(0.0).sqrt()).sum())
}

/// F(ρ, σ) = ‖√ρ √σ‖₁².
pub fn fidelity(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    Ok(root_fidelity(rho, sigma)?.powi(2))
}

/// F*(ρ, σ) = (‖√ρ √σ‖₁ + √((1 − tr ρ)(1 − tr σ)))² for subnormalized states.
pub fn generalized_fidelity(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    for op in [rho, sigma] {
        let t = op.trace();
        if t > 1.0 + TRACE_TOL {
            return Err(Error::InvalidTrace(t));
        }
    }
    let slack = ((1.0 - rho.trace()).max(0.0) * (1.0 - sigma.trace()).max(0.0)).sqrt();
    Ok((root_fidelity(rho, sigma)? + slack).powi(2))
}

/// P(ρ, σ) = √(1 − F*(ρ, σ)).
pub fn purified_distance(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    Ok((1.0 - generalized_fidelity(rho, sigma)?).max(0.0).sqrt())
}

/// Belavkin–Staszewski divergence tr ρ log(ρ^{1/2} σ^{-1} ρ^{1/2}), inverses
/// on supports, +∞ when supp(ρ) ⊄ supp(σ).
pub fn bs_rel_entropy(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<ExtendedReal> {
    check_pair(rho, sigma)?;
    if !support_included(rho, sigma) {
        return Ok(ExtendedReal::PosInf);
    }
    let r = rho.sqrt()?;
    let inner = sigma.pinv()?.sandwich(&r);
    Ok(ExtendedReal::Finite(trace_rho_log(rho, &inner)))
}

/// H(C|D) = −D(ρ_CD ‖ I_C ⊗ ρ_D), where D is the set of factors listed in
/// `conditioning` and C the remaining factors.
pub fn cond_entropy(rho: &HermitianMatrix, dims: &[usize], conditioning: &[usize]) -> Result<f64> {
    let c_factors: Vec<usize> = (0..dims.len()).filter(|k| !conditioning.contains(k)).collect();
    if conditioning.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "conditioning factors {conditioning:?} out of range for {dims:?}"
        )));
    }
    let mut d_factors = conditioning.to_vec();
    d_factors.sort_unstable();
    d_factors.dedup();
    let perm: Vec<usize> = c_factors.iter().chain(&d_factors).copied().collect();
    let arranged = rho.permute(dims, &perm)?;
    let new_dims: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
    let dc: usize = c_factors.iter().map(|&k| dims[k]).product();
    let d_keep: Vec<usize> = (c_factors.len()..dims.len()).collect();
    let rho_d = if d_keep.is_empty() {
        HermitianMatrix::identity(1)
    } else {
        arranged.partial_trace(&new_dims, &d_keep)?
    };
    let reference = HermitianMatrix::identity(dc).kron(&rho_d);
    match rel_entropy(&arranged, &reference)? {
        ExtendedReal::Finite(x) => Ok(-x),
        ExtendedReal::PosInf => Err(Error::SupportViolation(
            "ρ_CD not supported on I ⊗ ρ_D".into(),
        )),
    }
}
