use rand::Rng;

use super::{CheckResult, DEFAULT_TOL};
use crate::divergences::{cond_entropy, TRACE_TOL};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::random::random_density;

const RANK_TOL: f64 = 1e-10;
/// Reconstructed samples must be states to this accuracy.
pub const SAMPLE_STATE_TOL: f64 = 1e-8;

fn check_dims(rho: &HermitianMatrix, dims: &[usize]) -> Result<()> {
    if dims.len() != 3 || dims.iter().product::<usize>() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "expected three factors C1 C2 D multiplying to {}, got {dims:?}",
            rho.dim()
        )));
    }
    Ok(())
}

/// ν = ν_{C₁D}^{1/2} ρ_{C₂|C₁D} ν_{C₁D}^{1/2} with
/// ρ_{C₂|C₁D} = ρ_{C₁D}^{−1/2} ρ ρ_{C₁D}^{−1/2}, for ρ on C₁ ⊗ C₂ ⊗ D and
/// ν_{C₁D} on C₁ ⊗ D. The result is ordered C₁ C₂ D.
pub fn conditional_sample(rho: &HermitianMatrix, dims: &[usize], nu_c1d: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_dims(rho, dims)?;
    let (c1, c2, d) = (dims[0], dims[1], dims[2]);
    if nu_c1d.dim() != c1 * d {
        return Err(Error::DimensionMismatch(format!("ν_C1D has dimension {}, need {}", nu_c1d.dim(), c1 * d)));
    }
    let arranged_dims = [c1, d, c2];
    let arranged = rho.permute(dims, &[0, 2, 1])?;
    let rho_c1d = arranged.partial_trace(&arranged_dims, &[0, 1])?;
    if rho_c1d.min_eigenvalue() <= RANK_TOL {
        return Err(Error::InvalidParameter("ρ_C1D is rank deficient".into()));
    }
    let id = HermitianMatrix::identity(c2);
    let conditional = arranged.sandwich(&rho_c1d.inv_sqrt()?.kron(&id));
    let nu = conditional.sandwich(&nu_c1d.sqrt()?.kron(&id));
    let nu = nu.permute(&arranged_dims, &[0, 2, 1])?;
    nu.ensure_psd(SAMPLE_STATE_TOL)?;
    if (nu.trace() - 1.0).abs() > SAMPLE_STATE_TOL {
        return Err(Error::InvalidTrace(nu.trace()));
    }
    Ok(nu)
}

/// The chain rule H(C₁C₂|D) = H(C₁|D) + H(C₂|C₁D) and its relaxation
/// H(C₁C₂|D) ≥ H(C₁|D) + min_ν H(C₂|C₁D)_ν, with the minimum over ν = ρ and
/// `samples − 1` conditional samples from random ν_{C₁D}.
pub fn cond_entropy_chain_check<R: Rng + ?Sized>(
    rho: &HermitianMatrix,
    dims: &[usize],
    samples: usize,
    rng: &mut R,
    digest: &str,
) -> Result<[CheckResult; 2]> {
    check_dims(rho, dims)?;
    if rho.min_eigenvalue() <= RANK_TOL {
        return Err(Error::InvalidParameter("ρ is rank deficient".into()));
    }
    if (rho.trace() - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidTrace(rho.trace()));
    }
    let joint = cond_entropy(rho, dims, &[2])?;
    let first = cond_entropy(&rho.partial_trace(dims, &[0, 2])?, &[dims[0], dims[2]], &[1])?;
    let second = cond_entropy(rho, dims, &[0, 2])?;

    let mut min_second = second;
    let c1d = dims[0] * dims[2];
    for _ in 1..samples.max(1) {
        let nu = conditional_sample(rho, dims, &random_density(rng, c1d))?;
        min_second = min_second.min(cond_entropy(&nu, dims, &[0, 2])?);
    }
    Ok([
        CheckResult::equality("cond_entropy.chain_equality", joint, first + second, DEFAULT_TOL, digest),
        CheckResult::inequality("cond_entropy.sampled_bound", first + min_second, joint, DEFAULT_TOL, digest),
    ])
}
