use super::CheckResult;
use crate::channel_div::{channel_rel_entropy, InputAnsatz};
use crate::channels::Channel;
use crate::divergences::{rel_entropy, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

/// Absorbs the gap between the searched and the true channel divergence.
pub const REPLACER_TOL: f64 = 1e-4;

/// D(E(ρ)‖F(σ)) ≤ D(ρ‖σ) + D(E‖F) with F the replacer channel onto ω.
/// ρ and σ live on R ⊗ A with E acting on A; R may be trivial.
pub fn replacer_chain_check(
    e: &Channel,
    omega: &DensityMatrix,
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    ansatz: &InputAnsatz,
    digest: &str,
) -> Result<CheckResult> {
    if omega.dim() != e.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "replacement state has dimension {}, channel outputs {}",
            omega.dim(),
            e.dim_out()
        )));
    }
    let din = e.dim_in();
    if rho.dim() != sigma.dim() || !rho.dim().is_multiple_of(din) {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {} for a channel on {din} levels",
            rho.dim(),
            sigma.dim()
        )));
    }
    let f = Channel::replacer(omega, din);
    let dims = [rho.dim() / din, din];
    let lhs = rel_entropy(&e.apply(rho, &dims, 1)?, &f.apply(sigma, &dims, 1)?)?;
    let input = rel_entropy(rho, sigma)?;
    let channel = channel_rel_entropy(e, &f, ansatz)?.value;
    Ok(CheckResult::inequality(
        "replacer_chain",
        lhs.to_f64(),
        input.plus(channel).to_f64(),
        REPLACER_TOL,
        digest,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, seeded_rng};

    #[test]
    fn random_instances_hold() {
        let mut rng = seeded_rng(77, 0);
        for k in 0..5 {
            let e = Channel::random(&mut rng, 2, 2, 2);
            let omega = DensityMatrix::new(random_density(&mut rng, 2)).unwrap();
            let rho = random_density(&mut rng, 4);
            let sigma = random_density(&mut rng, 4);
            let r = replacer_chain_check(&e, &omega, &rho, &sigma, &InputAnsatz::multistart(4, k), "").unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn identity_channel_splits_exactly() {
        let mut rng = seeded_rng(77, 1);
        let omega = DensityMatrix::new(random_density(&mut rng, 2)).unwrap();
        let rho = random_density(&mut rng, 2);
        let r = replacer_chain_check(&Channel::identity(2), &omega, &rho, &rho, &InputAnsatz::multistart(2, 0), "")
            .unwrap();
        let direct = rel_entropy(&rho, &omega).unwrap().to_f64();
        assert!((r.lhs - direct).abs() < 1e-12);
        assert!(r.rhs.is_finite());
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn equal_inputs_have_nonnegative_slack() {
        let mut rng = seeded_rng(77, 2);
        let e = Channel::random(&mut rng, 2, 2, 2);
        let omega = DensityMatrix::new(random_density(&mut rng, 2)).unwrap();
        let rho = random_density(&mut rng, 4);
        let r = replacer_chain_check(&e, &omega, &rho, &rho, &InputAnsatz::multistart(8, 3), "").unwrap();
        assert!(r.slack >= -REPLACER_TOL, "{r:?}");
    }
}
