use super::{check_pair, ExtendedReal, TRACE_TOL};
use crate::error::{Error, Result};
use crate::linalg::{block_components, ComplexMatrix, HermitianMatrix};

const BISECTION_STEPS: usize = 200;
const MAX_DOUBLINGS: usize = 2000;

/// One diagonal block of the pair (ρ, σ).
struct Block {
    rho: HermitianMatrix,
    sigma: HermitianMatrix,
}

fn extract(m: &HermitianMatrix, idx: &[usize]) -> HermitianMatrix {
    let b = idx.len();
    HermitianMatrix::hermitian_part(&ComplexMatrix::from_fn(b, b, |i, j| m.get(idx[i], idx[j])))
}

/// (tr ρ P, tr σ P) with P the projector onto the positive eigenspace of ρ − tσ.
fn positive_part_weights(blocks: &[Block], t: f64) -> (f64, f64) {
    let mut a = 0.0;
    let mut b = 0.0;
    for blk in blocks {
        let diff = blk.rho.sub(&blk.sigma.scale(t));
        let e = diff.eig();
        for (k, &l) in e.values.iter().enumerate() {
            if l <= 0.0 {
                break;
            }
            let v = e.vector(k);
            a += blk.rho.matrix().expectation(&v).re;
            b += blk.sigma.matrix().expectation(&v).re;
        }
    }
    (a, b)
}

/// −log₂ min{tr σQ : 0 ≤ Q ≤ I, tr ρQ ≥ 1 − ε}.
///
/// The optimal test is a Neyman–Pearson projector onto the positive part of
/// ρ − tσ, mixed between the two sides of the threshold so that the type-I
/// constraint holds with equality. The threshold is located by bisection;
/// tr ρ P₊(ρ − tσ) is nonincreasing in t. Block-diagonal structure shared by
/// ρ and σ is exploited, which keeps tensor powers of sparse states cheap.
pub fn hypothesis_testing_div(rho: &HermitianMatrix, sigma: &HermitianMatrix, eps: f64) -> Result<ExtendedReal> {
    check_pair(rho, sigma)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("type-I error {eps} not in (0, 1)")));
    }
    let t = rho.trace();
    if (t - 1.0).abs() > TRACE_TOL * (rho.dim() as f64).max(1.0) {
        return Err(Error::InvalidTrace(t));
    }
    let blocks: Vec<Block> = block_components(&[rho.matrix(), sigma.matrix()])
        .into_iter()
        .map(|idx| Block {
            rho: extract(rho, &idx),
            sigma: extract(sigma, &idx),
        })
        .collect();
    neyman_pearson(&blocks, eps)
}

/// Classical version on probability vectors; every coordinate is its own block.
pub fn hypothesis_testing_div_classical(p: &[f64], q: &[f64], eps: f64) -> Result<ExtendedReal> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    hypothesis_testing_div(&HermitianMatrix::diag(p), &HermitianMatrix::diag(q), eps)
}

fn neyman_pearson(blocks: &[Block], eps: f64) -> Result<ExtendedReal> {
    let target = 1.0 - eps;
    let kernel_mass: f64 = blocks
        .iter()
        .map(|b| b.rho.trace_product(&b.sigma.kernel_projector()))
        .sum();
    if kernel_mass >= target {
        return Ok(ExtendedReal::PosInf);
    }

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut hi_w = positive_part_weights(blocks, hi);
    let mut doublings = 0;
    while hi_w.0 > target {
        lo = hi;
        hi *= 2.0;
        hi_w = positive_part_weights(blocks, hi);
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Ok(ExtendedReal::PosInf);
        }
    }
    let mut lo_w = positive_part_weights(blocks, lo);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let w = positive_part_weights(blocks, mid);
        if w.0 > target {
            lo = mid;
            lo_w = w;
        } else {
            hi = mid;
            hi_w = w;
        }
    }

    let beta = if lo_w.0 > hi_w.0 {
        let theta = ((target - hi_w.0) / (lo_w.0 - hi_w.0)).clamp(0.0, 1.0);
        theta * lo_w.1 + (1.0 - theta) * hi_w.1
    } else {
        hi_w.1
    };
    if beta <= 0.0 {
        return Ok(ExtendedReal::PosInf);
    }
    Ok(ExtendedReal::Finite(-beta.log2()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_probability, seeded_rng};

    /// Greedy classical Neyman–Pearson: accept outcomes in decreasing
    /// likelihood-ratio order, the last one fractionally.
    fn classical_oracle(p: &[f64], q: &[f64], eps: f64) -> f64 {
        let mut idx: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
        idx.sort_by(|&a, &b| (p[b] * q[a]).total_cmp(&(p[a] * q[b])));
        let mut need = 1.0 - eps;
        let mut beta = 0.0;
        for i in idx {
            if need <= 0.0 {
                break;
            }
            let take = (need / p[i]).min(1.0);
            beta += take * q[i];
            need -= take * p[i];
        }
        -beta.log2()
    }

    #[test]
    fn identical_states_give_log_of_acceptance() {
        let mut rng = seeded_rng(41, 0);
        let rho = random_density(&mut rng, 3);
        for eps in [0.05, 0.3, 0.7] {
            let v = hypothesis_testing_div(&rho, &rho, eps).unwrap().to_f64();
            assert!((v + (1.0 - eps).log2()).abs() < 1e-8, "{v}");
        }
    }

    #[test]
    fn matches_classical_greedy_oracle() {
        let mut rng = seeded_rng(42, 0);
        for _ in 0..30 {
            let p = random_probability(&mut rng, 5);
            let q = random_probability(&mut rng, 5);
            for eps in [0.01, 0.1, 0.4] {
                let v = hypothesis_testing_div_classical(&p, &q, eps).unwrap().to_f64();
                let o = classical_oracle(&p, &q, eps);
                assert!((v - o).abs() < 1e-8, "{v} vs {o}");
            }
        }
    }

    #[test]
    fn nondecreasing_in_eps() {
        let mut rng = seeded_rng(43, 0);
        let rho = random_density(&mut rng, 3);
        let sigma = random_density(&mut rng, 3);
        let mut prev = f64::NEG_INFINITY;
        for k in 1..20 {
            let v = hypothesis_testing_div(&rho, &sigma, k as f64 * 0.05).unwrap().to_f64();
            assert!(v >= prev - 1e-9);
            prev = v;
        }
    }

    #[test]
    fn orthogonal_support_is_infinite() {
        let rho = HermitianMatrix::diag(&[1.0, 0.0]);
        let sigma = HermitianMatrix::diag(&[0.0, 1.0]);
        assert_eq!(hypothesis_testing_div(&rho, &sigma, 0.1).unwrap(), ExtendedReal::PosInf);
        let partial = HermitianMatrix::diag(&[0.5, 0.5]);
        let v = hypothesis_testing_div(&partial, &sigma, 0.7).unwrap();
        assert_eq!(v, ExtendedReal::PosInf);
        assert!(hypothesis_testing_div(&partial, &sigma, 0.3).unwrap().is_finite());
    }
}
