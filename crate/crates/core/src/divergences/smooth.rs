use super::{check_pair, dmax, purified_distance, ExtendedReal, TRACE_TOL};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

const COMMUTE_TOL: f64 = 1e-10;
const BISECTION_STEPS: usize = 200;
const LAMBDA_RESOLUTION: f64 = 1e-13;
/// 2^λ overflows past this.
const LAMBDA_LIMIT: f64 = 1000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmoothingMode {
    /// Exact value for commuting ρ and σ.
    ExactDiagonal,
    /// Feasible candidate σ^{1/2} min(Γ, 2^λ) σ^{1/2}, Γ = σ^{-1/2} ρ σ^{-1/2};
    /// an upper bound for arbitrary inputs.
    HeuristicUpper,
}

/// Smooth max-relative entropy with the purified-distance ball of radius
/// `eps` around ρ over subnormalized states.
pub fn smooth_dmax(
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    eps: f64,
    mode: SmoothingMode,
) -> Result<ExtendedReal> {
    check_pair(rho, sigma)?;
    check_radius(eps, rho.trace())?;
    match mode {
        SmoothingMode::ExactDiagonal => {
            let (p, q) = joint_spectrum(rho, sigma)?;
            smooth_dmax_classical(&p, &q, eps)
        }
        SmoothingMode::HeuristicUpper => heuristic_upper(rho, sigma, eps),
    }
}

fn check_radius(eps: f64, mass: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("smoothing radius {eps} not in (0, 1)")));
    }
    if mass > 1.0 + TRACE_TOL {
        return Err(Error::InvalidTrace(mass));
    }
    if eps * eps >= mass {
        return Err(Error::InvalidParameter(format!(
            "smoothing radius {eps} contains the zero operator"
        )));
    }
    Ok(())
}

/// Eigenvalues of ρ and σ in a common eigenbasis.
fn joint_spectrum(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rho.dim();
    let off = |m: &HermitianMatrix| {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(m.get(i, j).norm());
                }
            }
        }
        worst
    };
    if off(rho) <= COMMUTE_TOL && off(sigma) <= COMMUTE_TOL {
        return Ok((rho.diagonal(), sigma.diagonal()));
    }
    let c = rho.commutator_norm(sigma);
    if c > COMMUTE_TOL {
        return Err(Error::NotCommuting(c));
    }
    // a generic combination separates the joint eigenspaces
    let mix = rho.add(&sigma.scale(std::f64::consts::FRAC_1_SQRT_2 * 1.3));
    let e = mix.eig();
    let mut p = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for k in 0..n {
        let v = e.vector(k);
        p.push(rho.matrix().expectation(&v).re);
        q.push(sigma.matrix().expectation(&v).re);
    }
    Ok((p, q))
}

/// max Σ √(xᵢ wᵢ) subject to Σ xᵢ = 1 and 0 ≤ xᵢ ≤ capᵢ, assuming some
/// coordinate with zero weight or infinite cap absorbs leftover mass.
fn capped_affinity(w: &[f64], cap: &[f64]) -> f64 {
    let active: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
    let total_cap: f64 = active.iter().map(|&i| cap[i]).sum();
    if total_cap <= 1.0 {
        return active.iter().map(|&i| (cap[i] * w[i]).sqrt()).sum();
    }
    let mut order = active.clone();
    order.sort_by(|&a, &b| (cap[a] / w[a]).total_cmp(&(cap[b] / w[b])));
    // suffix sums avoid cancellation when a tiny weight is left over
    let mut free_w = vec![0.0; order.len() + 1];
    for k in (0..order.len()).rev() {
        free_w[k] = free_w[k + 1] + w[order[k]];
    }
    let mut capped = 0.0;
    let mut alpha = f64::INFINITY;
    for (k, &i) in order.iter().enumerate() {
        let a = (1.0 - capped) / free_w[k];
        if a <= cap[i] / w[i] {
            alpha = a;
            break;
        }
        capped += cap[i];
    }
    active
        .iter()
        .map(|&i| (cap[i].min(alpha * w[i]) * w[i]).sqrt())
        .sum()
}

/// Exact smooth max-relative entropy of nonnegative vectors `p` (total mass at
/// most one) against `q`.
///
/// For a fixed λ the best generalized fidelity over p̃ ≤ 2^λ q has the closed
/// form p̃ᵢ = min(2^λ qᵢ, α pᵢ); λ is then found by bisection.
pub fn smooth_dmax_classical(p: &[f64], q: &[f64], eps: f64) -> Result<ExtendedReal> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    if let Some(&x) = p.iter().chain(q).find(|&&x| x < -TRACE_TOL || !x.is_finite()) {
        return Err(Error::NotPsd(x));
    }
    let mass: f64 = p.iter().map(|&x| x.max(0.0)).sum();
    check_radius(eps, mass)?;

    let mut w: Vec<f64> = p.iter().map(|&x| x.max(0.0)).collect();
    w.push((1.0 - mass).max(0.0));
    let target = (1.0 - eps * eps).sqrt();
    let mut cap = vec![0.0; w.len()];
    let mut feasible = |scale: f64| {
        for (c, &qi) in cap.iter_mut().zip(q) {
            *c = if qi > 0.0 { scale * qi } else { 0.0 };
        }
        *cap.last_mut().unwrap() = f64::INFINITY;
        capped_affinity(&w, &cap) >= target
    };

    if !feasible(f64::INFINITY) {
        return Ok(ExtendedReal::PosInf);
    }

    let ratio = p
        .iter()
        .zip(q)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(&a, &b)| a / b)
        .fold(0.0_f64, f64::max);
    let mut hi = if ratio > 0.0 { ratio.log2() } else { 0.0 };
    let mut step = 1.0;
    while !feasible(hi.exp2()) {
        hi += step;
        step *= 2.0;
        if hi > LAMBDA_LIMIT {
            return Ok(ExtendedReal::PosInf);
        }
    }
    let mut lo = hi - 1.0;
    step = 1.0;
    while feasible(lo.exp2()) {
        hi = lo;
        lo -= step;
        step *= 2.0;
        if lo < -LAMBDA_LIMIT {
            return Err(Error::InvalidParameter("smoothing ball reaches the zero operator".into()));
        }
    }
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= LAMBDA_RESOLUTION {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid.exp2()) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ExtendedReal::Finite(hi))
}

fn heuristic_upper(rho: &HermitianMatrix, sigma: &HermitianMatrix, eps: f64) -> Result<ExtendedReal> {
    let proj = sigma.support_projector();
    let trimmed = rho.sandwich(&proj);
    if purified_distance(&trimmed, rho)? > eps {
        return Ok(ExtendedReal::PosInf);
    }
    let s_half = sigma.sqrt()?;
    let s_inv = sigma.inv_sqrt()?;
    let gamma = trimmed.sandwich(&s_inv);
    let top = gamma.max_eigenvalue();
    if top <= 0.0 {
        return Ok(ExtendedReal::PosInf);
    }
    let candidate = |lambda: f64| -> HermitianMatrix {
        let c = lambda.exp2();
        let clipped = HermitianMatrix::hermitian_part(&gamma.eig().reconstruct_with(|g| g.max(0.0).min(c)));
        clipped.sandwich(&s_half)
    };
    let in_ball = |lambda: f64| -> Result<bool> { Ok(purified_distance(&candidate(lambda), rho)? <= eps) };

    let mut hi = top.log2();
    let mut lo = hi - 1.0;
    let mut step = 1.0;
    while in_ball(lo)? {
        hi = lo;
        lo -= step;
        step *= 2.0;
        if lo < -LAMBDA_LIMIT {
            return Err(Error::InvalidParameter("smoothing ball reaches the zero operator".into()));
        }
    }
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if in_ball(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    dmax(&candidate(hi), sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_probability, seeded_rng};

    /// Brute force over subnormalized binary p̃ on a grid of step `h`.
    fn grid_oracle(p: [f64; 2], q: [f64; 2], eps: f64, h: f64) -> f64 {
        let n = (1.0 / h).round() as usize;
        let target = 1.0 - eps * eps;
        let mut best = f64::INFINITY;
        for i in 0..=n {
            let a = i as f64 * h;
            for j in 0..=(n - i) {
                let b = j as f64 * h;
                let slack = ((1.0 - a - b).max(0.0) * (1.0 - p[0] - p[1]).max(0.0)).sqrt();
                let f = ((a * p[0]).sqrt() + (b * p[1]).sqrt() + slack).powi(2);
                if f >= target {
                    let v = (a / q[0]).max(b / q[1]);
                    if v > 0.0 {
                        best = best.min(v.log2());
                    }
                }
            }
        }
        best
    }

    #[test]
    fn matches_grid_oracle_on_binary_inputs() {
        let cases = [
            ([0.9, 0.1], [0.5, 0.5], 0.1),
            ([0.8, 0.2], [0.3, 0.7], 0.1),
            ([0.5, 0.5], [0.9, 0.1], 0.2),
            ([0.95, 0.05], [0.5, 0.5], 0.05),
            ([0.6, 0.3], [0.2, 0.8], 0.3),
        ];
        for (p, q, eps) in cases {
            let exact = smooth_dmax_classical(&p, &q, eps).unwrap().to_f64();
            let oracle = grid_oracle(p, q, eps, 1e-4);
            assert!(exact <= oracle + 1e-9, "{exact} > grid {oracle}");
            assert!(oracle - exact < 2e-3, "{exact} vs grid {oracle}");
        }
    }

    #[test]
    fn bounded_by_dmax_and_monotone_in_radius() {
        let mut rng = seeded_rng(31, 0);
        for _ in 0..20 {
            let p = random_probability(&mut rng, 4);
            let q = random_probability(&mut rng, 4);
            let d = p.iter().zip(&q).map(|(a, b)| a / b).fold(0.0, f64::max).log2();
            let mut prev = d;
            for eps in [0.01, 0.05, 0.1, 0.3, 0.6] {
                let s = smooth_dmax_classical(&p, &q, eps).unwrap().to_f64();
                assert!(s <= prev + 1e-12, "{s} > {prev}");
                prev = s;
            }
        }
    }

    #[test]
    fn small_radius_approaches_dmax() {
        let p = [0.9, 0.1];
        let q = [0.5, 0.5];
        let s = smooth_dmax_classical(&p, &q, 1e-4).unwrap().to_f64();
        let d = (0.9_f64 / 0.5).log2();
        assert!(s <= d && d - s < 1e-4, "{s} vs {d}");
        let same = smooth_dmax_classical(&p, &p, 0.2).unwrap().to_f64();
        assert!(same <= 0.0);
    }

    #[test]
    fn support_violation_needs_large_radius() {
        let p = [0.95, 0.05];
        let q = [1.0, 0.0];
        assert_eq!(smooth_dmax_classical(&p, &q, 0.01).unwrap(), ExtendedReal::PosInf);
        assert!(smooth_dmax_classical(&p, &q, 0.5).unwrap().is_finite());
    }

    #[test]
    fn invalid_radius_rejected() {
        let p = [0.5, 0.5];
        assert!(smooth_dmax_classical(&p, &p, 0.0).is_err());
        assert!(smooth_dmax_classical(&p, &p, 1.0).is_err());
        assert!(smooth_dmax_classical(&[0.01, 0.0], &p, 0.5).is_err());
    }

    #[test]
    fn heuristic_is_an_upper_bound_for_commuting_inputs() {
        let mut rng = seeded_rng(32, 0);
        for _ in 0..10 {
            let p = random_probability(&mut rng, 3);
            let q = random_probability(&mut rng, 3);
            let rho = HermitianMatrix::diag(&p);
            let sigma = HermitianMatrix::diag(&q);
            for eps in [0.05, 0.2] {
                let exact = smooth_dmax(&rho, &sigma, eps, SmoothingMode::ExactDiagonal).unwrap().to_f64();
                let heur = smooth_dmax(&rho, &sigma, eps, SmoothingMode::HeuristicUpper).unwrap().to_f64();
                assert!(heur >= exact - 1e-9, "{heur} < {exact}");
                assert!(heur <= dmax(&rho, &sigma).unwrap().to_f64() + 1e-9);
            }
        }
    }

    #[test]
    fn exact_mode_requires_commuting_inputs() {
        let mut rng = seeded_rng(33, 0);
        let rho = random_density(&mut rng, 2);
        let sigma = random_density(&mut rng, 2);
        assert!(matches!(
            smooth_dmax(&rho, &sigma, 0.1, SmoothingMode::ExactDiagonal),
            Err(Error::NotCommuting(_))
        ));
        assert!(smooth_dmax(&rho, &sigma, 0.1, SmoothingMode::HeuristicUpper).is_ok());
    }

    #[test]
    fn commuting_non_diagonal_pair() {
        let mut rng = seeded_rng(34, 0);
        let u = crate::random::random_unitary(&mut rng, 3);
        let p = [0.6, 0.3, 0.1];
        let q = [0.2, 0.3, 0.5];
        let rho = HermitianMatrix::diag(&p).congruence(&u);
        let sigma = HermitianMatrix::diag(&q).congruence(&u);
        let rotated = smooth_dmax(&rho, &sigma, 0.1, SmoothingMode::ExactDiagonal).unwrap().to_f64();
        let direct = smooth_dmax_classical(&p, &q, 0.1).unwrap().to_f64();
        assert!((rotated - direct).abs() < 1e-9);
    }
}
