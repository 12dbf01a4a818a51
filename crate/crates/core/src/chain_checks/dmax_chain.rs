use super::{CheckResult, DEFAULT_TOL};
use crate::channel_div::channel_dmax;
use crate::channels::Channel;
use crate::divergences::{dmax, purified_distance, smooth_dmax, smooth_dmax_classical, SmoothingMode};
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, HermitianMatrix};

pub const DECOMPOSITION_TOL: f64 = 1e-9;
pub const PROP2_TOL: f64 = 1e-6;
/// Number of steps per unit on the simplex grid for the max over inputs.
pub const PROP2_GRID_STEPS: usize = 50;
const STOCHASTIC_TOL: f64 = 1e-12;

fn check_decomposition(f: &Channel, g: &Channel, r: &Channel) -> Result<()> {
    let composed = g.then(r)?;
    if composed.dim_in() != f.dim_in() || composed.dim_out() != f.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "R∘G maps {}->{} but F maps {}->{}",
            composed.dim_in(),
            composed.dim_out(),
            f.dim_in(),
            f.dim_out()
        )));
    }
    let dev = composed.choi().op.max_abs_diff(&f.choi().op);
    if dev > DECOMPOSITION_TOL {
        return Err(Error::DecompositionMismatch(dev));
    }
    Ok(())
}

/// Dmax(E(ρ)‖F(σ)) ≤ Dmax(G(ρ)‖G(σ)) + Dmax(E(ρ)‖F(ρ)) for F = R∘G.
pub fn dmax_chain_check(
    e: &Channel,
    f: &Channel,
    g: &Channel,
    r: &Channel,
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    digest: &str,
) -> Result<CheckResult> {
    if e.dim_in() != f.dim_in() || e.dim_out() != f.dim_out() {
        return Err(Error::DimensionMismatch("E and F must have the same input and output".into()));
    }
    check_decomposition(f, g, r)?;
    let e_rho = e.apply_full(rho)?;
    let lhs = dmax(&e_rho, &f.apply_full(sigma)?)?;
    let via_g = dmax(&g.apply_full(rho)?, &g.apply_full(sigma)?)?;
    let same_input = dmax(&e_rho, &f.apply_full(rho)?)?;
    Ok(CheckResult::inequality(
        "dmax_chain",
        lhs.to_f64(),
        via_g.plus(same_input).to_f64(),
        DEFAULT_TOL,
        digest,
    ))
}

/// Nonnegative matrix acting on probability vectors, `out × in`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalChannel {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ClassicalChannel {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!("{} entries for a {rows}x{cols} map", data.len())));
        }
        if data.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::InvalidParameter("classical channel entries must be nonnegative".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn dim_in(&self) -> usize {
        self.cols
    }

    pub fn dim_out(&self) -> usize {
        self.rows
    }

    /// Every column sums to one.
    pub fn is_stochastic(&self) -> bool {
        (0..self.cols).all(|j| {
            let s: f64 = (0..self.rows).map(|i| self.data[i * self.cols + j]).sum();
            (s - 1.0).abs() <= STOCHASTIC_TOL
        })
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.data[i * self.cols + j] * p[j]).sum())
            .collect()
    }

    /// The same map as a Kraus channel on diagonal operators.
    pub fn to_channel(&self) -> Result<Channel> {
        let mut kraus = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let w = self.data[i * self.cols + j];
                if w > 0.0 {
                    let mut k = ComplexMatrix::zeros(self.rows, self.cols);
                    k[(i, j)] = c64(w.sqrt(), 0.0);
                    kraus.push(k);
                }
            }
        }
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(self.rows, self.cols));
        }
        Channel::new(kraus, self.cols, self.rows)
    }
}

/// Commuting instance on A₁A₂ (index a₁·|A₂| + a₂): E is stochastic from
/// A₁A₂ to B and F = R∘tr_{A₁}.
#[derive(Clone, Debug, PartialEq)]
pub struct Prop2Instance {
    pub dim_a1: usize,
    pub dim_a2: usize,
    pub e: ClassicalChannel,
    pub r: ClassicalChannel,
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl Prop2Instance {
    fn validate(&self) -> Result<()> {
        let d = self.dim_a1 * self.dim_a2;
        if d > 4 {
            return Err(Error::InvalidParameter(format!("input dimension {d} exceeds 4")));
        }
        if self.e.dim_in() != d || self.r.dim_in() != self.dim_a2 || self.e.dim_out() != self.r.dim_out() {
            return Err(Error::DimensionMismatch("channel shapes do not match the instance".into()));
        }
        if !self.e.is_stochastic() {
            return Err(Error::InvalidParameter("E must be trace preserving".into()));
        }
        if self.rho.len() != d || self.sigma.len() != d {
            return Err(Error::DimensionMismatch("states must live on A1A2".into()));
        }
        if self.rho.iter().chain(&self.sigma).any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::NotPsd(-1.0));
        }
        let total: f64 = self.rho.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidTrace(total));
        }
        Ok(())
    }

    fn marginal_a2(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim_a2)
            .map(|a2| (0..self.dim_a1).map(|a1| v[a1 * self.dim_a2 + a2]).sum())
            .collect()
    }

    pub fn apply_e(&self, v: &[f64]) -> Vec<f64> {
        self.e.apply(v)
    }

    pub fn apply_f(&self, v: &[f64]) -> Vec<f64> {
        self.r.apply(&self.marginal_a2(v))
    }
}

pub(crate) fn vec_tensor_pow(v: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..m {
        out = out.iter().flat_map(|&a| v.iter().map(move |&b| a * b)).collect();
    }
    out
}

/// All points of the probability simplex in `d` coordinates with entries in
/// multiples of `1/steps`.
pub(crate) fn simplex_grid(d: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(d: usize, left: usize, steps: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if prefix.len() + 1 == d {
            prefix.push(left);
            out.push(prefix.iter().map(|&k| k as f64 / steps as f64).collect());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(d, left - k, steps, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, steps, steps, &mut Vec::with_capacity(d), &mut out);
    out
}

/// Smoothing that may swallow the whole (unit-mass) state gives −∞.
fn smooth_or_neg_inf(p: &[f64], q: &[f64], eps: f64) -> Result<f64> {
    if eps * eps >= p.iter().sum::<f64>() || eps >= 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(smooth_dmax_classical(p, q, eps)?.to_f64())
}

/// The smoothed chain rule on a commuting instance, with the maximum over
/// inputs taken over a simplex grid of diagonal states.
pub fn prop2_smooth_check(inst: &Prop2Instance, eps: f64, eps_prime: f64, m: usize, digest: &str) -> Result<CheckResult> {
    inst.validate()?;
    if !(1..=2).contains(&m) {
        return Err(Error::InvalidParameter(format!("m = {m} must be 1 or 2")));
    }
    if !(eps > 0.0 && eps < 1.0 && eps_prime > 0.0 && eps_prime < 1.0) {
        return Err(Error::InvalidParameter("smoothing parameters must lie in (0, 1)".into()));
    }
    let mf = m as f64;
    let radius = mf * eps + (mf * eps).sqrt() + eps_prime;
    let lhs = smooth_or_neg_inf(
        &vec_tensor_pow(&inst.apply_e(&inst.rho), m),
        &vec_tensor_pow(&inst.apply_f(&inst.sigma), m),
        radius,
    )?;
    let marginal = smooth_or_neg_inf(&inst.marginal_a2(&inst.rho), &inst.marginal_a2(&inst.sigma), eps)?;
    let mut channel_term = f64::NEG_INFINITY;
    for nu in simplex_grid(inst.dim_a1 * inst.dim_a2, PROP2_GRID_STEPS) {
        let v = smooth_or_neg_inf(
            &vec_tensor_pow(&inst.apply_e(&nu), m),
            &vec_tensor_pow(&inst.apply_f(&nu), m),
            eps_prime,
        )?;
        channel_term = channel_term.max(v);
        if channel_term == f64::INFINITY {
            break;
        }
    }
    let rhs = mf * marginal + channel_term - mf * (1.0 - eps).log2();
    Ok(CheckResult::inequality(format!("prop2.m{m}"), lhs, rhs, PROP2_TOL, digest))
}

/// Maps X on a qubit to (1−δ) tr(X)|2⟩⟨2| + δX on a qutrit.
fn flagged_embedding(delta: f64) -> Result<Channel> {
    let mut embed = ComplexMatrix::zeros(3, 2);
    embed[(0, 0)] = c64(delta.sqrt(), 0.0);
    embed[(1, 1)] = c64(delta.sqrt(), 0.0);
    let mut kraus = vec![embed];
    for i in 0..2 {
        let mut k = ComplexMatrix::zeros(3, 2);
        k[(2, i)] = c64((1.0 - delta).sqrt(), 0.0);
        kraus.push(k);
    }
    Channel::new(kraus, 2, 3)
}

fn qutrit_to_qubit_projection() -> Result<Channel> {
    let mut p = ComplexMatrix::zeros(2, 3);
    p[(0, 0)] = c64(1.0, 0.0);
    p[(1, 1)] = c64(1.0, 0.0);
    Channel::new(vec![p], 3, 2)
}

fn remark_variant(label: &str, eps: f64, eps_prime: f64, delta: f64) -> Result<Vec<CheckResult>> {
    let digest = format!("eps={eps} eps_prime={eps_prime} delta={delta}");
    let e = Channel::identity(2);
    let f = e.scaled(delta)?;
    let g = flagged_embedding(delta)?;
    let r = qutrit_to_qubit_projection()?;
    check_decomposition(&f, &g, &r)?;

    let rho = HermitianMatrix::diag(&[1.0, 0.0]);
    let sigma = HermitianMatrix::diag(&[0.0, 1.0]);
    let ball = smooth_dmax(&e.apply_full(&rho)?, &f.apply_full(&sigma)?, eps + eps_prime, SmoothingMode::ExactDiagonal)?;
    let channel_term = channel_dmax(&e, &f)?;
    let (g_rho, g_sigma) = (g.apply_full(&rho)?, g.apply_full(&sigma)?);
    let g_term = smooth_dmax(&g_rho, &g_sigma, eps, SmoothingMode::ExactDiagonal)?;
    let candidate = HermitianMatrix::diag(&[0.0, 0.0, 1.0 - delta]);
    let candidate_distance = purified_distance(&candidate, &g_rho)?;
    let chain_rhs = g_term.plus(channel_term).to_f64() - (1.0 - eps).log2();

    Ok(vec![
        CheckResult::equality(format!("{label}.lhs_infinite"), ball.to_f64(), f64::INFINITY, 0.0, &digest),
        CheckResult::inequality(
            format!("{label}.channel_term"),
            channel_term.to_f64(),
            (1.0 / delta).log2(),
            DEFAULT_TOL,
            &digest,
        ),
        CheckResult::inequality(format!("{label}.g_term"), g_term.to_f64(), 0.0, DEFAULT_TOL, &digest),
        CheckResult::inequality(format!("{label}.candidate_in_ball"), candidate_distance, eps, DEFAULT_TOL, &digest)
            .reported(),
        CheckResult::violation(format!("{label}.chain_rule_fails"), ball.to_f64(), chain_rhs, DEFAULT_TOL, &digest),
    ])
}

/// The counterexample showing the smoothed chain rule cannot hold for a
/// general G, evaluated as stated and with the flag weight adjusted so that
/// (1−δ)|2⟩⟨2| lies in the purified-distance ball around G(ρ).
pub fn remark_counterexample(eps: f64, eps_prime: f64) -> Result<Vec<CheckResult>> {
    if !(eps > 0.0 && eps_prime > 0.0 && eps + eps_prime < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "need eps, eps' > 0 and eps + eps' < 0.5, got {eps} and {eps_prime}"
        )));
    }
    let mut out = remark_variant("remark", eps, eps_prime, eps)?;
    let delta = 1.0 - (1.0 - eps * eps).sqrt();
    out.extend(remark_variant("remark.repaired", eps, eps_prime, delta)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_probability, random_psd, seeded_rng};

    #[test]
    fn trivial_decomposition_is_tight() {
        let mut rng = seeded_rng(5, 0);
        let e = Channel::random(&mut rng, 2, 2, 2);
        let f = Channel::random(&mut rng, 2, 2, 3);
        let rho = random_density(&mut rng, 2);
        let r = dmax_chain_check(&e, &f, &Channel::identity(2), &f, &rho, &rho, "").unwrap();
        assert!(r.pass);
        assert!(r.slack.abs() < 1e-9);
    }

    #[test]
    fn decomposition_mismatch_is_rejected() {
        let mut rng = seeded_rng(5, 1);
        let e = Channel::random(&mut rng, 2, 2, 2);
        let f = Channel::random(&mut rng, 2, 2, 2);
        let other = Channel::random(&mut rng, 2, 2, 2);
        let rho = random_density(&mut rng, 2);
        let err = dmax_chain_check(&e, &f, &Channel::identity(2), &other, &rho, &rho, "").unwrap_err();
        assert!(matches!(err, Error::DecompositionMismatch(_)));
    }

    #[test]
    fn partial_trace_decomposition_holds() {
        let mut rng = seeded_rng(5, 2);
        for _ in 0..20 {
            let e = Channel::random(&mut rng, 4, 2, 3);
            let g = Channel::partial_trace(&[2, 2], &[1]).unwrap();
            let r = Channel::random(&mut rng, 2, 2, 2).scaled(0.7).unwrap();
            let f = g.then(&r).unwrap();
            let rho = random_density(&mut rng, 4);
            let sigma = random_psd(&mut rng, 4);
            assert!(dmax_chain_check(&e, &f, &g, &r, &rho, &sigma, "").unwrap().pass);
        }
    }

    #[test]
    fn simplex_grid_counts() {
        assert_eq!(simplex_grid(2, 4).len(), 5);
        assert_eq!(simplex_grid(4, 50).len(), 23_426);
        assert!(simplex_grid(3, 7).iter().all(|v| (v.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }

    fn random_instance(seed: u64, dim_b: usize) -> Prop2Instance {
        let mut rng = seeded_rng(seed, 0);
        let mut e = Vec::new();
        let cols: Vec<Vec<f64>> = (0..4).map(|_| random_probability(&mut rng, dim_b)).collect();
        for i in 0..dim_b {
            for c in &cols {
                e.push(c[i]);
            }
        }
        let r: Vec<f64> = random_probability(&mut rng, dim_b * 2).iter().map(|x| x * 2.0).collect();
        Prop2Instance {
            dim_a1: 2,
            dim_a2: 2,
            e: ClassicalChannel::new(dim_b, 4, e).unwrap(),
            r: ClassicalChannel::new(dim_b, 2, r).unwrap(),
            rho: random_probability(&mut rng, 4),
            sigma: random_probability(&mut rng, 4).iter().map(|x| 1.5 * x).collect(),
        }
    }

    #[test]
    fn prop2_random_instances() {
        for seed in 0..3 {
            let inst = random_instance(seed, 2 + seed as usize % 2);
            assert!(prop2_smooth_check(&inst, 0.05, 0.05, 1, "").unwrap().pass);
        }
        let inst = random_instance(9, 2);
        assert!(prop2_smooth_check(&inst, 0.01, 0.01, 2, "").unwrap().pass);
    }

    #[test]
    fn prop2_small_smoothing_approaches_unsmoothed_form() {
        let inst = random_instance(4, 2);
        let r = prop2_smooth_check(&inst, 1e-6, 1e-6, 1, "").unwrap();
        // unsmoothed chain rule with G = tr_{A1} and the max over the grid
        let lhs = dmax(
            &HermitianMatrix::diag(&inst.apply_e(&inst.rho)),
            &HermitianMatrix::diag(&inst.apply_f(&inst.sigma)),
        )
        .unwrap()
        .to_f64();
        assert!((r.lhs - lhs).abs() < 0.02, "{} vs {lhs}", r.lhs);
        assert!(r.pass);
    }

    #[test]
    fn classical_channel_matches_kraus_form() {
        let c = ClassicalChannel::new(2, 2, vec![0.9, 0.2, 0.1, 0.8]).unwrap();
        assert!(c.is_stochastic());
        let out = c.to_channel().unwrap().apply_full(&HermitianMatrix::diag(&[0.3, 0.7])).unwrap();
        let want = c.apply(&[0.3, 0.7]);
        assert!((out.get(0, 0).re - want[0]).abs() < 1e-15);
        assert!(out.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn remark_literal_and_repaired() {
        let res = remark_counterexample(0.1, 0.1).unwrap();
        let get = |n: &str| res.iter().find(|r| r.name == n).unwrap();
        assert!(get("remark.lhs_infinite").pass);
        assert!(get("remark.channel_term").pass);
        assert!((get("remark.channel_term").lhs - 10f64.log2()).abs() < 1e-9);
        // the stated candidate sits at purified distance √(2ε − ε²) > ε
        let cand = get("remark.candidate_in_ball");
        assert!((cand.lhs - (0.2f64 - 0.01).sqrt()).abs() < 1e-7);
        assert!(!get("remark.g_term").pass);
        assert_eq!(get("remark.g_term").lhs, f64::INFINITY);
        for name in [
            "remark.repaired.lhs_infinite",
            "remark.repaired.channel_term",
            "remark.repaired.g_term",
            "remark.repaired.candidate_in_ball",
            "remark.repaired.chain_rule_fails",
        ] {
            assert!(get(name).pass, "{name}: {:?}", get(name));
        }
        assert!(remark_counterexample(0.3, 0.25).is_err());
    }
}
