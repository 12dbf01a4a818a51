//! Seeded batch suites. Trial `t` of suite `s` draws from the stream
//! `(s << 32) | t` of the suite seed, so results do not depend on scheduling.

use rand::Rng;
use rayon::prelude::*;

use super::aep::{aep_g, AEP_MAX_DIM};
use super::classical::kl;
use super::*;
use crate::channel_div::InputAnsatz;
use crate::channels::Channel;
use crate::divergences::{bs_rel_entropy, dmax, purified_distance, rel_entropy, DensityMatrix};
use crate::error::Result;
use crate::linalg::HermitianMatrix;
use crate::random::{random_density, random_probability, random_psd, seeded_rng, SeededRng};

/// Number of trials per suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteSizes {
    pub classical: usize,
    pub dmax_chain: usize,
    pub prop2: usize,
    pub aep: usize,
    pub cond_entropy: usize,
    pub replacer: usize,
    pub dpi: usize,
    pub ordering: usize,
    pub triangle: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        Self {
            classical: 1000,
            dmax_chain: 500,
            prop2: 50,
            aep: 50,
            cond_entropy: 100,
            replacer: 200,
            dpi: 200,
            ordering: 200,
            triangle: 200,
        }
    }
}

impl SuiteSizes {
    /// A handful of trials per suite.
    pub fn smoke() -> Self {
        Self {
            classical: 20,
            dmax_chain: 10,
            prop2: 2,
            aep: 4,
            cond_entropy: 4,
            replacer: 3,
            dpi: 5,
            ordering: 5,
            triangle: 5,
        }
    }
}

pub const COND_ENTROPY_SAMPLES: usize = 16;
pub const REPLACER_RESTARTS: usize = 8;

fn run_trials(
    suite: &str,
    id: u64,
    seed: u64,
    count: usize,
    trial: impl Fn(&mut SeededRng, &str) -> Result<Vec<CheckResult>> + Sync,
) -> Vec<CheckResult> {
    let per_trial: Vec<Vec<CheckResult>> = (0..count)
        .into_par_iter()
        .map(|t| {
            let digest = format!("suite={suite} seed={seed} trial={t}");
            let mut rng = seeded_rng(seed, (id << 32) | t as u64);
            trial(&mut rng, &digest).unwrap_or_else(|e| {
                let mut r = CheckResult::equality(format!("{suite}.error"), f64::NAN, f64::NAN, 0.0, format!("{digest} error={e}"));
                r.pass = false;
                vec![r]
            })
        })
        .collect();
    per_trial.into_iter().flatten().collect()
}

pub fn classical_suite(seed: u64, count: usize) -> Vec<CheckResult> {
    run_trials("classical_chain", 1, seed, count, |rng, digest| {
        let (nx, ny) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let p = random_probability(rng, nx * ny);
        let scale = rng.random_range(0.2..3.0);
        let mut q: Vec<f64> = random_probability(rng, nx * ny).iter().map(|v| v * scale).collect();
        if rng.random_bool(0.1) {
            let k = rng.random_range(0..q.len());
            q[k] = 0.0;
        }
        let rows = |v: &[f64]| v.chunks(ny).map(<[f64]>::to_vec).collect::<Vec<_>>();
        let pj = ClassicalJoint::normalized(rows(&p))?;
        let qj = ClassicalJoint::unnormalized(rows(&q))?;
        Ok(classical_chain_rule(&pj, &qj, digest)?.to_vec())
    })
}

pub fn dmax_chain_suite(seed: u64, count: usize) -> Vec<CheckResult> {
    run_trials("dmax_chain", 2, seed, count, |rng, digest| {
        let use_identity = rng.random_bool(0.5);
        let rank = rng.random_range(1..=3);
        let scale = rng.random_range(0.3..1.5);
        let r = Channel::random(rng, 2, 2, rank).scaled(scale)?;
        let (g, din) = if use_identity {
            (Channel::identity(2), 2)
        } else {
            (Channel::partial_trace(&[2, 2], &[1])?, 4)
        };
        let f = g.then(&r)?;
        let e_rank = rng.random_range(din / 2..=3);
        let e = Channel::random(rng, din, 2, e_rank);
        let rho = random_density(rng, din);
        let sigma = random_psd(rng, din);
        Ok(vec![dmax_chain_check(&e, &f, &g, &r, &rho, &sigma, digest)?])
    })
}

fn random_stochastic(rng: &mut SeededRng, rows: usize, cols: usize) -> Result<ClassicalChannel> {
    let columns: Vec<Vec<f64>> = (0..cols).map(|_| random_probability(rng, rows)).collect();
    let data = (0..rows).flat_map(|i| columns.iter().map(move |c| c[i])).collect();
    ClassicalChannel::new(rows, cols, data)
}

pub fn prop2_suite(seed: u64, count: usize) -> Vec<CheckResult> {
    run_trials("prop2", 3, seed, count, |rng, digest| {
        let m = 1 + rng.random_range(0..2);
        let dim_b = if m == 1 { rng.random_range(2..=3) } else { 2 };
        let eps = if m == 1 { 0.05 } else { 0.01 };
        let e = random_stochastic(rng, dim_b, 4)?;
        let r_scale = rng.random_range(0.5..1.5);
        let r_data = random_probability(rng, dim_b * 2).iter().map(|v| v * 2.0 * r_scale).collect();
        let r = ClassicalChannel::new(dim_b, 2, r_data)?;
        let rho = random_probability(rng, 4);
        let s_scale = rng.random_range(0.5..1.5);
        let sigma = random_probability(rng, 4).iter().map(|v| v * s_scale).collect();
        let inst = Prop2Instance {
            dim_a1: 2,
            dim_a2: 2,
            e,
            r,
            rho,
            sigma,
        };
        Ok(vec![prop2_smooth_check(&inst, eps, eps, m, digest)?])
    })
}

pub fn remark_suite() -> Vec<CheckResult> {
    [(0.1, 0.1), (0.25, 0.1)]
        .iter()
        .flat_map(|&(e, ep)| {
            remark_counterexample(e, ep).unwrap_or_else(|err| {
                let mut r = CheckResult::equality("remark.error", f64::NAN, f64::NAN, 0.0, err.to_string());
                r.pass = false;
                vec![r]
            })
        })
        .collect()
}

fn aep_pair(p: &[f64], q: &[f64], eps: f64, n: usize, digest: &str) -> Result<Vec<CheckResult>> {
    let mut out = Vec::with_capacity(3);
    for form in [AepForm::SqrtG, AepForm::LinearG] {
        out.push(aep_bound_eval(p, q, eps, n, form, digest)?);
    }
    // lower-bound direction as a finite-n trend, not asserted
    let sqrt_form = &out[0];
    let correction = sqrt_form.rhs - kl(p, q);
    out.push(
        CheckResult::inequality(
            "aep.lower_trend",
            kl(p, q) - correction,
            sqrt_form.lhs,
            DEFAULT_TOL,
            digest,
        )
        .reported(),
    );
    Ok(out)
}

pub fn aep_suite(seed: u64, count: usize) -> Vec<CheckResult> {
    let mut out = run_trials("aep", 5, seed, count, |rng, digest| {
        let eps = rng.random_range(0.2..0.6);
        let n_min = (2.0 * aep_g(eps)).ceil() as usize;
        let d: usize = if 3usize.pow(n_min as u32) <= AEP_MAX_DIM { 3 } else { 2 };
        let mut n = n_min + rng.random_range(0..3);
        while d.pow(n as u32) > AEP_MAX_DIM {
            n -= 1;
        }
        let mix = |v: Vec<f64>| -> Vec<f64> { v.iter().map(|x| 0.8 * x + 0.2 / d as f64).collect() };
        let p = random_probability(rng, d);
        let q = mix(random_probability(rng, d));
        aep_pair(&p, &q, eps, n, &format!("{digest} eps={eps} n={n} d={d}"))
    });
    for n in [8, 9, 10] {
        match aep_pair(&[0.9, 0.1], &[0.5, 0.5], 0.3, n, &format!("suite=aep bernoulli n={n}")) {
            Ok(rs) => out.extend(rs),
            Err(e) => out.push(CheckResult::equality("aep.error", f64::NAN, 0.0, 0.0, e.to_string())),
        }
    }
    out
}

pub fn cond_entropy_suite(seed: u64, count: usize) -> Vec<CheckResult> {
    run_trials("cond_entropy", 6, seed, count, |rng, digest| {
        let rho = random_density(rng, 8);
        Ok(cond_entropy_chain_check(&rho, &[2, 2, 2], COND_ENTROPY_SAMPLES, rng, digest)?.to_vec())
    })
}

pub fn replacer_suite(seed: u64, count: usize) -> Vec<CheckResult> {
    run_trials("replacer_chain", 7, seed, count, |rng, digest| {
        let e_rank = rng.random_range(1..=3);
        let e = Channel::random(rng, 2, 2, e_rank);
        let omega = DensityMatrix::new(random_density(rng, 2))?;
        let rho = random_density(rng, 4);
        let sigma = random_density(rng, 4);
        let ansatz = InputAnsatz::multistart(REPLACER_RESTARTS, rng.random());
        Ok(vec![replacer_chain_check(&e, &omega, &rho, &sigma, &ansatz, digest)?])
    })
}

fn random_state_pair(rng: &mut SeededRng, d: usize) -> (HermitianMatrix, HermitianMatrix) {
    (random_density(rng, d), random_density(rng, d))
}

/// Data processing for D, Dmax, the Belavkin–Staszewski divergence and the
/// purified distance under random channels.
pub fn dpi_suite(seed: u64, count: usize) -> Vec<CheckResult> {
    run_trials("dpi", 8, seed, count, |rng, digest| {
        let (din, dout): (usize, usize) = (rng.random_range(2..=4), rng.random_range(2..=3));
        let rank = rng.random_range(din.div_ceil(dout)..=3);
        let ch = Channel::random(rng, din, dout, rank);
        let (rho, sigma) = random_state_pair(rng, din);
        let (a, b) = (ch.apply_full(&rho)?, ch.apply_full(&sigma)?);
        Ok(vec![
            CheckResult::inequality("dpi.rel_entropy", rel_entropy(&a, &b)?.to_f64(), rel_entropy(&rho, &sigma)?.to_f64(), DEFAULT_TOL, digest),
            CheckResult::inequality("dpi.dmax", dmax(&a, &b)?.to_f64(), dmax(&rho, &sigma)?.to_f64(), DEFAULT_TOL, digest),
            CheckResult::inequality("dpi.bs", bs_rel_entropy(&a, &b)?.to_f64(), bs_rel_entropy(&rho, &sigma)?.to_f64(), DEFAULT_TOL, digest),
            CheckResult::inequality("dpi.purified_distance", purified_distance(&a, &b)?, purified_distance(&rho, &sigma)?, DEFAULT_TOL, digest),
        ])
    })
}

/// D ≤ D_BS ≤ Dmax.
pub fn ordering_suite(seed: u64, count: usize) -> Vec<CheckResult> {
    run_trials("ordering", 9, seed, count, |rng, digest| {
        let d = rng.random_range(2..=4);
        let (rho, sigma) = random_state_pair(rng, d);
        let umegaki = rel_entropy(&rho, &sigma)?.to_f64();
        let bs = bs_rel_entropy(&rho, &sigma)?.to_f64();
        let max = dmax(&rho, &sigma)?.to_f64();
        Ok(vec![
            CheckResult::inequality("ordering.rel_entropy_bs", umegaki, bs, DEFAULT_TOL, digest),
            CheckResult::inequality("ordering.bs_dmax", bs, max, DEFAULT_TOL, digest),
        ])
    })
}

/// Triangle inequalities for Dmax and for the purified distance on
/// subnormalized states.
pub fn triangle_suite(seed: u64, count: usize) -> Vec<CheckResult> {
    run_trials("triangle", 10, seed, count, |rng, digest| {
        let d = rng.random_range(2..=4);
        let (a, b) = random_state_pair(rng, d);
        let c = random_density(rng, d);
        let dm = |x: &HermitianMatrix, y: &HermitianMatrix| dmax(x, y).map(|v| v.to_f64());
        let (sa, sb, sc) = (rng.random_range(0.3..1.0), rng.random_range(0.3..1.0), rng.random_range(0.3..1.0));
        let (pa, pb, pc) = (a.scale(sa), b.scale(sb), c.scale(sc));
        Ok(vec![
            CheckResult::inequality("triangle.dmax", dm(&a, &c)?, dm(&a, &b)? + dm(&b, &c)?, DEFAULT_TOL, digest),
            CheckResult::inequality(
                "triangle.purified_distance",
                purified_distance(&pa, &pc)?,
                purified_distance(&pa, &pb)? + purified_distance(&pb, &pc)?,
                DEFAULT_TOL,
                digest,
            ),
        ])
    })
}

/// Every suite, in a fixed order.
pub fn run_all(seed: u64, sizes: &SuiteSizes) -> Vec<CheckResult> {
    let mut out = classical_suite(seed, sizes.classical);
    out.extend(dmax_chain_suite(seed, sizes.dmax_chain));
    out.extend(prop2_suite(seed, sizes.prop2));
    out.extend(remark_suite());
    out.extend(aep_suite(seed, sizes.aep));
    out.extend(cond_entropy_suite(seed, sizes.cond_entropy));
    out.extend(replacer_suite(seed, sizes.replacer));
    out.extend(dpi_suite(seed, sizes.dpi));
    out.extend(ordering_suite(seed, sizes.ordering));
    out.extend(triangle_suite(seed, sizes.triangle));
    out
}
