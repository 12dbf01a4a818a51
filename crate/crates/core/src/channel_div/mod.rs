//! Channel divergences.
//!
//! Channel relative entropies are maxima over input states and are computed
//! by searching restricted input families; every such value is a lower bound
//! and is reported with `certified = false`. The channel max-relative entropy
//! has a closed form in terms of Choi matrices and is exact.

pub mod optimize;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{pull_through, purification, Channel, ChoiMatrix};
use crate::divergences::{bs_rel_entropy, dmax, rel_entropy, DensityMatrix, ExtendedReal};
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, HermitianMatrix};
use crate::random::{gaussian_c64, seeded_rng};
use optimize::{argmax, coordinate_ascent, golden_section_max};

/// Covariance deviation allowed before a symmetry reduction is used.
pub const COVARIANCE_TOL: f64 = 1e-9;
const GOLDEN_TOL: f64 = 1e-10;
const REFINE_ROUNDS: usize = 60;
const ASCENT_START_STEP: f64 = 0.1;
const ASCENT_MIN_STEP: f64 = 1e-6;
const ASCENT_MAX_EVALS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnsatzKind {
    /// ρ_R = diag(p, 1 − p) on a qubit reference.
    #[serde(rename = "diag-1param")]
    Diag1Param,
    /// ρ_R = diag(p₁, p₂, p₂, 1 − p₁ − 2p₂) on a two-qubit reference.
    #[serde(rename = "diag-2param-symmetric")]
    Diag2ParamSymmetric,
    /// Random full-rank starts followed by coordinate ascent.
    #[serde(rename = "general-multistart")]
    GeneralMultistart,
}

impl AnsatzKind {
    pub fn label(self) -> &'static str {
        match self {
            AnsatzKind::Diag1Param => "diag-1param",
            AnsatzKind::Diag2ParamSymmetric => "diag-2param-symmetric",
            AnsatzKind::GeneralMultistart => "general-multistart",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputAnsatz {
    pub kind: AnsatzKind,
    /// Grid points per unit interval (grid step 1/(resolution − 1)).
    pub resolution: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl InputAnsatz {
    pub fn diag_1param() -> Self {
        Self {
            kind: AnsatzKind::Diag1Param,
            resolution: 1001,
            restarts: 1,
            seed: 0,
        }
    }

    pub fn diag_2param() -> Self {
        Self {
            kind: AnsatzKind::Diag2ParamSymmetric,
            resolution: 101,
            restarts: 1,
            seed: 0,
        }
    }

    pub fn multistart(restarts: usize, seed: u64) -> Self {
        Self {
            kind: AnsatzKind::GeneralMultistart,
            resolution: 3,
            restarts,
            seed,
        }
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.resolution < 3 {
            return Err(Error::InvalidParameter(format!("resolution {} < 3", self.resolution)));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidParameter("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of a channel divergence search.
#[derive(Clone, Debug)]
pub struct DivergenceReport {
    /// Value in bits.
    pub value: ExtendedReal,
    pub argmax_state: DensityMatrix,
    pub ansatz: InputAnsatz,
    pub iterations: usize,
    pub certified: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kernel {
    Umegaki,
    BelavkinStaszewski,
}

struct Objective {
    je: ChoiMatrix,
    jf: ChoiMatrix,
    kernel: Kernel,
}

impl Objective {
    fn new(e: &Channel, f: &Channel, kernel: Kernel) -> Result<Self> {
        check_same_shape(e, f)?;
        Ok(Self {
            je: e.choi(),
            jf: f.choi(),
            kernel,
        })
    }

    fn exact(&self, rho_r: &HermitianMatrix) -> Result<ExtendedReal> {
        let a = pull_through(rho_r, &self.je)?;
        let b = pull_through(rho_r, &self.jf)?;
        match self.kernel {
            Kernel::Umegaki => rel_entropy(&a, &b),
            Kernel::BelavkinStaszewski => bs_rel_entropy(&a, &b),
        }
    }

    /// +∞ for support violations, NaN on numerical failure.
    fn eval(&self, rho_r: &HermitianMatrix) -> f64 {
        self.exact(rho_r).map_or(f64::NAN, ExtendedReal::to_f64)
    }
}

/// Local refinement only trusts finite values: near the boundary of the
/// state space tiny eigenvalues of the second argument drop below the
/// support threshold and produce spurious +∞.
fn finite_or_nan(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::NAN
    }
}

fn check_same_shape(e: &Channel, f: &Channel) -> Result<()> {
    if e.dim_in() != f.dim_in() || e.dim_out() != f.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "channels {}->{} and {}->{}",
            e.dim_in(),
            e.dim_out(),
            f.dim_in(),
            f.dim_out()
        )));
    }
    Ok(())
}

/// Dmax(J^𝓔 ‖ J^𝓕), exact.
pub fn channel_dmax(e: &Channel, f: &Channel) -> Result<ExtendedReal> {
    check_same_shape(e, f)?;
    dmax(&e.choi().op, &f.choi().op)
}

/// D(√ρ_R J^𝓔 √ρ_R ‖ √ρ_R J^𝓕 √ρ_R).
pub fn fixed_input_rel_entropy(e: &Channel, f: &Channel, rho_r: &HermitianMatrix) -> Result<ExtendedReal> {
    check_same_shape(e, f)?;
    let a = pull_through(rho_r, &e.choi())?;
    let b = pull_through(rho_r, &f.choi())?;
    rel_entropy(&a, &b)
}

/// Stabilized channel relative entropy, lower bound over the ansatz family.
pub fn channel_rel_entropy(e: &Channel, f: &Channel, ansatz: &InputAnsatz) -> Result<DivergenceReport> {
    let obj = Objective::new(e, f, Kernel::Umegaki)?;
    search(&obj, e, f, ansatz, &[])
}

/// Belavkin–Staszewski channel divergence, lower bound over the ansatz family.
pub fn bs_channel_rel_entropy(e: &Channel, f: &Channel, ansatz: &InputAnsatz) -> Result<DivergenceReport> {
    let obj = Objective::new(e, f, Kernel::BelavkinStaszewski)?;
    search(&obj, e, f, ansatz, &[])
}

fn search(
    obj: &Objective,
    e: &Channel,
    f: &Channel,
    ansatz: &InputAnsatz,
    extra_starts: &[Vec<f64>],
) -> Result<DivergenceReport> {
    ansatz.validate()?;
    let (arg, evaluations) = match ansatz.kind {
        AnsatzKind::Diag1Param => {
            require_z_covariant(e, f)?;
            let (p, _, n) = diag1_search(obj, ansatz.resolution);
            (HermitianMatrix::diag(&[p, 1.0 - p]), n)
        }
        AnsatzKind::Diag2ParamSymmetric => {
            require_two_copy_symmetric(e, f)?;
            let (p, _, n) = diag2_search(obj, ansatz.resolution, extra_starts);
            (diag2_state(p[0], p[1]), n)
        }
        AnsatzKind::GeneralMultistart => {
            let dim = e.dim_in();
            let (state, _, n) = multistart(|rho| obj.eval(rho), dim, ansatz.restarts, ansatz.seed);
            (state, n)
        }
    };
    let value = obj.exact(&arg)?;
    Ok(DivergenceReport {
        value,
        argmax_state: DensityMatrix::new(arg)?,
        ansatz: *ansatz,
        iterations: evaluations,
        certified: false,
    })
}

fn require_z_covariant(e: &Channel, f: &Channel) -> Result<()> {
    for (name, ch) in [("E", e), ("F", f)] {
        let dev = ch
            .z_covariance_deviation()
            .map_err(|_| Error::NotCovariant(format!("{name} is not a qubit channel")))?;
        if dev > COVARIANCE_TOL {
            return Err(Error::NotCovariant(format!("{name} deviates from Z-covariance by {dev:.3e}")));
        }
    }
    Ok(())
}

fn require_two_copy_symmetric(e: &Channel, f: &Channel) -> Result<()> {
    let z = ComplexMatrix::from_diag(&[1.0, -1.0]);
    let i2 = ComplexMatrix::identity(2);
    let mut swap = ComplexMatrix::zeros(4, 4);
    for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        swap[(a, b)] = c64(1.0, 0.0);
    }
    let ops = [("Z⊗I", z.kron(&i2)), ("I⊗Z", i2.kron(&z)), ("SWAP", swap)];
    for (name, ch) in [("E", e), ("F", f)] {
        if ch.dim_in() != 4 || ch.dim_out() != 4 {
            return Err(Error::NotCovariant(format!("{name} is not a two-qubit channel")));
        }
        for (label, u) in &ops {
            let dev = ch.covariance_deviation(u, u);
            if dev > COVARIANCE_TOL {
                return Err(Error::NotCovariant(format!("{name} deviates from {label} covariance by {dev:.3e}")));
            }
        }
    }
    Ok(())
}

fn grid(resolution: usize) -> Vec<f64> {
    let h = 1.0 / (resolution - 1) as f64;
    (0..resolution).map(|k| k as f64 * h).collect()
}

fn diag1_value(obj: &Objective, p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    obj.eval(&HermitianMatrix::diag(&[p, 1.0 - p]))
}

/// Grid then golden-section refinement around the best grid point.
fn diag1_search(obj: &Objective, resolution: usize) -> (f64, f64, usize) {
    let ps = grid(resolution);
    let values: Vec<f64> = ps.par_iter().map(|&p| diag1_value(obj, p)).collect();
    let k = argmax(&values).unwrap_or(0);
    let (mut best_p, mut best_v) = (ps[k], values[k]);
    let mut evals = resolution;
    if best_v.is_finite() {
        let lo = ps[k.saturating_sub(1)];
        let hi = ps[(k + 1).min(resolution - 1)];
        let o = golden_section_max(|p| finite_or_nan(diag1_value(obj, p)), lo, hi, GOLDEN_TOL);
        evals += o.evaluations;
        if o.value > best_v {
            best_p = o.arg;
            best_v = o.value;
        }
    }
    (best_p, best_v, evals)
}

/// Grid rows (p, value) and the refined optimizer (p*, value*).
pub type Scan = (Vec<(f64, f64)>, (f64, f64));

/// Values of D(√ρ_R J^𝓔 √ρ_R ‖ √ρ_R J^𝓕 √ρ_R) for ρ_R = diag(p, 1 − p) on a
/// uniform grid of p ∈ [0, 1], plus the refined optimizer.
pub fn scan_diag1(e: &Channel, f: &Channel, resolution: usize) -> Result<Scan> {
    if resolution < 3 {
        return Err(Error::InvalidParameter(format!("resolution {resolution} < 3")));
    }
    let obj = Objective::new(e, f, Kernel::Umegaki)?;
    if e.dim_in() != 2 {
        return Err(Error::DimensionMismatch("scan needs qubit-input channels".into()));
    }
    let ps = grid(resolution);
    let values: Vec<f64> = ps.par_iter().map(|&p| diag1_value(&obj, p)).collect();
    let (p, v, _) = diag1_search(&obj, resolution);
    Ok((ps.into_iter().zip(values).collect(), (p, v)))
}

pub fn diag2_state(p1: f64, p2: f64) -> HermitianMatrix {
    HermitianMatrix::diag(&[p1, p2, p2, 1.0 - p1 - 2.0 * p2])
}

fn diag2_value(obj: &Objective, p1: f64, p2: f64) -> f64 {
    if p1 < 0.0 || p2 < 0.0 || p1 + 2.0 * p2 > 1.0 + 1e-15 {
        return f64::NAN;
    }
    obj.eval(&diag2_state(p1, p2.min((1.0 - p1) / 2.0)))
}

/// Simplex grid then alternating golden-section refinement from the best grid
/// point and any extra starts.
fn diag2_search(obj: &Objective, resolution: usize, extra_starts: &[Vec<f64>]) -> (Vec<f64>, f64, usize) {
    let h = 1.0 / (resolution - 1) as f64;
    let mut points = Vec::new();
    for i in 0..resolution {
        for j in 0..resolution {
            let (p1, p2) = (i as f64 * h, j as f64 * h);
            if p1 + 2.0 * p2 <= 1.0 + 1e-12 {
                points.push((p1, p2));
            }
        }
    }
    let values: Vec<f64> = points.par_iter().map(|&(a, b)| diag2_value(obj, a, b)).collect();
    let mut evals = points.len();
    let k = argmax(&values).unwrap_or(0);

    let mut starts = vec![(vec![points[k].0, points[k].1], values[k], h)];
    for s in extra_starts {
        starts.push((s.clone(), finite_or_nan(diag2_value(obj, s[0], s[1])), h));
    }
    let refined: Vec<(Vec<f64>, f64, usize)> = starts
        .into_par_iter()
        .map(|(x, v, width)| refine_diag2(obj, x, v, width))
        .collect();
    let mut best = (vec![points[k].0, points[k].1], values[k]);
    for (x, v, n) in refined {
        evals += n;
        if v > best.1 {
            best = (x, v);
        }
    }
    (best.0, best.1, evals)
}

fn refine_diag2(obj: &Objective, mut x: Vec<f64>, mut v: f64, width: f64) -> (Vec<f64>, f64, usize) {
    let mut evals = 0;
    if !v.is_finite() {
        return (x, v, evals);
    }
    for _ in 0..REFINE_ROUNDS {
        let before = v;
        let p2 = x[1];
        let hi1 = 1.0 - 2.0 * p2;
        let o = golden_section_max(
            |p1| finite_or_nan(diag2_value(obj, p1, p2)),
            (x[0] - width).max(0.0),
            (x[0] + width).min(hi1),
            GOLDEN_TOL,
        );
        evals += o.evaluations;
        if o.value > v {
            x[0] = o.arg;
            v = o.value;
        }
        let p1 = x[0];
        let hi2 = (1.0 - p1) / 2.0;
        let o = golden_section_max(
            |p2| finite_or_nan(diag2_value(obj, p1, p2)),
            (x[1] - width).max(0.0),
            (x[1] + width).min(hi2),
            GOLDEN_TOL,
        );
        evals += o.evaluations;
        if o.value > v {
            x[1] = o.arg;
            v = o.value;
        }
        if v - before <= 1e-13 {
            break;
        }
    }
    (x, v, evals)
}

/// ρ = A A† / tr(A A†) with A lower triangular; `x` holds the d real diagonal
/// entries followed by (re, im) pairs of the strictly lower entries.
pub fn cholesky_state(x: &[f64], d: usize) -> HermitianMatrix {
    let mut a = ComplexMatrix::zeros(d, d);
    let mut k = d;
    for i in 0..d {
        a[(i, i)] = c64(x[i], 0.0);
        for j in 0..i {
            a[(i, j)] = c64(x[k], x[k + 1]);
            k += 2;
        }
    }
    let rho = HermitianMatrix::hermitian_part(&(&a * &a.adjoint()));
    let t = rho.trace();
    if t > 0.0 {
        rho.scale(1.0 / t)
    } else {
        HermitianMatrix::identity(d).scale(1.0 / d as f64)
    }
}

fn random_start<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(d * d);
    for _ in 0..d {
        x.push(gaussian_c64(rng).norm() + 0.1);
    }
    for _ in 0..d * (d - 1) / 2 {
        let z = gaussian_c64(rng);
        x.push(z.re);
        x.push(z.im);
    }
    x
}

/// Maximizes `f` over density matrices of dimension `d`. Restart 0 starts at
/// the maximally mixed state; the others at seeded random full-rank states.
/// Restarts run in parallel and the first best restart wins.
pub fn multistart(
    f: impl Fn(&HermitianMatrix) -> f64 + Sync,
    d: usize,
    restarts: usize,
    seed: u64,
) -> (HermitianMatrix, f64, usize) {
    let runs: Vec<(Vec<f64>, f64, usize)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                let mut x = vec![1.0; d];
                x.resize(d * d, 0.0);
                x
            } else {
                random_start(&mut seeded_rng(seed, r as u64), d)
            };
            let v0 = f(&cholesky_state(&start, d));
            if v0 == f64::INFINITY {
                return (start, v0, 1);
            }
            let o = coordinate_ascent(
                |x| finite_or_nan(f(&cholesky_state(x, d))),
                start,
                ASCENT_START_STEP,
                ASCENT_MIN_STEP,
                ASCENT_MAX_EVALS,
            );
            (o.arg, o.value, o.evaluations)
        })
        .collect();
    let values: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let k = argmax(&values).unwrap_or(0);
    let evals = runs.iter().map(|r| r.2).sum();
    (cholesky_state(&runs[k].0, d), runs[k].1, evals)
}

/// Non-stabilized channel relative entropy max_ρ D(𝓔(ρ)‖𝓕(ρ)) without a
/// reference system; lower bound from multistart search.
pub fn non_stabilized_rel_entropy(e: &Channel, f: &Channel, restarts: usize, seed: u64) -> Result<DivergenceReport> {
    check_same_shape(e, f)?;
    let value_of = |rho: &HermitianMatrix| -> Result<ExtendedReal> { rel_entropy(&e.apply_full(rho)?, &f.apply_full(rho)?) };
    let (state, _, evals) = multistart(
        |rho| value_of(rho).map_or(f64::NAN, ExtendedReal::to_f64),
        e.dim_in(),
        restarts,
        seed,
    );
    Ok(DivergenceReport {
        value: value_of(&state)?,
        argmax_state: DensityMatrix::new(state)?,
        ansatz: InputAnsatz::multistart(restarts, seed),
        iterations: evals,
        certified: false,
    })
}

/// Two-copy lower bound minus twice the single-copy value.
#[derive(Clone, Debug)]
pub struct GapReport {
    pub single: DivergenceReport,
    pub double: DivergenceReport,
    pub gap: f64,
}

/// D(𝓔⊗𝓔‖𝓕⊗𝓕) − 2 D(𝓔‖𝓕) for Z-covariant qubit channels, with the
/// single-copy value from the one-parameter family and the two-copy value
/// from `two_copy`. The two-copy search is also started from the product of
/// the single-copy optimizer with itself.
pub fn nonadditivity_gap(e: &Channel, f: &Channel, two_copy: &InputAnsatz) -> Result<GapReport> {
    let single = channel_rel_entropy(e, f, &InputAnsatz::diag_1param())?;
    let e2 = e.tensor_pow(2)?;
    let f2 = f.tensor_pow(2)?;
    let obj2 = Objective::new(&e2, &f2, Kernel::Umegaki)?;
    let p = single.argmax_state.get(0, 0).re;
    let seeds = vec![vec![p * p, p * (1.0 - p)]];
    let double = search(&obj2, &e2, &f2, two_copy, &seeds)?;
    let gap = double.value.to_f64() - 2.0 * single.value.to_f64();
    Ok(GapReport { single, double, gap })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeatCell {
    pub gamma1: f64,
    pub gamma2: f64,
    /// NaN when the cell could not be evaluated.
    pub gap: f64,
}

/// Non-additivity gaps of 𝓐_{γ₁,β₁} against 𝓐_{γ₂,β₂} over a grid, in row-major
/// order over (γ₁, γ₂).
pub fn heatmap(gamma1: &[f64], gamma2: &[f64], beta1: f64, beta2: f64, two_copy: &InputAnsatz) -> Vec<HeatCell> {
    let cells: Vec<(f64, f64)> = gamma1
        .iter()
        .flat_map(|&a| gamma2.iter().map(move |&b| (a, b)))
        .collect();
    cells
        .par_iter()
        .map(|&(g1, g2)| {
            let gap = Channel::gad(g1, beta1)
                .and_then(|e| Channel::gad(g2, beta2).map(|f| (e, f)))
                .and_then(|(e, f)| nonadditivity_gap(&e, &f, two_copy))
                .map_or(f64::NAN, |r| r.gap);
            HeatCell {
                gamma1: g1,
                gamma2: g2,
                gap,
            }
        })
        .collect()
}

/// D(𝓔(ρ_RA)‖𝓕(σ_RA)) − D(ρ_RA‖σ_RA) with the channels acting on the last
/// factor of R ⊗ A.
pub fn amortized_gap(e: &Channel, f: &Channel, rho_ra: &HermitianMatrix, sigma_ra: &HermitianMatrix) -> Result<ExtendedReal> {
    check_same_shape(e, f)?;
    let da = e.dim_in();
    if !rho_ra.dim().is_multiple_of(da) || rho_ra.dim() != sigma_ra.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {} on R ⊗ A with |A| = {da}",
            rho_ra.dim(),
            sigma_ra.dim()
        )));
    }
    let dims = [rho_ra.dim() / da, da];
    let input = rel_entropy(rho_ra, sigma_ra)?;
    let input = input
        .finite()
        .ok_or_else(|| Error::SupportViolation("D(ρ‖σ) is infinite, the gap is undefined".into()))?;
    let out = rel_entropy(&e.apply(rho_ra, &dims, 1)?, &f.apply(sigma_ra, &dims, 1)?)?;
    Ok(out.map(|x| x - input))
}

/// Witness that D(𝓔(ρ)‖𝓕(σ)) ≤ D(ρ‖σ) + D(𝓔‖𝓕) fails.
#[derive(Clone, Debug)]
pub struct Witness {
    /// (𝓔 ⊗ 𝓘)(φ) on R₁R₂ ⊗ B₁ ⊗ A₂.
    pub rho: HermitianMatrix,
    /// (𝓕 ⊗ 𝓘)(φ) on R₁R₂ ⊗ B₁ ⊗ A₂.
    pub sigma: HermitianMatrix,
    /// D(𝓔(ρ)‖𝓕(σ)) with the channel on A₂.
    pub output_div: f64,
    pub input_div: f64,
    pub channel_div: f64,
    /// output_div − input_div − channel_div.
    pub margin: f64,
}

/// Builds the witness from the purification φ of a two-copy reference state
/// `phi2_r` on R₁R₂ ⊗ A₁A₂: ρ and σ are φ with 𝓔 (resp. 𝓕) applied to A₁, so
/// that applying the channels once more to A₂ yields the two-copy outputs.
pub fn naive_witness(e: &Channel, f: &Channel, phi2_r: &HermitianMatrix) -> Result<Witness> {
    check_same_shape(e, f)?;
    let da = e.dim_in();
    if phi2_r.dim() != da * da {
        return Err(Error::DimensionMismatch(format!(
            "two-copy reference state must have dimension {}",
            da * da
        )));
    }
    let psi = purification(phi2_r)?;
    let phi = HermitianMatrix::projector(&psi);
    let dims_in = [da * da, da, da];
    let rho = e.apply(&phi, &dims_in, 1)?;
    let sigma = f.apply(&phi, &dims_in, 1)?;
    let dims_mid = [da * da, e.dim_out(), da];
    let out_e = e.apply(&rho, &dims_mid, 2)?;
    let out_f = f.apply(&sigma, &dims_mid, 2)?;
    let finite = |x: ExtendedReal, what: &str| {
        x.finite()
            .ok_or_else(|| Error::SupportViolation(format!("{what} is infinite")))
    };
    let output_div = finite(rel_entropy(&out_e, &out_f)?, "D(E(ρ)‖F(σ))")?;
    let input_div = finite(rel_entropy(&rho, &sigma)?, "D(ρ‖σ)")?;
    let channel_div = finite(channel_rel_entropy(e, f, &InputAnsatz::diag_1param())?.value, "D(E‖F)")?;
    Ok(Witness {
        rho,
        sigma,
        output_div,
        input_div,
        channel_div,
        margin: output_div - input_div - channel_div,
    })
}
