//! Quantum channels in Kraus form and their Choi matrices.
//!
//! Choi matrices use the convention J = Σᵢⱼ |i⟩⟨j|_R ⊗ 𝓔(|i⟩⟨j|) with the
//! reference factor first. Multi-copy Choi matrices group all reference
//! factors before all output factors (R₁R₂…B₁B₂…), which is what the Choi
//! matrix of a tensor-product channel naturally is.

mod io;

use rand::Rng;

use crate::divergences::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, HermitianMatrix, C64};
use crate::random::random_isometry;

pub use io::{parse_channel_spec, read_state_file, ChannelFile, StateFile};

/// ‖Σ K†K − I‖_F at or below this value marks a channel trace preserving.
pub const TP_TOL: f64 = 1e-9;

/// Completely positive map given by Kraus operators (dim_out × dim_in).
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    kraus: Vec<ComplexMatrix>,
    dim_in: usize,
    dim_out: usize,
    tp: bool,
}

impl Channel {
    pub fn new(kraus: Vec<ComplexMatrix>, dim_in: usize, dim_out: usize) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidParameter("channel needs at least one Kraus operator".into()));
        }
        for (k, m) in kraus.iter().enumerate() {
            if m.rows() != dim_out || m.cols() != dim_in {
                return Err(Error::DimensionMismatch(format!(
                    "kraus[{k}] is {}x{}, expected {dim_out}x{dim_in}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        let mut gram = ComplexMatrix::zeros(dim_in, dim_in);
        for m in &kraus {
            gram = &gram + &(&m.adjoint() * m);
        }
        let tp = (&gram - &ComplexMatrix::identity(dim_in)).frobenius_norm() <= TP_TOL;
        Ok(Self {
            kraus,
            dim_in,
            dim_out,
            tp,
        })
    }

    /// Generalized amplitude damping channel 𝓐_{γ,β}.
    pub fn gad(gamma: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("gamma", gamma), ("beta", beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} not in [0, 1]")));
            }
        }
        let r = |a: f64, b: f64, c: f64, d: f64| {
            ComplexMatrix::from_real(2, 2, &[a, b, c, d]).expect("finite entries")
        };
        let g = (1.0 - gamma).sqrt();
        let k1 = r(1.0, 0.0, 0.0, g).scale_real((1.0 - beta).sqrt());
        let k2 = r(0.0, (gamma * (1.0 - beta)).sqrt(), 0.0, 0.0);
        let k3 = r(g, 0.0, 0.0, 1.0).scale_real(beta.sqrt());
        let k4 = r(0.0, 0.0, (gamma * beta).sqrt(), 0.0);
        Self::new(vec![k1, k2, k3, k4], 2, 2)
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(d)], d, d).expect("identity channel")
    }

    /// X ↦ ω tr X.
    pub fn replacer(omega: &DensityMatrix, dim_in: usize) -> Self {
        let e = omega.eig();
        let d = omega.dim();
        let mut kraus = Vec::new();
        for (k, &l) in e.values.iter().enumerate() {
            if l <= omega.support_threshold() {
                continue;
            }
            let v = e.vector(k);
            for i in 0..dim_in {
                let mut m = ComplexMatrix::zeros(d, dim_in);
                for (b, z) in v.iter().enumerate() {
                    m[(b, i)] = z * l.sqrt();
                }
                kraus.push(m);
            }
        }
        Self::new(kraus, dim_in, d).expect("replacer channel")
    }

    /// Partial trace keeping the listed factors of a system with the given
    /// factor dimensions.
    pub fn partial_trace(dims: &[usize], keep: &[usize]) -> Result<Self> {
        let n: usize = dims.iter().product();
        let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
        if keep.iter().any(|&k| k >= dims.len()) {
            return Err(Error::DimensionMismatch(format!("keep {keep:?} out of range for {dims:?}")));
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        let dk: usize = kept.iter().map(|&k| dims[k]).product();
        let dt: usize = traced.iter().map(|&k| dims[k]).product();
        let mut kraus = vec![ComplexMatrix::zeros(dk, n); dt];
        let mut digits = vec![0usize; dims.len()];
        for idx in 0..n {
            let mut r = idx;
            for k in (0..dims.len()).rev() {
                digits[k] = r % dims[k];
                r /= dims[k];
            }
            let a = kept.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
            let t = traced.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
            kraus[t][(a, idx)] = c64(1.0, 0.0);
        }
        Self::new(kraus, n, dk)
    }

    /// The map s·𝓔 for s ≥ 0 (completely positive, not trace preserving
    /// unless s = 1).
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale {s} must be nonnegative")));
        }
        let r = s.sqrt();
        Self::new(self.kraus.iter().map(|k| k.scale_real(r)).collect(), self.dim_in, self.dim_out)
    }

    /// Random trace-preserving channel from a Haar-like Stinespring isometry
    /// with `rank` Kraus operators.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim_in: usize, dim_out: usize, rank: usize) -> Self {
        let v = random_isometry(rng, dim_out * rank, dim_in);
        let kraus = (0..rank)
            .map(|k| ComplexMatrix::from_fn(dim_out, dim_in, |b, i| v[(k * dim_out + b, i)]))
            .collect();
        Self::new(kraus, dim_in, dim_out).expect("isometry yields a channel")
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn is_tp(&self) -> bool {
        self.tp
    }

    /// Σ K X K† for an arbitrary dim_in × dim_in matrix.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = &out + &(&(k * x) * &k.adjoint());
        }
        out
    }

    /// Channel acting on the whole input space.
    pub fn apply_full(&self, state: &HermitianMatrix) -> Result<HermitianMatrix> {
        if state.dim() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} for channel with input dimension {}",
                state.dim(),
                self.dim_in
            )));
        }
        Ok(HermitianMatrix::hermitian_part(&self.apply_matrix(state.matrix())))
    }

    /// Applies the channel to factor `target` of a state on ⊗ dims, acting as
    /// the identity elsewhere. The target factor's dimension becomes dim_out.
    pub fn apply(&self, state: &HermitianMatrix, dims: &[usize], target: usize) -> Result<HermitianMatrix> {
        let total: usize = dims.iter().product();
        if total != state.dim() || target >= dims.len() || dims[target] != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply a {}->{} channel to factor {target} of {dims:?}",
                self.dim_in, self.dim_out
            )));
        }
        let left: usize = dims[..target].iter().product();
        let right: usize = dims[target + 1..].iter().product();
        let il = ComplexMatrix::identity(left);
        let ir = ComplexMatrix::identity(right);
        let n_out = left * self.dim_out * right;
        let mut out = ComplexMatrix::zeros(n_out, n_out);
        for k in &self.kraus {
            let full = il.kron(&k.kron(&ir));
            out = &out + &(&(&full * state.matrix()) * &full.adjoint());
        }
        Ok(HermitianMatrix::hermitian_part(&out))
    }

    pub fn choi(&self) -> ChoiMatrix {
        let (di, d_out) = (self.dim_in, self.dim_out);
        let n = di * d_out;
        let mut j = ComplexMatrix::zeros(n, n);
        for k in &self.kraus {
            // (I ⊗ K)|Ω⟩ has amplitude K[b, i] at |i⟩|b⟩
            let v: Vec<C64> = (0..n).map(|idx| k[(idx % d_out, idx / d_out)]).collect();
            j = &j + &ComplexMatrix::outer(&v, &v);
        }
        ChoiMatrix {
            op: HermitianMatrix::hermitian_part(&j),
            dim_r: di,
            dim_b: d_out,
        }
    }

    /// 𝓔 ⊗ 𝓕.
    pub fn tensor(&self, other: &Channel) -> Channel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kron(b));
            }
        }
        Channel::new(kraus, self.dim_in * other.dim_in, self.dim_out * other.dim_out)
            .expect("tensor product of channels")
    }

    pub fn tensor_pow(&self, n: usize) -> Result<Channel> {
        if n == 0 {
            return Err(Error::InvalidParameter("tensor power needs n >= 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        Ok(out)
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &Channel) -> Result<Channel> {
        if after.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}->{} with {}->{}",
                self.dim_in, self.dim_out, after.dim_in, after.dim_out
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * after.kraus.len());
        for b in &after.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        Channel::new(kraus, self.dim_in, after.dim_out)
    }

    /// Largest entry of 𝓔(U X U†) − V 𝓔(X) V† over matrix units X = |i⟩⟨j|.
    pub fn covariance_deviation(&self, u_in: &ComplexMatrix, v_out: &ComplexMatrix) -> f64 {
        let d = self.dim_in;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut x = ComplexMatrix::zeros(d, d);
                x[(i, j)] = c64(1.0, 0.0);
                let lhs = self.apply_matrix(&(&(u_in * &x) * &u_in.adjoint()));
                let rhs = &(v_out * &self.apply_matrix(&x)) * &v_out.adjoint();
                worst = worst.max(lhs.max_abs_diff(&rhs));
            }
        }
        worst
    }

    /// Deviation from covariance under Pauli Z on qubit input and output.
    pub fn z_covariance_deviation(&self) -> Result<f64> {
        if self.dim_in != 2 || self.dim_out != 2 {
            return Err(Error::DimensionMismatch("Z-covariance needs a qubit channel".into()));
        }
        let z = ComplexMatrix::from_diag(&[1.0, -1.0]);
        Ok(self.covariance_deviation(&z, &z))
    }
}

/// Choi matrix on R ⊗ B.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    pub op: HermitianMatrix,
    pub dim_r: usize,
    pub dim_b: usize,
}

impl ChoiMatrix {
    /// tr_B J.
    pub fn reference_marginal(&self) -> HermitianMatrix {
        self.op
            .partial_trace(&[self.dim_r, self.dim_b], &[0])
            .expect("choi dimensions")
    }

    /// Choi matrix of n parallel copies from that of one copy, in the
    /// R₁…Rₙ B₁…Bₙ layout.
    pub fn tensor_pow(&self, n: usize) -> ChoiMatrix {
        let mut op = self.op.clone();
        for _ in 1..n {
            op = op.kron(&self.op);
        }
        let interleaved: Vec<usize> = (0..n).flat_map(|_| [self.dim_r, self.dim_b]).collect();
        ChoiMatrix {
            op: interleaved_to_grouped(&op, &interleaved).expect("choi dimensions"),
            dim_r: self.dim_r.pow(n as u32),
            dim_b: self.dim_b.pow(n as u32),
        }
    }
}

/// Reorders R₁B₁R₂B₂… into R₁R₂…B₁B₂…; `dims` lists the interleaved factor
/// dimensions.
pub fn interleaved_to_grouped(op: &HermitianMatrix, dims: &[usize]) -> Result<HermitianMatrix> {
    if !dims.len().is_multiple_of(2) {
        return Err(Error::DimensionMismatch("interleaved layout needs pairs of factors".into()));
    }
    let n = dims.len() / 2;
    let perm: Vec<usize> = (0..n).map(|k| 2 * k).chain((0..n).map(|k| 2 * k + 1)).collect();
    op.permute(dims, &perm)
}

/// Inverse of [`interleaved_to_grouped`]; `dims` lists the grouped factor
/// dimensions R₁…Rₙ B₁…Bₙ.
pub fn grouped_to_interleaved(op: &HermitianMatrix, dims: &[usize]) -> Result<HermitianMatrix> {
    if !dims.len().is_multiple_of(2) {
        return Err(Error::DimensionMismatch("grouped layout needs pairs of factors".into()));
    }
    let n = dims.len() / 2;
    let perm: Vec<usize> = (0..n).flat_map(|k| [k, n + k]).collect();
    op.permute(dims, &perm)
}

/// (√ρ_R ⊗ I_B) J (√ρ_R ⊗ I_B): the output of the channel on the
/// purification of ρ_R, up to a local isometry on R.
pub fn pull_through(rho_r: &HermitianMatrix, choi: &ChoiMatrix) -> Result<HermitianMatrix> {
    if rho_r.dim() != choi.dim_r {
        return Err(Error::DimensionMismatch(format!(
            "reference state of dimension {} for Choi matrix with reference dimension {}",
            rho_r.dim(),
            choi.dim_r
        )));
    }
    let s = rho_r.sqrt()?.kron(&HermitianMatrix::identity(choi.dim_b));
    Ok(choi.op.sandwich(&s))
}

/// Σᵢ √λᵢ |vᵢ⟩_R |vᵢ⟩_A with ρ = Σ λᵢ |vᵢ⟩⟨vᵢ|, the canonical purification on
/// R ⊗ A whose reference marginal is the transpose of ρ.
pub fn purification(rho: &HermitianMatrix) -> Result<Vec<C64>> {
    let d = rho.dim();
    let e = rho.eig();
    let mut psi = vec![c64(0.0, 0.0); d * d];
    for (k, &l) in e.values.iter().enumerate() {
        if l <= 0.0 {
            continue;
        }
        let v = e.vector(k);
        let s = l.sqrt();
        for i in 0..d {
            for a in 0..d {
                psi[i * d + a] += v[i].conj() * v[a] * s;
            }
        }
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, seeded_rng};

    fn expected_je() -> HermitianMatrix {
        let s = 0.7_f64.sqrt();
        HermitianMatrix::from_real(4, &[1.0, 0.0, 0.0, s, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.3, 0.0, s, 0.0, 0.0, 0.7])
            .unwrap()
    }

    fn expected_jf() -> HermitianMatrix {
        let s = 0.5_f64.sqrt();
        HermitianMatrix::from_real(
            4,
            &[0.55, 0.0, 0.0, s, 0.0, 0.45, 0.0, 0.0, 0.0, 0.0, 0.05, 0.0, s, 0.0, 0.0, 0.95],
        )
        .unwrap()
    }

    fn omega(d: usize) -> HermitianMatrix {
        let mut v = vec![c64(0.0, 0.0); d * d];
        for i in 0..d {
            v[i * d + i] = c64(1.0, 0.0);
        }
        HermitianMatrix::projector(&v)
    }

    #[test]
    fn gad_choi_matches_displayed_matrices() {
        let je = Channel::gad(0.3, 0.0).unwrap().choi();
        assert!(je.op.max_abs_diff(&expected_je()) < 1e-15);
        let jf = Channel::gad(0.5, 0.9).unwrap().choi();
        assert!(jf.op.max_abs_diff(&expected_jf()) < 1e-15);
    }

    #[test]
    fn gad_without_damping_is_identity() {
        for beta in [0.0, 0.4, 1.0] {
            let j = Channel::gad(0.0, beta).unwrap().choi();
            assert!(j.op.max_abs_diff(&omega(2)) < 1e-15);
        }
        assert!(Channel::gad(1.2, 0.0).is_err());
        assert!(Channel::gad(0.2, -0.1).is_err());
    }

    #[test]
    fn identity_and_replacer_choi() {
        let j = Channel::identity(2).choi();
        assert!(j.op.max_abs_diff(&omega(2)) < 1e-15);
        assert!((j.op.trace() - 2.0).abs() < 1e-15);

        let mut rng = seeded_rng(51, 0);
        let w = DensityMatrix::new(random_density(&mut rng, 3)).unwrap();
        let rep = Channel::replacer(&w, 2);
        assert!(rep.is_tp());
        let expected = HermitianMatrix::identity(2).kron(&w);
        assert!(rep.choi().op.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn apply_identity_and_replacer() {
        let mut rng = seeded_rng(52, 0);
        let rho = random_density(&mut rng, 4);
        let out = Channel::identity(2).apply(&rho, &[2, 2], 1).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-15);

        let w = DensityMatrix::new(random_density(&mut rng, 2)).unwrap();
        let out = Channel::replacer(&w, 2).apply(&rho, &[2, 2], 1).unwrap();
        let rho_r = rho.partial_trace(&[2, 2], &[0]).unwrap();
        assert!(out.max_abs_diff(&rho_r.kron(&w)) < 1e-12);
    }

    #[test]
    fn gad_on_half_of_max_entangled_state_is_normalized_choi() {
        let ch = Channel::gad(0.4, 0.2).unwrap();
        let phi = omega(2).scale(0.5);
        let out = ch.apply(&phi, &[2, 2], 1).unwrap();
        // direct Kraus sum over matrix units
        let mut oracle = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                let mut x = ComplexMatrix::zeros(2, 2);
                x[(i, j)] = c64(0.5, 0.0);
                let mut unit = ComplexMatrix::zeros(2, 2);
                unit[(i, j)] = c64(1.0, 0.0);
                oracle = &oracle + &unit.kron(&ch.apply_matrix(&x));
            }
        }
        assert!(out.matrix().max_abs_diff(&oracle) < 1e-15);
        assert!(out.max_abs_diff(&ch.choi().op.scale(0.5)) < 1e-15);
    }

    #[test]
    fn pull_through_special_inputs() {
        let ch = Channel::gad(0.3, 0.0).unwrap();
        let j = ch.choi();
        let mixed = pull_through(&HermitianMatrix::identity(2).scale(0.5), &j).unwrap();
        assert!(mixed.max_abs_diff(&j.op.scale(0.5)) < 1e-15);

        let pure = pull_through(&HermitianMatrix::diag(&[1.0, 0.0]), &j).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let expect = if a < 2 && b < 2 { j.op.get(a, b) } else { c64(0.0, 0.0) };
                assert!((pure.get(a, b) - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn pull_through_equals_channel_on_purification() {
        let mut rng = seeded_rng(53, 0);
        for _ in 0..10 {
            let ch = Channel::random(&mut rng, 2, 3, 2);
            let rho = random_density(&mut rng, 2);
            let psi = purification(&rho).unwrap();
            let state = HermitianMatrix::projector(&psi);
            let lhs = ch.apply(&state, &[2, 2], 1).unwrap();
            // the purification's reference marginal is ρᵀ
            let rho_t = HermitianMatrix::hermitian_part(&ComplexMatrix::from_fn(2, 2, |i, j| rho.get(j, i)));
            let rhs = pull_through(&rho_t, &ch.choi()).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn tensor_pow_of_identity_is_identity() {
        let ch = Channel::identity(2).tensor_pow(2).unwrap();
        assert_eq!(ch.dim_in(), 4);
        let mut rng = seeded_rng(54, 0);
        let rho = random_density(&mut rng, 4);
        assert!(ch.apply_full(&rho).unwrap().max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn two_copy_choi_is_reordered_kron() {
        let ch = Channel::gad(0.3, 0.0).unwrap();
        let j2 = ch.tensor_pow(2).unwrap().choi();
        let j = ch.choi();
        // index oracle: (r1 r2 b1 b2) entry equals J[r1 b1] J[r2 b2]
        for r1 in 0..2 {
            for r2 in 0..2 {
                for b1 in 0..2 {
                    for b2 in 0..2 {
                        for s1 in 0..2 {
                            for s2 in 0..2 {
                                for c1 in 0..2 {
                                    for c2 in 0..2 {
                                        let row = ((r1 * 2 + r2) * 2 + b1) * 2 + b2;
                                        let col = ((s1 * 2 + s2) * 2 + c1) * 2 + c2;
                                        let v = j.op.get(r1 * 2 + b1, s1 * 2 + c1) * j.op.get(r2 * 2 + b2, s2 * 2 + c2);
                                        assert!((j2.op.get(row, col) - v).norm() < 1e-15);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        assert!(j.tensor_pow(2).op.max_abs_diff(&j2.op) < 1e-15);
        let back = grouped_to_interleaved(&j2.op, &[2, 2, 2, 2]).unwrap();
        assert!(back.max_abs_diff(&j.op.kron(&j.op)) < 1e-15);
    }

    #[test]
    fn random_channels_are_tp_with_psd_choi() {
        let mut rng = seeded_rng(55, 0);
        for _ in 0..20 {
            let ch = Channel::random(&mut rng, 2, 3, 4);
            assert!(ch.is_tp());
            let j = ch.choi();
            assert!(j.op.min_eigenvalue() > -1e-12);
            assert!(j.reference_marginal().max_abs_diff(&HermitianMatrix::identity(2)) < 1e-9);
        }
    }

    #[test]
    fn scaled_and_composed_channels() {
        let id = Channel::identity(2);
        let half = id.scaled(0.5).unwrap();
        assert!(!half.is_tp());
        assert!(half.choi().op.max_abs_diff(&omega(2).scale(0.5)) < 1e-15);
        let g = Channel::gad(0.3, 0.1).unwrap();
        let comp = id.then(&g).unwrap();
        assert!(comp.choi().op.max_abs_diff(&g.choi().op) < 1e-15);
        assert!(g.then(&Channel::identity(3)).is_err());
    }

    #[test]
    fn partial_trace_channel_matches_partial_trace() {
        let mut rng = seeded_rng(56, 0);
        let rho = random_density(&mut rng, 6);
        let ch = Channel::partial_trace(&[2, 3], &[1]).unwrap();
        assert!(ch.is_tp());
        let direct = rho.partial_trace(&[2, 3], &[1]).unwrap();
        assert!(ch.apply_full(&rho).unwrap().max_abs_diff(&direct) < 1e-15);
    }

    #[test]
    fn covariance_checks() {
        assert!(Channel::gad(0.3, 0.7).unwrap().z_covariance_deviation().unwrap() < 1e-15);
        let mut rng = seeded_rng(57, 0);
        let ch = Channel::random(&mut rng, 2, 2, 2);
        assert!(ch.z_covariance_deviation().unwrap() > 1e-3);
    }
}
