use std::sync::OnceLock;

use super::eig::{eig_unchecked, EigenDecomposition};
use super::{subsystems, ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Absolute per-entry tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues with magnitude below `SUPPORT_REL_TOL · max(λ_max, 1)` are
/// treated as exactly zero for support, log and inverse computations.
pub const SUPPORT_REL_TOL: f64 = 1e-12;

/// Square complex Hermitian matrix with a lazily computed eigendecomposition.
#[derive(Clone, Debug)]
pub struct HermitianMatrix {
    m: ComplexMatrix,
    eig: OnceLock<EigenDecomposition>,
}

impl PartialEq for HermitianMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
    }
}

impl HermitianMatrix {
    /// Validates Hermiticity within [`HERMITIAN_TOL`] and stores the exact
    /// Hermitian part.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let dev = m.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self::hermitian_part(&m))
    }

    /// (M + M†)/2 without validation. Used for products that are Hermitian
    /// up to rounding.
    pub fn hermitian_part(m: &ComplexMatrix) -> Self {
        assert!(m.is_square(), "hermitian_part of a non-square matrix");
        let n = m.rows();
        let h = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(m[(i, i)].re, 0.0)
            } else {
                (m[(i, j)] + m[(j, i)].conj()) * 0.5
            }
        });
        Self::from_exact(h)
    }

    fn from_exact(m: ComplexMatrix) -> Self {
        Self {
            m,
            eig: OnceLock::new(),
        }
    }

    pub fn from_real(n: usize, data: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real(n, n, data)?)
    }

    pub fn diag(d: &[f64]) -> Self {
        Self::from_exact(ComplexMatrix::from_diag(d))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_exact(ComplexMatrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_exact(ComplexMatrix::zeros(n, n))
    }

    /// Projector |v⟩⟨v| (not normalized unless `v` is).
    pub fn projector(v: &[C64]) -> Self {
        Self::hermitian_part(&ComplexMatrix::outer(v, v))
    }

    /// M†M for an arbitrary (possibly rectangular) matrix.
    pub fn from_product_gram(m: &ComplexMatrix) -> Self {
        Self::hermitian_part(&(&m.adjoint() * m))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn eig(&self) -> &EigenDecomposition {
        self.eig.get_or_init(|| eig_unchecked(&self.m))
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eig().values.first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig().values.last().copied().unwrap_or(0.0)
    }

    pub fn support_threshold(&self) -> f64 {
        let top = self
            .eig()
            .values
            .iter()
            .fold(0.0_f64, |acc, l| acc.max(l.abs()));
        SUPPORT_REL_TOL * top.max(1.0)
    }

    /// Applies `f` to the eigenvalues. With `on_support`, eigenvalues whose
    /// magnitude is below the support threshold map to 0 instead of `f(λ)`.
    /// Non-finite results are reported as a domain error.
    pub fn matrix_fn(&self, f: impl Fn(f64) -> f64, on_support: bool) -> Result<Self> {
        let thr = self.support_threshold();
        let e = self.eig();
        let mut mapped = Vec::with_capacity(e.dim());
        for &l in &e.values {
            let y = if on_support && l.abs() <= thr { 0.0 } else { f(l) };
            if !y.is_finite() {
                return Err(Error::Domain(l));
            }
            mapped.push(y);
        }
        let out = Self::hermitian_part(&e.reconstruct_from(&mapped));
        Ok(out)
    }

    /// Principal square root; tiny negative eigenvalues inside the support
    /// threshold are treated as zero.
    pub fn sqrt(&self) -> Result<Self> {
        self.matrix_fn(f64::sqrt, true)
    }

    /// Inverse square root on the support.
    pub fn inv_sqrt(&self) -> Result<Self> {
        self.matrix_fn(|l| 1.0 / l.sqrt(), true)
    }

    /// Moore–Penrose inverse on the support.
    pub fn pinv(&self) -> Result<Self> {
        self.matrix_fn(|l| 1.0 / l, true)
    }

    /// Base-2 logarithm on the support.
    pub fn log2(&self) -> Result<Self> {
        self.matrix_fn(f64::log2, true)
    }

    pub fn powf(&self, p: f64) -> Result<Self> {
        self.matrix_fn(|l| l.powf(p), true)
    }

    /// Projector onto the span of eigenvectors whose eigenvalue satisfies `keep`.
    pub fn spectral_projector(&self, keep: impl Fn(f64) -> bool) -> Self {
        let e = self.eig();
        let flags: Vec<bool> = e.values.iter().map(|&l| keep(l)).collect();
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &f) in flags.iter().enumerate() {
            if !f {
                continue;
            }
            let v = e.vector(k);
            for i in 0..n {
                if v[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        Self::hermitian_part(&out)
    }

    pub fn support_projector(&self) -> Self {
        let thr = self.support_threshold();
        self.spectral_projector(|l| l.abs() > thr)
    }

    pub fn kernel_projector(&self) -> Self {
        let thr = self.support_threshold();
        self.spectral_projector(|l| l.abs() <= thr)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Errors with [`Error::NotPsd`] when the minimum eigenvalue is below `-tol`.
    pub fn ensure_psd(&self, tol: f64) -> Result<()> {
        let m = self.min_eigenvalue();
        if m < -tol {
            Err(Error::NotPsd(m))
        } else {
            Ok(())
        }
    }

    /// X M X†.
    pub fn congruence(&self, x: &ComplexMatrix) -> Self {
        Self::hermitian_part(&(&(x * &self.m) * &x.adjoint()))
    }

    /// A M A for Hermitian A.
    pub fn sandwich(&self, a: &HermitianMatrix) -> Self {
        self.congruence(a.matrix())
    }

    /// tr(self · other), real for Hermitian arguments.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.m[(i, j)] * other.m[(j, i)]).re;
            }
        }
        acc
    }

    pub fn kron(&self, other: &HermitianMatrix) -> Self {
        Self::from_exact(self.m.kron(&other.m))
    }

    pub fn add(&self, other: &HermitianMatrix) -> Self {
        Self::from_exact(&self.m + &other.m)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Self {
        Self::from_exact(&self.m - &other.m)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_exact(self.m.scale_real(s))
    }

    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        subsystems::partial_trace(self, dims, keep)
    }

    pub fn permute(&self, dims: &[usize], perm: &[usize]) -> Result<Self> {
        subsystems::permute_subsystems(self, dims, perm)
    }

    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> f64 {
        self.m.max_abs_diff(&other.m)
    }

    /// Largest |[A, B]| entry.
    pub fn commutator_norm(&self, other: &HermitianMatrix) -> f64 {
        let ab = &self.m * &other.m;
        let ba = &other.m * &self.m;
        ab.max_abs_diff(&ba)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    #[test]
    fn sqrt_of_diagonal() {
        let m = HermitianMatrix::diag(&[4.0, 9.0]);
        assert!(m.sqrt().unwrap().max_abs_diff(&HermitianMatrix::diag(&[2.0, 3.0])) < 1e-15);
    }

    #[test]
    fn log2_of_identity_is_zero() {
        let l = HermitianMatrix::identity(3).log2().unwrap();
        assert_eq!(l.matrix().max_abs(), 0.0);
    }

    #[test]
    fn inverse_sqrt_on_support() {
        let m = HermitianMatrix::diag(&[4.0, 0.0]);
        let r = m.inv_sqrt().unwrap();
        assert!(r.max_abs_diff(&HermitianMatrix::diag(&[0.5, 0.0])) < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let m = HermitianMatrix::diag(&[1.0, -0.5]);
        assert_eq!(m.sqrt(), Err(Error::Domain(-0.5)));
        // log of an exact zero outside on_support mode is -inf
        let z = HermitianMatrix::diag(&[1.0, 0.0]);
        assert!(matches!(z.matrix_fn(f64::log2, false), Err(Error::Domain(_))));
    }

    #[test]
    fn tiny_negative_eigenvalue_is_on_kernel() {
        let m = HermitianMatrix::diag(&[1.0, -1e-14]);
        let s = m.sqrt().unwrap();
        assert!(s.max_abs_diff(&HermitianMatrix::diag(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn identity_function_roundtrip_on_complex_matrix() {
        let mut m = ComplexMatrix::from_diag(&[0.3, -0.2, 1.1]);
        m[(0, 1)] = c64(0.1, 0.4);
        m[(1, 0)] = c64(0.1, -0.4);
        m[(1, 2)] = c64(-0.3, 0.2);
        m[(2, 1)] = c64(-0.3, -0.2);
        let h = HermitianMatrix::new(m).unwrap();
        let back = h.matrix_fn(|x| x, false).unwrap();
        assert!(back.max_abs_diff(&h) < 1e-12);
    }

    #[test]
    fn new_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 0.1, 0.0, 1.0]).unwrap();
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian(_))));
    }
}
