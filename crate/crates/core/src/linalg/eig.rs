use super::{ComplexMatrix, C64, HERMITIAN_TOL};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-13;

/// Eigenvalues sorted in descending order with matching orthonormal
/// eigenvectors stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// V diag(f(λ)) V†.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mapped: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        self.reconstruct_from(&mapped)
    }

    /// V diag(mapped) V† for replacement eigenvalues given in spectral order.
    pub fn reconstruct_from(&self, mapped: &[f64]) -> ComplexMatrix {
        assert_eq!(mapped.len(), self.dim());
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in mapped.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let col = self.vectors.column(k);
            for i in 0..n {
                if col[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                let vi = col[i] * w;
                for j in 0..n {
                    out[(i, j)] += vi * col[j].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

/// Eigendecomposition of a complex Hermitian matrix.
///
/// Rejects matrices whose entries deviate from their conjugate transpose by
/// more than the Hermiticity tolerance.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigenDecomposition> {
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
    Ok(eig_unchecked(m))
}

/// Connected components of the joint sparsity pattern of square matrices of
/// equal dimension. Two indices are linked when any matrix has a nonzero
/// entry coupling them. Components are sorted by their smallest index and each
/// component's indices are ascending.
pub fn block_components(ms: &[&ComplexMatrix]) -> Vec<Vec<usize>> {
    let n = ms.first().map_or(0, |m| m.rows());
    let mut parent: Vec<usize> = (0..n).collect();

    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    for m in ms {
        debug_assert_eq!(m.rows(), n);
        for i in 0..n {
            for j in (i + 1)..n {
                if m[(i, j)] != C64::new(0.0, 0.0) || m[(j, i)] != C64::new(0.0, 0.0) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

pub(crate) fn eig_unchecked(m: &ComplexMatrix) -> EigenDecomposition {
    let n = m.rows();
    let mut pairs: Vec<(f64, usize, Vec<C64>)> = Vec::with_capacity(n);

    for block in block_components(&[m]) {
        let b = block.len();
        let mut a: Vec<C64> = Vec::with_capacity(b * b);
        for &i in &block {
            for &j in &block {
                a.push(m[(i, j)]);
            }
        }
        let (vals, vecs) = jacobi(&mut a, b);
        for k in 0..b {
            let mut full = vec![C64::new(0.0, 0.0); n];
            for (r, &i) in block.iter().enumerate() {
                full[i] = vecs[r * b + k];
            }
            pairs.push((vals[k], block[0] * n + k, full));
        }
    }

    // descending by value; ties broken by construction order for determinism
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, (val, _, vec)) in pairs.into_iter().enumerate() {
        values.push(val);
        for (i, z) in vec.into_iter().enumerate() {
            vectors[(i, k)] = z;
        }
    }
    EigenDecomposition { values, vectors }
}

/// Cyclic complex Jacobi on a dense row-major `n × n` Hermitian block.
/// Returns eigenvalues and the row-major eigenvector matrix (columns).
fn jacobi(a: &mut [C64], n: usize) -> (Vec<f64>, Vec<C64>) {
    let zero = C64::new(0.0, 0.0);
    let mut v = vec![zero; n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(1.0, 0.0);
        a[i * n + i].im = 0.0;
    }
    let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    if n > 1 && norm > 0.0 {
        for _sweep in 0..MAX_SWEEPS {
            let mut off = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off += a[i * n + j].norm_sqr();
                    }
                }
            }
            if off.sqrt() <= OFF_DIAGONAL_TOL * norm {
                break;
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    let g = apq.norm();
                    if g == 0.0 {
                        continue;
                    }
                    let app = a[p * n + p].re;
                    let aqq = a[q * n + q].re;
                    let phase = apq / g;
                    let zeta = (aqq - app) / (2.0 * g);
                    let t = if zeta.abs() > 1e150 {
                        0.5 / zeta
                    } else {
                        let s = if zeta >= 0.0 { 1.0 } else { -1.0 };
                        s / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // V = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
                    let vpp = C64::new(c, 0.0);
                    let vpq = C64::new(s, 0.0);
                    let vqp = phase.conj() * (-s);
                    let vqq = phase.conj() * c;

                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = akp * vpp + akq * vqp;
                        a[k * n + q] = akp * vpq + akq * vqq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = vpp.conj() * apk + vqp.conj() * aqk;
                        a[q * n + k] = vpq.conj() * apk + vqq.conj() * aqk;
                    }
                    a[p * n + q] = zero;
                    a[q * n + p] = zero;
                    a[p * n + p].im = 0.0;
                    a[q * n + q].im = 0.0;

                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp * vpp + vkq * vqp;
                        v[k * n + q] = vkp * vpq + vkq * vqq;
                    }
                }
            }
        }
    }

    let vals = (0..n).map(|i| a[i * n + i].re).collect();
    (vals, v)
}
