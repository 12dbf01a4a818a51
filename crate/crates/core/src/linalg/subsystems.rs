use super::{ComplexMatrix, HermitianMatrix, C64};
use crate::error::{Error, Result};

fn check_dims(total: usize, dims: &[usize]) -> Result<()> {
    let prod: usize = dims.iter().product();
    if prod != total || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!(
            "factor dimensions {dims:?} do not multiply to {total}"
        )));
    }
    Ok(())
}

/// Mixed-radix digits of `idx` for the given factor dimensions (first factor
/// most significant).
fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

fn compose(digs: &[usize], dims: &[usize]) -> usize {
    digs.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

/// Traces out every factor not listed in `keep`. The kept factors appear in
/// ascending order in the result.
pub fn partial_trace(m: &HermitianMatrix, dims: &[usize], keep: &[usize]) -> Result<HermitianMatrix> {
    check_dims(m.dim(), dims)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "keep set {keep:?} out of range for {} factors",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let kdims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let dk: usize = kdims.iter().product();
    let dt: usize = tdims.iter().product();

    // full index for every (kept, traced) pair
    let mut table = vec![0usize; dk * dt];
    let mut kd = vec![0usize; kept.len()];
    let mut td = vec![0usize; traced.len()];
    let mut full = vec![0usize; dims.len()];
    for a in 0..dk {
        digits(a, &kdims, &mut kd);
        for t in 0..dt {
            digits(t, &tdims, &mut td);
            for (pos, &f) in kept.iter().enumerate() {
                full[f] = kd[pos];
            }
            for (pos, &f) in traced.iter().enumerate() {
                full[f] = td[pos];
            }
            table[a * dt + t] = compose(&full, dims);
        }
    }

    let src = m.matrix();
    let out = ComplexMatrix::from_fn(dk, dk, |a, b| {
        let mut acc = C64::new(0.0, 0.0);
        for t in 0..dt {
            acc += src[(table[a * dt + t], table[b * dt + t])];
        }
        acc
    });
    Ok(HermitianMatrix::hermitian_part(&out))
}

/// Reorders tensor factors: factor `k` of the result is factor `perm[k]` of
/// the input.
pub fn permute_subsystems(m: &HermitianMatrix, dims: &[usize], perm: &[usize]) -> Result<HermitianMatrix> {
    check_dims(m.dim(), dims)?;
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() || perm.iter().any(|&p| p >= dims.len() || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::DimensionMismatch(format!(
            "{perm:?} is not a permutation of {} factors",
            dims.len()
        )));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let n = m.dim();
    // old index for each new index
    let mut map = vec![0usize; n];
    let mut nd = vec![0usize; dims.len()];
    let mut od = vec![0usize; dims.len()];
    for (i, slot) in map.iter_mut().enumerate() {
        digits(i, &new_dims, &mut nd);
        for (k, &p) in perm.iter().enumerate() {
            od[p] = nd[k];
        }
        *slot = compose(&od, dims);
    }
    let src = m.matrix();
    let out = ComplexMatrix::from_fn(n, n, |i, j| src[(map[i], map[j])]);
    HermitianMatrix::new(out)
}
