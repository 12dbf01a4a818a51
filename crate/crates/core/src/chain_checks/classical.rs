use super::CheckResult;
use crate::error::{Error, Result};

pub const CLASSICAL_EQ_TOL: f64 = 1e-10;
const NORMALIZATION_TOL: f64 = 1e-12;

/// Joint distribution over (x, y), stored as rows indexed by x.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalJoint {
    px_y: Vec<Vec<f64>>,
    normalized: bool,
}

impl ClassicalJoint {
    fn validate(px_y: &[Vec<f64>]) -> Result<()> {
        let cols = px_y.first().map_or(0, Vec::len);
        if px_y.is_empty() || cols == 0 {
            return Err(Error::InvalidParameter("joint distribution must be non-empty".into()));
        }
        for row in px_y {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!("row of length {} in a {cols}-column joint", row.len())));
            }
            if row.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(Error::InvalidParameter("joint entries must be finite and nonnegative".into()));
            }
        }
        Ok(())
    }

    /// A probability distribution P_XY.
    pub fn normalized(px_y: Vec<Vec<f64>>) -> Result<Self> {
        Self::validate(&px_y)?;
        let total: f64 = px_y.iter().flatten().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidTrace(total));
        }
        Ok(Self { px_y, normalized: true })
    }

    /// A nonnegative, not necessarily normalized Q_XY.
    pub fn unnormalized(px_y: Vec<Vec<f64>>) -> Result<Self> {
        Self::validate(&px_y)?;
        Ok(Self { px_y, normalized: false })
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.px_y.len(), self.px_y[0].len())
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.px_y
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        self.px_y.iter().map(|r| r.iter().sum()).collect()
    }
}

/// Σ p log(p/q) over p > 0; +∞ if some p > 0 has q = 0.
pub(crate) fn kl(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            acc += a * (a / b).log2();
        }
    }
    acc
}

/// The chain-rule equality and both sides of the min/max sandwich.
pub fn classical_chain_rule(p: &ClassicalJoint, q: &ClassicalJoint, digest: &str) -> Result<[CheckResult; 3]> {
    if !p.is_normalized() {
        return Err(Error::InvalidParameter("first argument must be normalized".into()));
    }
    if p.shape() != q.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", p.shape(), q.shape())));
    }
    let joint = kl(
        &p.px_y.iter().flatten().copied().collect::<Vec<_>>(),
        &q.px_y.iter().flatten().copied().collect::<Vec<_>>(),
    );
    let (px, qx) = (p.marginal_x(), q.marginal_x());
    let marginal = kl(&px, &qx);

    let mut weighted = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, (&wx, &vx)) in px.iter().zip(&qx).enumerate() {
        if wx <= 0.0 {
            continue;
        }
        let cond_p: Vec<f64> = p.px_y[x].iter().map(|v| v / wx).collect();
        let d = if vx > 0.0 {
            let cond_q: Vec<f64> = q.px_y[x].iter().map(|v| v / vx).collect();
            kl(&cond_p, &cond_q)
        } else {
            f64::INFINITY
        };
        weighted += wx * d;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let split = marginal + weighted;
    Ok([
        CheckResult::equality("classical_chain.equality", joint, split, CLASSICAL_EQ_TOL, digest),
        CheckResult::inequality("classical_chain.lower", marginal + lo, joint, CLASSICAL_EQ_TOL, digest),
        CheckResult::inequality("classical_chain.upper", joint, marginal + hi, CLASSICAL_EQ_TOL, digest),
    ])
}
