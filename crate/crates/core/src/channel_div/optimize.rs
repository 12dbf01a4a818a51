//! Derivative-free maximizers used by the channel divergence searches.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Best point seen by an optimizer.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimum<T> {
    pub arg: T,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section maximization of a unimodal `f` on `[a, b]` until the bracket
/// is at most `tol` wide. Returns the best evaluated point.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Optimum<f64> {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evals = 2;
    let mut best = if fd > fc { (d, fd) } else { (c, fc) };
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd > best.1 {
                best = (d, fd);
            }
        }
        evals += 1;
        if evals > 10_000 {
            break;
        }
    }
    Optimum {
        arg: best.0,
        value: best.1,
        evaluations: evals,
    }
}

/// Index of the first maximum; NaN entries are skipped.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some(b) if values[b] >= v => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Compass search: tries ±step along each coordinate, accepts strict
/// improvements, halves the step after a sweep without progress and stops
/// below `min_step` or after `max_evals` evaluations.
pub fn coordinate_ascent(
    f: impl Fn(&[f64]) -> f64,
    start: Vec<f64>,
    initial_step: f64,
    min_step: f64,
    max_evals: usize,
) -> Optimum<Vec<f64>> {
    let mut x = start;
    let mut fx = f(&x);
    let mut evals = 1;
    let mut step = initial_step;
    while step >= min_step && evals < max_evals {
        let mut improved = false;
        for k in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[k] += dir * step;
                let fy = f(&y);
                evals += 1;
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Optimum {
        arg: x,
        value: fx,
        evaluations: evals,
    }
}
