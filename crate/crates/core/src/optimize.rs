//! Bracketed scalar minimization and root finding.

use crate::error::{QreadError, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the minimum of `f` on `[a, b]`, stopping once the
/// bracket is narrower than `x_tol`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, x_tol: f64) -> Result<Minimum> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(QreadError::Optimization(format!("invalid bracket [{a}, {b}]")));
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while b - a > x_tol {
        if iterations > 500 {
            return Err(QreadError::Optimization("golden-section search did not converge".into()));
        }
        if !(f1.is_finite() && f2.is_finite()) {
            return Err(QreadError::Optimization(format!(
                "objective not finite near x = {x1} / {x2}"
            )));
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        iterations += 1;
    }
    Ok(if f1 < f2 {
        Minimum { x: x1, value: f1 }
    } else {
        Minimum { x: x2, value: f2 }
    })
}

/// Evaluates `f` on `n` uniform points of `[a, b]` and returns the bracket
/// around the smallest sample, plus the number of interior local minima seen.
pub fn prescan_bracket(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> (f64, f64, usize) {
    assert!(n >= 3);
    let xs: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let best = ys
        .iter()
        .enumerate()
        .min_by(|l, r| l.1.total_cmp(r.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let local_minima = (1..n - 1).filter(|&i| ys[i] < ys[i - 1] && ys[i] <= ys[i + 1]).count();
    let lo = xs[best.saturating_sub(1)];
    let hi = xs[(best + 1).min(n - 1)];
    (lo, hi, local_minima)
}

/// Bisection on a sign change of `f` between `lo` and `hi`, midpoints taken
/// geometrically so brackets spanning many decades converge uniformly.
/// `f(lo)` and `f(hi)` must have opposite signs.
pub fn bisect_geometric(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iterations: usize) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return Err(QreadError::Optimization(format!("invalid geometric bracket [{lo}, {hi}]")));
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo.signum() == f_hi.signum() {
        return Err(QreadError::Optimization(format!(
            "no sign change on [{lo}, {hi}]: f = {f_lo}, {f_hi}"
        )));
    }
    let lo_negative = f_lo < 0.0;
    for _ in 0..iterations {
        let mid = (lo * hi).sqrt();
        if (f(mid) < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}
