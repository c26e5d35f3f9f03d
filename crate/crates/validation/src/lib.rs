//! Brute-force referee for critical numbers: a dense scan of the gain over
//! `(M, N_B)` with no root finding or minimization.

use qreading::analysis::information_from_bounds;
use qreading::bounds::{
    classical_bound_from_ln_fidelity, ideal_ln_chernoff_term, ideal_ln_fidelity, quantum_bound_from_ln_term,
};

pub struct GridScan {
    /// Worst-case critical number (grid resolution) and the bath temperature attaining it.
    pub m: f64,
    pub n_b: f64,
    /// Multiplicative spacing of the `M` grid.
    pub m_ratio: f64,
}

fn gain(ln_f: f64, ln_q: f64, m: f64) -> f64 {
    let c = classical_bound_from_ln_fidelity(ln_f, m);
    let q = quantum_bound_from_ln_term(ln_q, m);
    information_from_bounds(c, q).map(|t| t.2).unwrap_or(f64::NAN)
}

/// First grid `M` with positive gain, or `None` below `m_hi`.
fn first_positive(ln_f: f64, ln_q: f64, m_lo: f64, m_hi: f64, ratio: f64) -> Option<f64> {
    let mut m = m_lo;
    while m <= m_hi {
        if gain(ln_f, ln_q, m) > 0.0 {
            return Some(m);
        }
        m *= ratio;
    }
    None
}

/// Scans `N_B ∈ {0} ∪ log-grid[1e-4, n_b_max]` and `M ∈ log-grid[1e-3, m_hi]`.
pub fn grid_scan_worst_case(r0: f64, n_s: f64, n_b_points: usize, n_b_max: f64, m_hi: f64, m_ratio: f64) -> GridScan {
    let mut grid = vec![0.0];
    let (lo, hi) = (1e-4f64.ln(), n_b_max.ln());
    grid.extend((0..n_b_points).map(|i| (lo + (hi - lo) * i as f64 / (n_b_points - 1) as f64).exp()));
    let mut worst = GridScan { m: 0.0, n_b: f64::NAN, m_ratio };
    for n_b in grid {
        let ln_f = ideal_ln_fidelity(r0, n_b, n_s).unwrap();
        let ln_q = ideal_ln_chernoff_term(r0, n_b, n_s).unwrap();
        let m = first_positive(ln_f, ln_q, 1e-3, m_hi, m_ratio).unwrap_or(f64::INFINITY);
        if m > worst.m {
            worst.m = m;
            worst.n_b = n_b;
        }
    }
    worst
}
