//! Critical number of signals for ideal memories.
//!
//! For `r₁ = 1` the critical number `M^(N_S)(r₀)` is the real root of `G(M) = 0`.
//! Because a positive gain persists for every larger `M`, `G` changes sign once,
//! and the root is found by bisection on `ln 𝒞 − ln 𝒬` (same sign as `G`).
//! The worst case over the bath temperature is then taken numerically.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::information_from_bounds;
use crate::bounds::{
    classical_bound_from_ln_fidelity, ideal_ln_chernoff_term, ideal_ln_fidelity,
    ln_classical_bound_from_ln_fidelity, ln_quantum_bound_from_ln_term, quantum_bound_from_ln_term,
};
use crate::error::{domain, QreadError, Result};
use crate::optimize::{bisect_geometric, golden_section_min};

/// Tunables of the critical-number search. The bath-temperature range is not
/// fixed by the physics; `n_b_max` bounds it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub m_min: f64,
    pub m_max: f64,
    pub bisection_iterations: usize,
    pub n_b_max: f64,
    /// Log-spaced points in `[n_b_floor, n_b_max]`, plus `0` and `N_B*`.
    pub n_b_grid_points: usize,
    pub n_b_floor: f64,
    /// Relative width at which the golden-section refinement over `N_B` stops.
    pub n_b_rel_tol: f64,
    pub no_advantage_samples: usize,
    /// Asymptotic fallback is used only for `1 − r₀` below this.
    pub asymptotic_eps_max: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            m_min: 1e-3,
            m_max: 1e8,
            bisection_iterations: 60,
            n_b_max: 10.0,
            n_b_grid_points: 41,
            n_b_floor: 1e-4,
            n_b_rel_tol: 1e-7,
            no_advantage_samples: 20,
            asymptotic_eps_max: 1e-2,
        }
    }
}

/// Which computation produced a critical number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootPath {
    Bisection,
    /// Root beyond `m_max`, replaced by `κ(N_B)`.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalRoot {
    pub m: f64,
    pub path: RootPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub r0: f64,
    pub n_s: f64,
    pub m_real: f64,
    pub m_int: u64,
    pub n_b_worst: f64,
    pub path: RootPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Ok,
    NoAdvantage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r0: f64,
    pub status: PointStatus,
    pub m_real: Option<f64>,
    pub m_int: Option<u64>,
    pub n_b_worst: Option<f64>,
    pub path: Option<RootPath>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCurve {
    pub n_s: f64,
    pub points: Vec<CurvePoint>,
    pub solver: SolverConfig,
}

/// Outcome of the high-energy asymptote `M̃ = ln2 / [2 ln(1 + N_S) − N_S]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HighEnergyAsymptote {
    Finite(f64),
    Divergent,
}

fn check_ideal_point(r0: f64, n_s: f64, n_b: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r0) {
        return domain(format!("critical numbers need r0 in [0, 1), got {r0}"));
    }
    if !(n_s > 0.0) || !n_s.is_finite() {
        return domain(format!("N_S must be finite and > 0, got {n_s}"));
    }
    if !(n_b >= 0.0) || !n_b.is_finite() {
        return domain(format!("N_B must be finite and >= 0, got {n_b}"));
    }
    Ok(())
}

/// Per-copy log fidelity and log Chernoff term of an ideal memory.
#[derive(Debug, Clone, Copy)]
struct IdealRates {
    ln_f: f64,
    ln_q: f64,
}

impl IdealRates {
    fn new(r0: f64, n_s: f64, n_b: f64) -> Result<Self> {
        Ok(Self {
            ln_f: ideal_ln_fidelity(r0, n_b, n_s)?,
            ln_q: ideal_ln_chernoff_term(r0, n_b, n_s)?,
        })
    }

    fn margin(&self, m: f64) -> f64 {
        ln_classical_bound_from_ln_fidelity(self.ln_f, m) - ln_quantum_bound_from_ln_term(self.ln_q, m)
    }
}

/// `ln 𝒞 − ln 𝒬` for an ideal memory at real-valued `M`; positive exactly when `G > 0`.
pub fn advantage_margin(r0: f64, n_s: f64, n_b: f64, m: f64) -> Result<f64> {
    check_ideal_point(r0, n_s, n_b)?;
    Ok(IdealRates::new(r0, n_s, n_b)?.margin(m))
}

/// Information gain of an ideal memory at real-valued `M`.
pub fn ideal_gain(r0: f64, n_s: f64, n_b: f64, m: f64) -> Result<f64> {
    check_ideal_point(r0, n_s, n_b)?;
    let rates = IdealRates::new(r0, n_s, n_b)?;
    let c = classical_bound_from_ln_fidelity(rates.ln_f, m);
    let q = quantum_bound_from_ln_term(rates.ln_q, m);
    Ok(information_from_bounds(c, q)?.2)
}

fn log_samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Real root of `G(M) = 0` for an ideal memory at fixed bath temperature.
pub fn critical_m(r0: f64, n_s: f64, n_b: f64, cfg: &SolverConfig) -> Result<CriticalRoot> {
    check_ideal_point(r0, n_s, n_b)?;
    let rates = IdealRates::new(r0, n_s, n_b)?;
    let f = |m: f64| rates.margin(m);

    // 𝒞 falls like √M near M = 0 and 𝒬 only linearly, so shrinking finds G < 0
    let mut lo = cfg.m_min;
    while f(lo) > 0.0 {
        lo *= 1e-3;
        if lo < 1e-15 {
            return Err(QreadError::Optimization(format!(
                "gain positive down to M = {lo:e} (r0 = {r0}, N_S = {n_s}, N_B = {n_b})"
            )));
        }
    }

    let mut samples = log_samples(lo, cfg.m_max, cfg.no_advantage_samples + 2);
    samples[0] = lo;
    let mut previous = lo;
    for &m in &samples[1..] {
        if f(m) > 0.0 {
            let root = bisect_geometric(f, previous, m, cfg.bisection_iterations)?;
            return Ok(CriticalRoot { m: root, path: RootPath::Bisection });
        }
        previous = m;
    }

    // No sign change up to m_max. An advantage still appears eventually when
    // Q < F; close to r0 = 1 that root is taken from the small-ε asymptote.
    let eps = 1.0 - r0;
    if rates.ln_q < rates.ln_f && n_b > 0.0 && eps < cfg.asymptotic_eps_max {
        return Ok(CriticalRoot { m: kappa(n_b, n_s, eps), path: RootPath::Asymptotic });
    }
    Err(QreadError::NoAdvantage { r0, n_s, n_b, m_max: cfg.m_max })
}

/// Worst case of [`critical_m`] over `N_B ∈ [0, n_b_max]`: a log-spaced grid
/// seeded with `N_B* = N_S/(1 + 2N_S)`, then golden-section refinement around
/// the best grid point.
pub fn critical_m_worst_case(r0: f64, n_s: f64, cfg: &SolverConfig) -> Result<CriticalPoint> {
    check_ideal_point(r0, n_s, 0.0)?;
    let mut grid = log_samples(cfg.n_b_floor, cfg.n_b_max, cfg.n_b_grid_points);
    grid.push(0.0);
    let seed = kappa_argmax(n_s);
    if seed <= cfg.n_b_max {
        grid.push(seed);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let roots = grid
        .iter()
        .map(|&n_b| critical_m(r0, n_s, n_b, cfg))
        .collect::<Result<Vec<_>>>()?;
    let best = roots
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.m.total_cmp(&b.1.m))
        .map(|(i, _)| i)
        .unwrap_or(0);

    let mut n_b_worst = grid[best];
    let mut worst = roots[best];
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    if hi > lo {
        let refined = golden_section_min(
            |n_b| critical_m(r0, n_s, n_b, cfg).map(|r| -r.m).unwrap_or(f64::INFINITY),
            lo,
            hi,
            cfg.n_b_rel_tol * hi.max(1e-12),
        )?;
        let candidate = critical_m(r0, n_s, refined.x, cfg)?;
        if candidate.m > worst.m {
            worst = candidate;
            n_b_worst = refined.x;
        }
    }

    Ok(CriticalPoint {
        r0,
        n_s,
        m_real: worst.m,
        m_int: ceil_signals(worst.m),
        n_b_worst,
        path: worst.path,
    })
}

/// Smallest integer number of signals at or above a real critical number.
pub fn ceil_signals(m_real: f64) -> u64 {
    (m_real.ceil() as u64).max(1)
}

/// Critical curve over a strictly increasing grid in `[0, 1)`. Points are
/// evaluated in parallel; output order follows the grid.
pub fn critical_curve(n_s: f64, r0_grid: &[f64], cfg: &SolverConfig) -> Result<CriticalCurve> {
    if r0_grid.is_empty() {
        return domain("r0 grid is empty");
    }
    if r0_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("r0 grid must be strictly increasing");
    }
    if r0_grid.iter().any(|r| !(0.0..1.0).contains(r)) {
        return domain("r0 grid must lie in [0, 1)");
    }
    if !(n_s > 0.0) || !n_s.is_finite() {
        return domain(format!("N_S must be finite and > 0, got {n_s}"));
    }
    let points = r0_grid
        .par_iter()
        .map(|&r0| match critical_m_worst_case(r0, n_s, cfg) {
            Ok(p) => Ok(CurvePoint {
                r0,
                status: PointStatus::Ok,
                m_real: Some(p.m_real),
                m_int: Some(p.m_int),
                n_b_worst: Some(p.n_b_worst),
                path: Some(p.path),
            }),
            Err(QreadError::NoAdvantage { n_b, .. }) => Ok(CurvePoint {
                r0,
                status: PointStatus::NoAdvantage,
                m_real: None,
                m_int: None,
                n_b_worst: Some(n_b),
                path: None,
            }),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CriticalCurve { n_s, points, solver: *cfg })
}

/// `[4 N_S (2N_S + 1) ε]⁻¹`, the small-`ε = 1 − r₀` estimate of the worst-case critical number.
pub fn asymptote_r0_to_1(n_s: f64, eps: f64) -> Result<f64> {
    if !(n_s > 0.0) || !(eps > 0.0) {
        return domain(format!("need N_S > 0 and eps > 0, got {n_s}, {eps}"));
    }
    Ok(1.0 / (4.0 * n_s * (2.0 * n_s + 1.0) * eps))
}

/// `κ(N_B) = N_B / [(N_B + N_S + 2 N_B N_S)² ε]`.
pub fn kappa(n_b: f64, n_s: f64, eps: f64) -> f64 {
    n_b / ((n_b + n_s + 2.0 * n_b * n_s).powi(2) * eps)
}

/// `N_B* = N_S / (1 + 2 N_S)`, where `κ` peaks.
pub fn kappa_argmax(n_s: f64) -> f64 {
    n_s / (1.0 + 2.0 * n_s)
}

/// Second-order expansion of `G` at `N_B = 0`, `r₀ = 1 − ε`:
/// `M N_S (4 M N_S − 1) ε² / (8 ln 2)`.
pub fn gain_expansion_noiseless(m: f64, n_s: f64, eps: f64) -> f64 {
    m * n_s * (4.0 * m * n_s - 1.0) * eps * eps / (8.0 * std::f64::consts::LN_2)
}

pub fn asymptote_high_energy(n_s: f64) -> Result<HighEnergyAsymptote> {
    if !(n_s >= 1.0) || !n_s.is_finite() {
        return domain(format!("high-energy asymptote needs N_S >= 1, got {n_s}"));
    }
    let denom = 2.0 * n_s.ln_1p() - n_s;
    Ok(if denom > 0.0 {
        HighEnergyAsymptote::Finite(std::f64::consts::LN_2 / denom)
    } else {
        HighEnergyAsymptote::Divergent
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn asymptote_values() {
        assert_relative_eq!(asymptote_r0_to_1(0.1, 1e-3).unwrap(), 2_083.333_333, max_relative = 1e-9);
        assert_relative_eq!(asymptote_r0_to_1(1.0, 0.01).unwrap(), 8.333_333_333, max_relative = 1e-9);
        match asymptote_high_energy(1.0).unwrap() {
            HighEnergyAsymptote::Finite(m) => {
                assert_relative_eq!(m, std::f64::consts::LN_2 / (2.0 * std::f64::consts::LN_2 - 1.0));
                assert_relative_eq!(m, 1.7943, epsilon = 1e-4);
            }
            HighEnergyAsymptote::Divergent => panic!("finite at N_S = 1"),
        }
        assert_eq!(asymptote_high_energy(2.6).unwrap(), HighEnergyAsymptote::Divergent);
        assert!(asymptote_high_energy(0.5).is_err());
        assert!(asymptote_r0_to_1(1.0, 0.0).is_err());
    }

    #[test]
    fn kappa_peak() {
        let n_s = 0.3;
        let peak = kappa_argmax(n_s);
        let eps = 1e-3;
        for d in [-1e-3, 1e-3] {
            assert!(kappa(peak + d, n_s, eps) < kappa(peak, n_s, eps));
        }
        assert_relative_eq!(kappa(peak, n_s, eps), asymptote_r0_to_1(n_s, eps).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn extremal_memory_root() {
        // r0 = N_B = 0: ½(1+N_S)^(−2M) = [1 − √(1 − e^(−M N_S))]/2, root solved independently
        let root = critical_m(0.0, 1.0, 0.0, &cfg()).unwrap();
        assert_eq!(root.path, RootPath::Bisection);
        assert_relative_eq!(root.m, 1.661_707_066_396, max_relative = 1e-9);
        assert_eq!(ceil_signals(root.m), 2);
        let q = 0.5 * 4f64.powf(-root.m);
        let c = (1.0 - (1.0 - (-root.m).exp()).sqrt()) / 2.0;
        assert_relative_eq!(q, c, max_relative = 1e-9);
    }

    #[test]
    fn root_certificate() {
        for &(r0, n_s, n_b) in &[(0.3, 0.1, 0.05), (0.8, 0.5, 0.2), (0.0, 2.0, 0.0), (0.95, 0.01, 0.01)] {
            let m = critical_m(r0, n_s, n_b, &cfg()).unwrap().m;
            let d = 1e-6 * m;
            assert!(ideal_gain(r0, n_s, n_b, m - d).unwrap() < 0.0);
            assert!(ideal_gain(r0, n_s, n_b, m + d).unwrap() > 0.0);
        }
    }

    #[test]
    fn no_advantage_at_high_energy() {
        let err = critical_m(0.0, 3.0, 0.0, &cfg()).unwrap_err();
        assert!(matches!(err, QreadError::NoAdvantage { .. }));
        assert!(matches!(critical_m(1.0, 1.0, 0.0, &cfg()), Err(QreadError::Domain(_))));
    }

    #[test]
    fn asymptotic_path_near_unit_reflectivity() {
        let small = SolverConfig { m_max: 1e3, ..cfg() };
        let root = critical_m(1.0 - 1e-5, 0.1, 0.08, &small).unwrap();
        assert_eq!(root.path, RootPath::Asymptotic);
        assert_relative_eq!(root.m, kappa(0.08, 0.1, 1e-5), max_relative = 1e-6);
    }

    #[test]
    fn worst_case_at_zero_bath_for_high_energy() {
        let p = critical_m_worst_case(0.0, 1.5, &cfg()).unwrap();
        assert_eq!(p.n_b_worst, 0.0);
        let direct = critical_m(0.0, 1.5, 0.0, &cfg()).unwrap().m;
        assert_relative_eq!(p.m_real, direct, max_relative = 1e-12);
    }

    #[test]
    fn ceiling_semantics() {
        let p = critical_m_worst_case(0.5, 0.1, &cfg()).unwrap();
        assert_eq!(p.m_int, p.m_real.ceil() as u64);
        let g = |m: f64| ideal_gain(0.5, 0.1, p.n_b_worst, m).unwrap();
        assert!(g(p.m_int as f64) > 0.0);
        assert!(g((p.m_int + 1) as f64) > 0.0);
        if p.m_int > 1 {
            assert!(g((p.m_int - 1) as f64) <= 0.0);
        }
        assert_eq!(ceil_signals(0.4), 1);
    }

    #[test]
    fn curve_validation_and_order() {
        assert!(critical_curve(0.1, &[], &cfg()).is_err());
        assert!(critical_curve(0.1, &[0.5, 0.2], &cfg()).is_err());
        assert!(critical_curve(0.1, &[0.5, 1.0], &cfg()).is_err());
        let curve = critical_curve(3.0, &[0.0, 0.5, 0.9], &cfg()).unwrap();
        assert_eq!(curve.points[0].status, PointStatus::NoAdvantage);
        let r0s: Vec<f64> = curve.points.iter().map(|p| p.r0).collect();
        assert_eq!(r0s, vec![0.0, 0.5, 0.9]);
    }
}
