//! Error-probability bounds for reading a memory cell.
//!
//! The classical bound `𝒞(M, N_S) = [1 − √(1 − F^M)]/2` lower-bounds every
//! transmitter with a positive P-representation; the quantum Chernoff bound
//! `𝒬(M, N_S) = ½ Q^M`, `Q = inf_s Tr(ρ₀^s ρ₁^{1−s})`, upper-bounds the EPR
//! transmitter. Powers of `F` and `Q` are always taken in the log domain.

use serde::{Deserialize, Serialize};

use crate::channel::{check_signal_energy, output_cm, Bit, MemoryModel, SignalProfile};
use crate::error::{domain, QreadError, Result};
use crate::gaussian::{gp_unchecked, lambda_p_unchecked, williamson, SymplecticDecomposition};
use crate::optimize::{golden_section_min, prescan_bracket};

/// Lower end of the `s` search interval; the upper end is `1 - S_MARGIN`.
pub const S_MARGIN: f64 = 1e-6;
pub const S_TOL: f64 = 1e-9;
pub const PRESCAN_POINTS: usize = 21;
/// Land reflectivities above `1 - NEAR_IDEAL` use the ideal-memory closed forms.
pub const NEAR_IDEAL: f64 = 1e-9;

/// The two bounds for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    pub c_bound: f64,
    pub q_bound: f64,
    /// Minimizing `s`, present only when the infimum was found numerically.
    pub s_star: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffMin {
    pub q: f64,
    pub s_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumBound {
    pub q_bound: f64,
    /// Single-copy Chernoff term `Q(N_S)`.
    pub chernoff_term: f64,
    pub s_star: Option<f64>,
}

fn check_fidelity_args(n_s: f64) -> Result<()> {
    if !(n_s >= 0.0) || !n_s.is_finite() {
        return domain(format!("N_S must be finite and >= 0, got {n_s}"));
    }
    Ok(())
}

/// Fidelity between the two outputs of the coherent probe `|√N_S⟩`:
/// `F = exp[−(√r₁ − √r₀)² N_S / γ] / (√(γ² + θ) − √θ)`.
pub fn coherent_fidelity(mem: &MemoryModel, n_s: f64) -> Result<f64> {
    check_fidelity_args(n_s)?;
    if mem.r0 == mem.r1 {
        return Ok(1.0);
    }
    let n_b = mem.n_b;
    let gamma = 1.0 + (2.0 - mem.r0 - mem.r1) * n_b;
    let theta = 4.0
        * n_b
        * n_b
        * [mem.r0, mem.r1]
            .iter()
            .map(|r| (1.0 - r) * (1.0 + (1.0 - r) * n_b))
            .product::<f64>();
    let prefactor = 1.0 / ((gamma * gamma + theta).sqrt() - theta.sqrt());
    let distance = (mem.r1.sqrt() - mem.r0.sqrt()).powi(2);
    Ok(prefactor * (-distance * n_s / gamma).exp())
}

/// `[1 − √(1 − x)]/2` with `x = exp(m · ln_f)`, rearranged as `x / (2(1 + √(1 − x)))`
/// so that tiny `x` loses no precision. `m` may be any positive real.
pub fn classical_bound_from_ln_fidelity(ln_f: f64, m: f64) -> f64 {
    let x = (m * ln_f).exp();
    x / (2.0 * (1.0 + (1.0 - x).max(0.0).sqrt()))
}

/// Natural log of the classical bound, finite even when `F^M` underflows.
pub fn ln_classical_bound_from_ln_fidelity(ln_f: f64, m: f64) -> f64 {
    let ln_x = m * ln_f;
    let x = ln_x.exp();
    ln_x - std::f64::consts::LN_2 - (1.0 + (1.0 - x).max(0.0).sqrt()).ln()
}

pub fn quantum_bound_from_ln_term(ln_q: f64, m: f64) -> f64 {
    0.5 * (m * ln_q).exp()
}

pub fn ln_quantum_bound_from_ln_term(ln_q: f64, m: f64) -> f64 {
    m * ln_q - std::f64::consts::LN_2
}

pub fn classical_bound(mem: &MemoryModel, sig: &SignalProfile) -> Result<f64> {
    let f = coherent_fidelity(mem, sig.n_s)?;
    Ok(classical_bound_from_ln_fidelity(f.ln(), sig.m as f64))
}

fn output_decompositions(mem: &MemoryModel, n_s: f64) -> Result<(SymplecticDecomposition, SymplecticDecomposition)> {
    let d0 = williamson(&output_cm(mem, Bit::Zero, n_s)?)?;
    let d1 = williamson(&output_cm(mem, Bit::One, n_s)?)?;
    Ok((d0, d1))
}

/// `Tr(ρ₀^s ρ₁^{1−s}) = 4 Π_k G_s(ν_k⁰) G_{1−s}(ν_k¹) / √det[V₀(s) + V₁(1−s)]`
/// with `V_u(p) = S_u (⊕_k Λ_p(ν_k^u) I) S_uᵀ`. `lambda_scale` multiplies every
/// `Λ_p` and is 1 outside sensitivity tests.
fn chernoff_kernel(d0: &SymplecticDecomposition, d1: &SymplecticDecomposition, s: f64, lambda_scale: f64) -> f64 {
    let t = 1.0 - s;
    let prefactor = gp_unchecked(d0.nu1, s) * gp_unchecked(d0.nu2, s) * gp_unchecked(d1.nu1, t) * gp_unchecked(d1.nu2, t);
    let v0 = d0.congruence(
        lambda_scale * lambda_p_unchecked(d0.nu1, s),
        lambda_scale * lambda_p_unchecked(d0.nu2, s),
    );
    let v1 = d1.congruence(
        lambda_scale * lambda_p_unchecked(d1.nu1, t),
        lambda_scale * lambda_p_unchecked(d1.nu2, t),
    );
    // two modes: the 2^n prefactor is fixed at 4
    4.0 * prefactor / (v0 + v1).determinant().sqrt()
}

/// Limit of the Chernoff trace at `s → 0` (`at_one = false`) or `s → 1`.
/// When the state carrying the vanishing exponent is pure the limit is the
/// overlap `4/√det(V₀ + V₁)`; otherwise `ρ^0` is the identity on its full
/// support and the limit is 1.
fn chernoff_endpoint(d0: &SymplecticDecomposition, d1: &SymplecticDecomposition, at_one: bool) -> f64 {
    let vanishing = if at_one { d1 } else { d0 };
    if !vanishing.is_pure() {
        return 1.0;
    }
    let v0 = if at_one { d0.reconstruct() } else { d0.congruence(1.0, 1.0) };
    let v1 = if at_one { d1.congruence(1.0, 1.0) } else { d1.reconstruct() };
    4.0 / (v0 + v1).determinant().sqrt()
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return domain(format!("s must lie in (0, 1), got {s}"));
    }
    Ok(())
}

/// Chernoff trace `Q_s = Tr[ρ_ri(0)^s ρ_ri(1)^{1−s}]` for the EPR outputs.
pub fn chernoff_qs(mem: &MemoryModel, n_s: f64, s: f64) -> Result<f64> {
    chernoff_qs_perturbed(mem, n_s, s, 1.0)
}

/// [`chernoff_qs`] with every `Λ_p` scaled by `lambda_scale`; used to check that
/// the oracle comparison detects a corrupted Gaussian formula.
#[doc(hidden)]
pub fn chernoff_qs_perturbed(mem: &MemoryModel, n_s: f64, s: f64, lambda_scale: f64) -> Result<f64> {
    check_signal_energy(n_s)?;
    check_s(s)?;
    let (d0, d1) = output_decompositions(mem, n_s)?;
    Ok(chernoff_kernel(&d0, &d1, s, lambda_scale))
}

/// Numeric `inf_s Q_s`: 21-point prescan, golden-section refinement inside the
/// bracket of the best sample, then comparison with the `s → 0, 1` limits.
pub fn chernoff_infimum(mem: &MemoryModel, n_s: f64) -> Result<ChernoffMin> {
    check_signal_energy(n_s)?;
    if mem.r0 == mem.r1 {
        return Ok(ChernoffMin { q: 1.0, s_star: 0.5 });
    }
    let (d0, d1) = output_decompositions(mem, n_s)?;
    let f = |s: f64| chernoff_kernel(&d0, &d1, s, 1.0);
    let (lo, hi, _) = prescan_bracket(f, S_MARGIN, 1.0 - S_MARGIN, PRESCAN_POINTS);
    let interior = golden_section_min(f, lo, hi, S_TOL)?;
    let mut best = ChernoffMin { q: interior.value, s_star: interior.x };
    for (s, value) in [(0.0, chernoff_endpoint(&d0, &d1, false)), (1.0, chernoff_endpoint(&d0, &d1, true))] {
        if value < best.q {
            best = ChernoffMin { q: value, s_star: s };
        }
    }
    if !(best.q > 0.0 && best.q <= 1.0 + 1e-9) {
        return Err(QreadError::Optimization(format!(
            "Chernoff infimum {} outside (0, 1] for {mem:?}, N_S = {n_s}",
            best.q
        )));
    }
    Ok(best)
}

/// `𝒬 = ½ Q(N_S)^M`. Ideal and near-ideal memories use the closed-form term.
pub fn quantum_bound(mem: &MemoryModel, sig: &SignalProfile) -> Result<QuantumBound> {
    let (term, s_star) = if mem.r1 > 1.0 - NEAR_IDEAL {
        (ideal_chernoff_term(mem.r0, mem.n_b, sig.n_s)?, None)
    } else {
        let min = chernoff_infimum(mem, sig.n_s)?;
        (min.q, Some(min.s_star))
    };
    let term = term.min(1.0);
    Ok(QuantumBound {
        q_bound: quantum_bound_from_ln_term(term.ln(), sig.m as f64),
        chernoff_term: term,
        s_star,
    })
}

pub fn bound_pair(mem: &MemoryModel, sig: &SignalProfile) -> Result<BoundPair> {
    let quantum = quantum_bound(mem, sig)?;
    Ok(BoundPair {
        c_bound: classical_bound(mem, sig)?,
        q_bound: quantum.q_bound,
        s_star: quantum.s_star,
    })
}

fn check_ideal_args(r0: f64, n_b: f64, n_s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r0) {
        return domain(format!("r0 must lie in [0, 1], got {r0}"));
    }
    if !(n_b >= 0.0) || !n_b.is_finite() {
        return domain(format!("N_B must be finite and >= 0, got {n_b}"));
    }
    check_signal_energy(n_s)
}

/// Closed-form Chernoff term of an ideal memory (`r₁ = 1`):
/// `Q = 1 / {[1 + (1 − √r₀)N_S]² + N_B(2N_S + 1)(1 − r₀)}`.
pub fn ideal_chernoff_term(r0: f64, n_b: f64, n_s: f64) -> Result<f64> {
    check_ideal_args(r0, n_b, n_s)?;
    Ok(1.0 / ideal_chernoff_denominator(r0, n_b, n_s))
}

fn ideal_chernoff_denominator(r0: f64, n_b: f64, n_s: f64) -> f64 {
    (1.0 + (1.0 - r0.sqrt()) * n_s).powi(2) + n_b * (2.0 * n_s + 1.0) * (1.0 - r0)
}

/// `ln Q` for an ideal memory.
pub fn ideal_ln_chernoff_term(r0: f64, n_b: f64, n_s: f64) -> Result<f64> {
    check_ideal_args(r0, n_b, n_s)?;
    Ok(-ideal_chernoff_denominator(r0, n_b, n_s).ln())
}

/// Ideal-memory coherent fidelity `F = γ⁻¹ exp[−γ⁻¹(1 − √r₀)² N_S]`, `γ = 1 + (1 − r₀)N_B`.
pub fn ideal_fidelity(r0: f64, n_b: f64, n_s: f64) -> Result<f64> {
    Ok(ideal_ln_fidelity(r0, n_b, n_s)?.exp())
}

pub fn ideal_ln_fidelity(r0: f64, n_b: f64, n_s: f64) -> Result<f64> {
    check_ideal_args(r0, n_b, n_s)?;
    let gamma = 1.0 + (1.0 - r0) * n_b;
    Ok(-gamma.ln() - (1.0 - r0.sqrt()).powi(2) * n_s / gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mem(r0: f64, r1: f64, n_b: f64) -> MemoryModel {
        MemoryModel::new(r0, r1, n_b).unwrap()
    }

    #[test]
    fn fidelity_examples() {
        assert_eq!(coherent_fidelity(&mem(0.4, 0.4, 0.3), 2.0).unwrap(), 1.0);
        assert_relative_eq!(coherent_fidelity(&mem(0.0, 1.0, 0.0), 1.0).unwrap(), (-1f64).exp(), epsilon = 1e-15);
        assert!(coherent_fidelity(&mem(0.0, 1.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn oracle_pinned_values() {
        // brute-force Fock values, cutoffs 60/120 and 40/80
        assert_relative_eq!(coherent_fidelity(&mem(0.5, 0.95, 0.01), 3.5).unwrap(), 0.777_599_566_190, epsilon = 1e-11);
        assert_relative_eq!(chernoff_qs(&mem(0.5, 0.8, 0.1), 1.0, 0.5).unwrap(), 0.931_894_548_859, epsilon = 1e-11);
    }

    #[test]
    fn identical_channels_prefactor_collapses() {
        // √(γ²+θ) − √θ = 1 algebraically when r0 = r1; check the general path at r0 ≈ r1
        let f = coherent_fidelity(&mem(0.4, 0.4 + 1e-12, 0.7), 0.0).unwrap();
        assert_relative_eq!(f, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn classical_bound_examples() {
        let sig = SignalProfile::new(1000, 1.0).unwrap();
        assert_eq!(classical_bound(&mem(0.3, 0.3, 1.0), &sig).unwrap(), 0.5);

        let sig = SignalProfile::new(10, 1.0).unwrap();
        let c = classical_bound(&mem(0.0, 1.0, 0.0), &sig).unwrap();
        let x = (-10f64).exp();
        assert_relative_eq!(c, (1.0 - (1.0 - x).sqrt()) / 2.0, max_relative = 1e-10);
        assert_relative_eq!(c, 1.135_01e-5, max_relative = 1e-5);
        // asymptotic form F^M / 4
        assert_relative_eq!(c, x / 4.0, max_relative = 1e-4);
    }

    #[test]
    fn classical_bound_survives_huge_m() {
        let sig = SignalProfile::new(1_000_000, 1.0).unwrap();
        let c = classical_bound(&mem(0.0, 1.0, 0.0), &sig).unwrap();
        assert_eq!(c, 0.0);
        let ln_c = ln_classical_bound_from_ln_fidelity(-1.0, 1e6);
        assert_relative_eq!(ln_c, -1e6 - 4f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn chernoff_identical_states() {
        let m = mem(0.6, 0.6, 0.2);
        for s in [0.1, 0.5, 0.9] {
            assert_relative_eq!(chernoff_qs(&m, 1.0, s).unwrap(), 1.0, epsilon = 1e-12);
        }
        let pair = bound_pair(&m, &SignalProfile::new(50, 1.0).unwrap()).unwrap();
        assert_eq!((pair.c_bound, pair.q_bound), (0.5, 0.5));
    }

    #[test]
    fn chernoff_domain_errors() {
        let m = mem(0.2, 0.8, 0.1);
        assert!(chernoff_qs(&m, 1.0, 0.0).is_err());
        assert!(chernoff_qs(&m, 1.0, 1.0).is_err());
        assert!(chernoff_qs(&m, 0.0, 0.5).is_err());
    }

    #[test]
    fn ideal_limit_matches_closed_form() {
        for &(r0, n_b, n_s) in &[(0.0, 0.0, 1.0), (0.3, 0.2, 0.7), (0.9, 1.0, 0.1), (0.5, 0.0, 3.0)] {
            let closed = ideal_chernoff_term(r0, n_b, n_s).unwrap();
            let near_one = chernoff_qs(&mem(r0, 1.0, n_b), n_s, 1.0 - 1e-4).unwrap();
            assert_relative_eq!(near_one, closed, max_relative = 1e-3);
            let numeric = chernoff_infimum(&mem(r0, 1.0, n_b), n_s).unwrap();
            assert_relative_eq!(numeric.q, closed, max_relative = 1e-10);
        }
    }

    #[test]
    fn quantum_bound_examples() {
        let sig = SignalProfile::new(7, 1.5).unwrap();
        let qb = quantum_bound(&mem(0.0, 1.0, 0.0), &sig).unwrap();
        assert_relative_eq!(qb.q_bound, 0.5 * 2.5f64.powi(-14), max_relative = 1e-12);
        assert!(qb.s_star.is_none());

        let qb = quantum_bound(&mem(0.5, 0.95, 0.01), &SignalProfile::new(1, 3.5).unwrap()).unwrap();
        let s = qb.s_star.unwrap();
        assert!(s > 0.0 && s < 1.0);
        assert!(qb.q_bound < 0.5);
    }

    #[test]
    fn ideal_closed_forms() {
        assert_eq!(ideal_chernoff_term(1.0, 0.3, 2.0).unwrap(), 1.0);
        assert_relative_eq!(ideal_chernoff_term(0.0, 0.0, 1.0).unwrap(), 0.25);
        let h = 1.0 - 0.5f64.sqrt();
        assert_relative_eq!(
            ideal_chernoff_term(0.5, 1.0, 1.0).unwrap(),
            1.0 / ((1.0 + h).powi(2) + 1.5),
            epsilon = 1e-15
        );
        assert_eq!(ideal_fidelity(1.0, 0.5, 2.0).unwrap(), 1.0);
        assert_relative_eq!(ideal_fidelity(0.0, 0.0, 1.0).unwrap(), (-1f64).exp(), epsilon = 1e-15);
        let g: f64 = 1.375;
        assert_relative_eq!(ideal_fidelity(0.25, 0.5, 2.0).unwrap(), (-0.5 / g).exp() / g, epsilon = 1e-15);
        assert_relative_eq!(ideal_fidelity(0.25, 0.5, 2.0).unwrap(), 0.505_56, epsilon = 1e-5);
        assert!(ideal_chernoff_term(1.2, 0.0, 1.0).is_err());
        assert!(ideal_fidelity(0.5, -1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn general_fidelity_reduces_to_ideal(r0 in 0.0f64..1.0, n_b in 0.0f64..5.0, n_s in 0.0f64..5.0) {
            let general = coherent_fidelity(&mem(r0, 1.0, n_b), n_s).unwrap();
            let ideal = ideal_fidelity(r0, n_b, n_s.max(1e-300)).unwrap();
            prop_assert!((general - ideal).abs() < 1e-12);
        }

        #[test]
        fn chernoff_swap_symmetry(r0 in 0.0f64..0.9, dr in 0.05f64..0.99, n_b in 0.0f64..1.0, n_s in 0.05f64..2.0, s in 0.05f64..0.95) {
            let r1 = r0 + (1.0 - r0) * dr;
            let n = n_s;
            let forward = chernoff_qs(&mem(r0, r1, n_b), n, s).unwrap();
            // swapping roles: evaluate the kernel with the states exchanged
            let (d0, d1) = output_decompositions(&mem(r0, r1, n_b), n).unwrap();
            let swapped = chernoff_kernel(&d1, &d0, 1.0 - s, 1.0);
            prop_assert!((forward - swapped).abs() < 1e-12 * forward.max(1.0));
            prop_assert!(forward > 0.0 && forward <= 1.0 + 1e-12);
        }

        #[test]
        fn bounds_at_most_half(r0 in 0.0f64..1.0, dr in 0.0f64..1.0, n_b in 0.0f64..2.0, n_s in 0.01f64..3.0, m in 1u64..1000) {
            let r1 = r0 + (1.0 - r0) * dr;
            let pair = bound_pair(&mem(r0, r1, n_b), &SignalProfile::new(m, n_s).unwrap()).unwrap();
            prop_assert!(pair.c_bound <= 0.5 && pair.c_bound >= 0.0);
            // ½Q^M may underflow to zero for large M
            prop_assert!(pair.q_bound <= 0.5 && pair.q_bound >= 0.0);
        }
    }
}
