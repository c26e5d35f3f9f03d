//! Decoded information and the information gain of the EPR transmitter.

use serde::{Deserialize, Serialize};

use crate::bounds::bound_pair;
use crate::channel::{MemoryModel, SignalProfile};
use crate::error::{domain, Result};

/// Binary Shannon entropy in bits, `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("probability must lie in [0, 1], got {x}"));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (-x).ln_1p() / std::f64::consts::LN_2)
}

/// Bounds and information figures for one parameter point. `gain > 0`
/// certifies that the EPR transmitter beats every classical transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub mem: MemoryModel,
    pub sig: SignalProfile,
    pub c_bound: f64,
    pub q_bound: f64,
    pub j_class: f64,
    pub j_quant: f64,
    pub gain: f64,
    pub s_star: Option<f64>,
}

/// `J_class = 1 − H(𝒞)`, `J_quant = 1 − H(𝒬)` and the gain, taken as
/// `H(𝒞) − H(𝒬)` so it survives when both entropies are far below 1.
pub fn information_from_bounds(c_bound: f64, q_bound: f64) -> Result<(f64, f64, f64)> {
    let h_class = binary_entropy(c_bound)?;
    let h_quant = binary_entropy(q_bound)?;
    Ok((1.0 - h_class, 1.0 - h_quant, h_class - h_quant))
}

pub fn gain(mem: &MemoryModel, sig: &SignalProfile) -> Result<GainReport> {
    let pair = bound_pair(mem, sig)?;
    let (j_class, j_quant, gain) = information_from_bounds(pair.c_bound, pair.q_bound)?;
    Ok(GainReport {
        mem: *mem,
        sig: *sig,
        c_bound: pair.c_bound,
        q_bound: pair.q_bound,
        j_class,
        j_quant,
        gain,
        s_star: pair.s_star,
    })
}

/// Rounds `x` to `digits` significant figures.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

/// One row of the published gain table: parameters and the printed gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub m: u64,
    pub n_s: f64,
    pub r0: f64,
    pub r1: f64,
    pub n_b: f64,
    pub printed_gain: f64,
}

impl ReferenceRow {
    pub fn memory(&self) -> Result<MemoryModel> {
        MemoryModel::new(self.r0, self.r1, self.n_b)
    }

    pub fn signal(&self) -> Result<SignalProfile> {
        SignalProfile::new(self.m, self.n_s)
    }
}

pub const REFERENCE_GAIN_TABLE: [ReferenceRow; 6] = [
    ReferenceRow { m: 1, n_s: 3.5, r0: 0.5, r1: 0.95, n_b: 0.01, printed_gain: 6.2e-3 },
    ReferenceRow { m: 10, n_s: 1.0, r0: 0.2, r1: 0.8, n_b: 0.01, printed_gain: 3.4e-2 },
    ReferenceRow { m: 30, n_s: 1.0, r0: 0.38, r1: 0.85, n_b: 1.0, printed_gain: 1.2e-3 },
    ReferenceRow { m: 100, n_s: 0.1, r0: 0.25, r1: 0.85, n_b: 0.01, printed_gain: 5.9e-2 },
    ReferenceRow { m: 200, n_s: 0.1, r0: 0.6, r1: 0.95, n_b: 0.01, printed_gain: 0.22 },
    ReferenceRow { m: 200_000, n_s: 0.01, r0: 0.995, r1: 1.0, n_b: 0.0, printed_gain: 0.99 },
];

/// How a computed gain compares with a printed two-significant-figure value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableAgreement {
    /// Rounds to the printed value.
    Match,
    /// Off by less than one unit in the last printed digit.
    LastDigit,
    Mismatch,
}

pub fn compare_printed(computed: f64, printed: f64) -> TableAgreement {
    if round_sig(computed, 2) == round_sig(printed, 2) {
        return TableAgreement::Match;
    }
    let unit = 10f64.powi(printed.abs().log10().floor() as i32 - 1);
    if (computed - printed).abs() < unit {
        TableAgreement::LastDigit
    } else {
        TableAgreement::Mismatch
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gain_survives_tiny_bounds() {
        let (_, _, g) = information_from_bounds(2e-17, 1e-17).unwrap();
        assert!(g > 0.0);
        assert_relative_eq!(binary_entropy(1e-20).unwrap(), 1e-20 * (1e20f64.log2() + 1.0 / std::f64::consts::LN_2), max_relative = 1e-12);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        let x: f64 = 0.11;
        let h = -x * x.log2() - (1.0 - x) * (1.0 - x).log2();
        assert_relative_eq!(binary_entropy(0.11).unwrap(), h);
        assert_relative_eq!(h, 0.49992, epsilon = 1e-5);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn zero_gain_for_identical_reflectivities() {
        let mem = MemoryModel::new(0.7, 0.7, 0.2).unwrap();
        let report = gain(&mem, &SignalProfile::new(100, 0.5).unwrap()).unwrap();
        assert_eq!(report.gain, 0.0);
        assert_eq!(report.j_class, 0.0);
        assert_eq!(report.j_quant, 0.0);
    }

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.006_234, 2), 0.0062);
        assert_eq!(round_sig(0.2251, 2), 0.23);
        assert_eq!(round_sig(0.9906, 2), 0.99);
        assert_eq!(compare_printed(0.006_234, 6.2e-3), TableAgreement::Match);
        assert_eq!(compare_printed(0.2251, 0.22), TableAgreement::LastDigit);
        assert_eq!(compare_printed(0.25, 0.22), TableAgreement::Mismatch);
    }

    #[test]
    fn table_rows_positive_gain() {
        for row in REFERENCE_GAIN_TABLE {
            let report = gain(&row.memory().unwrap(), &row.signal().unwrap()).unwrap();
            assert!(report.gain > 0.0, "{row:?} -> {report:?}");
            assert!((-1.0..=1.0).contains(&report.gain));
        }
    }
}
