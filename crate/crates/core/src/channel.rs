//! Conditional outputs of a beam-splitter memory cell coupled to a thermal bath.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gaussian::{SingleModeGaussian, TwoModeNormalCm};

/// The bit stored in the cell, selecting reflectivity `r0` or `r1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub const BOTH: [Bit; 2] = [Bit::Zero, Bit::One];
}

/// Memory cell: pit reflectivity `r0`, land reflectivity `r1 >= r0`, and the
/// mean photon number `n_b` of each white thermal bath mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryModel {
    pub r0: f64,
    pub r1: f64,
    pub n_b: f64,
}

impl MemoryModel {
    pub fn new(r0: f64, r1: f64, n_b: f64) -> Result<Self> {
        for (name, r) in [("r0", r0), ("r1", r1)] {
            if !(0.0..=1.0).contains(&r) {
                return domain(format!("{name} must lie in [0, 1], got {r}"));
            }
        }
        if r1 < r0 {
            return domain(format!("expected r1 >= r0, got r0 = {r0}, r1 = {r1}"));
        }
        if !(n_b >= 0.0) || !n_b.is_finite() {
            return domain(format!("N_B must be finite and >= 0, got {n_b}"));
        }
        Ok(Self { r0, r1, n_b })
    }

    /// Ideal memory: the land reflectivity is exactly one.
    pub fn ideal(r0: f64, n_b: f64) -> Result<Self> {
        Self::new(r0, 1.0, n_b)
    }

    pub fn reflectivity(&self, bit: Bit) -> f64 {
        match bit {
            Bit::Zero => self.r0,
            Bit::One => self.r1,
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.r1 == 1.0
    }
}

/// Signal profile under the local energy constraint: `m` signal modes with
/// `n_s` mean photons each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalProfile {
    pub m: u64,
    pub n_s: f64,
}

impl SignalProfile {
    pub fn new(m: u64, n_s: f64) -> Result<Self> {
        if m == 0 {
            return domain("number of signal modes must be >= 1");
        }
        if !(n_s > 0.0) || !n_s.is_finite() {
            return domain(format!("N_S must be finite and > 0, got {n_s}"));
        }
        Ok(Self { m, n_s })
    }

    pub fn total_energy(&self) -> f64 {
        self.m as f64 * self.n_s
    }
}

pub(crate) fn check_signal_energy(n_s: f64) -> Result<()> {
    if !(n_s > 0.0) || !n_s.is_finite() {
        return domain(format!("N_S must be finite and > 0, got {n_s}"));
    }
    Ok(())
}

/// Two-mode squeezed vacuum with `N_S = sinh²ξ` mean photons per mode.
pub fn tmsv_cm(n_s: f64) -> Result<TwoModeNormalCm> {
    check_signal_energy(n_s)?;
    let mu = 2.0 * n_s + 1.0;
    TwoModeNormalCm::new(mu, mu, 2.0 * (n_s * (n_s + 1.0)).sqrt())
}

/// Reflected + idler covariance matrix after the signal half of a TMSV hits the cell.
///
/// With `μ = 2N_S + 1`, `β = 2N_B + 1`: `a = rμ + (1 − r)β`, `b = μ`, `c = √(r(μ² − 1))`.
pub fn output_cm(mem: &MemoryModel, bit: Bit, n_s: f64) -> Result<TwoModeNormalCm> {
    check_signal_energy(n_s)?;
    let r = mem.reflectivity(bit);
    let mu = 2.0 * n_s + 1.0;
    let beta = 2.0 * mem.n_b + 1.0;
    // μ² − 1 = 4N_S(N_S + 1), written to keep r = 1 bit-identical with tmsv_cm
    let c = if r == 1.0 {
        2.0 * (n_s * (n_s + 1.0)).sqrt()
    } else {
        (r * 4.0 * n_s * (n_s + 1.0)).sqrt()
    };
    TwoModeNormalCm::new(r * mu + (1.0 - r) * beta, mu, c)
}

/// Output of the coherent probe `|√N_S⟩` (real amplitude).
pub fn coherent_output(mem: &MemoryModel, bit: Bit, n_s: f64) -> Result<SingleModeGaussian> {
    if !(n_s >= 0.0) || !n_s.is_finite() {
        return domain(format!("N_S must be finite and >= 0, got {n_s}"));
    }
    let r = mem.reflectivity(bit);
    SingleModeGaussian::new(2.0 * (r * n_s).sqrt(), 0.0, 1.0 + 2.0 * (1.0 - r) * mem.n_b)
}
