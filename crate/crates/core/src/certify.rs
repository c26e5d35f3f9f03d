//! Cross-checks of the Gaussian closed forms against the Fock-space oracle.
//!
//! Each cell evaluates the coherent-probe fidelity and `Q_s` both ways, at a
//! cutoff `d` and at `2d`, and checks the single-copy sandwich
//! `𝒞 ≤ P_err(coherent)` and `P_err(EPR) ≤ 𝒬`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    chernoff_infimum, chernoff_qs_perturbed, classical_bound_from_ln_fidelity, coherent_fidelity,
};
use crate::channel::{Bit, MemoryModel};
use crate::error::{domain, Result};
use crate::fock::{chernoff_trace, helstrom_error, uhlmann_fidelity, FockOperator, C64, DEFAULT_TRUNCATION_TOL};

pub const AGREEMENT_TOL: f64 = 1e-4;
pub const CONVERGENCE_TOL: f64 = 1e-6;
pub const SANDWICH_SLACK: f64 = 1e-6;
/// Smallest cutoff used even when the states would fit in fewer levels.
pub const MIN_DIM: usize = 12;
/// Tail weight targeted by the automatic cutoff; well inside the truncation tolerance.
const AUTO_TAIL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    /// Base cutoff; `None` picks one from the photon statistics.
    pub dim: Option<usize>,
    pub s_values: Vec<f64>,
    pub truncation_tol: f64,
    /// Multiplies every `Λ_p` in the Gaussian `Q_s`. Anything but 1 breaks the
    /// formula on purpose, to show the oracle notices.
    pub lambda_scale: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self { dim: None, s_values: vec![0.25, 0.5, 0.75], truncation_tol: DEFAULT_TRUNCATION_TOL, lambda_scale: 1.0 }
    }
}

/// One quantity computed by the closed form and by the oracle at `d` and `2d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub gaussian: f64,
    pub fock: f64,
    pub fock_doubled: f64,
}

impl OracleValue {
    pub fn abs_error(&self) -> f64 {
        (self.gaussian - self.fock_doubled).abs()
    }

    pub fn convergence(&self) -> f64 {
        (self.fock - self.fock_doubled).abs()
    }

    pub fn passes(&self) -> bool {
        self.passes_within(&Tolerances::default())
    }

    pub fn passes_within(&self, tol: &Tolerances) -> bool {
        self.abs_error() < tol.agreement && self.convergence() < tol.convergence
    }
}

/// Pass thresholds of a certification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub agreement: f64,
    pub convergence: f64,
    pub sandwich_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { agreement: AGREEMENT_TOL, convergence: CONVERGENCE_TOL, sandwich_slack: SANDWICH_SLACK }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffCheck {
    pub s: f64,
    pub value: OracleValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub r0: f64,
    pub r1: f64,
    pub n_b: f64,
    pub n_s: f64,
    pub dim: usize,
    pub fidelity: OracleValue,
    pub chernoff: Vec<ChernoffCheck>,
    /// Single-copy bounds and exact Helstrom errors (oracle, doubled cutoff).
    pub c_bound: f64,
    pub q_bound: f64,
    pub helstrom_coherent: f64,
    pub helstrom_epr: f64,
}

impl CellReport {
    pub fn sandwich_holds(&self) -> bool {
        self.sandwich_holds_within(SANDWICH_SLACK)
    }

    pub fn sandwich_holds_within(&self, slack: f64) -> bool {
        self.c_bound <= self.helstrom_coherent + slack && self.helstrom_epr <= self.q_bound + slack
    }

    pub fn worst_abs_error(&self) -> f64 {
        self.values().map(|v| v.abs_error()).fold(0.0, f64::max)
    }

    pub fn worst_convergence(&self) -> f64 {
        self.values().map(|v| v.convergence()).fold(0.0, f64::max)
    }

    fn values(&self) -> impl Iterator<Item = &OracleValue> {
        std::iter::once(&self.fidelity).chain(self.chernoff.iter().map(|c| &c.value))
    }

    pub fn passes(&self) -> bool {
        self.passes_within(&Tolerances::default())
    }

    pub fn passes_within(&self, tol: &Tolerances) -> bool {
        self.values().all(|v| v.passes_within(tol)) && self.sandwich_holds_within(tol.sandwich_slack)
    }
}

/// Cutoff at which a thermal tail of mean `n` drops below `tail`.
fn thermal_cutoff(n: f64, tail: f64) -> usize {
    if n <= 0.0 {
        return 1;
    }
    (tail.ln() / (n / (n + 1.0)).ln()).ceil() as usize
}

/// Cutoff large enough for the TMSV, the coherent probe and the output states.
pub fn auto_dim(n_s: f64, n_b: f64) -> usize {
    // loss output photon number is at most n_s + n_b; thermal tails dominate coherent ones
    thermal_cutoff(n_s + n_b, AUTO_TAIL).max(MIN_DIM)
}

/// EPR output `ρ_ri(bit)` on a two-mode cutoff `dim`.
pub fn epr_output_state(mem: &MemoryModel, bit: Bit, n_s: f64, dim: usize, tol: f64) -> Result<FockOperator> {
    FockOperator::tmsv_with_tol(n_s, dim, tol)?.apply_loss_with_tol(0, mem.reflectivity(bit), mem.n_b, dim, tol)
}

/// Output of the coherent probe `|√N_S⟩` on a single-mode cutoff `dim`.
pub fn coherent_output_state(mem: &MemoryModel, bit: Bit, n_s: f64, dim: usize, tol: f64) -> Result<FockOperator> {
    FockOperator::coherent(C64::new(n_s.sqrt(), 0.0), dim)?.apply_loss_with_tol(0, mem.reflectivity(bit), mem.n_b, dim, tol)
}

struct OracleRun {
    fidelity: f64,
    chernoff: Vec<f64>,
    helstrom_coherent: f64,
    helstrom_epr: f64,
}

fn oracle_run(mem: &MemoryModel, n_s: f64, dim: usize, settings: &OracleSettings) -> Result<OracleRun> {
    let tol = settings.truncation_tol;
    let [c0, c1] = Bit::BOTH.map(|b| coherent_output_state(mem, b, n_s, dim, tol));
    let (c0, c1) = (c0?, c1?);
    let [e0, e1] = Bit::BOTH.map(|b| epr_output_state(mem, b, n_s, dim, tol));
    let (e0, e1) = (e0?, e1?);
    let chernoff = settings
        .s_values
        .iter()
        .map(|&s| chernoff_trace(&e0, &e1, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleRun {
        fidelity: uhlmann_fidelity(&c0, &c1)?,
        chernoff,
        helstrom_coherent: helstrom_error(&c0, &c1)?,
        helstrom_epr: helstrom_error(&e0, &e1)?,
    })
}

pub fn certify_cell(mem: &MemoryModel, n_s: f64, settings: &OracleSettings) -> Result<CellReport> {
    if !(n_s > 0.0) {
        return domain(format!("N_S must be > 0, got {n_s}"));
    }
    if let Some(&s) = settings.s_values.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
        return domain(format!("s must lie in (0, 1), got {s}"));
    }
    let dim = settings.dim.unwrap_or_else(|| auto_dim(n_s, mem.n_b));
    let base = oracle_run(mem, n_s, dim, settings)?;
    let doubled = oracle_run(mem, n_s, 2 * dim, settings)?;

    let f = coherent_fidelity(mem, n_s)?;
    let chernoff = settings
        .s_values
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            Ok(ChernoffCheck {
                s,
                value: OracleValue {
                    gaussian: chernoff_qs_perturbed(mem, n_s, s, settings.lambda_scale)?,
                    fock: base.chernoff[i],
                    fock_doubled: doubled.chernoff[i],
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CellReport {
        r0: mem.r0,
        r1: mem.r1,
        n_b: mem.n_b,
        n_s,
        dim,
        fidelity: OracleValue { gaussian: f, fock: base.fidelity, fock_doubled: doubled.fidelity },
        chernoff,
        c_bound: classical_bound_from_ln_fidelity(f.ln(), 1.0),
        q_bound: 0.5 * chernoff_infimum(mem, n_s)?.q,
        helstrom_coherent: doubled.helstrom_coherent,
        helstrom_epr: doubled.helstrom_epr,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub n_s: Vec<f64>,
    pub reflectivities: Vec<f64>,
    pub n_b: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { n_s: vec![0.1, 0.5, 1.0], reflectivities: vec![0.0, 0.3, 0.7, 0.95, 1.0], n_b: vec![0.0, 0.1, 0.5] }
    }
}

impl SweepSpec {
    /// All `(memory, N_S)` cells, reflectivities paired as `r₀ < r₁`.
    pub fn cells(&self) -> Result<Vec<(MemoryModel, f64)>> {
        let mut out = Vec::new();
        for &n_s in &self.n_s {
            for (i, &r0) in self.reflectivities.iter().enumerate() {
                for &r1 in &self.reflectivities[i + 1..] {
                    if r0 >= r1 {
                        continue;
                    }
                    for &n_b in &self.n_b {
                        out.push((MemoryModel::new(r0, r1, n_b)?, n_s));
                    }
                }
            }
        }
        Ok(out)
    }
}

pub fn certify_sweep(spec: &SweepSpec, settings: &OracleSettings) -> Result<Vec<CellReport>> {
    spec.cells()?
        .par_iter()
        .map(|(mem, n_s)| certify_cell(mem, *n_s, settings))
        .collect()
}
