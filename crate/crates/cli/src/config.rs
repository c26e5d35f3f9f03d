//! Run configuration: TOML file, then command-line overrides.

use std::path::Path;

use qreading::certify::{OracleSettings, SweepSpec, Tolerances};
use qreading::critical::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// Signal energies drawn by `critical-curve` when `--ns` is absent.
    pub critical_ns: Vec<f64>,
    pub r0_grid: String,
    pub ns_range: String,
}

impl Default for Grids {
    fn default() -> Self {
        Self { critical_ns: vec![0.01, 0.1, 0.5], r0_grid: "0:0.99:100".into(), ns_range: "1:2.45:30".into() }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub solver: SolverConfig,
    pub oracle: OracleSettings,
    pub tolerances: Tolerances,
    pub grids: Grids,
    pub sweep: SweepSpec,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        if self.oracle.dim.is_none() {
            out.push_str("# oracle.dim unset: cutoff chosen per cell from the photon statistics\n");
        }
        out + &toml::to_string_pretty(self).expect("config serializes")
    }
}

/// `start:stop:count` (inclusive, evenly spaced) or a comma list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(CliError::Usage("empty grid".into()));
    }
    let grid = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(CliError::Usage(format!("grid `{spec}`: expected start:stop:count")));
        };
        let (a, b) = (parse_f64(a)?, parse_f64(b)?);
        let n: usize = n.trim().parse().map_err(|_| CliError::Usage(format!("grid `{spec}`: bad count")))?;
        match n {
            0 => return Err(CliError::Usage(format!("grid `{spec}` has no points"))),
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        parse_list(spec)?
    };
    Ok(grid)
}

pub fn parse_list(spec: &str) -> Result<Vec<f64>, CliError> {
    let values = spec.split(',').filter(|s| !s.trim().is_empty()).map(parse_f64).collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Usage("empty list".into()));
    }
    Ok(values)
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| CliError::Usage(format!("not a finite number: `{s}`")))
}

/// `ns=0.1,1;r=0,0.5,1;nb=0,0.5`. Missing keys keep the base values.
pub fn parse_sweep(spec: &str, base: &SweepSpec) -> Result<SweepSpec, CliError> {
    let mut out = base.clone();
    for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, values) = part.split_once('=').ok_or_else(|| CliError::Usage(format!("sweep entry `{part}`: expected key=values")))?;
        let values = parse_grid(values)?;
        match key.trim() {
            "ns" => out.n_s = values,
            "r" => out.reflectivities = values,
            "nb" => out.n_b = values,
            other => return Err(CliError::Usage(format!("unknown sweep key `{other}` (use ns, r, nb)"))),
        }
    }
    Ok(out)
}
