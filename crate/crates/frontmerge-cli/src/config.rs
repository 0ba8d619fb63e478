//! Scenario files: TOML with one top-level block and a section per stage.

use std::path::Path;

use frontmerge::stefan::ScenarioKind;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub kind: ScenarioKind,
    pub r_min: f64,
    pub r_max: f64,
    /// Time horizon t₁.
    pub t_end: f64,
    /// Residual sweep values, strictly decreasing.
    pub eps: Vec<f64>,
    /// Jitter of the test-function centers; nothing else is random.
    pub seed: u64,
    pub out: String,
    pub quadrature: QuadratureConfig,
    pub profile: ProfileConfig,
    pub table: TableConfig,
    pub interaction: InteractionConfig,
    pub manufactured: ManufacturedConfig,
    pub solved: SolvedConfig,
    pub ansatz: AnsatzConfig,
    pub pde: PdeConfig,
    pub residuals: ResidualsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

/// Cutoff intervals as margins from the domain ends, in units of R₂ − R₁.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileConfig {
    pub switch_steepness: f64,
    pub inner_margin: f64,
    pub outer_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TableConfig {
    pub eta_min: f64,
    pub eta_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InteractionConfig {
    pub tau_min: f64,
    pub tau_max: f64,
    pub d_tau: f64,
}

/// Contact point of the manufactured fronts; `speed` is the symmetric approach speed.
/// The asymmetric kind uses its fixed coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ManufacturedConfig {
    pub r_star: f64,
    pub t_star: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolvedConfig {
    pub r1_init: f64,
    pub r2_init: f64,
    pub boundary: Vec<f64>,
    pub cells: usize,
    pub dt: f64,
    pub trajectory_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnsatzConfig {
    pub eps: f64,
    pub grid_factor: f64,
    pub dtau: f64,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PdeConfig {
    pub eps: f64,
    /// dt = dt_factor·ε².
    pub dt_factor: f64,
    pub window_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResidualsConfig {
    pub times: Vec<f64>,
    pub tests: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::ManufacturedSymmetric,
            r_min: 1.0,
            r_max: 3.0,
            t_end: 0.75,
            eps: vec![0.1, 0.07, 0.05, 0.035],
            seed: 7,
            out: "out".into(),
            quadrature: QuadratureConfig::default(),
            profile: ProfileConfig::default(),
            table: TableConfig::default(),
            interaction: InteractionConfig::default(),
            manufactured: ManufacturedConfig::default(),
            solved: SolvedConfig::default(),
            ansatz: AnsatzConfig::default(),
            pde: PdeConfig::default(),
            residuals: ResidualsConfig::default(),
        }
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let q = frontmerge::numerics::QuadratureSpec::default();
        Self { abs_tol: q.abs_tol, rel_tol: q.rel_tol }
    }
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { switch_steepness: 1.0, inner_margin: 0.125, outer_margin: 0.025 }
    }
}

impl Default for TableConfig {
    fn default() -> Self {
        Self { eta_min: -16.0, eta_max: 16.0, points: 257 }
    }
}

impl Default for InteractionConfig {
    fn default() -> Self {
        Self { tau_min: -120.0, tau_max: 200.0, d_tau: 0.05 }
    }
}

impl Default for ManufacturedConfig {
    fn default() -> Self {
        Self { r_star: 2.0, t_star: 0.5, speed: 1.0 }
    }
}

impl Default for SolvedConfig {
    fn default() -> Self {
        Self { r1_init: 1.6, r2_init: 2.4, boundary: vec![8.0, 8.0], cells: 40, dt: 1e-3, trajectory_rows: 300 }
    }
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self { eps: 0.05, grid_factor: 8.0, dtau: 0.05, times: vec![0.1, 0.3, 0.5, 0.7] }
    }
}

impl Default for PdeConfig {
    fn default() -> Self {
        Self { eps: 0.05, dt_factor: 0.2, window_end: 0.4 }
    }
}

impl Default for ResidualsConfig {
    fn default() -> Self {
        Self { times: (1..=14).map(|k| 0.05 * k as f64).collect(), tests: 8 }
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "string",
        Value::Integer(_) => "integer",
        Value::Float(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Datetime(_) => "datetime",
        Value::Array(_) => "array",
        Value::Table(_) => "table",
    }
}

/// Checks `given` against the shape of `reference`, widening integers to floats in place.
fn conform(path: &str, given: &mut Value, reference: &Value) -> Result<(), CliError> {
    let mismatch = |expected: &str, got: &Value| CliError::Config(format!("key {path}: expected {expected}, got {}", type_name(got)));
    match (reference, &mut *given) {
        (Value::Table(r), Value::Table(g)) => {
            for (k, v) in g.iter_mut() {
                let sub = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match r.get(k) {
                    None => return Err(CliError::Config(format!("unknown key: {sub}"))),
                    Some(rv) => conform(&sub, v, rv)?,
                }
            }
            Ok(())
        }
        (Value::Float(_), Value::Integer(i)) => {
            *given = Value::Float(*i as f64);
            Ok(())
        }
        (Value::Integer(_), Value::Integer(i)) if *i < 0 => Err(CliError::Config(format!("key {path}: expected nonnegative integer, got {i}"))),
        (Value::Array(r), Value::Array(g)) => match r.first() {
            Some(elem) => {
                for (i, v) in g.iter_mut().enumerate() {
                    conform(&format!("{path}[{i}]"), v, elem)?;
                }
                Ok(())
            }
            None => Ok(()),
        },
        (r, g) if std::mem::discriminant(r) == std::mem::discriminant(&*g) => Ok(()),
        (r, g) => Err(mismatch(type_name(r), g)),
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        let reference = Value::try_from(Config::default()).map_err(|e| CliError::Config(e.to_string()))?;
        let mut given = Value::Table(table);
        conform("", &mut given, &reference)?;
        let cfg: Config = given.try_into().map_err(|e: toml::de::Error| {
            let msg = e.message().to_string();
            if msg.contains("unknown variant") {
                CliError::Config("key kind: expected one of manufactured-symmetric, manufactured-asymmetric, solved".into())
            } else {
                CliError::Config(msg)
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |what: &str| Err(CliError::Config(format!("{what} violated")));
        if !(self.r_min >= 1.0) {
            return fail("R1 >= 1");
        }
        if !(self.r_min < self.r_max) {
            return fail("R1 < R2");
        }
        if !(self.t_end > 0.0) {
            return fail("t1 > 0");
        }
        let eps_max = (self.r_max - self.r_min) / 20.0;
        let in_range = |e: f64| e > 0.0 && e <= eps_max;
        if !(self.eps.iter().all(|&e| in_range(e)) && in_range(self.ansatz.eps) && in_range(self.pde.eps)) {
            return fail("eps in (0, (R2-R1)/20]");
        }
        if self.eps.len() < 3 || self.eps.windows(2).any(|w| !(w[1] < w[0])) {
            return fail("eps list of at least 3 strictly decreasing values");
        }
        if self.solved.boundary.len() != 2 {
            return fail("solved.boundary has 2 entries");
        }
        if self.residuals.times.iter().chain(&self.ansatz.times).any(|&t| !(t >= 0.0 && t <= self.t_end)) {
            return fail("sample times in [0, t1]");
        }
        if !(self.profile.outer_margin > 0.0 && self.profile.outer_margin < self.profile.inner_margin && self.profile.inner_margin < 0.5) {
            return fail("0 < outer_margin < inner_margin < 1/2");
        }
        Ok(())
    }
}

/// Reads and validates a scenario file; absent keys take their defaults.
pub fn load_scenario(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    Config::from_toml_str(&text)
}
