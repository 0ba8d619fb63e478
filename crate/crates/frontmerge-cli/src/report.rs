//! The master report: versions, config echo, stage summaries, discrepancies, residuals.

use serde_json::{json, Map, Value};

use crate::artifacts::{Manifest, OutDir};
use crate::config::Config;
use crate::error::CliError;
use crate::pipeline::{Stage, ORDER};

pub const REPORT_JSON: &str = "report.json";
pub const RESIDUALS_JSON: &str = "residuals.json";
pub const CONFIG_ECHO: &str = "config.echo.toml";

/// Builds `report.json` from whatever stage summaries exist. Timing is kept out of it.
pub fn assemble(cfg: &Config, out: &OutDir) -> Result<Vec<String>, CliError> {
    let mut stages = Map::new();
    for s in &ORDER[..6] {
        let p = s.summary_path();
        if out.exists(&p) {
            stages.insert(s.name().into(), out.read_json::<Value>(&p)?);
        }
    }
    if stages.is_empty() {
        return Err(CliError::MissingInput("stages/*.json".into()));
    }
    let manifest = Manifest::load_or_new(out);
    let failures: Map<String, Value> = manifest
        .stages
        .iter()
        .filter_map(|(k, e)| e.failure.as_ref().map(|f| (k.clone(), Value::String(f.clone()))))
        .collect();
    let discrepancies = stages.get(Stage::Tables.name()).and_then(|t| t.get("discrepancies")).cloned().unwrap_or(Value::Null);
    let residuals = if out.exists(RESIDUALS_JSON) { out.read_json::<Value>(RESIDUALS_JSON)? } else { Value::Null };
    let config = serde_json::to_value(cfg).map_err(|e| CliError::Artifact { path: REPORT_JSON.into(), why: e.to_string() })?;
    let report = json!({
        "version": { "frontmerge": env!("CARGO_PKG_VERSION"), "format": 1 },
        "config": config,
        "stages": stages,
        "discrepancies": discrepancies,
        "residuals": residuals,
        "failures": failures,
    });
    out.write_json(REPORT_JSON, &report)?;
    out.write_text(CONFIG_ECHO, &cfg.to_toml_string())?;
    Ok(vec![REPORT_JSON.into(), CONFIG_ECHO.into()])
}
