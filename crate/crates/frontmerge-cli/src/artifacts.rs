//! Output directory layout, CSV/JSON writers and the MANIFEST.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use frontmerge::convolutions::{InteractionTable, TableRecord};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TABLE_CSV: &str = "table.csv";

/// 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct OutDir {
    root: PathBuf,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

impl OutDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, CliError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io(&root))?;
        Ok(Self { root })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn exists(&self, rel: &str) -> bool {
        self.path(rel).is_file()
    }

    fn prepare(&self, rel: &str) -> Result<PathBuf, CliError> {
        let p = self.path(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).map_err(io(parent))?;
        }
        Ok(p)
    }

    pub fn write_csv(&self, rel: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        let p = self.prepare(rel)?;
        let err = |e: csv::Error| CliError::Io { path: p.display().to_string(), source: e.into() };
        let mut w = csv::Writer::from_path(&p).map_err(err)?;
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(&row).map_err(err)?;
        }
        w.flush().map_err(io(&p))
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, rel: &str, value: &T) -> Result<(), CliError> {
        let p = self.prepare(rel)?;
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Artifact { path: rel.into(), why: e.to_string() })?;
        text.push('\n');
        fs::write(&p, text).map_err(io(&p))
    }

    pub fn write_text(&self, rel: &str, text: &str) -> Result<(), CliError> {
        let p = self.prepare(rel)?;
        fs::write(&p, text).map_err(io(&p))
    }

    pub fn read_json<T: for<'de> Deserialize<'de>>(&self, rel: &str) -> Result<T, CliError> {
        let p = self.path(rel);
        let text = fs::read_to_string(&p).map_err(io(&p))?;
        serde_json::from_str(&text).map_err(|e| CliError::Artifact { path: rel.into(), why: e.to_string() })
    }

    pub fn read_table(&self) -> Result<InteractionTable, CliError> {
        if !self.exists(TABLE_CSV) {
            return Err(CliError::MissingInput(TABLE_CSV.into()));
        }
        let bad = |why: String| CliError::Artifact { path: TABLE_CSV.into(), why };
        let mut r = csv::Reader::from_path(self.path(TABLE_CSV)).map_err(|e| bad(e.to_string()))?;
        let header: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
        if header != TableRecord::COLUMNS {
            return Err(bad(format!("header {header:?}")));
        }
        let mut records = Vec::new();
        for row in r.records() {
            let row = row.map_err(|e| bad(e.to_string()))?;
            let v: Vec<f64> = row.iter().map(|s| s.parse::<f64>().map_err(|e| bad(format!("{s}: {e}")))).collect::<Result<_, _>>()?;
            records.push(TableRecord {
                eta: v[0],
                b_omega: v[1],
                bz_omega: v[2],
                c_omega: v[3],
                c_hat: v[4],
                d_hat: v[5],
                b_tilde: v[6],
                b_dot0: v[7],
                bz_dot0: v[8],
                beta: v[9],
            });
        }
        InteractionTable::from_records(records).map_err(|e| bad(e.to_string()))
    }

    /// Every regular file below the root, relative and sorted.
    pub fn files(&self) -> Vec<String> {
        fn walk(dir: &Path, root: &Path, out: &mut Vec<String>) {
            let Ok(entries) = fs::read_dir(dir) else { return };
            for e in entries.flatten() {
                let p = e.path();
                if p.is_dir() {
                    walk(&p, root, out);
                } else if let Ok(rel) = p.strip_prefix(root) {
                    out.push(rel.to_string_lossy().replace('\\', "/"));
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &self.root, &mut out);
        out.sort();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Running,
    Complete,
    Partial,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub status: StageStatus,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Written before and after every stage, so an interrupted run leaves `status = "incomplete"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub status: String,
    pub stages: BTreeMap<String, StageEntry>,
    pub files: Vec<String>,
}

pub const MANIFEST: &str = "MANIFEST";
pub const TIMING: &str = "timing.json";

impl Manifest {
    pub fn load_or_new(out: &OutDir) -> Self {
        out.read_json(MANIFEST).unwrap_or(Self { status: "incomplete".into(), stages: BTreeMap::new(), files: Vec::new() })
    }

    pub fn save(&mut self, out: &OutDir, all_stages: &[&str]) -> Result<(), CliError> {
        let done = all_stages.iter().all(|s| self.stages.get(*s).is_some_and(|e| e.status == StageStatus::Complete));
        self.status = if done { "complete" } else { "incomplete" }.into();
        let mut files: Vec<String> = out.files().into_iter().filter(|f| f != MANIFEST).collect();
        files.push(MANIFEST.into());
        files.sort();
        self.files = files;
        out.write_json(MANIFEST, self)
    }
}

pub fn record_timing(out: &OutDir, stage: &str, seconds: f64) -> Result<(), CliError> {
    let mut t: BTreeMap<String, f64> = out.read_json(TIMING).unwrap_or_default();
    t.insert(stage.into(), seconds);
    out.write_json(TIMING, &t)
}
