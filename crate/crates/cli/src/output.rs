//! CSV artifacts: atomic writes, design files and their round trip.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use arraydesign::{Design, SelectionState, SensingModel, Solver};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const DESIGN_HEADER: [&str; 5] = ["step", "index", "position", "gain_nats", "cumulative_mi_nats"];

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// CSV document with a header, data rows and `#key,value` metadata rows at the end.
pub struct CsvDoc {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvDoc {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        CsvDoc { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn meta(&mut self, key: &str, value: impl AsRef<str>) {
        self.row([format!("#{key}").as_str(), value.as_ref()]);
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

/// Metadata describing the model a design was computed on.
pub fn model_meta(doc: &mut CsvDoc, cfg: &RunConfig, model: &SensingModel) {
    doc.meta("lambda", num(cfg.lambda));
    doc.meta("aperture_min", num(cfg.aperture.min));
    doc.meta("aperture_max", num(cfg.aperture.max));
    doc.meta("grid_delta", num(cfg.grid_delta));
    doc.meta("grid_len", model.len().to_string());
    doc.meta("prior_r", cfg.prior.r.to_string());
    doc.meta("prior_P", num(cfg.prior.p));
    doc.meta("prior_M_half", cfg.prior.m_half.to_string());
    doc.meta("noise_var", num(model.noise_var()));
}

pub fn provenance_meta(doc: &mut CsvDoc, cfg: &RunConfig) {
    doc.meta("config_hash", cfg.hash());
    doc.meta("tool_version", TOOL_VERSION);
}

/// A design read back from its CSV file.
#[derive(Debug, Clone)]
pub struct DesignFile {
    pub label: String,
    pub indices: Vec<usize>,
    pub positions: Vec<f64>,
    pub meta: BTreeMap<String, String>,
}

impl DesignFile {
    pub fn read(path: &Path) -> CliResult<Self> {
        let bad = |msg: String| CliError::Config(format!("design file {}: {msg}", path.display()));
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .from_path(path)
            .map_err(|e| bad(e.to_string()))?;
        let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != DESIGN_HEADER {
            return Err(bad("not a design file (unexpected header)".into()));
        }
        let mut indices = Vec::new();
        let mut positions = Vec::new();
        let mut meta = BTreeMap::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let first = rec.get(0).unwrap_or("");
            if let Some(key) = first.strip_prefix('#') {
                meta.insert(key.to_string(), rec.get(1).unwrap_or("").to_string());
                continue;
            }
            if rec.len() != DESIGN_HEADER.len() {
                return Err(bad(format!("malformed row {:?}", rec)));
            }
            let step: usize = first.parse().map_err(|_| bad(format!("bad step {first:?}")))?;
            if step != indices.len() + 1 {
                return Err(bad(format!("steps out of order at step {step}")));
            }
            indices.push(rec[1].parse().map_err(|_| bad(format!("bad index {:?}", &rec[1])))?);
            positions.push(rec[2].parse().map_err(|_| bad(format!("bad position {:?}", &rec[2])))?);
        }
        let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or("design").to_string();
        Ok(DesignFile { label, indices, positions, meta })
    }

    pub fn meta_f64(&self, key: &str) -> CliResult<f64> {
        self.meta
            .get(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| CliError::Config(format!("design {}: missing or invalid metadata {key:?}", self.label)))
    }

    pub fn target_snr(&self) -> CliResult<f64> {
        self.meta_f64("snr_db")
    }

    /// Rejects designs computed on a different grid or prior than `cfg`.
    pub fn check_compatible(&self, cfg: &RunConfig, model: &SensingModel) -> CliResult<()> {
        let expected = [
            ("lambda", cfg.lambda),
            ("aperture_min", cfg.aperture.min),
            ("aperture_max", cfg.aperture.max),
            ("grid_delta", cfg.grid_delta),
            ("grid_len", model.len() as f64),
            ("prior_r", cfg.prior.r as f64),
            ("prior_P", cfg.prior.p),
            ("prior_M_half", cfg.prior.m_half as f64),
        ];
        for (key, want) in expected {
            let got = self.meta_f64(key)?;
            if got != want {
                return Err(CliError::Config(format!(
                    "design {} is incompatible with the config: {key} = {got}, config has {want}",
                    self.label
                )));
            }
        }
        for (&i, &p) in self.indices.iter().zip(&self.positions) {
            if i >= model.len() || model.grid().position(i) != p {
                return Err(CliError::Config(format!(
                    "design {}: index {i} at position {p} does not match the candidate grid",
                    self.label
                )));
            }
        }
        Ok(())
    }

    /// Rebuilds the design on `model` under the config's constraint.
    pub fn to_design(&self, cfg: &RunConfig, model: &SensingModel) -> CliResult<Design> {
        self.check_compatible(cfg, model)?;
        let constraint = cfg.constraint(model)?;
        let state = SelectionState::from_indices(model, &self.indices)?;
        let solver = match self.meta.get("solver").map(String::as_str) {
            Some("greedy") => Solver::Greedy,
            Some("lazy") => Solver::LazyGreedy,
            Some("matroid-greedy") => Solver::MatroidGreedy,
            Some("exhaustive") => Solver::Exhaustive,
            other => {
                return Err(CliError::Config(format!("design {}: unknown solver {other:?}", self.label)));
            }
        };
        Ok(Design {
            indices: self.indices.clone(),
            positions: self.positions.clone(),
            gains: state.gains().to_vec(),
            mi_nats: state.mi_nats(),
            constraint,
            solver,
            evaluations: 0,
            lazy_bound_violation: 0.0,
            certificate: None,
        })
    }
}
