//! Run configuration: a TOML document with a fixed key set.

use std::path::{Path, PathBuf};

use arraydesign::{build_model, build_prior, partition_from_bins, CandidateGrid, Constraint, MatroidSpec, SensingModel};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aperture {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub r: u32,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "M_half")]
    pub m_half: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrList {
    Scalar(f64),
    List(Vec<f64>),
}

impl SnrList {
    pub fn values(&self) -> Vec<f64> {
        match self {
            SnrList::Scalar(s) => vec![*s],
            SnrList::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    pub bin_width: f64,
    #[serde(default)]
    pub offset: f64,
    /// One cap per bin, or a single cap applied to every bin.
    pub caps: Vec<usize>,
    pub global_cap: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ConstraintConfig {
    #[default]
    Uniform,
    Partition(PartitionConfig),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    #[default]
    Greedy,
    Lazy,
    Exhaustive,
}

fn default_trials() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lambda: f64,
    pub grid_delta: f64,
    pub budget: usize,
    pub snr_db: SnrList,
    #[serde(default)]
    pub solver: SolverChoice,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_snrs_db: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject_epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub aperture: Aperture,
    pub prior: PriorConfig,
    #[serde(default)]
    pub constraint: ConstraintConfig,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| bad(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !finite_pos(self.lambda) {
            return Err(bad(format!("lambda must be positive and finite, got {}", self.lambda)));
        }
        if !(self.aperture.min.is_finite() && self.aperture.max.is_finite() && self.aperture.min < self.aperture.max) {
            return Err(bad(format!(
                "aperture requires min < max, got [{}, {}]",
                self.aperture.min, self.aperture.max
            )));
        }
        if !finite_pos(self.grid_delta) {
            return Err(bad(format!("grid_delta must be positive, got {}", self.grid_delta)));
        }
        if self.budget == 0 {
            return Err(bad("budget must be at least 1"));
        }
        if self.prior.r == 0 || !finite_pos(self.prior.p) || self.prior.m_half == 0 {
            return Err(bad("prior requires r >= 1, P > 0 and M_half >= 1"));
        }
        let snrs = self.snr_db.values();
        if snrs.is_empty() {
            return Err(bad("snr_db must name at least one SNR"));
        }
        for s in snrs.iter().chain(self.eval_snrs_db.iter().flatten()) {
            if !s.is_finite() {
                return Err(bad(format!("SNR values must be finite (got {s}); infinite SNR means zero noise variance")));
            }
        }
        if self.trials == 0 {
            return Err(bad("trials must be at least 1"));
        }
        if let Some(e) = self.inject_epsilon {
            if !(e.is_finite() && e >= 0.0) {
                return Err(bad(format!("inject_epsilon must be finite and non-negative, got {e}")));
            }
        }
        if let ConstraintConfig::Partition(p) = &self.constraint {
            if !finite_pos(p.bin_width) || !p.offset.is_finite() {
                return Err(bad("partition bin_width must be positive and offset finite"));
            }
            if p.caps.is_empty() || p.global_cap == 0 {
                return Err(bad("partition needs at least one cap and global_cap >= 1"));
            }
        }
        self.grid()?;
        Ok(())
    }

    pub fn snrs(&self) -> Vec<f64> {
        self.snr_db.values()
    }

    pub fn eval_snrs(&self) -> Vec<f64> {
        self.eval_snrs_db.clone().unwrap_or_else(|| self.snrs())
    }

    pub fn grid(&self) -> CliResult<CandidateGrid> {
        CandidateGrid::from_aperture(self.aperture.min, self.aperture.max, self.grid_delta)
            .map_err(|e| bad(format!("invalid grid: {e}")))
    }

    pub fn model(&self, snr_db: f64) -> CliResult<SensingModel> {
        let prior = build_prior(self.prior.r, self.prior.p, self.prior.m_half)?;
        Ok(build_model(self.lambda, snr_db, self.budget, self.grid()?, prior)?)
    }

    pub fn constraint(&self, model: &SensingModel) -> CliResult<Constraint> {
        Ok(match &self.constraint {
            ConstraintConfig::Uniform => Constraint::Cardinality { budget: self.budget },
            ConstraintConfig::Partition(p) => Constraint::Matroid(self.matroid(model, p)?),
        })
    }

    fn matroid(&self, model: &SensingModel, p: &PartitionConfig) -> CliResult<MatroidSpec> {
        partition_from_bins(model.grid(), p.bin_width, p.offset, &p.caps, p.global_cap)
            .map_err(|e| bad(format!("invalid partition: {e}")))
    }

    /// SHA-256 of the canonical serialization, excluding the output directory.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.output_dir = None;
        let text = toml::to_string(&canon).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
