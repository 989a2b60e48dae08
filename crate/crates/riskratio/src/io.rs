//! Data ingestion: the study CSV format and the TOML configuration formats
//! for simulation grids and appropriateness checks.

use std::collections::HashSet;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{ClusterRecord, DataError, GroupData, ScenarioSpec, TwoGroupStudy};
use crate::simulation::{derive_cell_seed, AppropriatenessSpec, GroupParams};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<DataError> for IoError {
    fn from(e: DataError) -> Self {
        IoError::Validation(e.to_string())
    }
}

const STUDY_HEADER: [&str; 4] = ["group", "cluster", "size", "successes"];

#[derive(Debug, Deserialize)]
struct StudyRow {
    group: String,
    cluster: String,
    size: u32,
    successes: u32,
}

/// Parses the study CSV format: header `group,cluster,size,successes`,
/// group either `treatment` or `control`, duplicate `(group, cluster)`
/// keys rejected.
pub fn parse_study_csv<R: Read>(reader: R) -> Result<TwoGroupStudy, IoError> {
    let mut csv_reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| IoError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != STUDY_HEADER {
        return Err(IoError::Parse {
            line: 1,
            message: format!(
                "expected header {:?}, got {:?}",
                STUDY_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut treatment = Vec::new();
    let mut control = Vec::new();
    let mut seen: HashSet<(bool, String)> = HashSet::new();
    for (idx, row) in csv_reader.deserialize::<StudyRow>().enumerate() {
        let line = idx as u64 + 2; // one-based, after the header
        let row = row.map_err(|e| IoError::Parse {
            line,
            message: e.to_string(),
        })?;
        let is_treatment = match row.group.as_str() {
            "treatment" => true,
            "control" => false,
            other => {
                return Err(IoError::Parse {
                    line,
                    message: format!("unknown group {other:?}; expected treatment or control"),
                })
            }
        };
        if !seen.insert((is_treatment, row.cluster.clone())) {
            return Err(IoError::Validation(format!(
                "duplicate cluster {:?} in group {} (line {line})",
                row.cluster, row.group
            )));
        }
        let record = ClusterRecord::new(row.size, row.successes).map_err(|e| {
            IoError::Validation(format!("{e} (line {line})"))
        })?;
        if is_treatment {
            treatment.push(record);
        } else {
            control.push(record);
        }
    }
    let treatment = GroupData::new(treatment)
        .map_err(|e| IoError::Validation(format!("treatment group: {e}")))?;
    let control =
        GroupData::new(control).map_err(|e| IoError::Validation(format!("control group: {e}")))?;
    Ok(TwoGroupStudy::new(treatment, control))
}

/// Reads a study from a CSV file.
pub fn read_study_csv(path: &Path) -> Result<TwoGroupStudy, IoError> {
    let file = fs::File::open(path)?;
    parse_study_csv(file)
}

/// Writes a study in the same CSV format; clusters are numbered from 1
/// within each group.
pub fn write_study_csv<W: Write>(study: &TwoGroupStudy, writer: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(STUDY_HEADER)
        .map_err(|e| IoError::Validation(e.to_string()))?;
    for (label, group) in [("treatment", &study.treatment), ("control", &study.control)] {
        for (i, c) in group.clusters().iter().enumerate() {
            w.write_record([
                label,
                &(i + 1).to_string(),
                &c.size.to_string(),
                &c.successes.to_string(),
            ])
            .map_err(|e| IoError::Validation(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn default_alpha() -> f64 {
    0.05
}

fn default_stall_factor() -> f64 {
    100.0
}

/// Declarative description of a simulation grid. The cells are the cross
/// product of `clusters` x `sizes` x `eta` x `theta`; every cell shares
/// `gamma1`, `alpha`, and the replication target, and gets its own seed
/// derived from the master seed and its coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub clusters: Vec<u32>,
    pub sizes: Vec<u32>,
    pub gamma1: f64,
    pub eta: Vec<f64>,
    /// Pairs `[theta1, theta2]` of intraclass correlations.
    pub theta: Vec<[f64; 2]>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub replications: u32,
    pub seed: u64,
    #[serde(default = "default_stall_factor")]
    pub stall_factor: f64,
    #[serde(default)]
    pub per_method_accounting: bool,
}

impl GridConfig {
    pub fn cell_count(&self) -> usize {
        self.clusters.len() * self.sizes.len() * self.eta.len() * self.theta.len()
    }

    /// Expands the axes into scenario cells in a fixed order (clusters,
    /// then sizes, then eta, then theta).
    pub fn expand(&self) -> Result<Vec<ScenarioSpec>, IoError> {
        if self.cell_count() == 0 {
            return Err(IoError::Config("grid has no cells".into()));
        }
        let mut specs = Vec::with_capacity(self.cell_count());
        for &clusters in &self.clusters {
            for &size in &self.sizes {
                for &eta in &self.eta {
                    for &[theta1, theta2] in &self.theta {
                        let mut spec = ScenarioSpec {
                            clusters_per_group: clusters,
                            cluster_size: size,
                            gamma1: self.gamma1,
                            eta,
                            theta1,
                            theta2,
                            alpha: self.alpha,
                            replications: self.replications,
                            seed: 0,
                        };
                        spec.seed = derive_cell_seed(self.seed, &spec);
                        spec.validate()
                            .map_err(|e| IoError::Config(e.to_string()))?;
                        specs.push(spec);
                    }
                }
            }
        }
        Ok(specs)
    }
}

/// Reads and validates a grid configuration from TOML. Unknown keys are
/// rejected.
pub fn parse_grid_config(text: &str) -> Result<GridConfig, IoError> {
    let config: GridConfig =
        toml::from_str(text).map_err(|e| IoError::Config(e.to_string()))?;
    config.expand()?;
    Ok(config)
}

pub fn read_grid_config(path: &Path) -> Result<GridConfig, IoError> {
    parse_grid_config(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupParamsConfig {
    /// Success rate; optional for the control group when `eta` is given.
    pub gamma: Option<f64>,
    pub icc: f64,
    pub clusters: u32,
    pub mean_size: f64,
}

/// Fitted parameters of a real study for an appropriateness check. The
/// control rate may be given directly or implied by the fitted ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppropriatenessConfig {
    pub treatment: GroupParamsConfig,
    pub control: GroupParamsConfig,
    /// Fitted risk ratio; exactly one of this and `control.gamma` is
    /// required.
    pub eta: Option<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub replications: u32,
    pub seed: u64,
    #[serde(default = "default_stall_factor")]
    pub stall_factor: f64,
}

impl AppropriatenessConfig {
    pub fn to_spec(&self) -> Result<AppropriatenessSpec, IoError> {
        let gamma_t = self
            .treatment
            .gamma
            .ok_or_else(|| IoError::Config("treatment.gamma is required".into()))?;
        let gamma_c = match (self.control.gamma, self.eta) {
            (Some(g), None) => g,
            (None, Some(eta)) => gamma_t / eta,
            (Some(_), Some(_)) => {
                return Err(IoError::Config(
                    "give either control.gamma or eta, not both".into(),
                ))
            }
            (None, None) => {
                return Err(IoError::Config(
                    "either control.gamma or eta is required".into(),
                ))
            }
        };
        let spec = AppropriatenessSpec {
            treatment: GroupParams {
                gamma: gamma_t,
                icc: self.treatment.icc,
                clusters: self.treatment.clusters,
                mean_size: self.treatment.mean_size,
            },
            control: GroupParams {
                gamma: gamma_c,
                icc: self.control.icc,
                clusters: self.control.clusters,
                mean_size: self.control.mean_size,
            },
            alpha: self.alpha,
            replications: self.replications,
            seed: self.seed,
        };
        spec.validate().map_err(|e| IoError::Config(e.to_string()))?;
        Ok(spec)
    }
}

pub fn parse_params_config(text: &str) -> Result<AppropriatenessConfig, IoError> {
    let config: AppropriatenessConfig =
        toml::from_str(text).map_err(|e| IoError::Config(e.to_string()))?;
    config.to_spec()?;
    Ok(config)
}

pub fn read_params_config(path: &Path) -> Result<AppropriatenessConfig, IoError> {
    parse_params_config(&fs::read_to_string(path)?)
}
