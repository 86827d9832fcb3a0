//! Run configuration: CLI flags layered over an optional JSON config file.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use tdm_core::{Alpha, IngestMode, SymmetrizePolicy};

use crate::errors::CliError;

/// Raw config-file contents; every field optional, flags override.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<u8>,
    pub dims: Option<usize>,
    pub optimizer: Option<String>,
    pub seed: Option<u64>,
    pub seeds: Option<usize>,
    pub iters: Option<usize>,
    pub tol: Option<f64>,
    pub sym: Option<String>,
    pub ingest: Option<String>,
    pub svg: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub matrix: Option<PathBuf>,
    pub lr_x: Option<f64>,
    pub lr_kappa: Option<f64>,
    pub space: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Config(format!("bad config file {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    Classical,
    Majorization,
    Sgd,
    KappaJoint,
}

impl Optimizer {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "classical" => Ok(Self::Classical),
            "majorization" => Ok(Self::Majorization),
            "sgd" => Ok(Self::Sgd),
            "kappa-joint" => Ok(Self::KappaJoint),
            other => Err(CliError::Config(format!(
                "unknown optimizer '{other}' (expected classical, majorization, sgd, kappa-joint)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Classical => "classical",
            Self::Majorization => "majorization",
            Self::Sgd => "sgd",
            Self::KappaJoint => "kappa-joint",
        }
    }
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub alpha: Alpha,
    pub dims: usize,
    /// The raw --optimizer value when one was given; embed takes a single
    /// name, bench a comma-separated list.
    pub optimizer_raw: Option<String>,
    /// Space declared in the config file, if any; must agree with the
    /// optimizer.
    space: Option<String>,
    pub seed: u64,
    pub seeds: usize,
    pub iters: Option<usize>,
    pub tol: f64,
    pub sym: SymmetrizePolicy,
    pub ingest: IngestMode,
    pub svg: Option<PathBuf>,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub matrix: Option<PathBuf>,
    pub lr_x: f64,
    pub lr_kappa: f64,
}

pub struct Overrides {
    pub alpha: Option<u8>,
    pub dims: Option<usize>,
    pub optimizer: Option<String>,
    pub seed: Option<u64>,
    pub seeds: Option<usize>,
    pub iters: Option<usize>,
    pub tol: Option<f64>,
    pub sym: Option<String>,
    pub ingest: Option<String>,
    pub svg: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub matrix: Option<PathBuf>,
}

impl RunConfig {
    /// Single optimizer for `embed`; the kappa space must match.
    pub fn embed_optimizer(&self) -> Result<Optimizer, CliError> {
        let optimizer = match &self.optimizer_raw {
            Some(raw) => Optimizer::parse(raw)?,
            None => Optimizer::Majorization,
        };
        if let Some(space) = &self.space {
            let wants_kappa = space == "kappa";
            if wants_kappa != (optimizer == Optimizer::KappaJoint) {
                return Err(CliError::Config(format!(
                    "space '{space}' contradicts optimizer '{}'",
                    optimizer.name()
                )));
            }
        }
        Ok(optimizer)
    }

    /// Optimizer list for `bench`: a comma-separated --optimizer value,
    /// "all", or the default majorization-vs-sgd comparison.
    pub fn bench_optimizers(&self) -> Result<Vec<Optimizer>, CliError> {
        match &self.optimizer_raw {
            None => Ok(vec![Optimizer::Majorization, Optimizer::Sgd]),
            Some(raw) if raw == "all" => Ok(vec![
                Optimizer::Classical,
                Optimizer::Majorization,
                Optimizer::Sgd,
                Optimizer::KappaJoint,
            ]),
            Some(raw) => raw.split(',').map(|s| Optimizer::parse(s.trim())).collect(),
        }
    }
}

pub fn resolve(file: FileConfig, flags: Overrides) -> Result<RunConfig, CliError> {
    let alpha_raw = flags.alpha.or(file.alpha).unwrap_or(2);
    let alpha = Alpha::parse(&alpha_raw.to_string())
        .ok_or_else(|| CliError::Config(format!("alpha must be 0, 1 or 2, got {alpha_raw}")))?;

    let dims = flags.dims.or(file.dims).unwrap_or(2);
    if dims == 0 {
        return Err(CliError::Config("dims must be at least 1".to_string()));
    }

    let optimizer_raw = flags.optimizer.or(file.optimizer);
    if let Some(space) = &file.space {
        if !matches!(space.as_str(), "euclidean" | "kappa") {
            return Err(CliError::Config(format!(
                "space must be 'euclidean' or 'kappa', got '{space}'"
            )));
        }
    }

    let seeds = flags.seeds.or(file.seeds).unwrap_or(10);
    let iters = flags.iters.or(file.iters);
    if iters == Some(0) {
        return Err(CliError::Config("iters must be at least 1".to_string()));
    }
    let tol = flags.tol.or(file.tol).unwrap_or(1e-7);
    if !(tol > 0.0) {
        return Err(CliError::Config(format!("tol must be positive, got {tol}")));
    }

    let sym_raw = flags
        .sym
        .or(file.sym)
        .unwrap_or_else(|| "mean".to_string());
    let sym = match sym_raw.as_str() {
        "mean" => SymmetrizePolicy::Mean,
        "min" => SymmetrizePolicy::Min,
        "max" => SymmetrizePolicy::Max,
        other => {
            return Err(CliError::Config(format!(
                "sym must be mean, min or max, got '{other}'"
            )))
        }
    };

    let ingest_raw = flags
        .ingest
        .or(file.ingest)
        .unwrap_or_else(|| "endpoint".to_string());
    let ingest = IngestMode::parse(&ingest_raw).ok_or_else(|| {
        CliError::Config(format!(
            "ingest must be endpoint or block, got '{ingest_raw}'"
        ))
    })?;

    let jobs = flags
        .jobs
        .or(file.jobs)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1);

    Ok(RunConfig {
        alpha,
        dims,
        optimizer_raw,
        space: file.space,
        seed: flags.seed.or(file.seed).unwrap_or(1),
        seeds,
        iters,
        tol,
        sym,
        ingest,
        svg: flags.svg.or(file.svg),
        jobs,
        out: flags.out.or(file.out),
        matrix: flags.matrix.or(file.matrix),
        lr_x: file.lr_x.unwrap_or(0.05),
        lr_kappa: file.lr_kappa.unwrap_or(0.01),
    })
}
