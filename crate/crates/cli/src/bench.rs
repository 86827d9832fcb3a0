//! Optimizer benchmark harness over synthetic graph families.
//!
//! Runs each requested optimizer from each seed, in parallel across a
//! worker pool, and reports per-optimizer statistics of the final
//! normalized stress plus iteration counts to within 10% of each run's own
//! final value. Majorization runs from seeded random layouts here so that
//! run-to-run spread is measurable.

use std::collections::BTreeMap;

use serde::Serialize;
use tdm_core::metric::{weights, TimeDistanceMatrix, WeightMatrix};
use tdm_core::run::{median, stats_of, RunStats};
use tdm_core::synthetic::{generate, Family, Instance};

use crate::config::{Optimizer, RunConfig};
use crate::errors::CliError;
use crate::logging;
use crate::pipeline::{run_optimizer, EmbedInit, Embedded};

pub struct FamilySpec {
    pub family: Family,
    pub size: usize,
}

impl FamilySpec {
    /// Parses "family:size", e.g. "grid:6".
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let (name, size) = s.split_once(':').ok_or_else(|| {
            CliError::Config(format!(
                "family spec '{s}' must look like grid:6, tree:3, cycle:5 or complete:4"
            ))
        })?;
        let family = Family::parse(name)
            .ok_or_else(|| CliError::Config(format!("unknown graph family '{name}'")))?;
        let size: usize = size
            .parse()
            .map_err(|_| CliError::Config(format!("bad family size '{size}'")))?;
        let min = match family {
            Family::Grid => 1,
            Family::Tree => 0,
            Family::Cycle => 3,
            Family::Complete => 2,
        };
        if size < min {
            return Err(CliError::Config(format!(
                "family {} needs size >= {min}",
                family.name()
            )));
        }
        Ok(Self { family, size })
    }
}

#[derive(Serialize, Clone)]
pub struct SeedReport {
    pub seed: u64,
    pub final_norm_stress: f64,
    pub final_raw_stress: f64,
    pub iterations: usize,
    /// 1-based iteration at which the trajectory first came within 10% of
    /// its own final stress.
    pub iters_to_within_10pct: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_final: Option<f64>,
}

#[derive(Serialize)]
pub struct OptimizerReport {
    pub final_norm_stress: RunStats,
    pub median_iters_to_within_10pct: f64,
    pub per_seed: Vec<SeedReport>,
}

#[derive(Serialize)]
pub struct BenchReport {
    pub family: String,
    pub size: usize,
    pub vertices: usize,
    pub alpha: u8,
    pub dims: usize,
    pub seeds: Vec<u64>,
    pub optimizers: BTreeMap<String, OptimizerReport>,
}

pub struct BenchOutput {
    pub report: BenchReport,
    /// (optimizer, seed, normalized-stress trajectory) for plotting.
    pub series: Vec<(String, u64, Vec<f64>)>,
}

pub fn run_bench(
    spec: &FamilySpec,
    optimizers: &[Optimizer],
    cfg: &RunConfig,
) -> Result<BenchOutput, CliError> {
    if cfg.seeds < 2 {
        return Err(CliError::Config(format!(
            "bench needs at least 2 seeds, got {}",
            cfg.seeds
        )));
    }
    let Instance { metric, ids, .. } = generate(spec.family, spec.size);
    let w = weights(&metric, cfg.alpha)?;
    let seeds: Vec<u64> = (0..cfg.seeds as u64).map(|i| cfg.seed + i).collect();
    logging::info(&format!(
        "bench {}:{} ({} vertices), seeds {}..{}, {} workers",
        spec.family,
        spec.size,
        ids.len(),
        seeds[0],
        seeds[seeds.len() - 1],
        cfg.jobs
    ));

    let mut report = BenchReport {
        family: spec.family.name().to_string(),
        size: spec.size,
        vertices: ids.len(),
        alpha: cfg.alpha.exponent() as u8,
        dims: cfg.dims,
        seeds: seeds.clone(),
        optimizers: BTreeMap::new(),
    };
    let mut series = Vec::new();

    for &optimizer in optimizers {
        let runs = fan_out(&metric, &w, cfg, optimizer, &seeds)?;
        let finals: Vec<f64> = runs.iter().map(|r| r.report.final_norm_stress).collect();
        let iters_to: Vec<f64> = runs
            .iter()
            .filter_map(|r| r.report.iters_to_within_10pct.map(|v| v as f64))
            .collect();
        let stats = stats_of(&finals)?;
        report.optimizers.insert(
            optimizer.name().to_string(),
            OptimizerReport {
                final_norm_stress: stats,
                median_iters_to_within_10pct: median(&iters_to),
                per_seed: runs.iter().map(|r| r.report.clone()).collect(),
            },
        );
        for run in runs {
            series.push((optimizer.name().to_string(), run.report.seed, run.trajectory));
        }
    }
    Ok(BenchOutput { report, series })
}

struct SeedRun {
    report: SeedReport,
    trajectory: Vec<f64>,
}

/// Runs one optimizer across all seeds on at most `cfg.jobs` threads.
/// Results are collected per seed and reassembled in seed order, so the
/// output is independent of scheduling.
fn fan_out(
    metric: &TimeDistanceMatrix,
    w: &WeightMatrix,
    cfg: &RunConfig,
    optimizer: Optimizer,
    seeds: &[u64],
) -> Result<Vec<SeedRun>, CliError> {
    let chunk_count = cfg.jobs.min(seeds.len()).max(1);
    let chunks: Vec<Vec<u64>> = (0..chunk_count)
        .map(|c| {
            seeds
                .iter()
                .copied()
                .skip(c)
                .step_by(chunk_count)
                .collect()
        })
        .collect();

    let results: Vec<Result<Vec<SeedRun>, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                scope.spawn(move || {
                    chunk
                        .into_iter()
                        .map(|seed| run_seed(metric, w, cfg, optimizer, seed))
                        .collect::<Result<Vec<_>, _>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bench worker panicked"))
            .collect()
    });

    let mut runs = Vec::with_capacity(seeds.len());
    for r in results {
        runs.extend(r?);
    }
    runs.sort_by_key(|r| r.report.seed);
    Ok(runs)
}

fn run_seed(
    metric: &TimeDistanceMatrix,
    w: &WeightMatrix,
    cfg: &RunConfig,
    optimizer: Optimizer,
    seed: u64,
) -> Result<SeedRun, CliError> {
    let (embedded, record) = run_optimizer(metric, w, cfg, optimizer, seed, EmbedInit::Random)?;
    let kappa_final = match &embedded {
        Embedded::Curved(kl) => Some(kl.kappa.value()),
        Embedded::Flat(_) => None,
    };
    logging::debug(&format!(
        "{} seed {seed}: final {:.3e}",
        optimizer.name(),
        record.final_stress.normalized
    ));
    Ok(SeedRun {
        report: SeedReport {
            seed,
            final_norm_stress: record.final_stress.normalized,
            final_raw_stress: record.final_stress.raw,
            iterations: record.iterations_used,
            iters_to_within_10pct: record.iterations_to_within(1.1),
            kappa_final,
        },
        trajectory: record.trajectory,
    })
}

pub fn report_to_json(report: &BenchReport) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("serializable");
    out.push('\n');
    out
}
