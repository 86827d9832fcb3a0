//! Shared pipeline pieces: loading an input into a time-distance matrix
//! and dispatching an embedding run.

use std::path::Path;

use tdm_core::embedding::{stress, stress_normalizer, Layout};
use tdm_core::kspace::{optimize_joint, JointOptions, KLayout};
use tdm_core::majorization::{run_majorization, MajorizeInit, MajorizeOptions};
use tdm_core::metric::{
    all_pairs_times, symmetrize, weights, TimeDistanceMatrix, TravelTimeMatrix, WeightMatrix,
};
use tdm_core::road_graph::{build_graph_with, parse_network, RoadGraph};
use tdm_core::run::RunRecord;
use tdm_core::sgd::{run_sgd, SgdSchedule};

use crate::config::{Optimizer, RunConfig};
use crate::errors::{read_file, CliError};
use crate::logging;

/// A loaded embedding problem: vertex ids, the symmetric metric, and the
/// drawable edge list when the input was a network.
pub struct Problem {
    pub ids: Vec<String>,
    pub metric: TimeDistanceMatrix,
    pub edges: Vec<(usize, usize)>,
}

/// Reads either a network JSON file or a distance-matrix CSV (by
/// extension) and produces the symmetric time-distance metric.
pub fn load_problem(path: &Path, cfg: &RunConfig) -> Result<Problem, CliError> {
    if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        let text = String::from_utf8(read_file(path)?)
            .map_err(|_| CliError::Validation(format!("{} is not UTF-8", path.display())))?;
        let (ids, m) = TravelTimeMatrix::from_csv(&text)?;
        let metric = symmetrize(&m, cfg.sym)?;
        logging::info(&format!("loaded {}x{} matrix from CSV", m.n(), m.n()));
        Ok(Problem {
            ids,
            metric,
            edges: Vec::new(),
        })
    } else {
        let graph = load_graph(path, cfg)?;
        let travel = all_pairs_times(&graph);
        if let Some(matrix_path) = &cfg.matrix {
            crate::errors::write_file(matrix_path, &travel.to_csv(graph.vertices()))?;
        }
        let metric = symmetrize(&travel, cfg.sym).map_err(|e| match e {
            tdm_core::MetricError::DisconnectedPair(i, j) => CliError::Disconnected(format!(
                "vertices '{}' and '{}' are mutually unreachable; components: [{}]",
                graph.vertices()[i],
                graph.vertices()[j],
                weak_components(&graph)
            )),
            other => other.into(),
        })?;
        logging::info(&format!(
            "built graph with {} vertices, {} arcs",
            graph.vertex_count(),
            graph.arcs().len()
        ));
        Ok(Problem {
            ids: graph.vertices().to_vec(),
            metric,
            edges: drawable_edges(&graph),
        })
    }
}

/// Weakly connected components formatted as "a b | c d".
fn weak_components(graph: &RoadGraph) -> String {
    let n = graph.vertex_count();
    let mut component = vec![usize::MAX; n];
    let mut adjacency = vec![Vec::new(); n];
    for arc in graph.arcs() {
        adjacency[arc.from].push(arc.to);
        adjacency[arc.to].push(arc.from);
    }
    let mut count = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        component[start] = count;
        while let Some(u) = stack.pop() {
            for &v in &adjacency[u] {
                if component[v] == usize::MAX {
                    component[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    (0..count)
        .map(|c| {
            (0..n)
                .filter(|&v| component[v] == c)
                .map(|v| graph.vertices()[v].as_str())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

pub fn load_graph(path: &Path, cfg: &RunConfig) -> Result<RoadGraph, CliError> {
    let bytes = read_file(path)?;
    let net = parse_network(&bytes)?;
    Ok(build_graph_with(&net, cfg.ingest)?)
}

/// Arcs deduplicated to undirected drawing edges.
pub fn drawable_edges(graph: &RoadGraph) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for arc in graph.arcs() {
        let e = (arc.from.min(arc.to), arc.from.max(arc.to));
        if !edges.contains(&e) {
            edges.push(e);
        }
    }
    edges
}

/// Result of an embedding run in either geometry.
pub enum Embedded {
    Flat(Layout),
    Curved(KLayout),
}

impl Embedded {
    pub fn to_json(&self, ids: &[String]) -> String {
        match self {
            Self::Flat(l) => l.to_json(ids),
            Self::Curved(kl) => kl.to_json(ids),
        }
    }

    pub fn point_2d(&self, i: usize) -> (f64, f64) {
        let coords = match self {
            Self::Flat(l) => l.point(i),
            Self::Curved(kl) => kl.coords.point(i),
        };
        let x = coords.first().copied().unwrap_or(0.0);
        let y = coords.get(1).copied().unwrap_or(0.0);
        (x, y)
    }

    pub fn domain_radius(&self) -> Option<f64> {
        match self {
            Self::Flat(_) => None,
            Self::Curved(kl) => {
                let k = kl.kappa.value();
                (k < 0.0).then(|| 1.0 / (-k).sqrt())
            }
        }
    }
}

/// Runs the configured optimizer on the problem.
pub fn embed(
    metric: &TimeDistanceMatrix,
    cfg: &RunConfig,
) -> Result<(Embedded, RunRecord), CliError> {
    let w = weights(metric, cfg.alpha)?;
    let optimizer = cfg.embed_optimizer()?;
    run_optimizer(metric, &w, cfg, optimizer, cfg.seed, EmbedInit::Default)
}

/// Initial layout policy for optimizers that take one.
pub enum EmbedInit {
    /// Classical seed for majorization, seeded-random elsewhere.
    Default,
    /// Seeded-random initialization everywhere (benchmark protocol).
    Random,
}

pub fn run_optimizer(
    metric: &TimeDistanceMatrix,
    w: &WeightMatrix,
    cfg: &RunConfig,
    optimizer: Optimizer,
    seed: u64,
    init: EmbedInit,
) -> Result<(Embedded, RunRecord), CliError> {
    match optimizer {
        Optimizer::Classical => {
            let full = tdm_core::classical::classical_mds_full(metric, cfg.dims);
            if full.negative_mass > 0.0 {
                logging::info(&format!(
                    "metric is not exactly Euclidean: clamped eigenvalue mass {:.3e}",
                    full.negative_mass
                ));
            }
            let layout = full.layout;
            let denom = stress_normalizer(metric, w);
            let mut record = RunRecord::new(seed, denom);
            record.push(stress(&layout, metric, w)?.normalized);
            Ok((Embedded::Flat(layout), record))
        }
        Optimizer::Majorization => {
            let opts = MajorizeOptions {
                max_iter: cfg.iters.unwrap_or(300),
                tol: cfg.tol,
                seed,
            };
            let init = match init {
                EmbedInit::Default => MajorizeInit::Classical,
                EmbedInit::Random => {
                    let mut rng = tdm_core::rng::SeededRng::new(seed);
                    MajorizeInit::Layout(tdm_core::sgd::random_layout(
                        &mut rng,
                        metric.n(),
                        cfg.dims,
                        metric.max_distance() / 2.0,
                    ))
                }
            };
            let (layout, record) = run_majorization(metric, w, cfg.dims, init, opts)?;
            Ok((Embedded::Flat(layout), record))
        }
        Optimizer::Sgd => {
            let schedule =
                SgdSchedule::from_weights(w, cfg.iters.unwrap_or(SgdSchedule::DEFAULT_ITERATIONS))?;
            let (layout, record) = run_sgd(metric, w, cfg.dims, &schedule, seed)?;
            Ok((Embedded::Flat(layout), record))
        }
        Optimizer::KappaJoint => {
            let opts = JointOptions {
                steps: cfg.iters.unwrap_or(2000),
                lr_coords: cfg.lr_x,
                lr_kappa: cfg.lr_kappa,
                ..Default::default()
            };
            let (kl, record) = optimize_joint(metric, w, cfg.dims, seed, opts);
            Ok((Embedded::Curved(kl), record))
        }
    }
}
