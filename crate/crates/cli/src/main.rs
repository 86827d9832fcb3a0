//! tdm-embed: road networks -> travel-time metrics -> low-dimensional
//! embeddings, with optimizer benchmarks and SVG renderings.

mod bench;
mod config;
mod errors;
mod logging;
mod pipeline;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bench::FamilySpec;
use config::{FileConfig, Overrides, RunConfig};
use errors::{read_file, write_file, CliError};
use pipeline::{drawable_edges, embed, load_graph, load_problem};

#[derive(Parser)]
#[command(
    name = "tdm-embed",
    about = "Time-distance maps of road networks via multidimensional scaling",
    version,
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonFlags {
    /// Weight exponent: w_ij = d_ij^-alpha.
    #[arg(long)]
    alpha: Option<u8>,
    /// Embedding dimension.
    #[arg(long)]
    dims: Option<usize>,
    /// classical | majorization | sgd | kappa-joint.
    #[arg(long)]
    optimizer: Option<String>,
    /// Base random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeded runs (bench).
    #[arg(long)]
    seeds: Option<usize>,
    /// Iteration budget (meaning depends on the optimizer).
    #[arg(long)]
    iters: Option<usize>,
    /// Relative stress-improvement stopping tolerance (majorization).
    #[arg(long)]
    tol: Option<f64>,
    /// Symmetrization policy: mean | min | max.
    #[arg(long)]
    sym: Option<String>,
    /// Network ingestion mode: endpoint | block.
    #[arg(long)]
    ingest: Option<String>,
    /// Write an SVG rendering here.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Worker threads for bench (default: logical cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output file path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the pre-symmetrization travel-time matrix as CSV here.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// JSON config file mirroring these flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CommonFlags {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let file = FileConfig::load(self.config.as_deref())?;
        config::resolve(
            file,
            Overrides {
                alpha: self.alpha,
                dims: self.dims,
                optimizer: self.optimizer,
                seed: self.seed,
                seeds: self.seeds,
                iters: self.iters,
                tol: self.tol,
                sym: self.sym,
                ingest: self.ingest,
                svg: self.svg,
                jobs: self.jobs,
                out: self.out,
                matrix: self.matrix,
            },
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a network file; write the graph as JSON.
    Graph {
        /// Network JSON file.
        network: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Embed a network (or a distance-matrix CSV) and write the layout.
    Embed {
        /// Network JSON file, or a matrix CSV (by .csv extension).
        input: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Run seeded optimizer comparisons on a synthetic graph family.
    Bench {
        /// Family spec, e.g. grid:6, tree:3, cycle:5, complete:4.
        family: String,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Render a stored layout against its graph as SVG.
    Render {
        /// Layout JSON (flat or curved).
        layout: PathBuf,
        /// Graph JSON produced by `graph`, or the original network file.
        graph: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprintln!("error[config]: {}", first_line(&e.to_string()));
            return ExitCode::from(5);
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or("invalid arguments").to_string()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Graph { network, flags } => cmd_graph(&network, flags.resolve()?),
        Command::Embed { input, flags } => cmd_embed(&input, flags.resolve()?),
        Command::Bench { family, flags } => cmd_bench(&family, flags.resolve()?),
        Command::Render {
            layout,
            graph,
            flags,
        } => cmd_render(&layout, &graph, flags.resolve()?),
    }
}

fn cmd_graph(network: &Path, cfg: RunConfig) -> Result<(), CliError> {
    let graph = load_graph(network, &cfg)?;
    let json = tdm_core::road_graph::graph_to_json(&graph);
    match &cfg.out {
        Some(path) => write_file(path, &json)?,
        None => print!("{json}"),
    }
    eprintln!(
        "ok: {} vertices, {} arcs, {} entries, {} exits",
        graph.vertex_count(),
        graph.arcs().len(),
        graph.entries().len(),
        graph.exits().len()
    );
    Ok(())
}

fn cmd_embed(input: &Path, cfg: RunConfig) -> Result<(), CliError> {
    let problem = load_problem(input, &cfg)?;
    let (embedded, record) = embed(&problem.metric, &cfg)?;

    let layout_json = embedded.to_json(&problem.ids);
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("layout.json"));
    write_file(&out, &layout_json)?;
    let record_path = out.with_extension("runrecord.jsonl");
    write_file(&record_path, &record.to_jsonl())?;
    logging::info(&format!(
        "final normalized stress {:.6e} after {} iterations",
        record.final_stress.normalized, record.iterations_used
    ));

    if let Some(svg_path) = &cfg.svg {
        let points: Vec<(f64, f64)> = (0..problem.ids.len())
            .map(|i| embedded.point_2d(i))
            .collect();
        let svg = svg::layout_svg(
            &problem.ids,
            &points,
            &problem.edges,
            embedded.domain_radius(),
        );
        write_file(svg_path, &svg)?;
    }
    Ok(())
}

fn cmd_bench(family: &str, cfg: RunConfig) -> Result<(), CliError> {
    let spec = FamilySpec::parse(family)?;
    let optimizers = cfg.bench_optimizers()?;
    let output = bench::run_bench(&spec, &optimizers, &cfg)?;
    let json = bench::report_to_json(&output.report);
    match &cfg.out {
        Some(path) => write_file(path, &json)?,
        None => print!("{json}"),
    }
    if let Some(svg_path) = &cfg.svg {
        write_file(svg_path, &svg::trajectories_svg(&output.series))?;
    }
    Ok(())
}

fn cmd_render(layout_path: &Path, graph_path: &Path, cfg: RunConfig) -> Result<(), CliError> {
    let layout_text = String::from_utf8(read_file(layout_path)?)
        .map_err(|_| CliError::Validation(format!("{} is not UTF-8", layout_path.display())))?;

    // Curved layouts carry a "kappa" field; flat ones do not.
    #[derive(serde::Deserialize)]
    struct Probe {
        kappa: Option<f64>,
    }
    let probe: Probe = serde_json::from_str(&layout_text)
        .map_err(|e| CliError::Validation(format!("bad layout JSON: {e}")))?;
    let (ids, layout) = tdm_core::Layout::from_json(&layout_text)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let graph = load_graph_json_or_network(graph_path, &cfg)?;
    if graph.vertices().len() != ids.len()
        || !ids.iter().all(|id| graph.vertex_index(id).is_some())
    {
        return Err(CliError::Validation(format!(
            "layout ids do not match graph vertices ({} vs {})",
            ids.len(),
            graph.vertices().len()
        )));
    }

    // Order points by graph vertex order so edges index correctly.
    let mut points = vec![(0.0, 0.0); ids.len()];
    for (row, id) in ids.iter().enumerate() {
        let v = graph.vertex_index(id).expect("checked above");
        let coords = layout.point(row);
        points[v] = (
            coords.first().copied().unwrap_or(0.0),
            coords.get(1).copied().unwrap_or(0.0),
        );
    }
    let domain_radius = probe.kappa.and_then(|k| (k < 0.0).then(|| 1.0 / (-k).sqrt()));
    let svg = svg::layout_svg(
        graph.vertices(),
        &points,
        &drawable_edges(&graph),
        domain_radius,
    );
    match &cfg.out {
        Some(path) => write_file(path, &svg)?,
        None => print!("{svg}"),
    }
    Ok(())
}

/// `render` accepts either the graph JSON written by `graph` or the
/// original network file.
fn load_graph_json_or_network(
    path: &Path,
    cfg: &RunConfig,
) -> Result<tdm_core::RoadGraph, CliError> {
    let bytes = read_file(path)?;

    #[derive(serde::Deserialize)]
    struct GraphJson {
        vertices: Vec<String>,
        arcs: Vec<ArcJson>,
        #[serde(default)]
        entries: Vec<String>,
        #[serde(default)]
        exits: Vec<String>,
    }
    #[derive(serde::Deserialize)]
    struct ArcJson {
        from: String,
        to: String,
        travel_time_s: f64,
    }

    if let Ok(parsed) = serde_json::from_slice::<GraphJson>(&bytes) {
        let index = |id: &str| -> Result<usize, CliError> {
            parsed
                .vertices
                .iter()
                .position(|v| v == id)
                .ok_or_else(|| CliError::Validation(format!("graph JSON references unknown vertex '{id}'")))
        };
        let mut arcs = Vec::with_capacity(parsed.arcs.len());
        for a in &parsed.arcs {
            arcs.push(tdm_core::road_graph::Arc {
                from: index(&a.from)?,
                to: index(&a.to)?,
                travel_time: a.travel_time_s,
            });
        }
        let entries = parsed
            .entries
            .iter()
            .map(|id| index(id))
            .collect::<Result<Vec<_>, _>>()?;
        let exits = parsed
            .exits
            .iter()
            .map(|id| index(id))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(tdm_core::RoadGraph::from_parts(
            parsed.vertices,
            arcs,
            entries,
            exits,
        )?);
    }
    load_graph(path, cfg)
}
