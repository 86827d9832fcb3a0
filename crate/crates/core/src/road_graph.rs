//! Road networks and their directed graph form.
//!
//! A network file lists road segments with physical lengths and speed
//! limits plus designated entry and exit vertices. Building the graph turns
//! each segment into one directed arc (two if bidirectional) weighted by
//! travel time in seconds (`length / speed_limit`).
//!
//! Two ingestion modes exist: the default treats segment endpoints as graph
//! vertices; the alternative treats each segment itself as a vertex (a road
//! "block") and connects blocks that can be traversed in sequence.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Deserialize;

/// A single stretch of road with homogeneous speed limit.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadSegment {
    pub id: String,
    pub from: String,
    pub to: String,
    /// Meters, > 0.
    pub length_m: f64,
    /// Meters per second, > 0.
    pub speed_limit_mps: f64,
    pub bidirectional: bool,
}

impl RoadSegment {
    /// Travel time in seconds along this segment.
    pub fn travel_time(&self) -> f64 {
        self.length_m / self.speed_limit_mps
    }
}

/// A parsed road-network description.
#[derive(Debug, Clone)]
pub struct RoadNetwork {
    pub segments: Vec<RoadSegment>,
    pub entries: Vec<String>,
    pub exits: Vec<String>,
}

/// How network segments map onto graph vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IngestMode {
    /// Segment endpoints are vertices; segments become arcs.
    #[default]
    Endpoint,
    /// Segments are vertices ("blocks"); traversable segment successions
    /// become arcs.
    Block,
}

impl IngestMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "endpoint" => Some(Self::Endpoint),
            "block" => Some(Self::Block),
            _ => None,
        }
    }
}

/// A directed arc with its travel time in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub travel_time: f64,
}

/// Directed road graph: ordered vertices, arcs weighted by travel time, and
/// the designated entry/exit vertex sets.
#[derive(Debug, Clone)]
pub struct RoadGraph {
    vertices: Vec<String>,
    arcs: Vec<Arc>,
    entries: Vec<usize>,
    exits: Vec<usize>,
    index: HashMap<String, usize>,
    out_arcs: Vec<Vec<usize>>,
}

/// A directed path through a [`RoadGraph`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoadPath {
    /// Vertex indices, start to end.
    pub vertices: Vec<usize>,
    /// Indices into [`RoadGraph::arcs`], one per hop.
    pub arcs: Vec<usize>,
    /// Sum of arc travel times in seconds.
    pub total_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RoadGraphError {
    /// The input bytes are not a well-formed network file.
    MalformedFile(String),
    /// A segment or entry/exit declaration violates the network rules.
    InvalidSegment(String),
    /// An entry lacks an outgoing arc or an exit lacks an incoming arc.
    DegreeViolation { vertex: String, missing: DegreeKind },
    /// No directed path between the queried vertices.
    NoPath { from: String, to: String },
    /// A queried vertex id is not in the graph.
    UnknownVertex(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeKind {
    Outgoing,
    Incoming,
}

impl fmt::Display for RoadGraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MalformedFile(msg) => write!(f, "malformed network file: {msg}"),
            Self::InvalidSegment(msg) => write!(f, "invalid segment data: {msg}"),
            Self::DegreeViolation { vertex, missing } => match missing {
                DegreeKind::Outgoing => {
                    write!(f, "entry vertex '{vertex}' has no outgoing arc")
                }
                DegreeKind::Incoming => {
                    write!(f, "exit vertex '{vertex}' has no incoming arc")
                }
            },
            Self::NoPath { from, to } => {
                write!(f, "no directed path from '{from}' to '{to}'")
            }
            Self::UnknownVertex(id) => write!(f, "unknown vertex '{id}'"),
        }
    }
}

impl std::error::Error for RoadGraphError {}

#[derive(Deserialize)]
struct NetworkFile {
    segments: Vec<SegmentFile>,
    #[serde(default)]
    entries: Vec<String>,
    #[serde(default)]
    exits: Vec<String>,
}

#[derive(Deserialize)]
struct SegmentFile {
    id: String,
    from: String,
    to: String,
    length_m: f64,
    speed_limit_mps: f64,
    #[serde(default)]
    bidirectional: bool,
}

/// Parses a UTF-8 JSON network file and validates the network rules.
pub fn parse_network(bytes: &[u8]) -> Result<RoadNetwork, RoadGraphError> {
    let file: NetworkFile = serde_json::from_slice(bytes)
        .map_err(|e| RoadGraphError::MalformedFile(e.to_string()))?;
    let net = RoadNetwork {
        segments: file
            .segments
            .into_iter()
            .map(|s| RoadSegment {
                id: s.id,
                from: s.from,
                to: s.to,
                length_m: s.length_m,
                speed_limit_mps: s.speed_limit_mps,
                bidirectional: s.bidirectional,
            })
            .collect(),
        entries: file.entries,
        exits: file.exits,
    };
    net.validate()?;
    Ok(net)
}

impl RoadNetwork {
    /// Checks segment and entry/exit rules.
    pub fn validate(&self) -> Result<(), RoadGraphError> {
        let mut seen = HashSet::new();
        let mut endpoints = HashSet::new();
        for seg in &self.segments {
            if !seen.insert(seg.id.as_str()) {
                return Err(RoadGraphError::InvalidSegment(format!(
                    "duplicate segment id '{}'",
                    seg.id
                )));
            }
            if !(seg.length_m > 0.0) {
                return Err(RoadGraphError::InvalidSegment(format!(
                    "segment '{}' has non-positive length {}",
                    seg.id, seg.length_m
                )));
            }
            if !(seg.speed_limit_mps > 0.0) {
                return Err(RoadGraphError::InvalidSegment(format!(
                    "segment '{}' has non-positive speed limit {}",
                    seg.id, seg.speed_limit_mps
                )));
            }
            if seg.from == seg.to {
                return Err(RoadGraphError::InvalidSegment(format!(
                    "segment '{}' is a self-loop at '{}'",
                    seg.id, seg.from
                )));
            }
            endpoints.insert(seg.from.as_str());
            endpoints.insert(seg.to.as_str());
        }
        for (role, ids) in [("entry", &self.entries), ("exit", &self.exits)] {
            for id in ids {
                if !endpoints.contains(id.as_str()) {
                    return Err(RoadGraphError::InvalidSegment(format!(
                        "{role} '{id}' is not an endpoint of any segment"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Builds the directed graph from a valid network using the default
/// endpoint-as-vertex ingestion.
pub fn build_graph(net: &RoadNetwork) -> Result<RoadGraph, RoadGraphError> {
    build_graph_with(net, IngestMode::Endpoint)
}

/// Builds the directed graph using the requested ingestion mode.
pub fn build_graph_with(net: &RoadNetwork, mode: IngestMode) -> Result<RoadGraph, RoadGraphError> {
    match mode {
        IngestMode::Endpoint => build_endpoint_graph(net),
        IngestMode::Block => build_block_graph(net),
    }
}

fn build_endpoint_graph(net: &RoadNetwork) -> Result<RoadGraph, RoadGraphError> {
    let mut vertices = Vec::new();
    let mut index = HashMap::new();
    let intern = |id: &str, vertices: &mut Vec<String>, index: &mut HashMap<String, usize>| {
        *index.entry(id.to_string()).or_insert_with(|| {
            vertices.push(id.to_string());
            vertices.len() - 1
        })
    };

    let mut arcs = Vec::new();
    for seg in &net.segments {
        let from = intern(&seg.from, &mut vertices, &mut index);
        let to = intern(&seg.to, &mut vertices, &mut index);
        let travel_time = seg.travel_time();
        arcs.push(Arc { from, to, travel_time });
        if seg.bidirectional {
            arcs.push(Arc { from: to, to: from, travel_time });
        }
    }

    let entries = resolve_ids(&net.entries, &index)?;
    let exits = resolve_ids(&net.exits, &index)?;
    finish_graph(vertices, arcs, entries, exits, index)
}

fn build_block_graph(net: &RoadNetwork) -> Result<RoadGraph, RoadGraphError> {
    let vertices: Vec<String> = net.segments.iter().map(|s| s.id.clone()).collect();
    let index: HashMap<String, usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), i))
        .collect();

    // A block can be exited at `to` (and also `from` if bidirectional), and
    // entered at `from` (and also `to` if bidirectional). Successive blocks
    // are linked where an exit point of one is an entry point of the other.
    // The arc weight is the mean of the two block traversal times, i.e. the
    // center-to-center travel time.
    fn exit_points(s: &RoadSegment) -> Vec<&str> {
        if s.bidirectional {
            vec![s.to.as_str(), s.from.as_str()]
        } else {
            vec![s.to.as_str()]
        }
    }
    fn entry_points(s: &RoadSegment) -> Vec<&str> {
        if s.bidirectional {
            vec![s.from.as_str(), s.to.as_str()]
        } else {
            vec![s.from.as_str()]
        }
    }

    let mut arcs = Vec::new();
    for (i, a) in net.segments.iter().enumerate() {
        for (j, b) in net.segments.iter().enumerate() {
            if i == j {
                continue;
            }
            let linked = exit_points(a)
                .iter()
                .any(|p| entry_points(b).contains(p));
            if linked {
                arcs.push(Arc {
                    from: i,
                    to: j,
                    travel_time: 0.5 * (a.travel_time() + b.travel_time()),
                });
            }
        }
    }

    let entry_set: HashSet<&str> = net.entries.iter().map(String::as_str).collect();
    let exit_set: HashSet<&str> = net.exits.iter().map(String::as_str).collect();
    let mut entries = Vec::new();
    let mut exits = Vec::new();
    for (i, seg) in net.segments.iter().enumerate() {
        if entry_set.contains(seg.from.as_str()) || entry_set.contains(seg.to.as_str()) {
            entries.push(i);
        }
        if exit_set.contains(seg.from.as_str()) || exit_set.contains(seg.to.as_str()) {
            exits.push(i);
        }
    }
    finish_graph(vertices, arcs, entries, exits, index)
}

fn resolve_ids(
    ids: &[String],
    index: &HashMap<String, usize>,
) -> Result<Vec<usize>, RoadGraphError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for id in ids {
        let &i = index
            .get(id)
            .ok_or_else(|| RoadGraphError::UnknownVertex(id.clone()))?;
        if seen.insert(i) {
            out.push(i);
        }
    }
    Ok(out)
}

fn finish_graph(
    vertices: Vec<String>,
    arcs: Vec<Arc>,
    entries: Vec<usize>,
    exits: Vec<usize>,
    index: HashMap<String, usize>,
) -> Result<RoadGraph, RoadGraphError> {
    let mut out_arcs = vec![Vec::new(); vertices.len()];
    let mut in_degree = vec![0usize; vertices.len()];
    for (k, arc) in arcs.iter().enumerate() {
        out_arcs[arc.from].push(k);
        in_degree[arc.to] += 1;
    }
    for &v in &entries {
        if out_arcs[v].is_empty() {
            return Err(RoadGraphError::DegreeViolation {
                vertex: vertices[v].clone(),
                missing: DegreeKind::Outgoing,
            });
        }
    }
    for &v in &exits {
        if in_degree[v] == 0 {
            return Err(RoadGraphError::DegreeViolation {
                vertex: vertices[v].clone(),
                missing: DegreeKind::Incoming,
            });
        }
    }
    Ok(RoadGraph {
        vertices,
        arcs,
        entries,
        exits,
        index,
        out_arcs,
    })
}

impl RoadGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn exits(&self) -> &[usize] {
        &self.exits
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Arc indices leaving `v`.
    pub fn out_arcs(&self, v: usize) -> &[usize] {
        &self.out_arcs[v]
    }

    /// Builds a graph directly from vertex labels and arcs. Used for
    /// synthetic instances; the degree rules still apply.
    pub fn from_parts(
        vertices: Vec<String>,
        arcs: Vec<Arc>,
        entries: Vec<usize>,
        exits: Vec<usize>,
    ) -> Result<Self, RoadGraphError> {
        let index = vertices
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        finish_graph(vertices, arcs, entries, exits, index)
    }
}

/// Minimum-travel-time directed path from `start` to `end`. Ties are broken
/// by the lexicographically smallest vertex-id sequence.
pub fn path_between(g: &RoadGraph, start: &str, end: &str) -> Result<RoadPath, RoadGraphError> {
    let s = g
        .vertex_index(start)
        .ok_or_else(|| RoadGraphError::UnknownVertex(start.to_string()))?;
    let e = g
        .vertex_index(end)
        .ok_or_else(|| RoadGraphError::UnknownVertex(end.to_string()))?;

    // Label-setting search where each label carries the full vertex sequence
    // so equal-time paths settle in lexicographic id order. Arc times are
    // strictly positive, so equal-time labels are never prefix-related and
    // the lexicographic order is stable under extension.
    #[derive(Clone)]
    struct Label {
        time: f64,
        seq: Vec<usize>,
        arcs: Vec<usize>,
    }

    let seq_less = |g: &RoadGraph, a: &[usize], b: &[usize]| -> bool {
        let a_ids = a.iter().map(|&v| g.vertices[v].as_str());
        let b_ids = b.iter().map(|&v| g.vertices[v].as_str());
        a_ids.cmp(b_ids) == std::cmp::Ordering::Less
    };

    let n = g.vertex_count();
    let mut best: Vec<Option<Label>> = vec![None; n];
    best[s] = Some(Label {
        time: 0.0,
        seq: vec![s],
        arcs: Vec::new(),
    });
    let mut settled = vec![false; n];

    loop {
        // Pick the unsettled label with the smallest (time, sequence).
        let mut next: Option<usize> = None;
        for v in 0..n {
            if settled[v] {
                continue;
            }
            if let Some(lab) = &best[v] {
                let better = match next {
                    None => true,
                    Some(u) => {
                        let cur = best[u].as_ref().unwrap();
                        lab.time < cur.time
                            || (lab.time == cur.time && seq_less(g, &lab.seq, &cur.seq))
                    }
                };
                if better {
                    next = Some(v);
                }
            }
        }
        let Some(u) = next else { break };
        settled[u] = true;
        if u == e {
            break;
        }
        let u_label = best[u].clone().unwrap();
        for &k in g.out_arcs(u) {
            let arc = &g.arcs[k];
            if settled[arc.to] {
                continue;
            }
            let time = u_label.time + arc.travel_time;
            let improves = match &best[arc.to] {
                None => true,
                Some(cur) => {
                    time < cur.time || {
                        time == cur.time && {
                            let mut cand = u_label.seq.clone();
                            cand.push(arc.to);
                            seq_less(g, &cand, &cur.seq)
                        }
                    }
                }
            };
            if improves {
                let mut seq = u_label.seq.clone();
                seq.push(arc.to);
                let mut arcs = u_label.arcs.clone();
                arcs.push(k);
                best[arc.to] = Some(Label { time, seq, arcs });
            }
        }
    }

    match best[e].take() {
        Some(lab) if settled[e] => Ok(RoadPath {
            vertices: lab.seq,
            arcs: lab.arcs,
            total_time: lab.time,
        }),
        _ => Err(RoadGraphError::NoPath {
            from: start.to_string(),
            to: end.to_string(),
        }),
    }
}

/// Graph JSON export: vertices in order, arcs with travel times, and the
/// entry/exit id lists.
pub fn graph_to_json(g: &RoadGraph) -> String {
    #[derive(serde::Serialize)]
    struct ArcJson<'a> {
        from: &'a str,
        to: &'a str,
        travel_time_s: f64,
    }
    #[derive(serde::Serialize)]
    struct GraphJson<'a> {
        vertices: &'a [String],
        arcs: Vec<ArcJson<'a>>,
        entries: Vec<&'a str>,
        exits: Vec<&'a str>,
    }
    let doc = GraphJson {
        vertices: &g.vertices,
        arcs: g
            .arcs
            .iter()
            .map(|a| ArcJson {
                from: &g.vertices[a.from],
                to: &g.vertices[a.to],
                travel_time_s: a.travel_time,
            })
            .collect(),
        entries: g.entries.iter().map(|&v| g.vertices[v].as_str()).collect(),
        exits: g.exits.iter().map(|&v| g.vertices[v].as_str()).collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("serializable");
    out.push('\n');
    out
}
