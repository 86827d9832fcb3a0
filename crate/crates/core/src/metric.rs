//! Time-distance matrices and stress weights.
//!
//! All-pairs shortest travel times are computed per source with a
//! priority-queue label-setting search; unreachable pairs are marked with
//! `+inf`. The directed matrix is then symmetrized into the metric
//! consumed by the embedding layers, and pair weights `w_ij = d_ij^-alpha`
//! are derived from it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use crate::road_graph::RoadGraph;

/// Directed all-pairs travel times in seconds. Entry `(i, j)` is the
/// minimum time from `i` to `j`; `f64::INFINITY` marks unreachable pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelTimeMatrix {
    n: usize,
    data: Vec<f64>,
}

/// Symmetric shortest-travel-time metric: zero diagonal, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

/// Stress weight exponent; `w_ij = d_ij^-alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Alpha {
    Zero,
    One,
    #[default]
    Two,
}

/// Pair weights for the stress objective.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    data: Vec<f64>,
    alpha: Alpha,
}

/// Policy for merging the two directions of a travel-time pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymmetrizePolicy {
    #[default]
    Mean,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricError {
    /// Neither direction between the pair is reachable.
    DisconnectedPair(usize, usize),
    /// Off-diagonal zero distance makes the weight undefined for alpha > 0.
    ZeroDistance(usize, usize),
    /// Input matrix violates a precondition (shape, diagonal, sign).
    InvalidMatrix(String),
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DisconnectedPair(i, j) => {
                write!(f, "vertices {i} and {j} are mutually unreachable")
            }
            Self::ZeroDistance(i, j) => {
                write!(f, "zero distance between distinct vertices {i} and {j}")
            }
            Self::InvalidMatrix(msg) => write!(f, "invalid matrix: {msg}"),
        }
    }
}

impl std::error::Error for MetricError {}

impl Alpha {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "0" => Some(Self::Zero),
            "1" => Some(Self::One),
            "2" => Some(Self::Two),
            _ => None,
        }
    }

    pub fn exponent(self) -> u32 {
        match self {
            Self::Zero => 0,
            Self::One => 1,
            Self::Two => 2,
        }
    }
}

impl TravelTimeMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        let m = Self { n, data };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<(), MetricError> {
        for i in 0..self.n {
            if self.get(i, i) != 0.0 {
                return Err(MetricError::InvalidMatrix(format!(
                    "diagonal entry ({i}, {i}) is {}",
                    self.get(i, i)
                )));
            }
            for j in 0..self.n {
                let v = self.get(i, j);
                if v < 0.0 || v.is_nan() {
                    return Err(MetricError::InvalidMatrix(format!(
                        "entry ({i}, {j}) is {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// CSV export: header row of vertex ids, then row-major entries with
    /// `inf` for unreachable pairs.
    pub fn to_csv(&self, ids: &[String]) -> String {
        let mut out = String::new();
        out.push_str(&ids.join(","));
        out.push('\n');
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let v = self.get(i, j);
                    if v.is_infinite() {
                        "inf".to_string()
                    } else {
                        format!("{v}")
                    }
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses the CSV format written by [`to_csv`](Self::to_csv). Returns
    /// the vertex ids and the matrix.
    pub fn from_csv(text: &str) -> Result<(Vec<String>, Self), MetricError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| MetricError::InvalidMatrix("empty file".to_string()))?;
        let ids: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let n = ids.len();
        let mut rows = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let row: Result<Vec<f64>, MetricError> = line
                .split(',')
                .map(|tok| {
                    let tok = tok.trim();
                    if tok.eq_ignore_ascii_case("inf") {
                        Ok(f64::INFINITY)
                    } else {
                        tok.parse::<f64>().map_err(|_| {
                            MetricError::InvalidMatrix(format!(
                                "row {i}: cannot parse '{tok}'"
                            ))
                        })
                    }
                })
                .collect();
            rows.push(row?);
        }
        if rows.len() != n {
            return Err(MetricError::InvalidMatrix(format!(
                "{} data rows for {n} header ids",
                rows.len()
            )));
        }
        Ok((ids, Self::from_rows(rows)?))
    }
}

/// Minimum travel time from every vertex to every other, along directed
/// arcs. Diagonal is zero; unreachable pairs are `+inf`.
pub fn all_pairs_times(g: &RoadGraph) -> TravelTimeMatrix {
    let n = g.vertex_count();
    let mut data = vec![f64::INFINITY; n * n];
    for s in 0..n {
        let dist = dijkstra(g, s);
        data[s * n..(s + 1) * n].copy_from_slice(&dist);
    }
    TravelTimeMatrix { n, data }
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: f64,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap; cost ties broken by vertex order.
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(g: &RoadGraph, source: usize) -> Vec<f64> {
    let n = g.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry {
        cost: 0.0,
        vertex: source,
    });
    while let Some(HeapEntry { cost, vertex }) = heap.pop() {
        if cost > dist[vertex] {
            continue;
        }
        for &k in g.out_arcs(vertex) {
            let arc = &g.arcs()[k];
            let next = cost + arc.travel_time;
            if next < dist[arc.to] {
                dist[arc.to] = next;
                heap.push(HeapEntry {
                    cost: next,
                    vertex: arc.to,
                });
            }
        }
    }
    dist
}

/// Merges the two directions of each pair into a symmetric metric.
pub fn symmetrize(
    m: &TravelTimeMatrix,
    policy: SymmetrizePolicy,
) -> Result<TimeDistanceMatrix, MetricError> {
    let n = m.n;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let a = m.get(i, j);
            let b = m.get(j, i);
            let d = match (a.is_finite(), b.is_finite()) {
                (true, true) => match policy {
                    SymmetrizePolicy::Mean => 0.5 * (a + b),
                    SymmetrizePolicy::Min => a.min(b),
                    SymmetrizePolicy::Max => a.max(b),
                },
                (true, false) => a,
                (false, true) => b,
                (false, false) => return Err(MetricError::DisconnectedPair(i, j)),
            };
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    Ok(TimeDistanceMatrix { n, data })
}

impl TimeDistanceMatrix {
    /// Builds a metric from explicit rows; must be symmetric with zero
    /// diagonal and finite nonnegative entries.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(MetricError::InvalidMatrix(format!(
                    "nonzero diagonal at {i}"
                )));
            }
            for j in 0..n {
                let v = data[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(MetricError::InvalidMatrix(format!(
                        "entry ({i}, {j}) is {v}"
                    )));
                }
                if (v - data[j * n + i]).abs() > 1e-12 * v.abs().max(1.0) {
                    return Err(MetricError::InvalidMatrix(format!(
                        "asymmetry at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn max_distance(&self) -> f64 {
        self.data.iter().cloned().fold(0.0, f64::max)
    }
}

/// Derives the weight matrix `w_ij = d_ij^-alpha`; the diagonal is zero.
pub fn weights(d: &TimeDistanceMatrix, alpha: Alpha) -> Result<WeightMatrix, MetricError> {
    let n = d.n;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dij = d.get(i, j);
            let w = match alpha {
                Alpha::Zero => 1.0,
                Alpha::One => {
                    if dij == 0.0 {
                        return Err(MetricError::ZeroDistance(i.min(j), i.max(j)));
                    }
                    1.0 / dij
                }
                Alpha::Two => {
                    if dij == 0.0 {
                        return Err(MetricError::ZeroDistance(i.min(j), i.max(j)));
                    }
                    1.0 / (dij * dij)
                }
            };
            data[i * n + j] = w;
        }
    }
    Ok(WeightMatrix { n, data, alpha })
}

impl WeightMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    /// Copy with every entry multiplied by `factor`. Scaling the weights
    /// scales the stress objective without moving its minimizers; the
    /// curved-space optimizer uses this for conditioning.
    pub(crate) fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|w| w * factor).collect(),
            alpha: self.alpha,
        }
    }

    /// Largest off-diagonal weight.
    pub fn max_weight(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    m = m.max(self.get(i, j));
                }
            }
        }
        m
    }

    /// Uniform off-diagonal weights; handy for tests and synthetic runs.
    pub fn uniform(n: usize) -> Self {
        let mut data = vec![1.0; n * n];
        for i in 0..n {
            data[i * n + i] = 0.0;
        }
        Self {
            n,
            data,
            alpha: Alpha::Zero,
        }
    }
}

/// Number of unordered vertex pairs: n(n-1)/2.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}
