//! Layouts, the weighted stress objective, and rigid alignment.
//!
//! A layout places each vertex in `R^D`; coordinates inherit seconds from
//! the time-distance matrix. Stress sums over unordered pairs (i < j) so
//! the majorizing bound of the iterative optimizer is tight as written.

use std::collections::BTreeMap;
use std::fmt;

use crate::linalg::{svd_small, SquareMatrix};
use crate::metric::{TimeDistanceMatrix, WeightMatrix};

/// N x D coordinate configuration, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    n: usize,
    dims: usize,
    coords: Vec<f64>,
}

/// Raw stress and its scale-free normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressReport {
    /// Sum over i < j of w_ij (d_ij - |X_i - X_j|)^2.
    pub raw: f64,
    /// raw / sum over i < j of w_ij d_ij^2 (zero when that sum is zero).
    pub normalized: f64,
}

/// Column-per-vertex embedding table; looking up vertex i reads column i.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dims: usize,
    cols: usize,
    /// Row-major dims x cols.
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmbedError {
    DimensionMismatch(String),
    /// Two layout points closer than 1e-12; the stress gradient is
    /// undefined there.
    CoincidentPoints(usize, usize),
    IndexOutOfRange { index: usize, len: usize },
}

impl fmt::Display for EmbedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Self::CoincidentPoints(i, j) => {
                write!(f, "points {i} and {j} coincide")
            }
            Self::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for {len} columns")
            }
        }
    }
}

impl std::error::Error for EmbedError {}

pub(crate) const COINCIDENT_EPS: f64 = 1e-12;

impl Layout {
    pub fn zeros(n: usize, dims: usize) -> Self {
        assert!(dims >= 1, "layout needs at least one dimension");
        Self {
            n,
            dims,
            coords: vec![0.0; n * dims],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, EmbedError> {
        let n = rows.len();
        let dims = rows.first().map(|r| r.len()).unwrap_or(1);
        if dims == 0 {
            return Err(EmbedError::DimensionMismatch(
                "zero-dimensional rows".to_string(),
            ));
        }
        let mut coords = Vec::with_capacity(n * dims);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dims {
                return Err(EmbedError::DimensionMismatch(format!(
                    "row {i} has {} coordinates, expected {dims}",
                    row.len()
                )));
            }
            coords.extend_from_slice(row);
        }
        Ok(Self { n, dims, coords })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dims..(i + 1) * self.dims]
    }

    pub fn point_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dims..(i + 1) * self.dims]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.point(i), self.point(j));
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.point(i).to_vec()).collect()
    }

    /// JSON export keyed by vertex id: {"dims": D, "coords": {id: [..]}}.
    pub fn to_json(&self, ids: &[String]) -> String {
        assert_eq!(ids.len(), self.n, "one id per layout row");
        let coords: BTreeMap<&str, Vec<f64>> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), self.point(i).to_vec()))
            .collect();
        #[derive(serde::Serialize)]
        struct LayoutJson<'a> {
            dims: usize,
            coords: BTreeMap<&'a str, Vec<f64>>,
        }
        let mut out = serde_json::to_string_pretty(&LayoutJson {
            dims: self.dims,
            coords,
        })
        .expect("serializable");
        out.push('\n');
        out
    }

    /// Parses the export format of [`to_json`](Self::to_json); rows come
    /// back in sorted-id order alongside their ids.
    pub fn from_json(text: &str) -> Result<(Vec<String>, Self), EmbedError> {
        #[derive(serde::Deserialize)]
        struct LayoutJson {
            dims: usize,
            coords: BTreeMap<String, Vec<f64>>,
        }
        let parsed: LayoutJson = serde_json::from_str(text)
            .map_err(|e| EmbedError::DimensionMismatch(format!("bad layout JSON: {e}")))?;
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for (id, row) in parsed.coords {
            if row.len() != parsed.dims {
                return Err(EmbedError::DimensionMismatch(format!(
                    "vertex '{id}' has {} coordinates, expected {}",
                    row.len(),
                    parsed.dims
                )));
            }
            ids.push(id);
            rows.push(row);
        }
        Ok((ids, Self::from_rows(rows)?))
    }
}

fn check_shapes(
    x: &Layout,
    d: &TimeDistanceMatrix,
    w: &WeightMatrix,
) -> Result<(), EmbedError> {
    if x.n != d.n() || x.n != w.n() {
        return Err(EmbedError::DimensionMismatch(format!(
            "layout has {} points, distances {}, weights {}",
            x.n,
            d.n(),
            w.n()
        )));
    }
    Ok(())
}

/// Weighted stress of a layout against the target metric.
pub fn stress(
    x: &Layout,
    d: &TimeDistanceMatrix,
    w: &WeightMatrix,
) -> Result<StressReport, EmbedError> {
    check_shapes(x, d, w)?;
    let mut raw = 0.0;
    let mut denom = 0.0;
    for i in 0..x.n {
        for j in (i + 1)..x.n {
            let wij = w.get(i, j);
            let dij = d.get(i, j);
            let diff = dij - x.distance(i, j);
            raw += wij * diff * diff;
            denom += wij * dij * dij;
        }
    }
    let normalized = if denom > 0.0 { raw / denom } else { 0.0 };
    Ok(StressReport { raw, normalized })
}

/// Sum over i < j of w_ij d_ij^2, the normalization constant of
/// [`StressReport`].
pub fn stress_normalizer(d: &TimeDistanceMatrix, w: &WeightMatrix) -> f64 {
    let n = d.n();
    let mut denom = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            denom += w.get(i, j) * d.get(i, j) * d.get(i, j);
        }
    }
    denom
}

/// Gradient of the stress with respect to each layout row.
///
/// Row i is the sum over j of `2 w_ij (|X_i - X_j| - d_ij)` times the unit
/// vector from X_j to X_i. Fails when two points are closer than 1e-12
/// since the direction is then undefined.
pub fn stress_gradient(
    x: &Layout,
    d: &TimeDistanceMatrix,
    w: &WeightMatrix,
) -> Result<Vec<Vec<f64>>, EmbedError> {
    check_shapes(x, d, w)?;
    let n = x.n;
    let dims = x.dims;
    let mut grad = vec![vec![0.0; dims]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = x.distance(i, j);
            if dist < COINCIDENT_EPS {
                return Err(EmbedError::CoincidentPoints(i, j));
            }
            let factor = 2.0 * w.get(i, j) * (dist - d.get(i, j)) / dist;
            for k in 0..dims {
                let delta = x.point(i)[k] - x.point(j)[k];
                grad[i][k] += factor * delta;
                grad[j][k] -= factor * delta;
            }
        }
    }
    Ok(grad)
}

/// Optimal rigid superposition of `b` onto `a`: translation plus an
/// orthogonal map (reflections allowed). Returns the transformed copy of
/// `b` and the root-mean-square residual sqrt(min_T sum |a_i - T(b_i)|^2 / n).
pub fn procrustes_align(a: &Layout, b: &Layout) -> Result<(Layout, f64), EmbedError> {
    if a.n != b.n || a.dims != b.dims {
        return Err(EmbedError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.n, a.dims, b.n, b.dims
        )));
    }
    let n = a.n;
    let dims = a.dims;
    if n == 0 {
        return Ok((b.clone(), 0.0));
    }

    let centroid = |l: &Layout| -> Vec<f64> {
        let mut c = vec![0.0; dims];
        for i in 0..l.n {
            for k in 0..dims {
                c[k] += l.point(i)[k];
            }
        }
        for v in c.iter_mut() {
            *v /= l.n as f64;
        }
        c
    };
    let ca = centroid(a);
    let cb = centroid(b);

    // Cross-covariance H = sum (b_i - cb)(a_i - ca)^T; the orthogonal factor
    // of its SVD maximizes the alignment trace.
    let mut h = SquareMatrix::zeros(dims);
    for i in 0..n {
        for r in 0..dims {
            for c in 0..dims {
                h.data[r * dims + c] +=
                    (b.point(i)[r] - cb[r]) * (a.point(i)[c] - ca[c]);
            }
        }
    }
    let svd = svd_small(&h);
    // R = V U^T
    let mut rot = SquareMatrix::zeros(dims);
    for r in 0..dims {
        for c in 0..dims {
            let mut s = 0.0;
            for k in 0..dims {
                s += svd.v.get(r, k) * svd.u.get(c, k);
            }
            rot.set(r, c, s);
        }
    }

    let mut aligned = Layout::zeros(n, dims);
    let mut sum_sq = 0.0;
    for i in 0..n {
        for r in 0..dims {
            let mut v = 0.0;
            for c in 0..dims {
                v += rot.get(r, c) * (b.point(i)[c] - cb[c]);
            }
            aligned.point_mut(i)[r] = v + ca[r];
        }
        for r in 0..dims {
            let diff = a.point(i)[r] - aligned.point(i)[r];
            sum_sq += diff * diff;
        }
    }
    Ok((aligned, (sum_sq / n as f64).sqrt()))
}

impl EmbeddingTable {
    pub fn new(dims: usize, cols: usize) -> Self {
        Self {
            dims,
            cols,
            data: vec![0.0; dims * cols],
        }
    }

    /// Builds the table from a layout, one column per vertex.
    pub fn from_layout(layout: &Layout) -> Self {
        let mut t = Self::new(layout.dims(), layout.n());
        for i in 0..layout.n() {
            for k in 0..layout.dims() {
                t.data[k * t.cols + i] = layout.point(i)[k];
            }
        }
        t
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.cols + col] = v;
    }
}

/// Embedding lookup: column i of the table, i.e. the product with the
/// one-hot indicator of vertex i.
pub fn encode_lookup(t: &EmbeddingTable, i: usize) -> Result<Vec<f64>, EmbedError> {
    if i >= t.cols {
        return Err(EmbedError::IndexOutOfRange {
            index: i,
            len: t.cols,
        });
    }
    Ok((0..t.dims).map(|r| t.data[r * t.cols + i]).collect())
}
