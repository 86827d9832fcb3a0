//! Classical (Torgerson) multidimensional scaling.
//!
//! Squared distances are double-centered into a Gram-like matrix B whose
//! top eigenpairs give the coordinates. Shortest-path metrics are usually
//! not exactly Euclidean, so negative eigenvalues are clamped to zero and
//! their total mass is reported as a non-Euclideanity diagnostic.

use crate::embedding::Layout;
use crate::linalg::{symmetric_eigen, SquareMatrix};
use crate::metric::TimeDistanceMatrix;

/// Double-centers the squared distances:
/// `B_ij = -0.5 (d_ij^2 - r_i - c_j + g)` with row/column/grand means of
/// the squared matrix. B is symmetric with zero row sums.
pub fn double_center(d: &TimeDistanceMatrix) -> SquareMatrix {
    let n = d.n();
    let mut sq = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let v = d.get(i, j);
            sq.set(i, j, v * v);
        }
    }
    let mut row_mean = vec![0.0; n];
    let mut col_mean = vec![0.0; n];
    let mut grand = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = sq.get(i, j);
            row_mean[i] += v;
            col_mean[j] += v;
            grand += v;
        }
    }
    for v in row_mean.iter_mut() {
        *v /= n as f64;
    }
    for v in col_mean.iter_mut() {
        *v /= n as f64;
    }
    grand /= (n * n) as f64;

    let mut b = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            b.set(i, j, -0.5 * (sq.get(i, j) - row_mean[i] - col_mean[j] + grand));
        }
    }
    b
}

/// Full classical-MDS result: the layout plus spectral diagnostics.
pub struct ClassicalMds {
    pub layout: Layout,
    /// All eigenvalues of B, descending.
    pub eigenvalues: Vec<f64>,
    /// Sum of |negative eigenvalues|; zero iff the metric is exactly
    /// Euclidean (up to round-off).
    pub negative_mass: f64,
}

/// Spectral layout in `dims` dimensions. Column k is sqrt(lambda_k) times
/// the k-th eigenvector; negative (clamped) or missing eigenvalues yield
/// zero columns.
pub fn classical_mds(d: &TimeDistanceMatrix, dims: usize) -> Layout {
    classical_mds_full(d, dims).layout
}

pub fn classical_mds_full(d: &TimeDistanceMatrix, dims: usize) -> ClassicalMds {
    assert!(dims >= 1, "need at least one output dimension");
    let n = d.n();
    let b = double_center(d);
    let eigen = symmetric_eigen(&b);
    let negative_mass: f64 = eigen.values.iter().filter(|&&v| v < 0.0).map(|v| -v).sum();

    let mut layout = Layout::zeros(n, dims);
    for k in 0..dims.min(n) {
        let lambda = eigen.values[k];
        if lambda <= 0.0 {
            continue;
        }
        let scale = lambda.sqrt();
        for i in 0..n {
            layout.point_mut(i)[k] = scale * eigen.vectors[k][i];
        }
    }
    ClassicalMds {
        layout,
        eigenvalues: eigen.values,
        negative_mass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{procrustes_align, stress, Layout};
    use crate::linalg::SquareMatrix;
    use crate::metric::WeightMatrix;
    use crate::rng::SeededRng;

    fn dist(rows: Vec<Vec<f64>>) -> TimeDistanceMatrix {
        TimeDistanceMatrix::from_rows(rows).unwrap()
    }

    fn path3() -> TimeDistanceMatrix {
        dist(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ])
    }

    #[test]
    fn double_center_hand_example() {
        let b = double_center(&path3());
        let expect = [[1.0, 0.0, -1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((b.get(i, j) - expect[i][j]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn double_center_single_point() {
        let b = double_center(&dist(vec![vec![0.0]]));
        assert_eq!(b.get(0, 0), 0.0);
    }

    #[test]
    fn double_center_row_sums_vanish() {
        let mut rng = SeededRng::new(12);
        for _ in 0..10 {
            let n = 2 + rng.index(8);
            let mut rows = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = rng.uniform(0.1, 9.0);
                    rows[i][j] = v;
                    rows[j][i] = v;
                }
            }
            let b = double_center(&dist(rows));
            for i in 0..n {
                let sum: f64 = (0..n).map(|j| b.get(i, j)).sum();
                assert!(sum.abs() <= 1e-10, "row {i} sums to {sum}");
            }
        }
    }

    #[test]
    fn classical_line_metric_1d() {
        let layout = classical_mds(&path3(), 1);
        let coords: Vec<f64> = (0..3).map(|i| layout.point(i)[0]).collect();
        let expect = [1.0, 0.0, -1.0];
        for (c, e) in coords.iter().zip(expect.iter()) {
            assert!((c - e).abs() <= 1e-10, "{coords:?}");
        }
    }

    #[test]
    fn classical_single_point() {
        let layout = classical_mds(&dist(vec![vec![0.0]]), 2);
        assert_eq!(layout.point(0), &[0.0, 0.0]);
    }

    fn euclidean_matrix(points: &[Vec<f64>]) -> TimeDistanceMatrix {
        let n = points.len();
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d: f64 = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                rows[i][j] = d;
                rows[j][i] = d;
            }
        }
        dist(rows)
    }

    #[test]
    fn recovers_planted_plane_points() {
        let mut rng = SeededRng::new(77);
        let points: Vec<Vec<f64>> = (0..5)
            .map(|_| vec![rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)])
            .collect();
        let d = euclidean_matrix(&points);
        let layout = classical_mds(&d, 2);
        let original = Layout::from_rows(points).unwrap();
        let (_aligned, residual) = procrustes_align(&original, &layout).unwrap();
        assert!(residual <= 1e-6, "residual {residual}");
    }

    #[test]
    fn exact_recovery_across_dimensions() {
        let mut rng = SeededRng::new(79);
        for dims in 1..=3usize {
            for _ in 0..5 {
                let n = 2 + rng.index(9);
                let points: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..dims).map(|_| rng.uniform(-5.0, 5.0)).collect())
                    .collect();
                let d = euclidean_matrix(&points);
                let layout = classical_mds(&d, dims);
                let original = Layout::from_rows(points).unwrap();
                let (_a, residual) = procrustes_align(&original, &layout).unwrap();
                assert!(residual <= 1e-6, "dims {dims} residual {residual}");
            }
        }
    }

    #[test]
    fn perfect_fit_in_full_dimension() {
        let mut rng = SeededRng::new(81);
        let n = 6;
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n - 1).map(|_| rng.uniform(-2.0, 2.0)).collect())
            .collect();
        let d = euclidean_matrix(&points);
        let layout = classical_mds(&d, n - 1);
        let w = WeightMatrix::uniform(n);
        let s = stress(&layout, &d, &w).unwrap();
        let sum_sq: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| d.get(i, j) * d.get(i, j))
            .sum();
        assert!(s.raw <= 1e-8 * sum_sq, "raw {} vs bound {}", s.raw, sum_sq);
    }

    #[test]
    fn eigen_residuals_of_b() {
        let d = path3();
        let b = double_center(&d);
        let eigen = crate::linalg::symmetric_eigen(&b);
        let norm = b.frobenius_norm();
        for (lambda, vec) in eigen.values.iter().zip(eigen.vectors.iter()) {
            let mut res = 0.0;
            for i in 0..3 {
                let mut bv = 0.0;
                for j in 0..3 {
                    bv += b.get(i, j) * vec[j];
                }
                let diff = bv - lambda * vec[i];
                res += diff * diff;
            }
            assert!(res.sqrt() <= 1e-8 * norm);
        }
    }

    #[test]
    fn negative_mass_reported_for_non_euclidean_metric() {
        // Unit K4 distances are not exactly Euclidean in any dimension
        // lower than 3; B has a zero eigenvalue and no negative ones, so
        // use a star metric that is genuinely non-Euclidean instead.
        let d = dist(vec![
            vec![0.0, 1.0, 1.0, 1.0],
            vec![1.0, 0.0, 2.0, 2.0],
            vec![1.0, 2.0, 0.0, 2.0],
            vec![1.0, 2.0, 2.0, 0.0],
        ]);
        let full = classical_mds_full(&d, 2);
        assert!(full.negative_mass > 0.0);
        let b = double_center(&d);
        let _ = b; // layout columns stay finite even with clamping
        for i in 0..4 {
            for v in full.layout.point(i) {
                assert!(v.is_finite());
            }
        }
    }
}
