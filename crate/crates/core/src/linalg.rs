//! Dense symmetric eigendecomposition and small SVD.
//!
//! Both solvers are Jacobi-rotation based: deterministic, dependency-free,
//! and accurate enough at desk scale (n up to a few thousand for the
//! eigensolver, small square matrices for the SVD).

/// Row-major square matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    let v = self.get(i, j);
                    s += v * v;
                }
            }
        }
        s.sqrt()
    }
}

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
/// `vectors[k]` is the unit eigenvector for `values[k]`.
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps row-major over the strict upper triangle until the off-diagonal
/// Frobenius norm drops below `1e-12` times the matrix norm, capped at 100
/// sweeps. Eigenvalue ties keep their pre-sort order; each eigenvector's
/// first entry larger than `1e-12` in magnitude is made positive.
pub fn symmetric_eigen(matrix: &SquareMatrix) -> SymmetricEigen {
    let n = matrix.n;
    let mut a = matrix.clone();
    let mut v = SquareMatrix::identity(n);
    let norm = a.frobenius_norm();
    let threshold = 1e-12 * norm;

    if n > 1 && norm > 0.0 {
        for _sweep in 0..100 {
            if a.off_diagonal_norm() <= threshold {
                break;
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let theta = 0.5 * (aqq - app) / apq;
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        1.0 / (theta - (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;

                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap().then(i.cmp(&j)));

    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &k in &order {
        values.push(diag[k]);
        let mut col: Vec<f64> = (0..n).map(|i| v.get(i, k)).collect();
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                for x in col.iter_mut() {
                    *x = -*x;
                }
            }
        }
        vectors.push(col);
    }
    SymmetricEigen { values, vectors }
}

/// Thin SVD `A = U diag(sigma) V^T` of a small square matrix, via one-sided
/// Jacobi orthogonalization of the columns. Zero singular directions get an
/// arbitrary orthonormal completion so that U and V stay orthogonal.
pub struct Svd {
    pub u: SquareMatrix,
    pub singular: Vec<f64>,
    pub v: SquareMatrix,
}

pub fn svd_small(a: &SquareMatrix) -> Svd {
    let n = a.n;
    let mut w = a.clone();
    let mut v = SquareMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let eps = 1e-15 * scale * scale;

    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..n {
                    let wp = w.get(i, p);
                    let wq = w.get(i, q);
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if gamma.abs() <= eps {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let wp = w.get(i, p);
                    let wq = w.get(i, q);
                    w.set(i, p, c * wp - s * wq);
                    w.set(i, q, s * wp + c * wq);
                }
                for i in 0..n {
                    let vp = v.get(i, p);
                    let vq = v.get(i, q);
                    v.set(i, p, c * vp - s * vq);
                    v.set(i, q, s * vp + c * vq);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut singular = vec![0.0; n];
    let mut u = SquareMatrix::zeros(n);
    let tiny = 1e-13 * scale;
    let mut filled = Vec::new();
    for k in 0..n {
        let norm: f64 = (0..n).map(|i| w.get(i, k) * w.get(i, k)).sum::<f64>().sqrt();
        singular[k] = norm;
        if norm > tiny {
            for i in 0..n {
                u.set(i, k, w.get(i, k) / norm);
            }
            filled.push(k);
        }
    }
    // Complete U for zero singular values with Gram-Schmidt over the
    // standard basis.
    for k in 0..n {
        if filled.contains(&k) {
            continue;
        }
        'basis: for b in 0..n {
            let mut cand: Vec<f64> = (0..n).map(|i| if i == b { 1.0 } else { 0.0 }).collect();
            for &f in &filled {
                let dot: f64 = (0..n).map(|i| cand[i] * u.get(i, f)).sum();
                for (i, c) in cand.iter_mut().enumerate() {
                    *c -= dot * u.get(i, f);
                }
            }
            let norm: f64 = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.5 {
                for (i, c) in cand.iter().enumerate() {
                    u.set(i, k, c / norm);
                }
                filled.push(k);
                break 'basis;
            }
        }
    }
    Svd { u, singular, v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn residual(m: &SquareMatrix, lambda: f64, v: &[f64]) -> f64 {
        let n = m.n;
        let mut r = 0.0;
        for i in 0..n {
            let mut mv = 0.0;
            for j in 0..n {
                mv += m.get(i, j) * v[j];
            }
            let diff = mv - lambda * v[i];
            r += diff * diff;
        }
        r.sqrt()
    }

    #[test]
    fn eigen_diag() {
        let mut m = SquareMatrix::zeros(3);
        m.set(0, 0, 2.0);
        m.set(1, 1, -1.0);
        m.set(2, 2, 5.0);
        let e = symmetric_eigen(&m);
        assert_eq!(e.values, vec![5.0, 2.0, -1.0]);
    }

    #[test]
    fn eigen_known_2x2() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1.
        let mut m = SquareMatrix::zeros(2);
        m.set(0, 0, 2.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 2.0);
        let e = symmetric_eigen(&m);
        assert!((e.values[0] - 3.0).abs() < 1e-12);
        assert!((e.values[1] - 1.0).abs() < 1e-12);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vectors[0][0] - inv_sqrt2).abs() < 1e-12);
        assert!((e.vectors[0][1] - inv_sqrt2).abs() < 1e-12);
    }

    #[test]
    fn eigen_residuals_small_on_random_symmetric() {
        let mut rng = SeededRng::new(17);
        for _ in 0..20 {
            let n = 2 + rng.index(7);
            let mut m = SquareMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    let v = rng.uniform(-3.0, 3.0);
                    m.set(i, j, v);
                    m.set(j, i, v);
                }
            }
            let norm = m.frobenius_norm();
            let e = symmetric_eigen(&m);
            for (lambda, vec) in e.values.iter().zip(e.vectors.iter()) {
                assert!(residual(&m, *lambda, vec) <= 1e-8 * norm.max(1.0));
            }
        }
    }

    #[test]
    fn svd_reconstructs_random_matrices() {
        let mut rng = SeededRng::new(23);
        for _ in 0..20 {
            let n = 1 + rng.index(4);
            let mut a = SquareMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    a.set(i, j, rng.uniform(-2.0, 2.0));
                }
            }
            let svd = svd_small(&a);
            // A V = U diag(sigma)
            for i in 0..n {
                for k in 0..n {
                    let mut av = 0.0;
                    for j in 0..n {
                        av += a.get(i, j) * svd.v.get(j, k);
                    }
                    let us = svd.u.get(i, k) * svd.singular[k];
                    assert!((av - us).abs() <= 1e-9, "mismatch {av} vs {us}");
                }
            }
            // U, V orthogonal
            for m in [&svd.u, &svd.v] {
                for c1 in 0..n {
                    for c2 in 0..n {
                        let dot: f64 = (0..n).map(|i| m.get(i, c1) * m.get(i, c2)).sum();
                        let expect = if c1 == c2 { 1.0 } else { 0.0 };
                        assert!((dot - expect).abs() <= 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn svd_handles_rank_deficiency() {
        let mut a = SquareMatrix::zeros(2);
        a.set(0, 0, 1.0);
        a.set(0, 1, 1.0); // rank 1
        let svd = svd_small(&a);
        let smallest = svd.singular.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(smallest.abs() <= 1e-12);
        for c1 in 0..2 {
            for c2 in 0..2 {
                let dot: f64 = (0..2).map(|i| svd.u.get(i, c1) * svd.u.get(i, c2)).sum();
                let expect = if c1 == c2 { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() <= 1e-9);
            }
        }
    }
}
