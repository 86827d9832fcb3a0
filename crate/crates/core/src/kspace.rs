//! Constant-curvature embedding space with learnable curvature.
//!
//! Points live in the kappa-stereographic model: the open ball of radius
//! 1/sqrt(-kappa) for negative curvature, all of R^D otherwise. Distances
//! come from the gyrovector construction,
//!
//! ```text
//! d_k(x, y) = (2/sqrt(|k|)) * atan_k(|(-x) (+)_k y|)
//! ```
//!
//! with `atan_k = arctan(sqrt(k) u)` for spherical and
//! `artanh(sqrt(-k) u)` for hyperbolic curvature. The stress objective
//! uses `d_k / 2`, so kappa = 0 reproduces the Euclidean modules exactly
//! (the raw gyrodistance limit is `2 |x - y|`).
//!
//! The gyro-norm of the Mobius difference has the closed form
//! `|(-x) (+)_k y| = |x - y| / sqrt(Delta)` with
//! `Delta = 1 + 2 k <x,y> + k^2 |x|^2 |y|^2`, which the distance and its
//! analytic gradient share.

use std::fmt;

use crate::embedding::{Layout, StressReport, COINCIDENT_EPS};
use crate::metric::{TimeDistanceMatrix, WeightMatrix};
use crate::rng::SeededRng;
use crate::run::RunRecord;
use crate::sgd::random_layout;

/// Curvature of the embedding space, clamped to [-10, 10].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature(f64);

impl Curvature {
    pub const MIN: f64 = -10.0;
    pub const MAX: f64 = 10.0;

    pub fn new(value: f64) -> Self {
        assert!(value.is_finite(), "curvature must be finite");
        Self(value.clamp(Self::MIN, Self::MAX))
    }

    pub fn flat() -> Self {
        Self(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Coordinate configuration plus the curvature it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct KLayout {
    pub coords: Layout,
    pub kappa: Curvature,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KspaceError {
    /// A point lies outside the open ball required by negative curvature.
    DomainViolation(String),
    /// Mobius-addition denominator within 1e-14 of zero.
    DegenerateDenominator,
}

impl fmt::Display for KspaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DomainViolation(msg) => write!(f, "outside curvature domain: {msg}"),
            Self::DegenerateDenominator => write!(f, "degenerate Mobius denominator"),
        }
    }
}

impl std::error::Error for KspaceError {}

/// Treat |kappa| below this as flat space.
pub const FLAT_EPS: f64 = 1e-12;
const DENOM_EPS: f64 = 1e-14;
/// Radial safety margin applied by [`retract`].
const BOUNDARY_MARGIN: f64 = 1e-5;

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

fn check_domain(x: &[f64], kappa: f64) -> Result<(), KspaceError> {
    if kappa < 0.0 {
        let limit = -1.0 / kappa;
        let sq = norm_sq(x);
        if sq >= limit {
            return Err(KspaceError::DomainViolation(format!(
                "|x|^2 = {sq} exceeds {limit} for kappa {kappa}"
            )));
        }
    }
    Ok(())
}

/// Mobius addition in curvature `kappa`.
pub fn mobius_add(x: &[f64], y: &[f64], kappa: f64) -> Result<Vec<f64>, KspaceError> {
    check_domain(x, kappa)?;
    check_domain(y, kappa)?;
    let xy = dot(x, y);
    let x_sq = norm_sq(x);
    let y_sq = norm_sq(y);
    let denom = 1.0 - 2.0 * kappa * xy + kappa * kappa * x_sq * y_sq;
    if denom.abs() < DENOM_EPS {
        return Err(KspaceError::DegenerateDenominator);
    }
    let cx = 1.0 - 2.0 * kappa * xy - kappa * y_sq;
    let cy = 1.0 + kappa * x_sq;
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (cx * a + cy * b) / denom)
        .collect())
}

/// Gyrodistance between two in-domain points.
pub fn k_distance(x: &[f64], y: &[f64], kappa: f64) -> Result<f64, KspaceError> {
    check_domain(x, kappa)?;
    check_domain(y, kappa)?;
    Ok(k_distance_unchecked(x, y, kappa, &mut 0))
}

/// Distance without domain checks; clamps the hyperbolic artanh argument
/// just below 1 and counts how often that fires.
fn k_distance_unchecked(x: &[f64], y: &[f64], kappa: f64, clamps: &mut u64) -> f64 {
    let diff_sq: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let diff = diff_sq.sqrt();
    if kappa.abs() < FLAT_EPS {
        return 2.0 * diff;
    }
    if diff == 0.0 {
        return 0.0;
    }
    let delta = gyro_delta(x, y, kappa);
    let u = diff / delta.max(1e-30).sqrt();
    let root = kappa.abs().sqrt();
    if kappa > 0.0 {
        (2.0 / root) * (root * u).atan()
    } else {
        let mut arg = root * u;
        if arg >= 1.0 - 1e-12 {
            arg = 1.0 - 1e-12;
            *clamps += 1;
        }
        (2.0 / root) * arg.atanh()
    }
}

/// Delta = 1 + 2 k <x,y> + k^2 |x|^2 |y|^2; the squared gyro-norm of the
/// Mobius difference is |x-y|^2 / Delta.
fn gyro_delta(x: &[f64], y: &[f64], kappa: f64) -> f64 {
    1.0 + 2.0 * kappa * dot(x, y) + kappa * kappa * norm_sq(x) * norm_sq(y)
}

impl KLayout {
    pub fn new(coords: Layout, kappa: Curvature) -> Result<Self, KspaceError> {
        let kl = Self { coords, kappa };
        kl.check_domain()?;
        Ok(kl)
    }

    pub fn check_domain(&self) -> Result<(), KspaceError> {
        for i in 0..self.coords.n() {
            check_domain(self.coords.point(i), self.kappa.value())?;
        }
        Ok(())
    }

    /// Half-gyrodistance between layout points, the quantity the stress
    /// compares against d_ij.
    pub fn embedded_distance(&self, i: usize, j: usize) -> Result<f64, KspaceError> {
        let d = k_distance(
            self.coords.point(i),
            self.coords.point(j),
            self.kappa.value(),
        )?;
        Ok(d / 2.0)
    }

    /// JSON export: {"kappa": k, "dims": D, "coords": {id: [..]}}.
    pub fn to_json(&self, ids: &[String]) -> String {
        assert_eq!(ids.len(), self.coords.n(), "one id per layout row");
        let coords: std::collections::BTreeMap<&str, Vec<f64>> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), self.coords.point(i).to_vec()))
            .collect();
        #[derive(serde::Serialize)]
        struct KLayoutJson<'a> {
            kappa: f64,
            dims: usize,
            coords: std::collections::BTreeMap<&'a str, Vec<f64>>,
        }
        let mut out = serde_json::to_string_pretty(&KLayoutJson {
            kappa: self.kappa.value(),
            dims: self.coords.dims(),
            coords,
        })
        .expect("serializable");
        out.push('\n');
        out
    }
}

/// Stress of a curved layout: sum over i < j of
/// `w_ij (d_ij - d_k(X_i, X_j)/2)^2`, normalized like the Euclidean one.
pub fn k_stress(
    kl: &KLayout,
    d: &TimeDistanceMatrix,
    w: &WeightMatrix,
) -> Result<StressReport, KspaceError> {
    kl.check_domain()?;
    let mut clamps = 0;
    Ok(k_stress_unchecked(
        &kl.coords,
        kl.kappa.value(),
        d,
        w,
        &mut clamps,
    ))
}

fn k_stress_unchecked(
    coords: &Layout,
    kappa: f64,
    d: &TimeDistanceMatrix,
    w: &WeightMatrix,
    clamps: &mut u64,
) -> StressReport {
    let n = coords.n();
    let mut raw = 0.0;
    let mut denom = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = d.get(i, j);
            let wij = w.get(i, j);
            let emb =
                k_distance_unchecked(coords.point(i), coords.point(j), kappa, clamps) / 2.0;
            let diff = dij - emb;
            raw += wij * diff * diff;
            denom += wij * dij * dij;
        }
    }
    let normalized = if denom > 0.0 { raw / denom } else { 0.0 };
    StressReport { raw, normalized }
}

/// Euclidean gradient of the curved stress with respect to the coordinates.
/// Coincident pairs get a deterministic fallback direction from `fallback`.
fn k_stress_coord_gradient(
    coords: &Layout,
    kappa: f64,
    d: &TimeDistanceMatrix,
    w: &WeightMatrix,
    clamps: &mut u64,
    fallback: Option<&mut SeededRng>,
) -> Vec<Vec<f64>> {
    let n = coords.n();
    let dims = coords.dims();
    let mut grad = vec![vec![0.0; dims]; n];
    let mut fallback = fallback;
    for i in 0..n {
        for j in (i + 1)..n {
            let wij = w.get(i, j);
            if wij == 0.0 {
                continue;
            }
            let xi = coords.point(i);
            let xj = coords.point(j);
            let diff: Vec<f64> = xi.iter().zip(xj).map(|(a, b)| a - b).collect();
            let dist = norm_sq(&diff).sqrt();

            if dist < COINCIDENT_EPS {
                // Residual is the full target distance; push the pair apart
                // along a seeded direction with the flat-limit magnitude.
                let dir = match fallback.as_deref_mut() {
                    Some(rng) => rng.unit_vector(dims),
                    None => continue,
                };
                let factor = wij * (0.0 - d.get(i, j)) * 2.0;
                for k in 0..dims {
                    grad[i][k] += factor * dir[k];
                    grad[j][k] -= factor * dir[k];
                }
                continue;
            }

            let emb = k_distance_unchecked(xi, xj, kappa, clamps) / 2.0;
            let residual = 2.0 * wij * (emb - d.get(i, j));

            if kappa.abs() < FLAT_EPS {
                // d_k/2 = |xi - xj|; plain Euclidean gradient.
                for k in 0..dims {
                    grad[i][k] += residual * diff[k] / dist;
                    grad[j][k] -= residual * diff[k] / dist;
                }
                continue;
            }

            // Near the spherical cut locus (Delta -> 0) the distance
            // saturates and its true gradient diverges; flooring Delta
            // bounds the contribution and counts as a clamp.
            let raw_delta = gyro_delta(xi, xj, kappa);
            if raw_delta < 1e-9 {
                *clamps += 1;
            }
            let delta = raw_delta.max(1e-9);
            let sqrt_delta = delta.sqrt();
            let u = dist / sqrt_delta;
            // d(d_k/2)/du = 1 / (1 + k u^2): the /2 in the objective halves
            // the gyrodistance derivative 2/(1 + k u^2).
            let dd_du = 1.0 / (1.0 + kappa * u * u).max(1e-12);
            let xi_sq = norm_sq(xi);
            let xj_sq = norm_sq(xj);
            for k in 0..dims {
                // du/dxi and du/dxj of u = |xi-xj| / sqrt(Delta).
                let ddelta_dxi = 2.0 * kappa * xj[k] + 2.0 * kappa * kappa * xj_sq * xi[k];
                let ddelta_dxj = 2.0 * kappa * xi[k] + 2.0 * kappa * kappa * xi_sq * xj[k];
                let du_dxi =
                    diff[k] / (dist * sqrt_delta) - dist * ddelta_dxi / (2.0 * delta * sqrt_delta);
                let du_dxj = -diff[k] / (dist * sqrt_delta)
                    - dist * ddelta_dxj / (2.0 * delta * sqrt_delta);
                grad[i][k] += residual * dd_du * du_dxi;
                grad[j][k] += residual * dd_du * du_dxj;
            }
        }
    }
    grad
}

/// Euclidean gradient of the curved stress with respect to the layout
/// coordinates, the quantity [`optimize_joint`] scales per point by the
/// inverse squared conformal factor. Exposed so the direction can be
/// verified against finite differences. Coincident pairs contribute
/// nothing here (the optimizer substitutes a seeded direction for them).
pub fn coord_gradient(
    coords: &Layout,
    kappa: f64,
    d: &TimeDistanceMatrix,
    w: &WeightMatrix,
) -> Result<Vec<Vec<f64>>, KspaceError> {
    for i in 0..coords.n() {
        check_domain(coords.point(i), kappa)?;
    }
    let mut clamps = 0;
    Ok(k_stress_coord_gradient(coords, kappa, d, w, &mut clamps, None))
}

/// Projects a layout back into the curvature domain: for kappa < 0, points
/// at or beyond `(1 - 1e-5)/sqrt(-kappa)` are radially rescaled to exactly
/// that radius. Identity otherwise.
pub fn retract(kl: &KLayout) -> KLayout {
    let mut coords = kl.coords.clone();
    retract_in_place(&mut coords, kl.kappa.value());
    KLayout {
        coords,
        kappa: kl.kappa,
    }
}

fn retract_in_place(coords: &mut Layout, kappa: f64) {
    if kappa >= 0.0 {
        return;
    }
    let limit = (1.0 - BOUNDARY_MARGIN) / (-kappa).sqrt();
    for i in 0..coords.n() {
        let norm = norm_sq(coords.point(i)).sqrt();
        if norm >= limit {
            let scale = limit / norm;
            for v in coords.point_mut(i) {
                *v *= scale;
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct JointOptions {
    pub steps: usize,
    pub lr_coords: f64,
    pub lr_kappa: f64,
    /// Fraction of the schedule during which curvature stays frozen at
    /// zero while the layout organizes.
    pub kappa_warmup_fraction: f64,
    /// Per-point coordinate move cap, as a fraction of the metric
    /// diameter. Bounds the steps near distance-gradient singularities.
    pub max_move_fraction: f64,
}

impl Default for JointOptions {
    fn default() -> Self {
        Self {
            steps: 2000,
            lr_coords: 0.05,
            lr_kappa: 0.01,
            kappa_warmup_fraction: 0.25,
            max_move_fraction: 0.05,
        }
    }
}

/// Joint descent on layout and curvature.
///
/// Coordinates move by Riemannian descent: the Euclidean stress gradient is
/// scaled per point by the inverse squared conformal factor
/// `(1 + k|x|^2)^2 / 4` and followed by a retraction. The curvature then
/// takes one descent step with its derivative estimated by central finite
/// differences, is clamped to the allowed range, and the layout is
/// re-retracted. Starts flat (kappa = 0); the curvature stays frozen for
/// the warmup fraction of the schedule, and its step is the soft-bounded
/// `lr * g / (|g| + 1)`, which equals plain descent once the derivative is
/// small.
///
/// The descent runs on an internally conditioned copy of the problem:
/// distances divided by half the metric diameter `c` and weights by their
/// maximum. Scaling distances and coordinates together multiplies every
/// stress term by the same constant, and curvature carries units of
/// 1/length^2, so the conditioned optimum maps back exactly via
/// `X = c * X_cond`, `kappa = kappa_cond / c^2`. Step sizes therefore mean
/// the same thing at every metric scale.
pub fn optimize_joint(
    d: &TimeDistanceMatrix,
    w: &WeightMatrix,
    dims: usize,
    seed: u64,
    opts: JointOptions,
) -> (KLayout, RunRecord) {
    assert!(opts.steps >= 1, "need at least one step");
    let n = d.n();

    let unit = 0.5 * d.max_distance();
    let scale = if unit > 0.0 { unit } else { 1.0 };
    let w_max = w.max_weight();
    let w_scale = if w_max > 0.0 { 1.0 / w_max } else { 1.0 };
    let d_cond = TimeDistanceMatrix::from_rows(
        (0..n)
            .map(|i| (0..n).map(|j| d.get(i, j) / scale).collect())
            .collect(),
    )
    .expect("scaled metric stays valid");
    let w_cond = w.scaled(w_scale);
    let kappa_limit = Curvature::MAX * scale * scale;

    let mut rng = SeededRng::new(seed);
    let mut fallback = SeededRng::derive(seed, 0x4b53_5041);
    let mut coords = random_layout(&mut rng, n, dims, d_cond.max_distance() / 2.0);
    let mut kappa = 0.0_f64;

    let denom: f64 = {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += w.get(i, j) * d.get(i, j) * d.get(i, j);
            }
        }
        s
    };
    let mut record = RunRecord::new(seed, denom);
    let mut clamps = 0u64;
    let max_move = opts.max_move_fraction * d_cond.max_distance().max(1e-12);
    let warmup = (opts.kappa_warmup_fraction * opts.steps as f64) as usize;

    for step in 0..opts.steps {
        let grad =
            k_stress_coord_gradient(&coords, kappa, &d_cond, &w_cond, &mut clamps, Some(&mut fallback));
        for i in 0..n {
            let conformal_sq = {
                let c = 1.0 + kappa * norm_sq(coords.point(i));
                (c * c) / 4.0
            };
            let mut delta: Vec<f64> = (0..dims)
                .map(|k| opts.lr_coords * conformal_sq * grad[i][k])
                .collect();
            let move_norm = norm_sq(&delta).sqrt();
            if move_norm > max_move {
                let shrink = max_move / move_norm;
                for v in delta.iter_mut() {
                    *v *= shrink;
                }
                clamps += 1;
            }
            for k in 0..dims {
                coords.point_mut(i)[k] -= delta[k];
            }
        }
        retract_in_place(&mut coords, kappa);

        if step >= warmup {
            let h = 1e-6 * kappa.abs().max(1.0);
            let plus = k_stress_unchecked(&coords, kappa + h, &d_cond, &w_cond, &mut clamps).raw;
            let minus = k_stress_unchecked(&coords, kappa - h, &d_cond, &w_cond, &mut clamps).raw;
            let dk = (plus - minus) / (2.0 * h);
            kappa =
                (kappa - opts.lr_kappa * dk / (dk.abs() + 1.0)).clamp(-kappa_limit, kappa_limit);
            retract_in_place(&mut coords, kappa);
        }

        let s = k_stress_unchecked(&coords, kappa, &d_cond, &w_cond, &mut clamps);
        record.push(s.normalized);
        debug_assert!(
            (0..n).all(|i| check_domain(coords.point(i), kappa).is_ok()),
            "layout left the curvature domain"
        );
    }
    record.clamp_events = clamps;

    // Map the conditioned solution back to the metric's own units.
    for i in 0..n {
        for v in coords.point_mut(i) {
            *v *= scale;
        }
    }
    let kl = KLayout {
        coords,
        kappa: Curvature::new(kappa / (scale * scale)),
    };
    debug_assert!(kl.check_domain().is_ok());
    (kl, record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{weights, Alpha, TimeDistanceMatrix, WeightMatrix};

    fn dist(rows: Vec<Vec<f64>>) -> TimeDistanceMatrix {
        TimeDistanceMatrix::from_rows(rows).unwrap()
    }

    fn sample_in_domain(rng: &mut SeededRng, dims: usize, kappa: f64) -> Vec<f64> {
        let limit = if kappa < 0.0 {
            0.9 / (-kappa).sqrt()
        } else {
            2.0
        };
        (0..dims).map(|_| rng.uniform(-limit, limit) / (dims as f64).sqrt()).collect()
    }

    #[test]
    fn mobius_identity_element() {
        let x = vec![0.3, -0.2];
        let zero = vec![0.0, 0.0];
        for kappa in [-1.0, -0.1, 0.0, 0.1, 1.0] {
            let r = mobius_add(&x, &zero, kappa).unwrap();
            for (a, b) in r.iter().zip(&x) {
                assert!((a - b).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn mobius_flat_limit_is_vector_addition() {
        let x = vec![0.3, -0.2];
        let y = vec![-0.1, 0.25];
        let r = mobius_add(&x, &y, 0.0).unwrap();
        assert!((r[0] - 0.2).abs() <= 1e-12);
        assert!((r[1] - 0.05).abs() <= 1e-12);
    }

    #[test]
    fn mobius_one_dimensional_velocity_addition() {
        // At kappa = -1 collinear addition reduces to
        // (a + b) / (1 + a b) = 0.8 / 1.15.
        let r = mobius_add(&[0.5, 0.0], &[0.3, 0.0], -1.0).unwrap();
        assert!((r[0] - 16.0 / 23.0).abs() <= 1e-12, "{r:?}");
        assert!(r[1].abs() <= 1e-15);
    }

    #[test]
    fn mobius_gyro_identities() {
        let mut rng = SeededRng::new(300);
        for &kappa in &[-1.0, -0.1, 0.0, 0.1, 1.0] {
            for _ in 0..100 {
                let x = sample_in_domain(&mut rng, 2, kappa);
                let y = sample_in_domain(&mut rng, 2, kappa);
                let with_zero = mobius_add(&x, &[0.0, 0.0], kappa).unwrap();
                for (a, b) in with_zero.iter().zip(&x) {
                    assert!((a - b).abs() <= 1e-10);
                }
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                let cancel = mobius_add(&neg, &x, kappa).unwrap();
                for v in cancel {
                    assert!(v.abs() <= 1e-10);
                }
                if kappa == 0.0 {
                    let sum = mobius_add(&x, &y, kappa).unwrap();
                    for ((s, a), b) in sum.iter().zip(&x).zip(&y) {
                        assert!((s - (a + b)).abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn mobius_rejects_out_of_domain() {
        assert!(matches!(
            mobius_add(&[1.5, 0.0], &[0.0, 0.0], -1.0),
            Err(KspaceError::DomainViolation(_))
        ));
    }

    #[test]
    fn mobius_degenerate_denominator() {
        // kappa = 1, x = y = (1, 0): 1 - 2<x,y> + |x|^2|y|^2 = 0.
        assert_eq!(
            mobius_add(&[1.0, 0.0], &[1.0, 0.0], 1.0).unwrap_err(),
            KspaceError::DegenerateDenominator
        );
    }

    #[test]
    fn distance_zero_at_equal_points() {
        for kappa in [-1.0, 0.0, 1.0] {
            assert_eq!(k_distance(&[0.2, 0.1], &[0.2, 0.1], kappa).unwrap(), 0.0);
        }
    }

    #[test]
    fn distance_flat_limit() {
        let d = k_distance(&[0.0, 0.0], &[0.3, 0.0], 1e-13).unwrap();
        assert!((d - 0.6).abs() <= 1e-13);
    }

    #[test]
    fn distance_hyperbolic_closed_form() {
        // 2 artanh(1/2) = ln 3.
        let d = k_distance(&[0.0, 0.0], &[0.5, 0.0], -1.0).unwrap();
        assert!((d - 3.0_f64.ln()).abs() <= 1e-12, "{d}");
    }

    #[test]
    fn distance_agrees_with_mobius_route() {
        let mut rng = SeededRng::new(301);
        for &kappa in &[-1.0, -0.3, 0.2, 1.0] {
            for _ in 0..50 {
                let x = sample_in_domain(&mut rng, 3, kappa);
                let y = sample_in_domain(&mut rng, 3, kappa);
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                let diff = mobius_add(&neg, &y, kappa).unwrap();
                let gyro_norm = norm_sq(&diff).sqrt();
                let root = kappa.abs().sqrt();
                let expect = if kappa > 0.0 {
                    (2.0 / root) * (root * gyro_norm).atan()
                } else {
                    (2.0 / root) * (root * gyro_norm).atanh()
                };
                let got = k_distance(&x, &y, kappa).unwrap();
                assert!(
                    (got - expect).abs() <= 1e-10 * (1.0 + expect),
                    "kappa {kappa}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn distance_symmetry_and_flat_continuity() {
        let mut rng = SeededRng::new(302);
        for &kappa in &[-1.0, -0.1, 0.1, 1.0] {
            for _ in 0..50 {
                let x = sample_in_domain(&mut rng, 2, kappa);
                let y = sample_in_domain(&mut rng, 2, kappa);
                let a = k_distance(&x, &y, kappa).unwrap();
                let b = k_distance(&y, &x, kappa).unwrap();
                assert!((a - b).abs() <= 1e-10);
            }
        }
        // Near-flat curvature against the Euclidean distance.
        for _ in 0..50 {
            let x = vec![rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)];
            let y = vec![rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)];
            let kappa = rng.uniform(-1e-6, 1e-6);
            let euclid: f64 = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let half = k_distance(&x, &y, kappa).unwrap() / 2.0;
            assert!((half - euclid).abs() <= 1e-6 * euclid + 1e-12);
        }
    }

    #[test]
    fn k_stress_flat_matches_euclidean() {
        use crate::embedding::stress;
        let mut rng = SeededRng::new(303);
        let n = 5;
        let coords = random_layout(&mut rng, n, 2, 2.0);
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.uniform(0.5, 3.0);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        let d = dist(rows);
        let w = weights(&d, Alpha::Two).unwrap();
        let kl = KLayout::new(coords.clone(), Curvature::flat()).unwrap();
        let curved = k_stress(&kl, &d, &w).unwrap();
        let flat = stress(&coords, &d, &w).unwrap();
        assert!((curved.raw - flat.raw).abs() <= 1e-10 * (1.0 + flat.raw));
    }

    #[test]
    fn k_stress_perfect_spherical_fit() {
        // Points on a circle measured in their own geometry embed back with
        // zero stress.
        let kappa = 1.0;
        let n = 5;
        let radius = 0.3;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let theta = i as f64 * std::f64::consts::TAU / n as f64;
                vec![radius * theta.cos(), radius * theta.sin()]
            })
            .collect();
        let coords = Layout::from_rows(rows).unwrap();
        let kl = KLayout::new(coords, Curvature::new(kappa)).unwrap();
        let mut drows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = kl.embedded_distance(i, j).unwrap();
                drows[i][j] = v;
                drows[j][i] = v;
            }
        }
        let d = dist(drows);
        let w = WeightMatrix::uniform(n);
        let s = k_stress(&kl, &d, &w).unwrap();
        assert!(s.raw <= 1e-8, "raw {}", s.raw);
    }

    #[test]
    fn k_stress_single_point_is_zero() {
        let kl = KLayout::new(Layout::zeros(1, 2), Curvature::new(1.0)).unwrap();
        let d = dist(vec![vec![0.0]]);
        let w = WeightMatrix::uniform(1);
        let s = k_stress(&kl, &d, &w).unwrap();
        assert_eq!(s.raw, 0.0);
        assert_eq!(s.normalized, 0.0);
    }

    #[test]
    fn coordinate_gradient_matches_central_differences() {
        let mut rng = SeededRng::new(304);
        let mut checked = 0;
        while checked < 20 {
            let n = 3 + rng.index(4);
            let kappa = [-1.0, -0.4, 0.3, 1.0][rng.index(4)];
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| sample_in_domain(&mut rng, 2, kappa))
                .collect();
            let coords = Layout::from_rows(rows).unwrap();
            let mut too_close = false;
            for i in 0..n {
                for j in (i + 1)..n {
                    if coords.distance(i, j) < 1e-3 {
                        too_close = true;
                    }
                }
            }
            if too_close {
                continue;
            }
            let mut drows = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = rng.uniform(0.3, 2.0);
                    drows[i][j] = v;
                    drows[j][i] = v;
                }
            }
            let d = dist(drows);
            let w = weights(&d, Alpha::Two).unwrap();
            let mut clamps = 0;
            let grad = k_stress_coord_gradient(&coords, kappa, &d, &w, &mut clamps, None);

            let h = 1e-6;
            let mut max_rel = 0.0_f64;
            for i in 0..n {
                for k in 0..2 {
                    let mut plus = coords.clone();
                    plus.point_mut(i)[k] += h;
                    let mut minus = coords.clone();
                    minus.point_mut(i)[k] -= h;
                    let mut c = 0;
                    let fp = k_stress_unchecked(&plus, kappa, &d, &w, &mut c).raw;
                    let fm = k_stress_unchecked(&minus, kappa, &d, &w, &mut c).raw;
                    let fd = (fp - fm) / (2.0 * h);
                    let denom = fd.abs().max(grad[i][k].abs()).max(1e-6);
                    max_rel = max_rel.max((fd - grad[i][k]).abs() / denom);
                }
            }
            assert!(max_rel <= 1e-4, "kappa {kappa}: mismatch {max_rel}");
            checked += 1;
        }
    }

    #[test]
    fn retract_clamps_to_boundary() {
        let kl = KLayout {
            coords: Layout::from_rows(vec![vec![0.999999, 0.0]]).unwrap(),
            kappa: Curvature::new(-1.0),
        };
        let out = retract(&kl);
        let norm = norm_sq(out.coords.point(0)).sqrt();
        assert!((norm - 0.99999).abs() <= 1e-12);
        assert!(out.check_domain().is_ok());
    }

    #[test]
    fn retract_identity_for_positive_curvature_and_interior() {
        let kl = KLayout {
            coords: Layout::from_rows(vec![vec![123.0, -4.0]]).unwrap(),
            kappa: Curvature::new(1.0),
        };
        assert_eq!(retract(&kl).coords, kl.coords);

        let interior = KLayout {
            coords: Layout::from_rows(vec![vec![0.4, 0.0]]).unwrap(),
            kappa: Curvature::new(-4.0),
        };
        assert_eq!(retract(&interior).coords, interior.coords);
    }

    #[test]
    fn joint_on_line_metric_stays_near_flat() {
        let d = dist(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ]);
        let w = weights(&d, Alpha::Two).unwrap();
        let (kl, record) = optimize_joint(&d, &w, 2, 1, JointOptions::default());
        assert!(
            record.final_stress.normalized <= 1e-4,
            "stress {}",
            record.final_stress.normalized
        );
        assert!(kl.check_domain().is_ok());
    }

    #[test]
    fn joint_run_is_deterministic() {
        let d = dist(vec![
            vec![0.0, 1.0, 2.0, 1.0],
            vec![1.0, 0.0, 1.0, 2.0],
            vec![2.0, 1.0, 0.0, 1.0],
            vec![1.0, 2.0, 1.0, 0.0],
        ]);
        let w = weights(&d, Alpha::Two).unwrap();
        let opts = JointOptions {
            steps: 50,
            ..Default::default()
        };
        let (a, ra) = optimize_joint(&d, &w, 2, 9, opts);
        let (b, rb) = optimize_joint(&d, &w, 2, 9, opts);
        assert_eq!(a.coords, b.coords);
        assert_eq!(a.kappa, b.kappa);
        assert_eq!(ra.trajectory, rb.trajectory);
    }
}

