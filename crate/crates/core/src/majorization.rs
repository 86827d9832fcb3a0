//! Distance scaling by stress majorization.
//!
//! Around a reference layout Z the stress is bounded above by the quadratic
//!
//! ```text
//! F_Z(X) = sum_{i<j} w_ij d_ij^2 + Tr(X^T L_w X) - 2 Tr(X^T L_Z Z)
//! ```
//!
//! which touches the stress at X = Z. A sweep of per-vertex exact
//! minimizations of F_Z (in fixed vertex order, feeding updated positions
//! forward) therefore never increases the stress.

use crate::embedding::{stress, stress_normalizer, EmbedError, Layout, COINCIDENT_EPS};
use crate::linalg::SquareMatrix;
use crate::metric::{TimeDistanceMatrix, WeightMatrix};
use crate::rng::SeededRng;
use crate::run::RunRecord;

/// Reference layout with the two Laplacians of the majorizing bound.
pub struct MajorizationState {
    z_ref: Layout,
    lw: SquareMatrix,
    lz: SquareMatrix,
}

impl MajorizationState {
    /// Builds the state; fails if the reference layout has coincident
    /// points (the bound's directions are undefined there).
    pub fn new(
        z_ref: Layout,
        d: &TimeDistanceMatrix,
        w: &WeightMatrix,
    ) -> Result<Self, EmbedError> {
        let n = z_ref.n();
        if n != d.n() || n != w.n() {
            return Err(EmbedError::DimensionMismatch(format!(
                "layout {} vs distances {} vs weights {}",
                n,
                d.n(),
                w.n()
            )));
        }
        let mut lw = SquareMatrix::zeros(n);
        let mut lz = SquareMatrix::zeros(n);
        for i in 0..n {
            let mut lw_diag = 0.0;
            let mut lz_diag = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let wij = w.get(i, j);
                lw.set(i, j, -wij);
                lw_diag += wij;
                let dist = z_ref.distance(i, j);
                if dist < COINCIDENT_EPS {
                    return Err(EmbedError::CoincidentPoints(i.min(j), i.max(j)));
                }
                let lz_off = -wij * d.get(i, j) / dist;
                lz.set(i, j, lz_off);
                lz_diag -= lz_off;
            }
            lw.set(i, i, lw_diag);
            lz.set(i, i, lz_diag);
        }
        Ok(Self { z_ref, lw, lz })
    }

    pub fn z_ref(&self) -> &Layout {
        &self.z_ref
    }

    pub fn weighted_laplacian(&self) -> &SquareMatrix {
        &self.lw
    }

    pub fn reference_laplacian(&self) -> &SquareMatrix {
        &self.lz
    }
}

/// Evaluates the majorizing bound F_Z at X. Guaranteed >= stress(X), with
/// equality at X = Z.
pub fn bound_fz(
    x: &Layout,
    state: &MajorizationState,
    d: &TimeDistanceMatrix,
    w: &WeightMatrix,
) -> Result<f64, EmbedError> {
    let n = x.n();
    if n != state.z_ref.n() || x.dims() != state.z_ref.dims() {
        return Err(EmbedError::DimensionMismatch(format!(
            "{}x{} vs reference {}x{}",
            n,
            x.dims(),
            state.z_ref.n(),
            state.z_ref.dims()
        )));
    }
    let mut constant = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = d.get(i, j);
            constant += w.get(i, j) * dij * dij;
        }
    }
    let mut quad = 0.0;
    let mut cross = 0.0;
    for k in 0..x.dims() {
        for i in 0..n {
            for j in 0..n {
                quad += x.point(i)[k] * state.lw.get(i, j) * x.point(j)[k];
                cross += x.point(i)[k] * state.lz.get(i, j) * state.z_ref.point(j)[k];
            }
        }
    }
    Ok(constant + quad - 2.0 * cross)
}

/// One majorization sweep: every vertex moves to the exact minimizer of
/// F_Z over its own position, in fixed vertex order. The returned layout
/// satisfies stress(X) <= stress(Z).
pub fn majorize_step(
    state: &MajorizationState,
    d: &TimeDistanceMatrix,
    w: &WeightMatrix,
) -> Result<Layout, EmbedError> {
    let z = &state.z_ref;
    for i in 0..z.n() {
        for j in (i + 1)..z.n() {
            if z.distance(i, j) < COINCIDENT_EPS {
                return Err(EmbedError::CoincidentPoints(i, j));
            }
        }
    }
    Ok(sweep(z, d, w, None))
}

/// The sweep itself. `fallback` supplies deterministic random directions
/// for coincident reference pairs; `None` assumes the caller checked.
fn sweep(
    z: &Layout,
    d: &TimeDistanceMatrix,
    w: &WeightMatrix,
    mut fallback: Option<&mut SeededRng>,
) -> Layout {
    let n = z.n();
    let dims = z.dims();
    let mut x = z.clone();
    for i in 0..n {
        let mut numer = vec![0.0; dims];
        let mut total_w = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let wij = w.get(i, j);
            if wij == 0.0 {
                continue;
            }
            let dij = d.get(i, j);
            let dist = z.distance(i, j);
            let dir: Vec<f64> = if dist < COINCIDENT_EPS {
                match fallback.as_deref_mut() {
                    Some(rng) => rng.unit_vector(dims),
                    None => vec![0.0; dims],
                }
            } else {
                (0..dims)
                    .map(|k| (z.point(i)[k] - z.point(j)[k]) / dist)
                    .collect()
            };
            for k in 0..dims {
                numer[k] += wij * (x.point(j)[k] + dij * dir[k]);
            }
            total_w += wij;
        }
        if total_w > 0.0 {
            for k in 0..dims {
                x.point_mut(i)[k] = numer[k] / total_w;
            }
        }
    }
    x
}

/// Initial layout for [`run_majorization`].
pub enum MajorizeInit {
    /// Classical MDS seed, the usual reliable starting point.
    Classical,
    /// Caller-provided layout, e.g. a seeded random configuration.
    Layout(Layout),
}

#[derive(Debug, Clone, Copy)]
pub struct MajorizeOptions {
    pub max_iter: usize,
    /// Relative stress improvement below which iteration stops.
    pub tol: f64,
    /// Recorded in the run record and used for degeneracy fallbacks.
    pub seed: u64,
}

impl Default for MajorizeOptions {
    fn default() -> Self {
        Self {
            max_iter: 300,
            tol: 1e-7,
            seed: 0,
        }
    }
}

/// Iterates majorization sweeps until the relative stress improvement
/// drops below `tol` or `max_iter` is reached.
pub fn run_majorization(
    d: &TimeDistanceMatrix,
    w: &WeightMatrix,
    dims: usize,
    init: MajorizeInit,
    opts: MajorizeOptions,
) -> Result<(Layout, RunRecord), EmbedError> {
    let mut z = match init {
        MajorizeInit::Classical => crate::classical::classical_mds(d, dims),
        MajorizeInit::Layout(l) => {
            if l.dims() != dims || l.n() != d.n() {
                return Err(EmbedError::DimensionMismatch(format!(
                    "init layout {}x{}, expected {}x{}",
                    l.n(),
                    l.dims(),
                    d.n(),
                    dims
                )));
            }
            l
        }
    };
    let denom = stress_normalizer(d, w);
    let mut record = RunRecord::new(opts.seed, denom);
    let mut fallback = SeededRng::derive(opts.seed, 0x4d41_4a4f);
    let mut prev = stress(&z, d, w)?.raw;
    for _ in 0..opts.max_iter.max(1) {
        let x = sweep(&z, d, w, Some(&mut fallback));
        let s = stress(&x, d, w)?;
        record.push(s.normalized);
        z = x;
        let improvement = (prev - s.raw) / prev.max(f64::MIN_POSITIVE);
        prev = s.raw;
        if improvement < opts.tol {
            break;
        }
    }
    Ok((z, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{weights, Alpha, TimeDistanceMatrix, WeightMatrix};
    use crate::rng::SeededRng;

    fn dist(rows: Vec<Vec<f64>>) -> TimeDistanceMatrix {
        TimeDistanceMatrix::from_rows(rows).unwrap()
    }

    fn random_layout(rng: &mut SeededRng, n: usize, dims: usize, scale: f64) -> Layout {
        Layout::from_rows(
            (0..n)
                .map(|_| (0..dims).map(|_| rng.uniform(-scale, scale)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn random_metric(rng: &mut SeededRng, n: usize) -> TimeDistanceMatrix {
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.uniform(0.5, 4.0);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        dist(rows)
    }

    #[test]
    fn bound_tight_at_reference() {
        let mut rng = SeededRng::new(100);
        for _ in 0..20 {
            let n = 2 + rng.index(5);
            let d = random_metric(&mut rng, n);
            let w = weights(&d, Alpha::Two).unwrap();
            let z = random_layout(&mut rng, n, 2, 3.0);
            let state = MajorizationState::new(z.clone(), &d, &w).unwrap();
            let f = bound_fz(&z, &state, &d, &w).unwrap();
            let s = stress(&z, &d, &w).unwrap().raw;
            assert!((f - s).abs() <= 1e-9 * (1.0 + s), "f={f} s={s}");
        }
    }

    #[test]
    fn bound_dominates_stress() {
        let mut rng = SeededRng::new(101);
        for _ in 0..50 {
            let n = 2 + rng.index(5);
            let d = random_metric(&mut rng, n);
            let w = weights(&d, Alpha::One).unwrap();
            let z = random_layout(&mut rng, n, 2, 3.0);
            let state = MajorizationState::new(z, &d, &w).unwrap();
            let x = random_layout(&mut rng, n, 2, 3.0);
            let f = bound_fz(&x, &state, &d, &w).unwrap();
            let s = stress(&x, &d, &w).unwrap().raw;
            assert!(f >= s - 1e-9 * (1.0 + s), "bound {f} below stress {s}");
        }
    }

    #[test]
    fn two_point_gap_matches_reduction() {
        // For n = 2 the gap F_Z(X) - stress(X) reduces to
        // 2 w d (|X1-X2| - <X1-X2, u_Z>) with u_Z the unit reference
        // direction, which is nonnegative by Cauchy-Schwarz.
        let mut rng = SeededRng::new(102);
        for _ in 0..30 {
            let d = dist(vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
            let w = WeightMatrix::uniform(2);
            let z = random_layout(&mut rng, 2, 2, 2.0);
            let x = random_layout(&mut rng, 2, 2, 2.0);
            if z.distance(0, 1) < 1e-6 || x.distance(0, 1) < 1e-6 {
                continue;
            }
            let state = MajorizationState::new(z.clone(), &d, &w).unwrap();
            let gap = bound_fz(&x, &state, &d, &w).unwrap() - stress(&x, &d, &w).unwrap().raw;
            let zd: Vec<f64> = (0..2).map(|k| z.point(0)[k] - z.point(1)[k]).collect();
            let xd: Vec<f64> = (0..2).map(|k| x.point(0)[k] - x.point(1)[k]).collect();
            let zn = (zd[0] * zd[0] + zd[1] * zd[1]).sqrt();
            let xn = (xd[0] * xd[0] + xd[1] * xd[1]).sqrt();
            let dot = (xd[0] * zd[0] + xd[1] * zd[1]) / zn;
            let expect = 2.0 * 1.0 * 2.0 * (xn - dot);
            assert!((gap - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
            assert!(gap >= -1e-12);
        }
    }

    #[test]
    fn two_points_land_at_target_distance() {
        let d = dist(vec![vec![0.0, 3.0], vec![3.0, 0.0]]);
        let w = WeightMatrix::uniform(2);
        let z = Layout::from_rows(vec![vec![0.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let state = MajorizationState::new(z, &d, &w).unwrap();
        let x = majorize_step(&state, &d, &w).unwrap();
        assert!((x.distance(0, 1) - 3.0).abs() <= 1e-12);
    }

    #[test]
    fn zero_stress_reference_is_fixed_point() {
        let d = dist(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ]);
        let w = WeightMatrix::uniform(3);
        let z = Layout::from_rows(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![2.0, 0.0],
        ])
        .unwrap();
        let state = MajorizationState::new(z.clone(), &d, &w).unwrap();
        let x = majorize_step(&state, &d, &w).unwrap();
        for i in 0..3 {
            for k in 0..2 {
                assert!((x.point(i)[k] - z.point(i)[k]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn unit_cycle_stress_decreases_monotonically() {
        // Shortest-path metric of the 4-cycle with unit edges.
        let d = dist(vec![
            vec![0.0, 1.0, 2.0, 1.0],
            vec![1.0, 0.0, 1.0, 2.0],
            vec![2.0, 1.0, 0.0, 1.0],
            vec![1.0, 2.0, 1.0, 0.0],
        ]);
        let w = weights(&d, Alpha::Two).unwrap();
        let mut rng = SeededRng::new(103);
        let mut z = random_layout(&mut rng, 4, 2, 1.0);
        let mut prev = stress(&z, &d, &w).unwrap().raw;
        for _ in 0..20 {
            let state = MajorizationState::new(z, &d, &w).unwrap();
            let x = majorize_step(&state, &d, &w).unwrap();
            let s = stress(&x, &d, &w).unwrap().raw;
            assert!(s <= prev + 1e-12 * (1.0 + prev), "{s} > {prev}");
            prev = s;
            z = x;
        }
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let mut rng = SeededRng::new(99);
        let n = 5;
        let d = random_metric(&mut rng, n);
        let w = weights(&d, Alpha::Two).unwrap();
        let z = random_layout(&mut rng, n, 2, 2.0);
        let state = MajorizationState::new(z, &d, &w).unwrap();
        for m in [state.weighted_laplacian(), state.reference_laplacian()] {
            for i in 0..n {
                let sum: f64 = (0..n).map(|j| m.get(i, j)).sum();
                assert!(sum.abs() <= 1e-12, "row {i} sums to {sum}");
            }
        }
    }

    #[test]
    fn coincident_reference_is_rejected() {
        let d = dist(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let w = WeightMatrix::uniform(2);
        let z = Layout::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            MajorizationState::new(z, &d, &w),
            Err(EmbedError::CoincidentPoints(0, 1))
        ));
    }

    #[test]
    fn run_on_line_metric_reaches_zero_stress() {
        let d = dist(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ]);
        let w = weights(&d, Alpha::Two).unwrap();
        let (layout, record) = run_majorization(
            &d,
            &w,
            2,
            MajorizeInit::Classical,
            MajorizeOptions::default(),
        )
        .unwrap();
        let s = stress(&layout, &d, &w).unwrap();
        assert!(s.raw <= 1e-10, "raw {}", s.raw);
        assert_eq!(
            record.final_stress.normalized,
            *record.trajectory.last().unwrap()
        );
    }

    #[test]
    fn converged_init_stops_after_one_sweep() {
        let d = dist(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ]);
        let w = WeightMatrix::uniform(3);
        let line = Layout::from_rows(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![2.0, 0.0],
        ])
        .unwrap();
        let opts = MajorizeOptions {
            tol: 1e-9,
            ..Default::default()
        };
        let (layout, record) =
            run_majorization(&d, &w, 2, MajorizeInit::Layout(line.clone()), opts).unwrap();
        assert_eq!(record.iterations_used, 1);
        for i in 0..3 {
            for k in 0..2 {
                assert!((layout.point(i)[k] - line.point(i)[k]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn monotone_trajectories_from_random_starts() {
        let mut rng = SeededRng::new(104);
        for seed in 0..10 {
            let n = 3 + rng.index(5);
            let d = random_metric(&mut rng, n);
            let w = weights(&d, Alpha::Two).unwrap();
            let init = random_layout(&mut rng, n, 2, d.max_distance() / 2.0);
            let (_layout, record) = run_majorization(
                &d,
                &w,
                2,
                MajorizeInit::Layout(init),
                MajorizeOptions {
                    seed,
                    ..Default::default()
                },
            )
            .unwrap();
            for pair in record.trajectory.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-12 * (1.0 + pair[0]));
            }
        }
    }
}
