//! Distance scaling by pairwise stochastic gradient descent.
//!
//! Each iteration visits every vertex pair once in a freshly shuffled
//! order and moves the two endpoints symmetrically toward their target
//! distance, with the step capped at the full correction. The step size
//! anneals exponentially from `eta_max` to `eta_min`.

use std::fmt;

use crate::embedding::{stress, stress_normalizer, EmbedError, Layout, COINCIDENT_EPS};
use crate::metric::{TimeDistanceMatrix, WeightMatrix};
use crate::rng::SeededRng;
use crate::run::RunRecord;

/// Exponentially decaying step-size schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdSchedule {
    pub eta_max: f64,
    pub eta_min: f64,
    pub iterations: usize,
    /// ln(eta_max/eta_min) / (T - 1); zero for a single iteration.
    pub decay: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvalidSchedule(pub String);

impl fmt::Display for InvalidSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid schedule: {}", self.0)
    }
}

impl std::error::Error for InvalidSchedule {}

impl SgdSchedule {
    pub const DEFAULT_ITERATIONS: usize = 15;

    pub fn new(eta_max: f64, eta_min: f64, iterations: usize) -> Result<Self, InvalidSchedule> {
        if iterations == 0 {
            return Err(InvalidSchedule("iteration count must be >= 1".to_string()));
        }
        if !(eta_min > 0.0) || !eta_min.is_finite() || !eta_max.is_finite() {
            return Err(InvalidSchedule(format!(
                "step sizes must be positive and finite, got {eta_max} and {eta_min}"
            )));
        }
        if eta_max < eta_min {
            return Err(InvalidSchedule(format!(
                "eta_max {eta_max} below eta_min {eta_min}"
            )));
        }
        let decay = if iterations > 1 {
            (eta_max / eta_min).ln() / (iterations - 1) as f64
        } else {
            0.0
        };
        Ok(Self {
            eta_max,
            eta_min,
            iterations,
            decay,
        })
    }

    /// Schedule spanning the weight range: the first iteration fully
    /// corrects the weakest pair, the last moves the strongest pair by a
    /// tenth.
    pub fn from_weights(w: &WeightMatrix, iterations: usize) -> Result<Self, InvalidSchedule> {
        let n = w.n();
        let mut w_min = f64::INFINITY;
        let mut w_max: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = w.get(i, j);
                w_min = w_min.min(v);
                w_max = w_max.max(v);
            }
        }
        if !w_min.is_finite() || w_max <= 0.0 {
            return Err(InvalidSchedule(
                "weights give no usable step-size range".to_string(),
            ));
        }
        Self::new(1.0 / w_min, 0.1 / w_max, iterations)
    }

    pub fn eta(&self, t: usize) -> f64 {
        self.eta_max * (-self.decay * t as f64).exp()
    }
}

/// Moves the pair (i, j) toward its target distance. With
/// `mu = min(w_ij * eta, 1)` and residual r along the connecting line,
/// X_i and X_j each absorb half of `mu * r`; all other rows are untouched.
pub fn sgd_step(
    x: &Layout,
    pair: (usize, usize),
    d_ij: f64,
    w_ij: f64,
    eta: f64,
) -> Result<Layout, EmbedError> {
    let mut out = x.clone();
    step_in_place(&mut out, pair, d_ij, w_ij, eta, None)?;
    Ok(out)
}

fn step_in_place(
    x: &mut Layout,
    (i, j): (usize, usize),
    d_ij: f64,
    w_ij: f64,
    eta: f64,
    fallback: Option<&mut SeededRng>,
) -> Result<(), EmbedError> {
    let dims = x.dims();
    let mu = (w_ij * eta).min(1.0);
    let dist = x.distance(i, j);
    let dir: Vec<f64> = if dist < COINCIDENT_EPS {
        match fallback {
            Some(rng) => rng.unit_vector(dims),
            None => return Err(EmbedError::CoincidentPoints(i.min(j), i.max(j))),
        }
    } else {
        (0..dims)
            .map(|k| (x.point(i)[k] - x.point(j)[k]) / dist)
            .collect()
    };
    let magnitude = (dist - d_ij) / 2.0;
    for k in 0..dims {
        let r = magnitude * dir[k];
        x.point_mut(i)[k] -= mu * r;
        x.point_mut(j)[k] += mu * r;
    }
    Ok(())
}

/// Full SGD run: seeded uniform initialization in a box of half the metric
/// diameter, then `schedule.iterations` passes over all shuffled pairs.
pub fn run_sgd(
    d: &TimeDistanceMatrix,
    w: &WeightMatrix,
    dims: usize,
    schedule: &SgdSchedule,
    seed: u64,
) -> Result<(Layout, RunRecord), EmbedError> {
    let n = d.n();
    if n != w.n() {
        return Err(EmbedError::DimensionMismatch(format!(
            "distances {} vs weights {}",
            n,
            w.n()
        )));
    }
    let mut rng = SeededRng::new(seed);
    let mut fallback = SeededRng::derive(seed, 0x5347_44);
    let mut x = random_layout(&mut rng, n, dims, d.max_distance() / 2.0);

    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }

    let denom = stress_normalizer(d, w);
    let mut record = RunRecord::new(seed, denom);
    for t in 0..schedule.iterations {
        rng.shuffle(&mut pairs);
        let eta = schedule.eta(t);
        for &(i, j) in &pairs {
            step_in_place(&mut x, (i, j), d.get(i, j), w.get(i, j), eta, Some(&mut fallback))?;
        }
        let s = stress(&x, d, w)?;
        record.push(s.normalized);
    }
    if record.trajectory.is_empty() {
        let s = stress(&x, d, w)?;
        record.push(s.normalized);
    }
    Ok((x, record))
}

/// Seeded uniform layout in [-scale, scale]^dims.
pub fn random_layout(rng: &mut SeededRng, n: usize, dims: usize, scale: f64) -> Layout {
    let mut layout = Layout::zeros(n, dims);
    for i in 0..n {
        for k in 0..dims {
            layout.point_mut(i)[k] = rng.uniform(-scale, scale);
        }
    }
    layout
}
