//! Per-run bookkeeping and cross-run statistics.

use std::fmt;

use crate::embedding::StressReport;

/// Record of one optimizer run: the stress trajectory and its endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    /// Normalized stress after each iteration.
    pub trajectory: Vec<f64>,
    pub final_stress: StressReport,
    pub iterations_used: usize,
    /// Normalization constant (sum of w_ij d_ij^2); raw values in the
    /// trajectory are `entry * norm_denom`.
    pub norm_denom: f64,
    /// Number of numerically clamped distance evaluations (curved-space
    /// runs only).
    pub clamp_events: u64,
}

impl RunRecord {
    pub fn new(seed: u64, norm_denom: f64) -> Self {
        Self {
            seed,
            trajectory: Vec::new(),
            final_stress: StressReport {
                raw: 0.0,
                normalized: 0.0,
            },
            iterations_used: 0,
            norm_denom,
            clamp_events: 0,
        }
    }

    pub fn push(&mut self, normalized: f64) {
        self.trajectory.push(normalized);
        self.iterations_used = self.trajectory.len();
        self.final_stress = StressReport {
            raw: normalized * self.norm_denom,
            normalized,
        };
    }

    /// First 1-based iteration whose stress is within `factor` of the final
    /// stress; used for convergence-speed comparisons.
    pub fn iterations_to_within(&self, factor: f64) -> Option<usize> {
        let target = self.final_stress.normalized * factor;
        self.trajectory
            .iter()
            .position(|&s| s <= target)
            .map(|i| i + 1)
    }

    /// JSON-lines export, one object per iteration.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (t, &norm) in self.trajectory.iter().enumerate() {
            let raw = norm * self.norm_denom;
            out.push_str(&format!(
                "{{\"iter\":{},\"stress_raw\":{},\"stress_norm\":{}}}\n",
                t + 1,
                raw,
                norm
            ));
        }
        out
    }
}

/// Statistics over the final normalized stress of several runs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RunStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Population standard deviation over mean.
    pub coefficient_of_variation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    TooFewRuns(usize),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooFewRuns(n) => write!(f, "need at least 2 runs, got {n}"),
        }
    }
}

impl std::error::Error for RunError {}

/// Mean, min, max, and coefficient of variation of the final normalized
/// stress across runs. Needs at least two records.
pub fn compare_runs(records: &[RunRecord]) -> Result<RunStats, RunError> {
    let finals: Vec<f64> = records
        .iter()
        .map(|r| r.final_stress.normalized)
        .collect();
    stats_of(&finals)
}

pub fn stats_of(values: &[f64]) -> Result<RunStats, RunError> {
    if values.len() < 2 {
        return Err(RunError::TooFewRuns(values.len()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = variance.sqrt();
    let coefficient_of_variation = if mean != 0.0 { std / mean } else { 0.0 };
    Ok(RunStats {
        mean,
        min,
        max,
        coefficient_of_variation,
    })
}

/// Median of a value list (mean of the middle two for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(final_norm: f64) -> RunRecord {
        let mut r = RunRecord::new(0, 1.0);
        r.push(final_norm * 2.0);
        r.push(final_norm);
        r
    }

    #[test]
    fn identical_finals_have_zero_cv() {
        let stats = compare_runs(&[record(0.1), record(0.1)]).unwrap();
        assert_eq!(stats.coefficient_of_variation, 0.0);
        assert_eq!(stats.mean, 0.1);
    }

    #[test]
    fn hand_computed_cv() {
        let stats = compare_runs(&[record(1.0), record(3.0)]).unwrap();
        assert_eq!(stats.mean, 2.0);
        assert_eq!(stats.min, 1.0);
        assert_eq!(stats.max, 3.0);
        assert_eq!(stats.coefficient_of_variation, 0.5);
    }

    #[test]
    fn single_record_is_too_few() {
        assert_eq!(
            compare_runs(&[record(1.0)]).unwrap_err(),
            RunError::TooFewRuns(1)
        );
    }

    #[test]
    fn final_matches_last_trajectory_entry() {
        let r = record(0.25);
        assert_eq!(r.final_stress.normalized, *r.trajectory.last().unwrap());
        assert_eq!(r.iterations_used, r.trajectory.len());
    }

    #[test]
    fn jsonl_has_one_line_per_iteration() {
        let r = record(0.25);
        let text = r.to_jsonl();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().next().unwrap().starts_with("{\"iter\":1,"));
    }

    #[test]
    fn median_handles_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
