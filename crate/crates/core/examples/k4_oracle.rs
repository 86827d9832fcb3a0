//! Generates the unit-K4 optimum fixture used by the test suite.
//!
//! Four points with all pairwise target distances 1 cannot be placed in the
//! plane with zero stress; this searches for the minimal attainable raw
//! stress by dense multi-start majorization (2000 seeded random starts,
//! each run to a 1e-15 relative tolerance) followed by a gradient polish.
//!
//! Run with:
//!
//! ```text
//! cargo run --release -p tdm-core --example k4_oracle > crates/core/tests/fixtures/k4_unit.json
//! ```

use tdm_core::embedding::{stress, stress_gradient, Layout};
use tdm_core::majorization::{run_majorization, MajorizeInit, MajorizeOptions};
use tdm_core::metric::{TimeDistanceMatrix, WeightMatrix};
use tdm_core::rng::SeededRng;
use tdm_core::sgd::random_layout;

fn main() {
    let d = TimeDistanceMatrix::from_rows(vec![
        vec![0.0, 1.0, 1.0, 1.0],
        vec![1.0, 0.0, 1.0, 1.0],
        vec![1.0, 1.0, 0.0, 1.0],
        vec![1.0, 1.0, 1.0, 0.0],
    ])
    .unwrap();
    let w = WeightMatrix::uniform(4);
    let opts = MajorizeOptions {
        max_iter: 50_000,
        tol: 1e-15,
        seed: 0,
    };

    let mut best_raw = f64::INFINITY;
    let mut best_layout: Option<Layout> = None;
    for seed in 0..2000u64 {
        let mut rng = SeededRng::new(seed);
        let init = random_layout(&mut rng, 4, 2, 1.0);
        let (layout, record) = run_majorization(
            &d,
            &w,
            2,
            MajorizeInit::Layout(init),
            MajorizeOptions { seed, ..opts },
        )
        .expect("majorization run");
        if record.final_stress.raw < best_raw {
            best_raw = record.final_stress.raw;
            best_layout = Some(layout);
        }
    }

    // Gradient polish with a shrinking step, in case majorization's fixed
    // point sits a hair off the stationary point.
    let mut layout = best_layout.expect("at least one run");
    let mut step = 1e-3;
    for _ in 0..200_000 {
        let grad = stress_gradient(&layout, &d, &w).expect("non-degenerate layout");
        let mut trial = layout.clone();
        for i in 0..4 {
            for k in 0..2 {
                trial.point_mut(i)[k] -= step * grad[i][k];
            }
        }
        let cur = stress(&layout, &d, &w).unwrap().raw;
        let new = stress(&trial, &d, &w).unwrap().raw;
        if new < cur {
            layout = trial;
        } else {
            step *= 0.5;
            if step < 1e-18 {
                break;
            }
        }
    }
    let s_star = stress(&layout, &d, &w).unwrap().raw;

    let rows = layout.rows();
    println!("{{");
    println!("  \"s_star\": {s_star},");
    println!("  \"layout\": [");
    for (i, row) in rows.iter().enumerate() {
        let comma = if i + 1 < rows.len() { "," } else { "" };
        println!("    [{}, {}]{comma}", row[0], row[1]);
    }
    println!("  ]");
    println!("}}");
}
