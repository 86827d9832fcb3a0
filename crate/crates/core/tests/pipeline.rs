//! Whole-pipeline test: network bytes through graph, metric, weights, and
//! every optimizer.

use tdm_core::*;

const NETWORK: &[u8] = br#"{
  "segments": [
    {"id": "ab", "from": "A", "to": "B", "length_m": 600.0, "speed_limit_mps": 10.0, "bidirectional": true},
    {"id": "bc", "from": "B", "to": "C", "length_m": 900.0, "speed_limit_mps": 15.0, "bidirectional": true},
    {"id": "cd", "to": "D", "from": "C", "length_m": 300.0, "speed_limit_mps": 10.0, "bidirectional": true}
  ],
  "entries": ["A"],
  "exits": ["D"]
}"#;

#[test]
fn network_embeds_exactly_on_a_line() {
    // Travel times 60, 60, 30 form a path metric, which embeds exactly.
    let net = parse_network(NETWORK).unwrap();
    let graph = build_graph(&net).unwrap();
    assert_eq!(graph.vertices(), &["A", "B", "C", "D"]);

    let times = all_pairs_times(&graph);
    assert_eq!(times.get(0, 3), 150.0);
    assert_eq!(times.get(3, 0), 150.0);

    let metric = symmetrize(&times, SymmetrizePolicy::Mean).unwrap();
    let w = weights(&metric, Alpha::Two).unwrap();

    let classical = classical_mds(&metric, 2);
    assert!(stress(&classical, &metric, &w).unwrap().raw <= 1e-9);

    let (majorized, record) = run_majorization(
        &metric,
        &w,
        2,
        MajorizeInit::Classical,
        MajorizeOptions::default(),
    )
    .unwrap();
    assert!(record.final_stress.raw <= 1e-9);

    // The two flat layouts agree up to rigid motion.
    let (_aligned, residual) = procrustes_align(&classical, &majorized).unwrap();
    assert!(residual <= 1e-6, "residual {residual}");

    let schedule = SgdSchedule::from_weights(&w, 60).unwrap();
    let (sgd_layout, _) = run_sgd(&metric, &w, 2, &schedule, 11).unwrap();
    let s = stress(&sgd_layout, &metric, &w).unwrap();
    assert!(s.normalized <= 1e-4, "sgd normalized {}", s.normalized);

    // Curved optimization on a flat-embeddable metric stays near zero loss.
    let (kl, krec) = optimize_joint(&metric, &w, 2, 11, JointOptions::default());
    assert!(
        krec.final_stress.normalized <= 1e-3,
        "curved normalized {}",
        krec.final_stress.normalized
    );
    assert!(kl.check_domain().is_ok());

    // Path query agrees with the metric layer.
    let path = path_between(&graph, "A", "D").unwrap();
    assert_eq!(path.total_time, 150.0);
    assert_eq!(path.vertices.len(), 4);
}
