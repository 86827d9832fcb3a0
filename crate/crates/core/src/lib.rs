//! Road networks to time-distance maps.
//!
//! The pipeline: parse a road-network description into a directed graph
//! with travel-time arc weights, derive the all-pairs time-distance matrix,
//! and embed the vertices in a low-dimensional space so that layout
//! distances track travel times. The embedding step offers classical
//! (spectral) MDS, stress majorization, pairwise stochastic gradient
//! descent, and a constant-curvature variant that learns the curvature
//! jointly with the layout.

pub mod classical;
pub mod embedding;
pub mod kspace;
pub mod linalg;
pub mod majorization;
pub mod metric;
pub mod rng;
pub mod road_graph;
pub mod run;
pub mod sgd;
pub mod synthetic;

pub use classical::{classical_mds, classical_mds_full, double_center, ClassicalMds};
pub use embedding::{
    encode_lookup, procrustes_align, stress, stress_gradient, EmbedError, EmbeddingTable, Layout,
    StressReport,
};
pub use kspace::{
    k_distance, k_stress, mobius_add, optimize_joint, retract, Curvature, JointOptions, KLayout,
    KspaceError,
};
pub use majorization::{
    bound_fz, majorize_step, run_majorization, MajorizationState, MajorizeInit, MajorizeOptions,
};
pub use metric::{
    all_pairs_times, pair_count, symmetrize, weights, Alpha, MetricError, SymmetrizePolicy,
    TimeDistanceMatrix, TravelTimeMatrix, WeightMatrix,
};
pub use road_graph::{
    build_graph, build_graph_with, parse_network, path_between, IngestMode, RoadGraph,
    RoadGraphError, RoadNetwork, RoadPath, RoadSegment,
};
pub use run::{compare_runs, median, RunError, RunRecord, RunStats};
pub use sgd::{run_sgd, sgd_step, InvalidSchedule, SgdSchedule};
pub use synthetic::{generate, Family, Instance};
