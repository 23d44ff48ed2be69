//! Experiment orchestration: configuration, seeded Monte-Carlo sweeps,
//! metrics, runtime benchmarking, and canned figure reproduction.

pub mod bench;
pub mod config;
pub mod figures;
pub mod metrics;
pub mod runner;
pub mod seed;

pub use bench::{runtime_bench, BenchReport, MethodRuntime, REFERENCE_RUNTIMES_S};
pub use config::{
    ExperimentConfig, GainModel, GeometrySpec, GridSettings, MethodTag, ReconSource,
    TrajectorySpec,
};
pub use figures::{run_figure, FigureOutput};
pub use metrics::{assign_sq_errors, assignment, pair_errors_deg, rmse, TrialRecord};
pub use runner::{
    draw_scene, estimate, prepare_input, run_monte_carlo, run_monte_carlo_without_bounds,
    run_trial, synth_blocks, MethodInput, RunSummary, SummaryRow, TrialScene,
};
pub use seed::derive_stream;
