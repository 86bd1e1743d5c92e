//! Experiment runner: simulation loop, stability classification, sweeps,
//! empirical boundary search, config and output files.

mod config;
mod dtmc_check;
mod output;
mod sim;
mod stats;
mod sweep;

pub use config::{DecisionMode, ExperimentConfig, DEFAULT_HORIZON, DEFAULT_SEEDS};
pub use dtmc_check::{
    check_joint_chain, check_product_form, dtmc_report, DtmcReport, JointChainCheck, ProductFormCheck,
    BALANCE_TOLERANCE, PRODUCT_FORM_TOLERANCE,
};
pub use output::{write_header, write_oracle_csv, write_region_csv, write_sweep_csv};
pub use sim::{data_plane, run_once, run_traced, RunResult, SlotStep, Simulator};
pub use stats::{
    aggregate_ci, classify_stability, Stability, Trajectory, MAX_TRAJECTORY_POINTS, MIN_CLASSIFY_SAMPLES,
    SLOPE_THRESHOLD,
};
pub use sweep::{
    boundary_oracle, default_box, gamma_grid, grid_2d, run_point, run_seeds, sweep_grid, GridPoint, OraclePoint,
    PointSummary, ORACLE_MIN_HORIZON, ORACLE_RESOLUTION,
};
