//! Exact checks: per-realization schedule chains, the two-node rate region
//! and its drift terms.

mod dtmc;
mod region;

pub use dtmc::{
    build_dtmc, build_joint_chain, chain_states, check_detailed_balance, cycle_product, joint_index,
    kolmogorov_closed_forms, kolmogorov_products, product_form, solve_stationary, stationary_residual,
    JointChainParams, JointState, StationaryDistribution, TransitionMatrix,
};
pub use region::{
    boundary_polyline, direction, distance_to_boundary, expected_service_rates, hausdorff, region_boundary,
    region_contains, RateRegion2, BOUNDARY_TOLERANCE,
};
