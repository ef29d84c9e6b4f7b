//! Load flow and loss-minimization toolkit.
//!
//! - [`network`]: per-unit network model and case file format
//! - [`admittance`]: bus admittance matrix
//! - [`solver`]: Newton-Raphson load flow with reactive limit handling
//! - [`losses`]: branch flows, losses and system totals
//! - [`strategies`]: load sharing, reactive injection, tap changing
//! - [`ga`]: genetic-algorithm optimal power flow
//! - [`report`]: tables, CSV, JSON and SVG renderings

pub mod admittance;
pub mod cases;
pub mod error;
pub mod ga;
mod linalg;
pub mod losses;
pub mod network;
pub mod report;
pub mod solver;
pub mod strategies;

pub use admittance::{branch_admittance, build_ybus, AdmittanceMatrix};
pub use error::{Error, Result, Violation};
pub use losses::{analyze, branch_current, branch_currents, branch_flows, total_losses, BranchFlow, LossReport};
pub use network::{
    apply_shunts, load_network, load_network_file, serialize_network, validate, Branch, Bus, BusKind, Network,
};
pub use solver::{
    build_jacobian, compute_injections, compute_mismatch, initial_state, solve, solve_from, BusPartition,
    LoadFlowSolution, SolverOptions, StateVector,
};
pub use strategies::{compare, inject_reactive, set_tap, share_load, ComparisonRow, Strategy};
