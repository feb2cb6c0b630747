//! Generic inertial Bregman alternating linearized minimization for
//! two-block composite problems, with its parameter schedule and the
//! diagnostics that certify descent along a run.

mod block;
mod diagnostics;
mod engine;
mod kernel;
mod params;
mod problem;
mod trace;

pub use block::Block;
pub use diagnostics::{
    descent_check, subgradient_bound, subgradient_bound_for_trace, subgradient_residual, theta_from_parts,
    theta_value, DescentReport,
};
pub use engine::{ama_solve, extrapolate, ibalm_solve, ibalm_step, IterateState, StepDetails};
pub use kernel::{KernelKind, KernelSpec, Kernels, MetricApply};
pub use params::{
    block_tau, compute_delta, compute_tau, descent_modulus, tau_upper_bounds, Schedule, SolverParams,
};
pub use problem::CompositeProblem;
pub use trace::{IterateRecord, IterateTrace, TRACE_CSV_HEADER};
