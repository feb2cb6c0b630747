//! The inertial Bregman alternating linearized iteration.
//!
//! One step, for block 1 and then block 2 (the second block sees the
//! fresh first block):
//!
//! ```text
//! y_i = x_i^k + α_i^k (x_i^k − x_i^{k−1})
//! z_i = x_i^k + β_i^k (x_i^k − x_i^{k−1})
//! t_i = −∇_{x_i} h⁻(z_i, ·) − τ_i^k (y_i − x_i^k)
//! x_i^{k+1} = argmin θ_i + h⁺ + ⟨·, t_i⟩ + τ_i^k D(·, x_i^k)
//! ```

use std::time::Instant;

use super::block::Block;
use super::diagnostics::{residual_from_step, theta_value};
use super::kernel::{KernelSpec, Kernels};
use super::params::{block_tau, compute_delta, descent_modulus, SolverParams};
use super::problem::CompositeProblem;
use super::trace::{IterateRecord, IterateTrace};
use crate::error::{Error, Result};

/// `w^k = ((x1^k, x2^k), (x1^{k−1}, x2^{k−1}))`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState<X1, X2> {
    pub x1: X1,
    pub x1_prev: X1,
    pub x2: X2,
    pub x2_prev: X2,
    pub k: usize,
}

impl<X1: Block, X2: Block> IterateState<X1, X2> {
    /// Starting point with zero initial momentum (`x^{−1} = x^0`).
    pub fn new(x1: X1, x2: X2) -> Self {
        Self {
            x1_prev: x1.clone(),
            x2_prev: x2.clone(),
            x1,
            x2,
            k: 0,
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.x1.norm_sq() + self.x2.norm_sq() + self.x1_prev.norm_sq() + self.x2_prev.norm_sq()
    }

    /// `‖w^{next} − w^{self}‖²`.
    pub fn step_norm_sq(&self, next: &Self) -> f64 {
        next.x1.dist_sq(&self.x1)
            + next.x2.dist_sq(&self.x2)
            + next.x1_prev.dist_sq(&self.x1_prev)
            + next.x2_prev.dist_sq(&self.x2_prev)
    }

    fn check_shapes(&self) -> Result<()> {
        if !self.x1.same_shape(&self.x1_prev) || !self.x2.same_shape(&self.x2_prev) {
            return Err(Error::Contract("iterate and previous iterate differ in shape".into()));
        }
        Ok(())
    }
}

/// `x + coeff·(x − x_prev)`.
pub fn extrapolate<B: Block>(x: &B, x_prev: &B, coeff: f64) -> Result<B> {
    if !x.same_shape(x_prev) {
        return Err(Error::Contract("extrapolation between blocks of different shapes".into()));
    }
    if !(coeff >= 0.0) {
        return Err(Error::Contract(format!("extrapolation coefficient must be >= 0, got {coeff}")));
    }
    Ok(x.lincomb(1.0 + coeff, x_prev, -coeff))
}

/// Everything an outer step computed on the way to `w^{k+1}`.
#[derive(Debug, Clone)]
pub struct StepDetails<X1, X2> {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub tau: [f64; 2],
    pub y1: X1,
    pub z1: X1,
    pub y2: X2,
    pub z2: X2,
    pub kernel1: KernelSpec<X1>,
    pub kernel2: KernelSpec<X2>,
}

/// One outer iteration. Returns the new state together with the
/// intermediate quantities used for diagnostics.
pub fn ibalm_step<P: CompositeProblem>(
    state: &IterateState<P::X1, P::X2>,
    problem: &mut P,
    params: &SolverParams,
    kernels: &Kernels<P::X1, P::X2>,
) -> Result<(IterateState<P::X1, P::X2>, StepDetails<P::X1, P::X2>)> {
    state.check_shapes()?;
    let k = state.k;
    let a1 = params.alpha_at(0, k);
    let b1 = params.beta_at(0, k);
    let y1 = extrapolate(&state.x1, &state.x1_prev, a1)?;
    let z1 = extrapolate(&state.x1, &state.x1_prev, b1)?;
    let tau1 = block_tau(params, 0, k, problem.lipschitz_x1(&state.x2))?;
    let g1 = problem.grad_h_minus_x1(&z1, &state.x2);
    // t1 = −∇h⁻(z1, x2^k) − τ1 (y1 − x1^k)
    let t1 = g1.lincomb(-1.0, &y1.diff(&state.x1), -tau1);
    let kernel1 = kernels.first(tau1)?;
    check_modulus(&kernel1, params.rho[0], "first")?;
    let x1_next = problem
        .prox_x1(&state.x1, &t1, tau1, &kernel1, &state.x2)
        .map_err(|e| step_error(k, e))?;

    let a2 = params.alpha_at(1, k);
    let b2 = params.beta_at(1, k);
    let y2 = extrapolate(&state.x2, &state.x2_prev, a2)?;
    let z2 = extrapolate(&state.x2, &state.x2_prev, b2)?;
    let tau2 = block_tau(params, 1, k, problem.lipschitz_x2(&x1_next))?;
    let g2 = problem.grad_h_minus_x2(&x1_next, &z2);
    let t2 = g2.lincomb(-1.0, &y2.diff(&state.x2), -tau2);
    let kernel2 = kernels.second(tau2)?;
    check_modulus(&kernel2, params.rho[1], "second")?;
    let x2_next = problem
        .prox_x2(&state.x2, &t2, tau2, &kernel2, &x1_next)
        .map_err(|e| step_error(k, e))?;

    if !x1_next.is_finite() {
        return Err(Error::NonFinite { what: "first block", iteration: k + 1 });
    }
    if !x2_next.is_finite() {
        return Err(Error::NonFinite { what: "second block", iteration: k + 1 });
    }

    let next = IterateState {
        x1_prev: state.x1.clone(),
        x2_prev: state.x2.clone(),
        x1: x1_next,
        x2: x2_next,
        k: k + 1,
    };
    let details = StepDetails {
        alpha: [a1, a2],
        beta: [b1, b2],
        tau: [tau1, tau2],
        y1,
        z1,
        y2,
        z2,
        kernel1,
        kernel2,
    };
    Ok((next, details))
}

fn check_modulus<B: Block>(kernel: &KernelSpec<B>, rho: f64, which: &str) -> Result<()> {
    if kernel.strong_convexity() + 1e-12 < rho {
        return Err(Error::Contract(format!(
            "{which} kernel is {}-strongly convex but rho = {rho}",
            kernel.strong_convexity()
        )));
    }
    Ok(())
}

fn step_error(k: usize, e: Error) -> Error {
    Error::Step {
        iteration: k + 1,
        source: Box::new(e),
    }
}

/// Runs the inertial scheme from `init` until the relative step norm falls
/// below `params.step_tol` or `params.max_iters` steps were taken.
///
/// The per-iteration descent inequality
/// `Θ(w^{k+1}) − Θ(w^k) ≤ −δ‖w^{k+1} − w^k‖²` is checked as the run
/// proceeds; a violation beyond `params.descent_rel_tol·(1 + |Θ|)` aborts
/// with [`Error::DescentViolation`].
pub fn ibalm_solve<P: CompositeProblem>(
    problem: &mut P,
    params: &SolverParams,
    kernels: &Kernels<P::X1, P::X2>,
    init: IterateState<P::X1, P::X2>,
) -> Result<(IterateState<P::X1, P::X2>, IterateTrace)> {
    params.validate()?;
    let delta = compute_delta(params);
    let modulus = descent_modulus(params);
    let start = Instant::now();

    let mut state = init;
    let mut theta = theta_value(&state, &*problem, delta);
    let mut trace = IterateTrace {
        delta,
        descent_modulus: modulus,
        initial_theta: theta,
        records: Vec::new(),
        converged: false,
    };

    for _ in 0..params.max_iters {
        let (next, details) = ibalm_step(&state, problem, params, kernels)?;
        let step_sq = state.step_norm_sq(&next);
        let step_norm = step_sq.sqrt();
        let relative_step = step_norm / (1.0 + state.norm_sq().sqrt());
        let phi = problem.objective(&next.x1, &next.x2);
        let theta_next = phi
            + 0.5 * delta.0 * next.x1.dist_sq(&next.x1_prev)
            + 0.5 * delta.1 * next.x2.dist_sq(&next.x2_prev);
        if !theta_next.is_finite() {
            return Err(Error::NonFinite { what: "objective", iteration: next.k });
        }
        let margin = theta - theta_next - modulus * step_sq;
        let tol = params.descent_rel_tol * (1.0 + theta.abs());
        if margin < -tol {
            return Err(Error::DescentViolation {
                iteration: next.k,
                margin,
                tolerance: tol,
            });
        }
        let residual = residual_from_step(&state, &next, &details, &*problem, delta);
        trace.records.push(IterateRecord {
            iter: next.k,
            phi,
            theta: theta_next,
            step_norm,
            relative_step,
            tau1: details.tau[0],
            tau2: details.tau[1],
            descent_margin: margin,
            subgrad_residual: residual,
            kernel_lipschitz: [
                details.kernel1.gradient_lipschitz(),
                details.kernel2.gradient_lipschitz(),
            ],
            elapsed: start.elapsed(),
        });
        log::debug!(
            "iter {:4}  phi {:.10e}  step {:.3e}  rel {:.3e}",
            next.k,
            phi,
            step_norm,
            relative_step
        );
        state = next;
        theta = theta_next;
        if relative_step < params.step_tol {
            trace.converged = true;
            break;
        }
    }
    Ok((state, trace))
}

/// The non-inertial baseline: the same loop with every `α_i^k` and
/// `β_i^k` forced to zero. Step sizes and `δ_i` still come from `params`.
pub fn ama_solve<P: CompositeProblem>(
    problem: &mut P,
    params: &SolverParams,
    kernels: &Kernels<P::X1, P::X2>,
    init: IterateState<P::X1, P::X2>,
) -> Result<(IterateState<P::X1, P::X2>, IterateTrace)> {
    ibalm_solve(problem, &params.without_inertia(), kernels, init)
}
