//! Lyapunov function, descent verification and the explicit subgradient
//! bound along a run.

use super::block::Block;
use super::engine::{extrapolate, IterateState, StepDetails};
use super::kernel::Kernels;
use super::params::{block_tau, compute_delta, tau_upper_bounds, SolverParams};
use super::problem::CompositeProblem;
use super::trace::IterateTrace;
use crate::error::{Error, Result};

/// `Θ(w) = Φ(x1, x2) + (δ1/2)‖x1 − x1_prev‖² + (δ2/2)‖x2 − x2_prev‖²`.
pub fn theta_value<P: CompositeProblem>(
    state: &IterateState<P::X1, P::X2>,
    problem: &P,
    delta: (f64, f64),
) -> f64 {
    theta_from_parts(
        problem.objective(&state.x1, &state.x2),
        state.x1.dist_sq(&state.x1_prev),
        state.x2.dist_sq(&state.x2_prev),
        delta,
    )
}

/// `Θ` from its ingredients: `Φ`, `‖Δx1‖²`, `‖Δx2‖²`.
pub fn theta_from_parts(phi: f64, dx1_sq: f64, dx2_sq: f64, delta: (f64, f64)) -> f64 {
    phi + 0.5 * delta.0 * dx1_sq + 0.5 * delta.1 * dx2_sq
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentReport {
    /// `δ` used in the check.
    pub modulus: f64,
    /// `Θ(w^k) − Θ(w^{k+1}) − δ‖Δw‖²`, one entry per trace record.
    pub margins: Vec<f64>,
    /// Iterations (1-based, as in the trace) whose margin fell below `−tol`.
    pub violations: Vec<usize>,
    /// Smallest margin observed.
    pub worst_margin: f64,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-verifies `Θ(w^{k+1}) − Θ(w^k) ≤ −δ‖w^{k+1} − w^k‖²` along `trace`
/// with `δ = (ε/2)·min{δ1, δ2}`, allowing slack `rel_tol·(1 + |Θ(w^k)|)`.
pub fn descent_check(trace: &IterateTrace, delta: (f64, f64), epsilon: f64, rel_tol: f64) -> DescentReport {
    let modulus = 0.5 * epsilon * delta.0.min(delta.1);
    let mut margins = Vec::with_capacity(trace.len());
    let mut violations = Vec::new();
    let mut prev = trace.initial_theta;
    for r in &trace.records {
        let m = prev - r.theta - modulus * r.step_norm * r.step_norm;
        if m < -rel_tol * (1.0 + prev.abs()) {
            violations.push(r.iter);
        }
        margins.push(m);
        prev = r.theta;
    }
    let worst_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    DescentReport {
        modulus,
        margins,
        violations,
        worst_margin,
    }
}

/// Norm of the explicit element of `∂Θ(w^{k+1})` obtained by substituting
/// the subproblem optimality conditions:
///
/// ```text
/// e11 = ∇₁h⁺(x1', x2') − ∇₁h⁺(x1', x2) + ∇₁h⁻(z1, x2) − ∇₁h⁻(x1', x2')
///       + τ1 (y1 − x1) + δ1 (x1' − x1) − τ1 (∇ψ(x1') − ∇ψ(x1))
/// e12 = ∇₂h⁻(x1', z2) − ∇₂h⁻(x1', x2')
///       + τ2 (y2 − x2) + δ2 (x2' − x2) − τ2 (∇φ(x2') − ∇φ(x2))
/// e21 = δ1 (x1 − x1'),  e22 = δ2 (x2 − x2')
/// ```
pub(crate) fn residual_from_step<P: CompositeProblem>(
    prev: &IterateState<P::X1, P::X2>,
    next: &IterateState<P::X1, P::X2>,
    d: &StepDetails<P::X1, P::X2>,
    problem: &P,
    delta: (f64, f64),
) -> f64 {
    let (tau1, tau2) = (d.tau[0], d.tau[1]);
    let dx1 = next.x1.diff(&prev.x1);
    let dx2 = next.x2.diff(&prev.x2);

    let mut e11 = problem
        .grad_h_minus_x1(&d.z1, &prev.x2)
        .diff(&problem.grad_h_minus_x1(&next.x1, &next.x2));
    if let (Some(a), Some(b)) = (
        problem.grad_h_plus_x1(&next.x1, &next.x2),
        problem.grad_h_plus_x1(&next.x1, &prev.x2),
    ) {
        e11 = e11.lincomb(1.0, &a.diff(&b), 1.0);
    }
    e11 = e11.lincomb(1.0, &d.y1.diff(&prev.x1), tau1);
    e11 = e11.lincomb(1.0, &dx1, delta.0);
    let psi_diff = d.kernel1.grad(&next.x1).diff(&d.kernel1.grad(&prev.x1));
    e11 = e11.lincomb(1.0, &psi_diff, -tau1);

    let mut e12 = problem
        .grad_h_minus_x2(&next.x1, &d.z2)
        .diff(&problem.grad_h_minus_x2(&next.x1, &next.x2));
    e12 = e12.lincomb(1.0, &d.y2.diff(&prev.x2), tau2);
    e12 = e12.lincomb(1.0, &dx2, delta.1);
    let phi_diff = d.kernel2.grad(&next.x2).diff(&d.kernel2.grad(&prev.x2));
    e12 = e12.lincomb(1.0, &phi_diff, -tau2);

    let e21_sq = delta.0 * delta.0 * dx1.norm_sq();
    let e22_sq = delta.1 * delta.1 * dx2.norm_sq();
    (e11.norm_sq() + e12.norm_sq() + e21_sq + e22_sq).sqrt()
}

/// Recomputes the step quantities from two consecutive states of an
/// actual run and returns the explicit subgradient-element norm.
pub fn subgradient_residual<P: CompositeProblem>(
    state_k: &IterateState<P::X1, P::X2>,
    state_k1: &IterateState<P::X1, P::X2>,
    problem: &P,
    params: &SolverParams,
    kernels: &Kernels<P::X1, P::X2>,
) -> Result<f64> {
    if state_k1.k != state_k.k + 1 {
        return Err(Error::Contract(format!(
            "states are not consecutive: k = {} then {}",
            state_k.k, state_k1.k
        )));
    }
    let k = state_k.k;
    let a1 = params.alpha_at(0, k);
    let b1 = params.beta_at(0, k);
    let a2 = params.alpha_at(1, k);
    let b2 = params.beta_at(1, k);
    let tau1 = block_tau(params, 0, k, problem.lipschitz_x1(&state_k.x2))?;
    let tau2 = block_tau(params, 1, k, problem.lipschitz_x2(&state_k1.x1))?;
    let details = StepDetails {
        alpha: [a1, a2],
        beta: [b1, b2],
        tau: [tau1, tau2],
        y1: extrapolate(&state_k.x1, &state_k.x1_prev, a1)?,
        z1: extrapolate(&state_k.x1, &state_k.x1_prev, b1)?,
        y2: extrapolate(&state_k.x2, &state_k.x2_prev, a2)?,
        z2: extrapolate(&state_k.x2, &state_k.x2_prev, b2)?,
        kernel1: kernels.first(tau1)?,
        kernel2: kernels.second(tau2)?,
    };
    Ok(residual_from_step(state_k, state_k1, &details, problem, compute_delta(params)))
}

/// The constant `γ = 2√2·γ̃` with
///
/// ```text
/// γ̃ = max{ L + λ2⁺ + 2δ2 + τ2⁺ L_φ,  τ1⁺ ᾱ1 + β̄1 L⁻,
///          2δ1 + τ1⁺ L_ψ,  λ2⁺ β̄2 + τ2⁺ ᾱ2 }
/// ```
///
/// where `L = L⁺ + L⁻` and `L_ψ, L_φ` bound the kernel gradients' moduli
/// over the run.
pub fn subgradient_bound(params: &SolverParams, coupling: (f64, f64), kernel_lipschitz: (f64, f64)) -> f64 {
    let (d1, d2) = compute_delta(params);
    let (t1, t2) = tau_upper_bounds(params);
    let (l_plus, l_minus) = coupling;
    let l = l_plus + l_minus;
    let lam2 = params.lambda_plus[1];
    let (l_psi, l_phi) = kernel_lipschitz;
    let candidates = [
        l + lam2 + 2.0 * d2 + t2 * l_phi,
        t1 * params.alpha_bar[0] + params.beta_bar[0] * l_minus,
        2.0 * d1 + t1 * l_psi,
        lam2 * params.beta_bar[1] + t2 * params.alpha_bar[1],
    ];
    let tilde = candidates.into_iter().fold(0.0, f64::max);
    2.0 * std::f64::consts::SQRT_2 * tilde
}

/// [`subgradient_bound`] with `L_ψ`, `L_φ` taken as the largest kernel
/// moduli recorded in `trace`.
pub fn subgradient_bound_for_trace(params: &SolverParams, coupling: (f64, f64), trace: &IterateTrace) -> f64 {
    let (mut lpsi, mut lphi) = (0.0f64, 0.0f64);
    for r in &trace.records {
        lpsi = lpsi.max(r.kernel_lipschitz[0]);
        lphi = lphi.max(r.kernel_lipschitz[1]);
    }
    subgradient_bound(params, coupling, (lpsi, lphi))
}
