//! Inertial coefficients and the proximal step-size schedule.
//!
//! For block `i` with strong-convexity modulus `ρ_i`, extrapolation caps
//! `ᾱ_i, β̄_i` and Lipschitz cap `λ_i⁺`:
//!
//! ```text
//! δ_i   = (ᾱ_i + β̄_i ρ_i) / ((1 − ε) ρ_i − 2 ᾱ_i) · λ_i⁺
//! τ_i^k = ((1 + ε) δ_i + (1 + β_i^k) L_i^k) / (ρ_i − α_i^k)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A per-iteration coefficient sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Schedule {
    Constant(f64),
    /// Explicit values; the last one is held once the list runs out.
    Sequence(Vec<f64>),
}

impl Schedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            Schedule::Constant(v) => *v,
            Schedule::Sequence(vs) => vs.get(k).or(vs.last()).copied().unwrap_or(0.0),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Schedule::Constant(v) => vec![*v],
            Schedule::Sequence(vs) => vs.clone(),
        }
    }

    fn is_zero(&self) -> bool {
        self.values().iter().all(|&v| v == 0.0)
    }
}

/// Parameters of the inertial scheme. Indices `[0]` and `[1]` refer to the
/// first and second block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub epsilon: f64,
    pub alpha_bar: [f64; 2],
    pub beta_bar: [f64; 2],
    pub rho: [f64; 2],
    pub lambda_plus: [f64; 2],
    /// Prox-center extrapolation `α_i^k`.
    pub alpha: [Schedule; 2],
    /// Gradient-point extrapolation `β_i^k`.
    pub beta: [Schedule; 2],
    pub tau_floor: f64,
    pub max_iters: usize,
    /// Stop once `‖w^{k+1} − w^k‖ / (1 + ‖w^k‖)` drops below this.
    pub step_tol: f64,
    /// Relative slack on the per-iteration descent inequality.
    pub descent_rel_tol: f64,
}

impl SolverParams {
    /// Default parameterization for Lipschitz caps `lambda_plus` on both
    /// blocks with `ε = 0.1`. See [`SolverParams::with_epsilon`].
    pub fn with_lipschitz_cap(lambda_plus: f64) -> Self {
        Self::with_epsilon(0.1, lambda_plus)
    }

    /// `ρ_i = 1`, `ᾱ_i = max(½ − ε, 0)`, `β̄_i = 1 − ε`, constant
    /// `α_i^k = min(0.2, 0.99·ᾱ_i)` and `β_i^k = min(0.5, β̄_i)`.
    pub fn with_epsilon(epsilon: f64, lambda_plus: f64) -> Self {
        let alpha_bar = (0.5 - epsilon).max(0.0);
        let beta_bar = 1.0 - epsilon;
        let a = Schedule::Constant(f64::min(0.2, 0.99 * alpha_bar));
        let b = Schedule::Constant(f64::min(0.5, beta_bar));
        Self {
            epsilon,
            alpha_bar: [alpha_bar; 2],
            beta_bar: [beta_bar; 2],
            rho: [1.0; 2],
            lambda_plus: [lambda_plus; 2],
            alpha: [a.clone(), a],
            beta: [b.clone(), b],
            tau_floor: 1e-8,
            max_iters: 500,
            step_tol: 1e-5,
            descent_rel_tol: 1e-8,
        }
    }

    /// Same parameters with every inertial coefficient forced to zero.
    pub fn without_inertia(&self) -> Self {
        Self {
            alpha: [Schedule::Constant(0.0), Schedule::Constant(0.0)],
            beta: [Schedule::Constant(0.0), Schedule::Constant(0.0)],
            ..self.clone()
        }
    }

    pub fn has_inertia(&self) -> bool {
        !(self.alpha.iter().all(Schedule::is_zero) && self.beta.iter().all(Schedule::is_zero))
    }

    pub fn alpha_at(&self, block: usize, k: usize) -> f64 {
        self.alpha[block].at(k)
    }

    pub fn beta_at(&self, block: usize, k: usize) -> f64 {
        self.beta[block].at(k)
    }

    pub fn validate(&self) -> Result<()> {
        let eps = self.epsilon;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::param("epsilon", format!("must lie in (0, 1), got {eps}")));
        }
        for i in 0..2 {
            let rho = self.rho[i];
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::param("rho", format!("block {} modulus must be positive, got {rho}", i + 1)));
            }
            let cap = (1.0 - eps) * rho / 2.0;
            let ab = self.alpha_bar[i];
            if !(ab >= 0.0 && ab < cap) {
                return Err(Error::param(
                    "alpha_bar",
                    format!("block {} bound {ab} must satisfy 0 <= alpha_bar < (1-eps)*rho/2 = {cap}", i + 1),
                ));
            }
            let bb = self.beta_bar[i];
            if !(bb >= 0.0 && bb.is_finite()) {
                return Err(Error::param("beta_bar", format!("block {} bound must be >= 0, got {bb}", i + 1)));
            }
            let lp = self.lambda_plus[i];
            if !(lp >= 0.0 && lp.is_finite()) {
                return Err(Error::param("lambda_plus", format!("block {} cap must be >= 0, got {lp}", i + 1)));
            }
            for v in self.alpha[i].values() {
                if !(0.0..=ab).contains(&v) {
                    return Err(Error::param(
                        "alpha",
                        format!("block {} coefficient {v} outside [0, {ab}]", i + 1),
                    ));
                }
            }
            for v in self.beta[i].values() {
                if !(0.0..=bb).contains(&v) {
                    return Err(Error::param(
                        "beta",
                        format!("block {} coefficient {v} outside [0, {bb}]", i + 1),
                    ));
                }
            }
        }
        if !(self.tau_floor > 0.0) {
            return Err(Error::param("tau_floor", "must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be at least 1"));
        }
        if !(self.step_tol > 0.0) {
            return Err(Error::param("step_tol", "must be positive"));
        }
        if !(self.descent_rel_tol >= 0.0) {
            return Err(Error::param("descent_rel_tol", "must be nonnegative"));
        }
        Ok(())
    }
}

/// `(δ1, δ2)`, the weights of the successive-difference terms.
pub fn compute_delta(params: &SolverParams) -> (f64, f64) {
    let d = |i: usize| {
        let rho = params.rho[i];
        (params.alpha_bar[i] + params.beta_bar[i] * rho)
            / ((1.0 - params.epsilon) * rho - 2.0 * params.alpha_bar[i])
            * params.lambda_plus[i]
    };
    (d(0), d(1))
}

/// Step size for one block at iteration `k` given the current Lipschitz
/// estimate `lipschitz`. Block index is 0 or 1.
pub fn block_tau(params: &SolverParams, block: usize, k: usize, lipschitz: f64) -> Result<f64> {
    let cap = params.lambda_plus[block];
    if !(lipschitz >= 0.0 && lipschitz <= cap) {
        return Err(Error::Contract(format!(
            "block {} Lipschitz estimate {lipschitz} outside [0, {cap}]",
            block + 1
        )));
    }
    let (d1, d2) = compute_delta(params);
    let delta = if block == 0 { d1 } else { d2 };
    let a = params.alpha_at(block, k);
    let b = params.beta_at(block, k);
    let rho = params.rho[block];
    if a >= rho {
        return Err(Error::Contract(format!(
            "block {} coefficient alpha={a} must stay below rho={rho}",
            block + 1
        )));
    }
    let tau = ((1.0 + params.epsilon) * delta + (1.0 + b) * lipschitz) / (rho - a);
    Ok(tau.max(params.tau_floor))
}

/// `(τ1^k, τ2^k)` for Lipschitz estimates `l1 = L₁⁻(x2^k)` and
/// `l2 = L₂⁻(x1^{k+1})`.
pub fn compute_tau(k: usize, params: &SolverParams, l1: f64, l2: f64) -> Result<(f64, f64)> {
    Ok((block_tau(params, 0, k, l1)?, block_tau(params, 1, k, l2)?))
}

/// Uniform upper bounds `(τ1⁺, τ2⁺)` over all admissible iterations.
pub fn tau_upper_bounds(params: &SolverParams) -> (f64, f64) {
    let (d1, d2) = compute_delta(params);
    let bound = |i: usize, delta: f64| {
        let t = ((1.0 + params.epsilon) * delta + (1.0 + params.beta_bar[i]) * params.lambda_plus[i])
            / (params.rho[i] - params.alpha_bar[i]);
        t.max(params.tau_floor)
    };
    (bound(0, d1), bound(1, d2))
}

/// Modulus `δ = (ε/2)·min{δ1, δ2}` of the per-iteration descent.
pub fn descent_modulus(params: &SolverParams) -> f64 {
    let (d1, d2) = compute_delta(params);
    0.5 * params.epsilon * d1.min(d2)
}
