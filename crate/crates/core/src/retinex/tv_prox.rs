//! Proximal map of isotropic total variation,
//! `argmin_l ‖∇l‖₁ + (τ/2)‖l − c‖²`, by ADMM on the split `p = ∇l`.
//!
//! ```text
//! l  ← (τ I + η ∇ᵀ∇)⁻¹ (τ c + div ξ − η div p)
//! p  ← shrink(∇l + ξ/η, 1/η)
//! ξ  ← ξ + η (∇l − p)
//! ```
//!
//! The `l` system is circulant and is solved exactly in the Fourier basis.

use crate::error::{Error, Result};
use crate::fourier::CirculantSolver;
use crate::grid::{divergence, gradient, tv_norm};
use crate::image::{Image2D, VectorField2D};

/// Per-pixel soft-thresholding of vector magnitudes.
pub fn shrink_isotropic(p: &VectorField2D, threshold: f64) -> VectorField2D {
    assert!(threshold >= 0.0, "threshold must be nonnegative");
    let (m, n) = p.shape();
    let px = p.px().as_slice();
    let py = p.py().as_slice();
    let mut ox = Vec::with_capacity(m * n);
    let mut oy = Vec::with_capacity(m * n);
    for (&a, &b) in px.iter().zip(py) {
        let mag = (a * a + b * b).sqrt();
        let s = if mag > 0.0 { (mag - threshold).max(0.0) / mag } else { 0.0 };
        ox.push(s * a);
        oy.push(s * b);
    }
    VectorField2D::new(Image2D::from_raw(m, n, ox), Image2D::from_raw(m, n, oy)).expect("same shape")
}

/// ADMM iterate `(l, p, ξ)`; reusing the last one across nearby
/// problems cuts the inner iteration count substantially.
#[derive(Debug, Clone, PartialEq)]
pub struct TvProxState {
    pub l: Image2D,
    pub p: VectorField2D,
    pub xi: VectorField2D,
}

impl TvProxState {
    /// Cold start at `l` with `p = ∇l` and zero multiplier.
    pub fn from_image(l: &Image2D) -> Self {
        let (m, n) = l.shape();
        Self {
            l: l.clone(),
            p: gradient(l),
            xi: VectorField2D::zeros(m, n),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TvProxOutput {
    pub state: TvProxState,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl TvProxOutput {
    pub fn solution(&self) -> &Image2D {
        &self.state.l
    }
}

/// `‖∇l‖₁ + (τ/2)‖l − c‖²`.
pub fn tv_prox_objective(l: &Image2D, center: &Image2D, tau: f64) -> f64 {
    tv_norm(l) + 0.5 * tau * l.sub(center).norm_sq()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmSettings {
    pub penalty: f64,
    pub max_iters: usize,
    pub tol: f64,
}

/// ADMM driver with a cached Fourier solver for one grid shape.
#[derive(Debug)]
pub struct TvProxSolver {
    fft: CirculantSolver,
}

impl TvProxSolver {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            fft: CirculantSolver::new(rows, cols),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.fft.shape()
    }

    /// Runs ADMM from `warm` until both relative residuals
    /// `‖∇l − p‖/(1 + ‖∇l‖)` and `η‖div(p⁺ − p)‖/(1 + ‖div ξ‖)` are at
    /// most `settings.tol`.
    pub fn solve(
        &self,
        center: &Image2D,
        tau: f64,
        settings: AdmmSettings,
        warm: &TvProxState,
    ) -> Result<TvProxOutput> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::param("tau1", format!("must be positive, got {tau}")));
        }
        let eta = settings.penalty;
        if !(eta > 0.0) {
            return Err(Error::param("admm_penalty", format!("must be positive, got {eta}")));
        }
        center.ensure_same_shape(&warm.l)?;
        if center.shape() != self.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                found: center.shape(),
            });
        }

        let mut p = warm.p.clone();
        let mut xi = warm.xi.clone();
        let mut div_p = divergence(&p);
        let mut div_xi = divergence(&xi);
        let scaled_center = center.scaled(tau);
        let (mut primal, mut dual) = (f64::INFINITY, f64::INFINITY);
        for it in 1..=settings.max_iters {
            let mut rhs = scaled_center.add(&div_xi);
            rhs.axpy(-eta, &div_p);
            let l = self.fft.solve(tau, eta, &rhs);

            let gl = gradient(&l);
            let mut shifted = gl.clone();
            shifted.axpy(1.0 / eta, &xi);
            let p_next = shrink_isotropic(&shifted, 1.0 / eta);
            let gap = gl.sub(&p_next);
            xi.axpy(eta, &gap);

            let div_p_next = divergence(&p_next);
            div_xi = divergence(&xi);
            primal = gap.norm() / (1.0 + gl.norm());
            dual = eta * div_p_next.sub(&div_p).norm() / (1.0 + div_xi.norm());
            p = p_next;
            div_p = div_p_next;
            if primal <= settings.tol && dual <= settings.tol {
                return Ok(TvProxOutput {
                    state: TvProxState { l, p, xi },
                    iterations: it,
                    primal_residual: primal,
                    dual_residual: dual,
                });
            }
        }
        Err(Error::InnerNonConvergence {
            iterations: settings.max_iters,
            residual: primal.max(dual),
            tolerance: settings.tol,
        })
    }
}

/// One-shot TV prox around `center` with step `tau`, warm-started from
/// `warm_start`.
pub fn l_subproblem_solve(
    center: &Image2D,
    tau: f64,
    settings: AdmmSettings,
    warm_start: &TvProxState,
) -> Result<TvProxOutput> {
    let (m, n) = center.shape();
    TvProxSolver::new(m, n).solve(center, tau, settings, warm_start)
}
