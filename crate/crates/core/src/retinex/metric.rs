//! The metric kernel `M = γ I − (α/τ2) ∇ᵀ∇` that makes the reflectance
//! subproblem diagonal, and the resulting closed-form update.
//!
//! With `φ = ½‖·‖²_M` the stationarity condition of the reflectance step
//! is `α∇ᵀ∇(r − g) + τ2 M (r − r^k) + t2 = 0`, and since
//! `α∇ᵀ∇ + τ2 M = τ2 γ I`:
//!
//! ```text
//! r^{k+1} = (α ∇ᵀ∇ g + τ2 M r^k − t2) / (τ2 γ)
//! ```

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{neg_laplacian, LAPLACIAN_SPECTRAL_BOUND};
use crate::image::Image2D;
use crate::solver::{KernelSpec, MetricApply};

/// Metric kernel with `γ = margin · (α/τ2) · 8`. Returns the kernel and `γ`.
pub fn build_metric(alpha: f64, tau2: f64, margin: f64) -> Result<(KernelSpec<Image2D>, f64)> {
    validate(alpha, tau2, margin)?;
    let gamma = margin * alpha / tau2 * LAPLACIAN_SPECTRAL_BOUND;
    metric_kernel(alpha, tau2, gamma).map(|k| (k, gamma))
}

/// Like [`build_metric`] but raises `γ` when needed so that
/// `λ_min(M) ≥ min_modulus`.
pub fn build_metric_with_modulus(
    alpha: f64,
    tau2: f64,
    margin: f64,
    min_modulus: f64,
) -> Result<(KernelSpec<Image2D>, f64)> {
    validate(alpha, tau2, margin)?;
    let spread = alpha / tau2 * LAPLACIAN_SPECTRAL_BOUND;
    let gamma = f64::max(margin * spread, spread + min_modulus);
    metric_kernel(alpha, tau2, gamma).map(|k| (k, gamma))
}

fn validate(alpha: f64, tau2: f64, margin: f64) -> Result<()> {
    if !(alpha > 0.0) {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    if !(tau2 > 0.0 && tau2.is_finite()) {
        return Err(Error::param("tau2", format!("must be positive, got {tau2}")));
    }
    if !(margin > 1.0 && margin.is_finite()) {
        return Err(Error::param("gamma_margin", format!("must exceed 1, got {margin}")));
    }
    Ok(())
}

fn metric_kernel(alpha: f64, tau2: f64, gamma: f64) -> Result<KernelSpec<Image2D>> {
    let weight = alpha / tau2;
    let apply: MetricApply<Image2D> = Arc::new(move |u: &Image2D| {
        let mut out = u.scaled(gamma);
        out.axpy(-weight, &neg_laplacian(u));
        out
    });
    KernelSpec::metric(apply, gamma - weight * LAPLACIAN_SPECTRAL_BOUND, gamma)
}

/// Inputs for the reflectance tilt: the prox-center and gradient-point
/// extrapolations of `r`.
#[derive(Debug, Clone)]
pub struct ReflectanceExtrapolation {
    pub y2: Image2D,
    pub z2: Image2D,
}

/// `t2 = −β(l^{k+1} − s − z2) − τ2 (y2 − r^k)`.
pub fn reflectance_tilt(
    s: &Image2D,
    r: &Image2D,
    l_new: &Image2D,
    tau2: f64,
    beta: f64,
    ext: &ReflectanceExtrapolation,
) -> Image2D {
    let fidelity = l_new.sub(s).sub(&ext.z2).scaled(-beta);
    let mut t = fidelity;
    t.axpy(-tau2, &ext.y2.sub(r));
    t
}

/// Closed-form reflectance update for a given tilt.
pub fn closed_form_reflectance(
    r: &Image2D,
    lap_g: &Image2D,
    tilt: &Image2D,
    alpha: f64,
    tau2: f64,
    gamma: f64,
) -> Image2D {
    // τ2 M r = τ2 γ r − α ∇ᵀ∇ r
    let mut num = r.scaled(tau2 * gamma);
    num.axpy(-alpha, &neg_laplacian(r));
    num.axpy(alpha, lap_g);
    num.axpy(-1.0, tilt);
    num.scaled(1.0 / (tau2 * gamma))
}

/// `α∇ᵀ(∇r_new − ∇g) + τ2 M (r_new − r) + t2`, which vanishes at the exact
/// update.
pub fn reflectance_stationarity(
    r: &Image2D,
    r_new: &Image2D,
    lap_g: &Image2D,
    tilt: &Image2D,
    alpha: f64,
    tau2: f64,
    gamma: f64,
) -> Image2D {
    let mut res = neg_laplacian(r_new).scaled(alpha);
    res.axpy(-alpha, lap_g);
    let d = r_new.sub(r);
    let mut md = d.scaled(gamma);
    md.axpy(-alpha / tau2, &neg_laplacian(&d));
    res.axpy(tau2, &md);
    res.axpy(1.0, tilt);
    res
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_from_margin() {
        let (_, gamma) = build_metric(8.0, 8.0, 1.05).unwrap();
        assert!((gamma - 8.4).abs() < 1e-12);
    }

    #[test]
    fn modulus_floor_raises_gamma() {
        let (k, gamma) = build_metric_with_modulus(8.0, 8.0, 1.05, 1.0).unwrap();
        assert!((gamma - 9.0).abs() < 1e-12);
        assert!((k.strong_convexity() - 1.0).abs() < 1e-12);
        let (_, gamma) = build_metric_with_modulus(8.0, 8.0, 1.5, 1.0).unwrap();
        assert!((gamma - 12.0).abs() < 1e-12);
    }

    #[test]
    fn metric_scales_constants_by_gamma() {
        let (k, gamma) = build_metric(20.0, 15.3, 1.05).unwrap();
        let c = Image2D::filled(4, 6, 0.37);
        let mc = k.grad(&c);
        assert!(mc.sub(&c.scaled(gamma)).norm() < 1e-12);
    }

    #[test]
    fn invalid_arguments() {
        assert!(build_metric(0.0, 1.0, 1.05).is_err());
        assert!(build_metric(1.0, 0.0, 1.05).is_err());
        assert!(build_metric(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn zero_tilt_and_stationary_input_stays_put() {
        let r = Image2D::zeros(3, 3);
        let lap_g = Image2D::zeros(3, 3);
        let out = closed_form_reflectance(&r, &lap_g, &Image2D::zeros(3, 3), 20.0, 15.0, 11.0);
        assert_eq!(out.norm_sq(), 0.0);
    }
}
