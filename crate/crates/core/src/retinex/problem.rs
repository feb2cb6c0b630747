//! The Retinex energy cast as a two-block composite problem with
//! `(x1, x2) = (l, r)`, `θ1 = ‖∇l‖₁`, `θ2 = (α/2)‖∇r − ∇g‖²`, `h⁺ = 0` and
//! `h⁻ = −(β/2)‖l − s − r‖²`.

use crate::error::{Error, Result};
use crate::fourier::CirculantSolver;
use crate::grid::{gradient, neg_laplacian, tv_norm};
use crate::image::Image2D;
use crate::solver::{CompositeProblem, KernelKind, KernelSpec, Kernels};

use super::config::RetinexConfig;
use super::metric::{build_metric_with_modulus, closed_form_reflectance};
use super::tv_prox::{tv_prox_objective, AdmmSettings, TvProxSolver, TvProxState};

/// Counters collected from the inner solves of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InnerStats {
    /// ADMM iterations per outer step.
    pub admm_iterations: Vec<usize>,
    /// Outer steps where the ADMM output did not improve on the anchor and
    /// the anchor was kept.
    pub safeguard_hits: usize,
    /// Largest `‖stationarity‖ / (1 + ‖r^{k+1}‖)` of the reflectance step.
    pub max_reflectance_residual: f64,
}

pub struct RetinexProblem {
    s: Image2D,
    g: Image2D,
    lap_g: Image2D,
    alpha: f64,
    beta: f64,
    admm: AdmmSettings,
    tv: TvProxSolver,
    fft: CirculantSolver,
    warm: Option<TvProxState>,
    stats: InnerStats,
}

impl RetinexProblem {
    /// `s` is the log observation and `g` the edge prior.
    pub fn new(s: Image2D, g: Image2D, cfg: &RetinexConfig) -> Result<Self> {
        cfg.validate()?;
        s.ensure_same_shape(&g)?;
        let (m, n) = s.shape();
        Ok(Self {
            lap_g: neg_laplacian(&g),
            s,
            g,
            alpha: cfg.alpha,
            beta: cfg.beta,
            admm: cfg.admm_settings(),
            tv: TvProxSolver::new(m, n),
            fft: CirculantSolver::new(m, n),
            warm: None,
            stats: InnerStats::default(),
        })
    }

    pub fn observation(&self) -> &Image2D {
        &self.s
    }

    pub fn edge_prior(&self) -> &Image2D {
        &self.g
    }

    pub fn stats(&self) -> &InnerStats {
        &self.stats
    }

    /// `‖∇l‖₁ + (α/2)‖∇r − ∇g‖² + (β/2)‖l − s − r‖²`.
    pub fn energy(&self, l: &Image2D, r: &Image2D) -> f64 {
        let d = r.sub(&self.g);
        tv_norm(l) + 0.5 * self.alpha * gradient(&d).norm_sq() + 0.5 * self.beta * self.fidelity(l, r).norm_sq()
    }

    fn fidelity(&self, l: &Image2D, r: &Image2D) -> Image2D {
        l.sub(&self.s).sub(r)
    }
}

/// Euclidean kernel for `l`, metric kernel `M_k` for `r` with
/// `λ_min(M_k) ≥ rho2`.
pub fn retinex_kernels(cfg: &RetinexConfig, rho2: f64) -> Kernels<Image2D, Image2D> {
    let (alpha, margin) = (cfg.alpha, cfg.gamma_margin);
    Kernels::new(
        |_| Ok(KernelSpec::euclidean()),
        move |tau2| build_metric_with_modulus(alpha, tau2, margin, rho2).map(|(k, _)| k),
    )
}

impl CompositeProblem for RetinexProblem {
    type X1 = Image2D;
    type X2 = Image2D;

    fn objective(&self, l: &Image2D, r: &Image2D) -> f64 {
        self.energy(l, r)
    }

    fn grad_h_minus_x1(&self, l: &Image2D, r: &Image2D) -> Image2D {
        self.fidelity(l, r).scaled(-self.beta)
    }

    fn grad_h_minus_x2(&self, l: &Image2D, r: &Image2D) -> Image2D {
        self.fidelity(l, r).scaled(self.beta)
    }

    fn lipschitz_x1(&self, _r: &Image2D) -> f64 {
        self.beta
    }

    fn lipschitz_x2(&self, _l: &Image2D) -> f64 {
        self.beta
    }

    fn coupling_lipschitz(&self) -> (f64, f64) {
        (0.0, 2.0 * self.beta)
    }

    fn prox_x1(
        &mut self,
        anchor: &Image2D,
        tilt: &Image2D,
        tau: f64,
        kernel: &KernelSpec<Image2D>,
        _r: &Image2D,
    ) -> Result<Image2D> {
        if !kernel.is_euclidean() {
            return Err(Error::Contract("the illumination step needs a Euclidean kernel".into()));
        }
        let center = anchor.sub(&tilt.scaled(1.0 / tau));
        let warm = match self.warm.take() {
            Some(w) if w.l.shape() == anchor.shape() => w,
            _ => TvProxState::from_image(anchor),
        };
        let out = self.tv.solve(&center, tau, self.admm, &warm)?;
        self.stats.admm_iterations.push(out.iterations);
        let l = out.state.l.clone();
        let keep_anchor = tv_prox_objective(&l, &center, tau) > tv_prox_objective(anchor, &center, tau);
        self.warm = Some(out.state);
        if keep_anchor {
            self.stats.safeguard_hits += 1;
            log::debug!("illumination step kept the anchor");
            return Ok(anchor.clone());
        }
        Ok(l)
    }

    fn prox_x2(
        &mut self,
        anchor: &Image2D,
        tilt: &Image2D,
        tau: f64,
        kernel: &KernelSpec<Image2D>,
        _l: &Image2D,
    ) -> Result<Image2D> {
        match kernel.kind() {
            KernelKind::Euclidean => {
                // (α∇ᵀ∇ + τ I) r = α∇ᵀ∇g + τ anchor − tilt
                let mut rhs = anchor.scaled(tau);
                rhs.axpy(self.alpha, &self.lap_g);
                rhs.axpy(-1.0, tilt);
                Ok(self.fft.solve(tau, self.alpha, &rhs))
            }
            KernelKind::MetricQuadratic(_) => {
                let gamma = kernel.gradient_lipschitz();
                let r = closed_form_reflectance(anchor, &self.lap_g, tilt, self.alpha, tau, gamma);
                // α∇ᵀ∇(r − g) + τ2·M(r − anchor) + t2, with M taken from the kernel itself
                let mut res = neg_laplacian(&r).scaled(self.alpha);
                res.axpy(-self.alpha, &self.lap_g);
                res.axpy(tau, &kernel.grad(&r.sub(anchor)));
                res.axpy(1.0, tilt);
                let rel = res.norm() / (1.0 + r.norm());
                self.stats.max_reflectance_residual = self.stats.max_reflectance_residual.max(rel);
                if rel > 1e-6 {
                    return Err(Error::Contract(format!(
                        "reflectance kernel is not of the form γI − (α/τ2)∇ᵀ∇ (stationarity residual {rel:.3e})"
                    )));
                }
                Ok(r)
            }
        }
    }
}
