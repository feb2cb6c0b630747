//! Edge-guided Retinex decomposition in the log domain.
//!
//! An observation `S ∈ (0, 1]` is written `s = log S = l − r` with log
//! illumination `l` and negative log reflectance `r`, and `(l, r)`
//! minimizes
//!
//! ```text
//! E(l, r) = ‖∇l‖₁ + (α/2)‖∇r − ∇g‖² + (β/2)‖l − s − r‖²
//! ```
//!
//! where `g` is an edge prior. The inertial alternating scheme of
//! [`crate::solver`] is run with a Euclidean kernel on `l` (a TV prox,
//! solved by ADMM) and the metric kernel `M_k` on `r` (a closed form).

mod color;
mod config;
mod metric;
mod problem;
mod tv_prox;

pub use color::{enhance_color, hsv_to_rgb, merge_color, rgb_to_hsv, split_color, ColorEnhancement, ColorSplit};
pub use config::{ColorMode, ComposeMode, RetinexConfig};
pub use metric::{
    build_metric, build_metric_with_modulus, closed_form_reflectance, reflectance_stationarity, reflectance_tilt,
    ReflectanceExtrapolation,
};
pub use problem::{retinex_kernels, InnerStats, RetinexProblem};
pub use tv_prox::{
    l_subproblem_solve, shrink_isotropic, tv_prox_objective, AdmmSettings, TvProxOutput, TvProxSolver, TvProxState,
};

use crate::error::{Error, Result};
use crate::grid::{classical_edge, gradient, tv_norm};
use crate::image::Image2D;
use crate::solver::{ibalm_solve, IterateState, IterateTrace, SolverParams};

/// `(s, l, r, g)` for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDomainState {
    pub s: Image2D,
    pub l: Image2D,
    pub r: Image2D,
    pub g: Image2D,
}

impl LogDomainState {
    /// The starting point `l = s`, `r = 0`.
    pub fn initial(s: Image2D, g: Image2D) -> Result<Self> {
        s.ensure_same_shape(&g)?;
        let (m, n) = s.shape();
        Ok(Self {
            l: s.clone(),
            r: Image2D::zeros(m, n),
            s,
            g,
        })
    }
}

/// Entry-wise `log(max(S, clamp))`.
pub fn to_log_domain(img: &Image2D, clamp: f64) -> Result<Image2D> {
    if !(clamp > 0.0 && clamp.is_finite()) {
        return Err(Error::Contract(format!("log clamp must be positive, got {clamp}")));
    }
    Ok(img.map(|v| v.max(clamp).ln()))
}

/// The energy of `st` under the weights of `cfg`.
pub fn energy(st: &LogDomainState, cfg: &RetinexConfig) -> f64 {
    let edge = gradient(&st.r.sub(&st.g)).norm_sq();
    let fid = st.l.sub(&st.s).sub(&st.r).norm_sq();
    tv_norm(&st.l) + 0.5 * cfg.alpha * edge + 0.5 * cfg.beta * fid
}

/// Maps the log components back to a displayable image in `[0, 1]`.
pub fn compose_output(l: &Image2D, r: &Image2D, cfg: &RetinexConfig) -> Result<Image2D> {
    l.ensure_same_shape(r)?;
    let out = match cfg.compose_mode {
        ComposeMode::Reflectance => r.map(|v| (-v).exp()),
        ComposeMode::GammaIllumination => {
            let inv = 1.0 / cfg.display_gamma;
            r.zip_map(l, |rv, lv| (-rv + inv * lv).exp())
        }
    };
    Ok(out.clamped(0.0, 1.0))
}

/// The result of [`enhance`].
#[derive(Debug, Clone)]
pub struct Enhancement {
    /// Enhanced image in `[0, 1]`.
    pub output: Image2D,
    /// Final log-domain components.
    pub state: LogDomainState,
    pub trace: IterateTrace,
    pub inner: InnerStats,
}

/// Runs the decomposition on a single channel `img ∈ [0, 1]` with edge
/// prior `g` (pass `None` to use [`classical_edge`] of `img`).
pub fn enhance(img: &Image2D, g: Option<&Image2D>, cfg: &RetinexConfig, params: &SolverParams) -> Result<Enhancement> {
    cfg.validate()?;
    params.validate()?;
    if !img.is_finite() {
        return Err(Error::InvalidImage("observation has non-finite values".into()));
    }
    if img.min() < 0.0 || img.max() > 1.0 {
        return Err(Error::InvalidImage(format!(
            "observation must lie in [0, 1], found range [{}, {}]",
            img.min(),
            img.max()
        )));
    }
    for (i, &cap) in params.lambda_plus.iter().enumerate() {
        if cap < cfg.beta {
            return Err(Error::Contract(format!(
                "lambda_plus for block {} is {cap} but the coupling gradient modulus is beta = {}",
                i + 1,
                cfg.beta
            )));
        }
    }
    if params.rho[0] > 1.0 {
        return Err(Error::Contract(format!(
            "the illumination kernel is 1-strongly convex but rho = {}",
            params.rho[0]
        )));
    }
    let g = match g {
        Some(g) => {
            img.ensure_same_shape(g)?;
            if !g.is_finite() {
                return Err(Error::InvalidImage("edge prior has non-finite values".into()));
            }
            g.clone()
        }
        None => classical_edge(img),
    };

    let s = to_log_domain(img, cfg.log_clamp)?;
    let init = LogDomainState::initial(s.clone(), g.clone())?;
    let mut problem = RetinexProblem::new(s.clone(), g.clone(), cfg)?;
    let kernels = retinex_kernels(cfg, params.rho[1]);
    let (state, trace) = ibalm_solve(&mut problem, params, &kernels, IterateState::new(init.l, init.r))?;
    let output = compose_output(&state.x1, &state.x2, cfg)?;
    Ok(Enhancement {
        output,
        state: LogDomainState {
            s,
            l: state.x1,
            r: state.x2,
            g,
        },
        trace,
        inner: problem.stats().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_domain_values() {
        let img = Image2D::from_rows(&[[1.0, (-1.0f64).exp(), 0.0]]);
        let s = to_log_domain(&img, 1.0 / 255.0).unwrap();
        assert_eq!(s.get(0, 0), 0.0);
        assert!((s.get(0, 1) + 1.0).abs() < 1e-15);
        assert!((s.get(0, 2) - (1.0f64 / 255.0).ln()).abs() < 1e-15);
        assert!((s.get(0, 2) + 5.5413).abs() < 1e-4);
        assert!(to_log_domain(&img, 0.0).is_err());
    }

    #[test]
    fn energy_reduces_to_tv_at_start() {
        let cfg = RetinexConfig::default();
        let s = Image2D::from_rows(&[[-0.5, -1.0], [-2.0, -0.1]]);
        let st = LogDomainState::initial(s.clone(), Image2D::zeros(2, 2)).unwrap();
        assert!((energy(&st, &cfg) - tv_norm(&s)).abs() < 1e-15);
        let c = LogDomainState::initial(Image2D::filled(3, 3, -0.4), Image2D::zeros(3, 3)).unwrap();
        assert_eq!(energy(&c, &cfg), 0.0);
    }

    #[test]
    fn composition_modes() {
        let zero = Image2D::zeros(2, 3);
        let refl = RetinexConfig {
            compose_mode: ComposeMode::Reflectance,
            ..Default::default()
        };
        assert_eq!(compose_output(&zero, &zero, &refl).unwrap(), Image2D::filled(2, 3, 1.0));
        let half = Image2D::filled(2, 3, 2f64.ln());
        let out = compose_output(&zero, &half, &refl).unwrap();
        assert!(out.as_slice().iter().all(|v| (v - 0.5).abs() < 1e-15));
        let gamma = RetinexConfig::default();
        assert_eq!(compose_output(&zero, &half, &gamma).unwrap(), out);
    }

    #[test]
    fn constant_observation_is_stationary() {
        let img = Image2D::filled(6, 7, 0.3);
        let cfg = RetinexConfig::default();
        let res = enhance(&img, None, &cfg, &cfg.solver_params()).unwrap();
        assert_eq!(res.trace.len(), 1);
        assert!(res.trace.converged);
        assert_eq!(res.trace.records[0].step_norm, 0.0);
        let v = res.output.get(0, 0);
        assert!(res.output.as_slice().iter().all(|&x| x == v));
    }

    #[test]
    fn rejects_out_of_range_observation() {
        let img = Image2D::filled(2, 2, 1.5);
        let cfg = RetinexConfig::default();
        assert!(matches!(
            enhance(&img, None, &cfg, &cfg.solver_params()),
            Err(Error::InvalidImage(_))
        ));
    }

    #[test]
    fn rejects_lipschitz_cap_below_beta() {
        let img = Image2D::filled(2, 2, 0.5);
        let cfg = RetinexConfig { beta: 2.0, ..Default::default() };
        let params = SolverParams::with_lipschitz_cap(1.0);
        assert!(matches!(enhance(&img, None, &cfg, &params), Err(Error::Contract(_))));
    }
}
