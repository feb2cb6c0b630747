use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::SolverParams;

use super::tv_prox::AdmmSettings;

/// How the enhanced image is assembled from the log components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ComposeMode {
    /// `exp(−r)`.
    Reflectance,
    /// `exp(−r) · exp(l)^{1/display_gamma}`.
    #[default]
    GammaIllumination,
}

/// How a three-channel input is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ColorMode {
    /// Enhance the HSV value channel, keep hue and saturation.
    #[default]
    ValueChannel,
    /// Enhance R, G and B independently.
    PerChannel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetinexConfig {
    /// Edge-fidelity weight `α`.
    pub alpha: f64,
    /// Data-fidelity weight `β`.
    pub beta: f64,
    /// Safety factor on `γ_k` over `(α/τ2)·8`.
    pub gamma_margin: f64,
    /// ADMM penalty `η`.
    pub admm_penalty: f64,
    pub admm_max_iters: usize,
    pub admm_tol: f64,
    /// Lower clamp applied before taking logarithms.
    pub log_clamp: f64,
    pub compose_mode: ComposeMode,
    pub display_gamma: f64,
    pub color_mode: ColorMode,
}

impl Default for RetinexConfig {
    fn default() -> Self {
        Self {
            alpha: 20.0,
            beta: 1.0,
            gamma_margin: 1.05,
            admm_penalty: 10.0,
            admm_max_iters: 10_000,
            admm_tol: 1e-6,
            log_clamp: 1.0 / 255.0,
            compose_mode: ComposeMode::GammaIllumination,
            display_gamma: 2.2,
            color_mode: ColorMode::ValueChannel,
        }
    }
}

impl RetinexConfig {
    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        if !(self.gamma_margin > 1.0 && self.gamma_margin.is_finite()) {
            return Err(Error::param("gamma_margin", format!("must exceed 1, got {}", self.gamma_margin)));
        }
        positive("admm_penalty", self.admm_penalty)?;
        if self.admm_max_iters == 0 {
            return Err(Error::param("admm_max_iters", "must be at least 1"));
        }
        positive("admm_tol", self.admm_tol)?;
        if !(self.log_clamp > 0.0 && self.log_clamp < 1.0) {
            return Err(Error::param("log_clamp", format!("must lie in (0, 1), got {}", self.log_clamp)));
        }
        positive("display_gamma", self.display_gamma)?;
        Ok(())
    }

    pub fn admm_settings(&self) -> AdmmSettings {
        AdmmSettings {
            penalty: self.admm_penalty,
            max_iters: self.admm_max_iters,
            tol: self.admm_tol,
        }
    }

    /// Solver defaults with both Lipschitz caps set to `β`, the modulus of
    /// the linearized fidelity gradient in either block.
    pub fn solver_params(&self) -> SolverParams {
        SolverParams::with_lipschitz_cap(self.beta)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {v}")))
    }
}
