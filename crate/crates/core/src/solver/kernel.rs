//! Bregman kernels `ψ` and their distances
//! `D_ψ(x, y) = ψ(x) − ψ(y) − ⟨∇ψ(y), x − y⟩`.
//!
//! Both supported kernels are quadratic, `ψ(x) = ½⟨Mx, x⟩`, so
//! `D_ψ(x, y) = ½⟨M(x − y), x − y⟩` and `∇ψ(x) = Mx`.

use std::fmt;
use std::sync::Arc;

use super::block::Block;
use crate::error::{Error, Result};

pub type MetricApply<B> = Arc<dyn Fn(&B) -> B + Send + Sync>;

#[derive(Clone)]
pub enum KernelKind<B> {
    /// `ψ = ½‖·‖²`.
    Euclidean,
    /// `ψ = ½‖·‖²_M` for a symmetric positive definite `M`.
    MetricQuadratic(MetricApply<B>),
}

#[derive(Clone)]
pub struct KernelSpec<B> {
    kind: KernelKind<B>,
    strong_convexity: f64,
    gradient_lipschitz: f64,
}

impl<B> fmt::Debug for KernelSpec<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            KernelKind::Euclidean => "Euclidean",
            KernelKind::MetricQuadratic(_) => "MetricQuadratic",
        };
        f.debug_struct("KernelSpec")
            .field("kind", &kind)
            .field("strong_convexity", &self.strong_convexity)
            .field("gradient_lipschitz", &self.gradient_lipschitz)
            .finish()
    }
}

impl<B: Block> KernelSpec<B> {
    pub fn euclidean() -> Self {
        Self {
            kind: KernelKind::Euclidean,
            strong_convexity: 1.0,
            gradient_lipschitz: 1.0,
        }
    }

    /// Metric kernel with eigenvalues of `M` in `[strong_convexity, gradient_lipschitz]`.
    pub fn metric(apply: MetricApply<B>, strong_convexity: f64, gradient_lipschitz: f64) -> Result<Self> {
        if !(strong_convexity > 0.0 && strong_convexity.is_finite()) {
            return Err(Error::param(
                "strong_convexity",
                format!("kernel modulus must be positive, got {strong_convexity}"),
            ));
        }
        if !(gradient_lipschitz >= strong_convexity && gradient_lipschitz.is_finite()) {
            return Err(Error::param(
                "gradient_lipschitz",
                format!("must be finite and >= modulus {strong_convexity}, got {gradient_lipschitz}"),
            ));
        }
        Ok(Self {
            kind: KernelKind::MetricQuadratic(apply),
            strong_convexity,
            gradient_lipschitz,
        })
    }

    pub fn kind(&self) -> &KernelKind<B> {
        &self.kind
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, KernelKind::Euclidean)
    }

    pub fn strong_convexity(&self) -> f64 {
        self.strong_convexity
    }

    pub fn gradient_lipschitz(&self) -> f64 {
        self.gradient_lipschitz
    }

    /// `∇ψ(x)`.
    pub fn grad(&self, x: &B) -> B {
        match &self.kind {
            KernelKind::Euclidean => x.clone(),
            KernelKind::MetricQuadratic(apply) => apply(x),
        }
    }

    pub fn value(&self, x: &B) -> f64 {
        0.5 * self.grad(x).dot(x)
    }

    /// `D_ψ(x, y)`.
    pub fn distance(&self, x: &B, y: &B) -> f64 {
        let d = x.diff(y);
        0.5 * self.grad(&d).dot(&d)
    }

    /// Checks `⟨Mx, x⟩ ≥ ρ‖x‖²` on each probe, with relative slack `1e-12`.
    pub fn check_positive_definite(&self, probes: &[B]) -> bool {
        probes.iter().all(|x| {
            let q = self.grad(x).dot(x);
            let n = x.norm_sq();
            q >= self.strong_convexity * n * (1.0 - 1e-12)
        })
    }
}

type KernelFactory<B> = Box<dyn Fn(f64) -> Result<KernelSpec<B>> + Send + Sync>;

/// Per-iteration kernels `(ψ_k, φ_k)`, each built from that block's step
/// size `τ_i^k`.
pub struct Kernels<X1, X2> {
    first: KernelFactory<X1>,
    second: KernelFactory<X2>,
}

impl<X1: Block + 'static, X2: Block + 'static> Kernels<X1, X2> {
    pub fn euclidean() -> Self {
        Self {
            first: Box::new(|_| Ok(KernelSpec::euclidean())),
            second: Box::new(|_| Ok(KernelSpec::euclidean())),
        }
    }

    pub fn new(
        first: impl Fn(f64) -> Result<KernelSpec<X1>> + Send + Sync + 'static,
        second: impl Fn(f64) -> Result<KernelSpec<X2>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            first: Box::new(first),
            second: Box::new(second),
        }
    }

    pub fn first(&self, tau: f64) -> Result<KernelSpec<X1>> {
        (self.first)(tau)
    }

    pub fn second(&self, tau: f64) -> Result<KernelSpec<X2>> {
        (self.second)(tau)
    }
}
