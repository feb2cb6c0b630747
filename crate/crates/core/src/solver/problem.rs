use super::block::Block;
use super::kernel::KernelSpec;
use crate::error::Result;

/// A two-block composite objective
/// `Φ(x1, x2) = θ1(x1) + h⁺(x1, x2) − h⁻(x1, x2) + θ2(x2)`.
///
/// `h⁻` is handled by linearization at the extrapolated point; `θ_i` and
/// `h⁺` enter the Bregman proximal subproblems, which the implementor
/// solves.
pub trait CompositeProblem {
    type X1: Block;
    type X2: Block;

    /// `Φ(x1, x2)`.
    fn objective(&self, x1: &Self::X1, x2: &Self::X2) -> f64;

    /// `∇_{x1} h⁻(x1, x2)`.
    fn grad_h_minus_x1(&self, x1: &Self::X1, x2: &Self::X2) -> Self::X1;

    /// `∇_{x2} h⁻(x1, x2)`.
    fn grad_h_minus_x2(&self, x1: &Self::X1, x2: &Self::X2) -> Self::X2;

    /// `∇_{x1} h⁺(x1, x2)`; `None` means identically zero.
    fn grad_h_plus_x1(&self, _x1: &Self::X1, _x2: &Self::X2) -> Option<Self::X1> {
        None
    }

    /// `L₁⁻(x2)`, the Lipschitz modulus of `∇_{x1} h⁻(·, x2)`.
    fn lipschitz_x1(&self, x2: &Self::X2) -> f64;

    /// `L₂⁻(x1)`, the Lipschitz modulus of `∇_{x2} h⁻(x1, ·)`.
    fn lipschitz_x2(&self, x1: &Self::X1) -> f64;

    /// `(L⁺, L⁻)`: joint Lipschitz moduli of `∇h⁺` and `∇h⁻` on the
    /// region the iterates visit.
    fn coupling_lipschitz(&self) -> (f64, f64);

    /// `argmin_x θ1(x) + h⁺(x, x2) + ⟨x, tilt⟩ + τ·D_ψ(x, anchor)`.
    fn prox_x1(
        &mut self,
        anchor: &Self::X1,
        tilt: &Self::X1,
        tau: f64,
        kernel: &KernelSpec<Self::X1>,
        x2: &Self::X2,
    ) -> Result<Self::X1>;

    /// `argmin_x θ2(x) + h⁺(x1, x) + ⟨x, tilt⟩ + τ·D_φ(x, anchor)`.
    fn prox_x2(
        &mut self,
        anchor: &Self::X2,
        tilt: &Self::X2,
        tau: f64,
        kernel: &KernelSpec<Self::X2>,
        x1: &Self::X1,
    ) -> Result<Self::X2>;
}
