//! Finite-difference operators on periodic 2-D grids.
//!
//! Forward differences with wrap-around at the last row and column. The
//! divergence is the negative adjoint of the gradient, so
//! `⟨div p, u⟩ = −⟨p, ∇u⟩` and `∇ᵀ∇ = −div ∘ ∇` is a circulant,
//! positive semidefinite operator whose spectrum lies in `[0, 8]`.

use crate::error::Result;
use crate::image::{Image2D, VectorField2D};

/// Universal upper bound on the largest eigenvalue of `∇ᵀ∇`.
pub const LAPLACIAN_SPECTRAL_BOUND: f64 = 8.0;

/// Forward-difference gradient with periodic wrap.
pub fn gradient(u: &Image2D) -> VectorField2D {
    let (m, n) = u.shape();
    let v = u.as_slice();
    let mut px = vec![0.0; m * n];
    let mut py = vec![0.0; m * n];
    for i in 0..m {
        let down = if i + 1 == m { 0 } else { i + 1 };
        for j in 0..n {
            let right = if j + 1 == n { 0 } else { j + 1 };
            let here = v[i * n + j];
            px[i * n + j] = v[down * n + j] - here;
            py[i * n + j] = v[i * n + right] - here;
        }
    }
    VectorField2D::new(Image2D::from_raw(m, n, px), Image2D::from_raw(m, n, py))
        .expect("components share a shape")
}

/// Backward-difference divergence, the negative adjoint of [`gradient`].
pub fn divergence(p: &VectorField2D) -> Image2D {
    let (m, n) = p.shape();
    let px = p.px().as_slice();
    let py = p.py().as_slice();
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let up = if i == 0 { m - 1 } else { i - 1 };
        for j in 0..n {
            let left = if j == 0 { n - 1 } else { j - 1 };
            let k = i * n + j;
            out[k] = (px[k] - px[up * n + j]) + (py[k] - py[i * n + left]);
        }
    }
    Image2D::from_raw(m, n, out)
}

/// Divergence of a field given as two separate components.
pub fn divergence_of(px: &Image2D, py: &Image2D) -> Result<Image2D> {
    let field = VectorField2D::new(px.clone(), py.clone())?;
    Ok(divergence(&field))
}

/// `∇ᵀ∇ u = −div(∇u)`.
pub fn neg_laplacian(u: &Image2D) -> Image2D {
    let (m, n) = u.shape();
    let v = u.as_slice();
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let up = if i == 0 { m - 1 } else { i - 1 };
        let down = if i + 1 == m { 0 } else { i + 1 };
        for j in 0..n {
            let left = if j == 0 { n - 1 } else { j - 1 };
            let right = if j + 1 == n { 0 } else { j + 1 };
            let c = v[i * n + j];
            // Written as a sum of differences so a 1-pixel axis cancels exactly.
            out[i * n + j] = (c - v[down * n + j])
                + (c - v[up * n + j])
                + (c - v[i * n + right])
                + (c - v[i * n + left]);
        }
    }
    Image2D::from_raw(m, n, out)
}

pub fn laplacian_spectral_bound() -> f64 {
    LAPLACIAN_SPECTRAL_BOUND
}

/// Isotropic total variation `Σ |(∇u)_{ij}|`.
pub fn tv_norm(u: &Image2D) -> f64 {
    let g = gradient(u);
    g.px()
        .as_slice()
        .iter()
        .zip(g.py().as_slice())
        .map(|(&a, &b)| (a * a + b * b).sqrt())
        .sum()
}

/// Edge map `div(∇S / sqrt(1 + |∇S|²))` with per-pixel normalization.
/// The response is signed.
pub fn classical_edge(s: &Image2D) -> Image2D {
    let g = gradient(s);
    let (gx, gy) = g.into_parts();
    let scale = gx.zip_map(&gy, |a, b| (1.0 + a * a + b * b).sqrt());
    let nx = gx.zip_map(&scale, |a, d| a / d);
    let ny = gy.zip_map(&scale, |a, d| a / d);
    divergence(&VectorField2D::new(nx, ny).expect("same shape"))
}

/// Estimates `λ_max(∇ᵀ∇)` by power iteration from `start`.
pub fn power_iteration_neg_laplacian(start: &Image2D, iterations: usize) -> f64 {
    let mut v = start.clone();
    let norm = v.norm();
    if norm == 0.0 {
        return 0.0;
    }
    v = v.scaled(1.0 / norm);
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let w = neg_laplacian(&v);
        lambda = v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 {
            return 0.0;
        }
        v = w.scaled(1.0 / wn);
    }
    lambda
}
