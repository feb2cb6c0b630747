//! Deterministic test scenes and their darkened counterparts.

use std::f64::consts::PI;

use crate::image::Image2D;

/// Lowest and highest intensity of every scene.
pub const SCENE_RANGE: (f64, f64) = (0.2, 0.95);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scene {
    /// Diagonal ramp overlaid with a coarse checkerboard.
    CheckerRamp,
    /// Concentric rings with a radial falloff.
    Rings,
    /// Piecewise-constant rectangles and a soft disc.
    Blocks,
}

impl Scene {
    pub const ALL: [Scene; 3] = [Scene::CheckerRamp, Scene::Rings, Scene::Blocks];

    pub fn name(self) -> &'static str {
        match self {
            Scene::CheckerRamp => "checker-ramp",
            Scene::Rings => "rings",
            Scene::Blocks => "blocks",
        }
    }

    /// Renders the scene at `rows × cols` with values in [`SCENE_RANGE`].
    pub fn render(self, rows: usize, cols: usize) -> Image2D {
        let (m, n) = (rows as f64, cols as f64);
        let raw = match self {
            Scene::CheckerRamp => Image2D::from_fn(rows, cols, |i, j| {
                let ramp = (i as f64 / m + j as f64 / n) / 2.0;
                let cell = ((i * 8 / rows) + (j * 8 / cols)) % 2;
                0.6 * ramp + 0.4 * cell as f64
            }),
            Scene::Rings => Image2D::from_fn(rows, cols, |i, j| {
                let y = (i as f64 + 0.5) / m - 0.5;
                let x = (j as f64 + 0.5) / n - 0.5;
                let rad = (x * x + y * y).sqrt();
                0.5 + 0.35 * (2.0 * PI * 6.0 * rad).cos() * (1.0 - rad) + 0.15 * (1.0 - 2.0 * rad)
            }),
            Scene::Blocks => Image2D::from_fn(rows, cols, |i, j| {
                let (y, x) = (i as f64 / m, j as f64 / n);
                let mut v = 0.3;
                if (0.1..0.45).contains(&y) && (0.15..0.6).contains(&x) {
                    v = 0.9;
                }
                if (0.55..0.9).contains(&y) && (0.3..0.85).contains(&x) {
                    v = 0.6;
                }
                let d = ((y - 0.7).powi(2) + (x - 0.2).powi(2)).sqrt();
                v + 0.4 * (-(d / 0.12).powi(2)).exp()
            }),
        };
        normalize(&raw, SCENE_RANGE)
    }
}

fn normalize(u: &Image2D, (lo, hi): (f64, f64)) -> Image2D {
    let (min, max) = (u.min(), u.max());
    if max == min {
        return Image2D::filled(u.rows(), u.cols(), (lo + hi) / 2.0);
    }
    u.map(|v| lo + (hi - lo) * (v - min) / (max - min))
}

/// Power-law darkening `B^exponent` of an image in `[0, 1]`.
pub fn darken(bright: &Image2D, exponent: f64) -> Image2D {
    bright.map(|v| v.clamp(0.0, 1.0).powf(exponent))
}
