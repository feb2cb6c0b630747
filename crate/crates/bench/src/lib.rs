//! Shared fixtures for the criterion benchmarks.

use ibalm::synthetic::{darken, Scene};
use ibalm::Image2D;

/// The darkened checker-ramp scene at `size × size`.
pub fn dark_scene(size: usize) -> Image2D {
    darken(&Scene::CheckerRamp.render(size, size), 2.5)
}
