//! Inertial Bregman alternating linearized minimization for two-block
//! nonconvex composite problems, and its instantiation as an edge-guided
//! Retinex model for low-light image enhancement.
//!
//! * [`grid`] and [`fourier`]: periodic finite differences and the
//!   circulant solver for `(aI + b∇ᵀ∇)`.
//! * [`solver`]: the generic inertial scheme, its step-size schedule and
//!   the descent and subgradient diagnostics.
//! * [`retinex`]: the log-domain model, its subproblem solvers and colour
//!   handling.
//! * [`metrics`], [`io`] and [`synthetic`]: PSNR/SSIM, raster and edge-map
//!   files, deterministic test scenes.

pub mod error;
pub mod fourier;
pub mod grid;
pub mod image;
pub mod io;
pub mod metrics;
pub mod retinex;
pub mod solver;
pub mod synthetic;

pub use error::{Error, Result};
pub use image::{Image2D, VectorField2D};
pub use io::Raster;
pub use metrics::MetricReport;
pub use retinex::{enhance, enhance_color, ColorMode, ComposeMode, Enhancement, RetinexConfig};
pub use solver::{IterateState, IterateTrace, SolverParams};
