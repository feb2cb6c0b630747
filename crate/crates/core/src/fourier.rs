//! Exact solves of `(a·I + b·∇ᵀ∇) x = f` on a periodic grid.
//!
//! With periodic boundaries `∇ᵀ∇` is block-circulant and diagonal in the
//! 2-D discrete Fourier basis, with symbol
//! `4 sin²(πk/m) + 4 sin²(πl/n)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::image::Image2D;

/// Cached FFT plans and Laplacian symbol for one grid shape.
pub struct CirculantSolver {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    symbol: Vec<f64>,
}

impl std::fmt::Debug for CirculantSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSolver")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish_non_exhaustive()
    }
}

impl CirculantSolver {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        let mut symbol = Vec::with_capacity(rows * cols);
        for k in 0..rows {
            let sk = (PI * k as f64 / rows as f64).sin();
            for l in 0..cols {
                let sl = (PI * l as f64 / cols as f64).sin();
                symbol.push(4.0 * sk * sk + 4.0 * sl * sl);
            }
        }
        Self {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
            symbol,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Eigenvalues of `∇ᵀ∇` in row-major frequency order.
    pub fn laplacian_symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// Solves `(a·I + b·∇ᵀ∇) x = rhs`. Requires `a > 0` and `b ≥ 0`, or any
    /// pair for which the operator stays nonsingular.
    pub fn solve(&self, a: f64, b: f64, rhs: &Image2D) -> Image2D {
        assert_eq!(rhs.shape(), (self.rows, self.cols), "solver shape mismatch");
        let (m, n) = (self.rows, self.cols);
        let mut buf: Vec<Complex<f64>> = rhs.as_slice().iter().map(|&v| Complex::new(v, 0.0)).collect();
        let mut tbuf = vec![Complex::new(0.0, 0.0); m * n];
        let scratch_len = [&self.row_fwd, &self.row_inv, &self.col_fwd, &self.col_inv]
            .iter()
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        let mut scratch = vec![Complex::new(0.0, 0.0); scratch_len];

        // rows, then columns as rows of the transpose
        self.row_fwd.process_with_scratch(&mut buf, &mut scratch);
        transpose(&buf, &mut tbuf, m, n);
        self.col_fwd.process_with_scratch(&mut tbuf, &mut scratch);
        for j in 0..n {
            for i in 0..m {
                tbuf[j * m + i] /= a + b * self.symbol[i * n + j];
            }
        }
        self.col_inv.process_with_scratch(&mut tbuf, &mut scratch);
        transpose(&tbuf, &mut buf, n, m);
        self.row_inv.process_with_scratch(&mut buf, &mut scratch);

        let scale = 1.0 / (m * n) as f64;
        Image2D::from_raw(m, n, buf.into_iter().map(|c| c.re * scale).collect())
    }
}

/// Writes the transpose of the `rows × cols` matrix `src` into `dst`.
fn transpose(src: &[Complex<f64>], dst: &mut [Complex<f64>], rows: usize, cols: usize) {
    for i in 0..rows {
        for j in 0..cols {
            dst[j * rows + i] = src[i * cols + j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::neg_laplacian;

    #[test]
    fn solve_inverts_the_operator() {
        for &(m, n) in &[(1, 1), (1, 5), (2, 2), (3, 5), (8, 6)] {
            let x = Image2D::from_fn(m, n, |i, j| ((i * 13 + j * 7) % 11) as f64 * 0.1 - 0.5);
            let (a, b) = (1.7, 0.6);
            let rhs = x.scaled(a).add(&neg_laplacian(&x).scaled(b));
            let solved = CirculantSolver::new(m, n).solve(a, b, &rhs);
            let err = solved.sub(&x).norm();
            assert!(err < 1e-12, "{m}x{n}: {err}");
        }
    }

    #[test]
    fn symbol_peaks_at_eight_on_even_grids() {
        let s = CirculantSolver::new(4, 6);
        let max = s.laplacian_symbol().iter().copied().fold(0.0, f64::max);
        assert!((max - 8.0).abs() < 1e-12);
    }
}
