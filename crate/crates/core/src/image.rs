//! Dense real-valued rasters used for every scalar and vector field.
//!
//! Storage is row-major. Row index `i` runs along the first difference
//! direction (`∇_x`), column index `j` along the second (`∇_y`).

use crate::error::{Error, Result};

/// An `rows × cols` real raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Image2D {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Image2D {
    /// Builds an image from row-major values, rejecting empty shapes,
    /// length mismatches and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let expected = rows.checked_mul(cols).ok_or_else(|| {
            Error::InvalidImage(format!("dimensions {rows}x{cols} overflow"))
        })?;
        if data.len() != expected {
            return Err(Error::InvalidImage(format!(
                "expected {expected} values for {rows}x{cols}, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidImage(format!(
                "non-finite value at index {pos}"
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds an image from nested rows. Panics on ragged or empty input;
    /// meant for literals in tests and examples.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let m = rows.len();
        let n = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(m * n);
        for r in rows {
            assert_eq!(r.as_ref().len(), n, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self::from_vec(m, n, data).expect("valid literal image")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "dimensions must be positive");
        assert!(value.is_finite());
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Builds an image by evaluating `f(i, j)` at every pixel.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_same_shape(&self, other: &Image2D) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image2D {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Pixel-wise combination; shapes must agree.
    pub fn zip_map(&self, other: &Image2D, f: impl Fn(f64, f64) -> f64) -> Image2D {
        assert_eq!(self.shape(), other.shape(), "zip_map shape mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_raw(self.rows, self.cols, data)
    }

    /// `self + a * x`, in place.
    pub fn axpy(&mut self, a: f64, x: &Image2D) {
        assert_eq!(self.shape(), x.shape(), "axpy shape mismatch");
        for (s, &v) in self.data.iter_mut().zip(&x.data) {
            *s += a * v;
        }
    }

    pub fn scaled(&self, a: f64) -> Image2D {
        self.map(|v| a * v)
    }

    pub fn add(&self, other: &Image2D) -> Image2D {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Image2D) -> Image2D {
        self.zip_map(other, |a, b| a - b)
    }

    /// Inner product, summed in storage order.
    pub fn dot(&self, other: &Image2D) -> f64 {
        assert_eq!(self.shape(), other.shape(), "dot shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn clamped(&self, lo: f64, hi: f64) -> Image2D {
        self.map(|v| v.clamp(lo, hi))
    }

    /// Cyclic shift: output pixel `(i, j)` takes input pixel
    /// `(i - di, j - dj)` modulo the shape.
    pub fn shifted(&self, di: usize, dj: usize) -> Image2D {
        let (m, n) = self.shape();
        Image2D::from_fn(m, n, |i, j| {
            self.get((i + m - di % m) % m, (j + n - dj % n) % n)
        })
    }
}

/// A pair of rasters holding the two components of a discrete gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2D {
    px: Image2D,
    py: Image2D,
}

impl VectorField2D {
    pub fn new(px: Image2D, py: Image2D) -> Result<Self> {
        px.ensure_same_shape(&py)?;
        Ok(Self { px, py })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            px: Image2D::zeros(rows, cols),
            py: Image2D::zeros(rows, cols),
        }
    }

    pub fn px(&self) -> &Image2D {
        &self.px
    }

    pub fn py(&self) -> &Image2D {
        &self.py
    }

    pub fn shape(&self) -> (usize, usize) {
        self.px.shape()
    }

    pub fn into_parts(self) -> (Image2D, Image2D) {
        (self.px, self.py)
    }

    pub fn dot(&self, other: &VectorField2D) -> f64 {
        self.px.dot(&other.px) + self.py.dot(&other.py)
    }

    pub fn norm_sq(&self) -> f64 {
        self.px.norm_sq() + self.py.norm_sq()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn add(&self, other: &VectorField2D) -> VectorField2D {
        Self {
            px: self.px.add(&other.px),
            py: self.py.add(&other.py),
        }
    }

    pub fn sub(&self, other: &VectorField2D) -> VectorField2D {
        Self {
            px: self.px.sub(&other.px),
            py: self.py.sub(&other.py),
        }
    }

    pub fn scaled(&self, a: f64) -> VectorField2D {
        Self {
            px: self.px.scaled(a),
            py: self.py.scaled(a),
        }
    }

    pub fn axpy(&mut self, a: f64, x: &VectorField2D) {
        self.px.axpy(a, &x.px);
        self.py.axpy(a, &x.py);
    }

    /// Per-pixel Euclidean magnitude `sqrt(px² + py²)`.
    pub fn magnitude(&self) -> Image2D {
        self.px.zip_map(&self.py, f64::hypot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_construction() {
        assert!(Image2D::from_vec(0, 3, vec![]).is_err());
        assert!(Image2D::from_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(Image2D::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Image2D::from_vec(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn row_major_layout() {
        let u = Image2D::from_rows(&[[0.0, 1.0, 2.0], [3.0, 4.0, 5.0]]);
        assert_eq!(u.shape(), (2, 3));
        assert_eq!(u.get(1, 0), 3.0);
        assert_eq!(u.as_slice(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn shift_wraps() {
        let u = Image2D::from_rows(&[[0.0, 1.0], [2.0, 3.0]]);
        let s = u.shifted(1, 0);
        assert_eq!(s, Image2D::from_rows(&[[2.0, 3.0], [0.0, 1.0]]));
        assert_eq!(u.shifted(2, 4), u);
    }

    #[test]
    fn field_shape_checked() {
        assert!(VectorField2D::new(Image2D::zeros(2, 2), Image2D::zeros(2, 3)).is_err());
    }
}
