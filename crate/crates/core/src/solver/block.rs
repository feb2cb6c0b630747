use crate::image::Image2D;

/// The vector-space operations the solver needs from a block variable.
pub trait Block: Clone + 'static {
    fn same_shape(&self, other: &Self) -> bool;

    /// `a·self + b·other`.
    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self;

    fn dot(&self, other: &Self) -> f64;

    fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    fn is_finite(&self) -> bool;

    fn diff(&self, other: &Self) -> Self {
        self.lincomb(1.0, other, -1.0)
    }

    fn dist_sq(&self, other: &Self) -> f64 {
        self.diff(other).norm_sq()
    }
}

impl Block for f64 {
    fn same_shape(&self, _: &Self) -> bool {
        true
    }

    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        a * self + b * other
    }

    fn dot(&self, other: &Self) -> f64 {
        self * other
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Block for Vec<f64> {
    fn same_shape(&self, other: &Self) -> bool {
        self.len() == other.len()
    }

    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.len(), other.len(), "block length mismatch");
        self.iter().zip(other).map(|(x, y)| a * x + b * y).collect()
    }

    fn dot(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(x, y)| x * y).sum()
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

impl Block for Image2D {
    fn same_shape(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }

    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        self.zip_map(other, |x, y| a * x + b * y)
    }

    fn dot(&self, other: &Self) -> f64 {
        Image2D::dot(self, other)
    }

    fn norm_sq(&self) -> f64 {
        Image2D::norm_sq(self)
    }

    fn is_finite(&self) -> bool {
        Image2D::is_finite(self)
    }
}
