//! Full-reference quality metrics and histograms.

use crate::error::{Error, Result};
use crate::image::Image2D;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// `10·log10(peak² / MSE)`; identical inputs give `f64::INFINITY`.
pub fn psnr(test: &Image2D, reference: &Image2D, peak: f64) -> Result<f64> {
    test.ensure_same_shape(reference)?;
    if !(peak > 0.0) {
        return Err(Error::param("peak", format!("must be positive, got {peak}")));
    }
    let mse = test.sub(reference).norm_sq() / test.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (k, wk) in w.iter_mut().enumerate() {
        let d = k as f64 - c;
        *wk = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.map(|v| v / s)
}

/// Separable 'valid' filtering with the normalized Gaussian window.
fn filter_valid(u: &[f64], rows: usize, cols: usize, w: &[f64; SSIM_WINDOW]) -> (Vec<f64>, usize, usize) {
    let or = rows + 1 - SSIM_WINDOW;
    let oc = cols + 1 - SSIM_WINDOW;
    let mut tmp = vec![0.0; rows * oc];
    for i in 0..rows {
        for j in 0..oc {
            tmp[i * oc + j] = (0..SSIM_WINDOW).map(|k| w[k] * u[i * cols + j + k]).sum();
        }
    }
    let mut out = vec![0.0; or * oc];
    for i in 0..or {
        for j in 0..oc {
            out[i * oc + j] = (0..SSIM_WINDOW).map(|k| w[k] * tmp[(i + k) * oc + j]).sum();
        }
    }
    (out, or, oc)
}

/// Mean structural similarity with an 11×11 Gaussian window (σ = 1.5),
/// `K1 = 0.01`, `K2 = 0.03` and dynamic range 1.
pub fn ssim(test: &Image2D, reference: &Image2D) -> Result<f64> {
    test.ensure_same_shape(reference)?;
    let (m, n) = test.shape();
    if m < SSIM_WINDOW || n < SSIM_WINDOW {
        return Err(Error::InvalidImage(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {m}x{n}"
        )));
    }
    let w = gaussian_window();
    let x = test.as_slice();
    let y = reference.as_slice();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let (mx, _, _) = filter_valid(x, m, n, &w);
    let (my, _, _) = filter_valid(y, m, n, &w);
    let (sxx, _, _) = filter_valid(&xx, m, n, &w);
    let (syy, _, _) = filter_valid(&yy, m, n, &w);
    let (sxy, _, _) = filter_valid(&xy, m, n, &w);
    let c1 = (SSIM_K1 * 1.0).powi(2);
    let c2 = (SSIM_K2 * 1.0).powi(2);
    let mut total = 0.0;
    for k in 0..mx.len() {
        let (ux, uy) = (mx[k], my[k]);
        let vx = sxx[k] - ux * ux;
        let vy = syy[k] - uy * uy;
        let cxy = sxy[k] - ux * uy;
        total += ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
    }
    Ok(total / mx.len() as f64)
}

/// Counts over `bins` equal-width bins on `[0, 1]`. Bins are half-open
/// except the last, which is closed; values outside `[0, 1]` are counted
/// in the nearest end bin.
pub fn histogram(u: &Image2D, bins: usize) -> Result<Vec<usize>> {
    if bins == 0 {
        return Err(Error::param("bins", "must be at least 1"));
    }
    let mut counts = vec![0usize; bins];
    for &v in u.as_slice() {
        let idx = ((v.clamp(0.0, 1.0) * bins as f64).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    /// `f64::INFINITY` when the images are identical.
    pub psnr_db: f64,
    pub ssim: f64,
    /// `(psnr_db, ssim)` per channel, empty for single-channel inputs.
    pub per_channel: Vec<(f64, f64)>,
}

impl MetricReport {
    /// Single-channel report with peak 1.
    pub fn gray(test: &Image2D, reference: &Image2D) -> Result<Self> {
        Ok(Self {
            psnr_db: psnr(test, reference, 1.0)?,
            ssim: ssim(test, reference)?,
            per_channel: Vec::new(),
        })
    }

    /// Per-channel metrics averaged over the channels.
    pub fn channels(test: &[Image2D], reference: &[Image2D]) -> Result<Self> {
        if test.len() != reference.len() || test.is_empty() {
            return Err(Error::InvalidImage(format!(
                "channel counts differ or are zero: {} vs {}",
                test.len(),
                reference.len()
            )));
        }
        let per_channel = test
            .iter()
            .zip(reference)
            .map(|(t, r)| Ok((psnr(t, r, 1.0)?, ssim(t, r)?)))
            .collect::<Result<Vec<_>>>()?;
        let k = per_channel.len() as f64;
        Ok(Self {
            psnr_db: per_channel.iter().map(|c| c.0).sum::<f64>() / k,
            ssim: per_channel.iter().map(|c| c.1).sum::<f64>() / k,
            per_channel,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psnr_constants() {
        let a = Image2D::filled(4, 4, 0.25);
        assert_eq!(psnr(&a, &a, 1.0).unwrap(), f64::INFINITY);
        let b = Image2D::filled(4, 4, 0.75);
        assert!((psnr(&a, &b, 1.0).unwrap() - 6.020599913279624).abs() < 1e-12);
        let z = Image2D::zeros(4, 4);
        let o = Image2D::filled(4, 4, 1.0);
        assert!(psnr(&z, &o, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ssim_constants() {
        let z = Image2D::zeros(12, 13);
        let o = Image2D::filled(12, 13, 1.0);
        let c1 = 1e-4;
        assert!((ssim(&z, &o).unwrap() - c1 / (1.0 + c1)).abs() < 1e-12);
        assert!((ssim(&o, &o).unwrap() - 1.0).abs() < 1e-12);
        assert!(ssim(&Image2D::zeros(10, 20), &Image2D::zeros(10, 20)).is_err());
    }

    #[test]
    fn window_is_normalized() {
        let w = gaussian_window();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(w[0], w[10]);
    }

    #[test]
    fn histogram_cases() {
        let h = histogram(&Image2D::filled(3, 3, 0.5), 2).unwrap();
        assert_eq!(h, vec![0, 9]);
        let h = histogram(&Image2D::from_rows(&[[0.0, 1.0, 0.999]]), 4).unwrap();
        assert_eq!(h, vec![1, 0, 0, 2]);
        assert!(histogram(&Image2D::zeros(1, 1), 0).is_err());
    }
}
