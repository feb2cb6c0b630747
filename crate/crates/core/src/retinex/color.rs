//! Colour handling around the single-channel decomposition.

use crate::error::Result;
use crate::image::Image2D;
use crate::solver::{IterateTrace, SolverParams};

use super::config::{ColorMode, RetinexConfig};
use super::{enhance, InnerStats};

/// Per-pixel RGB to HSV with hue as a fraction of a full turn in `[0, 1)`.
pub fn rgb_to_hsv(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let v = max;
    let s = if max > 0.0 { d / max } else { 0.0 };
    let h = if d == 0.0 {
        0.0
    } else if max == r {
        ((g - b) / d).rem_euclid(6.0) / 6.0
    } else if max == g {
        ((b - r) / d + 2.0) / 6.0
    } else {
        ((r - g) / d + 4.0) / 6.0
    };
    (h, s, v)
}

/// Inverse of [`rgb_to_hsv`].
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (f64, f64, f64) {
    let h6 = (h.rem_euclid(1.0)) * 6.0;
    let sector = h6.floor();
    let f = h6 - sector;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match sector as u8 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    }
}

/// Channels to enhance plus whatever is needed to reassemble them.
#[derive(Debug, Clone, PartialEq)]
pub enum ColorSplit {
    /// The value channel, with hue and saturation kept aside.
    Value { v: Image2D, h: Image2D, s: Image2D },
    /// R, G and B as separate work channels.
    Channels([Image2D; 3]),
}

impl ColorSplit {
    pub fn work_channels(&self) -> Vec<&Image2D> {
        match self {
            ColorSplit::Value { v, .. } => vec![v],
            ColorSplit::Channels(c) => c.iter().collect(),
        }
    }

    /// Replaces the work channels, in the order of
    /// [`work_channels`](Self::work_channels).
    pub fn with_work_channels(self, mut work: Vec<Image2D>) -> Self {
        match self {
            ColorSplit::Value { h, s, .. } => {
                assert_eq!(work.len(), 1, "value split has one work channel");
                ColorSplit::Value { v: work.remove(0), h, s }
            }
            ColorSplit::Channels(_) => {
                assert_eq!(work.len(), 3, "per-channel split has three work channels");
                let b = work.pop().unwrap();
                let g = work.pop().unwrap();
                let r = work.pop().unwrap();
                ColorSplit::Channels([r, g, b])
            }
        }
    }
}

pub fn split_color(rgb: &[Image2D; 3], mode: ColorMode) -> Result<ColorSplit> {
    rgb[0].ensure_same_shape(&rgb[1])?;
    rgb[0].ensure_same_shape(&rgb[2])?;
    Ok(match mode {
        ColorMode::PerChannel => ColorSplit::Channels(rgb.clone()),
        ColorMode::ValueChannel => {
            let (m, n) = rgb[0].shape();
            let mut h = Image2D::zeros(m, n);
            let mut s = Image2D::zeros(m, n);
            let mut v = Image2D::zeros(m, n);
            for i in 0..m {
                for j in 0..n {
                    let (hh, ss, vv) = rgb_to_hsv(rgb[0].get(i, j), rgb[1].get(i, j), rgb[2].get(i, j));
                    h.set(i, j, hh);
                    s.set(i, j, ss);
                    v.set(i, j, vv);
                }
            }
            ColorSplit::Value { v, h, s }
        }
    })
}

pub fn merge_color(split: &ColorSplit) -> [Image2D; 3] {
    match split {
        ColorSplit::Channels(c) => c.clone(),
        ColorSplit::Value { v, h, s } => {
            let (m, n) = v.shape();
            let mut out = [Image2D::zeros(m, n), Image2D::zeros(m, n), Image2D::zeros(m, n)];
            for i in 0..m {
                for j in 0..n {
                    let (r, g, b) = hsv_to_rgb(h.get(i, j), s.get(i, j), v.get(i, j));
                    out[0].set(i, j, r);
                    out[1].set(i, j, g);
                    out[2].set(i, j, b);
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone)]
pub struct ColorEnhancement {
    pub output: [Image2D; 3],
    /// One trace per enhanced work channel.
    pub traces: Vec<IterateTrace>,
    pub inner: Vec<InnerStats>,
}

/// Enhances an RGB image according to `cfg.color_mode`. A supplied edge
/// prior is shared by every work channel; otherwise each channel uses its
/// own classical edge map.
pub fn enhance_color(
    rgb: &[Image2D; 3],
    g: Option<&Image2D>,
    cfg: &RetinexConfig,
    params: &SolverParams,
) -> Result<ColorEnhancement> {
    let split = split_color(rgb, cfg.color_mode)?;
    let mut work = Vec::new();
    let mut traces = Vec::new();
    let mut inner = Vec::new();
    for ch in split.work_channels() {
        let e = enhance(ch, g, cfg, params)?;
        work.push(e.output);
        traces.push(e.trace);
        inner.push(e.inner);
    }
    let merged = merge_color(&split.with_work_channels(work));
    Ok(ColorEnhancement {
        output: merged.map(|c| c.clamped(0.0, 1.0)),
        traces,
        inner,
    })
}
