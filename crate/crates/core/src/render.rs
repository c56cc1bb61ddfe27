//! Colour rendering of label and scalar fields.

use image::{GrayImage, Luma, Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, LabelField, Shape};

/// Number of entries in the discrete palette. Larger label counts fall back
/// to the continuous ramp.
pub const DISCRETE_PALETTE_SIZE: usize = 64;

pub const WHITE: [u8; 3] = [255, 255, 255];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaletteMode {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette {
    pub mode: PaletteMode,
    /// Colour of label 0.
    pub background: [u8; 3],
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            mode: PaletteMode::Discrete,
            background: WHITE,
        }
    }
}

impl Palette {
    pub fn continuous() -> Self {
        Palette {
            mode: PaletteMode::Continuous,
            ..Palette::default()
        }
    }

    /// Mode actually used for `label_count` labels.
    pub fn effective_mode(&self, label_count: usize) -> PaletteMode {
        match self.mode {
            PaletteMode::Discrete if label_count > DISCRETE_PALETTE_SIZE => PaletteMode::Continuous,
            m => m,
        }
    }
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = (h / 60.0) % 6.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let q = |u: f64| ((u + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}

/// Colour `index` (0-based) of the discrete palette: golden-angle hue steps
/// with alternating saturation and value bands.
pub fn discrete_color(index: usize) -> [u8; 3] {
    let i = index % DISCRETE_PALETTE_SIZE;
    let hue = (i as f64 * 137.507_764_050_037_85) % 360.0;
    let sat = [0.90, 0.60][i % 2];
    let val = [0.95, 0.70, 0.50][(i / 2) % 3];
    hsv_to_rgb(hue, sat, val)
}

const RAMP: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

/// Point on the continuous ramp, `t` in [0, 1].
pub fn continuous_color(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let i = (t.floor() as usize).min(RAMP.len() - 2);
    let f = t - i as f64;
    let mut out = [0u8; 3];
    for (c, o) in out.iter_mut().enumerate() {
        *o = (RAMP[i][c] + f * (RAMP[i + 1][c] - RAMP[i][c])).round() as u8;
    }
    out
}

fn image_dims(shape: &Shape) -> Result<(u32, u32)> {
    let (w, h) = shape
        .as_image()
        .ok_or_else(|| Error::UnsupportedShape(shape.dims().to_vec()))?;
    Ok((w as u32, h as u32))
}

/// Colours a label field. Label `l` of `k` takes discrete colour `l - 1`, or
/// the ramp point `(l - 1) / (k - 1)` in continuous mode, where `k` is the
/// largest label present.
pub fn render_labels(labels: &LabelField, palette: &Palette) -> Result<RgbImage> {
    let (w, h) = image_dims(labels.shape())?;
    let k = labels.max_label() as usize;
    let mode = palette.effective_mode(k);
    if mode != palette.mode {
        log::warn!("{k} labels exceed the {DISCRETE_PALETTE_SIZE}-colour discrete palette, using continuous");
    }
    let color = |l: u32| -> [u8; 3] {
        if l == 0 {
            return palette.background;
        }
        match mode {
            PaletteMode::Discrete => discrete_color(l as usize - 1),
            PaletteMode::Continuous if k <= 1 => continuous_color(0.0),
            PaletteMode::Continuous => continuous_color((l - 1) as f64 / (k - 1) as f64),
        }
    };
    let data = labels.labels();
    Ok(RgbImage::from_fn(w, h, |x, y| {
        Rgb(color(data[(y * w + x) as usize]))
    }))
}

/// Linear grey ramp from the field's minimum (black) to maximum (white).
/// Constant fields render black.
pub fn render_gray(field: &Field) -> Result<GrayImage> {
    let (w, h) = image_dims(field.shape())?;
    let (lo, hi) = field.minmax();
    let span = hi - lo;
    let s = field.samples();
    Ok(GrayImage::from_fn(w, h, |x, y| {
        let v = s[(y * w + x) as usize];
        let g = if span > 0.0 {
            ((v - lo) / span * 255.0).round()
        } else {
            0.0
        };
        Luma([g as u8])
    }))
}
