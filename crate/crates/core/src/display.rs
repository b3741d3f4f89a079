//! Display normalisation, colour composites and raster/CSV export.
//!
//! Rasters are binary netpbm files: `P5` (8-bit gray) and `P6` (8-bit RGB),
//! header `P5\n<width> <height>\n255\n` followed by `width * height` bytes
//! (three per pixel for `P6`), rows top to bottom, `y` outer and `x` inner.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::doppler::RoiSeries;
use crate::error::{invalid, Result};
use crate::holo::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    Linear,
    #[default]
    Log,
}

impl std::str::FromStr for Scale {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            other => invalid(format!("unknown scale {other:?}, expected linear or log")),
        }
    }
}

impl std::fmt::Display for Scale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        })
    }
}

/// Percentile clipping of nonzero pixels, optional log10, mapping to 0..=255.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplayParams {
    pub lo_pct: f64,
    pub hi_pct: f64,
    pub scale: Scale,
}

impl Default for DisplayParams {
    fn default() -> Self {
        Self {
            lo_pct: 1.0,
            hi_pct: 99.0,
            scale: Scale::Log,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<u8>,
}

/// Linear-interpolated percentile of sorted values, `pct` in `[0, 100]`.
pub fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let pos = pct / 100.0 * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// 8-bit rendering of a power image.
///
/// Degenerate inputs: an image without nonzero pixels renders black, and an
/// image whose clip range collapses (e.g. constant) renders mid-gray 128.
pub fn to_display_gray(image: &Image, params: DisplayParams) -> Result<GrayImage> {
    let DisplayParams { lo_pct, hi_pct, scale } = params;
    if !(0.0 <= lo_pct && lo_pct < hi_pct && hi_pct <= 100.0) {
        return invalid(format!(
            "percentiles must satisfy 0 <= lo < hi <= 100, got {lo_pct}, {hi_pct}"
        ));
    }
    let transform = |v: f64| match scale {
        Scale::Linear => v,
        Scale::Log if v > 0.0 => v.log10(),
        Scale::Log => f64::NEG_INFINITY,
    };
    let mut values: Vec<f64> = image
        .data
        .iter()
        .filter(|&&v| v != 0.0)
        .map(|&v| transform(v))
        .collect();
    values.retain(|v| v.is_finite());
    let (nx, ny) = (image.nx, image.ny);
    if values.is_empty() {
        return Ok(GrayImage {
            nx,
            ny,
            data: vec![0; nx * ny],
        });
    }
    values.sort_by(f64::total_cmp);
    let (lo, hi) = (percentile(&values, lo_pct), percentile(&values, hi_pct));
    if hi <= lo {
        return Ok(GrayImage {
            nx,
            ny,
            data: vec![128; nx * ny],
        });
    }
    let data = image
        .data
        .iter()
        .map(|&v| {
            let t = transform(v);
            let x = if t.is_finite() {
                ((t - lo) / (hi - lo)).clamp(0.0, 1.0)
            } else {
                0.0
            };
            (x * 255.0).round() as u8
        })
        .collect();
    Ok(GrayImage { nx, ny, data })
}

/// Maps dB values in `[min_db, 0]` linearly onto 0..=255.
pub fn db_to_gray(nx: usize, ny: usize, db: impl IntoIterator<Item = f64>, min_db: f64) -> Result<GrayImage> {
    if min_db.is_nan() || min_db >= 0.0 {
        return invalid(format!("dB display floor must be negative, got {min_db}"));
    }
    let data: Vec<u8> = db
        .into_iter()
        .map(|v| (((v - min_db) / -min_db).clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    if data.len() != nx * ny {
        return invalid("dB map size does not match its dimensions");
    }
    Ok(GrayImage { nx, ny, data })
}

/// RGB composite with channel values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeImage {
    pub nx: usize,
    pub ny: usize,
    pub rgb: Vec<[f64; 3]>,
    /// What each input contributed, for manifests.
    pub provenance: Vec<String>,
}

impl CompositeImage {
    pub fn to_bytes(&self) -> Vec<u8> {
        self.rgb
            .iter()
            .flat_map(|px| px.map(|c| (c.clamp(0.0, 1.0) * 255.0).round() as u8))
            .collect()
    }
}

fn unit(g: &GrayImage) -> impl Iterator<Item = f64> + '_ {
    g.data.iter().map(|&v| v as f64 / 255.0)
}

/// Low band in cyan (green and blue), high band in red.
pub fn composite_two_band(low: &Image, high: &Image, params: DisplayParams) -> Result<CompositeImage> {
    if !low.same_shape(high) {
        return invalid(format!(
            "images differ in size: {}x{} vs {}x{}",
            low.nx, low.ny, high.nx, high.ny
        ));
    }
    let (l, h) = (to_display_gray(low, params)?, to_display_gray(high, params)?);
    let rgb = unit(&l).zip(unit(&h)).map(|(l, h)| [h, l, l]).collect();
    Ok(CompositeImage {
        nx: low.nx,
        ny: low.ny,
        rgb,
        provenance: vec!["red: high band".into(), "cyan: low band".into()],
    })
}

/// Channel vectors of the phase composite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseColors {
    pub systole: [f64; 3],
    pub diastole: [f64; 3],
}

impl Default for PhaseColors {
    fn default() -> Self {
        Self {
            systole: [1.0, 0.5, 0.0],
            diastole: [0.0, 0.3, 1.0],
        }
    }
}

/// Systole mean in orange plus diastole mean in blue, clipped to `[0, 1]`.
pub fn composite_two_phase(
    systole: &Image,
    diastole: &Image,
    params: DisplayParams,
    colors: PhaseColors,
) -> Result<CompositeImage> {
    if !systole.same_shape(diastole) {
        return invalid(format!(
            "images differ in size: {}x{} vs {}x{}",
            systole.nx, systole.ny, diastole.nx, diastole.ny
        ));
    }
    let (s, d) = (to_display_gray(systole, params)?, to_display_gray(diastole, params)?);
    let rgb = unit(&s)
        .zip(unit(&d))
        .map(|(s, d)| std::array::from_fn(|c| (s * colors.systole[c] + d * colors.diastole[c]).clamp(0.0, 1.0)))
        .collect();
    Ok(CompositeImage {
        nx: systole.nx,
        ny: systole.ny,
        rgb,
        provenance: vec![
            format!("systole: {:?}", colors.systole),
            format!("diastole: {:?}", colors.diastole),
        ],
    })
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.nx, img.ny).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn encode_ppm(img: &CompositeImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.nx, img.ny).into_bytes();
    out.extend(img.to_bytes());
    out
}

pub fn write_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_pgm(img))?)
}

pub fn write_ppm(img: &CompositeImage, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_ppm(img))?)
}

/// Power value in scientific notation, 6 significant digits.
pub fn fmt_power(v: f64) -> String {
    format!("{v:.5e}")
}

pub fn series_csv(series: &RoiSeries) -> String {
    let mut out = String::from("time_s,power\n");
    for (t, p) in series.times.iter().zip(&series.power) {
        let _ = writeln!(out, "{t:.6},{}", fmt_power(*p));
    }
    out
}

/// One line per pixel: `x,y,value`.
pub fn image_csv(img: &Image) -> String {
    let mut out = String::from("x,y,value\n");
    for y in 0..img.ny {
        for x in 0..img.nx {
            let _ = writeln!(out, "{x},{y},{}", fmt_power(img.get(x, y)));
        }
    }
    out
}
