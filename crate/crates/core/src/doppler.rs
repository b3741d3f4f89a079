//! Doppler power spectral density, band integration, ROI waveforms and
//! spectrograms.
//!
//! Spectra use the plain unnormalised DFT over the window, so for every pixel
//! `sum_f S(f) = n_t * sum_t |h(t)|^2`. Bins are stored in ascending frequency
//! order over `(-fs/2, fs/2]`.

use num_complex::Complex32;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::holo::{reshape_to_casorati, CasoratiMatrix, HologramStack, Image, Roi, WindowPlan};
use crate::svd::{clutter_filter, compute_temporal_basis, power_db, RankRule};

/// Floor used for zero power in dB maps.
pub const DB_FLOOR: f64 = -300.0;

const PIXEL_BLOCK: usize = 4096;

/// Ascending-frequency position -> FFT bin index.
pub fn ascending_bins(n: usize) -> Vec<usize> {
    let half = n / 2;
    (half + 1..n).chain(0..=half).filter(|&k| k < n).collect()
}

/// Frequency in Hz of FFT bin `k` for an `n`-point transform.
pub fn bin_frequency(k: usize, n: usize, fs: f64) -> f64 {
    let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    signed * fs / n as f64
}

/// Ascending frequency axis over `(-fs/2, fs/2]`.
pub fn frequency_axis(n: usize, fs: f64) -> Vec<f64> {
    ascending_bins(n).into_iter().map(|k| bin_frequency(k, n, fs)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyBand {
    pub f1: f64,
    pub f2: f64,
}

impl FrequencyBand {
    pub fn new(f1: f64, f2: f64) -> Result<Self> {
        if !(f1.is_finite() && f2.is_finite() && 0.0 <= f1 && f1 < f2) {
            return invalid(format!("band must satisfy 0 <= f1 < f2, got {f1}..{f2}"));
        }
        Ok(Self { f1, f2 })
    }

    pub fn check_nyquist(&self, fs: f64) -> Result<()> {
        if self.f2 > fs / 2.0 {
            return invalid(format!(
                "band upper edge {} Hz exceeds Nyquist {} Hz",
                self.f2,
                fs / 2.0
            ));
        }
        Ok(())
    }

    /// Bin membership: `f1 <= |f| < f2`, with `f2` itself included at Nyquist.
    pub fn contains(&self, f: f64, fs: f64, sidebands: Sidebands) -> bool {
        if sidebands == Sidebands::PositiveOnly && f < 0.0 {
            return false;
        }
        let a = f.abs();
        a >= self.f1 && (a < self.f2 || (a == self.f2 && self.f2 == fs / 2.0))
    }
}

impl std::fmt::Display for FrequencyBand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.f1, self.f2)
    }
}

/// Which sidebands contribute to band integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sidebands {
    #[default]
    TwoSided,
    PositiveOnly,
}

/// Taper applied to each pixel's time series before the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Apodization {
    #[default]
    Rectangular,
    Hann,
}

impl Apodization {
    fn weights(self, n: usize) -> Option<Vec<f32>> {
        match self {
            Apodization::Rectangular => None,
            Apodization::Hann => Some(
                (0..n)
                    .map(|t| (0.5 - 0.5 * (2.0 * std::f64::consts::PI * t as f64 / n as f64).cos()) as f32)
                    .collect(),
            ),
        }
    }
}

/// Per-pixel (or ROI-averaged, `nx = ny = 1`) Doppler power spectra of one window.
#[derive(Debug, Clone)]
pub struct DopplerSpectrum {
    pub nx: usize,
    pub ny: usize,
    pub n_t: usize,
    pub fs: f64,
    pub window_start: usize,
    /// Ascending, Hz.
    pub freq_axis: Vec<f64>,
    /// `values[p * n_t + r]`: pixel `p`, frequency row `r`.
    pub values: Vec<f32>,
}

impl DopplerSpectrum {
    pub fn pixel(&self, p: usize) -> &[f32] {
        &self.values[p * self.n_t..(p + 1) * self.n_t]
    }

    pub fn n_pixels(&self) -> usize {
        self.nx * self.ny
    }
}

/// Spectra of the selected rows of `m`, ascending-frequency order, appended to `out`.
fn pixel_spectra(
    m: &CasoratiMatrix,
    pixels: &[usize],
    apodization: Apodization,
    mut sink: impl FnMut(usize, &[Complex32]),
) {
    let n_t = m.cols();
    let rows = m.rows();
    let fft = FftPlanner::<f32>::new().plan_fft_forward(n_t);
    let taper = apodization.weights(n_t);
    let order = ascending_bins(n_t);
    let data = m.as_slice();
    let mut buf = vec![Complex32::new(0.0, 0.0); PIXEL_BLOCK.min(pixels.len()).max(1) * n_t];
    let mut scratch = vec![Complex32::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut sorted = vec![Complex32::new(0.0, 0.0); n_t];
    for (b, block) in pixels.chunks(PIXEL_BLOCK).enumerate() {
        let used = &mut buf[..block.len() * n_t];
        for (i, &p) in block.iter().enumerate() {
            let row = &mut used[i * n_t..(i + 1) * n_t];
            for (t, z) in row.iter_mut().enumerate() {
                *z = data[t * rows + p];
            }
            if let Some(w) = &taper {
                row.iter_mut().zip(w).for_each(|(z, w)| *z *= *w);
            }
        }
        fft.process_with_scratch(used, &mut scratch);
        for (i, spec) in used.chunks(n_t).enumerate() {
            for (dst, &k) in sorted.iter_mut().zip(&order) {
                *dst = spec[k];
            }
            sink(b * PIXEL_BLOCK + i, &sorted);
        }
    }
}

/// Pixel-wise `|DFT|^2` of a window's space-time matrix.
pub fn dpsd_window(
    m: &CasoratiMatrix,
    nx: usize,
    ny: usize,
    fs: f64,
    window_start: usize,
    apodization: Apodization,
) -> Result<DopplerSpectrum> {
    let n_t = m.cols();
    if n_t < 2 {
        return invalid(format!("spectrum needs at least 2 frames, got {n_t}"));
    }
    if nx * ny != m.rows() {
        return invalid(format!("matrix has {} rows, expected {nx}x{ny}", m.rows()));
    }
    if m.as_slice().iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return invalid("window has non-finite samples");
    }
    let pixels: Vec<usize> = (0..m.rows()).collect();
    let mut values = vec![0.0f32; m.rows() * n_t];
    pixel_spectra(m, &pixels, apodization, |p, spec| {
        for (v, z) in values[p * n_t..(p + 1) * n_t].iter_mut().zip(spec) {
            *v = z.norm_sqr();
        }
    });
    Ok(DopplerSpectrum {
        nx,
        ny,
        n_t,
        fs,
        window_start,
        freq_axis: frequency_axis(n_t, fs),
        values,
    })
}

/// [`dpsd_window`] on a stack holding exactly one window.
pub fn dpsd_stack(window: &HologramStack, window_start: usize) -> Result<DopplerSpectrum> {
    let m = reshape_to_casorati(window)?;
    dpsd_window(
        &m,
        window.nx(),
        window.ny(),
        window.fs(),
        window_start,
        Apodization::Rectangular,
    )
}

/// ROI-averaged DPSD, returned as a single-pixel spectrum.
pub fn roi_dpsd(
    m: &CasoratiMatrix,
    roi: &Roi,
    fs: f64,
    window_start: usize,
    apodization: Apodization,
) -> Result<DopplerSpectrum> {
    let n_t = m.cols();
    if n_t < 2 {
        return invalid(format!("spectrum needs at least 2 frames, got {n_t}"));
    }
    if roi.nx() * roi.ny() != m.rows() {
        return invalid("region of interest does not match the window");
    }
    let pixels: Vec<usize> = roi.indices().collect();
    let mut acc = vec![0.0f64; n_t];
    pixel_spectra(m, &pixels, apodization, |_, spec| {
        acc.iter_mut().zip(spec).for_each(|(a, z)| *a += z.norm_sqr() as f64);
    });
    let count = pixels.len() as f64;
    let values = acc.into_iter().map(|a| (a / count) as f32).collect();
    Ok(DopplerSpectrum {
        nx: 1,
        ny: 1,
        n_t,
        fs,
        window_start,
        freq_axis: frequency_axis(n_t, fs),
        values,
    })
}

/// Band-integrated power Doppler image of one window.
#[derive(Debug, Clone)]
pub struct PowerDopplerImage {
    pub m0: Image,
    pub band: FrequencyBand,
    pub window_start: usize,
}

/// Indices of the frequency rows selected by `band`.
pub fn band_rows(freq_axis: &[f64], fs: f64, band: FrequencyBand, sidebands: Sidebands) -> Vec<usize> {
    freq_axis
        .iter()
        .enumerate()
        .filter(|(_, &f)| band.contains(f, fs, sidebands))
        .map(|(r, _)| r)
        .collect()
}

/// `M0 = sum_{f in band} S(f) * fs / n_t` per pixel.
pub fn power_doppler(s: &DopplerSpectrum, band: FrequencyBand, sidebands: Sidebands) -> Result<PowerDopplerImage> {
    band.check_nyquist(s.fs)?;
    let rows = band_rows(&s.freq_axis, s.fs, band, sidebands);
    if rows.is_empty() {
        return invalid(format!("band {band} Hz selects no frequency bin"));
    }
    let df = s.fs / s.n_t as f64;
    let m0 = (0..s.n_pixels())
        .map(|p| {
            let spec = s.pixel(p);
            rows.iter().map(|&r| spec[r] as f64).sum::<f64>() * df
        })
        .collect();
    Ok(PowerDopplerImage {
        m0: Image::new(s.nx, s.ny, m0)?,
        band,
        window_start: s.window_start,
    })
}

/// Time-stamped ROI power waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiSeries {
    pub times: Vec<f64>,
    pub power: Vec<f64>,
}

/// Mean of `m0` over the ROI for each image, stamped at the window centre.
pub fn roi_mean_series(images: &[PowerDopplerImage], roi: &Roi, plan: &WindowPlan) -> Result<RoiSeries> {
    let mut times = Vec::with_capacity(images.len());
    let mut power = Vec::with_capacity(images.len());
    let idx: Vec<usize> = roi.indices().collect();
    for img in images {
        if !roi.matches(img.m0.nx, img.m0.ny) {
            return invalid(format!(
                "image {}x{} does not match ROI {}x{}",
                img.m0.nx,
                img.m0.ny,
                roi.nx(),
                roi.ny()
            ));
        }
        times.push((img.window_start as f64 + plan.n_t as f64 / 2.0) / plan.fs);
        power.push(idx.iter().map(|&p| img.m0.data[p]).sum::<f64>() / idx.len() as f64);
    }
    Ok(RoiSeries { times, power })
}

/// ROI-averaged DPSD per window.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    /// Two-sided ascending axis, Hz.
    pub freq_axis: Vec<f64>,
    /// `power[w][r]`: window `w`, two-sided row `r`.
    pub power: Vec<Vec<f64>>,
    /// Displayed rows: frequencies `0..=fs/2`.
    pub display_freqs: Vec<f64>,
    /// `db[w][r]` over the displayed rows, global maximum at 0 dB.
    pub db: Vec<Vec<f64>>,
    pub window_starts: Vec<usize>,
}

/// Spectrogram of the ROI, optionally after per-window SVD clutter filtering.
pub fn spectrogram(
    stack: &HologramStack,
    roi: &Roi,
    plan: &WindowPlan,
    filter: Option<RankRule>,
    apodization: Apodization,
) -> Result<Spectrogram> {
    if !roi.matches(stack.nx(), stack.ny()) {
        return invalid("region of interest does not match the stack");
    }
    let mut power = Vec::with_capacity(plan.len());
    for (w, &start) in plan.starts.iter().enumerate() {
        let column = (|| {
            let m = reshape_to_casorati(&stack.slice(start, plan.n_t)?)?;
            let m = match filter {
                Some(rule) => {
                    let n_c = rule.resolve(stack.fs(), plan.n_t)?;
                    let basis = compute_temporal_basis(&m)?;
                    clutter_filter(&m, &basis, n_c)?
                }
                None => m,
            };
            roi_dpsd(&m, roi, stack.fs(), start, apodization)
        })()
        .map_err(|e| crate::Error::Window {
            index: w,
            source: Box::new(e),
        })?;
        power.push(column.values.iter().map(|&v| v as f64).collect::<Vec<f64>>());
    }
    let freq_axis = frequency_axis(plan.n_t, stack.fs());
    let first_display = freq_axis.iter().position(|&f| f >= 0.0).unwrap_or(0);
    let display_freqs = freq_axis[first_display..].to_vec();
    let max = power
        .iter()
        .flat_map(|c| &c[first_display..])
        .fold(0.0f64, |a, &b| a.max(b));
    let db = power
        .iter()
        .map(|c| {
            c[first_display..]
                .iter()
                .map(|&p| if max > 0.0 { power_db(p, max) } else { DB_FLOOR })
                .collect()
        })
        .collect();
    Ok(Spectrogram {
        freq_axis,
        power,
        display_freqs,
        db,
        window_starts: plan.starts.clone(),
    })
}
