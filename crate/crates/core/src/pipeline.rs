//! Per-window processing chain: window extraction, optional SVD clutter
//! filter, DPSD and band integration, assembled into power Doppler movies.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::doppler::{dpsd_window, power_doppler, Apodization, FrequencyBand, PowerDopplerImage, Sidebands};
use crate::error::{invalid, Error, Result};
use crate::holo::{reshape_to_casorati, CasoratiMatrix, HologramStack, Image, Roi, WindowPlan};
use crate::svd::{clutter_filter, compute_temporal_basis, ClutterRank, RankRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    FourierOnly,
    Svd,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::FourierOnly => "fourier",
            Mode::Svd => "svd",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fourier" | "fourier-only" => Ok(Mode::FourierOnly),
            "svd" => Ok(Mode::Svd),
            other => invalid(format!("unknown mode {other:?}, expected fourier or svd")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub plan: WindowPlan,
    pub band: FrequencyBand,
    pub mode: Mode,
    pub rank_rule: RankRule,
    pub sidebands: Sidebands,
    pub apodization: Apodization,
    /// Upper bound on windows resident at once.
    pub max_in_flight: usize,
}

impl PipelineConfig {
    /// Defaults: clutter rank from the band's lower cutoff, two-sided
    /// integration, rectangular window, two windows in flight.
    pub fn new(plan: WindowPlan, band: FrequencyBand, mode: Mode) -> Self {
        Self {
            plan,
            band,
            mode,
            rank_rule: RankRule::FromCutoff(band.f1),
            sidebands: Sidebands::TwoSided,
            apodization: Apodization::Rectangular,
            max_in_flight: 2,
        }
    }

    pub fn with_rank(mut self, rule: RankRule) -> Self {
        self.rank_rule = rule;
        self
    }

    fn validate(&self, stack: &HologramStack) -> Result<()> {
        if (self.plan.fs - stack.fs()).abs() > 1e-9 * stack.fs() {
            return invalid(format!(
                "plan sampled at {} Hz but stack at {} Hz",
                self.plan.fs,
                stack.fs()
            ));
        }
        if self.plan.starts.iter().any(|s| s + self.plan.n_t > stack.nt_total()) {
            return invalid("window plan exceeds the stack length");
        }
        if self.plan.is_empty() {
            return invalid("window plan is empty");
        }
        if self.plan.n_t < 2 {
            return invalid("windows need at least 2 frames");
        }
        self.band.check_nyquist(stack.fs())?;
        if self.mode == Mode::Svd {
            self.rank_rule.resolve(stack.fs(), self.plan.n_t)?;
            if stack.n_pixels() < self.plan.n_t {
                return invalid(format!(
                    "SVD mode needs at least as many pixels ({}) as frames per window ({})",
                    stack.n_pixels(),
                    self.plan.n_t
                ));
            }
        }
        if self.max_in_flight == 0 {
            return invalid("max_in_flight must be positive");
        }
        Ok(())
    }
}

/// Wall time spent per stage, summed over windows.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub decomposition: Duration,
    pub spectrum: Duration,
    pub integration: Duration,
    pub windows: usize,
}

impl StageTimings {
    fn add(&mut self, other: &StageTimings) {
        self.decomposition += other.decomposition;
        self.spectrum += other.spectrum;
        self.integration += other.integration;
        self.windows += other.windows;
    }

    pub fn total(&self) -> Duration {
        self.decomposition + self.spectrum + self.integration
    }
}

#[derive(Debug, Clone)]
pub struct PowerDopplerMovie {
    pub frames: Vec<PowerDopplerImage>,
    /// Window centre times, seconds.
    pub timestamps: Vec<f64>,
    pub band: FrequencyBand,
    pub mode: Mode,
    /// Clutter rank used per window (zero in Fourier mode).
    pub ranks: Vec<usize>,
    pub timings: StageTimings,
}

impl PowerDopplerMovie {
    /// Per-pixel arithmetic mean over all frames.
    pub fn mean_image(&self) -> Image {
        mean_of(&self.frames)
    }

    /// Mean over frames `range` (window indices).
    pub fn mean_over(&self, range: std::ops::Range<usize>) -> Result<Image> {
        if range.is_empty() || range.end > self.frames.len() {
            return invalid(format!("frame range {range:?} outside 0..{}", self.frames.len()));
        }
        Ok(mean_of(&self.frames[range]))
    }
}

fn mean_of(frames: &[PowerDopplerImage]) -> Image {
    let first = &frames[0].m0;
    let mut acc = vec![0.0; first.data.len()];
    for f in frames {
        acc.iter_mut().zip(&f.m0.data).for_each(|(a, v)| *a += v);
    }
    let n = frames.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Image {
        nx: first.nx,
        ny: first.ny,
        data: acc,
    }
}

/// Clutter-filtered (or untouched) space-time matrix of one window.
pub fn filtered_window(
    stack: &HologramStack,
    start: usize,
    n_t: usize,
    mode: Mode,
    rule: RankRule,
) -> Result<(CasoratiMatrix, ClutterRank)> {
    let m = reshape_to_casorati(&stack.slice(start, n_t)?)?;
    match mode {
        Mode::FourierOnly => Ok((m, ClutterRank(0))),
        Mode::Svd => {
            let n_c = rule.resolve(stack.fs(), n_t)?;
            let basis = compute_temporal_basis(&m)?;
            Ok((clutter_filter(&m, &basis, n_c)?, n_c))
        }
    }
}

fn process_window(
    stack: &HologramStack,
    cfg: &PipelineConfig,
    start: usize,
) -> Result<(PowerDopplerImage, usize, StageTimings)> {
    let mut timings = StageTimings {
        windows: 1,
        ..Default::default()
    };
    let t0 = Instant::now();
    let (m, n_c) = filtered_window(stack, start, cfg.plan.n_t, cfg.mode, cfg.rank_rule)?;
    timings.decomposition = t0.elapsed();

    let t1 = Instant::now();
    let s = dpsd_window(&m, stack.nx(), stack.ny(), stack.fs(), start, cfg.apodization)?;
    timings.spectrum = t1.elapsed();

    let t2 = Instant::now();
    let img = power_doppler(&s, cfg.band, cfg.sidebands)?;
    timings.integration = t2.elapsed();

    if img.m0.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite power Doppler value".into()));
    }
    Ok((img, n_c.0, timings))
}

/// Runs the per-window chain over every window of `cfg.plan`.
///
/// Windows are processed in batches of `max_in_flight` on the rayon pool and
/// merged in window order.
pub fn process_stack(stack: &HologramStack, cfg: &PipelineConfig) -> Result<PowerDopplerMovie> {
    cfg.validate(stack)?;
    let mut frames = Vec::with_capacity(cfg.plan.len());
    let mut ranks = Vec::with_capacity(cfg.plan.len());
    let mut timings = StageTimings::default();
    let indexed: Vec<(usize, usize)> = cfg.plan.starts.iter().copied().enumerate().collect();
    for batch in indexed.chunks(cfg.max_in_flight) {
        let results: Vec<_> = batch
            .par_iter()
            .map(|&(w, start)| {
                process_window(stack, cfg, start).map_err(|e| Error::Window {
                    index: w,
                    source: Box::new(e),
                })
            })
            .collect();
        for r in results {
            let (img, n_c, t) = r?;
            frames.push(img);
            ranks.push(n_c);
            timings.add(&t);
        }
    }
    let timestamps = (0..cfg.plan.len()).map(|w| cfg.plan.center_time(w)).collect();
    Ok(PowerDopplerMovie {
        frames,
        timestamps,
        band: cfg.band,
        mode: cfg.mode,
        ranks,
        timings,
    })
}

/// Both modes on identical windows.
#[derive(Debug, Clone)]
pub struct ModeComparison {
    pub fourier: PowerDopplerMovie,
    pub svd: PowerDopplerMovie,
    /// `||M0_svd - M0_fourier||_F / ||M0_fourier||_F` per window.
    pub relative_difference: Vec<f64>,
    /// ROI mean power, svd over fourier, per window (when an ROI is given).
    pub roi_power_ratio: Option<Vec<f64>>,
}

pub fn compare_modes(stack: &HologramStack, cfg: &PipelineConfig, roi: Option<&Roi>) -> Result<ModeComparison> {
    let fourier = process_stack(
        stack,
        &PipelineConfig {
            mode: Mode::FourierOnly,
            ..cfg.clone()
        },
    )?;
    let svd = process_stack(
        stack,
        &PipelineConfig {
            mode: Mode::Svd,
            ..cfg.clone()
        },
    )?;
    let relative_difference = fourier
        .frames
        .iter()
        .zip(&svd.frames)
        .map(|(f, s)| relative_image_distance(&s.m0, &f.m0))
        .collect();
    let roi_power_ratio = match roi {
        Some(roi) => {
            let f = crate::doppler::roi_mean_series(&fourier.frames, roi, &cfg.plan)?;
            let s = crate::doppler::roi_mean_series(&svd.frames, roi, &cfg.plan)?;
            Some(
                s.power
                    .iter()
                    .zip(&f.power)
                    .map(|(s, f)| if *f > 0.0 { s / f } else { f64::NAN })
                    .collect(),
            )
        }
        None => None,
    };
    Ok(ModeComparison {
        fourier,
        svd,
        relative_difference,
        roi_power_ratio,
    })
}

pub fn relative_image_distance(a: &Image, reference: &Image) -> f64 {
    let diff: f64 = a.data.iter().zip(&reference.data).map(|(x, y)| (x - y) * (x - y)).sum();
    let norm: f64 = reference.data.iter().map(|y| y * y).sum();
    if norm > 0.0 {
        (diff / norm).sqrt()
    } else {
        diff.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holo::plan_windows;
    use num_complex::Complex32;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise_stack(nx: usize, ny: usize, nt: usize, fs: f64, seed: u64) -> HologramStack {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..nx * ny * nt)
            .map(|_| Complex32::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        HologramStack::new(nx, ny, nt, fs, data).unwrap()
    }

    fn config(stack: &HologramStack, n_t: usize, mode: Mode) -> PipelineConfig {
        let plan = plan_windows(stack.nt_total(), n_t, n_t / 2, stack.fs()).unwrap();
        PipelineConfig::new(plan, FrequencyBand::new(2_000.0, 6_000.0).unwrap(), mode)
    }

    #[test]
    fn zero_rank_svd_matches_fourier() {
        let stack = noise_stack(8, 8, 96, 32_000.0, 1);
        let f = process_stack(&stack, &config(&stack, 32, Mode::FourierOnly)).unwrap();
        let s = process_stack(&stack, &config(&stack, 32, Mode::Svd).with_rank(RankRule::Explicit(0))).unwrap();
        assert_eq!(f.frames.len(), 5);
        for (a, b) in f.frames.iter().zip(&s.frames) {
            assert!(relative_image_distance(&b.m0, &a.m0) < 1e-4);
        }
        assert!(s.timestamps.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn batching_does_not_change_output() {
        let stack = noise_stack(6, 6, 64, 20_000.0, 2);
        let mut cfg = config(&stack, 16, Mode::Svd);
        let one = process_stack(
            &stack,
            &PipelineConfig {
                max_in_flight: 1,
                ..cfg.clone()
            },
        )
        .unwrap();
        cfg.max_in_flight = 5;
        let many = process_stack(&stack, &cfg).unwrap();
        for (a, b) in one.frames.iter().zip(&many.frames) {
            assert_eq!(a.m0, b.m0);
        }
        assert_eq!(one.ranks, vec![3; one.frames.len()]);
    }

    #[test]
    fn too_few_pixels_for_svd() {
        let stack = noise_stack(2, 2, 64, 20_000.0, 3);
        assert!(process_stack(&stack, &config(&stack, 16, Mode::Svd)).is_err());
        assert!(process_stack(&stack, &config(&stack, 16, Mode::FourierOnly)).is_ok());
    }

    #[test]
    fn comparison_with_zero_rank() {
        let stack = noise_stack(6, 6, 64, 20_000.0, 4);
        let cfg = config(&stack, 16, Mode::Svd).with_rank(RankRule::Explicit(0));
        let roi = Roi::rect(6, 6, 1, 1, 4, 4).unwrap();
        let cmp = compare_modes(&stack, &cfg, Some(&roi)).unwrap();
        assert!(cmp.relative_difference.iter().all(|&d| d <= 1e-4));
        assert!(cmp.roi_power_ratio.unwrap().iter().all(|r| (r - 1.0).abs() < 1e-4));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("svd".parse::<Mode>().unwrap(), Mode::Svd);
        assert_eq!("fourier".parse::<Mode>().unwrap(), Mode::FourierOnly);
        assert!("x".parse::<Mode>().is_err());
    }
}
