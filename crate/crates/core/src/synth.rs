//! Seeded synthetic hologram stacks with known ground truth.
//!
//! A stack is the sum of independent components, each generated from its own
//! counter-based random streams (one stream per component and pixel):
//!
//! - background: static complex Gaussian speckle, frozen in time;
//! - blood: per-pixel independent complex AR(1) processes (discrete
//!   Ornstein-Uhlenbeck), Lorentzian-like spectrum of half width `bandwidth`,
//!   optionally modulated by a periodic power envelope;
//! - clutter: one spatial pattern times a narrowband tone during scheduled
//!   bursts, identical at every pixel (spatially rank 1);
//! - jitter: separable `s(x, y) g(t)` with `s` a sinc-shaped diffraction
//!   pattern and `g` band-limited noise;
//! - noise: optional white complex noise.
//!
//! Scene files are flat `key = value` text; see [`SynthScene::parse`].

use std::f64::consts::PI;

use num_complex::{Complex32, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::doppler::{bin_frequency, FrequencyBand};
use crate::error::{invalid, Error, Result};
use crate::holo::{HologramStack, Image, Roi};

const STREAM_BACKGROUND: u64 = 1;
const STREAM_BLOOD: u64 = 2;
const STREAM_JITTER: u64 = 4;
const STREAM_NOISE: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VesselShape {
    Disk {
        cx: f64,
        cy: f64,
        r: f64,
    },
    /// Capsule around the segment `(x0, y0)-(x1, y1)`.
    Segment {
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
        half_width: f64,
    },
}

impl VesselShape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            VesselShape::Disk { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) <= r * r,
            VesselShape::Segment {
                x0,
                y0,
                x1,
                y1,
                half_width,
            } => {
                let (dx, dy) = (x1 - x0, y1 - y0);
                let len2 = dx * dx + dy * dy;
                let s = if len2 > 0.0 {
                    (((x - x0) * dx + (y - y0) * dy) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let (px, py) = (x0 + s * dx, y0 + s * dy);
                (x - px).powi(2) + (y - py).powi(2) <= half_width * half_width
            }
        }
    }
}

/// Periodic power envelope `1 + depth * cos(2 pi t / period + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub period_frames: f64,
    pub depth: f64,
    pub phase: f64,
}

impl Pulse {
    pub fn envelope(&self, t: f64) -> f64 {
        1.0 + self.depth * (2.0 * PI * t / self.period_frames + self.phase).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vessel {
    pub shape: VesselShape,
    /// Half width at half maximum of the blood Doppler spectrum, Hz.
    pub bandwidth_hz: f64,
    /// Mean blood power per pixel.
    pub power: f64,
    pub pulse: Option<Pulse>,
}

impl Vessel {
    pub fn envelope(&self, t: f64) -> f64 {
        self.pulse.map_or(1.0, |p| p.envelope(t))
    }

    /// AR(1) coefficient `exp(-2 pi bandwidth / fs)`.
    pub fn ar_coefficient(&self, fs: f64) -> f64 {
        (-2.0 * PI * self.bandwidth_hz / fs).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClutterPattern {
    Uniform,
    /// Unit-modulus phase `exp(i (c0 u + c1 v + c2 u^2 + c3 v^2))`, `u, v` in `[-1, 1]`.
    Smooth([f64; 4]),
}

impl ClutterPattern {
    fn value(&self, x: usize, y: usize, nx: usize, ny: usize) -> Complex64 {
        match *self {
            ClutterPattern::Uniform => Complex64::new(1.0, 0.0),
            ClutterPattern::Smooth(c) => {
                let norm = |i: usize, n: usize| {
                    if n > 1 {
                        2.0 * i as f64 / (n - 1) as f64 - 1.0
                    } else {
                        0.0
                    }
                };
                let (u, v) = (norm(x, nx), norm(y, ny));
                Complex64::from_polar(1.0, c[0] * u + c[1] * v + c[2] * u * u + c[3] * v * v)
            }
        }
    }
}

/// Hann-tapered tone at `center_hz` over frames `start .. start + duration`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Burst {
    pub start: usize,
    pub duration: usize,
    pub center_hz: f64,
    pub amplitude: f64,
    pub pattern: ClutterPattern,
}

impl Burst {
    pub fn overlaps(&self, start: usize, len: usize) -> bool {
        self.start < start + len && start < self.start + self.duration
    }

    fn temporal(&self, t: usize, fs: f64) -> Complex64 {
        if t < self.start || t >= self.start + self.duration {
            return Complex64::new(0.0, 0.0);
        }
        let k = (t - self.start) as f64;
        let taper = (PI * (k + 0.5) / self.duration as f64).sin().powi(2);
        Complex64::from_polar(self.amplitude * taper, 2.0 * PI * self.center_hz * k / fs)
    }
}

/// Camera-jitter artifact centred on pixel `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jitter {
    pub x: f64,
    pub y: f64,
    /// Width of the sinc lobes, pixels.
    pub width_px: f64,
    pub amplitude: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Jitter {
    pub fn pattern(&self, x: usize, y: usize) -> f64 {
        let sinc = |d: f64| if d == 0.0 { 1.0 } else { (PI * d).sin() / (PI * d) };
        self.amplitude * sinc((x as f64 - self.x) / self.width_px) * sinc((y as f64 - self.y) / self.width_px)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthScene {
    pub nx: usize,
    pub ny: usize,
    pub nt_total: usize,
    pub fs: f64,
    /// RMS amplitude of the static speckle background.
    pub background: f64,
    /// RMS amplitude of additive white noise.
    pub noise: f64,
    pub vessels: Vec<Vessel>,
    pub bursts: Vec<Burst>,
    pub jitter: Option<Jitter>,
    pub seed: u64,
}

impl SynthScene {
    pub fn new(nx: usize, ny: usize, nt_total: usize, fs: f64, seed: u64) -> Self {
        Self {
            nx,
            ny,
            nt_total,
            fs,
            background: 0.0,
            noise: 0.0,
            vessels: Vec::new(),
            bursts: Vec::new(),
            jitter: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nt_total == 0 {
            return invalid("scene dimensions must be positive");
        }
        if !(self.fs > 0.0 && self.fs.is_finite()) {
            return invalid(format!("sampling frequency must be positive, got {}", self.fs));
        }
        let nyq = self.fs / 2.0;
        if !(self.background >= 0.0 && self.noise >= 0.0) {
            return invalid("amplitudes must be non-negative");
        }
        for v in &self.vessels {
            if !(v.power >= 0.0 && v.bandwidth_hz >= 0.0) {
                return invalid("vessel power and bandwidth must be non-negative");
            }
            if let Some(p) = v.pulse {
                if !(p.period_frames > 0.0 && (0.0..=1.0).contains(&p.depth)) {
                    return invalid("pulse needs period > 0 and depth in [0, 1]");
                }
            }
        }
        for b in &self.bursts {
            if b.center_hz.abs() > nyq {
                return invalid(format!("burst at {} Hz exceeds Nyquist {nyq} Hz", b.center_hz));
            }
            if b.amplitude.is_nan() || b.amplitude < 0.0 || b.duration == 0 {
                return invalid("bursts need non-negative amplitude and positive duration");
            }
        }
        if let Some(j) = &self.jitter {
            if !(0.0 <= j.f_lo && j.f_lo < j.f_hi && j.f_hi <= nyq) {
                return invalid(format!(
                    "jitter band {}..{} Hz must lie within 0..{nyq} Hz",
                    j.f_lo, j.f_hi
                ));
            }
            if !(j.amplitude >= 0.0 && j.width_px > 0.0) {
                return invalid("jitter needs non-negative amplitude and positive width");
            }
        }
        Ok(())
    }

    /// Index of the vessel covering each pixel (last listed wins).
    pub fn vessel_map(&self) -> Vec<Option<usize>> {
        let mut map = vec![None; self.nx * self.ny];
        for y in 0..self.ny {
            for x in 0..self.nx {
                for (i, v) in self.vessels.iter().enumerate() {
                    if v.shape.contains(x as f64, y as f64) {
                        map[y * self.nx + x] = Some(i);
                    }
                }
            }
        }
        map
    }

    /// Mask of the pixels covered by vessel `index`.
    pub fn vessel_roi(&self, index: usize) -> Result<Roi> {
        let mask = self.vessel_map().into_iter().map(|v| v == Some(index)).collect();
        Roi::new(self.nx, self.ny, mask)
    }

    /// Parses the flat `key = value` scene format.
    ///
    /// ```text
    /// nx = 64
    /// ny = 64
    /// nt_total = 2048
    /// fs = 60000
    /// seed = 7
    /// background = 1.0
    /// noise = 0.0
    /// # disk cx cy r bandwidth_hz power [pulse period_frames depth phase]
    /// vessel = disk 32 32 10 8000 1.0
    /// # segment x0 y0 x1 y1 half_width bandwidth_hz power [pulse ...]
    /// vessel = segment 4 10 60 20 2 8000 1.0 pulse 1024 0.8 0
    /// # start duration center_hz amplitude [uniform | smooth c0 c1 c2 c3]
    /// burst = 256 512 3000 5.0 uniform
    /// # x y width_px amplitude f_lo f_hi
    /// jitter = 50 12 3 4.0 10000 28000
    /// ```
    pub fn parse(text: &str) -> Result<SynthScene> {
        let mut scene = SynthScene::new(0, 0, 0, 0.0, 0);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::InvalidInput(format!("scene line {}: {msg}", lineno + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let words: Vec<&str> = value.split_whitespace().collect();
            let num = |i: usize| -> Result<f64> {
                words
                    .get(i)
                    .ok_or_else(|| err(format!("{key}: missing field {}", i + 1)))?
                    .parse::<f64>()
                    .map_err(|e| err(format!("{key}: {e}")))
            };
            let int = |s: &str| -> Result<usize> { s.parse::<usize>().map_err(|e| err(format!("{key}: {e}"))) };
            match key {
                "nx" => scene.nx = int(value)?,
                "ny" => scene.ny = int(value)?,
                "nt_total" => scene.nt_total = int(value)?,
                "fs" => scene.fs = num(0)?,
                "seed" => scene.seed = value.parse().map_err(|e| err(format!("seed: {e}")))?,
                "background" => scene.background = num(0)?,
                "noise" => scene.noise = num(0)?,
                "vessel" => {
                    let (shape, rest) = match words.first() {
                        Some(&"disk") => (
                            VesselShape::Disk {
                                cx: num(1)?,
                                cy: num(2)?,
                                r: num(3)?,
                            },
                            4,
                        ),
                        Some(&"segment") => (
                            VesselShape::Segment {
                                x0: num(1)?,
                                y0: num(2)?,
                                x1: num(3)?,
                                y1: num(4)?,
                                half_width: num(5)?,
                            },
                            6,
                        ),
                        other => return Err(err(format!("unknown vessel shape {other:?}"))),
                    };
                    let pulse = match words.get(rest + 2) {
                        Some(&"pulse") => Some(Pulse {
                            period_frames: num(rest + 3)?,
                            depth: num(rest + 4)?,
                            phase: num(rest + 5)?,
                        }),
                        None => None,
                        Some(other) => return Err(err(format!("unexpected {other:?}"))),
                    };
                    scene.vessels.push(Vessel {
                        shape,
                        bandwidth_hz: num(rest)?,
                        power: num(rest + 1)?,
                        pulse,
                    });
                }
                "burst" => {
                    let pattern = match words.get(4) {
                        None | Some(&"uniform") => ClutterPattern::Uniform,
                        Some(&"smooth") => ClutterPattern::Smooth([num(5)?, num(6)?, num(7)?, num(8)?]),
                        Some(other) => return Err(err(format!("unknown clutter pattern {other:?}"))),
                    };
                    scene.bursts.push(Burst {
                        start: int(words.first().copied().unwrap_or(""))?,
                        duration: int(words.get(1).copied().unwrap_or(""))?,
                        center_hz: num(2)?,
                        amplitude: num(3)?,
                        pattern,
                    });
                }
                "jitter" => {
                    scene.jitter = Some(Jitter {
                        x: num(0)?,
                        y: num(1)?,
                        width_px: num(2)?,
                        amplitude: num(3)?,
                        f_lo: num(4)?,
                        f_hi: num(5)?,
                    })
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "nx = {}\nny = {}\nnt_total = {}\nfs = {}\nseed = {}\nbackground = {}\nnoise = {}\n",
            self.nx, self.ny, self.nt_total, self.fs, self.seed, self.background, self.noise
        );
        for v in &self.vessels {
            let shape = match v.shape {
                VesselShape::Disk { cx, cy, r } => format!("disk {cx} {cy} {r}"),
                VesselShape::Segment {
                    x0,
                    y0,
                    x1,
                    y1,
                    half_width,
                } => {
                    format!("segment {x0} {y0} {x1} {y1} {half_width}")
                }
            };
            let pulse = v
                .pulse
                .map(|p| format!(" pulse {} {} {}", p.period_frames, p.depth, p.phase))
                .unwrap_or_default();
            out += &format!("vessel = {shape} {} {}{pulse}\n", v.bandwidth_hz, v.power);
        }
        for b in &self.bursts {
            let pattern = match b.pattern {
                ClutterPattern::Uniform => "uniform".to_string(),
                ClutterPattern::Smooth(c) => format!("smooth {} {} {} {}", c[0], c[1], c[2], c[3]),
            };
            out += &format!(
                "burst = {} {} {} {} {pattern}\n",
                b.start, b.duration, b.center_hz, b.amplitude
            );
        }
        if let Some(j) = &self.jitter {
            out += &format!(
                "jitter = {} {} {} {} {} {}\n",
                j.x, j.y, j.width_px, j.amplitude, j.f_lo, j.f_hi
            );
        }
        out
    }
}

/// Blood process parameters of one pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BloodPixel {
    pub vessel: usize,
    pub power: f64,
    pub ar_coefficient: f64,
}

/// Known content of a generated stack.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub nx: usize,
    pub ny: usize,
    pub nt_total: usize,
    pub fs: f64,
    pub pixels: Vec<Option<BloodPixel>>,
    pub vessels: Vec<Vessel>,
    pub bursts: Vec<Burst>,
    pub jitter: Option<Jitter>,
}

impl GroundTruth {
    /// Mean of vessel `index`'s power envelope over frames `start .. start + len`.
    pub fn mean_envelope(&self, index: usize, start: usize, len: usize) -> f64 {
        let v = &self.vessels[index];
        (start..start + len).map(|t| v.envelope(t as f64)).sum::<f64>() / len as f64
    }

    /// Whether any clutter burst overlaps frames `start .. start + len`.
    pub fn burst_in(&self, start: usize, len: usize) -> bool {
        self.bursts.iter().any(|b| b.overlaps(start, len))
    }

    /// Jitter pattern magnitude per pixel (zero without jitter).
    pub fn jitter_map(&self) -> Image {
        let data = (0..self.ny)
            .flat_map(|y| (0..self.nx).map(move |x| (x, y)))
            .map(|(x, y)| self.jitter.map_or(0.0, |j| j.pattern(x, y).abs()))
            .collect();
        Image {
            nx: self.nx,
            ny: self.ny,
            data,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# ground truth\nnx = {}\nny = {}\nnt_total = {}\nfs = {}\n",
            self.nx, self.ny, self.nt_total, self.fs
        );
        for b in &self.bursts {
            out += &format!("burst = {} {} {} {}\n", b.start, b.duration, b.center_hz, b.amplitude);
        }
        if let Some(j) = &self.jitter {
            out += &format!(
                "jitter = {} {} {} {} {} {}\n",
                j.x, j.y, j.width_px, j.amplitude, j.f_lo, j.f_hi
            );
        }
        out += "# pixel = x y vessel power ar_coefficient\n";
        for (p, px) in self.pixels.iter().enumerate() {
            if let Some(b) = px {
                out += &format!(
                    "pixel = {} {} {} {} {}\n",
                    p % self.nx,
                    p / self.nx,
                    b.vessel,
                    b.power,
                    b.ar_coefficient
                );
            }
        }
        out
    }
}

/// Two-sided fraction of an AR(1) process's power with `f1 <= |f| <= f2`.
///
/// The normalised spectral density is
/// `(1 - a^2) / (1 - 2 a cos w + a^2) / (2 pi)` over `w` in `[-pi, pi]`, whose
/// antiderivative is `atan(k tan(w / 2)) / pi` with `k = (1 + a) / (1 - a)`.
pub fn ar1_band_fraction(a: f64, f1: f64, f2: f64, fs: f64) -> f64 {
    let cdf = |f: f64| -> f64 {
        let w = (2.0 * PI * f / fs).clamp(0.0, PI);
        if w >= PI {
            return 0.5;
        }
        if a >= 1.0 {
            return if w > 0.0 { 0.5 } else { 0.0 };
        }
        let k = (1.0 + a) / (1.0 - a);
        (k * (w / 2.0).tan()).atan() / PI
    };
    2.0 * (cdf(f2) - cdf(f1))
}

/// Expected in-band blood power per pixel, averaged over the whole stack.
///
/// Power-Doppler images of the same band estimate `n_t * fs` times this map
/// (up to spectral leakage of the finite window).
pub fn ground_truth_band_power(truth: &GroundTruth, band: FrequencyBand) -> Image {
    let env: Vec<f64> = (0..truth.vessels.len())
        .map(|i| truth.mean_envelope(i, 0, truth.nt_total))
        .collect();
    let data = truth
        .pixels
        .iter()
        .map(|px| match px {
            Some(b) => b.power * env[b.vessel] * ar1_band_fraction(b.ar_coefficient, band.f1, band.f2, truth.fs),
            None => 0.0,
        })
        .collect();
    Image {
        nx: truth.nx,
        ny: truth.ny,
        data,
    }
}

fn pixel_rng(seed: u64, component: u64, pixel: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((component << 40) | pixel as u64);
    rng
}

fn complex_normal(rng: &mut ChaCha8Rng, sigma: f64) -> Complex64 {
    let s = sigma / 2f64.sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Individually generated components, each in stack order.
#[derive(Debug, Clone)]
pub struct SynthComponents {
    pub background: Option<Vec<Complex64>>,
    pub blood: Option<Vec<Complex64>>,
    pub clutter: Option<Vec<Complex64>>,
    pub jitter: Option<Vec<Complex64>>,
    pub noise: Option<Vec<Complex64>>,
}

pub fn generate_components(scene: &SynthScene) -> Result<SynthComponents> {
    scene.validate()?;
    let (nx, ny, nt) = (scene.nx, scene.ny, scene.nt_total);
    let npix = nx * ny;
    let len = npix * nt;
    let zeros = || vec![Complex64::new(0.0, 0.0); len];

    let background = (scene.background > 0.0).then(|| {
        let mut out = zeros();
        for p in 0..npix {
            let z = complex_normal(&mut pixel_rng(scene.seed, STREAM_BACKGROUND, p), scene.background);
            for t in 0..nt {
                out[t * npix + p] = z;
            }
        }
        out
    });

    let map = scene.vessel_map();
    let blood = map.iter().any(|v| v.is_some()).then(|| {
        let mut out = zeros();
        for (p, v) in map.iter().enumerate() {
            let Some(vi) = *v else { continue };
            let vessel = &scene.vessels[vi];
            let a = vessel.ar_coefficient(scene.fs);
            let drive = (vessel.power * (1.0 - a * a)).sqrt();
            let mut rng = pixel_rng(scene.seed, STREAM_BLOOD, p);
            let mut x = complex_normal(&mut rng, vessel.power.sqrt());
            for t in 0..nt {
                out[t * npix + p] = x * vessel.envelope(t as f64).sqrt();
                x = x * a + complex_normal(&mut rng, drive);
            }
        }
        out
    });

    let clutter = (!scene.bursts.is_empty()).then(|| {
        let mut out = zeros();
        for b in &scene.bursts {
            let pattern: Vec<Complex64> = (0..npix).map(|p| b.pattern.value(p % nx, p / nx, nx, ny)).collect();
            for t in b.start..(b.start + b.duration).min(nt) {
                let c = b.temporal(t, scene.fs);
                for (o, s) in out[t * npix..(t + 1) * npix].iter_mut().zip(&pattern) {
                    *o += s * c;
                }
            }
        }
        out
    });

    let jitter = scene.jitter.map(|j| {
        let gate = jitter_gate(&j, nt, scene.fs, scene.seed);
        let pattern: Vec<f64> = (0..npix).map(|p| j.pattern(p % nx, p / nx)).collect();
        let mut out = zeros();
        for t in 0..nt {
            for (o, s) in out[t * npix..(t + 1) * npix].iter_mut().zip(&pattern) {
                *o = gate[t] * *s;
            }
        }
        out
    });

    let noise = (scene.noise > 0.0).then(|| {
        let mut out = zeros();
        for p in 0..npix {
            let mut rng = pixel_rng(scene.seed, STREAM_NOISE, p);
            for t in 0..nt {
                out[t * npix + p] = complex_normal(&mut rng, scene.noise);
            }
        }
        out
    });

    Ok(SynthComponents {
        background,
        blood,
        clutter,
        jitter,
        noise,
    })
}

/// Unit-RMS complex noise restricted to `f_lo <= |f| <= f_hi`.
fn jitter_gate(j: &Jitter, nt: usize, fs: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = pixel_rng(seed, STREAM_JITTER, 0);
    let mut buf: Vec<Complex64> = (0..nt).map(|_| complex_normal(&mut rng, 1.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(nt).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        let f = bin_frequency(k, nt, fs).abs();
        if f < j.f_lo || f > j.f_hi {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(nt).process(&mut buf);
    let rms = (buf.iter().map(|z| z.norm_sqr()).sum::<f64>() / nt as f64).sqrt();
    if rms > 0.0 {
        buf.iter_mut().for_each(|z| *z /= rms);
    }
    buf
}

/// Generates the stack and its ground truth.
pub fn generate_stack(scene: &SynthScene) -> Result<(HologramStack, GroundTruth)> {
    let parts = generate_components(scene)?;
    let len = scene.nx * scene.ny * scene.nt_total;
    let mut sum = vec![Complex64::new(0.0, 0.0); len];
    for part in [
        &parts.background,
        &parts.blood,
        &parts.clutter,
        &parts.jitter,
        &parts.noise,
    ]
    .into_iter()
    .flatten()
    {
        sum.iter_mut().zip(part).for_each(|(s, v)| *s += v);
    }
    let data = sum
        .into_iter()
        .map(|z| Complex32::new(z.re as f32, z.im as f32))
        .collect();
    let stack = HologramStack::new(scene.nx, scene.ny, scene.nt_total, scene.fs, data)?;

    let pixels = scene
        .vessel_map()
        .into_iter()
        .map(|v| {
            v.map(|i| BloodPixel {
                vessel: i,
                power: scene.vessels[i].power,
                ar_coefficient: scene.vessels[i].ar_coefficient(scene.fs),
            })
        })
        .collect();
    let truth = GroundTruth {
        nx: scene.nx,
        ny: scene.ny,
        nt_total: scene.nt_total,
        fs: scene.fs,
        pixels,
        vessels: scene.vessels.clone(),
        bursts: scene.bursts.clone(),
        jitter: scene.jitter,
    };
    Ok((stack, truth))
}
