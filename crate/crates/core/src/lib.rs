//! Spatio-temporal (SVD) clutter filtering for laser Doppler holography.
//!
//! A stack of complex holograms `H(x, y, t)` is cut into short-time windows.
//! Each window is reshaped into a space-time (Casorati) matrix, optionally
//! stripped of its leading singular components, and analysed pixel-wise by a
//! short-time Fourier transform. Band integration of the Doppler power
//! spectrum gives power Doppler images, one per window.
//!
//! Module map:
//! - [`holo`]: stack, Casorati matrix and window schedule types.
//! - [`svd`]: Gram-matrix economy SVD, rank truncation and diagnostics.
//! - [`doppler`]: Doppler spectra, band power, ROI series, spectrograms.
//! - [`pipeline`]: per-window orchestration into movies.
//! - [`synth`]: seeded synthetic scenes with known ground truth.
//! - [`io`], [`display`]: file formats, rasters, composites and CSV.

pub mod display;
pub mod doppler;
pub mod error;
pub mod holo;
pub mod io;
mod linalg;
pub mod manifest;
pub mod pipeline;
pub mod svd;
pub mod synth;

pub use error::{Error, Result};
pub use num_complex::{Complex32, Complex64};
