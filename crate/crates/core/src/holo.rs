//! Hologram data model.
//!
//! Pixels are flattened row-major over `(y, x)`: pixel `(x, y)` has flat index
//! `y * nx + x`. A stack stores frames back to back, so frame `t` occupies
//! `data[t * nx * ny .. (t + 1) * nx * ny]`. The same order is used for the
//! rows of a [`CasoratiMatrix`], for every 2D [`Image`] and for the on-disk
//! stack format.

use num_complex::Complex32;

use crate::error::{invalid, Result};

/// Time series of complex holograms sampled at `fs` Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct HologramStack {
    nx: usize,
    ny: usize,
    nt_total: usize,
    fs: f64,
    data: Vec<Complex32>,
}

impl HologramStack {
    pub fn new(nx: usize, ny: usize, nt_total: usize, fs: f64, data: Vec<Complex32>) -> Result<Self> {
        if nx == 0 || ny == 0 || nt_total == 0 {
            return invalid(format!("stack dimensions must be positive, got {nx}x{ny}x{nt_total}"));
        }
        if !(fs > 0.0 && fs.is_finite()) {
            return invalid(format!("sampling frequency must be positive, got {fs}"));
        }
        let expected = nx
            .checked_mul(ny)
            .and_then(|n| n.checked_mul(nt_total))
            .ok_or_else(|| crate::Error::InvalidInput("stack size overflows".into()))?;
        if data.len() != expected {
            return invalid(format!("stack holds {} samples, expected {expected}", data.len()));
        }
        if let Some(i) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return invalid(format!("non-finite sample at index {i}"));
        }
        Ok(Self {
            nx,
            ny,
            nt_total,
            fs,
            data,
        })
    }

    pub fn zeros(nx: usize, ny: usize, nt_total: usize, fs: f64) -> Result<Self> {
        Self::new(nx, ny, nt_total, fs, vec![Complex32::new(0.0, 0.0); nx * ny * nt_total])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nt_total(&self) -> usize {
        self.nt_total
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn n_pixels(&self) -> usize {
        self.nx * self.ny
    }

    pub fn data(&self) -> &[Complex32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex32> {
        self.data
    }

    pub fn frame(&self, t: usize) -> &[Complex32] {
        let n = self.n_pixels();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn get(&self, x: usize, y: usize, t: usize) -> Complex32 {
        self.data[t * self.n_pixels() + y * self.nx + x]
    }

    /// Frames `start .. start + len` as a new stack.
    pub fn slice(&self, start: usize, len: usize) -> Result<HologramStack> {
        if len == 0 || start + len > self.nt_total {
            return invalid(format!(
                "frames {start}..{} out of range for a stack of {} frames",
                start + len,
                self.nt_total
            ));
        }
        let n = self.n_pixels();
        Ok(HologramStack {
            nx: self.nx,
            ny: self.ny,
            nt_total: len,
            fs: self.fs,
            data: self.data[start * n..(start + len) * n].to_vec(),
        })
    }
}

/// Space-time matrix of one window: `rows = nx * ny` pixels, `cols = n_t`
/// frames. Stored column-major, so each column is one contiguous frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CasoratiMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex32>,
}

impl CasoratiMatrix {
    pub fn from_columns(rows: usize, cols: usize, data: Vec<Complex32>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return invalid(format!("matrix dimensions must be positive, got {rows}x{cols}"));
        }
        if data.len() != rows * cols {
            return invalid(format!("matrix holds {} entries, expected {}", data.len(), rows * cols));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex32::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Complex32 {
        self.data[col * self.rows + row]
    }

    pub fn column(&self, col: usize) -> &[Complex32] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[Complex32] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex32] {
        &mut self.data
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr() as f64).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    /// `||self - other||_F / ||other||_F`, or the absolute norm when `other` is zero.
    pub fn relative_distance(&self, other: &CasoratiMatrix) -> f64 {
        let diff: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let d = a.to_f64() - b.to_f64();
                d.norm_sqr()
            })
            .sum();
        let reference = other.frobenius_norm();
        if reference > 0.0 {
            diff.sqrt() / reference
        } else {
            diff.sqrt()
        }
    }
}

trait ToF64 {
    fn to_f64(self) -> num_complex::Complex64;
}

impl ToF64 for Complex32 {
    fn to_f64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re as f64, self.im as f64)
    }
}

/// Reshape a window (all frames of `window`) into its space-time matrix.
pub fn reshape_to_casorati(window: &HologramStack) -> Result<CasoratiMatrix> {
    CasoratiMatrix::from_columns(window.n_pixels(), window.nt_total(), window.data().to_vec())
}

/// Inverse of [`reshape_to_casorati`]. The sampling frequency is not carried
/// by the matrix and must be supplied.
pub fn reshape_from_casorati(m: &CasoratiMatrix, nx: usize, ny: usize, fs: f64) -> Result<HologramStack> {
    if nx.checked_mul(ny) != Some(m.rows()) {
        return invalid(format!("matrix has {} rows, expected nx*ny = {nx}*{ny}", m.rows()));
    }
    HologramStack::new(nx, ny, m.cols(), fs, m.as_slice().to_vec())
}

/// Sliding short-time window schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPlan {
    pub n_t: usize,
    pub hop: usize,
    pub starts: Vec<usize>,
    pub fs: f64,
    /// Window duration in seconds.
    pub t_win: f64,
}

impl WindowPlan {
    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    /// Centre time of window `index` in seconds.
    pub fn center_time(&self, index: usize) -> f64 {
        (self.starts[index] as f64 + self.n_t as f64 / 2.0) / self.fs
    }
}

/// Windows of `n_t` frames advancing by `hop`. Frames that do not fill a final
/// window are dropped.
pub fn plan_windows(nt_total: usize, n_t: usize, hop: usize, fs: f64) -> Result<WindowPlan> {
    if n_t == 0 || n_t > nt_total {
        return invalid(format!("window length {n_t} must be in 1..={nt_total}"));
    }
    if hop == 0 || hop > n_t {
        return invalid(format!("hop {hop} must be in 1..={n_t}"));
    }
    if !(fs > 0.0 && fs.is_finite()) {
        return invalid(format!("sampling frequency must be positive, got {fs}"));
    }
    let starts = (0..).map(|k| k * hop).take_while(|s| s + n_t <= nt_total).collect();
    Ok(WindowPlan {
        n_t,
        hop,
        starts,
        fs,
        t_win: n_t as f64 / fs,
    })
}

/// Half-overlap plan.
pub fn plan_half_overlap(nt_total: usize, n_t: usize, fs: f64) -> Result<WindowPlan> {
    plan_windows(nt_total, n_t, (n_t / 2).max(1), fs)
}

/// Real-valued 2D map in the global pixel order.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(nx: usize, ny: usize, data: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 || data.len() != nx * ny {
            return invalid(format!("image of {} values does not match {nx}x{ny}", data.len()));
        }
        Ok(Self { nx, ny, data })
    }

    pub fn filled(nx: usize, ny: usize, value: f64) -> Self {
        Self {
            nx,
            ny,
            data: vec![value; nx * ny],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.nx + x]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.nx == other.nx && self.ny == other.ny
    }
}

/// Region of interest mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Roi {
    nx: usize,
    ny: usize,
    mask: Vec<bool>,
}

impl Roi {
    pub fn new(nx: usize, ny: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != nx * ny {
            return invalid(format!("mask of {} pixels does not match {nx}x{ny}", mask.len()));
        }
        if !mask.iter().any(|&b| b) {
            return invalid("region of interest is empty");
        }
        Ok(Self { nx, ny, mask })
    }

    /// Axis-aligned rectangle `x0..x1`, `y0..y1` (exclusive upper bounds).
    pub fn rect(nx: usize, ny: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> Result<Self> {
        let mask = (0..ny)
            .flat_map(|y| (0..nx).map(move |x| x >= x0 && x < x1 && y >= y0 && y < y1))
            .collect();
        Self::new(nx, ny, mask)
    }

    pub fn single(nx: usize, ny: usize, x: usize, y: usize) -> Result<Self> {
        Self::rect(nx, ny, x, y, x + 1, y + 1)
    }

    pub fn full(nx: usize, ny: usize) -> Result<Self> {
        Self::new(nx, ny, vec![true; nx * ny])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn matches(&self, nx: usize, ny: usize) -> bool {
        self.nx == nx && self.ny == ny
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f32, im: f32) -> Complex32 {
        Complex32::new(re, im)
    }

    #[test]
    fn constant_frames_give_constant_columns() {
        let data: Vec<_> = (0..3).flat_map(|j| vec![c(j as f32 + 1.0, 0.0); 4]).collect();
        let stack = HologramStack::new(2, 2, 3, 1.0, data).unwrap();
        let m = reshape_to_casorati(&stack).unwrap();
        assert_eq!((m.rows(), m.cols()), (4, 3));
        for j in 0..3 {
            assert!(m.column(j).iter().all(|&z| z == c(j as f32 + 1.0, 0.0)));
        }
    }

    #[test]
    fn single_pixel_becomes_row() {
        let vals = vec![c(1.0, 2.0), c(3.0, 4.0), c(5.0, 6.0), c(7.0, 8.0)];
        let stack = HologramStack::new(1, 1, 4, 1.0, vals.clone()).unwrap();
        let m = reshape_to_casorati(&stack).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 4));
        for (j, v) in vals.iter().enumerate() {
            assert_eq!(m.get(0, j), *v);
        }
    }

    #[test]
    fn entry_matches_pixel_order() {
        let data: Vec<_> = (0..3 * 2 * 5).map(|i| c(i as f32, -(i as f32))).collect();
        let stack = HologramStack::new(3, 2, 5, 1.0, data).unwrap();
        let m = reshape_to_casorati(&stack).unwrap();
        for t in 0..5 {
            for y in 0..2 {
                for x in 0..3 {
                    assert_eq!(m.get(y * 3 + x, t), stack.get(x, y, t));
                }
            }
        }
    }

    #[test]
    fn constant_matrix_back_to_stack() {
        let data: Vec<_> = (0..3).flat_map(|j| vec![c(j as f32, 1.0); 4]).collect();
        let m = CasoratiMatrix::from_columns(4, 3, data).unwrap();
        let s = reshape_from_casorati(&m, 2, 2, 10.0).unwrap();
        assert_eq!((s.nx(), s.ny(), s.nt_total()), (2, 2, 3));
        for t in 0..3 {
            assert!(s.frame(t).iter().all(|&z| z == c(t as f32, 1.0)));
        }
    }

    #[test]
    fn mismatched_rows_rejected() {
        let m = CasoratiMatrix::zeros(5, 2);
        assert!(matches!(
            reshape_from_casorati(&m, 2, 2, 1.0),
            Err(crate::Error::InvalidInput(_))
        ));
    }

    #[test]
    fn non_finite_sample_rejected() {
        let mut data = vec![c(0.0, 0.0); 4];
        data[2] = c(f32::NAN, 0.0);
        assert!(HologramStack::new(2, 2, 1, 1.0, data).is_err());
    }

    #[test]
    fn single_window_at_75khz() {
        let plan = plan_windows(1024, 1024, 512, 75_000.0).unwrap();
        assert_eq!(plan.starts, vec![0]);
        assert!((plan.t_win * 1e3 - 13.653).abs() < 1e-3);
        assert_eq!((plan.t_win * 1e4).round() / 10.0, 13.7);
    }

    #[test]
    fn half_overlap_starts() {
        let plan = plan_windows(2048, 1024, 512, 1.0).unwrap();
        assert_eq!(plan.starts, vec![0, 512, 1024]);
        assert_eq!(plan_half_overlap(2048, 1024, 1.0).unwrap(), plan);
    }

    #[test]
    fn window_longer_than_stack_rejected() {
        assert!(plan_windows(100, 256, 128, 1.0).is_err());
        assert!(plan_windows(100, 50, 0, 1.0).is_err());
        assert!(plan_windows(100, 50, 51, 1.0).is_err());
    }

    #[test]
    fn empty_roi_rejected() {
        assert!(Roi::new(2, 2, vec![false; 4]).is_err());
        assert!(Roi::new(2, 2, vec![true; 3]).is_err());
        assert_eq!(Roi::rect(4, 4, 1, 1, 3, 2).unwrap().count(), 2);
    }
}
