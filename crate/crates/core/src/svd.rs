//! Economy SVD of a window's space-time matrix and the rank-truncation
//! clutter filter.
//!
//! The decomposition goes through the `n_t x n_t` Gram matrix `G = H^* H`,
//! which is small compared with `H` when pixels far outnumber frames:
//! `G = V D V^*`, `lambda_i = sqrt(max(d_i, 0))` and `U_i = H V_i / lambda_i`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::{Complex32, Complex64};
use rustfft::FftPlanner;

use crate::doppler::{ascending_bins, frequency_axis, DB_FLOOR};
use crate::error::{invalid, Error, Result};
use crate::holo::{CasoratiMatrix, Image};
use crate::linalg;

/// Components with `lambda_i < NULL_FLOOR * lambda_1` are treated as null.
pub const NULL_FLOOR: f64 = 1e-6;

/// Singular values with paired spatial and temporal eigenvectors of one window.
#[derive(Debug, Clone)]
pub struct SvdBasis {
    rows: usize,
    n_t: usize,
    lambdas: Vec<f64>,
    /// `n_t x n_t`, column-major; column `i` is `V_i`.
    temporal: Vec<Complex64>,
    /// `rows x n_t`, column-major; column `i` is `U_i` (zero when null).
    /// Absent for bases built by [`compute_temporal_basis`].
    spatial: Option<Vec<Complex32>>,
    rank_eff: usize,
}

impl SvdBasis {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// Singular values in descending order.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn rank_eff(&self) -> usize {
        self.rank_eff
    }

    pub fn temporal_vector(&self, i: usize) -> &[Complex64] {
        &self.temporal[i * self.n_t..(i + 1) * self.n_t]
    }

    pub fn has_spatial(&self) -> bool {
        self.spatial.is_some()
    }

    /// # Panics
    /// If the basis was built without spatial vectors.
    pub fn spatial_vector(&self, i: usize) -> &[Complex32] {
        let spatial = self.spatial.as_ref().expect("basis built without spatial vectors");
        &spatial[i * self.rows..(i + 1) * self.rows]
    }

    /// `lambda_i^2 / sum_j lambda_j^2` per component.
    pub fn energy_fractions(&self) -> Vec<f64> {
        let total: f64 = self.lambdas.iter().map(|l| l * l).sum();
        if total == 0.0 {
            return vec![0.0; self.n_t];
        }
        self.lambdas.iter().map(|l| l * l / total).collect()
    }

    /// `sum_{i in range} lambda_i U_i V_i^*` as a space-time matrix (0-based range).
    pub fn partial_sum(&self, range: std::ops::Range<usize>) -> CasoratiMatrix {
        let mut out = CasoratiMatrix::zeros(self.rows, self.n_t);
        let k = range.len();
        if k == 0 {
            return out;
        }
        let mut a = Vec::with_capacity(self.rows * k);
        let mut b = Vec::with_capacity(self.n_t * k);
        for i in range {
            let l = self.lambdas[i] as f32;
            a.extend(self.spatial_vector(i).iter().map(|u| u * l));
            b.extend(
                self.temporal_vector(i)
                    .iter()
                    .map(|v| Complex32::new(v.re as f32, v.im as f32)),
            );
        }
        linalg::add_mul_adjoint(out.as_mut_slice(), 1.0, &a, self.rows, k, &b, self.n_t);
        out
    }

    /// Full reconstruction `sum_i lambda_i U_i V_i^*`.
    pub fn reconstruct(&self) -> CasoratiMatrix {
        self.partial_sum(0..self.n_t)
    }
}

/// Economy SVD of `m` via eigendecomposition of its Gram matrix.
pub fn compute_svd_basis(m: &CasoratiMatrix) -> Result<SvdBasis> {
    decompose(m, true)
}

/// Singular values and temporal vectors only. Sufficient for
/// [`clutter_filter`] and skips the `rows x n_t` product that forms `U`.
pub fn compute_temporal_basis(m: &CasoratiMatrix) -> Result<SvdBasis> {
    decompose(m, false)
}

fn decompose(m: &CasoratiMatrix, with_spatial: bool) -> Result<SvdBasis> {
    let (rows, n_t) = (m.rows(), m.cols());
    if rows < n_t {
        return invalid(format!("space-time matrix needs rows >= cols, got {rows}x{n_t}"));
    }
    if m.as_slice().iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return invalid("space-time matrix has non-finite entries");
    }

    let gram = linalg::gram(m.as_slice(), rows, n_t);
    let gram = DMatrix::from_column_slice(n_t, n_t, &gram);
    let eig = SymmetricEigen::try_new(gram, f64::EPSILON, 1000 * n_t.max(1))
        .ok_or_else(|| Error::NumericalFailure("Gram eigendecomposition did not converge".into()))?;

    let mut order: Vec<usize> = (0..n_t).collect();
    // Descending eigenvalue, ties broken by eigen index.
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let lambdas: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0).sqrt()).collect();
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::NumericalFailure("non-finite singular value".into()));
    }
    let mut temporal = Vec::with_capacity(n_t * n_t);
    for &k in &order {
        temporal.extend(eig.eigenvectors.column(k).iter().copied());
    }

    let floor = lambdas.first().copied().unwrap_or(0.0) * NULL_FLOOR;
    let rank_eff = lambdas.iter().take_while(|&&l| l > 0.0 && l >= floor).count();

    let spatial = with_spatial.then(|| {
        let v32: Vec<Complex32> = temporal[..n_t * rank_eff]
            .iter()
            .map(|v| Complex32::new(v.re as f32, v.im as f32))
            .collect();
        let mut spatial = linalg::matmul(m.as_slice(), rows, n_t, &v32, rank_eff);
        for (i, col) in spatial.chunks_mut(rows).enumerate() {
            let inv = (1.0 / lambdas[i]) as f32;
            col.iter_mut().for_each(|u| *u *= inv);
        }
        spatial.resize(rows * n_t, Complex32::new(0.0, 0.0));
        spatial
    });

    Ok(SvdBasis {
        rows,
        n_t,
        lambdas,
        temporal,
        spatial,
        rank_eff,
    })
}

/// Number of leading components removed by the clutter filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClutterRank(pub usize);

/// How the clutter rank is chosen for a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankRule {
    /// `n_c` nearest to `2 n_t f1 / fs` for the given cutoff in Hz.
    FromCutoff(f64),
    Explicit(usize),
}

impl RankRule {
    pub fn resolve(&self, fs: f64, n_t: usize) -> Result<ClutterRank> {
        match *self {
            RankRule::FromCutoff(f1) => rank_from_cutoff(fs, n_t, f1),
            RankRule::Explicit(n_c) if n_c <= n_t => Ok(ClutterRank(n_c)),
            RankRule::Explicit(n_c) => invalid(format!("clutter rank {n_c} exceeds window length {n_t}")),
        }
    }
}

/// Clutter rank equivalent to a temporal cutoff `f1`: the integer nearest to
/// `2 n_t f1 / fs`, ties to even, clamped to `0..=n_t`.
pub fn rank_from_cutoff(fs: f64, n_t: usize, f1: f64) -> Result<ClutterRank> {
    if !(fs > 0.0 && fs.is_finite()) {
        return invalid(format!("sampling frequency must be positive, got {fs}"));
    }
    if !(0.0..=fs / 2.0).contains(&f1) {
        return invalid(format!("cutoff {f1} Hz outside 0..={} Hz", fs / 2.0));
    }
    let n_c = (2.0 * n_t as f64 * f1 / fs).round_ties_even();
    Ok(ClutterRank((n_c as usize).min(n_t)))
}

/// Removes the `n_c` leading components: `H_f = sum_{i > n_c} lambda_i U_i V_i^*`.
///
/// Evaluated as the temporal projection `H_f = H (I - V_c V_c^*)`, or
/// `H V_r V_r^*` over the retained vectors when those are fewer, so the
/// result is idempotent under repeated application with the same basis.
pub fn clutter_filter(m: &CasoratiMatrix, basis: &SvdBasis, n_c: ClutterRank) -> Result<CasoratiMatrix> {
    let (rows, n_t) = (m.rows(), m.cols());
    if basis.rows != rows || basis.n_t != n_t {
        return invalid(format!(
            "basis is {}x{} but matrix is {rows}x{n_t}",
            basis.rows, basis.n_t
        ));
    }
    let n_c = n_c.0;
    if n_c > n_t {
        return invalid(format!("clutter rank {n_c} exceeds window length {n_t}"));
    }
    if n_c == 0 {
        return Ok(m.clone());
    }

    let v32 = |range: std::ops::Range<usize>| -> Vec<Complex32> {
        basis.temporal[range.start * n_t..range.end * n_t]
            .iter()
            .map(|v| Complex32::new(v.re as f32, v.im as f32))
            .collect()
    };
    if 2 * n_c <= n_t {
        let vc = v32(0..n_c);
        let proj = linalg::matmul(m.as_slice(), rows, n_t, &vc, n_c);
        let mut out = m.clone();
        linalg::add_mul_adjoint(out.as_mut_slice(), -1.0, &proj, rows, n_c, &vc, n_t);
        Ok(out)
    } else {
        let keep = n_t - n_c;
        let mut out = CasoratiMatrix::zeros(rows, n_t);
        if keep > 0 {
            let vr = v32(n_c..n_t);
            let proj = linalg::matmul(m.as_slice(), rows, n_t, &vr, keep);
            linalg::add_mul_adjoint(out.as_mut_slice(), 1.0, &proj, rows, keep, &vr, n_t);
        }
        Ok(out)
    }
}

/// `20 log10(lambda_i / lambda_1)` per component, floored at [`DB_FLOOR`].
pub fn singular_energy_profile(basis: &SvdBasis) -> Result<Vec<f64>> {
    let first = basis.lambdas.first().copied().unwrap_or(0.0);
    if first <= 0.0 {
        return invalid("singular energy profile of an all-zero basis");
    }
    Ok(basis
        .lambdas
        .iter()
        .map(|&l| {
            if l > 0.0 {
                (20.0 * (l / first).log10()).max(DB_FLOOR)
            } else {
                DB_FLOOR
            }
        })
        .collect())
}

/// Pixel-wise mean of `|U_i|` over components `m..=n` (1-based, inclusive).
pub fn eigenvector_mean_image(basis: &SvdBasis, nx: usize, ny: usize, m: usize, n: usize) -> Result<Image> {
    if nx * ny != basis.rows {
        return invalid(format!("image {nx}x{ny} does not match {} basis rows", basis.rows));
    }
    if !basis.has_spatial() {
        return invalid("basis was built without spatial vectors");
    }
    if m < 1 || m > n || n > basis.n_t {
        return invalid(format!("eigenvector range {m}..={n} outside 1..={}", basis.n_t));
    }
    let mut acc = vec![0.0f64; basis.rows];
    for i in m - 1..n {
        for (a, u) in acc.iter_mut().zip(basis.spatial_vector(i)) {
            *a += u.norm() as f64;
        }
    }
    let count = (n - m + 1) as f64;
    acc.iter_mut().for_each(|a| *a /= count);
    Image::new(nx, ny, acc)
}

/// Power spectra of the weighted temporal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenvectorSpectra {
    /// Ascending frequency per row, Hz.
    pub freq_axis: Vec<f64>,
    /// `db[i][r]`: component `i`, frequency row `r`; global maximum is 0 dB.
    pub db: Vec<Vec<f64>>,
}

/// `|DFT(lambda_i V_i)|^2` per component over the two-sided frequency axis,
/// in dB relative to the global maximum.
pub fn eigenvector_spectra(basis: &SvdBasis, fs: f64) -> Result<EigenvectorSpectra> {
    let n_t = basis.n_t;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_t);
    let order = ascending_bins(n_t);
    let mut power = Vec::with_capacity(n_t);
    let mut buf = vec![Complex64::new(0.0, 0.0); n_t];
    for i in 0..n_t {
        let l = basis.lambdas[i];
        buf.iter_mut()
            .zip(basis.temporal_vector(i))
            .for_each(|(b, v)| *b = v * l);
        fft.process(&mut buf);
        power.push(order.iter().map(|&k| buf[k].norm_sqr()).collect::<Vec<f64>>());
    }
    let max = power.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    if max <= 0.0 {
        return invalid("eigenvector spectra of an all-zero basis");
    }
    let db = power
        .into_iter()
        .map(|col| col.into_iter().map(|p| power_db(p, max)).collect())
        .collect();
    Ok(EigenvectorSpectra {
        freq_axis: frequency_axis(n_t, fs),
        db,
    })
}

pub(crate) fn power_db(p: f64, max: f64) -> f64 {
    if p > 0.0 {
        (10.0 * (p / max).log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f32, im: f32) -> Complex32 {
        Complex32::new(re, im)
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> CasoratiMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        CasoratiMatrix::from_columns(rows, cols, data).unwrap()
    }

    fn outer(a: &[Complex32], b: &[Complex32], scale: f32) -> Vec<Complex32> {
        let mut out = Vec::new();
        for bj in b {
            out.extend(a.iter().map(|ai| ai * bj.conj() * scale));
        }
        out
    }

    fn unit(v: Vec<Complex32>) -> Vec<Complex32> {
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f32>().sqrt();
        v.into_iter().map(|z| z / n).collect()
    }

    #[test]
    fn rank_one_outer_product() {
        let a = unit((0..6).map(|i| c(i as f32 + 1.0, 0.5 - i as f32)).collect());
        let b = unit(vec![c(1.0, 1.0), c(-2.0, 0.5), c(0.3, -1.0)]);
        let m = CasoratiMatrix::from_columns(6, 3, outer(&a, &b, 1.0)).unwrap();
        let basis = compute_svd_basis(&m).unwrap();
        assert!((basis.lambdas()[0] - 1.0).abs() < 1e-6);
        assert!(basis.lambdas()[1] < 1e-3 && basis.lambdas()[2] < 1e-3);
        assert_eq!(basis.rank_eff(), 1);
        // Alignment up to a unit phase.
        let du: Complex32 = basis.spatial_vector(0).iter().zip(&a).map(|(u, x)| u.conj() * x).sum();
        let dv: Complex64 = basis
            .temporal_vector(0)
            .iter()
            .zip(&b)
            .map(|(v, x)| v.conj() * Complex64::new(x.re as f64, x.im as f64))
            .sum();
        assert!((du.norm() - 1.0).abs() < 1e-5);
        assert!((dv.norm() - 1.0).abs() < 1e-6);
        assert!(basis.spatial_vector(1).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn orthogonal_columns_give_their_norms() {
        let mut data = vec![c(0.0, 0.0); 8];
        data[0] = c(3.0, 0.0);
        data[4 + 1] = c(0.0, 2.0);
        let m = CasoratiMatrix::from_columns(4, 2, data).unwrap();
        let basis = compute_svd_basis(&m).unwrap();
        assert!((basis.lambdas()[0] - 3.0).abs() < 1e-9);
        assert!((basis.lambdas()[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn wide_matrix_rejected() {
        assert!(compute_svd_basis(&CasoratiMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = CasoratiMatrix::zeros(3, 2);
        m.as_mut_slice()[1] = c(f32::INFINITY, 0.0);
        assert!(matches!(compute_svd_basis(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn basis_is_unitary_and_preserves_energy() {
        let m = random_matrix(40, 12, 3);
        let basis = compute_svd_basis(&m).unwrap();
        let n = basis.n_t();
        for i in 0..n {
            for j in 0..n {
                let v: Complex64 = basis
                    .temporal_vector(i)
                    .iter()
                    .zip(basis.temporal_vector(j))
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let u: Complex64 = basis
                    .spatial_vector(i)
                    .iter()
                    .zip(basis.spatial_vector(j))
                    .map(|(a, b)| Complex64::new(a.re as f64, -a.im as f64) * Complex64::new(b.re as f64, b.im as f64))
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).norm() < 1e-5, "V*V at {i},{j}");
                assert!((u - want).norm() < 1e-5, "U*U at {i},{j}");
            }
        }
        let energy: f64 = basis.lambdas().iter().map(|l| l * l).sum();
        assert!((energy / m.frobenius_norm_sqr() - 1.0).abs() < 1e-5);
        assert!(basis.lambdas().windows(2).all(|w| w[0] >= w[1]));
        assert!(basis.reconstruct().relative_distance(&m) < 1e-4);
    }

    #[test]
    fn zero_matrix_has_empty_rank() {
        let basis = compute_svd_basis(&CasoratiMatrix::zeros(4, 3)).unwrap();
        assert_eq!(basis.rank_eff(), 0);
        assert!(basis.lambdas().iter().all(|&l| l == 0.0));
        assert!(singular_energy_profile(&basis).is_err());
    }

    #[test]
    fn filter_identity_and_full_truncation() {
        let m = random_matrix(20, 8, 5);
        let basis = compute_svd_basis(&m).unwrap();
        let same = clutter_filter(&m, &basis, ClutterRank(0)).unwrap();
        assert!(same.relative_distance(&m) < 1e-4);
        let zero = clutter_filter(&m, &basis, ClutterRank(8)).unwrap();
        assert!(zero.as_slice().iter().all(|z| z.norm() == 0.0));
        assert!(clutter_filter(&m, &basis, ClutterRank(9)).is_err());
    }

    #[test]
    fn two_component_filter_keeps_second() {
        // Orthonormal pairs built from disjoint supports and a DFT-like pair.
        let a1 = unit(vec![c(1.0, 0.0), c(1.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        let a2 = unit(vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, -1.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let n = 4;
        let tone = |k: usize| -> Vec<Complex32> {
            (0..n)
                .map(|t| {
                    let ph = 2.0 * std::f32::consts::PI * (k * t) as f32 / n as f32;
                    c(ph.cos(), ph.sin()) / (n as f32).sqrt()
                })
                .collect()
        };
        let (b1, b2) = (tone(0), tone(1));
        let h1 = outer(&a1, &b1, 5.0);
        let h2 = outer(&a2, &b2, 2.0);
        let h: Vec<_> = h1.iter().zip(&h2).map(|(x, y)| x + y).collect();
        let m = CasoratiMatrix::from_columns(5, n, h).unwrap();
        let basis = compute_svd_basis(&m).unwrap();
        let filtered = clutter_filter(&m, &basis, ClutterRank(1)).unwrap();
        let want = CasoratiMatrix::from_columns(5, n, h2).unwrap();
        assert!(filtered.relative_distance(&want) < 1e-4);
    }

    #[test]
    fn filter_is_idempotent_and_splits_energy() {
        let m = random_matrix(30, 10, 9);
        let basis = compute_svd_basis(&m).unwrap();
        for n_c in [1, 3, 7] {
            let once = clutter_filter(&m, &basis, ClutterRank(n_c)).unwrap();
            let twice = clutter_filter(&once, &basis, ClutterRank(n_c)).unwrap();
            assert!(twice.relative_distance(&once) < 1e-5);
            let removed: f64 = basis.lambdas()[..n_c].iter().map(|l| l * l).sum();
            let split = once.frobenius_norm_sqr() + removed;
            assert!((split / m.frobenius_norm_sqr() - 1.0).abs() < 1e-4);
            let direct = basis.partial_sum(n_c..10);
            assert!(once.relative_distance(&direct) < 1e-4);
        }
    }

    #[test]
    fn cutoff_rule_values() {
        assert_eq!(rank_from_cutoff(60_000.0, 1024, 2_000.0).unwrap(), ClutterRank(68));
        assert_eq!(rank_from_cutoff(75_000.0, 1024, 2_000.0).unwrap(), ClutterRank(55));
        assert_eq!(rank_from_cutoff(75_000.0, 1024, 0.0).unwrap(), ClutterRank(0));
        // 2 * 4 * 1.25 / 4 = 2.5 -> 2 (ties to even)
        assert_eq!(rank_from_cutoff(4.0, 4, 1.25).unwrap(), ClutterRank(2));
        assert_eq!(rank_from_cutoff(4.0, 4, 2.0).unwrap(), ClutterRank(4));
        assert!(rank_from_cutoff(60_000.0, 1024, 30_001.0).is_err());
        assert!(RankRule::Explicit(5).resolve(1.0, 4).is_err());
    }

    #[test]
    fn profile_in_db() {
        let mut data = vec![c(0.0, 0.0); 9];
        data[0] = c(10.0, 0.0);
        data[3 + 1] = c(1.0, 0.0);
        data[6 + 2] = c(0.0, 0.1);
        let basis = compute_svd_basis(&CasoratiMatrix::from_columns(3, 3, data).unwrap()).unwrap();
        let p = singular_energy_profile(&basis).unwrap();
        assert_eq!(p[0], 0.0);
        assert!((p[1] + 20.0).abs() < 1e-6 && (p[2] + 40.0).abs() < 1e-5);
    }

    #[test]
    fn mean_image_of_first_vector() {
        let a = unit((0..6).map(|i| c(i as f32, 1.0)).collect());
        let b = unit(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let m = CasoratiMatrix::from_columns(6, 2, outer(&a, &b, 2.0)).unwrap();
        let basis = compute_svd_basis(&m).unwrap();
        let img = eigenvector_mean_image(&basis, 3, 2, 1, 1).unwrap();
        for (p, x) in img.data.iter().zip(&a) {
            assert!((p - x.norm() as f64).abs() < 1e-6);
        }
        assert!(eigenvector_mean_image(&basis, 3, 2, 0, 1).is_err());
        assert!(eigenvector_mean_image(&basis, 3, 2, 2, 1).is_err());
        assert!(eigenvector_mean_image(&basis, 3, 2, 1, 3).is_err());
        assert!(eigenvector_mean_image(&basis, 2, 2, 1, 1).is_err());
    }

    #[test]
    fn pure_tone_eigenvector_spectrum() {
        let n = 8;
        let k = 3;
        let tone: Vec<Complex32> = (0..n)
            .map(|t| {
                let ph = 2.0 * std::f32::consts::PI * (k * t) as f32 / n as f32;
                c(ph.cos(), ph.sin()) / (n as f32).sqrt()
            })
            .collect();
        let a = unit(vec![c(1.0, 0.0); 10]);
        let m = CasoratiMatrix::from_columns(10, n, outer(&a, &tone, 1.0)).unwrap();
        let basis = compute_svd_basis(&m).unwrap();
        let spec = eigenvector_spectra(&basis, 8.0).unwrap();
        let row = spec.freq_axis.iter().position(|&f| f == k as f64).unwrap();
        assert!(spec.db[0][row].abs() < 1e-6);
        for (r, v) in spec.db[0].iter().enumerate() {
            if r != row {
                assert!(*v < -60.0, "row {r} at {v} dB");
            }
        }
        for col in &spec.db[1..] {
            assert!(col.iter().all(|&v| v < -60.0));
        }
    }
}
