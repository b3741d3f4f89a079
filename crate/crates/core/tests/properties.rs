use ldh::doppler::{dpsd_window, power_doppler, Apodization, FrequencyBand, Sidebands};
use ldh::holo::{plan_windows, reshape_from_casorati, reshape_to_casorati, CasoratiMatrix, HologramStack};
use ldh::pipeline::{process_stack, Mode, PipelineConfig};
use ldh::svd::{clutter_filter, compute_temporal_basis, rank_from_cutoff, ClutterRank};
use ldh::Complex32;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FS: f64 = 60_000.0;

fn samples(seed: u64, n: usize) -> Vec<Complex32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Complex32::new(rng.random::<f32>() - 0.5, rng.random::<f32>() - 0.5))
        .collect()
}

fn matrix(seed: u64, rows: usize, cols: usize) -> CasoratiMatrix {
    CasoratiMatrix::from_columns(rows, cols, samples(seed, rows * cols)).unwrap()
}

fn m0(m: &CasoratiMatrix, band: FrequencyBand) -> Vec<f64> {
    let s = dpsd_window(m, m.rows(), 1, FS, 0, Apodization::Rectangular).unwrap();
    power_doppler(&s, band, Sidebands::TwoSided).unwrap().m0.data
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval_per_pixel(seed in any::<u64>(), rows in 1usize..20, n_t in 2usize..200) {
        let m = matrix(seed, rows, n_t);
        let s = dpsd_window(&m, rows, 1, FS, 0, Apodization::Rectangular).unwrap();
        for p in 0..rows {
            let time: f64 = (0..n_t).map(|t| m.get(p, t).norm_sqr() as f64).sum();
            let freq: f64 = s.pixel(p).iter().map(|&v| v as f64).sum();
            prop_assert!(close(freq, n_t as f64 * time, 1e-5));
        }
    }

    #[test]
    fn circular_time_shift_keeps_the_spectrum(seed in any::<u64>(), n_t in 2usize..128, shift in 0usize..128) {
        let m = matrix(seed, 3, n_t);
        let shifted: Vec<Complex32> = (0..n_t).flat_map(|t| m.column((t + shift) % n_t).to_vec()).collect();
        let sm = CasoratiMatrix::from_columns(3, n_t, shifted).unwrap();
        let a = dpsd_window(&m, 3, 1, FS, 0, Apodization::Rectangular).unwrap();
        let b = dpsd_window(&sm, 3, 1, FS, 0, Apodization::Rectangular).unwrap();
        let peak = a.values.iter().copied().fold(0.0f32, f32::max) as f64;
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((*x as f64 - *y as f64).abs() <= 1e-4 * peak);
        }
    }

    #[test]
    fn band_power_scales_quadratically(seed in any::<u64>(), gain in 0.1f32..10.0) {
        let m = matrix(seed, 5, 64);
        let scaled = CasoratiMatrix::from_columns(5, 64, m.as_slice().iter().map(|z| z * gain).collect()).unwrap();
        let band = FrequencyBand::new(2_000.0, 20_000.0).unwrap();
        for (a, b) in m0(&m, band).iter().zip(m0(&scaled, band)) {
            prop_assert!(close(a * (gain * gain) as f64, b, 1e-5));
        }
    }

    #[test]
    fn band_power_is_monotone_and_additive(seed in any::<u64>(), a in 0.0f64..10_000.0, w1 in 700.0f64..10_000.0, w2 in 700.0f64..10_000.0) {
        let m = matrix(seed, 4, 100);
        let (b, c) = (a + w1, a + w1 + w2);
        let lo = m0(&m, FrequencyBand::new(a, b).unwrap());
        let hi = m0(&m, FrequencyBand::new(b, c).unwrap());
        let all = m0(&m, FrequencyBand::new(a, c).unwrap());
        for p in 0..4 {
            prop_assert!(all[p] >= lo[p] && all[p] >= hi[p]);
            prop_assert!(close(lo[p] + hi[p], all[p], 1e-12));
        }
    }

    #[test]
    fn reshape_round_trip(seed in any::<u64>(), nx in 1usize..9, ny in 1usize..9, nt in 1usize..9) {
        let stack = HologramStack::new(nx, ny, nt, FS, samples(seed, nx * ny * nt)).unwrap();
        let m = reshape_to_casorati(&stack).unwrap();
        prop_assert_eq!(m.rows(), nx * ny);
        prop_assert_eq!(m.get(0, nt - 1), stack.get(0, 0, nt - 1));
        prop_assert_eq!(reshape_from_casorati(&m, nx, ny, FS).unwrap(), stack);
    }

    #[test]
    fn clutter_filter_is_idempotent(seed in any::<u64>(), n_c in 0usize..12) {
        let m = matrix(seed, 40, 12);
        let basis = compute_temporal_basis(&m).unwrap();
        let once = clutter_filter(&m, &basis, ClutterRank(n_c)).unwrap();
        let twice = clutter_filter(&once, &basis, ClutterRank(n_c)).unwrap();
        let scale = m.frobenius_norm().max(1e-30);
        let diff: f64 = once
            .as_slice()
            .iter()
            .zip(twice.as_slice())
            .map(|(a, b)| (a - b).norm_sqr() as f64)
            .sum::<f64>()
            .sqrt();
        prop_assert!(diff <= 1e-4 * scale);
    }

    #[test]
    fn rank_rule_stays_in_range(fs in 1_000.0f64..200_000.0, n_t in 1usize..2048, frac in 0.0f64..=1.0) {
        let f1 = frac * fs / 2.0;
        let n_c = rank_from_cutoff(fs, n_t, f1).unwrap().0;
        prop_assert!(n_c <= n_t);
        prop_assert!((n_c as f64 - 2.0 * n_t as f64 * f1 / fs).abs() <= 0.5 + 1e-9);
    }
}

#[test]
fn windows_are_independent_of_schedule() {
    let (nx, ny, nt) = (12, 10, 192);
    let stack = HologramStack::new(nx, ny, nt, FS, samples(8, nx * ny * nt)).unwrap();
    let band = FrequencyBand::new(2_000.0, 12_000.0).unwrap();
    let plan = plan_windows(nt, 64, 32, FS).unwrap();
    let all = process_stack(&stack, &PipelineConfig::new(plan.clone(), band, Mode::Svd)).unwrap();
    // Each window alone, in reverse order, must give the same frame.
    for (w, &start) in plan.starts.iter().enumerate().rev() {
        let single = plan_windows(64, 64, 64, FS).unwrap();
        let one = process_stack(
            &stack.slice(start, 64).unwrap(),
            &PipelineConfig::new(single, band, Mode::Svd),
        )
        .unwrap();
        assert_eq!(one.frames[0].m0.data, all.frames[w].m0.data, "window {w}");
    }
}

#[test]
fn rayon_pool_size_does_not_change_the_movie() {
    let (nx, ny, nt) = (10, 10, 160);
    let stack = HologramStack::new(nx, ny, nt, FS, samples(9, nx * ny * nt)).unwrap();
    let plan = plan_windows(nt, 64, 16, FS).unwrap();
    let mut cfg = PipelineConfig::new(plan, FrequencyBand::new(2_000.0, 12_000.0).unwrap(), Mode::Svd);
    cfg.max_in_flight = 4;
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| process_stack(&stack, &cfg)).unwrap()
    };
    let (a, b) = (run(1), run(4));
    for (x, y) in a.frames.iter().zip(&b.frames) {
        assert_eq!(x.m0.data, y.m0.data);
    }
}
