use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ldh::display::{
    composite_two_band, composite_two_phase, db_to_gray, image_csv, series_csv, to_display_gray, write_pgm, write_ppm,
    DisplayParams, PhaseColors, Scale,
};
use ldh::doppler::{roi_mean_series, spectrogram, Apodization, FrequencyBand, Sidebands};
use ldh::holo::{plan_windows, reshape_to_casorati, HologramStack, Roi};
use ldh::io::{read_stack, write_stack};
use ldh::manifest::{parse_apodization, parse_band, parse_hz, parse_sidebands, RoiRect, RunManifest};
use ldh::pipeline::{process_stack, Mode, PipelineConfig};
use ldh::svd::{compute_svd_basis, eigenvector_mean_image, eigenvector_spectra, singular_energy_profile, RankRule};
use ldh::synth::{generate_stack, SynthScene};
use ldh::{Error, Result};

#[derive(Parser)]
#[command(name = "ldh", version, about = "SVD clutter filtering for laser Doppler holography")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Power Doppler movie, mean image and run manifest.
    Process(ProcessArgs),
    /// Synthetic stack plus ground truth from a scene file.
    Synth(SynthArgs),
    /// ROI spectrogram over the window schedule.
    Spectrogram(SpectrogramArgs),
    /// Two-band or two-phase color composite.
    Composite(CompositeArgs),
    /// Singular value profile, eigenvector spectra and eigenvector images of one window.
    SvdInspect(InspectArgs),
}

#[derive(Args)]
struct RankArgs {
    /// Explicit clutter rank.
    #[arg(long, conflicts_with = "cutoff")]
    nc: Option<usize>,
    /// Cutoff frequency for the rank rule (defaults to the band's lower edge).
    #[arg(long, value_parser = hz)]
    cutoff: Option<f64>,
}

impl RankArgs {
    fn rule(&self, default_cutoff: f64) -> RankRule {
        match (self.nc, self.cutoff) {
            (Some(n), _) => RankRule::Explicit(n),
            (None, Some(f)) => RankRule::FromCutoff(f),
            (None, None) => RankRule::FromCutoff(default_cutoff),
        }
    }
}

#[derive(Args)]
struct DisplayArgs {
    #[arg(long, default_value_t = 1.0)]
    lo_pct: f64,
    #[arg(long, default_value_t = 99.0)]
    hi_pct: f64,
    #[arg(long, default_value = "log", value_parser = scale)]
    scale: Scale,
}

impl DisplayArgs {
    fn params(&self) -> DisplayParams {
        DisplayParams {
            lo_pct: self.lo_pct,
            hi_pct: self.hi_pct,
            scale: self.scale,
        }
    }
}

#[derive(Args)]
struct ProcessArgs {
    #[arg(long, required_unless_present = "manifest")]
    input: Option<PathBuf>,
    /// Band `F1:F2` in Hz, `k` suffix for kHz.
    #[arg(long, value_parser = band, required_unless_present = "manifest")]
    band: Option<FrequencyBand>,
    /// Window length in frames.
    #[arg(long, required_unless_present = "manifest")]
    window: Option<usize>,
    #[arg(long)]
    hop: Option<usize>,
    #[arg(long, value_parser = mode, required_unless_present = "manifest")]
    mode: Option<Mode>,
    #[command(flatten)]
    rank: RankArgs,
    /// `x0,y0,x1,y1`, exclusive upper bounds.
    #[arg(long, value_parser = roi)]
    roi: Option<RoiRect>,
    #[arg(long, default_value = "two-sided", value_parser = sidebands)]
    sidebands: Sidebands,
    #[arg(long, default_value = "rectangular", value_parser = apodization)]
    apodization: Apodization,
    #[arg(long, default_value_t = 2)]
    max_in_flight: usize,
    #[command(flatten)]
    display: DisplayArgs,
    /// Replay every parameter from a manifest written by an earlier run.
    #[arg(long, conflicts_with_all = ["input", "band", "window", "hop", "mode", "nc", "cutoff", "roi"])]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth file; defaults to `<out>.truth.txt`.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrogramArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = roi)]
    roi: Option<RoiRect>,
    #[arg(long)]
    window: usize,
    #[arg(long)]
    hop: Option<usize>,
    /// Clutter-filter each window before the spectrum.
    #[arg(long)]
    svd: bool,
    #[command(flatten)]
    rank: RankArgs,
    #[arg(long, default_value = "rectangular", value_parser = apodization)]
    apodization: Apodization,
    /// Display floor in dB.
    #[arg(long, default_value_t = -60.0, allow_hyphen_values = true)]
    min_db: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompositeKind {
    Bands,
    Phase,
}

#[derive(Args)]
struct CompositeArgs {
    #[arg(long, value_enum)]
    kind: CompositeKind,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    window: usize,
    #[arg(long)]
    hop: Option<usize>,
    #[arg(long, default_value = "svd", value_parser = mode)]
    mode: Mode,
    #[command(flatten)]
    rank: RankArgs,
    /// Low band (bands) or analysis band (phase).
    #[arg(long, value_parser = band)]
    band: FrequencyBand,
    /// High band, `bands` only.
    #[arg(long, value_parser = band)]
    band_high: Option<FrequencyBand>,
    /// Window index range `a:b` (exclusive end) averaged as systole, `phase` only.
    #[arg(long, value_parser = range)]
    systole: Option<std::ops::Range<usize>>,
    #[arg(long, value_parser = range)]
    diastole: Option<std::ops::Range<usize>>,
    #[command(flatten)]
    display: DisplayArgs,
    /// Output PPM file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    input: PathBuf,
    /// First frame of the window.
    #[arg(long, default_value_t = 0)]
    start: usize,
    #[arg(long)]
    window: usize,
    /// Comma-separated 1-based inclusive ranges, e.g. `1:1,2:10`.
    #[arg(long, default_value = "1:1")]
    ranges: String,
    #[command(flatten)]
    display: DisplayArgs,
    #[arg(long)]
    out: PathBuf,
}

fn hz(s: &str) -> Result<f64> {
    parse_hz(s)
}
fn band(s: &str) -> Result<FrequencyBand> {
    parse_band(s)
}
fn mode(s: &str) -> Result<Mode> {
    s.parse()
}
fn roi(s: &str) -> Result<RoiRect> {
    s.parse()
}
fn scale(s: &str) -> Result<Scale> {
    s.parse()
}
fn sidebands(s: &str) -> Result<Sidebands> {
    parse_sidebands(s)
}
fn apodization(s: &str) -> Result<Apodization> {
    parse_apodization(s)
}
fn range(s: &str) -> Result<std::ops::Range<usize>> {
    let parsed = s
        .split_once(':')
        .and_then(|(a, b)| Some(a.trim().parse().ok()?..b.trim().parse().ok()?));
    match parsed {
        Some(r) if r.start < r.end => Ok(r),
        _ => Err(Error::InvalidInput(format!("range {s:?} must be a:b with a < b"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Process(a) => process(a),
        Command::Synth(a) => synth(a),
        Command::Spectrogram(a) => run_spectrogram(a),
        Command::Composite(a) => composite(a),
        Command::SvdInspect(a) => inspect(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ldh: error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load(path: &Path) -> Result<HologramStack> {
    read_stack(path).map_err(|e| match e {
        Error::Io(io) => Error::InvalidInput(format!("{}: {io}", path.display())),
        other => other,
    })
}

fn absolute(p: &Path) -> PathBuf {
    fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf())
}

fn process(a: ProcessArgs) -> Result<()> {
    let manifest = match &a.manifest {
        Some(path) => RunManifest::parse(&fs::read_to_string(path)?)?,
        None => {
            let band = a.band.expect("required by clap");
            let window = a.window.expect("required by clap");
            RunManifest {
                input: a.input.as_deref().map(absolute).expect("required by clap"),
                band,
                window,
                hop: a.hop.unwrap_or(window / 2).max(1),
                mode: a.mode.expect("required by clap"),
                rank_rule: a.rank.rule(band.f1),
                sidebands: a.sidebands,
                apodization: a.apodization,
                display: a.display.params(),
                roi: a.roi,
                max_in_flight: a.max_in_flight,
            }
        }
    };
    let stack = load(&manifest.input)?;
    let roi = manifest.roi.map(|r| r.to_roi(stack.nx(), stack.ny())).transpose()?;
    let cfg = manifest.pipeline_config(&stack)?;
    let movie = process_stack(&stack, &cfg)?;

    let frames = a.out.join("frames");
    fs::create_dir_all(&frames)?;
    for (i, f) in movie.frames.iter().enumerate() {
        write_pgm(
            &to_display_gray(&f.m0, manifest.display)?,
            frames.join(format!("frame_{i:05}.pgm")),
        )?;
    }
    let mean = movie.mean_image();
    write_pgm(&to_display_gray(&mean, manifest.display)?, a.out.join("mean.pgm"))?;
    fs::write(a.out.join("mean.csv"), image_csv(&mean))?;
    if let Some(roi) = &roi {
        fs::write(
            a.out.join("series.csv"),
            series_csv(&roi_mean_series(&movie.frames, roi, &cfg.plan)?),
        )?;
    }
    fs::write(a.out.join("manifest.txt"), manifest.to_text(Some(&stack), Some(&movie)))?;
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let scene = SynthScene::parse(&fs::read_to_string(&a.scene)?)?;
    let (stack, truth) = generate_stack(&scene)?;
    write_stack(&stack, &a.out)?;
    let truth_path = a.truth.unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".truth.txt");
        PathBuf::from(p)
    });
    fs::write(truth_path, truth.to_text())?;
    Ok(())
}

fn run_spectrogram(a: SpectrogramArgs) -> Result<()> {
    let stack = load(&a.input)?;
    let roi = match a.roi {
        Some(r) => r.to_roi(stack.nx(), stack.ny())?,
        None => Roi::full(stack.nx(), stack.ny())?,
    };
    let plan = plan_windows(
        stack.nt_total(),
        a.window,
        a.hop.unwrap_or(a.window / 2).max(1),
        stack.fs(),
    )?;
    let filter = match (a.svd, a.rank.nc, a.rank.cutoff) {
        (false, None, None) => None,
        (true, None, None) => return Err(Error::InvalidInput("--svd needs --nc or --cutoff".into())),
        (false, _, _) => return Err(Error::InvalidInput("--nc and --cutoff need --svd".into())),
        (true, _, _) => Some(a.rank.rule(0.0)),
    };
    let sg = spectrogram(&stack, &roi, &plan, filter, a.apodization)?;

    // Image rows run from fs/2 at the top down to 0 Hz; columns are windows.
    let (cols, rows) = (sg.db.len(), sg.display_freqs.len());
    let db = (0..rows).rev().flat_map(|r| sg.db.iter().map(move |c| c[r]));
    fs::create_dir_all(&a.out)?;
    write_pgm(&db_to_gray(cols, rows, db, a.min_db)?, a.out.join("spectrogram.pgm"))?;
    let mut csv = String::from("window_start,time_s,freq_hz,power,db\n");
    let first = sg.freq_axis.len() - rows;
    for (w, (&start, col)) in sg.window_starts.iter().zip(&sg.db).enumerate() {
        let t = plan.center_time(w);
        for (r, (&f, &d)) in sg.display_freqs.iter().zip(col).enumerate() {
            csv.push_str(&format!(
                "{start},{t:.6},{f:.3},{},{d:.3}\n",
                ldh::display::fmt_power(sg.power[w][first + r])
            ));
        }
    }
    fs::write(a.out.join("spectrogram.csv"), csv)?;
    Ok(())
}

fn composite(a: CompositeArgs) -> Result<()> {
    let stack = load(&a.input)?;
    let plan = plan_windows(
        stack.nt_total(),
        a.window,
        a.hop.unwrap_or(a.window / 2).max(1),
        stack.fs(),
    )?;
    let run = |band: FrequencyBand| {
        let cfg = PipelineConfig::new(plan.clone(), band, a.mode).with_rank(a.rank.rule(band.f1));
        process_stack(&stack, &cfg)
    };
    let image = match a.kind {
        CompositeKind::Bands => {
            let high = a
                .band_high
                .ok_or_else(|| Error::InvalidInput("--kind bands needs --band-high".into()))?;
            composite_two_band(&run(a.band)?.mean_image(), &run(high)?.mean_image(), a.display.params())?
        }
        CompositeKind::Phase => {
            let (s, d) = match (a.systole.clone(), a.diastole.clone()) {
                (Some(s), Some(d)) => (s, d),
                _ => {
                    return Err(Error::InvalidInput(
                        "--kind phase needs --systole and --diastole".into(),
                    ))
                }
            };
            let movie = run(a.band)?;
            composite_two_phase(
                &movie.mean_over(s)?,
                &movie.mean_over(d)?,
                a.display.params(),
                PhaseColors::default(),
            )?
        }
    };
    write_ppm(&image, &a.out)
}

fn inspect(a: InspectArgs) -> Result<()> {
    let stack = load(&a.input)?;
    let m = reshape_to_casorati(&stack.slice(a.start, a.window)?)?;
    let basis = compute_svd_basis(&m)?;
    let ranges = a.ranges.split(',').map(range_inclusive).collect::<Result<Vec<_>>>()?;

    fs::create_dir_all(&a.out)?;
    let db = singular_energy_profile(&basis)?;
    let mut csv = String::from("index,lambda,db,energy_fraction\n");
    for (i, ((l, d), e)) in basis
        .lambdas()
        .iter()
        .zip(&db)
        .zip(basis.energy_fractions())
        .enumerate()
    {
        csv.push_str(&format!("{},{},{d:.3},{e:.6e}\n", i + 1, ldh::display::fmt_power(*l)));
    }
    fs::write(a.out.join("profile.csv"), csv)?;

    // Columns are components, rows run from fs/2 at the top to -fs/2.
    let spectra = eigenvector_spectra(&basis, stack.fs())?;
    let (cols, rows) = (spectra.db.len(), spectra.freq_axis.len());
    let px = (0..rows).rev().flat_map(|r| spectra.db.iter().map(move |c| c[r]));
    write_pgm(&db_to_gray(cols, rows, px, -60.0)?, a.out.join("spectra.pgm"))?;

    for (m1, n1) in ranges {
        let img = eigenvector_mean_image(&basis, stack.nx(), stack.ny(), m1, n1)?;
        write_pgm(
            &to_display_gray(&img, a.display.params())?,
            a.out.join(format!("eigvec_{m1}_{n1}.pgm")),
        )?;
    }
    Ok(())
}

fn range_inclusive(s: &str) -> Result<(usize, usize)> {
    let parsed = s
        .split_once(':')
        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
    match parsed {
        Some((m, n)) if 1 <= m && m <= n => Ok((m, n)),
        _ => Err(Error::InvalidInput(format!(
            "eigenvector range {s:?} must be m:n with 1 <= m <= n"
        ))),
    }
}
