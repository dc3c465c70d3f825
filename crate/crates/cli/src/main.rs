//! `dlsr`: batch front end for directionlet super-resolution.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 data or format.

mod manifest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dlsr_core::corpus::{natural_images, test_corpus, training_corpus, TEST_SIZE, TRAIN_SIZE};
use dlsr_core::degrade::{add_noise, decimate};
use dlsr_core::image::pad_to_multiple;
use dlsr_core::trainset::{load, to_bytes};
use dlsr_core::{
    best_direction, build_training_set, canonical_pairs, cubic_spline_upsample, forward_awt21, mse, read_pgm,
    super_resolve, wm2_build, wm2_super_resolve, write_pgm, Band, BuildConfig, Direction, DirectionPair, Error,
    Fallback, Image, Mode, PgmMode, SrConfig,
};
use manifest::{manifest_for, Run};

#[derive(Parser)]
#[command(name = "dlsr", version, about = "Learning-based 2× super-resolution with directionlets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a training set from high-resolution PGM images.
    BuildTrainset(BuildArgs),
    /// Super-resolve a low-resolution PGM with a training set.
    SuperResolve(SrArgs),
    /// Print normalized MSE of candidates against a reference as CSV.
    Evaluate(EvalArgs),
    /// Block-average by q and optionally add Gaussian noise.
    ///
    /// Noise comes from ChaCha8 (rand_chacha) seeded with --seed through
    /// SeedableRng::seed_from_u64, turned into normal deviates by
    /// rand_distr::Normal. The same seed always gives the same image.
    Decimate(DecimateArgs),
    /// Cubic-spline and/or block-wavelet baseline outputs.
    Baseline(BaselineArgs),
    /// Write the eight AWT(2,1) bands of one patch as text grids.
    TransformDump(DumpArgs),
    /// Write the bundled procedural corpus as PGM files.
    DemoCorpus(DemoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Oversampled,
    Critical,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Oversampled => Mode::Oversampled,
            ModeArg::Critical => Mode::Critical,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FallbackArg {
    InterpolateOnly,
    NearestAnyDirection,
}

impl From<FallbackArg> for Fallback {
    fn from(f: FallbackArg) -> Fallback {
        match f {
            FallbackArg::InterpolateOnly => Fallback::InterpolateOnly,
            FallbackArg::NearestAnyDirection => Fallback::NearestAnyDirection,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    /// High-resolution training images (PGM).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Training-set file to write.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "oversampled")]
    mode: ModeArg,
}

#[derive(Args)]
struct SrArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    trainset: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "interpolate-only")]
    fallback: FallbackArg,
    /// Per-patch CSV report; defaults to `<output>.report.csv`.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Must match the mode stored in the training set.
    #[arg(long, value_enum, default_value = "oversampled")]
    mode: ModeArg,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    reference: PathBuf,
    /// Candidate images; each row is named after the file stem.
    #[arg(long, num_args = 1.., required = true)]
    candidates: Vec<PathBuf>,
    /// Manifest path; defaults to `evaluate.manifest.json`.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct DecimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 2)]
    q: usize,
    /// Noise standard deviation in [0, 1] intensity units.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BaselineArgs {
    /// Low-resolution input (PGM).
    #[arg(long)]
    input: PathBuf,
    /// Where to write the cubic-spline zoom.
    #[arg(long)]
    cubic: Option<PathBuf>,
    /// Where to write the block-wavelet result; needs --corpus.
    #[arg(long, requires = "corpus")]
    wm2: Option<PathBuf>,
    /// High-resolution training images for the block-wavelet baseline.
    #[arg(long, num_args = 1..)]
    corpus: Vec<PathBuf>,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long)]
    input: PathBuf,
    /// Top row of the patch, in pixels.
    #[arg(long, default_value_t = 0)]
    row: usize,
    /// Left column of the patch, in pixels.
    #[arg(long, default_value_t = 0)]
    col: usize,
    #[arg(long, default_value_t = 8)]
    size: usize,
    /// Direction pair such as `0,45`; defaults to the best pair.
    #[arg(long)]
    pair: Option<String>,
    #[arg(long, value_enum, default_value = "oversampled")]
    mode: ModeArg,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct DemoArgs {
    /// Directory receiving `train/`, `test/` and `natural/`.
    #[arg(long)]
    output_dir: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: std::io::Error },
    Data { path: Option<PathBuf>, message: String },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    fn data(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Data { path: Some(path.to_path_buf()), message: err.to_string() }
    }

    fn plain(err: impl std::fmt::Display) -> Self {
        CliError::Data { path: None, message: err.to_string() }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Data { .. } => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Data { path: Some(p), message } => write!(f, "{}: {message}", p.display()),
            CliError::Data { path: None, message } => f.write_str(message),
        }
    }
}

/// Maps a core error on `path` to I/O or data.
fn core_err(path: &Path, e: Error) -> CliError {
    match e {
        Error::Io(source) => CliError::io(path, source),
        other => CliError::data(path, other),
    }
}

fn read_image(run: &mut Run, path: &Path) -> Result<Image, CliError> {
    let bytes = run.read(path)?;
    if bytes.starts_with(b"P3") || bytes.starts_with(b"P6") {
        return Err(CliError::data(
            path,
            "colour PNM is not supported; extract the luminance channel into a grayscale PGM first",
        ));
    }
    read_pgm(&bytes).map_err(|e| core_err(path, e))
}

fn pgm_bytes(img: &Image) -> Vec<u8> {
    write_pgm(img, PgmMode::Binary, 255)
}

fn paths(ps: &[PathBuf]) -> Vec<String> {
    ps.iter().map(|p| p.display().to_string()).collect()
}

fn parse_pair(s: &str) -> Result<DirectionPair, CliError> {
    let angle = |t: &str| -> Result<Direction, CliError> {
        let d = match t.trim() {
            "0" => Direction::HORIZONTAL,
            "90" => Direction::VERTICAL,
            "45" => Direction::DIAGONAL,
            "135" | "-45" => Direction::ANTI_DIAGONAL,
            other => return Err(CliError::plain(format!("unknown direction '{other}' (use 0, 45, 90 or 135)"))),
        };
        Ok(d)
    };
    let trimmed = s.trim_matches(|c| c == '(' || c == ')');
    let (a, b) = trimmed
        .split_once(',')
        .ok_or_else(|| CliError::plain(format!("direction pair '{s}' must look like 0,45")))?;
    DirectionPair::new(angle(a)?, angle(b)?).map_err(CliError::plain)
}

fn cmd_build(a: &BuildArgs) -> Result<(), CliError> {
    let mut run = Run::new("build-trainset");
    run.flag("inputs", paths(&a.inputs));
    run.flag("output", a.output.display().to_string());
    let cfg = BuildConfig { mode: a.mode.into(), ..BuildConfig::default() };
    run.flag("mode", cfg.mode.name());
    let mut corpus = Vec::with_capacity(a.inputs.len());
    for p in &a.inputs {
        corpus.push(read_image(&mut run, p)?);
    }
    run.lap("read");
    let ts = build_training_set(&corpus, &cfg).map_err(CliError::plain)?;
    run.lap("build");
    let mut summary = format!("records: {}\n", ts.record_count());
    for (pair, group) in ts.groups() {
        let _ = writeln!(summary, "{}: {}", pair.label(), group.len());
    }
    run.stage(&a.output, to_bytes(&ts));
    run.commit(&manifest_for(&a.output))?;
    print!("{summary}");
    Ok(())
}

fn cmd_super_resolve(a: &SrArgs) -> Result<(), CliError> {
    let mut run = Run::new("super-resolve");
    let report_path = a.report.clone().unwrap_or_else(|| {
        let mut name = a.output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".report.csv");
        a.output.with_file_name(name)
    });
    let cfg = SrConfig { fallback: a.fallback.into(), mode: a.mode.into(), ..SrConfig::default() };
    run.flag("input", a.input.display().to_string());
    run.flag("trainset", a.trainset.display().to_string());
    run.flag("output", a.output.display().to_string());
    run.flag("fallback", cfg.fallback.name());
    run.flag("report", report_path.display().to_string());
    run.flag("mode", cfg.mode.name());
    let lr = read_image(&mut run, &a.input)?;
    let ts_bytes = run.read(&a.trainset)?;
    let ts = load(ts_bytes.as_slice()).map_err(|e| core_err(&a.trainset, e))?;
    run.lap("read");
    let (hr, report) = super_resolve(&lr, &ts, &cfg).map_err(|e| core_err(&a.trainset, e))?;
    run.lap("super-resolve");
    run.stage(&a.output, pgm_bytes(&hr));
    run.stage(&report_path, report.patches_csv().into_bytes());
    run.commit(&manifest_for(&a.output))?;
    println!(
        "{}x{} -> {}x{}, fallback {:.1}%",
        lr.width(),
        lr.height(),
        hr.width(),
        hr.height(),
        100.0 * report.fallback_fraction()
    );
    Ok(())
}

fn cmd_evaluate(a: &EvalArgs) -> Result<(), CliError> {
    let mut run = Run::new("evaluate");
    let manifest = a.manifest.clone().unwrap_or_else(|| PathBuf::from("evaluate.manifest.json"));
    run.flag("reference", a.reference.display().to_string());
    run.flag("candidates", paths(&a.candidates));
    run.flag("manifest", manifest.display().to_string());
    let z = read_image(&mut run, &a.reference)?;
    let mut table = String::from("method,mse\n");
    for p in &a.candidates {
        let cand = read_image(&mut run, p)?;
        let m = mse(&z, &cand).map_err(|e| core_err(p, e))?;
        let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let _ = writeln!(table, "{},{m:.6}", name.replace(',', "_"));
    }
    run.lap("evaluate");
    run.commit(&manifest)?;
    print!("{table}");
    Ok(())
}

fn cmd_decimate(a: &DecimateArgs) -> Result<(), CliError> {
    let mut run = Run::new("decimate");
    run.flag("input", a.input.display().to_string());
    run.flag("output", a.output.display().to_string());
    run.flag("q", a.q);
    run.flag("sigma", a.sigma);
    run.flag("seed", a.seed);
    if !(a.sigma >= 0.0 && a.sigma.is_finite()) {
        return Err(CliError::plain(format!("--sigma must be a finite non-negative number, got {}", a.sigma)));
    }
    let hr = read_image(&mut run, &a.input)?;
    let mut lr = decimate(&hr, a.q).map_err(|e| core_err(&a.input, e))?;
    if a.sigma > 0.0 {
        lr = add_noise(&lr, a.sigma, a.seed);
    }
    run.lap("decimate");
    run.stage(&a.output, pgm_bytes(&lr));
    run.commit(&manifest_for(&a.output))
}

fn cmd_baseline(a: &BaselineArgs) -> Result<(), CliError> {
    let primary = match (&a.cubic, &a.wm2) {
        (Some(p), _) | (None, Some(p)) => p.clone(),
        (None, None) => return Err(CliError::plain("give --cubic and/or --wm2 output paths")),
    };
    let mut run = Run::new("baseline");
    run.flag("input", a.input.display().to_string());
    run.flag("cubic", a.cubic.as_ref().map(|p| p.display().to_string()));
    run.flag("wm2", a.wm2.as_ref().map(|p| p.display().to_string()));
    run.flag("corpus", paths(&a.corpus));
    let lr = read_image(&mut run, &a.input)?;
    if let Some(out) = &a.cubic {
        let (padded, dims) = pad_to_multiple(&lr, 4);
        let zoom = cubic_spline_upsample(&padded, 2);
        let zoom = dlsr_core::image::crop(&zoom, dlsr_core::Dims { width: dims.width * 2, height: dims.height * 2 })
            .map_err(CliError::plain)?;
        run.lap("cubic");
        run.stage(out, pgm_bytes(&zoom));
    }
    if let Some(out) = &a.wm2 {
        let mut corpus = Vec::with_capacity(a.corpus.len());
        for p in &a.corpus {
            corpus.push(read_image(&mut run, p)?);
        }
        let wts = wm2_build(&corpus).map_err(CliError::plain)?;
        let hr = wm2_super_resolve(&lr, &wts).map_err(|e| core_err(&a.input, e))?;
        run.lap("wm2");
        run.stage(out, pgm_bytes(&hr));
    }
    run.commit(&manifest_for(&primary))
}

fn format_grid(out: &mut String, rows: usize, cols: usize, get: impl Fn(usize, usize) -> f64) {
    for r in 0..rows {
        let line: Vec<String> = (0..cols).map(|c| format!("{:.9}", get(r, c))).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

fn cmd_dump(a: &DumpArgs) -> Result<(), CliError> {
    let mut run = Run::new("transform-dump");
    run.flag("input", a.input.display().to_string());
    run.flag("row", a.row);
    run.flag("col", a.col);
    run.flag("size", a.size);
    run.flag("pair", a.pair.clone());
    run.flag("mode", Mode::from(a.mode).name());
    run.flag("output", a.output.display().to_string());
    let img = read_image(&mut run, &a.input)?;
    if a.size == 0 || a.row + a.size > img.height() || a.col + a.size > img.width() {
        return Err(CliError::data(
            &a.input,
            format!(
                "patch {}x{} at ({}, {}) does not fit a {}x{} image",
                a.size,
                a.size,
                a.row,
                a.col,
                img.width(),
                img.height()
            ),
        ));
    }
    let patch = img.patch_at(a.row, a.col, a.size);
    let (best, energies) = best_direction(&patch).map_err(CliError::plain)?;
    let pair = match &a.pair {
        Some(s) => parse_pair(s)?,
        None => best,
    };
    let bands = forward_awt21(&patch, pair, a.mode.into()).map_err(|e| core_err(&a.input, e))?;
    let mut text = String::new();
    let _ = writeln!(text, "best: {}", best.label());
    for (p, e) in canonical_pairs().iter().zip(energies) {
        let _ = writeln!(text, "energy {}: {e:.9}", p.label());
    }
    let _ = writeln!(text, "pair: {}", pair.label());
    let _ = writeln!(text, "mode: {}", Mode::from(a.mode).name());
    for b in Band::ALL {
        let plane = bands.band(b);
        let _ = writeln!(text, "\n[{}] {}x{}", b.name(), plane.rows, plane.cols);
        format_grid(&mut text, plane.rows, plane.cols, |r, c| plane.get(r, c));
    }
    run.lap("transform");
    run.stage(&a.output, text.into_bytes());
    run.commit(&manifest_for(&a.output))
}

fn cmd_demo(a: &DemoArgs) -> Result<(), CliError> {
    let mut run = Run::new("demo-corpus");
    run.flag("output_dir", a.output_dir.display().to_string());
    let sets = [
        ("train", training_corpus(TRAIN_SIZE)),
        ("test", test_corpus(TEST_SIZE)),
        ("natural", natural_images(TRAIN_SIZE)),
    ];
    for (dir, images) in &sets {
        let d = a.output_dir.join(dir);
        std::fs::create_dir_all(&d).map_err(|e| CliError::io(&d, e))?;
        for img in images {
            run.stage(&d.join(format!("{}.pgm", img.name)), pgm_bytes(&img.image));
        }
    }
    run.lap("render");
    run.commit(&a.output_dir.join("demo-corpus.manifest.json"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::BuildTrainset(a) => cmd_build(a),
        Command::SuperResolve(a) => cmd_super_resolve(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Decimate(a) => cmd_decimate(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::TransformDump(a) => cmd_dump(a),
        Command::DemoCorpus(a) => cmd_demo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dlsr: {e}");
            ExitCode::from(e.code())
        }
    }
}
