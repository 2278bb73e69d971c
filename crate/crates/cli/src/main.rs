use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qface::archive::{self, SavedModel};
use qface::dataset::manifest::load_manifest;
use qface::dataset::synth::{synth_dataset, SynthSpec};
use qface::dataset::{encode_ppm, Dataset};
use qface::harness::{
    accuracy_csv, accuracy_sweep, accuracy_sweep_model, predictions_csv, reconstruction_csv,
    reconstruction_sweep_model, summarize, train_method, Method, RRange,
};
use qface::model::train;
use qface::recognize::project;
use qface::reconstruct::reconstruct;
use qface::toy::{toy_case, toy_table, ToySpec};
use qface::{Error, ErrorClass, Result};

/// Color face recognition and reconstruction with quaternion 2D PCA.
#[derive(Parser)]
#[command(name = "qface", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write it with its gallery and a training log.
    Train(TrainArgs),
    /// Report recognition accuracy over a range of eigenface counts.
    Evaluate(EvaluateArgs),
    /// Reconstruct training images and report reconstruction ratios.
    Reconstruct(ReconstructArgs),
    /// Run the two-class planar toy example.
    Toy(ToyArgs),
    /// Benchmark all three methods on the same split.
    Compare(CompareArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// CSV manifest with a `path,label,split` header.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Synthetic data, e.g. `classes=4,per=5,w=8,h=8,noise=2`.
    #[arg(long, value_name = "SPEC")]
    synthetic: Option<String>,
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    source: Source,
    /// Seed for synthetic data.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct Ranks {
    /// Single eigenface count.
    #[arg(long = "r")]
    r: Option<usize>,
    /// Inclusive range of eigenface counts, `A..B`.
    #[arg(long = "r-range", conflicts_with = "r")]
    r_range: Option<RRange>,
}

impl Ranks {
    fn resolve(&self, max: usize) -> RRange {
        match (self.r, self.r_range) {
            (Some(r), _) => RRange::single(r),
            (None, Some(range)) => range,
            (None, None) => RRange { start: 1, end: max },
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// sr-2dcpca, 2dcpca or 2dpca.
    #[arg(long, default_value = "sr-2dcpca")]
    mode: Method,
    /// Number of eigenfaces.
    #[arg(long = "r")]
    r: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// sr-2dcpca, 2dcpca or 2dpca. Defaults to the model's method, else sr-2dcpca.
    #[arg(long)]
    mode: Option<Method>,
    #[command(flatten)]
    ranks: Ranks,
    /// Evaluate a saved model instead of training one.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    common: Common,
    /// sr-2dcpca or 2dcpca.
    #[arg(long)]
    mode: Option<Method>,
    #[command(flatten)]
    ranks: Ranks,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Number of training images written as PPM at every r.
    #[arg(long, default_value_t = 4)]
    images: usize,
}

#[derive(Args)]
struct ToyArgs {
    /// Seed of the first case.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    cases: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    ranks: Ranks,
}

fn load(common: &Common) -> Result<Dataset> {
    match (&common.source.manifest, &common.source.synthetic) {
        (Some(path), _) => load_manifest(path),
        (None, Some(spec)) => synth_dataset(&spec.parse::<SynthSpec>()?, common.seed),
        (None, None) => Err(Error::InvalidArgument("one of --manifest or --synthetic is required".into())),
    }
}

fn out_dir(dir: &Path) -> Result<&Path> {
    fs::create_dir_all(dir).map_err(|e| Error::File {
        path: dir.to_path_buf(),
        source: e,
    })?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    archive::write_atomic(&dir.join(name), bytes)
}

fn json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn load_model(path: &Path, mode: Option<Method>) -> Result<SavedModel> {
    let model = archive::load_model(path)?;
    if let Some(m) = mode {
        if m.as_str() != model.method() {
            return Err(Error::InvalidArgument(format!(
                "--mode {m} does not match the model's method {}",
                model.method()
            )));
        }
    }
    Ok(model)
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let ds = load(&args.common)?;
    let (model, gallery, log) = train_method(&ds.train, args.r, args.mode)?;
    let dir = out_dir(&args.common.out)?;
    archive::save_model(&dir.join("model.qfm"), &model)?;
    archive::save_gallery(&dir.join("gallery.qfg"), &gallery)?;
    write(dir, "train_log.json", &json(&log)?)?;
    println!(
        "trained {} with r={} on {} samples in {} classes ({:.1} ms)",
        log.method, log.r, log.samples, log.classes, log.wall_ms
    );
    println!("spectrum: {:?}", &log.spectrum[..log.spectrum.len().min(10)]);
    if !log.relaxation.is_empty() {
        println!("relaxation: {:?}", log.relaxation);
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn print_reports(reports: &[qface::recognize::AccuracyReport]) {
    println!("{:>10} {:>4} {:>9} {:>12}", "method", "r", "accuracy", "latency_ms");
    for rep in reports {
        println!(
            "{:>10} {:>4} {:>9.4} {:>12.4}",
            rep.method, rep.r, rep.accuracy, rep.mean_latency_ms
        );
    }
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let ds = load(&args.common)?;
    let reports = match &args.model {
        Some(path) => {
            let model = load_model(path, args.mode)?;
            accuracy_sweep_model(&model, &ds.train, &ds.test, args.ranks.resolve(model.r()))?
        }
        None => {
            let method = args.mode.unwrap_or(Method::Color(qface::Mode::Sr2dcpca));
            accuracy_sweep(&ds.train, &ds.test, method, args.ranks.resolve(ds.train.dims().1))?
        }
    };
    let dir = out_dir(&args.common.out)?;
    write(dir, "accuracy.csv", accuracy_csv(&reports).as_bytes())?;
    write(dir, "predictions.csv", predictions_csv(&reports).as_bytes())?;
    write(dir, "summary.json", &json(&reports)?)?;
    print_reports(&reports);
    Ok(())
}

fn cmd_reconstruct(args: &ReconstructArgs) -> Result<()> {
    let ds = load(&args.common)?;
    let full = match &args.model {
        Some(path) => match load_model(path, args.mode)? {
            SavedModel::Color(m) => m,
            SavedModel::Gray(_) => {
                return Err(Error::InvalidArgument("reconstruction needs a color model".into()));
            }
        },
        None => {
            let mode = match args.mode.unwrap_or(Method::Color(qface::Mode::Sr2dcpca)) {
                Method::Color(m) => m,
                Method::Gray => {
                    return Err(Error::InvalidArgument("reconstruction needs sr-2dcpca or 2dcpca".into()));
                }
            };
            let range = args.ranks.resolve(ds.train.dims().1);
            range.check(ds.train.dims().1)?;
            train(&ds.train, range.end, mode)?
        }
    };
    if full.dims() != ds.train.dims() {
        return Err(Error::InvalidArgument(format!(
            "model expects {:?} images, data has {:?}",
            full.dims(),
            ds.train.dims()
        )));
    }
    let range = args.ranks.resolve(full.r());
    let reports = reconstruction_sweep_model(&ds.train, &full, range)?;
    let dir = out_dir(&args.common.out)?;
    write(dir, "ratios.csv", reconstruction_csv(&ds.train, &reports).as_bytes())?;

    let images_dir = dir.join("images");
    let images = out_dir(&images_dir)?;
    for (i, s) in ds.train.samples().iter().take(args.images).enumerate() {
        write(images, &format!("s{i:03}_orig.ppm"), &encode_ppm(&s.image))?;
        for r in range.iter() {
            let m = full.truncate(r)?;
            let rec = reconstruct(&project(&s.image, &m)?, &m)?;
            write(images, &format!("s{i:03}_r{r:03}.ppm"), &encode_ppm(&rec))?;
        }
    }
    println!("{:>4} {:>10} {:>10}", "r", "min_ratio", "mean_ratio");
    for rep in &reports {
        let finite: Vec<f64> = rep.ratios.iter().copied().filter(|v| v.is_finite()).collect();
        let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = finite.iter().sum::<f64>() / finite.len().max(1) as f64;
        println!("{:>4} {:>10.6} {:>10.6}", rep.r, min, mean);
    }
    Ok(())
}

fn cmd_toy(args: &ToyArgs) -> Result<()> {
    let spec = ToySpec::default();
    let cases = (args.seed..args.seed + args.cases)
        .map(|s| toy_case(&spec, s))
        .collect::<Result<Vec<_>>>()?;
    let table = toy_table(&cases);
    let dir = out_dir(&args.out)?;
    write(dir, "toy.csv", table.as_bytes())?;
    println!("{:>4} {:>16} {:>12} {:>12} {:>12} {:>12}", "case", "relaxation", "train_2dcpca", "train_sr", "whole_2dcpca", "whole_sr");
    for (i, c) in cases.iter().enumerate() {
        println!(
            "{:>4} {:>16} {:>12.4} {:>12.4} {:>12.4} {:>12.4}",
            i + 1,
            format!("[{:.4}, {:.4}]", c.relaxation[0], c.relaxation[1]),
            c.train_variance_2dcpca,
            c.train_variance_sr,
            c.whole_variance_2dcpca,
            c.whole_variance_sr
        );
    }
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let ds = load(&args.common)?;
    let range = args.ranks.resolve(ds.train.dims().1);
    let mut reports = Vec::new();
    for method in Method::ALL {
        reports.extend(accuracy_sweep(&ds.train, &ds.test, method, range)?);
    }
    let summary = summarize(&reports);
    let dir = out_dir(&args.common.out)?;
    write(dir, "accuracy.csv", accuracy_csv(&reports).as_bytes())?;
    write(dir, "benchmark.json", &json(&summary)?)?;
    println!("{:>10} {:>6} {:>9} {:>12}", "method", "best_r", "max_rate", "latency_ms");
    for s in &summary {
        println!(
            "{:>10} {:>6} {:>9.4} {:>12.4}",
            s.method, s.best_r, s.best_accuracy, s.mean_latency_ms
        );
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("QFACE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("QFACE_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Data => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Usage => 64,
    }
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Toy(a) => cmd_toy(a),
        Command::Compare(a) => cmd_compare(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
