//! Command-line front end. The binary only forwards to [`main_with_args`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::io;
use crate::pipeline::dataset::{QOI_NAMES, QOI_UNITS};
use crate::pipeline::evaluate::{evaluate_scalar, evaluate_series, loss_csv, scalar_samples_csv, series_samples_csv, summary_csv};
use crate::pipeline::{benchmark, generate_dataset_with, train, write_benchmark, Dataset, DivergencePolicy, EvalReport, TrainConfig};
use crate::surrogate::{ModelKind, Surrogate};
use crate::thermal::{ProcessParameters, ThermalConfig, PARAMETER_NAMES, PARAMETER_UNITS};

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
/// Invalid flags, config files or model settings.
pub const EXIT_CONFIG: u8 = 2;
/// Missing, malformed, mismatched or empty data and checkpoint files.
pub const EXIT_DATA: u8 = 3;
/// A simulation or training run produced non-finite values.
pub const EXIT_DIVERGED: u8 = 4;

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Toml(_) | Error::InvalidSize(_) | Error::ShapeMismatch { .. } => EXIT_CONFIG,
        Error::Data(_)
        | Error::EmptyDataset(_)
        | Error::SchemaVersion { .. }
        | Error::ProvenanceMismatch { .. }
        | Error::Json(_) => EXIT_DATA,
        Error::SimulationDiverged { .. } | Error::TrainingDiverged { .. } | Error::NonFiniteGradient { .. } => {
            EXIT_DIVERGED
        }
        Error::Io { .. } => EXIT_IO,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "meltpool-rom",
    version,
    about = "Generate melt-pool simulation data and train surrogate models on it",
    after_help = "Units: power W, speed mm/ms, radius mm, efficiency and scaling dimensionless; \
bead volume mm^3, temperature K.\nExit codes: 0 ok, 1 i/o, 2 config, 3 data, 4 numeric divergence."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample process parameters, run the thermal model, keep melting runs.
    GenData(GenDataArgs),
    /// Train one surrogate on a dataset and write a checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset split.
    Eval(EvalArgs),
    /// Predict QoIs for one parameter set.
    Predict(PredictArgs),
    /// Train the operator network and the baseline on one split and compare them.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Thermal configuration (TOML); the bundled reference set if omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of parameter sets to simulate.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Seed of the parameter draws and the split.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Dataset file to write (JSON).
    #[arg(long, default_value = "dataset.json")]
    pub out: PathBuf,
}

/// Training settings shared by `train` and `benchmark`.
#[derive(Debug, Args, Clone)]
pub struct TrainFlags {
    /// Number of epochs [default: 512].
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Adam learning rate [default: 0.001 for fno/fno-series, 0.007 for dnn].
    #[arg(long)]
    pub lr: Option<f64>,
    /// Minibatch size in samples [default: 32].
    #[arg(long)]
    pub batch: Option<usize>,
    /// Seed of initialization and shuffling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset file produced by gen-data.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Model to train.
    #[arg(long, default_value = "fno", value_parser = parse_kind)]
    pub model: ModelKind,
    #[command(flatten)]
    pub train: TrainFlags,
    /// Fourier modes kept per layer [default: 5, or 50 for fno-series].
    #[arg(long)]
    pub modes: Option<usize>,
    /// Fourier layer count, or dnn hidden widths such as 150-300-500-300-150.
    #[arg(long)]
    pub layers: Option<String>,
    /// Hidden channel width of the operator network [default: 32].
    #[arg(long)]
    pub width: Option<usize>,
    /// Checkpoint file to write (JSON); the loss history goes next to it.
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SplitName {
    Train,
    Val,
    Test,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Rows to evaluate.
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitName,
    /// Evaluate even if the checkpoint was trained on a dataset with a different provenance hash.
    #[arg(long)]
    pub allow_provenance_mismatch: bool,
    /// Output directory for the summary and per-sample CSV files.
    #[arg(long, default_value = "eval")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Comma-separated power (W), speed (mm/ms), radius (mm), efficiency, scaling.
    #[arg(long, value_parser = parse_params, allow_hyphen_values = true)]
    pub params: ProcessParameters,
    /// Optional CSV output; series models print their CSV to stdout without it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub train: TrainFlags,
    /// Output directory for tables, per-sample errors, loss curves and checkpoints.
    #[arg(long, default_value = "benchmark")]
    pub out: PathBuf,
}

fn parse_kind(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_params(s: &str) -> std::result::Result<ProcessParameters, String> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let arr: [f64; 5] = vals
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected 5 comma-separated values, got {}", v.len()))?;
    if arr.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err("parameters must be finite and positive".into());
    }
    Ok(ProcessParameters::from_array(arr))
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenData(a) => gen_data(&a),
        Command::Train(a) => train_cmd(&a),
        Command::Eval(a) => eval_cmd(&a),
        Command::Predict(a) => predict_cmd(&a),
        Command::Benchmark(a) => benchmark_cmd(&a),
    }
}

fn gen_data(a: &GenDataArgs) -> Result<()> {
    let thermal = match &a.config {
        Some(p) => ThermalConfig::load(p)?,
        None => ThermalConfig::reference(),
    };
    let start = Instant::now();
    let ds = generate_dataset_with(a.n, a.seed, &thermal, DivergencePolicy::Drop);
    let secs = start.elapsed().as_secs_f64();
    let ds = match ds {
        Ok(ds) => ds,
        Err(e @ Error::EmptyDataset(_)) => {
            println!("requested {} retained 0 ({secs:.2} s)", a.n);
            return Err(e);
        }
        Err(e) => return Err(e),
    };
    ds.save(&a.out)?;
    let s = &ds.summary;
    println!(
        "requested {} retained {} no-melt {} diverged {} ({secs:.2} s)",
        s.requested,
        s.retained,
        s.no_melt,
        s.diverged.len()
    );
    for i in &s.diverged {
        eprintln!("warning: simulation of sample {i} diverged and was dropped");
    }
    println!(
        "split train {} / val {} / test {}; wrote {}",
        ds.split.train.len(),
        ds.split.val.len(),
        ds.split.test.len(),
        a.out.display()
    );
    Ok(())
}

fn apply_flags(cfg: &mut TrainConfig, f: &TrainFlags) {
    if let Some(e) = f.epochs {
        cfg.epochs = e;
    }
    if let Some(lr) = f.lr {
        cfg.lr = lr;
    }
    if let Some(b) = f.batch {
        cfg.batch_size = b;
    }
    cfg.seed = f.seed;
}

/// Training configuration for `train` from defaults and flags.
pub fn train_config(a: &TrainArgs) -> Result<TrainConfig> {
    let mut cfg = TrainConfig::defaults(a.model);
    apply_flags(&mut cfg, &a.train);
    if let Some(m) = a.modes {
        cfg.fno.n_modes = m;
    }
    if let Some(w) = a.width {
        cfg.fno.width = w;
    }
    if let Some(layers) = &a.layers {
        match a.model {
            ModelKind::Dnn => {
                cfg.hidden = layers
                    .split(['-', ','])
                    .map(|v| v.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Config(format!("--layers {layers:?}: {e}")))?;
            }
            _ => {
                cfg.fno.n_layers = layers
                    .trim()
                    .parse()
                    .map_err(|e| Error::Config(format!("--layers {layers:?}: {e}")))?;
            }
        }
    }
    if a.model == ModelKind::Dnn && (a.modes.is_some() || a.width.is_some()) {
        return Err(Error::Config("--modes and --width apply to operator models only".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `model.json` -> `model_loss.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or("model".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}{suffix}"))
}

fn train_cmd(a: &TrainArgs) -> Result<()> {
    let cfg = train_config(a)?;
    let ds = Dataset::load(&a.dataset)?;
    let (model, history) = train(&ds, &cfg)?;
    model.save(&a.out)?;
    let loss_path = sibling(&a.out, "_loss.csv");
    io::write_atomic(&loss_path, loss_csv(&history).as_bytes())?;
    println!(
        "trained {} for {} epochs in {:.2} s: final train MSE {:.6e}, val MSE {:.6e}",
        cfg.kind,
        cfg.epochs,
        history.seconds,
        history.train_loss.last().copied().unwrap_or(f64::NAN),
        history.val_loss.last().copied().unwrap_or(f64::NAN)
    );
    println!("wrote {} and {}", a.out.display(), loss_path.display());
    Ok(())
}

fn eval_cmd(a: &EvalArgs) -> Result<()> {
    let ds = Dataset::load(&a.dataset)?;
    let model = Surrogate::load(&a.checkpoint)?;
    if model.dataset_hash != ds.provenance.hash {
        let err = Error::ProvenanceMismatch {
            checkpoint: model.dataset_hash.clone(),
            dataset: ds.provenance.hash.clone(),
        };
        if !a.allow_provenance_mismatch {
            return Err(err);
        }
        eprintln!("warning: {err}; continuing");
    }
    let rows = match a.split {
        SplitName::Train => &ds.split.train,
        SplitName::Val => &ds.split.val,
        SplitName::Test => &ds.split.test,
    };
    let kind = model.kind.name();
    if model.kind.is_series() {
        if ds.series_len() != model.series_len {
            return Err(Error::Data(format!(
                "checkpoint predicts {} steps, dataset has {}",
                model.series_len,
                ds.series_len()
            )));
        }
        let e = evaluate_series(&model, &ds, rows, None)?;
        let p = a.out.join(format!("{kind}_series_errors.csv"));
        io::write_atomic(&p, series_samples_csv(&e).as_bytes())?;
        for q in 0..2 {
            println!(
                "{:<16} RMSE {:.6} {}  median rel L2 {:.4}",
                QOI_NAMES[q], e.rmse[q], QOI_UNITS[q], e.median_rel_l2[q]
            );
        }
        println!("wrote {}", p.display());
    } else {
        let e = evaluate_scalar(&model, &ds, rows)?;
        let samples = a.out.join(format!("{kind}_samples.csv"));
        io::write_atomic(&samples, scalar_samples_csv(&e).as_bytes())?;
        for q in 0..2 {
            println!(
                "{:<16} RMSE {:.6} {:<5} R2 {:.5}  ({} zero-truth samples excluded from relative error)",
                QOI_NAMES[q], e.rmse[q], QOI_UNITS[q], e.r2[q], e.zero_truth[q]
            );
        }
        let report = EvalReport {
            kind: model.kind,
            scalar: Some(e),
            series: None,
            history: Default::default(),
        };
        let summary = a.out.join("summary.csv");
        io::write_atomic(&summary, summary_csv(&[&report]).as_bytes())?;
        println!("wrote {} and {}", summary.display(), samples.display());
    }
    Ok(())
}

fn predict_cmd(a: &PredictArgs) -> Result<()> {
    let model = Surrogate::load(&a.checkpoint)?;
    let outside = a.params.out_of_bounds();
    if !outside.is_empty() {
        eprintln!(
            "warning: {} outside the sampled range; the prediction is an extrapolation",
            outside.join(", ")
        );
    }
    let p = std::slice::from_ref(&a.params);
    if model.kind.is_series() {
        let s = model.predict_series(p)?.remove(0);
        let csv = io::csv_string(
            &["step", "bead_volume_mm3", "max_temperature_K"],
            (0..model.series_len).map(|i| vec![(i + 1).to_string(), s[0][i].to_string(), s[1][i].to_string()]),
        );
        match &a.out {
            Some(path) => {
                io::write_atomic(path, csv.as_bytes())?;
                println!(
                    "final bead volume {:.6} mm^3, peak temperature {:.2} K; wrote {} rows to {}",
                    s[0][model.series_len - 1],
                    s[1].iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    model.series_len,
                    path.display()
                );
            }
            None => print!("{csv}"),
        }
    } else {
        let [v, t] = model.predict_scalar(p)?[0];
        println!("bead_volume {v:.6} mm^3");
        println!("max_temperature {t:.3} K");
        if let Some(path) = &a.out {
            let mut header: Vec<String> = PARAMETER_NAMES
                .iter()
                .zip(PARAMETER_UNITS)
                .map(|(n, u)| if u == "-" { n.to_string() } else { format!("{n}_{}", u.replace('/', "_per_")) })
                .collect();
            header.extend(["bead_volume_mm3".into(), "max_temperature_K".into()]);
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut row: Vec<String> = a.params.to_array().iter().map(f64::to_string).collect();
            row.extend([v.to_string(), t.to_string()]);
            io::write_atomic(path, io::csv_string(&header, [row]).as_bytes())?;
        }
    }
    Ok(())
}

fn benchmark_cmd(a: &BenchmarkArgs) -> Result<()> {
    let ds = Dataset::load(&a.dataset)?;
    let mut fno = TrainConfig::defaults(ModelKind::Fno);
    let mut dnn = TrainConfig::defaults(ModelKind::Dnn);
    apply_flags(&mut fno, &a.train);
    apply_flags(&mut dnn, &a.train);
    if a.train.lr.is_some() {
        eprintln!("warning: --lr applies to both models in benchmark mode");
    }
    let report = benchmark(&ds, &fno, &dnn)?;
    let mut written = write_benchmark(&report, &a.out)?;
    for (m, name) in [(&report.fno_model, "fno.json"), (&report.dnn_model, "dnn.json")] {
        let p = a.out.join(name);
        m.save(&p)?;
        written.push(p);
    }
    print!("{}", crate::pipeline::benchmark::summary_table(&report));
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}
