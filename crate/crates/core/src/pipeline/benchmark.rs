use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::dataset::{Dataset, QOI_NAMES, QOI_UNITS};
use super::evaluate::{summary_csv, train_and_evaluate, write_report, EvalReport};
use super::train::TrainConfig;
use crate::error::{Error, Result};
use crate::io;
use crate::surrogate::{ModelKind, Surrogate};

/// Published test-set figures for the operator network and the baseline:
/// `[volume RMSE, volume R², temperature RMSE, temperature R²]`, then the
/// training wall time in seconds.
pub const REFERENCE_FNO: ([f64; 4], f64) = ([0.004058, 0.99954, 15.497, 0.99927], 276.85);
pub const REFERENCE_DNN: ([f64; 4], f64) = ([0.019712, 0.98921, 42.327, 0.99458], 69.32);

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub fno: EvalReport,
    pub dnn: EvalReport,
    pub fno_model: Surrogate,
    pub dnn_model: Surrogate,
}

/// Trains both scalar models on the same split and evaluates them on the
/// same test rows.
pub fn benchmark(ds: &Dataset, fno: &TrainConfig, dnn: &TrainConfig) -> Result<BenchmarkReport> {
    if fno.kind != ModelKind::Fno || dnn.kind != ModelKind::Dnn {
        return Err(Error::Config("benchmark needs one fno and one dnn configuration".into()));
    }
    let (fno_model, fno_report) = train_and_evaluate(ds, fno)?;
    let (dnn_model, dnn_report) = train_and_evaluate(ds, dnn)?;
    Ok(BenchmarkReport {
        fno: fno_report,
        dnn: dnn_report,
        fno_model,
        dnn_model,
    })
}

/// Human-readable side-by-side table with the published figures alongside.
pub fn summary_table(r: &BenchmarkReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<16} {:>6} | {:>12} {:>9} | {:>12} {:>9}", "QoI", "unit", "FNO RMSE", "FNO R2", "DNN RMSE", "DNN R2");
    for q in 0..2 {
        let f = r.fno.scalar.as_ref().expect("scalar report");
        let d = r.dnn.scalar.as_ref().expect("scalar report");
        let _ = writeln!(
            s,
            "{:<16} {:>6} | {:>12.6} {:>9.5} | {:>12.6} {:>9.5}",
            QOI_NAMES[q], QOI_UNITS[q], f.rmse[q], f.r2[q], d.rmse[q], d.r2[q]
        );
    }
    let _ = writeln!(s, "published figures (different simulator and material set):");
    for q in 0..2 {
        let (f, d) = (REFERENCE_FNO.0, REFERENCE_DNN.0);
        let _ = writeln!(
            s,
            "{:<16} {:>6} | {:>12.6} {:>9.5} | {:>12.6} {:>9.5}",
            QOI_NAMES[q], QOI_UNITS[q], f[2 * q], f[2 * q + 1], d[2 * q], d[2 * q + 1]
        );
    }
    let _ = writeln!(
        s,
        "training time: fno {:.2} s, dnn {:.2} s (published: {} s, {} s)",
        r.fno.history.seconds, r.dnn.history.seconds, REFERENCE_FNO.1, REFERENCE_DNN.1
    );
    s
}

/// Writes `summary.csv`, `summary.txt` and each model's loss and per-sample files.
pub fn write_benchmark(r: &BenchmarkReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let p = dir.join("summary.csv");
    io::write_atomic(&p, summary_csv(&[&r.fno, &r.dnn]).as_bytes())?;
    written.push(p);
    let p = dir.join("summary.txt");
    io::write_atomic(&p, summary_table(r).as_bytes())?;
    written.push(p);
    written.extend(write_report(&r.fno, dir)?);
    written.extend(write_report(&r.dnn, dir)?);
    Ok(written)
}
