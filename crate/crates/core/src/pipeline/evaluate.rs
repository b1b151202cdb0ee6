use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, QOI_NAMES, QOI_UNITS};
use super::metrics::{abs_rel_err, median, r2, relative_l2, rmse};
use super::train::{train, TrainConfig, TrainHistory};
use crate::error::Result;
use crate::io;
use crate::surrogate::{ModelKind, Surrogate};
use crate::thermal::ProcessParameters;

/// One test sample of a scalar model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarSample {
    pub index: usize,
    pub truth: [f64; 2],
    pub pred: [f64; 2],
    /// `None` where the true value is zero.
    pub abs_rel_err: [Option<f64>; 2],
}

/// Scalar-QoI metrics in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarEval {
    pub rmse: [f64; 2],
    pub r2: [f64; 2],
    pub samples: Vec<ScalarSample>,
    /// Samples left out of the relative error per QoI because the truth is zero.
    pub zero_truth: [usize; 2],
}

/// One test sample of a series model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSample {
    pub index: usize,
    pub rmse: [f64; 2],
    pub rel_l2: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEval {
    pub samples: Vec<SeriesSample>,
    pub median_rel_l2: [f64; 2],
    /// Over every test sample and time step.
    pub rmse: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub kind: ModelKind,
    pub scalar: Option<ScalarEval>,
    pub series: Option<SeriesEval>,
    pub history: TrainHistory,
}

fn params_of(ds: &Dataset, rows: &[usize]) -> Vec<ProcessParameters> {
    rows.iter().map(|&i| ds.params(i)).collect()
}

pub fn evaluate_scalar(model: &Surrogate, ds: &Dataset, rows: &[usize]) -> Result<ScalarEval> {
    let pred = model.predict_scalar(&params_of(ds, rows))?;
    let mut out = ScalarEval {
        rmse: [0.0; 2],
        r2: [0.0; 2],
        samples: Vec::with_capacity(rows.len()),
        zero_truth: [0; 2],
    };
    for q in 0..2 {
        let p: Vec<f64> = pred.iter().map(|v| v[q]).collect();
        let t: Vec<f64> = rows.iter().map(|&i| ds.scalar_targets[i][q]).collect();
        out.rmse[q] = rmse(&p, &t);
        out.r2[q] = r2(&p, &t);
        out.zero_truth[q] = abs_rel_err(&p, &t).iter().filter(|e| e.is_none()).count();
    }
    for (&i, p) in rows.iter().zip(&pred) {
        let t = ds.scalar_targets[i];
        let e = abs_rel_err(p, &t);
        out.samples.push(ScalarSample {
            index: i,
            truth: t,
            pred: *p,
            abs_rel_err: [e[0], e[1]],
        });
    }
    Ok(out)
}

/// Series metrics at the dataset's time steps, evaluating the operator on
/// an internal grid of `grid_n` points (its training grid if `None`).
pub fn evaluate_series(model: &Surrogate, ds: &Dataset, rows: &[usize], grid_n: Option<usize>) -> Result<SeriesEval> {
    let params = params_of(ds, rows);
    let pred = match grid_n {
        Some(n) => model.predict_series_on_grid(&params, n)?,
        None => model.predict_series(&params)?,
    };
    let mut samples = Vec::with_capacity(rows.len());
    let mut pooled: [(Vec<f64>, Vec<f64>); 2] = Default::default();
    for (&i, p) in rows.iter().zip(&pred) {
        let truth = [&ds.series_volume[i], &ds.series_temp[i]];
        let mut s = SeriesSample {
            index: i,
            rmse: [0.0; 2],
            rel_l2: [0.0; 2],
        };
        for c in 0..2 {
            s.rmse[c] = rmse(&p[c], truth[c]);
            s.rel_l2[c] = relative_l2(&p[c], truth[c]);
            pooled[c].0.extend_from_slice(&p[c]);
            pooled[c].1.extend_from_slice(truth[c]);
        }
        samples.push(s);
    }
    let med = |c: usize| median(&samples.iter().map(|s| s.rel_l2[c]).collect::<Vec<_>>());
    Ok(SeriesEval {
        median_rel_l2: [med(0), med(1)],
        rmse: [rmse(&pooled[0].0, &pooled[0].1), rmse(&pooled[1].0, &pooled[1].1)],
        samples,
    })
}

/// Trains a model and evaluates it on the test split.
pub fn train_and_evaluate(ds: &Dataset, cfg: &TrainConfig) -> Result<(Surrogate, EvalReport)> {
    let (model, history) = train(ds, cfg)?;
    let rows = &ds.split.test;
    let (scalar, series) = if cfg.kind.is_series() {
        (None, Some(evaluate_series(&model, ds, rows, None)?))
    } else {
        (Some(evaluate_scalar(&model, ds, rows)?), None)
    };
    let report = EvalReport {
        kind: cfg.kind,
        scalar,
        series,
        history,
    };
    Ok((model, report))
}

/// Trains the 50-mode series operator and reports per-sample series errors.
pub fn train_series(ds: &Dataset, cfg: &TrainConfig) -> Result<(Surrogate, EvalReport)> {
    let cfg = TrainConfig {
        kind: ModelKind::FnoSeries,
        ..cfg.clone()
    };
    train_and_evaluate(ds, &cfg)
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

/// Per-epoch training and validation loss.
pub fn loss_csv(h: &TrainHistory) -> String {
    io::csv_string(
        &["epoch", "train_mse", "val_mse"],
        h.train_loss
            .iter()
            .zip(&h.val_loss)
            .enumerate()
            .map(|(e, (t, v))| vec![(e + 1).to_string(), num(*t), num(*v)]),
    )
}

/// One row per test sample: truth, prediction and relative error per QoI.
pub fn scalar_samples_csv(e: &ScalarEval) -> String {
    let header = [
        "index",
        "bead_volume_true",
        "bead_volume_pred",
        "bead_volume_abs_rel_err",
        "max_temperature_true",
        "max_temperature_pred",
        "max_temperature_abs_rel_err",
    ];
    io::csv_string(
        &header,
        e.samples.iter().map(|s| {
            let mut row = vec![s.index.to_string()];
            for q in 0..2 {
                row.extend([num(s.truth[q]), num(s.pred[q]), opt(s.abs_rel_err[q])]);
            }
            row
        }),
    )
}

pub fn series_samples_csv(e: &SeriesEval) -> String {
    io::csv_string(
        &[
            "index",
            "bead_volume_rmse",
            "bead_volume_rel_l2",
            "max_temperature_rmse",
            "max_temperature_rel_l2",
        ],
        e.samples.iter().map(|s| {
            vec![
                s.index.to_string(),
                num(s.rmse[0]),
                num(s.rel_l2[0]),
                num(s.rmse[1]),
                num(s.rel_l2[1]),
            ]
        }),
    )
}

/// Metric table with one row per QoI and one RMSE/R² column pair per report.
pub fn summary_csv(reports: &[&EvalReport]) -> String {
    let mut header = vec!["qoi".to_string(), "unit".to_string()];
    for r in reports {
        header.push(format!("{}_rmse", r.kind));
        header.push(format!("{}_r2", r.kind));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    io::csv_string(
        &header,
        (0..2).map(|q| {
            let mut row = vec![QOI_NAMES[q].to_string(), QOI_UNITS[q].to_string()];
            for r in reports {
                match &r.scalar {
                    Some(s) => row.extend([num(s.rmse[q]), num(s.r2[q])]),
                    None => row.extend([String::new(), String::new()]),
                }
            }
            row
        }),
    )
}

/// Writes the loss history and per-sample CSV of one report into `dir`,
/// returning the paths written.
pub fn write_report(report: &EvalReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let kind = report.kind.name();
    let mut written = Vec::new();
    let p = dir.join(format!("{kind}_loss.csv"));
    io::write_atomic(&p, loss_csv(&report.history).as_bytes())?;
    written.push(p);
    if let Some(s) = &report.scalar {
        let p = dir.join(format!("{kind}_test_samples.csv"));
        io::write_atomic(&p, scalar_samples_csv(s).as_bytes())?;
        written.push(p);
    }
    if let Some(s) = &report.series {
        let p = dir.join(format!("{kind}_test_series_errors.csv"));
        io::write_atomic(&p, series_samples_csv(s).as_bytes())?;
        written.push(p);
    }
    Ok(written)
}
