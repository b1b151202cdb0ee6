//! Generates a small dataset on the reference grid, trains the FNO and the
//! fully connected baseline on the scalar quantities, and scores them on the
//! held-out test rows.
//!
//! Usage: train_surrogates [samples] [epochs]

use meltpool_rom::pipeline::{generate_dataset, train_and_evaluate, TrainConfig};
use meltpool_rom::thermal::ThermalConfig;
use meltpool_rom::ModelKind;

fn main() -> meltpool_rom::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let samples = args.next().unwrap_or(150);
    let epochs = args.next().unwrap_or(60);

    let ds = generate_dataset(samples, 7, &ThermalConfig::reference())?;
    let s = &ds.summary;
    println!(
        "requested {} retained {} (no melt {}, diverged {}); split {}/{}/{}",
        s.requested,
        s.retained,
        s.no_melt,
        s.diverged.len(),
        ds.split.train.len(),
        ds.split.val.len(),
        ds.split.test.len()
    );

    for kind in [ModelKind::Fno, ModelKind::Dnn] {
        let mut cfg = TrainConfig::defaults(kind);
        cfg.epochs = epochs;
        let (_, report) = train_and_evaluate(&ds, &cfg)?;
        let h = &report.history;
        let e = report.scalar.as_ref().expect("scalar model");
        println!(
            "{kind}: {epochs} epochs in {:.1} s, final train {:.2e} val {:.2e}",
            h.seconds,
            h.train_loss.last().unwrap(),
            h.val_loss.last().unwrap()
        );
        println!("  bead volume      RMSE {:.5} mm^3  R2 {:.4}", e.rmse[0], e.r2[0]);
        println!("  peak temperature RMSE {:.2} K     R2 {:.4}", e.rmse[1], e.r2[1]);
    }
    Ok(())
}
