//! Trains the FNO on full time histories (volume and peak temperature at
//! every recorded step) and prints one test prediction next to the
//! simulation, plus the same prediction evaluated on a twice-finer grid.
//!
//! Usage: series_surrogate [samples] [epochs]

use meltpool_rom::pipeline::{generate_dataset, train_series, TrainConfig};
use meltpool_rom::thermal::ThermalConfig;
use meltpool_rom::ModelKind;

fn main() -> meltpool_rom::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let samples = args.next().unwrap_or(120);
    let epochs = args.next().unwrap_or(40);

    let ds = generate_dataset(samples, 11, &ThermalConfig::reference())?;
    let mut cfg = TrainConfig::defaults(ModelKind::FnoSeries);
    cfg.epochs = epochs;
    let (model, report) = train_series(&ds, &cfg)?;
    let e = report.series.as_ref().expect("series model");
    println!(
        "{} test histories, median relative L2: volume {:.4}, temperature {:.4} ({:.1} s training)",
        e.samples.len(),
        e.median_rel_l2[0],
        e.median_rel_l2[1],
        report.history.seconds
    );

    let row = ds.split.test[0];
    let params = [ds.params(row)];
    let pred = &model.predict_series(&params)?[0];
    let fine = &model.predict_series_on_grid(&params, 512)?[0];
    println!("{:>5} {:>10} {:>10} {:>10} {:>9} {:>9} {:>9}", "step", "vol sim", "vol fno", "vol 512", "T sim", "T fno", "T 512");
    for s in (0..ds.series_len()).step_by(20) {
        println!(
            "{s:5} {:10.5} {:10.5} {:10.5} {:9.1} {:9.1} {:9.1}",
            ds.series_volume[row][s], pred[0][s], fine[0][s], ds.series_temp[row][s], pred[1][s], fine[1][s]
        );
    }
    Ok(())
}
