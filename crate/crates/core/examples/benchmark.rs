//! The full comparison: 500 simulations, FNO versus DNN for 512 epochs each,
//! report files written to a directory. Takes on the order of ten minutes on
//! one core; pass smaller numbers for a quick look.
//!
//! Usage: benchmark [samples] [epochs] [out-dir]

use meltpool_rom::pipeline::benchmark::summary_table;
use meltpool_rom::pipeline::{benchmark, generate_dataset, write_benchmark, TrainConfig};
use meltpool_rom::thermal::ThermalConfig;
use meltpool_rom::ModelKind;

fn main() -> meltpool_rom::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let samples = args.first().map_or(500, |a| a.parse().expect("sample count"));
    let epochs = args.get(1).map_or(512, |a| a.parse().expect("epoch count"));
    let out = args.get(2).map_or("benchmark", String::as_str);

    let ds = generate_dataset(samples, 7, &ThermalConfig::reference())?;
    println!("{} of {samples} samples melted", ds.len());
    let mut fno = TrainConfig::defaults(ModelKind::Fno);
    let mut dnn = TrainConfig::defaults(ModelKind::Dnn);
    fno.epochs = epochs;
    dnn.epochs = epochs;
    let report = benchmark(&ds, &fno, &dnn)?;
    print!("{}", summary_table(&report));
    for p in write_benchmark(&report, std::path::Path::new(out))? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
