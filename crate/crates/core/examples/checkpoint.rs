//! Trains a quick DNN, saves it as a JSON checkpoint, reloads it and checks
//! that predictions are bit-identical. Also shows the provenance hash that
//! ties the checkpoint to its dataset.

use meltpool_rom::pipeline::{generate_dataset, train, TrainConfig};
use meltpool_rom::thermal::{ProcessParameters, ThermalConfig};
use meltpool_rom::{ModelKind, Surrogate};

fn main() -> meltpool_rom::Result<()> {
    let ds = generate_dataset(60, 3, &ThermalConfig::reference())?;
    let mut cfg = TrainConfig::defaults(ModelKind::Dnn);
    cfg.epochs = 20;
    let (model, _) = train(&ds, &cfg)?;

    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("dnn.json");
    model.save(&path)?;
    let size = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    let back = Surrogate::load(&path)?;
    println!("saved {} checkpoint ({size} bytes), dataset hash {}", back.kind, back.dataset_hash);

    let params = [ProcessParameters::nominal(), ProcessParameters { power: 380.0, speed: 0.006, ..ProcessParameters::nominal() }];
    let a = model.predict_scalar(&params)?;
    let b = back.predict_scalar(&params)?;
    for (p, (x, y)) in params.iter().zip(a.iter().zip(&b)) {
        let same = x.iter().zip(y).all(|(u, v)| u.to_bits() == v.to_bits());
        println!(
            "P {:5.1} W v {:.4} mm/ms: volume {:.5} mm^3, peak {:.1} K, reload identical: {same}",
            p.power, p.speed, y[0], y[1]
        );
    }
    Ok(())
}
