//! An untrained Fourier neural operator evaluated on several grid sizes.
//! The spectral weights only touch the lowest modes, so the same parameters
//! apply at any resolution that holds those modes.

use meltpool_rom::fno::{encode_input, fno_forward, readout_scalar, resample_grid, FnoConfig, FnoModel};
use meltpool_rom::numerics::Parameters;

fn main() -> meltpool_rom::Result<()> {
    let cfg = FnoConfig::scalar();
    let model = FnoModel::new(cfg, 42)?;
    let count: usize = model.params.tensors().iter().map(|t| t.len()).sum();
    println!(
        "{} Fourier layers, {} modes, width {}, grid {}: {count} parameters",
        cfg.n_layers, cfg.n_modes, cfg.width, cfg.grid_n
    );

    let inputs = [[0.0; 5], [1.0, -0.5, 0.2, 0.0, 1.2]];
    let out = fno_forward(&model, &encode_input(&inputs, cfg.grid_n))?;
    let scalar = readout_scalar(&out)?;
    println!("grid-mean readout at n = {}: {:?}", cfg.grid_n, scalar.data());

    for n in [64, 128, 512, 1024] {
        let fine = resample_grid(&model, &inputs, n)?;
        println!("grid-mean readout at n = {n:4}: {:?}", readout_scalar(&fine)?.data());
    }
    match resample_grid(&model, &inputs, 8) {
        Err(e) => println!("n = 8 rejected: {e}"),
        Ok(_) => println!("n = 8 unexpectedly accepted"),
    }
    Ok(())
}
