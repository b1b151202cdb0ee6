//! Compares hand-written backpropagation with central differences for a
//! narrow FNO and a small fully connected network.

use meltpool_rom::fno::{encode_input, fno_backward, fno_forward, FieldBatch, FnoConfig, FnoModel};
use meltpool_rom::mlp::{mlp_backward, mlp_forward, MlpConfig, MlpModel};
use meltpool_rom::numerics::{grad_check, Parameters, RealArray};

fn main() -> meltpool_rom::Result<()> {
    // loss = 0.5 * sum(y^2), so dL/dy = y
    let cfg = FnoConfig { width: 4, grid_n: 16, n_modes: 3, n_layers: 2, ..FnoConfig::scalar() };
    let fno = FnoModel::new(cfg, 1)?;
    let input = encode_input(&[[0.3, -1.0, 0.5, 0.1, 0.9]], cfg.grid_n);
    let out = fno_forward(&fno, &input)?;
    let analytic = fno_backward(&fno, &input, &out)?.to_flat();
    let report = grad_check(
        |p| {
            let mut m = fno.clone();
            m.params.load_flat(p);
            let y: FieldBatch = fno_forward(&m, &input).unwrap();
            0.5 * y.values.data().iter().map(|v| v * v).sum::<f64>()
        },
        &analytic,
        &fno.params.to_flat(),
        1e-5,
    );
    println!("FNO: {} coordinates, max relative error {:.2e}", report.checked, report.max_rel_error);

    let mlp = MlpModel::new(MlpConfig::new(5, &[16, 16], 2), 2)?;
    let x = RealArray::from_fn(&[3, 5], |i| (i as f64 * 0.37).sin());
    let y = mlp_forward(&mlp, &x)?;
    let analytic = mlp_backward(&mlp, &x, &y)?.to_flat();
    let report = grad_check(
        |p| {
            let mut m = mlp.clone();
            m.params.load_flat(p);
            0.5 * mlp_forward(&m, &x).unwrap().data().iter().map(|v| v * v).sum::<f64>()
        },
        &analytic,
        &mlp.params.to_flat(),
        1e-5,
    );
    println!("MLP: {} coordinates, max relative error {:.2e}", report.checked, report.max_rel_error);
    Ok(())
}
