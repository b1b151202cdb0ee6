//! Real FFT of a two-tone signal, its dominant bins, and the inverse round trip.

use meltpool_rom::numerics::{irfft, RealFftPlan};
use std::f64::consts::PI;

fn main() -> meltpool_rom::Result<()> {
    let n = 64;
    let x: Vec<f64> = (0..n)
        .map(|j| {
            let t = j as f64 / n as f64;
            (2.0 * PI * 3.0 * t).sin() + 0.25 * (2.0 * PI * 11.0 * t).cos()
        })
        .collect();

    let plan = RealFftPlan::new(n)?;
    let spectrum = plan.forward(&x)?;
    println!("{} samples -> {} bins", n, plan.spectrum_len());
    for (k, z) in spectrum.iter().enumerate() {
        // forward is unnormalized: a unit sine shows up with |X_k| = n/2
        if z.norm() > 1e-9 {
            println!("  bin {k:2}: |X| = {:8.4}  amplitude {:.4}", z.norm(), 2.0 * z.norm() / n as f64);
        }
    }

    let back = irfft(&spectrum, n)?;
    let err = back.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("round trip max error {err:.2e}");
    Ok(())
}
