//! One transient simulation at the nominal process parameters on the
//! reference grid, with the recorded melt-pool histories.

use meltpool_rom::thermal::{self, cfl_max_dt, ProcessParameters, ThermalConfig};

fn main() -> meltpool_rom::Result<()> {
    let cfg = ThermalConfig::reference();
    let (props, grid) = (cfg.material, cfg.grid);
    println!(
        "grid {}x{} cells of {} mm, dt {} ms (limit {:.4} ms), {} records every {} ms",
        grid.nx,
        grid.ny,
        grid.dx,
        grid.dt,
        cfl_max_dt(&props, grid.dx),
        grid.n_steps,
        grid.record_interval()
    );

    let params = ProcessParameters::nominal();
    let t = std::time::Instant::now();
    let rec = thermal::run(&params, &props, &grid)?;
    println!("simulated in {:.1} ms, melted: {}", t.elapsed().as_secs_f64() * 1e3, rec.melted);
    println!("{:>8} {:>12} {:>14}", "t (ms)", "T_max (K)", "volume (mm^3)");
    for s in (0..grid.n_steps).step_by(grid.n_steps / 10).chain([grid.n_steps - 1]) {
        let time = (s + 1) as f64 * grid.record_interval();
        println!("{time:8.1} {:12.1} {:14.6}", rec.series_temp[s], rec.series_volume[s]);
    }
    println!("bead volume {:.6} mm^3, peak temperature {:.1} K", rec.bead_volume, rec.max_temp);

    let hotter = ProcessParameters { power: 400.0, ..params };
    let rec2 = thermal::run(&hotter, &props, &grid)?;
    println!("at 400 W: bead volume {:.6} mm^3, peak {:.1} K", rec2.bead_volume, rec2.max_temp);
    Ok(())
}
