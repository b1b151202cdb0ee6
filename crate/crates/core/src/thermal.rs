//! Explicit finite-difference heat conduction with a moving Gaussian laser.
//!
//! The domain is a 2-D vertical section (x along the scan, y upward) of
//! `nx x ny` square cells with an out-of-plane thickness `depth`. Material
//! properties are constant, so the solver is linear in the source strength.
//! The field is stored as the rise above ambient, which keeps the scaling
//! with laser power exact to rounding.
//!
//! Units: mm, ms, W, J, kg, K.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five controlled laser process variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessParameters {
    /// Laser power P (W).
    pub power: f64,
    /// Scanning speed v (mm/ms).
    pub speed: f64,
    /// Effective beam radius r (mm).
    pub radius: f64,
    /// Laser efficiency coefficient eta.
    pub efficiency: f64,
    /// Equipment scaling factor alpha.
    pub scaling: f64,
}

/// Names in the canonical column order `[P, v, r, eta, alpha]`.
pub const PARAMETER_NAMES: [&str; 5] = ["power", "speed", "radius", "efficiency", "scaling"];

pub const PARAMETER_UNITS: [&str; 5] = ["W", "mm/ms", "mm", "-", "-"];

/// Lower/upper sampling bounds in canonical column order.
pub const PARAMETER_BOUNDS: [(f64, f64); 5] = [
    (250.0, 400.0),
    (0.004, 0.020),
    (0.25, 0.40),
    (0.3, 0.4),
    (1.0, 2.0),
];

impl ProcessParameters {
    pub fn nominal() -> Self {
        ProcessParameters {
            power: 300.0,
            speed: 0.01058,
            radius: 0.3,
            efficiency: 0.36,
            scaling: 1.6,
        }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.power, self.speed, self.radius, self.efficiency, self.scaling]
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        ProcessParameters {
            power: v[0],
            speed: v[1],
            radius: v[2],
            efficiency: v[3],
            scaling: v[4],
        }
    }

    /// Names of the parameters that fall outside their sampling bounds.
    pub fn out_of_bounds(&self) -> Vec<&'static str> {
        self.to_array()
            .iter()
            .zip(PARAMETER_BOUNDS)
            .zip(PARAMETER_NAMES)
            .filter(|((v, (lo, hi)), _)| **v < *lo || **v > *hi)
            .map(|(_, name)| name)
            .collect()
    }

    /// Peak volumetric power density `2 alpha eta P / (pi r^3)` (W/mm^3).
    pub fn peak_intensity(&self) -> f64 {
        2.0 * self.scaling * self.efficiency * self.power / (PI * self.radius.powi(3))
    }

    fn validate(&self) -> Result<()> {
        if self.to_array().iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config(format!(
                "process parameters must be positive and finite: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Constant thermal properties and the melting threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialProperties {
    /// Density (kg/mm^3).
    pub rho: f64,
    /// Specific heat (J/(kg K)).
    pub c: f64,
    /// Thermal conductivity (W/(mm K)).
    pub k: f64,
    /// Convection coefficient (W/(mm^2 K)).
    pub h: f64,
    /// Ambient and fixed-bottom temperature (K).
    pub t_ambient: f64,
    /// Melting threshold (K).
    pub t_melt: f64,
}

impl MaterialProperties {
    /// Full check, including `t_melt > t_ambient`.
    pub fn validate(&self) -> Result<()> {
        self.validate_transport()?;
        if !(self.t_melt > self.t_ambient) {
            return Err(Error::Config(format!(
                "melting point {} K must exceed ambient {} K",
                self.t_melt, self.t_ambient
            )));
        }
        Ok(())
    }

    /// Checks only what the solver needs; the melt threshold may be anything.
    pub fn validate_transport(&self) -> Result<()> {
        let ok = self.rho > 0.0
            && self.c > 0.0
            && self.k > 0.0
            && self.h >= 0.0
            && self.t_ambient.is_finite();
        if !ok {
            return Err(Error::Config(format!("invalid material properties: {self:?}")));
        }
        Ok(())
    }

    /// Volumetric heat capacity `rho c` (J/(mm^3 K)).
    pub fn heat_capacity(&self) -> f64 {
        self.rho * self.c
    }

    /// Thermal diffusivity in mm^2/ms.
    pub fn diffusivity(&self) -> f64 {
        self.k / self.heat_capacity() * 1e-3
    }
}

/// Largest stable explicit time step (ms) for the five-point stencil, `dx^2 / (4 D)`.
pub fn cfl_max_dt(props: &MaterialProperties, dx: f64) -> f64 {
    dx * dx / (4.0 * props.diffusivity())
}

/// Grid and time-stepping layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimGrid {
    pub nx: usize,
    pub ny: usize,
    /// Cell size (mm).
    pub dx: f64,
    /// Time step (ms).
    pub dt: f64,
    /// Number of recorded steps (length of the output series).
    pub n_steps: usize,
    /// Solver steps of size `dt` per recorded step.
    #[serde(default = "one")]
    pub substeps: usize,
    /// Out-of-plane thickness (mm).
    pub depth: f64,
    /// Height of the scan line above the bottom edge (mm).
    pub scan_line: f64,
    /// Laser x position at t = 0 (mm).
    pub scan_start: f64,
}

impl SimGrid {
    /// Checks sizes and rejects time steps above [`cfl_max_dt`].
    pub fn validate(&self, props: &MaterialProperties) -> Result<()> {
        if self.nx < 8 || self.ny < 8 {
            return Err(Error::Config(format!(
                "grid needs at least 8x8 cells, got {}x{}",
                self.nx, self.ny
            )));
        }
        if self.n_steps < 1 || self.substeps < 1 || !(self.dx > 0.0) || !(self.dt > 0.0) || !(self.depth > 0.0) {
            return Err(Error::Config(format!("invalid grid: {self:?}")));
        }
        let limit = cfl_max_dt(props, self.dx);
        if self.dt > limit {
            return Err(Error::Config(format!(
                "dt = {} ms exceeds the explicit stability limit {limit} ms",
                self.dt
            )));
        }
        Ok(())
    }

    /// Time between recorded steps (ms).
    pub fn record_interval(&self) -> f64 {
        self.dt * self.substeps as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dx * self.depth
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [(i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dx]
    }

    pub fn scan_position(&self, params: &ProcessParameters, t: f64) -> [f64; 2] {
        [self.scan_start + params.speed * t, self.scan_line]
    }
}

fn one() -> usize {
    1
}

/// Contents of a thermal configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub material: MaterialProperties,
    pub grid: SimGrid,
}

const REFERENCE_CONFIG: &str = include_str!("../config/reference.toml");

impl ThermalConfig {
    /// The shipped reference property set and grid.
    pub fn reference() -> Self {
        Self::from_toml_str(REFERENCE_CONFIG).expect("bundled reference config is valid")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ThermalConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        self.grid.validate(&self.material)
    }
}

/// Volumetric laser power density (W/mm^3) at `pos` and time `t`.
pub fn source_at(pos: [f64; 2], t: f64, params: &ProcessParameters, grid: &SimGrid) -> f64 {
    let p = grid.scan_position(params, t);
    let d2 = (pos[0] - p[0]).powi(2) + (pos[1] - p[1]).powi(2);
    params.peak_intensity() * (-2.0 * d2 / (params.radius * params.radius)).exp()
}

/// Treatment of the bottom edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BottomBoundary {
    /// Bottom row clamped at ambient temperature.
    #[default]
    Fixed,
    /// Bottom edge treated like the others (convective, adiabatic when `h = 0`).
    Convective,
}

/// Temperature field on the grid, stored as rise above ambient.
/// Index `j * nx + i`, with row `j = 0` at the bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureField {
    nx: usize,
    ny: usize,
    t_ambient: f64,
    rise: Vec<f64>,
}

impl TemperatureField {
    pub fn ambient(nx: usize, ny: usize, t_ambient: f64) -> Self {
        TemperatureField {
            nx,
            ny,
            t_ambient,
            rise: vec![0.0; nx * ny],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn temperature(&self, i: usize, j: usize) -> f64 {
        self.t_ambient + self.rise[j * self.nx + i]
    }

    pub fn set_temperature(&mut self, i: usize, j: usize, t: f64) {
        self.rise[j * self.nx + i] = t - self.t_ambient;
    }

    pub fn rise(&self) -> &[f64] {
        &self.rise
    }

    pub fn temperatures(&self) -> Vec<f64> {
        self.rise.iter().map(|r| self.t_ambient + r).collect()
    }

    pub fn max_rise(&self) -> f64 {
        // NaN-propagating maximum so divergence cannot hide.
        self.rise
            .iter()
            .fold(f64::NEG_INFINITY, |m, &r| if r.is_nan() || m.is_nan() { f64::NAN } else { m.max(r) })
    }

    pub fn max_temperature(&self) -> f64 {
        self.t_ambient + self.max_rise()
    }

    /// Sum of `rho c T dV` over the grid (J), with T in absolute units.
    pub fn enthalpy(&self, props: &MaterialProperties, grid: &SimGrid) -> f64 {
        let sum: f64 = self.rise.iter().map(|r| self.t_ambient + r).sum();
        sum * props.heat_capacity() * grid.cell_volume()
    }
}

/// Precomputed coefficients of the explicit update.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: SimGrid,
    bottom: BottomBoundary,
    /// `D dt / dx^2`.
    diff: f64,
    /// `dt / (rho c)` converted to seconds.
    heat: f64,
    /// Retained fraction per convective face, `h dx / k` removed.
    conv: f64,
    /// Cell-center coordinates along x and y.
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Scratch row for the source evaluation.
    source_x: Vec<f64>,
}

impl Stepper {
    pub fn new(props: &MaterialProperties, grid: &SimGrid, bottom: BottomBoundary) -> Result<Self> {
        props.validate_transport()?;
        grid.validate(props)?;
        Ok(Self::new_unchecked(props, grid, bottom))
    }

    /// Skips the stability guard; only for probing the scheme itself.
    pub fn new_unchecked(props: &MaterialProperties, grid: &SimGrid, bottom: BottomBoundary) -> Self {
        Stepper {
            grid: *grid,
            bottom,
            diff: props.diffusivity() * grid.dt / (grid.dx * grid.dx),
            heat: grid.dt * 1e-3 / props.heat_capacity(),
            conv: props.h * grid.dx / props.k,
            xs: (0..grid.nx).map(|i| (i as f64 + 0.5) * grid.dx).collect(),
            ys: (0..grid.ny).map(|j| (j as f64 + 0.5) * grid.dx).collect(),
            source_x: vec![0.0; grid.nx],
        }
    }

    /// Advances `field` from time `t` by one step, writing into `next`.
    pub fn step_into(
        &mut self,
        field: &TemperatureField,
        next: &mut TemperatureField,
        t: f64,
        params: Option<&ProcessParameters>,
    ) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        debug_assert_eq!(field.dims(), (nx, ny));
        let c = self.diff;
        let cb = c * self.conv;
        let src = &field.rise;
        let dst = &mut next.rise;

        // Separable Gaussian: exp(-2 d^2 / r^2) = gx(i) * gy(j).
        let (peak, py, inv_r2) = match params {
            Some(p) => {
                let pos = self.grid.scan_position(p, t);
                for (g, &x) in self.source_x.iter_mut().zip(&self.xs) {
                    *g = (-2.0 * (x - pos[0]).powi(2) / (p.radius * p.radius)).exp();
                }
                (p.peak_intensity() * self.heat, pos[1], 1.0 / (p.radius * p.radius))
            }
            None => (0.0, 0.0, 0.0),
        };

        let fixed_bottom = self.bottom == BottomBoundary::Fixed;
        for j in 0..ny {
            let row = j * nx;
            if j == 0 && fixed_bottom {
                dst[row..row + nx].iter_mut().for_each(|v| *v = 0.0);
                continue;
            }
            let gy = if peak != 0.0 {
                peak * (-2.0 * (self.ys[j] - py).powi(2) * inv_r2).exp()
            } else {
                0.0
            };
            for i in 0..nx {
                let k = row + i;
                let mut keep = 1.0;
                let mut inflow = 0.0;
                if i > 0 {
                    keep -= c;
                    inflow += src[k - 1];
                } else {
                    keep -= cb;
                }
                if i + 1 < nx {
                    keep -= c;
                    inflow += src[k + 1];
                } else {
                    keep -= cb;
                }
                if j > 0 {
                    keep -= c;
                    inflow += src[k - nx];
                } else {
                    keep -= cb;
                }
                if j + 1 < ny {
                    keep -= c;
                    inflow += src[k + nx];
                } else {
                    keep -= cb;
                }
                let q = if peak != 0.0 { gy * self.source_x[i] } else { 0.0 };
                dst[k] = src[k] * keep + c * inflow + q;
            }
        }
    }
}

/// One explicit Euler step of the heat equation from time `t`.
pub fn step(
    field: &TemperatureField,
    t: f64,
    params: &ProcessParameters,
    props: &MaterialProperties,
    grid: &SimGrid,
) -> Result<TemperatureField> {
    let mut stepper = Stepper::new(props, grid, BottomBoundary::Fixed)?;
    let mut next = field.clone();
    stepper.step_into(field, &mut next, t, Some(params));
    if !next.max_rise().is_finite() {
        return Err(Error::SimulationDiverged {
            step: 0,
            sample: None,
        });
    }
    Ok(next)
}

/// Marks cells at or above `t_melt` in `mask` and returns the ever-melted volume.
pub fn bead_volume_update(
    mask: &mut [bool],
    field: &TemperatureField,
    t_melt: f64,
    cell_volume: f64,
) -> f64 {
    assert_eq!(mask.len(), field.rise.len(), "mask shape must match the field");
    let threshold = t_melt - field.t_ambient;
    let mut count = 0usize;
    for (m, &r) in mask.iter_mut().zip(&field.rise) {
        if r >= threshold {
            *m = true;
        }
        count += *m as usize;
    }
    count as f64 * cell_volume
}

/// Time histories and scalar quantities of interest from one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub params: ProcessParameters,
    /// Maximum temperature after each step (K).
    pub series_temp: Vec<f64>,
    /// Cumulative ever-melted volume after each step (mm^3).
    pub series_volume: Vec<f64>,
    pub max_temp: f64,
    pub bead_volume: f64,
    pub melted: bool,
}

/// Runs `n_steps * substeps` explicit steps from a uniform ambient field,
/// recording after every `substeps` of them.
pub fn run(
    params: &ProcessParameters,
    props: &MaterialProperties,
    grid: &SimGrid,
) -> Result<SimulationRecord> {
    params.validate()?;
    let mut stepper = Stepper::new(props, grid, BottomBoundary::Fixed)?;
    let mut field = TemperatureField::ambient(grid.nx, grid.ny, props.t_ambient);
    let mut next = field.clone();
    let mut mask = vec![false; grid.nx * grid.ny];
    let mut series_temp = Vec::with_capacity(grid.n_steps);
    let mut series_volume = Vec::with_capacity(grid.n_steps);

    for n in 0..grid.n_steps {
        for s in 0..grid.substeps {
            let t = (n * grid.substeps + s) as f64 * grid.dt;
            stepper.step_into(&field, &mut next, t, Some(params));
            std::mem::swap(&mut field, &mut next);
        }
        let peak = field.max_rise();
        if !peak.is_finite() {
            return Err(Error::SimulationDiverged {
                step: n,
                sample: None,
            });
        }
        series_temp.push(props.t_ambient + peak);
        series_volume.push(bead_volume_update(&mut mask, &field, props.t_melt, grid.cell_volume()));
    }

    let max_temp = series_temp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bead_volume = *series_volume.last().expect("n_steps >= 1");
    Ok(SimulationRecord {
        params: *params,
        series_temp,
        series_volume,
        max_temp,
        bead_volume,
        melted: max_temp >= props.t_melt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid(props: &MaterialProperties) -> SimGrid {
        let dx = 0.05;
        SimGrid {
            nx: 48,
            ny: 20,
            dx,
            dt: 0.9 * cfl_max_dt(props, dx),
            n_steps: 60,
            substeps: 1,
            depth: 0.1,
            scan_line: 0.7,
            scan_start: 0.5,
        }
    }

    fn props() -> MaterialProperties {
        ThermalConfig::reference().material
    }

    #[test]
    fn source_peak_and_decay() {
        let p = ProcessParameters::nominal();
        let grid = small_grid(&props());
        let center = grid.scan_position(&p, 3.0);
        let peak = source_at(center, 3.0, &p, &grid);
        let hand = 2.0 * 1.6 * 0.36 * 300.0 / (PI * 0.027);
        assert!((peak - 4074.37).abs() < 1e-2);
        assert!((peak - hand).abs() < 1e-9);
        let at_r = source_at([center[0] + 0.3, center[1]], 3.0, &p, &grid);
        assert!((at_r / peak - 0.135335).abs() < 1e-6);
        let far = source_at([center[0], center[1] + 3.0], 3.0, &p, &grid);
        assert!(far < 1e-80 * peak);
    }

    #[test]
    fn cfl_limit_formula() {
        // k / (rho c) = 10 mm^2/s = 0.01 mm^2/ms
        let m = MaterialProperties {
            rho: 1.0,
            c: 1.0,
            k: 10.0,
            h: 0.0,
            t_ambient: 300.0,
            t_melt: 1000.0,
        };
        assert!((cfl_max_dt(&m, 0.1) - 0.25).abs() < 1e-12);
        assert!((cfl_max_dt(&m, 0.2) / cfl_max_dt(&m, 0.1) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn grid_rejects_unstable_dt() {
        let m = props();
        let mut g = small_grid(&m);
        g.dt = 1.0001 * cfl_max_dt(&m, g.dx);
        assert!(g.validate(&m).is_err());
        g.dt = cfl_max_dt(&m, g.dx);
        assert!(g.validate(&m).is_ok());
        g.nx = 7;
        assert!(g.validate(&m).is_err());
    }

    #[test]
    fn equilibrium_is_exact() {
        let m = props();
        let g = small_grid(&m);
        let mut st = Stepper::new(&m, &g, BottomBoundary::Fixed).unwrap();
        let f = TemperatureField::ambient(g.nx, g.ny, m.t_ambient);
        let mut next = f.clone();
        for _ in 0..10 {
            st.step_into(&f.clone(), &mut next, 0.0, None);
        }
        assert_eq!(next, f);
    }

    #[test]
    fn doubling_power_doubles_the_rise() {
        let m = props();
        let g = small_grid(&m);
        let p1 = ProcessParameters::nominal();
        let p2 = ProcessParameters {
            power: 2.0 * p1.power,
            ..p1
        };
        let mut f1 = TemperatureField::ambient(g.nx, g.ny, m.t_ambient);
        let mut f2 = f1.clone();
        for n in 0..40 {
            let t = n as f64 * g.dt;
            f1 = step(&f1, t, &p1, &m, &g).unwrap();
            f2 = step(&f2, t, &p2, &m, &g).unwrap();
        }
        for (a, b) in f1.rise().iter().zip(f2.rise()) {
            assert!((b - 2.0 * a).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn insulated_hot_spot_conserves_enthalpy() {
        let m = MaterialProperties { h: 0.0, ..props() };
        let g = small_grid(&m);
        let mut st = Stepper::new(&m, &g, BottomBoundary::Convective).unwrap();
        let mut f = TemperatureField::ambient(g.nx, g.ny, m.t_ambient);
        f.set_temperature(20, 10, 2500.0);
        f.set_temperature(21, 10, 1800.0);
        let e0 = f.enthalpy(&m, &g);
        let mut next = f.clone();
        for _ in 0..1000 {
            st.step_into(&f, &mut next, 0.0, None);
            std::mem::swap(&mut f, &mut next);
        }
        let e1 = f.enthalpy(&m, &g);
        assert!(((e1 - e0) / e0).abs() < 1e-9);
    }

    fn hot_spot_growth(factor: f64) -> f64 {
        let m = props();
        let mut g = small_grid(&m);
        g.nx = 16;
        g.ny = 16;
        g.dt = factor * cfl_max_dt(&m, g.dx);
        let mut st = Stepper::new_unchecked(&m, &g, BottomBoundary::Fixed);
        let mut f = TemperatureField::ambient(g.nx, g.ny, m.t_ambient);
        f.set_temperature(8, 8, m.t_ambient + 100.0);
        let before = f.max_rise();
        let mut next = f.clone();
        for _ in 0..500 {
            st.step_into(&f, &mut next, 0.0, None);
            std::mem::swap(&mut f, &mut next);
        }
        let after = f.rise().iter().fold(0.0f64, |a, r| a.max(r.abs()));
        after / before
    }

    #[test]
    fn stability_limit_is_sharp() {
        assert!(hot_spot_growth(1.1) > 1.0);
        assert!(hot_spot_growth(0.99) < 1.0);
        let m = props();
        let mut g = small_grid(&m);
        g.dt = 1.01 * cfl_max_dt(&m, g.dx);
        assert!(Stepper::new(&m, &g, BottomBoundary::Fixed).is_err());
    }

    #[test]
    fn bead_volume_edges() {
        let f = TemperatureField::ambient(8, 8, 300.0);
        let mut mask = vec![false; 64];
        assert_eq!(bead_volume_update(&mut mask, &f, 1000.0, 0.5), 0.0);
        assert_eq!(bead_volume_update(&mut mask, &f, 300.0, 0.5), 32.0);
        // cells stay marked after cooling
        assert_eq!(bead_volume_update(&mut mask, &f, 1000.0, 0.5), 32.0);
    }

    #[test]
    fn unreachable_melt_point() {
        let m = MaterialProperties {
            t_melt: f64::INFINITY,
            ..props()
        };
        let g = small_grid(&m);
        let r = run(&ProcessParameters::nominal(), &m, &g).unwrap();
        assert!(!r.melted);
        assert_eq!(r.bead_volume, 0.0);
    }

    #[test]
    fn record_invariants() {
        let m = props();
        let g = small_grid(&m);
        let r = run(&ProcessParameters::nominal(), &m, &g).unwrap();
        assert_eq!(r.series_temp.len(), g.n_steps);
        assert!(r.series_volume.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(r.max_temp, r.series_temp.iter().copied().fold(f64::MIN, f64::max));
        assert_eq!(r.bead_volume, *r.series_volume.last().unwrap());
        assert_eq!(r.melted, r.max_temp >= m.t_melt);
        assert!(r.series_temp.iter().all(|&t| t >= m.t_ambient));
    }

    #[test]
    fn config_round_trip_and_unknown_keys() {
        let cfg = ThermalConfig::reference();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ThermalConfig::from_toml_str(&text).unwrap(), cfg);
        let bad = format!("{text}\n[extra]\nx = 1\n");
        assert!(ThermalConfig::from_toml_str(&bad).is_err());
    }
}
