//! One-dimensional Fourier neural operator.
//!
//! Pipeline per sample: a pointwise lift from the input channels to `width`
//! hidden channels, `n_layers` Fourier layers
//! `q <- gelu(W q + b + irfft(R . rfft(q)))` with only the lowest `n_modes`
//! frequencies kept, then a pointwise projection (affine, GeLU, affine).
//!
//! Activations are channel-major, `[channel][grid point]`. Pointwise weights
//! are stored `in x out` like [`crate::numerics::affine`], so the per-point map
//! is `y = W^T q + b`. Gradients are derived by hand; the spectral adjoint is
//! the same truncated convolution with `conj(R)^T`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::activation::{gelu_scalar, normal_cdf, normal_pdf};
use crate::numerics::linalg::{gemm, MatRef};
use crate::numerics::{ComplexArray, Parameters, RealArray, RealFftPlan};

/// Number of process parameters broadcast as constant input channels.
pub const PARAM_CHANNELS: usize = 5;
/// Parameter channels plus the grid coordinate.
pub const INPUT_CHANNELS: usize = PARAM_CHANNELS + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FnoConfig {
    pub n_layers: usize,
    pub n_modes: usize,
    pub width: usize,
    pub grid_n: usize,
    pub in_channels: usize,
    pub out_channels: usize,
}

impl FnoConfig {
    /// Scalar-QoI operator: 4 layers, 5 modes.
    pub fn scalar() -> Self {
        FnoConfig {
            n_layers: 4,
            n_modes: 5,
            width: 32,
            grid_n: 256,
            in_channels: INPUT_CHANNELS,
            out_channels: 2,
        }
    }

    /// Time-series operator: as [`scalar`](Self::scalar) with 50 modes.
    pub fn series() -> Self {
        FnoConfig {
            n_modes: 50,
            ..Self::scalar()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            self.n_layers,
            self.n_modes,
            self.width,
            self.in_channels,
            self.out_channels,
        ];
        if counts.contains(&0) {
            return Err(Error::Config(format!("FNO sizes must be >= 1: {self:?}")));
        }
        check_grid(self.grid_n, self.n_modes)
    }
}

fn check_grid(grid_n: usize, n_modes: usize) -> Result<()> {
    if grid_n < 2 || !grid_n.is_power_of_two() {
        return Err(Error::InvalidSize(format!(
            "grid length must be a power of two >= 2, got {grid_n}"
        )));
    }
    if n_modes > grid_n / 2 + 1 {
        return Err(Error::InvalidSize(format!(
            "{n_modes} modes do not fit a grid of {grid_n} points (max {})",
            grid_n / 2 + 1
        )));
    }
    Ok(())
}

/// Trainable weights of an [`FnoModel`]; also used as the gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnoParams {
    /// `in_channels x width`.
    pub lift_w: RealArray,
    pub lift_b: RealArray,
    /// Per layer, `n_modes x width(out) x width(in)`.
    pub spectral: Vec<ComplexArray>,
    /// Per layer, `width x width`.
    pub pointwise_w: Vec<RealArray>,
    pub pointwise_b: Vec<RealArray>,
    pub proj_hidden_w: RealArray,
    pub proj_hidden_b: RealArray,
    /// `width x out_channels`.
    pub proj_out_w: RealArray,
    pub proj_out_b: RealArray,
}

impl FnoParams {
    pub fn zeros(cfg: &FnoConfig) -> Self {
        let w = cfg.width;
        FnoParams {
            lift_w: RealArray::zeros(&[cfg.in_channels, w]),
            lift_b: RealArray::zeros(&[w]),
            spectral: (0..cfg.n_layers)
                .map(|_| ComplexArray::zeros(&[cfg.n_modes, w, w]))
                .collect(),
            pointwise_w: (0..cfg.n_layers).map(|_| RealArray::zeros(&[w, w])).collect(),
            pointwise_b: (0..cfg.n_layers).map(|_| RealArray::zeros(&[w])).collect(),
            proj_hidden_w: RealArray::zeros(&[w, w]),
            proj_hidden_b: RealArray::zeros(&[w]),
            proj_out_w: RealArray::zeros(&[w, cfg.out_channels]),
            proj_out_b: RealArray::zeros(&[cfg.out_channels]),
        }
    }

    /// Checks every tensor against the shapes implied by `cfg`.
    pub fn check_shapes(&self, cfg: &FnoConfig) -> Result<()> {
        let reference = FnoParams::zeros(cfg);
        let ours = self.shapes();
        let want = reference.shapes();
        if ours != want {
            let i = ours.iter().zip(&want).position(|(a, b)| a != b).unwrap_or(0);
            return Err(Error::ShapeMismatch {
                expected: want.get(i).cloned().unwrap_or_default(),
                found: ours.get(i).cloned().unwrap_or_default(),
            });
        }
        Ok(())
    }

    fn shapes(&self) -> Vec<Vec<usize>> {
        let mut s = vec![self.lift_w.shape().to_vec(), self.lift_b.shape().to_vec()];
        for l in 0..self.spectral.len().max(self.pointwise_w.len()) {
            s.push(self.spectral.get(l).map(|a| a.shape().to_vec()).unwrap_or_default());
            s.push(self.pointwise_w.get(l).map(|a| a.shape().to_vec()).unwrap_or_default());
            s.push(self.pointwise_b.get(l).map(|a| a.shape().to_vec()).unwrap_or_default());
        }
        s.extend([
            self.proj_hidden_w.shape().to_vec(),
            self.proj_hidden_b.shape().to_vec(),
            self.proj_out_w.shape().to_vec(),
            self.proj_out_b.shape().to_vec(),
        ]);
        s
    }
}

impl Parameters for FnoParams {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = vec![self.lift_w.data(), self.lift_b.data()];
        for l in 0..self.spectral.len() {
            t.push(self.spectral[l].as_f64());
            t.push(self.pointwise_w[l].data());
            t.push(self.pointwise_b[l].data());
        }
        t.extend([
            self.proj_hidden_w.data(),
            self.proj_hidden_b.data(),
            self.proj_out_w.data(),
            self.proj_out_b.data(),
        ]);
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = vec![self.lift_w.data_mut(), self.lift_b.data_mut()];
        for ((r, w), b) in self
            .spectral
            .iter_mut()
            .zip(self.pointwise_w.iter_mut())
            .zip(self.pointwise_b.iter_mut())
        {
            t.push(r.as_f64_mut());
            t.push(w.data_mut());
            t.push(b.data_mut());
        }
        t.extend([
            self.proj_hidden_w.data_mut(),
            self.proj_hidden_b.data_mut(),
            self.proj_out_w.data_mut(),
            self.proj_out_b.data_mut(),
        ]);
        t
    }
}

/// Batch of functions sampled on a uniform grid over `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldBatch {
    /// `batch x channels x grid_n`.
    pub values: RealArray,
}

impl FieldBatch {
    pub fn new(values: RealArray) -> Result<Self> {
        if values.shape().len() != 3 {
            return Err(Error::InvalidSize(format!(
                "field batch must be batch x channels x grid, got {:?}",
                values.shape()
            )));
        }
        Ok(FieldBatch { values })
    }

    pub fn zeros(batch: usize, channels: usize, grid_n: usize) -> Self {
        FieldBatch {
            values: RealArray::zeros(&[batch, channels, grid_n]),
        }
    }

    pub fn batch(&self) -> usize {
        self.values.shape()[0]
    }

    pub fn channels(&self) -> usize {
        self.values.shape()[1]
    }

    pub fn grid_n(&self) -> usize {
        self.values.shape()[2]
    }

    pub fn sample(&self, b: usize) -> &[f64] {
        let len = self.channels() * self.grid_n();
        &self.values.data()[b * len..(b + 1) * len]
    }

    pub fn sample_mut(&mut self, b: usize) -> &mut [f64] {
        let len = self.channels() * self.grid_n();
        &mut self.values.data_mut()[b * len..(b + 1) * len]
    }

    pub fn channel(&self, b: usize, c: usize) -> &[f64] {
        let n = self.grid_n();
        &self.sample(b)[c * n..(c + 1) * n]
    }
}

/// `n` points from 0 to 1 inclusive.
pub fn coordinate_grid(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Broadcasts each normalized parameter vector over the grid and appends
/// the coordinate channel.
pub fn encode_input(params: &[[f64; PARAM_CHANNELS]], grid_n: usize) -> FieldBatch {
    let mut out = FieldBatch::zeros(params.len(), INPUT_CHANNELS, grid_n);
    let coords = coordinate_grid(grid_n);
    for (b, p) in params.iter().enumerate() {
        let sample = out.sample_mut(b);
        for (c, &v) in p.iter().enumerate() {
            sample[c * grid_n..(c + 1) * grid_n].fill(v);
        }
        sample[PARAM_CHANNELS * grid_n..].copy_from_slice(&coords);
    }
    out
}

/// Grid mean of each channel; `batch x channels`.
pub fn readout_scalar(output: &FieldBatch) -> Result<RealArray> {
    if output.channels() != 2 {
        return Err(Error::InvalidSize(format!(
            "scalar readout needs 2 output channels, got {}",
            output.channels()
        )));
    }
    let (b, c, n) = (output.batch(), output.channels(), output.grid_n());
    let data = output
        .values
        .data()
        .chunks_exact(n)
        .map(|ch| ch.iter().sum::<f64>() / n as f64)
        .collect();
    RealArray::from_vec(&[b, c], data)
}

/// Linear interpolation of a series sampled uniformly on `[0, 1]` onto `m` points.
pub fn interpolate_series(src: &[f64], m: usize) -> Vec<f64> {
    let n = src.len();
    if n == 0 {
        return vec![0.0; m];
    }
    if n == 1 || m == 1 {
        return vec![src[0]; m];
    }
    (0..m)
        .map(|j| {
            let x = j as f64 * (n - 1) as f64 / (m - 1) as f64;
            let i = (x.floor() as usize).min(n - 2);
            let f = x - i as f64;
            src[i] * (1.0 - f) + src[i + 1] * f
        })
        .collect()
}

/// Weight of coefficient `k` in a length-`n` real inverse transform.
fn hermitian_weight(k: usize, n: usize) -> f64 {
    if k == 0 || 2 * k == n {
        1.0
    } else {
        2.0
    }
}

/// Scratch state bound to one grid length.
#[derive(Debug, Clone)]
struct SpectralWork {
    plan: RealFftPlan,
    full: Vec<Complex64>,
    scratch: Vec<Complex64>,
    real_buf: Vec<f64>,
}

impl SpectralWork {
    fn new(n: usize) -> Result<Self> {
        let plan = RealFftPlan::new(n)?;
        Ok(SpectralWork {
            full: vec![Complex64::new(0.0, 0.0); plan.spectrum_len()],
            scratch: Vec::with_capacity(n / 2),
            real_buf: vec![0.0; n],
            plan,
        })
    }

    fn n(&self) -> usize {
        self.plan.len()
    }

    /// Truncated spectra of every channel of `q` into `spec` (`channels x modes`).
    fn analyze(&mut self, q: &[f64], channels: usize, modes: usize, spec: &mut Vec<Complex64>) {
        let n = self.n();
        spec.clear();
        for c in 0..channels {
            self.plan
                .forward_into(&q[c * n..(c + 1) * n], &mut self.full, &mut self.scratch)
                .expect("plan length matches");
            spec.extend_from_slice(&self.full[..modes]);
        }
    }

    /// Adds `scale * irfft` of each channel's truncated spectrum to `out`.
    fn synthesize_add(&mut self, spec: &[Complex64], channels: usize, modes: usize, out: &mut [f64]) {
        let n = self.n();
        for c in 0..channels {
            self.full.fill(Complex64::new(0.0, 0.0));
            self.full[..modes].copy_from_slice(&spec[c * modes..(c + 1) * modes]);
            self.plan
                .inverse_into(&self.full, &mut self.real_buf, &mut self.scratch)
                .expect("plan length matches");
            for (o, v) in out[c * n..(c + 1) * n].iter_mut().zip(&self.real_buf) {
                *o += v;
            }
        }
    }
}

/// `out[k][o] = sum_i r[k][o][i] x[i][k]`, with spectra stored `channels x modes`.
fn mix_modes(r: &[Complex64], x: &[Complex64], width: usize, modes: usize, out: &mut Vec<Complex64>) {
    out.clear();
    out.resize(width * modes, Complex64::new(0.0, 0.0));
    for k in 0..modes {
        let rk = &r[k * width * width..(k + 1) * width * width];
        for o in 0..width {
            let row = &rk[o * width..(o + 1) * width];
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..width {
                acc += row[i] * x[i * modes + k];
            }
            out[o * modes + k] = acc;
        }
    }
}

/// Truncated Fourier integral operator on one sample `q` (`channels x n`)
/// with weights `r` (`modes x channels x channels`).
pub fn spectral_conv(q: &RealArray, r: &ComplexArray) -> Result<RealArray> {
    let (channels, n) = q.dims2()?;
    let (modes, co, ci) = match r.shape() {
        &[m, a, b] => (m, a, b),
        s => {
            return Err(Error::InvalidSize(format!(
                "spectral weights must be modes x channels x channels, got {s:?}"
            )))
        }
    };
    if co != channels || ci != channels {
        return Err(Error::ShapeMismatch {
            expected: vec![modes, channels, channels],
            found: r.shape().to_vec(),
        });
    }
    check_grid(n, modes)?;
    let mut work = SpectralWork::new(n)?;
    let mut x = Vec::new();
    work.analyze(q.data(), channels, modes, &mut x);
    let mut y = Vec::new();
    mix_modes(r.data(), &x, channels, modes, &mut y);
    let mut out = RealArray::zeros(&[channels, n]);
    work.synthesize_add(&y, channels, modes, out.data_mut());
    Ok(out)
}

/// `gelu(W^T q + b + spectral_conv(q, r))` on one sample.
pub fn fourier_layer(q: &RealArray, r: &ComplexArray, w: &RealArray, b: &RealArray) -> Result<RealArray> {
    let (channels, n) = q.dims2()?;
    if w.shape() != [channels, channels] || b.shape() != [channels] {
        return Err(Error::ShapeMismatch {
            expected: vec![channels, channels],
            found: w.shape().to_vec(),
        });
    }
    let mut z = spectral_conv(q, r)?;
    pointwise_add(w.data(), b.data(), q.data(), channels, channels, n, z.data_mut());
    Ok(z.map(gelu_scalar))
}

/// `out += W^T x + b` with `x: fan_in x n`, `out: fan_out x n`.
fn pointwise_add(w: &[f64], b: &[f64], x: &[f64], fan_in: usize, fan_out: usize, n: usize, out: &mut [f64]) {
    for (o, row) in out.chunks_exact_mut(n).enumerate() {
        let bo = b[o];
        row.iter_mut().for_each(|v| *v += bo);
    }
    gemm(
        1.0,
        MatRef::row_major(w, fan_in, fan_out).t(),
        MatRef::row_major(x, fan_in, n),
        1.0,
        out,
    );
}

/// Reverse of [`pointwise_add`]: accumulates `dW`, `db` and writes `dx` if given.
#[allow(clippy::too_many_arguments)]
fn pointwise_backward(
    w: &[f64],
    x: &[f64],
    dy: &[f64],
    fan_in: usize,
    fan_out: usize,
    n: usize,
    dw: &mut [f64],
    db: &mut [f64],
    dx: Option<&mut [f64]>,
) {
    gemm(
        1.0,
        MatRef::row_major(x, fan_in, n),
        MatRef::row_major(dy, fan_out, n).t(),
        1.0,
        dw,
    );
    for (acc, row) in db.iter_mut().zip(dy.chunks_exact(n)) {
        *acc += row.iter().sum::<f64>();
    }
    if let Some(dx) = dx {
        gemm(
            1.0,
            MatRef::row_major(w, fan_in, fan_out),
            MatRef::row_major(dy, fan_out, n),
            0.0,
            dx,
        );
    }
}

/// GeLU in place, storing the derivative alongside.
fn gelu_with_grad(z: &[f64], act: &mut [f64], grad: &mut [f64]) {
    for ((&x, a), g) in z.iter().zip(act.iter_mut()).zip(grad.iter_mut()) {
        let cdf = normal_cdf(x);
        *a = x * cdf;
        *g = cdf + x * normal_pdf(x);
    }
}

/// Forward intermediates of one sample.
#[derive(Debug, Clone, Default)]
struct SampleCache {
    input: Vec<f64>,
    /// `q_0 ..= q_L`, each `width x n`.
    hidden: Vec<Vec<f64>>,
    /// GeLU derivative at each layer's pre-activation.
    hidden_grad: Vec<Vec<f64>>,
    /// Truncated spectrum of each layer input, `width x modes`.
    spectra: Vec<Vec<Complex64>>,
    proj_act: Vec<f64>,
    proj_grad: Vec<f64>,
    output: Vec<f64>,
}

/// Reusable buffers for forward and reverse passes at one grid length.
#[derive(Debug, Clone)]
pub struct FnoWorkspace {
    work: SpectralWork,
    cache: SampleCache,
    pre: Vec<f64>,
    grad_a: Vec<f64>,
    grad_b: Vec<f64>,
    mixed: Vec<Complex64>,
    dspec: Vec<Complex64>,
}

impl FnoWorkspace {
    pub fn new(grid_n: usize) -> Result<Self> {
        Ok(FnoWorkspace {
            work: SpectralWork::new(grid_n)?,
            cache: SampleCache::default(),
            pre: Vec::new(),
            grad_a: Vec::new(),
            grad_b: Vec::new(),
            mixed: Vec::new(),
            dspec: Vec::new(),
        })
    }

    pub fn grid_n(&self) -> usize {
        self.work.n()
    }
}

/// Configuration plus weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnoModel {
    pub config: FnoConfig,
    pub params: FnoParams,
}

fn glorot(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> RealArray {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    RealArray::from_fn(&[fan_in, fan_out], |_| rng.gen_range(-bound..bound))
}

impl FnoModel {
    /// Seeded initialization: Glorot-uniform affine weights, zero biases and
    /// spectral weights uniform in `[0, 1/width^2)` for both parts.
    pub fn new(config: FnoConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = config.width;
        let mut params = FnoParams::zeros(&config);
        params.lift_w = glorot(&mut rng, config.in_channels, w);
        let scale = 1.0 / (w * w) as f64;
        for l in 0..config.n_layers {
            for z in params.spectral[l].data_mut() {
                *z = Complex64::new(rng.gen::<f64>() * scale, rng.gen::<f64>() * scale);
            }
            params.pointwise_w[l] = glorot(&mut rng, w, w);
        }
        params.proj_hidden_w = glorot(&mut rng, w, w);
        params.proj_out_w = glorot(&mut rng, w, config.out_channels);
        Ok(FnoModel { config, params })
    }

    pub fn zeros(config: FnoConfig) -> Result<Self> {
        config.validate()?;
        Ok(FnoModel {
            params: FnoParams::zeros(&config),
            config,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.params.check_shapes(&self.config)
    }

    /// Forward pass of one sample (`in_channels x n`, any admissible `n`),
    /// leaving intermediates in the workspace. Returns `out_channels x n`.
    pub fn forward_sample<'w>(&self, input: &[f64], ws: &'w mut FnoWorkspace) -> &'w [f64] {
        let cfg = &self.config;
        let p = &self.params;
        let (w, n, modes) = (cfg.width, ws.grid_n(), cfg.n_modes);
        debug_assert_eq!(input.len(), cfg.in_channels * n);
        let cache = &mut ws.cache;
        cache.input.clear();
        cache.input.extend_from_slice(input);
        cache.hidden.resize(cfg.n_layers + 1, Vec::new());
        cache.hidden_grad.resize(cfg.n_layers, Vec::new());
        cache.spectra.resize(cfg.n_layers, Vec::new());

        let q0 = &mut cache.hidden[0];
        q0.clear();
        q0.resize(w * n, 0.0);
        pointwise_add(p.lift_w.data(), p.lift_b.data(), input, cfg.in_channels, w, n, q0);

        for l in 0..cfg.n_layers {
            let (before, after) = cache.hidden.split_at_mut(l + 1);
            let q = &before[l];
            ws.work.analyze(q, w, modes, &mut cache.spectra[l]);
            mix_modes(p.spectral[l].data(), &cache.spectra[l], w, modes, &mut ws.mixed);
            ws.pre.clear();
            ws.pre.resize(w * n, 0.0);
            ws.work.synthesize_add(&ws.mixed, w, modes, &mut ws.pre);
            pointwise_add(p.pointwise_w[l].data(), p.pointwise_b[l].data(), q, w, w, n, &mut ws.pre);
            let next = &mut after[0];
            next.resize(w * n, 0.0);
            let g = &mut cache.hidden_grad[l];
            g.resize(w * n, 0.0);
            gelu_with_grad(&ws.pre, next, g);
        }

        let last = &cache.hidden[cfg.n_layers];
        ws.pre.clear();
        ws.pre.resize(w * n, 0.0);
        pointwise_add(p.proj_hidden_w.data(), p.proj_hidden_b.data(), last, w, w, n, &mut ws.pre);
        cache.proj_act.resize(w * n, 0.0);
        cache.proj_grad.resize(w * n, 0.0);
        gelu_with_grad(&ws.pre, &mut cache.proj_act, &mut cache.proj_grad);

        cache.output.clear();
        cache.output.resize(cfg.out_channels * n, 0.0);
        pointwise_add(
            p.proj_out_w.data(),
            p.proj_out_b.data(),
            &cache.proj_act,
            w,
            cfg.out_channels,
            n,
            &mut cache.output,
        );
        &cache.output
    }

    /// Reverse pass for the sample last run through
    /// [`forward_sample`](Self::forward_sample); accumulates into `grads`.
    pub fn backward_sample(&self, d_out: &[f64], ws: &mut FnoWorkspace, grads: &mut FnoParams) {
        let cfg = &self.config;
        let p = &self.params;
        let (w, n, modes) = (cfg.width, ws.grid_n(), cfg.n_modes);
        let cache = &ws.cache;
        debug_assert_eq!(d_out.len(), cfg.out_channels * n);

        // projection
        let da = &mut ws.grad_a;
        da.resize(w * n, 0.0);
        pointwise_backward(
            p.proj_out_w.data(),
            &cache.proj_act,
            d_out,
            w,
            cfg.out_channels,
            n,
            grads.proj_out_w.data_mut(),
            grads.proj_out_b.data_mut(),
            Some(da),
        );
        da.iter_mut().zip(&cache.proj_grad).for_each(|(d, g)| *d *= g);
        let dq = &mut ws.grad_b;
        dq.resize(w * n, 0.0);
        pointwise_backward(
            p.proj_hidden_w.data(),
            &cache.hidden[cfg.n_layers],
            da,
            w,
            w,
            n,
            grads.proj_hidden_w.data_mut(),
            grads.proj_hidden_b.data_mut(),
            Some(dq),
        );

        for l in (0..cfg.n_layers).rev() {
            // dz = dq * gelu'(z), held in grad_b; dq for the layer input goes to grad_a.
            let dz = &mut ws.grad_b;
            dz.iter_mut().zip(&cache.hidden_grad[l]).for_each(|(d, g)| *d *= g);
            let q = &cache.hidden[l];
            let dq_in = &mut ws.grad_a;
            pointwise_backward(
                p.pointwise_w[l].data(),
                q,
                dz,
                w,
                w,
                n,
                grads.pointwise_w[l].data_mut(),
                grads.pointwise_b[l].data_mut(),
                Some(dq_in),
            );

            // spectral adjoint
            ws.work.analyze(dz, w, modes, &mut ws.dspec);
            let x = &cache.spectra[l];
            let r = p.spectral[l].data();
            let dr = grads.spectral[l].data_mut();
            for k in 0..modes {
                let scale = hermitian_weight(k, n) / n as f64;
                let base = k * w * w;
                for o in 0..w {
                    let g = ws.dspec[o * modes + k] * scale;
                    let row = &mut dr[base + o * w..base + (o + 1) * w];
                    for i in 0..w {
                        row[i] += g * x[i * modes + k].conj();
                    }
                }
            }
            // dX[i][k] = sum_o conj(r[k][o][i]) G[o][k], then irfft back.
            ws.mixed.clear();
            ws.mixed.resize(w * modes, Complex64::new(0.0, 0.0));
            for k in 0..modes {
                let base = k * w * w;
                for o in 0..w {
                    let g = ws.dspec[o * modes + k];
                    let row = &r[base + o * w..base + (o + 1) * w];
                    for i in 0..w {
                        ws.mixed[i * modes + k] += row[i].conj() * g;
                    }
                }
            }
            ws.work.synthesize_add(&ws.mixed, w, modes, dq_in);
            std::mem::swap(&mut ws.grad_a, &mut ws.grad_b);
        }

        // lift; the input gradient is not needed
        pointwise_backward(
            p.lift_w.data(),
            &cache.input,
            &ws.grad_b,
            cfg.in_channels,
            w,
            n,
            grads.lift_w.data_mut(),
            grads.lift_b.data_mut(),
            None,
        );
    }

    fn check_batch(&self, batch: &FieldBatch) -> Result<()> {
        if batch.channels() != self.config.in_channels {
            return Err(Error::ShapeMismatch {
                expected: vec![batch.batch(), self.config.in_channels, batch.grid_n()],
                found: batch.values.shape().to_vec(),
            });
        }
        check_grid(batch.grid_n(), self.config.n_modes)
    }

    /// Evaluates the operator on a batch at any admissible grid length.
    pub fn forward_any_grid(&self, batch: &FieldBatch) -> Result<FieldBatch> {
        self.check_batch(batch)?;
        let n = batch.grid_n();
        let mut ws = FnoWorkspace::new(n)?;
        let mut out = FieldBatch::zeros(batch.batch(), self.config.out_channels, n);
        for b in 0..batch.batch() {
            let y = self.forward_sample(batch.sample(b), &mut ws);
            out.sample_mut(b).copy_from_slice(y);
        }
        Ok(out)
    }
}

/// Forward pass on the model's own grid.
pub fn fno_forward(model: &FnoModel, batch: &FieldBatch) -> Result<FieldBatch> {
    if batch.grid_n() != model.config.grid_n {
        return Err(Error::InvalidSize(format!(
            "batch grid {} differs from model grid {}",
            batch.grid_n(),
            model.config.grid_n
        )));
    }
    model.forward_any_grid(batch)
}

/// Parameter gradients of `sum(d_out * forward(batch))`.
pub fn fno_backward(model: &FnoModel, batch: &FieldBatch, d_out: &FieldBatch) -> Result<FnoParams> {
    model.check_batch(batch)?;
    let n = batch.grid_n();
    if d_out.values.shape() != [batch.batch(), model.config.out_channels, n] {
        return Err(Error::ShapeMismatch {
            expected: vec![batch.batch(), model.config.out_channels, n],
            found: d_out.values.shape().to_vec(),
        });
    }
    let mut ws = FnoWorkspace::new(n)?;
    let mut grads = FnoParams::zeros(&model.config);
    for b in 0..batch.batch() {
        model.forward_sample(batch.sample(b), &mut ws);
        model.backward_sample(d_out.sample(b), &mut ws, &mut grads);
    }
    Ok(grads)
}

/// Re-encodes `params` on a grid of `new_grid` points and evaluates the same
/// weights there. Spectral weights touch only the first `n_modes`
/// coefficients; with an unnormalized forward and `1/N` inverse transform the
/// mode amplitudes already agree across grid lengths.
pub fn resample_grid(model: &FnoModel, params: &[[f64; PARAM_CHANNELS]], new_grid: usize) -> Result<FieldBatch> {
    check_grid(new_grid, model.config.n_modes)?;
    if new_grid < 2 * model.config.n_modes {
        return Err(Error::InvalidSize(format!(
            "grid {new_grid} is smaller than twice the {} retained modes",
            model.config.n_modes
        )));
    }
    model.forward_any_grid(&encode_input(params, new_grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gradcheck::grad_check_at;
    use crate::numerics::{affine, gelu, rfft};

    fn small_config(modes: usize) -> FnoConfig {
        FnoConfig {
            n_layers: 2,
            n_modes: modes,
            width: 4,
            grid_n: 16,
            in_channels: INPUT_CHANNELS,
            out_channels: 2,
        }
    }

    fn random_params(n: usize, seed: u64) -> Vec<[f64; 5]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-1.5..1.5)))
            .collect()
    }

    fn random_real(shape: &[usize], seed: u64) -> RealArray {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RealArray::from_fn(shape, |_| rng.gen_range(-1.0..1.0))
    }

    fn random_complex(shape: &[usize], seed: u64) -> ComplexArray {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = shape.iter().product();
        let data = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexArray::from_vec(shape, data).unwrap()
    }

    #[test]
    fn encode_input_layout() {
        let b = encode_input(&[[0.3, -1.0, 2.0, 0.0, 5.0]], 4);
        assert_eq!(b.channel(0, 5), &[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
        for c in 0..5 {
            let ch = b.channel(0, c);
            assert!(ch.iter().all(|&v| v == ch[0]));
        }
        let z = encode_input(&[[0.0; 5]], 8);
        assert!(z.values.data()[..5 * 8].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn spectral_conv_zero_and_identity() {
        let q = random_real(&[3, 16], 1);
        let zero = ComplexArray::zeros(&[5, 3, 3]);
        assert!(spectral_conv(&q, &zero).unwrap().data().iter().all(|&v| v == 0.0));

        let mut ident = ComplexArray::zeros(&[9, 3, 3]);
        for k in 0..9 {
            for c in 0..3 {
                ident.data_mut()[k * 9 + c * 3 + c] = Complex64::new(1.0, 0.0);
            }
        }
        let out = spectral_conv(&q, &ident).unwrap();
        for (a, b) in out.data().iter().zip(q.data()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_conv_constant_signal() {
        let q = RealArray::from_fn(&[2, 32], |i| if i < 32 { 1.5 } else { -0.25 });
        let mut r = ComplexArray::zeros(&[4, 2, 2]);
        r.data_mut()[0] = Complex64::new(2.0, 0.0);
        r.data_mut()[3] = Complex64::new(2.0, 0.0);
        let out = spectral_conv(&q, &r).unwrap();
        for (a, b) in out.data().iter().zip(q.data()) {
            assert!((a - 2.0 * b).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_conv_truncates_modes() {
        let q = random_real(&[3, 32], 4);
        let r = random_complex(&[6, 3, 3], 5);
        let out = spectral_conv(&q, &r).unwrap();
        for c in 0..3 {
            let spec = rfft(&out.data()[c * 32..(c + 1) * 32]).unwrap();
            for z in &spec[6..] {
                assert!(z.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn spectral_conv_rejects_bad_shapes() {
        let q = random_real(&[3, 16], 1);
        assert!(spectral_conv(&q, &ComplexArray::zeros(&[4, 2, 3])).is_err());
        assert!(spectral_conv(&q, &ComplexArray::zeros(&[10, 3, 3])).is_err());
        assert!(spectral_conv(&random_real(&[3, 12], 1), &ComplexArray::zeros(&[2, 3, 3])).is_err());
    }

    #[test]
    fn fourier_layer_reductions() {
        let q = random_real(&[4, 16], 2);
        let r0 = ComplexArray::zeros(&[3, 4, 4]);
        let zero = fourier_layer(&q, &r0, &RealArray::zeros(&[4, 4]), &RealArray::zeros(&[4])).unwrap();
        assert!(zero.data().iter().all(|&v| v == 0.0));

        // R = 0 leaves a pointwise affine map followed by GeLU.
        let w = random_real(&[4, 4], 3);
        let b = random_real(&[4], 4);
        let layer = fourier_layer(&q, &r0, &w, &b).unwrap();
        let mut qt = RealArray::zeros(&[16, 4]);
        for c in 0..4 {
            for n in 0..16 {
                qt.data_mut()[n * 4 + c] = q.data()[c * 16 + n];
            }
        }
        let reference = gelu(&affine(&qt, &w, &b).unwrap());
        for c in 0..4 {
            for n in 0..16 {
                assert!((layer.data()[c * 16 + n] - reference.data()[n * 4 + c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_model_gives_zero_output() {
        let cfg = small_config(3);
        let m = FnoModel::zeros(cfg).unwrap();
        let input = encode_input(&random_params(3, 1), cfg.grid_n);
        let out = fno_forward(&m, &input).unwrap();
        assert_eq!(out.values.shape(), &[3, 2, 16]);
        assert!(out.values.data().iter().all(|&v| v == 0.0));
        let fine = resample_grid(&m, &random_params(2, 1), 64).unwrap();
        assert!(fine.values.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn resample_rejects_small_grids() {
        let m = FnoModel::zeros(small_config(8)).unwrap();
        assert!(resample_grid(&m, &random_params(1, 0), 8).is_err());
        assert!(resample_grid(&m, &random_params(1, 0), 12).is_err());
        assert!(resample_grid(&m, &random_params(1, 0), 32).is_ok());
    }

    #[test]
    fn readout_is_grid_mean() {
        let n = 256;
        let mut vals = vec![0.75; n];
        vals.extend(coordinate_grid(n));
        let out = FieldBatch::new(RealArray::from_vec(&[1, 2, n], vals).unwrap()).unwrap();
        let s = readout_scalar(&out).unwrap();
        assert!((s.data()[0] - 0.75).abs() < 1e-15);
        assert!((s.data()[1] - 0.5).abs() < 1.0 / n as f64);
        assert!(readout_scalar(&FieldBatch::zeros(1, 3, 4)).is_err());
    }

    #[test]
    fn interpolation_endpoints_and_linearity() {
        let src: Vec<f64> = (0..200).map(|i| 3.0 * i as f64 / 199.0 - 1.0).collect();
        let up = interpolate_series(&src, 256);
        assert_eq!(up[0], -1.0);
        assert!((up[255] - 2.0).abs() < 1e-14);
        for (j, v) in up.iter().enumerate() {
            assert!((v - (3.0 * j as f64 / 255.0 - 1.0)).abs() < 1e-12);
        }
        let back = interpolate_series(&up, 200);
        for (a, b) in back.iter().zip(&src) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn loss_and_grad(model: &FnoModel, input: &FieldBatch, target: &RealArray) -> (f64, FnoParams) {
        let out = fno_forward(model, input).unwrap();
        let d: Vec<f64> = out
            .values
            .data()
            .iter()
            .zip(target.data())
            .map(|(o, t)| 2.0 * (o - t) / target.len() as f64)
            .collect();
        let loss = crate::numerics::loss::mse_slice(out.values.data(), target.data());
        let d_out = FieldBatch::new(RealArray::from_vec(out.values.shape(), d).unwrap()).unwrap();
        (loss, fno_backward(model, input, &d_out).unwrap())
    }

    #[test]
    fn full_gradient_matches_finite_differences() {
        for (modes, seed) in [(3usize, 1u64), (9, 2)] {
            let cfg = small_config(modes);
            let model = FnoModel::new(cfg, seed).unwrap();
            // larger spectral weights so the spectral path matters
            let mut model = model;
            for r in &mut model.params.spectral {
                for z in r.data_mut() {
                    *z *= 8.0;
                }
            }
            let input = encode_input(&random_params(2, seed), cfg.grid_n);
            let target = random_real(&[2, 2, cfg.grid_n], seed + 10);
            let (_, grads) = loss_and_grad(&model, &input, &target);
            let point = model.params.to_flat();
            let analytic = grads.to_flat();
            let all: Vec<usize> = (0..point.len()).collect();
            let report = grad_check_at(
                |p| {
                    let mut m = model.clone();
                    m.params.load_flat(p);
                    let out = fno_forward(&m, &input).unwrap();
                    crate::numerics::loss::mse_slice(out.values.data(), target.data())
                },
                &analytic,
                &point,
                1e-5,
                &all,
            );
            assert!(report.max_rel_error < 1e-6, "{report:?}");
        }
    }

    #[test]
    fn zero_output_gradient_gives_zero_grads() {
        let cfg = small_config(3);
        let m = FnoModel::new(cfg, 3).unwrap();
        let input = encode_input(&random_params(2, 3), cfg.grid_n);
        let g = fno_backward(&m, &input, &FieldBatch::zeros(2, 2, cfg.grid_n)).unwrap();
        assert!(g.to_flat().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradients_add_across_samples() {
        let cfg = small_config(4);
        let m = FnoModel::new(cfg, 5).unwrap();
        let p = random_params(2, 5);
        let d = random_real(&[2, 2, cfg.grid_n], 6);
        let both = fno_backward(&m, &encode_input(&p, cfg.grid_n), &FieldBatch::new(d.clone()).unwrap()).unwrap();
        let mut sum = FnoParams::zeros(&cfg);
        for b in 0..2 {
            let db = RealArray::from_vec(&[1, 2, cfg.grid_n], d.data()[b * 32..(b + 1) * 32].to_vec()).unwrap();
            let g = fno_backward(&m, &encode_input(&p[b..b + 1], cfg.grid_n), &FieldBatch::new(db).unwrap()).unwrap();
            sum.accumulate(&g);
        }
        for (a, b) in both.to_flat().iter().zip(sum.to_flat()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn batch_independence_and_determinism() {
        let cfg = small_config(4);
        let m = FnoModel::new(cfg, 9).unwrap();
        let p = random_params(4, 9);
        let all = fno_forward(&m, &encode_input(&p, cfg.grid_n)).unwrap();
        let again = fno_forward(&m, &encode_input(&p, cfg.grid_n)).unwrap();
        assert_eq!(all, again);
        let one = fno_forward(&m, &encode_input(&p[2..3], cfg.grid_n)).unwrap();
        for (a, b) in one.sample(0).iter().zip(all.sample(2)) {
            assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(FnoConfig { grid_n: 100, ..FnoConfig::scalar() }.validate().is_err());
        assert!(FnoConfig { n_modes: 130, ..FnoConfig::scalar() }.validate().is_err());
        assert!(FnoConfig { width: 0, ..FnoConfig::scalar() }.validate().is_err());
        assert!(FnoConfig::series().validate().is_ok());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn spectral_conv_is_linear_and_shift_equivariant(
            a in proptest::collection::vec(-2.0f64..2.0, 3 * 32),
            b in proptest::collection::vec(-2.0f64..2.0, 3 * 32),
            alpha in -3.0f64..3.0,
            shift in 0usize..32,
            seed in 0u64..1000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = ComplexArray::from_vec(
                &[6, 3, 3],
                (0..54).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            )
            .unwrap();
            let qa = RealArray::from_vec(&[3, 32], a.clone()).unwrap();
            let qb = RealArray::from_vec(&[3, 32], b.clone()).unwrap();
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + y).collect();
            let ya = spectral_conv(&qa, &r).unwrap();
            let yb = spectral_conv(&qb, &r).unwrap();
            let ym = spectral_conv(&RealArray::from_vec(&[3, 32], mix).unwrap(), &r).unwrap();
            for ((p, q), m) in ya.data().iter().zip(yb.data()).zip(ym.data()) {
                proptest::prop_assert!((alpha * p + q - m).abs() < 1e-10);
            }
            // a circular shift of the input shifts the output
            let rolled: Vec<f64> = (0..3 * 32).map(|i| a[(i / 32) * 32 + (i % 32 + 32 - shift) % 32]).collect();
            let yr = spectral_conv(&RealArray::from_vec(&[3, 32], rolled).unwrap(), &r).unwrap();
            for i in 0..3 * 32 {
                let j = (i / 32) * 32 + (i % 32 + 32 - shift) % 32;
                proptest::prop_assert!((yr.data()[i] - ya.data()[j]).abs() < 1e-10);
            }
        }
    }
}
