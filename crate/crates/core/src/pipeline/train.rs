use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fno::{encode_input, interpolate_series, FnoConfig, FnoModel, FnoParams, FnoWorkspace};
use crate::mlp::{MlpCache, MlpConfig, MlpModel, MlpParams, DEFAULT_HIDDEN};
use crate::numerics::{adam_update, AdamConfig, AdamState, Parameters};
use crate::surrogate::{ModelKind, Network, Surrogate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub kind: ModelKind,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    /// Seeds weight initialization and the per-epoch shuffles.
    pub seed: u64,
    /// Operator architecture; ignored by the fully connected baseline.
    pub fno: FnoConfig,
    /// Hidden widths of the fully connected baseline.
    pub hidden: Vec<usize>,
}

impl TrainConfig {
    /// 512 epochs, batch 32; lr 0.001 for operator networks and 0.007 for the baseline.
    pub fn defaults(kind: ModelKind) -> Self {
        TrainConfig {
            kind,
            epochs: 512,
            lr: if kind == ModelKind::Dnn { 0.007 } else { 0.001 },
            batch_size: 32,
            seed: 0,
            fno: if kind.is_series() {
                FnoConfig::series()
            } else {
                FnoConfig::scalar()
            },
            hidden: DEFAULT_HIDDEN.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be >= 1".into()));
        }
        if !(self.lr >= 0.0) || !self.lr.is_finite() {
            return Err(Error::Config(format!("learning rate must be finite and >= 0, got {}", self.lr)));
        }
        match self.kind {
            ModelKind::Dnn => MlpConfig::new(5, &self.hidden, 2).validate(),
            _ => {
                if self.fno.in_channels != crate::fno::INPUT_CHANNELS || self.fno.out_channels != 2 {
                    return Err(Error::Config("operator networks take 6 input and 2 output channels".into()));
                }
                self.fno.validate()
            }
        }
    }
}

/// Per-epoch mean squared error in normalized target units.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub seconds: f64,
}

/// Normalized inputs and targets of one split.
struct Examples {
    x: Vec<[f64; 5]>,
    /// Flat target per sample in network output layout.
    y: Vec<Vec<f64>>,
}

fn examples(ds: &Dataset, kind: ModelKind, grid_n: usize, rows: &[usize]) -> Examples {
    let x = rows
        .iter()
        .map(|&i| {
            let v = ds.input_stats.apply_row(&ds.inputs[i]);
            [v[0], v[1], v[2], v[3], v[4]]
        })
        .collect();
    let y = rows
        .iter()
        .map(|&i| {
            if kind.is_series() {
                let s = &ds.series_stats;
                let mut t = interpolate_series(&ds.series_volume[i], grid_n);
                t.iter_mut().for_each(|v| *v = (*v - s.mean[0]) / s.std[0]);
                let temp = interpolate_series(&ds.series_temp[i], grid_n);
                t.extend(temp.into_iter().map(|v| (v - s.mean[1]) / s.std[1]));
                t
            } else {
                ds.scalar_stats.apply_row(&ds.scalar_targets[i])
            }
        })
        .collect();
    Examples { x, y }
}

/// A network viewed as something that maps a minibatch to a loss and gradient.
trait Learner {
    type Params: Parameters;

    fn params_mut(&mut self) -> &mut Self::Params;
    fn zero_grads(&self) -> Self::Params;
    /// Mean squared error over the batch, accumulating its gradient into `grads`.
    fn loss_and_grad(&mut self, x: &[[f64; 5]], y: &[&[f64]], grads: &mut Self::Params) -> f64;
    /// Mean squared error without gradients.
    fn loss(&mut self, x: &[[f64; 5]], y: &[Vec<f64>]) -> f64;
}

struct FnoLearner {
    model: FnoModel,
    ws: FnoWorkspace,
    series: bool,
    d_out: Vec<f64>,
}

impl FnoLearner {
    /// Squared error of one sample and, if asked, `dL/dout` scaled by `scale`.
    fn sample(&mut self, x: &[f64; 5], y: &[f64], grad_scale: Option<f64>) -> f64 {
        let n = self.ws.grid_n();
        let input = encode_input(std::slice::from_ref(x), n);
        let out = self.model.forward_sample(input.sample(0), &mut self.ws);
        self.d_out.clear();
        self.d_out.resize(out.len(), 0.0);
        let mut sse = 0.0;
        if self.series {
            for ((o, t), d) in out.iter().zip(y).zip(self.d_out.iter_mut()) {
                let e = o - t;
                sse += e * e;
                *d = 2.0 * e;
            }
        } else {
            for (c, t) in y.iter().enumerate() {
                let ch = &out[c * n..(c + 1) * n];
                let e = ch.iter().sum::<f64>() / n as f64 - t;
                sse += e * e;
                self.d_out[c * n..(c + 1) * n].fill(2.0 * e / n as f64);
            }
        }
        if let Some(s) = grad_scale {
            self.d_out.iter_mut().for_each(|d| *d *= s);
        }
        sse
    }

    fn outputs_per_sample(&self) -> usize {
        if self.series {
            2 * self.ws.grid_n()
        } else {
            2
        }
    }
}

impl Learner for FnoLearner {
    type Params = FnoParams;

    fn params_mut(&mut self) -> &mut FnoParams {
        &mut self.model.params
    }

    fn zero_grads(&self) -> FnoParams {
        FnoParams::zeros(&self.model.config)
    }

    fn loss_and_grad(&mut self, x: &[[f64; 5]], y: &[&[f64]], grads: &mut FnoParams) -> f64 {
        let count = (x.len() * self.outputs_per_sample()) as f64;
        let mut sse = 0.0;
        for (xi, yi) in x.iter().zip(y) {
            sse += self.sample(xi, yi, Some(1.0 / count));
            let d_out = std::mem::take(&mut self.d_out);
            self.model.backward_sample(&d_out, &mut self.ws, grads);
            self.d_out = d_out;
        }
        sse / count
    }

    fn loss(&mut self, x: &[[f64; 5]], y: &[Vec<f64>]) -> f64 {
        let count = (x.len() * self.outputs_per_sample()) as f64;
        x.iter().zip(y).map(|(xi, yi)| self.sample(xi, yi, None)).sum::<f64>() / count
    }
}

struct MlpLearner {
    model: MlpModel,
    cache: MlpCache,
}

impl MlpLearner {
    fn forward(&mut self, x: &[[f64; 5]]) {
        let flat: Vec<f64> = x.iter().flatten().copied().collect();
        self.model.forward_cached(&flat, x.len(), &mut self.cache);
    }
}

impl Learner for MlpLearner {
    type Params = MlpParams;

    fn params_mut(&mut self) -> &mut MlpParams {
        &mut self.model.params
    }

    fn zero_grads(&self) -> MlpParams {
        MlpParams::zeros(&self.model.config)
    }

    fn loss_and_grad(&mut self, x: &[[f64; 5]], y: &[&[f64]], grads: &mut MlpParams) -> f64 {
        self.forward(x);
        let count = (2 * x.len()) as f64;
        let target = y.iter().flat_map(|r| r.iter());
        let mut sse = 0.0;
        let dy: Vec<f64> = self
            .cache
            .output()
            .iter()
            .zip(target)
            .map(|(o, t)| {
                let e = o - t;
                sse += e * e;
                2.0 * e / count
            })
            .collect();
        self.model.backward_cached(&self.cache, &dy, grads);
        sse / count
    }

    fn loss(&mut self, x: &[[f64; 5]], y: &[Vec<f64>]) -> f64 {
        self.forward(x);
        let target = y.iter().flat_map(|r| r.iter());
        let sse: f64 = self.cache.output().iter().zip(target).map(|(o, t)| (o - t) * (o - t)).sum();
        sse / (2 * x.len()) as f64
    }
}

fn fit<L: Learner>(learner: &mut L, train: &Examples, val: &Examples, cfg: &TrainConfig) -> Result<TrainHistory> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0005_4AFF_1E00);
    let mut order: Vec<usize> = (0..train.x.len()).collect();
    let mut grads = learner.zero_grads();
    let mut state = {
        let p = learner.params_mut();
        AdamState::new(&p.tensors())
    };
    let adam = AdamConfig::default();
    let mut history = TrainHistory::default();
    let mut xb = Vec::with_capacity(cfg.batch_size);
    let mut yb: Vec<&[f64]> = Vec::with_capacity(cfg.batch_size);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut weighted = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            xb.clear();
            yb.clear();
            for &i in batch {
                xb.push(train.x[i]);
                yb.push(&train.y[i]);
            }
            grads.zero();
            let loss = learner.loss_and_grad(&xb, &yb, &mut grads);
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            weighted += loss * batch.len() as f64;
            let g = grads.tensors();
            let mut p = learner.params_mut().tensors_mut();
            adam_update(&mut p, &g, &mut state, cfg.lr, &adam).map_err(|e| match e {
                Error::NonFiniteGradient { .. } => Error::TrainingDiverged { epoch },
                other => other,
            })?;
        }
        history.train_loss.push(weighted / train.x.len() as f64);
        let val_loss = if val.x.is_empty() {
            f64::NAN
        } else {
            learner.loss(&val.x, &val.y)
        };
        if !val.x.is_empty() && !val_loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        history.val_loss.push(val_loss);
    }
    history.seconds = start.elapsed().as_secs_f64();
    Ok(history)
}

/// Initializes a model of `cfg.kind` and trains it on the dataset's training
/// split with Adam, recording training and validation loss each epoch.
pub fn train(ds: &Dataset, cfg: &TrainConfig) -> Result<(Surrogate, TrainHistory)> {
    let network = match cfg.kind {
        ModelKind::Dnn => Network::Mlp(MlpModel::new(MlpConfig::new(5, &cfg.hidden, 2), cfg.seed)?),
        _ => Network::Fno(FnoModel::new(cfg.fno, cfg.seed)?),
    };
    train_from(ds, cfg, network)
}

/// Like [`train`] but starting from the given weights.
pub fn train_from(ds: &Dataset, cfg: &TrainConfig, network: Network) -> Result<(Surrogate, TrainHistory)> {
    cfg.validate()?;
    ds.validate()?;
    let grid_n = cfg.fno.grid_n;
    let train_set = examples(ds, cfg.kind, grid_n, &ds.split.train);
    let val_set = examples(ds, cfg.kind, grid_n, &ds.split.val);
    let (network, history) = match network {
        Network::Fno(model) if cfg.kind != ModelKind::Dnn => {
            let mut l = FnoLearner {
                ws: FnoWorkspace::new(model.config.grid_n)?,
                model,
                series: cfg.kind.is_series(),
                d_out: Vec::new(),
            };
            let h = fit(&mut l, &train_set, &val_set, cfg)?;
            (Network::Fno(l.model), h)
        }
        Network::Mlp(model) if cfg.kind == ModelKind::Dnn => {
            let mut l = MlpLearner {
                model,
                cache: MlpCache::default(),
            };
            let h = fit(&mut l, &train_set, &val_set, cfg)?;
            (Network::Mlp(l.model), h)
        }
        _ => return Err(Error::Config(format!("network does not match model kind {}", cfg.kind))),
    };
    let surrogate = Surrogate {
        kind: cfg.kind,
        network,
        input_stats: ds.input_stats.clone(),
        target_stats: if cfg.kind.is_series() {
            ds.series_stats.clone()
        } else {
            ds.scalar_stats.clone()
        },
        series_len: if cfg.kind.is_series() { ds.series_len() } else { 0 },
        dataset_hash: ds.provenance.hash.clone(),
    };
    Ok((surrogate, history))
}
