//! Fully connected baseline: affine layers with ReLU between them and a
//! plain affine output layer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::activation::{relu_grad_scalar, relu_scalar};
use crate::numerics::linalg::{gemm, MatRef};
use crate::numerics::{Parameters, RealArray};

/// Hidden layer sizes used for the scalar baseline.
pub const DEFAULT_HIDDEN: [usize; 5] = [150, 300, 500, 300, 150];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpConfig {
    /// Input width, hidden widths, output width.
    pub layers: Vec<usize>,
}

impl MlpConfig {
    pub fn new(inputs: usize, hidden: &[usize], outputs: usize) -> Self {
        let mut layers = vec![inputs];
        layers.extend_from_slice(hidden);
        layers.push(outputs);
        MlpConfig { layers }
    }

    /// `[5, 150, 300, 500, 300, 150, 2]`.
    pub fn baseline() -> Self {
        Self::new(5, &DEFAULT_HIDDEN, 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.len() < 2 || self.layers.contains(&0) {
            return Err(Error::Config(format!(
                "MLP needs at least input and output widths, all >= 1: {:?}",
                self.layers
            )));
        }
        Ok(())
    }

    pub fn inputs(&self) -> usize {
        self.layers[0]
    }

    pub fn outputs(&self) -> usize {
        *self.layers.last().expect("validated")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    /// `fan_in x fan_out` per layer.
    pub weights: Vec<RealArray>,
    pub biases: Vec<RealArray>,
}

impl MlpParams {
    pub fn zeros(cfg: &MlpConfig) -> Self {
        let pairs = cfg.layers.windows(2);
        MlpParams {
            weights: pairs.clone().map(|p| RealArray::zeros(&[p[0], p[1]])).collect(),
            biases: pairs.map(|p| RealArray::zeros(&[p[1]])).collect(),
        }
    }

    pub fn check_shapes(&self, cfg: &MlpConfig) -> Result<()> {
        let want = MlpParams::zeros(cfg);
        if self.weights.len() != want.weights.len() {
            return Err(Error::Config(format!(
                "{} weight matrices for {} layers",
                self.weights.len(),
                want.weights.len()
            )));
        }
        let ours = self.weights.iter().chain(&self.biases);
        for (a, b) in ours.zip(want.weights.iter().chain(&want.biases)) {
            if a.shape() != b.shape() {
                return Err(Error::ShapeMismatch {
                    expected: b.shape().to_vec(),
                    found: a.shape().to_vec(),
                });
            }
        }
        Ok(())
    }
}

impl Parameters for MlpParams {
    fn tensors(&self) -> Vec<&[f64]> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| [w.data(), b.data()])
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| [w.data_mut(), b.data_mut()])
            .collect()
    }
}

/// Activations kept from the last forward pass.
#[derive(Debug, Clone, Default)]
pub struct MlpCache {
    batch: usize,
    /// Layer inputs: `x`, then each hidden activation.
    inputs: Vec<Vec<f64>>,
    /// Hidden pre-activations.
    pre: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl MlpCache {
    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub config: MlpConfig,
    pub params: MlpParams,
}

impl MlpModel {
    /// Glorot-uniform weights, zero biases.
    pub fn new(config: MlpConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = MlpParams::zeros(&config);
        for w in &mut params.weights {
            let (fi, fo) = (w.shape()[0], w.shape()[1]);
            let bound = (6.0 / (fi + fo) as f64).sqrt();
            w.data_mut().iter_mut().for_each(|v| *v = rng.gen_range(-bound..bound));
        }
        Ok(MlpModel { config, params })
    }

    pub fn zeros(config: MlpConfig) -> Result<Self> {
        config.validate()?;
        Ok(MlpModel {
            params: MlpParams::zeros(&config),
            config,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.params.check_shapes(&self.config)
    }

    fn n_layers(&self) -> usize {
        self.params.weights.len()
    }

    /// Forward pass over a row-major `batch x inputs` block.
    pub fn forward_cached(&self, x: &[f64], batch: usize, cache: &mut MlpCache) {
        let n_layers = self.n_layers();
        cache.batch = batch;
        cache.inputs.resize(n_layers, Vec::new());
        cache.pre.resize(n_layers.saturating_sub(1), Vec::new());
        cache.inputs[0].clear();
        cache.inputs[0].extend_from_slice(x);
        for l in 0..n_layers {
            let (fi, fo) = (self.config.layers[l], self.config.layers[l + 1]);
            let b = self.params.biases[l].data();
            let mut z: Vec<f64> = (0..batch).flat_map(|_| b.iter().copied()).collect();
            gemm(
                1.0,
                MatRef::row_major(&cache.inputs[l], batch, fi),
                MatRef::row_major(self.params.weights[l].data(), fi, fo),
                1.0,
                &mut z,
            );
            if l + 1 == n_layers {
                cache.output = z;
            } else {
                let a = &mut cache.inputs[l + 1];
                a.clear();
                a.extend(z.iter().map(|&v| relu_scalar(v)));
                cache.pre[l] = z;
            }
        }
    }

    /// Parameter gradients of `sum(dy * output)` for the cached pass, added to `grads`.
    pub fn backward_cached(&self, cache: &MlpCache, dy: &[f64], grads: &mut MlpParams) {
        let batch = cache.batch;
        let mut delta = dy.to_vec();
        for l in (0..self.n_layers()).rev() {
            let (fi, fo) = (self.config.layers[l], self.config.layers[l + 1]);
            gemm(
                1.0,
                MatRef::row_major(&cache.inputs[l], batch, fi).t(),
                MatRef::row_major(&delta, batch, fo),
                1.0,
                grads.weights[l].data_mut(),
            );
            let db = grads.biases[l].data_mut();
            for row in delta.chunks_exact(fo) {
                db.iter_mut().zip(row).for_each(|(a, d)| *a += d);
            }
            if l == 0 {
                break;
            }
            let mut prev = vec![0.0; batch * fi];
            gemm(
                1.0,
                MatRef::row_major(&delta, batch, fo),
                MatRef::row_major(self.params.weights[l].data(), fi, fo).t(),
                0.0,
                &mut prev,
            );
            prev.iter_mut()
                .zip(&cache.pre[l - 1])
                .for_each(|(d, &z)| *d *= relu_grad_scalar(z));
            delta = prev;
        }
    }

    fn check_input(&self, x: &RealArray) -> Result<usize> {
        let (batch, width) = x.dims2()?;
        if width != self.config.inputs() {
            return Err(Error::ShapeMismatch {
                expected: vec![batch, self.config.inputs()],
                found: x.shape().to_vec(),
            });
        }
        Ok(batch)
    }
}

/// `batch x inputs` to `batch x outputs`.
pub fn mlp_forward(model: &MlpModel, x: &RealArray) -> Result<RealArray> {
    let batch = model.check_input(x)?;
    let mut cache = MlpCache::default();
    model.forward_cached(x.data(), batch, &mut cache);
    RealArray::from_vec(&[batch, model.config.outputs()], cache.output)
}

/// Parameter gradients of `sum(dy * mlp_forward(model, x))`.
pub fn mlp_backward(model: &MlpModel, x: &RealArray, dy: &RealArray) -> Result<MlpParams> {
    let batch = model.check_input(x)?;
    if dy.shape() != [batch, model.config.outputs()] {
        return Err(Error::ShapeMismatch {
            expected: vec![batch, model.config.outputs()],
            found: dy.shape().to_vec(),
        });
    }
    let mut cache = MlpCache::default();
    model.forward_cached(x.data(), batch, &mut cache);
    let mut grads = MlpParams::zeros(&model.config);
    model.backward_cached(&cache, dy.data(), &mut grads);
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gradcheck::grad_check;
    use crate::numerics::loss::mse_slice;

    fn random(shape: &[usize], seed: u64) -> RealArray {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RealArray::from_fn(shape, |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn zero_model_outputs_zero() {
        let m = MlpModel::zeros(MlpConfig::baseline()).unwrap();
        let y = mlp_forward(&m, &random(&[3, 5], 1)).unwrap();
        assert_eq!(y.shape(), &[3, 2]);
        assert!(y.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_evaluated_toy() {
        // 2-2-1: hidden = relu([x0 + 1, -x1]), out = 2 h0 + 3 h1 + 0.5
        let mut m = MlpModel::zeros(MlpConfig::new(2, &[2], 1)).unwrap();
        m.params.weights[0] = RealArray::from_vec(&[2, 2], vec![1.0, 0.0, 0.0, -1.0]).unwrap();
        m.params.biases[0] = RealArray::from_vec(&[2], vec![1.0, 0.0]).unwrap();
        m.params.weights[1] = RealArray::from_vec(&[2, 1], vec![2.0, 3.0]).unwrap();
        m.params.biases[1] = RealArray::from_vec(&[1], vec![0.5]).unwrap();
        let x = RealArray::from_vec(&[2, 2], vec![0.5, 2.0, 1.0, -1.0]).unwrap();
        let y = mlp_forward(&m, &x).unwrap();
        assert_eq!(y.data(), &[3.5, 7.5]);
    }

    #[test]
    fn output_layer_is_unbounded() {
        let mut m = MlpModel::zeros(MlpConfig::new(1, &[1], 1)).unwrap();
        m.params.biases[1] = RealArray::from_vec(&[1], vec![-4.0]).unwrap();
        let y = mlp_forward(&m, &RealArray::zeros(&[1, 1])).unwrap();
        assert_eq!(y.data(), &[-4.0]);
    }

    #[test]
    fn first_layer_scales_with_positive_input() {
        let m = MlpModel::new(MlpConfig::baseline(), 4).unwrap();
        let x = random(&[2, 5], 5);
        let mut a = MlpCache::default();
        let mut b = MlpCache::default();
        m.forward_cached(x.data(), 2, &mut a);
        let scaled: Vec<f64> = x.data().iter().map(|v| 2.5 * v).collect();
        m.forward_cached(&scaled, 2, &mut b);
        for (p, q) in a.pre[0].iter().zip(&b.pre[0]) {
            assert!((2.5 * p - q).abs() < 1e-12);
        }
        // zero biases everywhere: the whole network is positively homogeneous
        for (p, q) in a.output.iter().zip(&b.output) {
            assert!((2.5 * p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_wrong_width() {
        let m = MlpModel::zeros(MlpConfig::baseline()).unwrap();
        assert!(mlp_forward(&m, &RealArray::zeros(&[2, 4])).is_err());
        assert!(MlpConfig::new(5, &[0], 2).validate().is_err());
    }

    #[test]
    fn full_network_gradient_check() {
        let mut m = MlpModel::new(MlpConfig::new(5, &[7, 9, 6], 2), 3).unwrap();
        for b in &mut m.params.biases {
            b.data_mut().iter_mut().for_each(|v| *v = 0.1);
        }
        let x = random(&[4, 5], 8);
        let t = random(&[4, 2], 9);
        let out = mlp_forward(&m, &x).unwrap();
        let dy: Vec<f64> = out.data().iter().zip(t.data()).map(|(o, t)| 2.0 * (o - t) / 8.0).collect();
        let g = mlp_backward(&m, &x, &RealArray::from_vec(&[4, 2], dy).unwrap()).unwrap();
        let report = grad_check(
            |p| {
                let mut mm = m.clone();
                mm.params.load_flat(p);
                mse_slice(mlp_forward(&mm, &x).unwrap().data(), t.data())
            },
            &g.to_flat(),
            &m.params.to_flat(),
            1e-5,
        );
        assert!(report.max_rel_error < 1e-7, "{report:?}");
    }

    #[test]
    fn zero_output_gradient_and_additivity() {
        let m = MlpModel::new(MlpConfig::new(5, &[8, 8], 2), 1).unwrap();
        let x = random(&[3, 5], 2);
        let g0 = mlp_backward(&m, &x, &RealArray::zeros(&[3, 2])).unwrap();
        assert!(g0.to_flat().iter().all(|&v| v == 0.0));

        let dy = random(&[3, 2], 3);
        let all = mlp_backward(&m, &x, &dy).unwrap();
        let mut sum = MlpParams::zeros(&m.config);
        for r in 0..3 {
            let xr = RealArray::from_vec(&[1, 5], x.data()[r * 5..r * 5 + 5].to_vec()).unwrap();
            let dr = RealArray::from_vec(&[1, 2], dy.data()[r * 2..r * 2 + 2].to_vec()).unwrap();
            sum.accumulate(&mlp_backward(&m, &xr, &dr).unwrap());
        }
        for (a, b) in all.to_flat().iter().zip(sum.to_flat()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn batch_rows_are_independent() {
        let m = MlpModel::new(MlpConfig::baseline(), 6).unwrap();
        let x = random(&[4, 5], 7);
        let all = mlp_forward(&m, &x).unwrap();
        let row = RealArray::from_vec(&[1, 5], x.data()[10..15].to_vec()).unwrap();
        let one = mlp_forward(&m, &row).unwrap();
        for (a, b) in one.data().iter().zip(&all.data()[4..6]) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn zero_bias_network_is_positively_homogeneous(
            x in proptest::collection::vec(-3.0f64..3.0, 5),
            scale in 0.01f64..100.0,
            seed in 0u64..1000,
        ) {
            let m = MlpModel::new(MlpConfig::new(5, &[12, 9], 2), seed).unwrap();
            let a = mlp_forward(&m, &RealArray::from_vec(&[1, 5], x.clone()).unwrap()).unwrap();
            let xs: Vec<f64> = x.iter().map(|v| v * scale).collect();
            let b = mlp_forward(&m, &RealArray::from_vec(&[1, 5], xs).unwrap()).unwrap();
            for (p, q) in a.data().iter().zip(b.data()) {
                proptest::prop_assert!((scale * p - q).abs() <= 1e-9 * q.abs().max(1.0));
            }
        }
    }
}
