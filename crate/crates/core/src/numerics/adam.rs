//! Bias-corrected Adam.

use super::array::RealArray;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates, one pair per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<RealArray>,
    pub v: Vec<RealArray>,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &[&[f64]]) -> Self {
        let zeros = |p: &&[f64]| RealArray::zeros(&[p.len()]);
        AdamState {
            m: params.iter().map(zeros).collect(),
            v: params.iter().map(zeros).collect(),
            t: 0,
        }
    }
}

/// One Adam step. Gradients are validated before anything is modified.
pub fn adam_update(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut AdamState,
    lr: f64,
    cfg: &AdamConfig,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::InvalidSize(format!(
            "adam: {} parameter tensors, {} gradients, {} moment slots",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() || p.len() != state.m[i].len() {
            return Err(Error::ShapeMismatch {
                expected: vec![p.len()],
                found: vec![g.len()],
            });
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteGradient { tensor: i });
        }
    }

    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let m = state.m[i].data_mut();
        let v = state.v[i].data_mut();
        for j in 0..p.len() {
            let gj = g[j];
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * gj;
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * gj * gj;
            let m_hat = m[j] / bc1;
            let v_hat = v[j] / bc2;
            let delta = lr * m_hat / (v_hat.sqrt() + cfg.eps);
            // a zero step must not flip the sign of -0.0
            if delta != 0.0 {
                p[j] -= delta;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(p: &mut Vec<f64>, g: &[f64], s: &mut AdamState, lr: f64) -> Result<()> {
        adam_update(&mut [p.as_mut_slice()], &[g], s, lr, &AdamConfig::default())
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = vec![0.5];
        let mut s = AdamState::new(&[&p]);
        step(&mut p, &[1.0], &mut s, 0.001).unwrap();
        assert!((0.5 - p[0] - 0.001).abs() < 1e-8);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = vec![0.3, -1.2, 4.0];
        let before = p.clone();
        let mut s = AdamState::new(&[&p]);
        step(&mut p, &[0.0; 3], &mut s, 0.01).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn two_steps_follow_the_recurrence() {
        let (b1, b2, eps, lr, g) = (0.9f64, 0.999f64, 1e-8, 0.01, 0.7);
        // scripted recurrence
        let (mut m, mut v, mut x) = (0.0f64, 0.0f64, 2.0f64);
        for t in 1..=2 {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t));
            let vh = v / (1.0 - b2.powi(t));
            x -= lr * mh / (vh.sqrt() + eps);
        }
        let mut p = vec![2.0];
        let mut s = AdamState::new(&[&p]);
        step(&mut p, &[g], &mut s, lr).unwrap();
        step(&mut p, &[g], &mut s, lr).unwrap();
        assert!((p[0] - x).abs() < 1e-12);
        assert_eq!(s.t, 2);
        assert!(s.v[0].data()[0] >= 0.0);
    }

    #[test]
    fn zero_learning_rate_is_bit_identical() {
        let mut p = vec![0.1, -0.0, 3.5e-7];
        let before = p.clone();
        let mut s = AdamState::new(&[&p]);
        for _ in 0..5 {
            step(&mut p, &[1.0, -2.0, 0.3], &mut s, 0.0).unwrap();
        }
        for (a, b) in p.iter().zip(&before) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn non_finite_gradient_is_rejected_untouched() {
        let mut p = vec![1.0, 2.0];
        let mut s = AdamState::new(&[&p]);
        let err = step(&mut p, &[0.1, f64::NAN], &mut s, 0.1).unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { tensor: 0 }));
        assert_eq!(p, vec![1.0, 2.0]);
        assert_eq!(s.t, 0);
    }
}
