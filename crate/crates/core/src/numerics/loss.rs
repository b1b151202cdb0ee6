use super::array::RealArray;
use crate::error::Result;

/// Mean of squared entrywise differences.
pub fn mse(pred: &RealArray, target: &RealArray) -> Result<f64> {
    pred.ensure_same_shape(target)?;
    Ok(mse_slice(pred.data(), target.data()))
}

/// Gradient of [`mse`] with respect to `pred`, `2 (pred - target) / count`.
pub fn mse_grad(pred: &RealArray, target: &RealArray) -> Result<RealArray> {
    pred.ensure_same_shape(target)?;
    let n = pred.len() as f64;
    let data = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| 2.0 * (p - t) / n)
        .collect();
    RealArray::from_vec(pred.shape(), data)
}

pub(crate) fn mse_slice(pred: &[f64], target: &[f64]) -> f64 {
    debug_assert_eq!(pred.len(), target.len());
    if pred.is_empty() {
        return 0.0;
    }
    pred.iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / pred.len() as f64
}
