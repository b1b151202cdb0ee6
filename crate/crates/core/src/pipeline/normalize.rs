use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column z-score statistics (population standard deviation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    /// Statistics of each column over `rows`. A column with zero spread gets
    /// std 1 so it normalizes to zeros.
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::EmptyDataset("cannot fit normalization on zero rows".into()))?;
        let cols = first.as_ref().len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; cols];
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::ShapeMismatch {
                    expected: vec![cols],
                    found: vec![r.len()],
                });
            }
            mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; cols];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r.as_ref()).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(NormStats { mean, std })
    }

    /// Treats every value as a sample of one column.
    pub fn fit_pooled<'a>(values: impl IntoIterator<Item = &'a f64>) -> Result<Self> {
        let rows: Vec<[f64; 1]> = values.into_iter().map(|&v| [v]).collect();
        Self::fit(&rows)
    }

    pub fn columns(&self) -> usize {
        self.mean.len()
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn invert_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| v * s + m)
            .collect()
    }

    /// Normalizes every row.
    pub fn apply<R: AsRef<[f64]>>(&self, rows: &[R]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply_row(r.as_ref())).collect()
    }

    pub fn denormalize<R: AsRef<[f64]>>(&self, rows: &[R]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.invert_row(r.as_ref())).collect()
    }
}
