use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major array of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealArray {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl RealArray {
    pub fn zeros(shape: &[usize]) -> Self {
        RealArray {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        RealArray {
            shape: shape.to_vec(),
            data: vec![value; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::InvalidSize(format!(
                "shape {shape:?} needs {n} values, got {}",
                data.len()
            )));
        }
        Ok(RealArray {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(usize) -> f64) -> Self {
        let n: usize = shape.iter().product();
        RealArray {
            shape: shape.to_vec(),
            data: (0..n).map(&mut f).collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Rows and columns of a rank-2 array.
    pub fn dims2(&self) -> Result<(usize, usize)> {
        match self.shape.as_slice() {
            &[r, c] => Ok((r, c)),
            other => Err(Error::InvalidSize(format!(
                "expected a matrix, got shape {other:?}"
            ))),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealArray {
        RealArray {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn ensure_same_shape(&self, other: &RealArray) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                found: other.shape.clone(),
            });
        }
        Ok(())
    }
}

/// Dense row-major array of complex values.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexArray {
    shape: Vec<usize>,
    data: Vec<Complex64>,
}

impl ComplexArray {
    pub fn zeros(shape: &[usize]) -> Self {
        ComplexArray {
            shape: shape.to_vec(),
            data: vec![Complex64::new(0.0, 0.0); shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<Complex64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::InvalidSize(format!(
                "shape {shape:?} needs {n} values, got {}",
                data.len()
            )));
        }
        Ok(ComplexArray {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Interleaved `(re, im)` view.
    pub fn as_f64(&self) -> &[f64] {
        bytemuck::cast_slice(&self.data)
    }

    pub fn as_f64_mut(&mut self) -> &mut [f64] {
        bytemuck::cast_slice_mut(&mut self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Serialized as shape plus interleaved `(re, im)` values.
impl Serialize for ComplexArray {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            shape: &'a [usize],
            data: &'a [f64],
        }
        Repr {
            shape: &self.shape,
            data: self.as_f64(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexArray {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            shape: Vec<usize>,
            data: Vec<f64>,
        }
        let repr = Repr::deserialize(d)?;
        if repr.data.len() % 2 != 0 {
            return Err(serde::de::Error::custom("odd number of interleaved values"));
        }
        let data = repr
            .data
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        ComplexArray::from_vec(&repr.shape, data).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_rejects_wrong_length() {
        assert!(RealArray::from_vec(&[2, 3], vec![0.0; 5]).is_err());
        assert!(ComplexArray::from_vec(&[2], vec![Complex64::new(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn complex_view_interleaves() {
        let a = ComplexArray::from_vec(&[2], vec![Complex64::new(1.0, 2.0), Complex64::new(3.0, 4.0)])
            .unwrap();
        assert_eq!(a.as_f64(), &[1.0, 2.0, 3.0, 4.0]);
    }
}
