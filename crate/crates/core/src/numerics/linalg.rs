//! Matrix products and the affine map `y = x W + b`.

use super::array::RealArray;
use crate::error::{Error, Result};

/// Strided view of a matrix stored in a slice.
#[derive(Debug, Clone, Copy)]
pub struct MatRef<'a> {
    pub data: &'a [f64],
    pub rows: usize,
    pub cols: usize,
    pub row_stride: isize,
    pub col_stride: isize,
}

impl<'a> MatRef<'a> {
    pub fn row_major(data: &'a [f64], rows: usize, cols: usize) -> Self {
        MatRef {
            data,
            rows,
            cols,
            row_stride: cols as isize,
            col_stride: 1,
        }
    }

    pub fn t(self) -> Self {
        MatRef {
            data: self.data,
            rows: self.cols,
            cols: self.rows,
            row_stride: self.col_stride,
            col_stride: self.row_stride,
        }
    }

    fn max_offset(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        (self.rows as isize - 1) as usize * self.row_stride as usize
            + (self.cols as isize - 1) as usize * self.col_stride as usize
    }
}

/// `c = alpha * a b + beta * c` with `c` row-major `a.rows x b.cols`.
pub fn gemm(alpha: f64, a: MatRef<'_>, b: MatRef<'_>, beta: f64, c: &mut [f64]) {
    assert_eq!(a.cols, b.rows, "inner dimensions differ");
    assert_eq!(c.len(), a.rows * b.cols, "output size");
    assert!(a.row_stride >= 0 && a.col_stride >= 0 && b.row_stride >= 0 && b.col_stride >= 0);
    assert!(a.rows * a.cols == 0 || a.max_offset() < a.data.len());
    assert!(b.rows * b.cols == 0 || b.max_offset() < b.data.len());
    if a.rows == 0 || b.cols == 0 {
        return;
    }
    if a.cols == 0 {
        c.iter_mut().for_each(|v| *v *= beta);
        return;
    }
    // SAFETY: every index touched is bounded by the offset checks above.
    unsafe {
        matrixmultiply::dgemm(
            a.rows,
            a.cols,
            b.cols,
            alpha,
            a.data.as_ptr(),
            a.row_stride,
            a.col_stride,
            b.data.as_ptr(),
            b.row_stride,
            b.col_stride,
            beta,
            c.as_mut_ptr(),
            b.cols as isize,
            1,
        );
    }
}

pub fn matmul(a: &RealArray, b: &RealArray) -> Result<RealArray> {
    let (m, k) = a.dims2()?;
    let (k2, n) = b.dims2()?;
    if k != k2 {
        return Err(Error::ShapeMismatch {
            expected: vec![k, n],
            found: vec![k2, n],
        });
    }
    let mut out = RealArray::zeros(&[m, n]);
    gemm(
        1.0,
        MatRef::row_major(a.data(), m, k),
        MatRef::row_major(b.data(), k, n),
        0.0,
        out.data_mut(),
    );
    Ok(out)
}

fn check_affine(x: &RealArray, w: &RealArray, b: &RealArray) -> Result<(usize, usize, usize)> {
    let (batch, fan_in) = x.dims2()?;
    let (w_in, fan_out) = w.dims2()?;
    if w_in != fan_in {
        return Err(Error::ShapeMismatch {
            expected: vec![fan_in, fan_out],
            found: w.shape().to_vec(),
        });
    }
    if b.shape() != [fan_out] {
        return Err(Error::ShapeMismatch {
            expected: vec![fan_out],
            found: b.shape().to_vec(),
        });
    }
    Ok((batch, fan_in, fan_out))
}

/// `y = x W + b` for `x: batch x in`, `W: in x out`, `b: out`.
pub fn affine(x: &RealArray, w: &RealArray, b: &RealArray) -> Result<RealArray> {
    let (batch, fan_in, fan_out) = check_affine(x, w, b)?;
    let mut y = RealArray::zeros(&[batch, fan_out]);
    for row in y.data_mut().chunks_exact_mut(fan_out) {
        row.copy_from_slice(b.data());
    }
    gemm(
        1.0,
        MatRef::row_major(x.data(), batch, fan_in),
        MatRef::row_major(w.data(), fan_in, fan_out),
        1.0,
        y.data_mut(),
    );
    Ok(y)
}

#[derive(Debug, Clone)]
pub struct AffineGrads {
    pub dx: RealArray,
    pub dw: RealArray,
    pub db: RealArray,
}

/// Reverse pass of [`affine`] given `dL/dy`.
pub fn affine_backward(x: &RealArray, w: &RealArray, dy: &RealArray) -> Result<AffineGrads> {
    let (batch, fan_in) = x.dims2()?;
    let (w_in, fan_out) = w.dims2()?;
    if w_in != fan_in || dy.shape() != [batch, fan_out] {
        return Err(Error::ShapeMismatch {
            expected: vec![batch, fan_out],
            found: dy.shape().to_vec(),
        });
    }
    let mut dx = RealArray::zeros(&[batch, fan_in]);
    gemm(
        1.0,
        MatRef::row_major(dy.data(), batch, fan_out),
        MatRef::row_major(w.data(), fan_in, fan_out).t(),
        0.0,
        dx.data_mut(),
    );
    let mut dw = RealArray::zeros(&[fan_in, fan_out]);
    gemm(
        1.0,
        MatRef::row_major(x.data(), batch, fan_in).t(),
        MatRef::row_major(dy.data(), batch, fan_out),
        0.0,
        dw.data_mut(),
    );
    let mut db = RealArray::zeros(&[fan_out]);
    for row in dy.data().chunks_exact(fan_out) {
        for (acc, g) in db.data_mut().iter_mut().zip(row) {
            *acc += g;
        }
    }
    Ok(AffineGrads { dx, dw, db })
}
