use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::array::RealArray;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x * FRAC_1_SQRT_2))
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Exact GeLU, `x * Phi(x)`.
#[inline]
pub fn gelu_scalar(x: f64) -> f64 {
    x * normal_cdf(x)
}

#[inline]
pub fn gelu_grad_scalar(x: f64) -> f64 {
    normal_cdf(x) + x * normal_pdf(x)
}

#[inline]
pub fn relu_scalar(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Derivative of ReLU, taken as 0 at the origin.
#[inline]
pub fn relu_grad_scalar(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

pub fn gelu(x: &RealArray) -> RealArray {
    x.map(gelu_scalar)
}

pub fn gelu_grad(x: &RealArray) -> RealArray {
    x.map(gelu_grad_scalar)
}

pub fn relu(x: &RealArray) -> RealArray {
    x.map(relu_scalar)
}

pub fn relu_grad(x: &RealArray) -> RealArray {
    x.map(relu_grad_scalar)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Phi(1) via Simpson quadrature of the density on [0, 1].
    fn phi_one_by_quadrature() -> f64 {
        let n = 2000;
        let h = 1.0 / n as f64;
        let mut s = normal_pdf(0.0) + normal_pdf(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * normal_pdf(i as f64 * h);
        }
        0.5 + s * h / 3.0
    }

    #[test]
    fn gelu_values() {
        assert_eq!(gelu_scalar(0.0), 0.0);
        assert!((gelu_scalar(10.0) - 10.0).abs() < 1e-6);
        let oracle = phi_one_by_quadrature();
        assert!((oracle - 0.841345).abs() < 1e-6);
        assert!((gelu_scalar(1.0) - 0.841345).abs() < 1e-5);
        assert!((gelu_scalar(1.0) - oracle).abs() < 1e-9);
    }

    #[test]
    fn gelu_grad_matches_central_difference() {
        let h = 1e-6;
        for &x in &[-3.0, -1.0, -0.2, 0.0, 0.4, 1.7, 5.0] {
            let fd = (gelu_scalar(x + h) - gelu_scalar(x - h)) / (2.0 * h);
            assert!((fd - gelu_grad_scalar(x)).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn relu_values() {
        let x = RealArray::from_vec(&[3], vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&x).data(), &[0.0, 0.0, 2.0]);
        assert_eq!(relu_grad(&x).data(), &[0.0, 0.0, 1.0]);
        let pos = RealArray::from_vec(&[3], vec![0.5, 1.0, 7.0]).unwrap();
        assert_eq!(relu(&pos), pos);
    }
}
