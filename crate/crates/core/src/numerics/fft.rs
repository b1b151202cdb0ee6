//! Radix-2 real-input FFT.
//!
//! Forward transforms are unnormalized, `X[k] = sum_n x[n] exp(-2 pi i k n / N)`.
//! The inverse carries the `1/N` factor so that `irfft(rfft(x), N) == x`.
//! A length-`N` real transform is computed through one complex transform of
//! length `N/2` on the packed sequence `x[2m] + i x[2m+1]`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_len(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidSize(format!(
            "FFT length must be a power of two >= 2, got {n}"
        )));
    }
    Ok(())
}

/// Precomputed tables for a real transform of one length.
#[derive(Debug, Clone)]
pub struct RealFftPlan {
    n: usize,
    /// Forward twiddles stage by stage: for a butterfly span `h`, the `h`
    /// values `exp(-pi i j / h)` start at offset `h - 1`.
    twiddles: Vec<Complex64>,
    inv_twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
    /// `exp(-2 pi i k / N)` for `k < N/2`.
    split: Vec<Complex64>,
}

impl RealFftPlan {
    pub fn new(n: usize) -> Result<Self> {
        check_len(n)?;
        let m = n / 2;
        let mut twiddles = Vec::with_capacity(m);
        let mut h = 1;
        while h < m {
            twiddles.extend((0..h).map(|j| Complex64::from_polar(1.0, -PI * j as f64 / h as f64)));
            h *= 2;
        }
        let inv_twiddles = twiddles.iter().map(|w| w.conj()).collect();
        let bits = m.trailing_zeros();
        let bitrev = (0..m)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let split = (0..m)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        Ok(RealFftPlan {
            n,
            twiddles,
            inv_twiddles,
            bitrev,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of non-redundant output coefficients, `N/2 + 1`.
    pub fn spectrum_len(&self) -> usize {
        self.n / 2 + 1
    }

    /// In-place complex FFT of length `N/2`; `inverse` conjugates the twiddles
    /// and does not normalize.
    fn complex_fft(&self, buf: &mut [Complex64], inverse: bool) {
        let m = buf.len();
        for i in 0..m {
            let j = self.bitrev[i];
            if j > i {
                buf.swap(i, j);
            }
        }
        let table = if inverse { &self.inv_twiddles } else { &self.twiddles };
        let mut half = 1;
        while half < m {
            let w = &table[half - 1..2 * half - 1];
            for block in buf.chunks_exact_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for ((a, b), &wj) in lo.iter_mut().zip(hi.iter_mut()).zip(w) {
                    let t = *b * wj;
                    *b = *a - t;
                    *a += t;
                }
            }
            half *= 2;
        }
    }

    /// `output` must hold `N/2 + 1` values; `scratch` is resized as needed.
    pub fn forward_into(
        &self,
        input: &[f64],
        output: &mut [Complex64],
        scratch: &mut Vec<Complex64>,
    ) -> Result<()> {
        let n = self.n;
        if input.len() != n || output.len() != n / 2 + 1 {
            return Err(Error::InvalidSize(format!(
                "rfft plan of length {n} got input {} / output {}",
                input.len(),
                output.len()
            )));
        }
        let m = n / 2;
        scratch.clear();
        scratch.extend(input.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])));
        self.complex_fft(scratch, false);

        let z0 = scratch[0];
        output[0] = Complex64::new(z0.re + z0.im, 0.0);
        output[m] = Complex64::new(z0.re - z0.im, 0.0);
        for k in 1..m {
            let zk = scratch[k];
            let zc = scratch[m - k].conj();
            let even = (zk + zc) * 0.5;
            let odd = (zk - zc) * Complex64::new(0.0, -0.5);
            output[k] = even + self.split[k] * odd;
        }
        Ok(())
    }

    /// Inverse of [`forward_into`](Self::forward_into). The imaginary parts of
    /// the first and last coefficients are ignored.
    pub fn inverse_into(
        &self,
        input: &[Complex64],
        output: &mut [f64],
        scratch: &mut Vec<Complex64>,
    ) -> Result<()> {
        let n = self.n;
        if input.len() != n / 2 + 1 || output.len() != n {
            return Err(Error::InvalidSize(format!(
                "irfft plan of length {n} got input {} / output {}",
                input.len(),
                output.len()
            )));
        }
        let m = n / 2;
        scratch.clear();
        scratch.resize(m, Complex64::new(0.0, 0.0));
        let first = input[0].re;
        let last = input[m].re;
        scratch[0] = Complex64::new(0.5 * (first + last), 0.5 * (first - last));
        for k in 1..m {
            let xk = input[k];
            let xc = input[m - k].conj();
            let even = (xk + xc) * 0.5;
            let odd = (xk - xc) * 0.5 * self.split[k].conj();
            scratch[k] = even + Complex64::new(0.0, 1.0) * odd;
        }
        self.complex_fft(scratch, true);
        let scale = 1.0 / m as f64;
        for (pair, z) in output.chunks_exact_mut(2).zip(scratch.iter()) {
            pair[0] = z.re * scale;
            pair[1] = z.im * scale;
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n / 2 + 1];
        self.forward_into(input, &mut out, &mut Vec::with_capacity(self.n / 2))?;
        Ok(out)
    }

    pub fn inverse(&self, input: &[Complex64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.inverse_into(input, &mut out, &mut Vec::with_capacity(self.n / 2))?;
        Ok(out)
    }
}

/// Real-input forward FFT; returns the `N/2 + 1` non-negative frequencies.
pub fn rfft(x: &[f64]) -> Result<Vec<Complex64>> {
    RealFftPlan::new(x.len())?.forward(x)
}

/// Inverse of [`rfft`] for an output length `n`.
pub fn irfft(spectrum: &[Complex64], n: usize) -> Result<Vec<f64>> {
    check_len(n)?;
    if spectrum.len() != n / 2 + 1 {
        return Err(Error::InvalidSize(format!(
            "irfft of length {n} needs {} coefficients, got {}",
            n / 2 + 1,
            spectrum.len()
        )));
    }
    RealFftPlan::new(n)?.inverse(spectrum)
}
