//! Array arithmetic, FFT, activations, loss, optimizer and gradient checking.

pub mod activation;
pub mod adam;
pub mod array;
pub mod fft;
pub mod gradcheck;
pub mod linalg;
pub mod loss;
pub mod params;

pub use activation::{gelu, gelu_grad, relu, relu_grad};
pub use adam::{adam_update, AdamConfig, AdamState};
pub use array::{ComplexArray, RealArray};
pub use fft::{irfft, rfft, RealFftPlan};
pub use gradcheck::{grad_check, grad_check_at, GradCheckReport};
pub use linalg::{affine, affine_backward, AffineGrads};
pub use loss::{mse, mse_grad};
pub use params::Parameters;
