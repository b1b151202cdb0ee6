//! Surrogate models for laser melt-pool simulations: a moving-source heat
//! conduction solver generates training data, and a Fourier neural operator
//! and a fully connected baseline learn the map from process parameters to
//! bead volume and peak temperature.

pub mod cli;
pub mod error;
pub mod fno;
pub mod io;
pub mod mlp;
pub mod numerics;
pub mod pipeline;
pub mod surrogate;
pub mod thermal;

pub use error::{Error, Result};
pub use surrogate::{ModelKind, Surrogate};
