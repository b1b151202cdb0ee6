//! Experiment protocol: sampling, dataset generation, splitting,
//! normalization, training, metrics and reports.

pub mod benchmark;
pub mod dataset;
pub mod evaluate;
pub mod metrics;
pub mod normalize;
pub mod sampling;
pub mod split;
pub mod train;

pub use benchmark::{benchmark, write_benchmark, BenchmarkReport};
pub use dataset::{generate_dataset, generate_dataset_with, Dataset, DivergencePolicy, GenerationSummary};
pub use evaluate::{evaluate_scalar, evaluate_series, train_and_evaluate, train_series, EvalReport};
pub use normalize::NormStats;
pub use sampling::sample_parameters;
pub use split::{split, Split};
pub use train::{train, train_from, TrainConfig, TrainHistory};
