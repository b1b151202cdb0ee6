use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::normalize::NormStats;
use super::sampling::sample_parameters;
use super::split::{split, Split};
use crate::error::{Error, Result};
use crate::io;
use crate::thermal::{self, ProcessParameters, SimulationRecord, ThermalConfig};

pub const DATASET_SCHEMA_VERSION: u32 = 1;

/// Names and units of the two scalar targets, in column order.
pub const QOI_NAMES: [&str; 2] = ["bead_volume", "max_temperature"];
pub const QOI_UNITS: [&str; 2] = ["mm^3", "K"];

/// What produced a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub thermal: ThermalConfig,
    /// Hex SHA-256 of the thermal configuration and seed.
    pub hash: String,
}

impl Provenance {
    pub fn new(thermal: &ThermalConfig, seed: u64) -> Self {
        Provenance {
            seed,
            thermal: *thermal,
            hash: provenance_hash(thermal, seed),
        }
    }
}

pub fn provenance_hash(thermal: &ThermalConfig, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(thermal).expect("config serializes"));
    h.update(seed.to_le_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub requested: usize,
    pub retained: usize,
    /// Runs that never reached the melting point.
    pub no_melt: usize,
    /// Sample indices whose simulation diverged and was dropped.
    pub diverged: Vec<usize>,
}

/// Simulated samples with their split and normalization statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub summary: GenerationSummary,
    /// Raw `[P, v, r, eta, alpha]` per sample.
    pub inputs: Vec<[f64; 5]>,
    /// `[bead volume, max temperature]` per sample.
    pub scalar_targets: Vec<[f64; 2]>,
    pub series_volume: Vec<Vec<f64>>,
    pub series_temp: Vec<Vec<f64>>,
    pub split: Split,
    /// Fitted on training rows only.
    pub input_stats: NormStats,
    pub scalar_stats: NormStats,
    /// One column per series channel, pooled over time steps.
    pub series_stats: NormStats,
}

/// How [`generate_dataset_with`] treats a diverged simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergencePolicy {
    Fail,
    Drop,
}

/// Runs the simulations for `params`, spreading them over worker threads.
/// Results come back in input order.
pub fn simulate_all(params: &[ProcessParameters], thermal: &ThermalConfig) -> Vec<Result<SimulationRecord>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(params.len().max(1));
    if workers <= 1 {
        return params
            .iter()
            .map(|p| thermal::run(p, &thermal.material, &thermal.grid))
            .collect();
    }
    let chunk = params.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = params
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .map(|p| thermal::run(p, &thermal.material, &thermal.grid))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("simulation worker panicked"))
            .collect()
    })
}

/// Samples `n` parameter sets, simulates each, drops runs that never melted
/// and splits the rest. Diverged runs are an error naming the sample.
pub fn generate_dataset(n: usize, seed: u64, thermal: &ThermalConfig) -> Result<Dataset> {
    generate_dataset_with(n, seed, thermal, DivergencePolicy::Fail)
}

pub fn generate_dataset_with(
    n: usize,
    seed: u64,
    thermal: &ThermalConfig,
    policy: DivergencePolicy,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Config("requested sample count must be >= 1".into()));
    }
    thermal.grid.validate(&thermal.material)?;
    thermal.material.validate_transport()?;
    let params = sample_parameters(n, seed);
    let mut summary = GenerationSummary {
        requested: n,
        retained: 0,
        no_melt: 0,
        diverged: Vec::new(),
    };
    let mut kept = Vec::new();
    for (i, rec) in simulate_all(&params, thermal).into_iter().enumerate() {
        match rec {
            Ok(r) if r.melted => kept.push(r),
            Ok(_) => summary.no_melt += 1,
            Err(Error::SimulationDiverged { step, .. }) => match policy {
                DivergencePolicy::Fail => {
                    return Err(Error::SimulationDiverged { step, sample: Some(i) })
                }
                DivergencePolicy::Drop => summary.diverged.push(i),
            },
            Err(e) => return Err(e),
        }
    }
    summary.retained = kept.len();
    Dataset::from_records(&kept, Provenance::new(thermal, seed), summary)
}

/// Seed of the train/validation/test shuffle, kept apart from the sampling stream.
fn split_seed(seed: u64) -> u64 {
    seed ^ 0x5EED_5717_0000_0001
}

impl Dataset {
    pub fn from_records(records: &[SimulationRecord], provenance: Provenance, summary: GenerationSummary) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset(format!(
                "no melting runs among {} requested samples",
                summary.requested
            )));
        }
        let split = split(records.len(), split_seed(provenance.seed))?;
        let mut ds = Dataset {
            schema_version: DATASET_SCHEMA_VERSION,
            provenance,
            summary,
            inputs: records.iter().map(|r| r.params.to_array()).collect(),
            scalar_targets: records.iter().map(|r| [r.bead_volume, r.max_temp]).collect(),
            series_volume: records.iter().map(|r| r.series_volume.clone()).collect(),
            series_temp: records.iter().map(|r| r.series_temp.clone()).collect(),
            split,
            input_stats: NormStats { mean: vec![], std: vec![] },
            scalar_stats: NormStats { mean: vec![], std: vec![] },
            series_stats: NormStats { mean: vec![], std: vec![] },
        };
        ds.refit_stats()?;
        Ok(ds)
    }

    /// Recomputes normalization statistics from the training rows.
    pub fn refit_stats(&mut self) -> Result<()> {
        let train = &self.split.train;
        let rows: Vec<[f64; 5]> = train.iter().map(|&i| self.inputs[i]).collect();
        self.input_stats = NormStats::fit(&rows)?;
        let rows: Vec<[f64; 2]> = train.iter().map(|&i| self.scalar_targets[i]).collect();
        self.scalar_stats = NormStats::fit(&rows)?;
        let vol = NormStats::fit_pooled(train.iter().flat_map(|&i| &self.series_volume[i]))?;
        let temp = NormStats::fit_pooled(train.iter().flat_map(|&i| &self.series_temp[i]))?;
        self.series_stats = NormStats {
            mean: vec![vol.mean[0], temp.mean[0]],
            std: vec![vol.std[0], temp.std[0]],
        };
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn series_len(&self) -> usize {
        self.series_temp.first().map_or(0, Vec::len)
    }

    pub fn params(&self, i: usize) -> ProcessParameters {
        ProcessParameters::from_array(self.inputs[i])
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != DATASET_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                what: "dataset",
                found: self.schema_version,
                expected: DATASET_SCHEMA_VERSION,
            });
        }
        let n = self.len();
        if n == 0 {
            return Err(Error::EmptyDataset("dataset has no samples".into()));
        }
        if self.scalar_targets.len() != n || self.series_temp.len() != n || self.series_volume.len() != n {
            return Err(Error::Data("dataset columns have different lengths".into()));
        }
        let steps = self.series_len();
        if steps == 0
            || self
                .series_temp
                .iter()
                .chain(&self.series_volume)
                .any(|s| s.len() != steps)
        {
            return Err(Error::Data("series targets must share one nonzero length".into()));
        }
        self.split.validate(n)?;
        if self.input_stats.columns() != 5 || self.scalar_stats.columns() != 2 || self.series_stats.columns() != 2 {
            return Err(Error::Data("normalization statistics have the wrong width".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(self)?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            schema_version: u32,
        }
        let header: Header = serde_json::from_slice(bytes)
            .map_err(|e| Error::Data(format!("not a dataset file: {e}")))?;
        if header.schema_version != DATASET_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                what: "dataset",
                found: header.schema_version,
                expected: DATASET_SCHEMA_VERSION,
            });
        }
        let ds: Dataset = serde_json::from_slice(bytes).map_err(|e| Error::Data(format!("malformed dataset: {e}")))?;
        ds.validate()?;
        Ok(ds)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, &self.to_json()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&io::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ThermalConfig {
        let mut c = ThermalConfig::reference();
        c.grid.nx = 24;
        c.grid.n_steps = 20;
        c.grid.substeps = 2;
        c.grid.scan_start = 0.2;
        c
    }

    #[test]
    fn zero_melt_point_keeps_everything() {
        let mut c = tiny_config();
        c.material.t_melt = 0.0;
        let ds = generate_dataset(12, 3, &c).unwrap();
        assert_eq!(ds.len(), 12);
        assert_eq!(ds.summary.no_melt, 0);
        assert_eq!(ds.split.test.len(), 2);
        ds.validate().unwrap();
    }

    #[test]
    fn unreachable_melt_point_is_empty() {
        let mut c = tiny_config();
        c.material.t_melt = 1e9;
        assert!(matches!(generate_dataset(3, 1, &c), Err(Error::EmptyDataset(_))));
    }

    #[test]
    fn deterministic_bytes_and_json_round_trip() {
        let mut c = tiny_config();
        c.material.t_melt = 0.0;
        let a = generate_dataset(10, 9, &c).unwrap();
        let b = generate_dataset(10, 9, &c).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let back = Dataset::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn stats_ignore_test_rows() {
        let mut c = tiny_config();
        c.material.t_melt = 0.0;
        let mut ds = generate_dataset(20, 4, &c).unwrap();
        let before = (ds.input_stats.clone(), ds.scalar_stats.clone(), ds.series_stats.clone());
        let t = ds.split.test[0];
        ds.inputs[t][0] += 100.0;
        ds.scalar_targets[t][1] *= 3.0;
        ds.series_temp[t][5] = -1.0;
        ds.refit_stats().unwrap();
        assert_eq!((ds.input_stats, ds.scalar_stats, ds.series_stats), before);
    }

    #[test]
    fn rejects_other_schema_versions() {
        let mut c = tiny_config();
        c.material.t_melt = 0.0;
        let mut ds = generate_dataset(10, 2, &c).unwrap();
        ds.schema_version = 99;
        let err = Dataset::from_json(&ds.to_json().unwrap()).unwrap_err();
        assert!(matches!(err, Error::SchemaVersion { found: 99, .. }));
    }

    #[test]
    fn hash_depends_on_seed_and_config() {
        let c = tiny_config();
        let mut d = c;
        d.material.k *= 1.01;
        assert_ne!(provenance_hash(&c, 1), provenance_hash(&c, 2));
        assert_ne!(provenance_hash(&c, 1), provenance_hash(&d, 1));
        assert_eq!(provenance_hash(&c, 1).len(), 64);
    }
}
