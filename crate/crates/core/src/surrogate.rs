//! Trained surrogates: a network plus the normalization it was trained with,
//! stored and loaded as a versioned checkpoint.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fno::{encode_input, interpolate_series, FnoConfig, FnoModel, FnoWorkspace};
use crate::io;
use crate::mlp::{MlpCache, MlpModel};
use crate::pipeline::normalize::NormStats;
use crate::thermal::ProcessParameters;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Operator network predicting the two scalar QoIs.
    Fno,
    /// Fully connected baseline for the scalar QoIs.
    Dnn,
    /// Operator network predicting both QoI time series.
    FnoSeries,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Fno, ModelKind::Dnn, ModelKind::FnoSeries];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Fno => "fno",
            ModelKind::Dnn => "dnn",
            ModelKind::FnoSeries => "fno-series",
        }
    }

    pub fn is_series(self) -> bool {
        self == ModelKind::FnoSeries
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model kind {s:?} (fno, dnn, fno-series)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Network {
    Fno(FnoModel),
    Mlp(MlpModel),
}

/// A network with its input and target normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surrogate {
    pub kind: ModelKind,
    pub network: Network,
    pub input_stats: NormStats,
    /// Scalar-target statistics, or per-channel series statistics.
    pub target_stats: NormStats,
    /// Length of predicted series; 0 for scalar models.
    pub series_len: usize,
    /// Provenance hash of the dataset used for training.
    pub dataset_hash: String,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format_version: u32,
    model_kind: ModelKind,
    surrogate: Surrogate,
}

/// Normalized predictions: `[volume, temperature]` for scalar models,
/// channel-major `2 x grid` for series models.
pub type RawOutput = Vec<f64>;

impl Surrogate {
    pub fn validate(&self) -> Result<()> {
        match (&self.network, self.kind) {
            (Network::Fno(m), ModelKind::Fno | ModelKind::FnoSeries) => m.validate()?,
            (Network::Mlp(m), ModelKind::Dnn) => m.validate()?,
            _ => {
                return Err(Error::Config(format!(
                    "model kind {} does not match its network",
                    self.kind
                )))
            }
        }
        if self.input_stats.columns() != 5 || self.target_stats.columns() != 2 {
            return Err(Error::Config("normalization statistics have the wrong width".into()));
        }
        if self.kind.is_series() != (self.series_len > 0) {
            return Err(Error::Config("series length does not match model kind".into()));
        }
        Ok(())
    }

    pub fn normalize_inputs(&self, params: &[ProcessParameters]) -> Vec<[f64; 5]> {
        params
            .iter()
            .map(|p| {
                let v = self.input_stats.apply_row(&p.to_array());
                [v[0], v[1], v[2], v[3], v[4]]
            })
            .collect()
    }

    pub fn fno_config(&self) -> Option<&FnoConfig> {
        match &self.network {
            Network::Fno(m) => Some(&m.config),
            Network::Mlp(_) => None,
        }
    }

    /// Network outputs in normalized target space. `grid_n` applies to
    /// operator networks and defaults to their training grid.
    pub fn forward_normalized(&self, x: &[[f64; 5]], grid_n: Option<usize>) -> Result<Vec<RawOutput>> {
        match &self.network {
            Network::Fno(m) => {
                let n = grid_n.unwrap_or(m.config.grid_n);
                let batch = encode_input(x, n);
                let mut ws = FnoWorkspace::new(n)?;
                if m.config.n_modes > n / 2 + 1 {
                    return Err(Error::InvalidSize(format!("grid {n} cannot hold {} modes", m.config.n_modes)));
                }
                Ok((0..x.len())
                    .map(|b| {
                        let out = m.forward_sample(batch.sample(b), &mut ws);
                        if self.kind.is_series() {
                            out.to_vec()
                        } else {
                            out.chunks_exact(n).map(|c| c.iter().sum::<f64>() / n as f64).collect()
                        }
                    })
                    .collect())
            }
            Network::Mlp(m) => {
                let flat: Vec<f64> = x.iter().flatten().copied().collect();
                let mut cache = MlpCache::default();
                m.forward_cached(&flat, x.len(), &mut cache);
                Ok(cache.output().chunks_exact(2).map(|c| c.to_vec()).collect())
            }
        }
    }

    /// Predicted `[bead volume (mm^3), max temperature (K)]` per input.
    pub fn predict_scalar(&self, params: &[ProcessParameters]) -> Result<Vec<[f64; 2]>> {
        if self.kind.is_series() {
            return Err(Error::Config("series model has no scalar head".into()));
        }
        let out = self.forward_normalized(&self.normalize_inputs(params), None)?;
        Ok(out
            .iter()
            .map(|o| {
                let v = self.target_stats.invert_row(o);
                [v[0], v[1]]
            })
            .collect())
    }

    /// Predicted `[volume series, temperature series]` at `series_len` steps,
    /// evaluating the operator on an internal grid of `grid_n` points.
    pub fn predict_series_on_grid(&self, params: &[ProcessParameters], grid_n: usize) -> Result<Vec<[Vec<f64>; 2]>> {
        if !self.kind.is_series() {
            return Err(Error::Config(format!("{} model does not predict series", self.kind)));
        }
        let out = self.forward_normalized(&self.normalize_inputs(params), Some(grid_n))?;
        Ok(out
            .iter()
            .map(|o| {
                std::array::from_fn(|c| {
                    let (m, s) = (self.target_stats.mean[c], self.target_stats.std[c]);
                    interpolate_series(&o[c * grid_n..(c + 1) * grid_n], self.series_len)
                        .into_iter()
                        .map(|v| v * s + m)
                        .collect()
                })
            })
            .collect())
    }

    pub fn predict_series(&self, params: &[ProcessParameters]) -> Result<Vec<[Vec<f64>; 2]>> {
        let n = self.fno_config().map_or(0, |c| c.grid_n);
        self.predict_series_on_grid(params, n)
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let file = CheckpointFile {
            format_version: CHECKPOINT_FORMAT_VERSION,
            model_kind: self.kind,
            surrogate: self.clone(),
        };
        Ok(serde_json::to_vec(&file)?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format_version: u32,
        }
        let header: Header =
            serde_json::from_slice(bytes).map_err(|e| Error::Data(format!("not a checkpoint file: {e}")))?;
        if header.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::SchemaVersion {
                what: "checkpoint",
                found: header.format_version,
                expected: CHECKPOINT_FORMAT_VERSION,
            });
        }
        let file: CheckpointFile =
            serde_json::from_slice(bytes).map_err(|e| Error::Data(format!("malformed checkpoint: {e}")))?;
        if file.model_kind != file.surrogate.kind {
            return Err(Error::Data("checkpoint kind tag disagrees with its contents".into()));
        }
        file.surrogate.validate()?;
        Ok(file.surrogate)
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
    use crate::mlp::MlpConfig;

    fn stats(cols: usize) -> NormStats {
        NormStats {
            mean: (0..cols).map(|i| i as f64 * 0.3).collect(),
            std: (0..cols).map(|i| 1.0 + i as f64).collect(),
        }
    }

    fn small_fno(kind: ModelKind) -> Surrogate {
        let cfg = FnoConfig {
            width: 4,
            grid_n: 32,
            n_modes: if kind.is_series() { 6 } else { 3 },
            ..FnoConfig::scalar()
        };
        Surrogate {
            kind,
            network: Network::Fno(FnoModel::new(cfg, 1).unwrap()),
            input_stats: stats(5),
            target_stats: stats(2),
            series_len: if kind.is_series() { 20 } else { 0 },
            dataset_hash: "abc".into(),
        }
    }

    fn small_dnn() -> Surrogate {
        Surrogate {
            kind: ModelKind::Dnn,
            network: Network::Mlp(MlpModel::new(MlpConfig::new(5, &[6, 4], 2), 2).unwrap()),
            input_stats: stats(5),
            target_stats: stats(2),
            series_len: 0,
            dataset_hash: "abc".into(),
        }
    }

    #[test]
    fn kind_names_parse() {
        for k in ModelKind::ALL {
            assert_eq!(k.name().parse::<ModelKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.name()));
        }
        assert!("cnn".parse::<ModelKind>().is_err());
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let p = [ProcessParameters::nominal()];
        for s in [small_fno(ModelKind::Fno), small_dnn(), small_fno(ModelKind::FnoSeries)] {
            let back = Surrogate::from_json(&s.to_json().unwrap()).unwrap();
            assert_eq!(back, s);
            if s.kind.is_series() {
                assert_eq!(back.predict_series(&p).unwrap(), s.predict_series(&p).unwrap());
            } else {
                let a = s.predict_scalar(&p).unwrap();
                let b = back.predict_scalar(&p).unwrap();
                assert_eq!(a[0].map(f64::to_bits), b[0].map(f64::to_bits));
            }
        }
    }

    #[test]
    fn checkpoint_rejects_other_versions_and_mismatches() {
        let s = small_dnn();
        let text = String::from_utf8(s.to_json().unwrap()).unwrap();
        let bumped = text.replacen("\"format_version\":1", "\"format_version\":7", 1);
        assert!(matches!(
            Surrogate::from_json(bumped.as_bytes()),
            Err(Error::SchemaVersion { found: 7, .. })
        ));
        let mut bad = small_dnn();
        bad.kind = ModelKind::Fno;
        assert!(Surrogate::from_json(&bad.to_json().unwrap()).is_err());
    }

    #[test]
    fn series_output_has_requested_length() {
        let s = small_fno(ModelKind::FnoSeries);
        let out = s.predict_series(&[ProcessParameters::nominal(); 2]).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0][0].len(), 20);
        assert!(s.predict_scalar(&[ProcessParameters::nominal()]).is_err());
        assert!(small_dnn().predict_series(&[ProcessParameters::nominal()]).is_err());
    }
}
