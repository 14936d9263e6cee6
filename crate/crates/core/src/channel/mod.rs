//! Propagation-loss models.
//!
//! [`PropagationModel::Pmlpl`] is the trained composite model: a path-loss
//! regressor behind a memoizing cache, plus one draw from the fitted
//! fast-fading CDF per loss query. Friis and log-distance models, optionally
//! with Normal fading, serve as baselines.

mod cache;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use cache::{CacheKey, CacheStats, PathLossCache, DEFAULT_CAPACITY, DEFAULT_QUANTUM_M};

use crate::dataset::PositionPair;
use crate::error::{Error, Result};
use crate::fading::{import_cdf, FadingCdf, FadingSampler};
use crate::regress::{load_model, FeatureVector, PathLossRegressor};
use crate::rng::{Purpose, StreamRng};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space path loss in dB at distance `d` meters and `frequency_mhz`:
/// `20 log10(d) + 20 log10(f) + 20 log10(4 pi / c)`.
pub fn fspl_db(distance_m: f64, frequency_mhz: f64) -> f64 {
    let f_hz = frequency_mhz * 1e6;
    20.0 * distance_m.log10()
        + 20.0 * f_hz.log10()
        + 20.0 * (4.0 * std::f64::consts::PI / SPEED_OF_LIGHT).log10()
}

/// Gaussian fading in dB drawn from its own stream.
#[derive(Debug, Clone)]
pub struct NormalFading {
    dist: Normal<f64>,
    rng: StreamRng,
}

impl NormalFading {
    pub fn new(mean_db: f64, std_db: f64, rng: StreamRng) -> Result<Self> {
        let dist = Normal::new(mean_db, std_db)
            .map_err(|e| Error::validation(format!("invalid normal fading: {e}")))?;
        Ok(Self { dist, rng })
    }

    pub fn sample(&mut self) -> f64 {
        self.dist.sample(&mut self.rng)
    }

    pub fn mean(&self) -> f64 {
        self.dist.mean()
    }

    pub fn std_dev(&self) -> f64 {
        self.dist.std_dev()
    }
}

/// Trained composite model.
#[derive(Debug, Clone)]
pub struct PmlplModel {
    regressor: Arc<PathLossRegressor>,
    fading: FadingSampler,
    cache: PathLossCache,
}

impl PmlplModel {
    pub fn regressor(&self) -> &PathLossRegressor {
        &self.regressor
    }

    pub fn fading_cdf(&self) -> &FadingCdf {
        self.fading.cdf()
    }
}

#[derive(Debug, Clone)]
pub struct FriisModel {
    pub frequency_mhz: f64,
    pub fading: Option<NormalFading>,
}

#[derive(Debug, Clone)]
pub struct LogDistanceModel {
    pub exponent: f64,
    pub reference_distance_m: f64,
    pub reference_loss_db: f64,
    pub fading: Option<NormalFading>,
}

#[derive(Debug, Clone)]
pub enum PropagationModel {
    Pmlpl(PmlplModel),
    Friis(FriisModel),
    LogDistance(LogDistanceModel),
}

fn checked_distance(pair: &PositionPair) -> Result<f64> {
    let d = pair.distance();
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::validation(format!(
            "distance-based model undefined at distance {d} for {pair}"
        )));
    }
    Ok(d)
}

impl PropagationModel {
    /// Composite model whose fading draws come from stream
    /// `(seed, stream_id, Fading)`, with a default-sized cache.
    pub fn pmlpl(
        regressor: Arc<PathLossRegressor>,
        cdf: Arc<FadingCdf>,
        seed: u64,
        stream_id: u64,
    ) -> Self {
        PropagationModel::Pmlpl(PmlplModel {
            regressor,
            fading: FadingSampler::new(cdf, StreamRng::new(seed, stream_id, Purpose::Fading, 0)),
            cache: PathLossCache::default(),
        })
    }

    pub fn friis(frequency_mhz: f64) -> Self {
        PropagationModel::Friis(FriisModel {
            frequency_mhz,
            fading: None,
        })
    }

    /// Log-distance model whose reference loss is the free-space loss at the
    /// reference distance.
    pub fn log_distance(exponent: f64, reference_distance_m: f64, frequency_mhz: f64) -> Self {
        PropagationModel::LogDistance(LogDistanceModel {
            exponent,
            reference_distance_m,
            reference_loss_db: fspl_db(reference_distance_m, frequency_mhz),
            fading: None,
        })
    }

    /// Adds Normal fading to a baseline model. Has no effect on P-MLPL.
    pub fn with_normal_fading(
        mut self,
        mean_db: f64,
        std_db: f64,
        seed: u64,
        stream_id: u64,
    ) -> Result<Self> {
        let fading = NormalFading::new(
            mean_db,
            std_db,
            StreamRng::new(seed, stream_id, Purpose::Fading, 0),
        )?;
        match &mut self {
            PropagationModel::Friis(m) => m.fading = Some(fading),
            PropagationModel::LogDistance(m) => m.fading = Some(fading),
            PropagationModel::Pmlpl(_) => {}
        }
        Ok(self)
    }

    pub fn label(&self) -> String {
        match self {
            PropagationModel::Pmlpl(m) => format!("P-MLPL ({})", m.regressor.kind()),
            PropagationModel::Friis(_) => "Friis".into(),
            PropagationModel::LogDistance(m) => format!("Log-Distance (gamma={})", m.exponent),
        }
    }

    /// Deterministic path loss in dB.
    pub fn path_loss(&mut self, pair: &PositionPair) -> Result<f64> {
        match self {
            PropagationModel::Pmlpl(m) => {
                let regressor = &m.regressor;
                Ok(m.cache
                    .get_or_insert_with(pair, || regressor.predict(&FeatureVector::from(pair))))
            }
            PropagationModel::Friis(m) => Ok(fspl_db(checked_distance(pair)?, m.frequency_mhz)),
            PropagationModel::LogDistance(m) => {
                let d = checked_distance(pair)?;
                Ok(m.reference_loss_db + 10.0 * m.exponent * (d / m.reference_distance_m).log10())
            }
        }
    }

    /// One fading draw (0 for baselines without fading).
    pub fn fading_sample(&mut self) -> f64 {
        match self {
            PropagationModel::Pmlpl(m) => m.fading.sample(),
            PropagationModel::Friis(FriisModel { fading, .. })
            | PropagationModel::LogDistance(LogDistanceModel { fading, .. }) => {
                fading.as_mut().map_or(0.0, NormalFading::sample)
            }
        }
    }

    /// Path loss plus exactly one fading draw.
    pub fn total_loss(&mut self, pair: &PositionPair) -> Result<f64> {
        let pl = self.path_loss(pair)?;
        Ok(pl + self.fading_sample())
    }

    /// Received power: `tx_power + tx_gain + rx_gain - total_loss`.
    pub fn rx_power(
        &mut self,
        tx_power_dbm: f64,
        tx_gain_dbi: f64,
        rx_gain_dbi: f64,
        pair: &PositionPair,
    ) -> Result<f64> {
        Ok(tx_power_dbm + tx_gain_dbi + rx_gain_dbi - self.total_loss(pair)?)
    }

    /// Cache counters since the last clear; all zero for baselines.
    pub fn cache_stats(&self) -> CacheStats {
        match self {
            PropagationModel::Pmlpl(m) => m.cache.stats(),
            _ => CacheStats::default(),
        }
    }

    /// Capacity 0 disables caching.
    pub fn cache_configure(&mut self, capacity: usize, quantum_m: f64) -> Result<()> {
        if !(quantum_m > 0.0 && quantum_m.is_finite()) {
            return Err(Error::validation("cache quantum must be positive"));
        }
        if let PropagationModel::Pmlpl(m) = self {
            m.cache.configure(capacity, quantum_m);
        }
        Ok(())
    }

    pub fn cache_clear(&mut self) {
        if let PropagationModel::Pmlpl(m) = self {
            m.cache.clear();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    Pmlpl,
    Friis,
    LogDistance,
}

fn default_capacity() -> usize {
    DEFAULT_CAPACITY
}
fn default_quantum() -> f64 {
    DEFAULT_QUANTUM_M
}
fn default_frequency() -> f64 {
    5220.0
}
fn default_exponent() -> f64 {
    1.7
}
fn default_reference_distance() -> f64 {
    1.0
}

/// File form of a model assembly. Relative paths resolve against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub variant: ModelVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regressor_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cdf_path: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stream_id: u64,
    #[serde(default = "default_capacity")]
    pub cache_capacity: usize,
    #[serde(default = "default_quantum")]
    pub cache_quantum_m: f64,
    #[serde(default = "default_frequency")]
    pub frequency_mhz: f64,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
    #[serde(default = "default_reference_distance")]
    pub reference_distance_m: f64,
    /// Standard deviation of Normal fading for baselines; absent disables it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fading_std_db: Option<f64>,
    #[serde(default)]
    pub fading_mean_db: f64,
}

impl ModelConfig {
    pub fn new(variant: ModelVariant) -> Self {
        Self {
            variant,
            regressor_path: None,
            cdf_path: None,
            seed: 0,
            stream_id: 0,
            cache_capacity: DEFAULT_CAPACITY,
            cache_quantum_m: DEFAULT_QUANTUM_M,
            frequency_mhz: default_frequency(),
            exponent: default_exponent(),
            reference_distance_m: default_reference_distance(),
            fading_std_db: None,
            fading_mean_db: 0.0,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ModelConfig = serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.regressor_path, &mut cfg.cdf_path]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Loads the referenced files and assembles the model.
    pub fn build(&self) -> Result<PropagationModel> {
        let mut model = match self.variant {
            ModelVariant::Pmlpl => {
                let reg = self
                    .regressor_path
                    .as_ref()
                    .ok_or_else(|| Error::validation("pmlpl model config needs regressor_path"))?;
                let cdf = self
                    .cdf_path
                    .as_ref()
                    .ok_or_else(|| Error::validation("pmlpl model config needs cdf_path"))?;
                PropagationModel::pmlpl(
                    Arc::new(load_model(reg)?),
                    Arc::new(import_cdf(cdf)?),
                    self.seed,
                    self.stream_id,
                )
            }
            ModelVariant::Friis => PropagationModel::friis(self.frequency_mhz),
            ModelVariant::LogDistance => PropagationModel::log_distance(
                self.exponent,
                self.reference_distance_m,
                self.frequency_mhz,
            ),
        };
        if let Some(std) = self.fading_std_db {
            model =
                model.with_normal_fading(self.fading_mean_db, std, self.seed, self.stream_id)?;
        }
        model.cache_configure(self.cache_capacity, self.cache_quantum_m)?;
        Ok(model)
    }
}
