//! Synthetic traces with a known generating model: log-distance path loss
//! plus Normal fading, optionally with a direction-dependent offset.
//!
//! Used for the vendored example dataset and for tests that need ground
//! truth.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::channel::fspl_db;
use crate::dataset::{LinkBudget, Position, PositionPair, RawSample, DEFAULT_NOISE_FLOOR_DBM};
use crate::error::{Error, Result};
use crate::rng::{Purpose, StreamRng};

/// How the loss is written to each row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthOutput {
    /// `loss_db` directly.
    Loss,
    /// `snr_db` and `noise_dbm`, as a testbed would record them; needs the
    /// link budget to turn back into loss.
    Snr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_pairs: usize,
    pub samples_per_pair: usize,
    pub exponent: f64,
    pub reference_distance_m: f64,
    pub frequency_mhz: f64,
    pub fading_std_db: f64,
    /// Added to the loss when the transmitter has the smaller x coordinate.
    pub asymmetry_db: f64,
    /// Floor plan `[x, y]`, meters; nodes are placed uniformly inside it.
    pub area_m: [f64; 2],
    /// Antenna height range, meters.
    pub height_m: [f64; 2],
    pub min_distance_m: f64,
    /// Position grid, meters (positions are rounded to it).
    pub resolution_m: f64,
    pub output: SynthOutput,
    pub budget: LinkBudget,
    pub noise_floor_dbm: f64,
    pub seed: u64,
    pub stream_id: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_pairs: 500,
            samples_per_pair: 30,
            exponent: 1.7,
            reference_distance_m: 1.0,
            frequency_mhz: 5220.0,
            fading_std_db: 3.0,
            asymmetry_db: 0.0,
            area_m: [80.0, 50.0],
            height_m: [1.0, 2.0],
            min_distance_m: 2.0,
            resolution_m: 0.01,
            output: SynthOutput::Loss,
            budget: LinkBudget::warehouse(),
            noise_floor_dbm: DEFAULT_NOISE_FLOOR_DBM,
            seed: 0,
            stream_id: 0,
        }
    }
}

impl SynthConfig {
    /// Noise-free loss of the generating model.
    pub fn path_loss(&self, pair: &PositionPair) -> f64 {
        let d = pair.distance().max(f64::MIN_POSITIVE);
        let mut l = fspl_db(self.reference_distance_m, self.frequency_mhz)
            + 10.0 * self.exponent * (d / self.reference_distance_m).log10();
        if pair.tx.x < pair.rx.x {
            l += self.asymmetry_db;
        }
        l
    }

    fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 || self.samples_per_pair == 0 {
            return Err(Error::validation(
                "n_pairs and samples_per_pair must be >= 1",
            ));
        }
        if !(self.fading_std_db >= 0.0) {
            return Err(Error::validation("fading_std_db must be >= 0"));
        }
        if !(self.resolution_m > 0.0) || !(self.reference_distance_m > 0.0) {
            return Err(Error::validation(
                "resolution and reference distance must be > 0",
            ));
        }
        let diag = self.area_m[0].hypot(self.area_m[1]);
        if !(self.min_distance_m < diag) {
            return Err(Error::validation(
                "min_distance_m does not fit inside the area",
            ));
        }
        Ok(())
    }
}

/// Distinct transmitter/receiver pairs at least `min_distance_m` apart.
pub fn generate_pairs(cfg: &SynthConfig) -> Result<Vec<PositionPair>> {
    cfg.validate()?;
    let mut rng = StreamRng::new(cfg.seed, cfg.stream_id, Purpose::Synthetic, 0);
    let q = cfg.resolution_m;
    // dividing by the inverse step keeps decimal grids exact, e.g. 1.66 rather than 1.6600000000000001
    let snap = |v: f64| (v / q).round() / (1.0 / q);
    let place = |rng: &mut StreamRng| {
        Position::new(
            snap(rng.random_range(0.0..=cfg.area_m[0])),
            snap(rng.random_range(0.0..=cfg.area_m[1])),
            snap(rng.random_range(cfg.height_m[0]..=cfg.height_m[1])),
        )
    };
    let mut seen = std::collections::HashSet::new();
    let mut pairs = Vec::with_capacity(cfg.n_pairs);
    let mut attempts = 0usize;
    while pairs.len() < cfg.n_pairs {
        attempts += 1;
        if attempts > 1000 * cfg.n_pairs + 1000 {
            return Err(Error::validation("could not place enough distinct pairs"));
        }
        let p = PositionPair::new(place(&mut rng), place(&mut rng));
        if p.distance() >= cfg.min_distance_m && seen.insert(p) {
            pairs.push(p);
        }
    }
    Ok(pairs)
}

/// Rows for every pair, `samples_per_pair` each, pair by pair.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<RawSample>> {
    let pairs = generate_pairs(cfg)?;
    let mut rng = StreamRng::new(cfg.seed, cfg.stream_id, Purpose::Synthetic, 1);
    let fading =
        Normal::new(0.0, cfg.fading_std_db).map_err(|e| Error::validation(e.to_string()))?;
    let mut rows = Vec::with_capacity(pairs.len() * cfg.samples_per_pair);
    for pair in &pairs {
        let pl = cfg.path_loss(pair);
        for _ in 0..cfg.samples_per_pair {
            let loss = pl + fading.sample(&mut rng);
            rows.push(match cfg.output {
                SynthOutput::Loss => RawSample::with_loss(*pair, loss),
                SynthOutput::Snr => {
                    let rx = cfg.budget.eirp_with_rx_gain() - loss;
                    RawSample {
                        pair: *pair,
                        loss: None,
                        snr: Some(rx - cfg.noise_floor_dbm),
                        noise_floor: Some(cfg.noise_floor_dbm),
                        rx_power: None,
                        throughput: None,
                    }
                }
            });
        }
    }
    Ok(rows)
}
