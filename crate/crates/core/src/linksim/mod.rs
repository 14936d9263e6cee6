//! Single-link 802.11a simulator.
//!
//! Each position pair is simulated independently as one saturated UDP flow:
//! a CBR source fills a finite queue, the MAC sends one frame at a time with
//! the airtime of [`phy::airtime_ns`], and every attempt draws a fresh
//! received power from the propagation model. Frames under the preamble
//! threshold are not detected; detected frames succeed with probability
//! [`phy::success_probability`]. There are no retransmissions. Time is kept
//! in integer nanoseconds so event order is exact.

pub mod bench;
pub mod minstrel;
pub mod phy;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::channel::{CacheStats, PropagationModel};
use crate::dataset::{LinkBudget, PositionPair, DEFAULT_NOISE_FLOOR_DBM};
use crate::error::{Error, Result};
use crate::rng::{Purpose, StreamRng};

pub use bench::{benchmark, BenchCase, BenchReport, BenchRow};
pub use minstrel::{Feedback, MinstrelLite};
pub use phy::{airtime, airtime_ns, success_probability, RATES_MBPS};

pub const RESULTS_HEADER: [&str; 9] = [
    "tx_x",
    "tx_y",
    "tx_z",
    "rx_x",
    "rx_y",
    "rx_z",
    "throughput_mbps",
    "delivered",
    "lost",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateAdaptation {
    MinstrelLite,
    /// Every frame at this rate, Mbit/s.
    Fixed(u32),
}

fn d_budget() -> LinkBudget {
    LinkBudget::warehouse()
}
fn d_offered() -> f64 {
    54.0
}
fn d_payload() -> u64 {
    1400
}
fn d_warmup() -> f64 {
    1.0
}
fn d_measure() -> f64 {
    5.0
}
fn d_preamble() -> f64 {
    -90.0
}
fn d_noise() -> f64 {
    DEFAULT_NOISE_FLOOR_DBM
}
fn d_adaptation() -> RateAdaptation {
    RateAdaptation::MinstrelLite
}
fn d_true() -> bool {
    true
}
fn d_queue() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSimConfig {
    #[serde(default = "d_budget")]
    pub budget: LinkBudget,
    /// CBR offered load, Mbit/s of UDP payload.
    #[serde(default = "d_offered")]
    pub offered_load_mbps: f64,
    #[serde(default = "d_payload")]
    pub payload_bytes: u64,
    #[serde(default = "d_warmup")]
    pub warmup_s: f64,
    #[serde(default = "d_measure")]
    pub measure_s: f64,
    #[serde(default = "d_preamble")]
    pub preamble_threshold_dbm: f64,
    #[serde(default = "d_noise")]
    pub noise_floor_dbm: f64,
    #[serde(default = "d_adaptation")]
    pub rate_adaptation: RateAdaptation,
    /// Redraw fading for every frame; otherwise one draw per pair.
    #[serde(default = "d_true")]
    pub per_packet_fading: bool,
    #[serde(default = "d_queue")]
    pub queue_limit: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stream_id: u64,
    /// Record every n-th counted frame in [`PairResult::trace`]; 0 disables.
    #[serde(default)]
    pub trace_stride: u64,
}

impl Default for LinkSimConfig {
    fn default() -> Self {
        Self {
            budget: d_budget(),
            offered_load_mbps: d_offered(),
            payload_bytes: d_payload(),
            warmup_s: d_warmup(),
            measure_s: d_measure(),
            preamble_threshold_dbm: d_preamble(),
            noise_floor_dbm: d_noise(),
            rate_adaptation: d_adaptation(),
            per_packet_fading: true,
            queue_limit: d_queue(),
            seed: 0,
            stream_id: 0,
            trace_stride: 0,
        }
    }
}

fn seconds_to_ns(s: f64) -> u64 {
    (s * 1e9).round() as u64
}

impl LinkSimConfig {
    pub fn validate(&self) -> Result<()> {
        self.budget.validate()?;
        if !(self.measure_s > 0.0) || !self.measure_s.is_finite() {
            return Err(Error::validation(
                "measurement window must be longer than zero",
            ));
        }
        if !(self.warmup_s >= 0.0) || !self.warmup_s.is_finite() {
            return Err(Error::validation("warmup must be finite and >= 0"));
        }
        if !(self.offered_load_mbps > 0.0) || !self.offered_load_mbps.is_finite() {
            return Err(Error::validation("offered load must be > 0"));
        }
        if !self.preamble_threshold_dbm.is_finite() || !self.noise_floor_dbm.is_finite() {
            return Err(Error::validation(
                "preamble threshold and noise floor must be finite",
            ));
        }
        if self.queue_limit == 0 {
            return Err(Error::validation("queue_limit must be >= 1"));
        }
        if let RateAdaptation::Fixed(r) = self.rate_adaptation {
            phy::rate_index(r)?;
        }
        Ok(())
    }

    /// Payload bits over the exchange airtime at the fastest usable rate, Mbit/s.
    pub fn throughput_ceiling_mbps(&self) -> Result<f64> {
        let best = match self.rate_adaptation {
            RateAdaptation::Fixed(r) => r,
            RateAdaptation::MinstrelLite => 54,
        };
        Ok((self.payload_bytes * 8) as f64 / airtime(best, self.payload_bytes)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))
    }
}

/// One counted transmission attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    /// End of the exchange, ns since the start of the run.
    pub time_ns: u64,
    pub rate_mbps: u32,
    pub rx_power_dbm: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub pair: PositionPair,
    pub throughput_mbps: f64,
    pub delivered: u64,
    /// Attempts that were not detected or failed decoding.
    pub lost: u64,
    /// Packets rejected by a full queue.
    pub queue_drops: u64,
    /// Counted attempts per rate, in [`RATES_MBPS`] order.
    pub rate_histogram: [u64; 8],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<FrameRecord>,
}

impl PairResult {
    /// Rate with the most counted attempts (lowest on ties).
    pub fn dominant_rate(&self) -> Option<u32> {
        let (i, &n) = self
            .rate_histogram
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?;
        (n > 0).then_some(RATES_MBPS[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub records: Vec<PairResult>,
    pub wall_clock_s: f64,
    pub cache_stats: CacheStats,
}

impl SimResult {
    /// Records without timing or cache counters, for equality checks.
    pub fn outcomes(&self) -> &[PairResult] {
        &self.records
    }

    pub fn mean_throughput(&self) -> f64 {
        self.records.iter().map(|r| r.throughput_mbps).sum::<f64>() / self.records.len() as f64
    }
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    // Order matters on equal timestamps: a finishing exchange is handled
    // before an arrival at the same instant.
    TxEnd,
    Arrival,
}

/// Simulates every pair and collects per-pair statistics.
pub fn run_scenario(
    pairs: &[PositionPair],
    model: &mut PropagationModel,
    cfg: &LinkSimConfig,
) -> Result<SimResult> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::validation("scenario has no position pairs"));
    }
    let start = Instant::now();
    let mut records = Vec::with_capacity(pairs.len());
    for (i, pair) in pairs.iter().enumerate() {
        records.push(simulate_pair(*pair, i as u64, model, cfg)?);
    }
    Ok(SimResult {
        records,
        wall_clock_s: start.elapsed().as_secs_f64(),
        cache_stats: model.cache_stats(),
    })
}

fn simulate_pair(
    pair: PositionPair,
    index: u64,
    model: &mut PropagationModel,
    cfg: &LinkSimConfig,
) -> Result<PairResult> {
    let mut rng = StreamRng::new(cfg.seed, cfg.stream_id, Purpose::Link, index);
    let b = &cfg.budget;
    let window_start = seconds_to_ns(cfg.warmup_s);
    let window_end = window_start + seconds_to_ns(cfg.measure_s);
    let interval = ((cfg.payload_bytes * 8) as f64 * 1000.0 / cfg.offered_load_mbps)
        .round()
        .max(1.0) as u64;

    let mut minstrel = match cfg.rate_adaptation {
        RateAdaptation::MinstrelLite => Some(MinstrelLite::new(cfg.payload_bytes)?),
        RateAdaptation::Fixed(_) => None,
    };
    let fixed_power = if cfg.per_packet_fading {
        None
    } else {
        Some(model.rx_power(
            b.tx_power_dbm,
            b.tx_antenna_gain_dbi,
            b.rx_antenna_gain_dbi,
            &pair,
        )?)
    };

    let mut result = PairResult {
        pair,
        throughput_mbps: 0.0,
        delivered: 0,
        lost: 0,
        queue_drops: 0,
        rate_histogram: [0; 8],
        trace: Vec::new(),
    };
    let mut queue: VecDeque<u64> = VecDeque::new();
    let mut events = BinaryHeap::new();
    events.push(Reverse((0u64, Event::Arrival)));
    // (rate, rx power, success) of the exchange on the air
    let mut in_flight: Option<(u32, f64, bool)> = None;
    let mut counted = 0u64;

    while let Some(Reverse((now, event))) = events.pop() {
        if now >= window_end {
            break;
        }
        match event {
            Event::Arrival => {
                if queue.len() < cfg.queue_limit {
                    queue.push_back(now);
                } else if now >= window_start {
                    result.queue_drops += 1;
                }
                events.push(Reverse((now + interval, Event::Arrival)));
            }
            Event::TxEnd => {
                let (rate, rx, success) = in_flight.take().expect("exchange in flight");
                if let Some(m) = minstrel.as_mut() {
                    m.step(Feedback {
                        rate_mbps: rate,
                        success,
                    });
                }
                if now >= window_start {
                    let ri = phy::rate_index(rate)?;
                    result.rate_histogram[ri] += 1;
                    if success {
                        result.delivered += 1;
                    } else {
                        result.lost += 1;
                    }
                    if cfg.trace_stride > 0 && counted % cfg.trace_stride == 0 {
                        result.trace.push(FrameRecord {
                            time_ns: now,
                            rate_mbps: rate,
                            rx_power_dbm: rx,
                            success,
                        });
                    }
                    counted += 1;
                }
            }
        }
        if in_flight.is_none() && queue.pop_front().is_some() {
            let rate = match (&mut minstrel, cfg.rate_adaptation) {
                (Some(m), _) => m.select_rate(now, &mut rng),
                (None, RateAdaptation::Fixed(r)) => r,
                (None, RateAdaptation::MinstrelLite) => unreachable!(),
            };
            let rx = match fixed_power {
                Some(p) => p,
                None => model.rx_power(
                    b.tx_power_dbm,
                    b.tx_antenna_gain_dbi,
                    b.rx_antenna_gain_dbi,
                    &pair,
                )?,
            };
            // one draw per attempt, detected or not, keeps the stream layout fixed
            let u = rng.unit();
            let success = rx >= cfg.preamble_threshold_dbm
                && u < success_probability(rx - cfg.noise_floor_dbm, rate)?;
            in_flight = Some((rate, rx, success));
            events.push(Reverse((
                now + airtime_ns(rate, cfg.payload_bytes)?,
                Event::TxEnd,
            )));
        }
    }
    result.throughput_mbps =
        (result.delivered * cfg.payload_bytes * 8) as f64 / (cfg.measure_s * 1e6);
    Ok(result)
}

/// Writes `tx_x,...,rx_z,throughput_mbps,delivered,lost`.
pub fn write_results(result: &SimResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::validation(format!("{}: {other:?}", path.display())),
    })?;
    w.write_record(RESULTS_HEADER)?;
    for r in &result.records {
        let mut row: Vec<String> = r.pair.coords().iter().map(|c| c.to_string()).collect();
        row.push(r.throughput_mbps.to_string());
        row.push(r.delivered.to_string());
        row.push(r.lost.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Position;

    fn ideal(rate: u32) -> (PropagationModel, LinkSimConfig) {
        // loss 0 and no fading: log-distance with exponent 0 at its reference distance
        let mut model = PropagationModel::log_distance(0.0, 1.0, 5220.0);
        if let PropagationModel::LogDistance(m) = &mut model {
            m.reference_loss_db = 0.0;
        }
        let cfg = LinkSimConfig {
            rate_adaptation: RateAdaptation::Fixed(rate),
            ..Default::default()
        };
        (model, cfg)
    }

    fn pair(d: f64) -> PositionPair {
        PositionPair::new(Position::ORIGIN, Position::new(d, 0.0, 0.0))
    }

    #[test]
    fn ideal_channel_hits_airtime_ceiling() {
        let (mut m, cfg) = ideal(54);
        let r = run_scenario(&[pair(5.0)], &mut m, &cfg).unwrap();
        let t = r.records[0].throughput_mbps;
        assert!((t - 29.05).abs() < 0.01, "{t}");
        assert_eq!(r.records[0].lost, 0);

        let (mut m, cfg) = ideal(6);
        let t = run_scenario(&[pair(5.0)], &mut m, &cfg).unwrap().records[0].throughput_mbps;
        assert!((t - 5.24).abs() < 0.01, "{t}");
    }

    #[test]
    fn preamble_gate_blocks_everything() {
        let (mut m, mut cfg) = ideal(54);
        cfg.preamble_threshold_dbm = 100.0;
        let r = run_scenario(&[pair(5.0)], &mut m, &cfg).unwrap();
        assert_eq!(r.records[0].delivered, 0);
        assert_eq!(r.records[0].throughput_mbps, 0.0);
    }

    #[test]
    fn zero_measure_window_rejected() {
        let (mut m, mut cfg) = ideal(54);
        cfg.measure_s = 0.0;
        assert!(run_scenario(&[pair(5.0)], &mut m, &cfg).is_err());
        cfg.measure_s = 1.0;
        assert!(run_scenario(&[], &mut m, &cfg).is_err());
        cfg.rate_adaptation = RateAdaptation::Fixed(11);
        assert!(run_scenario(&[pair(5.0)], &mut m, &cfg).is_err());
    }

    #[test]
    fn snr_between_lowest_thresholds_settles_on_6() {
        // rx = 1 - 7 - 7 - loss; SNR 5.5 dB with noise -94 -> rx -88.5 -> loss 75.5
        let mut m = PropagationModel::log_distance(0.0, 1.0, 5220.0);
        if let PropagationModel::LogDistance(l) = &mut m {
            l.reference_loss_db = 75.5;
        }
        let cfg = LinkSimConfig::default();
        let r = run_scenario(&[pair(5.0)], &mut m, &cfg).unwrap();
        assert_eq!(r.records[0].dominant_rate(), Some(6));
        let h = r.records[0].rate_histogram;
        assert!(h[0] as f64 > 0.8 * h.iter().sum::<u64>() as f64, "{h:?}");
    }

    #[test]
    fn config_json_defaults_and_rate_forms() {
        let c: LinkSimConfig =
            serde_json::from_str(r#"{"rate_adaptation": {"fixed": 54}}"#).unwrap();
        assert_eq!(c.rate_adaptation, RateAdaptation::Fixed(54));
        assert_eq!(c.payload_bytes, 1400);
        let c: LinkSimConfig =
            serde_json::from_str(r#"{"rate_adaptation": "minstrel-lite"}"#).unwrap();
        assert_eq!(c.rate_adaptation, RateAdaptation::MinstrelLite);
        assert!(serde_json::from_str::<LinkSimConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
