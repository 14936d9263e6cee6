//! Simplified Minstrel rate adaptation.
//!
//! Per-rate success probabilities are smoothed with an EWMA once per
//! statistics interval. The rate with the highest expected goodput
//! (`probability * payload bits / airtime`) is used, except that every tenth
//! frame probes a uniformly chosen other rate.

use super::phy::{airtime_ns, RATES_MBPS};
use crate::error::Result;
use crate::rng::StreamRng;

pub const EWMA_ALPHA: f64 = 0.25;
pub const STATS_INTERVAL_NS: u64 = 100_000_000;
pub const PROBE_EVERY: u64 = 10;

/// Outcome of one transmission attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback {
    pub rate_mbps: u32,
    pub success: bool,
}

#[derive(Debug, Clone)]
pub struct MinstrelLite {
    /// Payload bits divided by airtime (bits/ns) at each rate.
    goodput_per_rate: [f64; 8],
    ewma: [Option<f64>; 8],
    attempts: [u64; 8],
    successes: [u64; 8],
    best: usize,
    frames: u64,
    next_update_ns: u64,
}

impl MinstrelLite {
    pub fn new(payload_bytes: u64) -> Result<Self> {
        let mut goodput_per_rate = [0.0; 8];
        for (g, &r) in goodput_per_rate.iter_mut().zip(&RATES_MBPS) {
            *g = (payload_bytes * 8) as f64 / airtime_ns(r, payload_bytes)? as f64;
        }
        Ok(Self {
            goodput_per_rate,
            ewma: [None; 8],
            attempts: [0; 8],
            successes: [0; 8],
            best: 0,
            frames: 0,
            next_update_ns: STATS_INTERVAL_NS,
        })
    }

    pub fn best_rate(&self) -> u32 {
        RATES_MBPS[self.best]
    }

    pub fn probabilities(&self) -> [Option<f64>; 8] {
        self.ewma
    }

    /// Overrides the smoothed probabilities and re-selects the best rate.
    pub fn set_probabilities(&mut self, probs: [Option<f64>; 8]) {
        self.ewma = probs;
        self.refresh_best();
    }

    /// Rate for the next frame at time `now_ns`, running any statistics
    /// updates that are due first.
    pub fn select_rate(&mut self, now_ns: u64, rng: &mut StreamRng) -> u32 {
        while now_ns >= self.next_update_ns {
            self.update_statistics();
            self.next_update_ns += STATS_INTERVAL_NS;
        }
        self.frames += 1;
        if self.frames % PROBE_EVERY == 0 {
            let k = rng.index(RATES_MBPS.len() - 1);
            let idx = if k >= self.best { k + 1 } else { k };
            return RATES_MBPS[idx];
        }
        RATES_MBPS[self.best]
    }

    /// Records the outcome of an attempt.
    pub fn step(&mut self, feedback: Feedback) {
        if let Some(i) = RATES_MBPS.iter().position(|&r| r == feedback.rate_mbps) {
            self.attempts[i] += 1;
            if feedback.success {
                self.successes[i] += 1;
            }
        }
    }

    /// Folds the current interval's counters into the EWMA.
    pub fn update_statistics(&mut self) {
        for i in 0..RATES_MBPS.len() {
            if self.attempts[i] == 0 {
                continue;
            }
            let p = self.successes[i] as f64 / self.attempts[i] as f64;
            self.ewma[i] = Some(match self.ewma[i] {
                None => p,
                Some(old) => EWMA_ALPHA * p + (1.0 - EWMA_ALPHA) * old,
            });
            self.attempts[i] = 0;
            self.successes[i] = 0;
        }
        self.refresh_best();
    }

    fn refresh_best(&mut self) {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for i in 0..RATES_MBPS.len() {
            if let Some(p) = self.ewma[i] {
                let score = p * self.goodput_per_rate[i];
                if score > best_score {
                    best_score = score;
                    best = i;
                }
            }
        }
        self.best = best;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linksim::phy::success_probability;
    use crate::rng::Purpose;

    #[test]
    fn all_perfect_picks_54() {
        let mut m = MinstrelLite::new(1400).unwrap();
        m.set_probabilities([Some(1.0); 8]);
        assert_eq!(m.best_rate(), 54);
    }

    #[test]
    fn only_lowest_working_picks_6() {
        let mut m = MinstrelLite::new(1400).unwrap();
        let mut p = [Some(0.0); 8];
        p[0] = Some(1.0);
        m.set_probabilities(p);
        assert_eq!(m.best_rate(), 6);
    }

    #[test]
    fn ewma_blends_interval_ratio() {
        let mut m = MinstrelLite::new(1400).unwrap();
        for s in [true, true, false, true] {
            m.step(Feedback {
                rate_mbps: 12,
                success: s,
            });
        }
        m.update_statistics();
        assert_eq!(m.probabilities()[2], Some(0.75));
        m.step(Feedback {
            rate_mbps: 12,
            success: false,
        });
        m.update_statistics();
        assert_eq!(m.probabilities()[2], Some(0.75 * 0.75));
    }

    #[test]
    fn probes_every_tenth_frame() {
        let mut m = MinstrelLite::new(1400).unwrap();
        m.set_probabilities([Some(1.0); 8]);
        let mut rng = StreamRng::new(1, 0, Purpose::Link, 0);
        let rates: Vec<u32> = (0..30).map(|_| m.select_rate(0, &mut rng)).collect();
        for (i, r) in rates.iter().enumerate() {
            if (i + 1) % 10 == 0 {
                assert_ne!(*r, 54);
            } else {
                assert_eq!(*r, 54);
            }
        }
    }

    #[test]
    fn converges_at_stationary_20_db() {
        let mut m = MinstrelLite::new(1400).unwrap();
        let mut rng = StreamRng::new(3, 0, Purpose::Link, 0);
        let mut now = 0u64;
        while now < 1_000_000_000 {
            let rate = m.select_rate(now, &mut rng);
            let success = rng.unit() < success_probability(20.0, rate).unwrap();
            m.step(Feedback {
                rate_mbps: rate,
                success,
            });
            now += airtime_ns(rate, 1400).unwrap();
        }
        assert!(matches!(m.best_rate(), 24 | 36), "{}", m.best_rate());
    }
}
