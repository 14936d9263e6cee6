//! Minstrel-lite at a few fixed SNRs: feeds it frame outcomes drawn from
//! the PER model and reports the rate it settles on.
//!
//!     cargo run --example rate_adaptation

use pmlpl::linksim::minstrel::{Feedback, MinstrelLite, STATS_INTERVAL_NS};
use pmlpl::linksim::{airtime_ns, success_probability};
use pmlpl::rng::{Purpose, StreamRng};

fn main() -> pmlpl::Result<()> {
    for snr in [4.0, 7.0, 12.0, 16.0, 20.0, 26.0] {
        let mut rng = StreamRng::new(0, 0, Purpose::Link, 0);
        let mut m = MinstrelLite::new(1400)?;
        let mut now = 0;
        while now < 20 * STATS_INTERVAL_NS {
            let rate = m.select_rate(now, &mut rng);
            let success = rng.unit() < success_probability(snr, rate)?;
            m.step(Feedback {
                rate_mbps: rate,
                success,
            });
            now += airtime_ns(rate, 1400)?;
        }
        let probs: Vec<String> = m
            .probabilities()
            .iter()
            .map(|p| p.map_or("  -".into(), |p| format!("{p:.2}")))
            .collect();
        println!(
            "SNR {snr:>4.1} dB -> {:>2} Mbit/s   [{}]",
            m.best_rate(),
            probs.join(" ")
        );
    }
    Ok(())
}
