//! Replays the example pairs through the link simulator with the trained
//! model and Minstrel-lite, and shows the fixed-rate airtime ceilings.
//!
//!     cargo run --release --example simulate_link

use pmlpl::channel::ModelConfig;
use pmlpl::cli::selftest::default_data_dir;
use pmlpl::cli::Scenario;
use pmlpl::linksim::{airtime, run_scenario, LinkSimConfig, RateAdaptation, RATES_MBPS};

fn main() -> pmlpl::Result<()> {
    for rate in RATES_MBPS {
        let cfg = LinkSimConfig {
            rate_adaptation: RateAdaptation::Fixed(rate),
            ..Default::default()
        };
        println!(
            "{rate:>2} Mbit/s: exchange {:>6.1} us, ceiling {:.2} Mbit/s",
            airtime(rate, cfg.payload_bytes)?,
            cfg.throughput_ceiling_mbps()?
        );
    }

    let data = default_data_dir();
    let scenario = Scenario::load(&data.join("scenario-warehouse.json"))?;
    let pairs = scenario.resolve_pairs()?;
    let mut model = ModelConfig::load(data.join("model-pmlpl.json"))?.build()?;
    let res = run_scenario(&pairs[..10], &mut model, &scenario.link)?;
    println!(
        "\n{:<48} {:>8} {:>6} {:>6}",
        "pair", "Mbit/s", "rate", "lost"
    );
    for r in &res.records {
        println!(
            "{:<48} {:>8.2} {:>6} {:>6}",
            r.pair.to_string(),
            r.throughput_mbps,
            r.dominant_rate().map_or("-".into(), |x| x.to_string()),
            r.lost
        );
    }
    println!(
        "mean {:.2} Mbit/s, {:.3} s wall clock, cache {:?}",
        res.mean_throughput(),
        res.wall_clock_s,
        res.cache_stats
    );
    Ok(())
}
