//! Compares the trained model with the Friis and log-distance baselines
//! along a line of receivers, and turns loss into received power and SNR.
//!
//!     cargo run --example propagation_models

use pmlpl::channel::ModelConfig;
use pmlpl::cli::selftest::default_data_dir;
use pmlpl::dataset::{LinkBudget, Position, PositionPair, DEFAULT_NOISE_FLOOR_DBM};

fn main() -> pmlpl::Result<()> {
    let data = default_data_dir();
    let mut models = Vec::new();
    for name in [
        "model-pmlpl.json",
        "model-friis.json",
        "model-log-distance.json",
    ] {
        models.push(ModelConfig::load(data.join(name))?.build()?);
    }
    let b = LinkBudget::warehouse();

    let tx = Position::new(10.0, 10.0, 1.5);
    print!("{:>6}", "d [m]");
    for m in &models {
        print!("{:>28}", m.label());
    }
    println!();
    for d in [2.0, 5.0, 10.0, 20.0, 40.0] {
        let pair = PositionPair::new(tx, tx.translated(d, 0.0, 0.0));
        print!("{d:>6.0}");
        for m in &mut models {
            let pl = m.path_loss(&pair)?;
            let rx = m.rx_power(
                b.tx_power_dbm,
                b.tx_antenna_gain_dbi,
                b.rx_antenna_gain_dbi,
                &pair,
            )?;
            print!(
                "{:>28}",
                format!("{pl:.1} dB / SNR {:.1}", rx - DEFAULT_NOISE_FLOOR_DBM)
            );
        }
        println!();
    }
    println!("(path loss / SNR of one draw including fading)");
    Ok(())
}
