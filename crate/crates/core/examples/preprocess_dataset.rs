//! Trace preprocessing: derive total loss from SNR rows with the link
//! budget, drop outliers, split loss into path loss and fading, and split
//! into train/test.
//!
//!     cargo run --example preprocess_dataset [-- OUT_DIR]

use std::path::PathBuf;

use pmlpl::cli::selftest::default_data_dir;
use pmlpl::dataset::{
    decompose, derive_losses, load_dataset, remove_outliers, split, write_preprocessed, Split,
};

fn main() -> pmlpl::Result<()> {
    let data = default_data_dir();
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);

    let budget_path = data.join("example-budget.json");
    let (raw, budget) = load_dataset(data.join("example-dataset.csv"), Some(&budget_path))?;
    let budget = budget.expect("budget was given");
    println!(
        "{} rows; EIRP + rx gain = {:.1} dBm at {} MHz",
        raw.len(),
        budget.eirp_with_rx_gain(),
        budget.channel_frequency_mhz
    );

    let losses = derive_losses(&raw, Some(&budget))?;
    let (kept, removed) = remove_outliers(&losses);
    let ds = split(&decompose(&kept), 0.8, 0)?;
    println!(
        "{} kept, {removed} outliers, {} pairs, residual std {:.2} dB",
        ds.len(),
        ds.path_loss_table.len(),
        ds.residual_std()
    );
    println!(
        "train {} / test {}",
        ds.samples_in(Split::Train).count(),
        ds.samples_in(Split::Test).count()
    );

    for s in ds.samples.iter().take(3) {
        println!(
            "  {}  total {:.2} = path {:.2} + fading {:+.2} dB",
            s.pair, s.total_loss, s.path_loss, s.fading
        );
    }

    let path = out.join("preprocessed.csv");
    write_preprocessed(&ds, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
