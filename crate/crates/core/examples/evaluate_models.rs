//! Propagation-loss error CDFs of the trained model and the baselines on
//! the test split of the example trace.
//!
//!     cargo run --example evaluate_models

use pmlpl::channel::ModelConfig;
use pmlpl::cli::selftest::default_data_dir;
use pmlpl::dataset::{decompose, derive_losses, load_dataset, remove_outliers, split, Split};
use pmlpl::metrics::{error_cdf, loss_errors, percentile};

fn main() -> pmlpl::Result<()> {
    let data = default_data_dir();
    let (raw, budget) = load_dataset(
        data.join("example-dataset.csv"),
        Some(&data.join("example-budget.json")),
    )?;
    let (kept, _) = remove_outliers(&derive_losses(&raw, budget.as_ref())?);
    // Same split seed as the vendored model, so the test rows are unseen.
    let test = split(&decompose(&kept), 0.8, 2024)?.total_loss_rows(Split::Test);

    println!(
        "{:<26} {:>10} {:>10} {:>10}",
        "model", "median|E|", "P90|E|", "E<0"
    );
    for name in [
        "model-pmlpl.json",
        "model-friis.json",
        "model-log-distance.json",
    ] {
        let mut model = ModelConfig::load(data.join(name))?.build()?;
        let label = model.label();
        let e = loss_errors(&mut model, &test, label)?;
        println!(
            "{:<26} {:>10.2} {:>10.2} {:>9.0}%",
            e.label,
            e.median_abs()?,
            percentile(&e.absolute(), 90.0)?,
            100.0 * e.fraction_negative()
        );
        let cdf = error_cdf(&e, false)?;
        let mid = cdf[cdf.len() / 2];
        println!(
            "{:<26} signed CDF has {} points, middle ({:+.2} dB, {:.1}%)",
            "",
            cdf.len(),
            mid.0,
            mid.1
        );
    }
    Ok(())
}
