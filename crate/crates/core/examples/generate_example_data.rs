//! Regenerates the vendored example files in `data/`:
//! a synthetic trace in SNR form with its link budget, an SVR model and a
//! fading CDF trained on it, and the known pairs used by `pmlpl selftest`.
//!
//!     cargo run --example generate_example_data [-- OUT_DIR]

use std::io::Write;
use std::path::PathBuf;

use pmlpl::cli::selftest::{self, pinned_loss, KNOWN_PAIRS_HEADER};
use pmlpl::dataset::{self, decompose, derive_losses, remove_outliers, Split};
use pmlpl::fading::{cdf_fit_mse, export_cdf, fit_cdf, DEFAULT_MAX_POINTS, FIT_BINS};
use pmlpl::regress::{
    evaluate_mse, feature_rows, grid_search_svr, save_model, train_svr, FoldPolicy,
    PathLossRegressor, SvrGrid, SvrParams,
};
use pmlpl::synth::{generate, SynthConfig, SynthOutput};

const SEED: u64 = 2024;
const N_KNOWN: usize = 10;

fn main() -> pmlpl::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(selftest::default_data_dir);
    std::fs::create_dir_all(&out).map_err(|e| pmlpl::Error::io(&out, e))?;

    let synth = SynthConfig {
        n_pairs: 60,
        samples_per_pair: 25,
        output: SynthOutput::Snr,
        seed: SEED,
        ..Default::default()
    };
    let rows = generate(&synth)?;
    dataset::write_raw(&rows, out.join(selftest::DATASET_FILE))?;
    let budget_json = serde_json::to_string_pretty(&synth.budget)? + "\n";
    std::fs::write(out.join(selftest::BUDGET_FILE), budget_json)
        .map_err(|e| pmlpl::Error::io(&out, e))?;

    let (kept, removed) = remove_outliers(&derive_losses(&rows, Some(&synth.budget))?);
    let data = dataset::split(&decompose(&kept), 0.8, SEED)?;
    println!(
        "{} samples, {removed} outliers, residual std {:.3} dB",
        data.len(),
        data.residual_std()
    );

    let train = feature_rows(&data.path_loss_rows(Split::Train));
    let test = feature_rows(&data.path_loss_rows(Split::Test));
    let grid = grid_search_svr(
        &train,
        &SvrParams::default(),
        &SvrGrid::default(),
        3,
        SEED,
        FoldPolicy::Samples,
    )?;
    println!(
        "grid: C={} gamma={:?} cv MSE {:.4}",
        grid.best.c, grid.best.gamma, grid.best_mse
    );
    let model = PathLossRegressor::Svr(train_svr(&train, &grid.best)?);
    println!("test MSE {:.4} dB^2", evaluate_mse(&model, &test)?);
    save_model(&model, out.join(selftest::MODEL_FILE))?;

    let residuals: Vec<f64> = data.samples_in(Split::Train).map(|s| s.fading).collect();
    let cdf = fit_cdf(&residuals, DEFAULT_MAX_POINTS)?;
    println!(
        "CDF fit MSE {:.3e}",
        cdf_fit_mse(&cdf, &residuals, FIT_BINS)?
    );
    export_cdf(&cdf, out.join(selftest::CDF_FILE))?;

    // Recorded value: measured mean loss of the pair plus the pinned draw.
    let mut known = Vec::new();
    writeln!(known, "{KNOWN_PAIRS_HEADER}").unwrap();
    let pinned = cdf.inverse(selftest::PINNED_PERCENTILE);
    for (pair, measured) in data.path_loss_table.iter().take(N_KNOWN) {
        let recorded = measured + pinned;
        let diff = (pinned_loss(&model, &cdf, pair) - recorded).abs();
        assert!(
            diff <= selftest::KNOWN_PAIR_TOLERANCE_DB,
            "{pair}: model off by {diff} dB"
        );
        let c = pair.coords();
        writeln!(
            known,
            "{},{},{},{},{},{},{recorded}",
            c[0], c[1], c[2], c[3], c[4], c[5]
        )
        .unwrap();
    }
    let kp = out.join(selftest::KNOWN_PAIRS_FILE);
    std::fs::write(&kp, known).map_err(|e| pmlpl::Error::io(&kp, e))?;
    println!("wrote {}", out.display());
    Ok(())
}
