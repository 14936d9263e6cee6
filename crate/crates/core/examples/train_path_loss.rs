//! Trains both path-loss regressors on the example trace, compares them on
//! the test split and round-trips one through the model file format.
//!
//!     cargo run --release --example train_path_loss

use pmlpl::cli::selftest::default_data_dir;
use pmlpl::dataset::{decompose, derive_losses, load_dataset, remove_outliers, split, Split};
use pmlpl::regress::{
    evaluate_mse, feature_rows, grid_search_svr, read_model, train_gbrt, train_svr, write_model,
    FoldPolicy, GbrtParams, PathLossRegressor, SvrGrid, SvrParams,
};

fn main() -> pmlpl::Result<()> {
    let data = default_data_dir();
    let (raw, budget) = load_dataset(
        data.join("example-dataset.csv"),
        Some(&data.join("example-budget.json")),
    )?;
    let (kept, _) = remove_outliers(&derive_losses(&raw, budget.as_ref())?);
    let ds = split(&decompose(&kept), 0.8, 0)?;
    let train = feature_rows(&ds.path_loss_rows(Split::Train));
    let test = feature_rows(&ds.path_loss_rows(Split::Test));

    let gbrt = PathLossRegressor::Gbrt(train_gbrt(&train, &GbrtParams::default())?);
    println!(
        "GBRT            test MSE {:.4} dB^2",
        evaluate_mse(&gbrt, &test)?
    );

    let plain = PathLossRegressor::Svr(train_svr(&train, &SvrParams::default())?);
    println!(
        "SVR (C=1)       test MSE {:.4} dB^2",
        evaluate_mse(&plain, &test)?
    );

    let grid = grid_search_svr(
        &train,
        &SvrParams::default(),
        &SvrGrid::default(),
        3,
        0,
        FoldPolicy::Samples,
    )?;
    for (p, mse) in &grid.scores {
        println!("  C={:<5} gamma={:?}: cv MSE {mse:.4}", p.c, p.gamma);
    }
    let tuned = PathLossRegressor::Svr(train_svr(&train, &grid.best)?);
    println!(
        "SVR (grid)      test MSE {:.4} dB^2",
        evaluate_mse(&tuned, &test)?
    );

    let bytes = write_model(&tuned)?;
    let back = read_model(&bytes)?;
    let (x, _) = &test[0];
    assert_eq!(tuned.predict(x).to_bits(), back.predict(x).to_bits());
    println!(
        "model file: {} bytes, predictions identical after reload",
        bytes.len()
    );
    Ok(())
}
