//! Shared synthetic data set and models, built once.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use pmlpl::dataset::{decompose, derive_losses, remove_outliers, split, DecomposedDataset, Split};
use pmlpl::fading::{fit_cdf, FadingCdf, DEFAULT_MAX_POINTS};
use pmlpl::regress::{
    feature_rows, grid_search_svr, train_gbrt, train_svr, FeatureVector, FoldPolicy, GbrtParams,
    PathLossRegressor, SvrGrid, SvrParams,
};
use pmlpl::synth::{generate, SynthConfig};

pub struct Synthetic {
    pub cfg: SynthConfig,
    pub data: DecomposedDataset,
    pub train: Vec<(FeatureVector, f64)>,
    pub test: Vec<(FeatureVector, f64)>,
    pub gbrt: PathLossRegressor,
    pub svr: PathLossRegressor,
    pub svr_params: SvrParams,
    pub cdf: FadingCdf,
    pub gbrt_time: Duration,
    /// Grid search plus final fit.
    pub svr_time: Duration,
}

/// 500 pairs x 30 samples of log-distance (1.7, 5220 MHz) + Normal(0, 3 dB),
/// split 80/20.
pub fn synthetic() -> &'static Synthetic {
    static CELL: OnceLock<Synthetic> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = SynthConfig::default();
        let rows = generate(&cfg).expect("synthetic rows");
        let (kept, _) = remove_outliers(&derive_losses(&rows, None).unwrap());
        let data = split(&decompose(&kept), 0.8, 0).unwrap();
        let train = feature_rows(&data.path_loss_rows(Split::Train));
        let test = feature_rows(&data.path_loss_rows(Split::Test));

        let t = Instant::now();
        let gbrt = PathLossRegressor::Gbrt(train_gbrt(&train, &GbrtParams::default()).unwrap());
        let gbrt_time = t.elapsed();

        let t = Instant::now();
        let grid = grid_search_svr(
            &train,
            &SvrParams::default(),
            &SvrGrid::default(),
            3,
            0,
            FoldPolicy::Samples,
        )
        .unwrap();
        let svr = PathLossRegressor::Svr(train_svr(&train, &grid.best).unwrap());
        let svr_time = t.elapsed();

        let residuals: Vec<f64> = data.samples_in(Split::Train).map(|s| s.fading).collect();
        let cdf = fit_cdf(&residuals, DEFAULT_MAX_POINTS).unwrap();
        Synthetic {
            cfg,
            data,
            train,
            test,
            gbrt,
            svr,
            svr_params: grid.best,
            cdf,
            gbrt_time,
            svr_time,
        }
    })
}
