//! Fits the fast-fading CDF to residuals, checks the fit and samples it.
//!
//!     cargo run --example fit_fading

use std::sync::Arc;

use pmlpl::fading::{cdf_fit_mse, fit_cdf, FadingSampler, DEFAULT_MAX_POINTS, FIT_BINS};
use pmlpl::rng::{Purpose, StreamRng};
use rand_distr::{Distribution, Normal};

fn main() -> pmlpl::Result<()> {
    let mut rng = StreamRng::new(1, 0, Purpose::Synthetic, 0);
    let normal = Normal::new(0.0, 3.0).unwrap();
    let residuals: Vec<f64> = (0..20_000).map(|_| normal.sample(&mut rng)).collect();

    for max_points in [16, 128, DEFAULT_MAX_POINTS, residuals.len()] {
        let cdf = fit_cdf(&residuals, max_points)?;
        println!(
            "{:>6} knots: fit MSE {:.2e}",
            cdf.points().len(),
            cdf_fit_mse(&cdf, &residuals, FIT_BINS)?
        );
    }

    let cdf = Arc::new(fit_cdf(&residuals, DEFAULT_MAX_POINTS)?);
    for u in [5.0, 25.0, 50.0, 75.0, 95.0] {
        println!("  P{u:<2} = {:+.3} dB", cdf.inverse(u));
    }

    let mut sampler = FadingSampler::new(cdf.clone(), StreamRng::new(7, 0, Purpose::Fading, 0));
    let draws: Vec<f64> = (0..100_000).map(|_| sampler.sample()).collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let std = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / draws.len() as f64).sqrt();
    println!("100k draws: mean {mean:+.3} dB, std {std:.3} dB");
    Ok(())
}
