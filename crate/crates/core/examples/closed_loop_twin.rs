//! Digital-twin loop: simulate links over a known channel (log-distance +
//! Normal fading), export the simulated traces, train a model on them and
//! replay the same links through it. Reports per-pair throughput error.
//!
//!     cargo run --release --example closed_loop_twin

use std::sync::Arc;

use pmlpl::channel::PropagationModel;
use pmlpl::cli::trace_samples;
use pmlpl::dataset::{decompose, derive_losses, remove_outliers, split, Split};
use pmlpl::fading::{fit_cdf, DEFAULT_MAX_POINTS};
use pmlpl::linksim::{run_scenario, LinkSimConfig};
use pmlpl::metrics::{percentile, throughput_errors};
use pmlpl::regress::{evaluate_mse, feature_rows, train_gbrt, GbrtParams, PathLossRegressor};
use pmlpl::synth::{generate_pairs, SynthConfig};

fn main() -> pmlpl::Result<()> {
    let synth = SynthConfig {
        n_pairs: 30,
        seed: 9,
        ..Default::default()
    };
    let pairs = generate_pairs(&synth)?;
    let link = LinkSimConfig {
        trace_stride: 25,
        seed: 1,
        ..Default::default()
    };

    let mut channel = PropagationModel::log_distance(
        synth.exponent,
        synth.reference_distance_m,
        synth.frequency_mhz,
    )
    .with_normal_fading(0.0, synth.fading_std_db, 1, 0)?;
    let measured = run_scenario(&pairs, &mut channel, &link)?;

    let rows = trace_samples(&measured, &link);
    let (kept, _) = remove_outliers(&derive_losses(&rows, Some(&link.budget))?);
    let ds = split(&decompose(&kept), 0.8, 1)?;
    let train = feature_rows(&ds.path_loss_rows(Split::Train));
    let gbrt = PathLossRegressor::Gbrt(train_gbrt(&train, &GbrtParams::default())?);
    let residuals: Vec<f64> = ds.samples_in(Split::Train).map(|s| s.fading).collect();
    let cdf = fit_cdf(&residuals, DEFAULT_MAX_POINTS)?;
    println!(
        "{} trace rows, path-loss test MSE {:.3} dB^2, residual std {:.2} dB",
        rows.len(),
        evaluate_mse(&gbrt, &feature_rows(&ds.path_loss_rows(Split::Test)))?,
        ds.residual_std()
    );

    let mut twin = PropagationModel::pmlpl(Arc::new(gbrt), Arc::new(cdf), link.seed, 0);
    let replay = run_scenario(&pairs, &mut twin, &link)?;
    let reference: Vec<_> = measured
        .records
        .iter()
        .map(|r| (r.pair, r.throughput_mbps))
        .collect();
    let err = throughput_errors(&replay, &reference, "twin")?;
    for (m, t) in measured.records.iter().zip(&replay.records).take(8) {
        println!(
            "  {:>6.2} -> {:>6.2} Mbit/s  ({:.1} m)",
            m.throughput_mbps,
            t.throughput_mbps,
            m.pair.distance()
        );
    }
    println!(
        "throughput error: median {:.3}, P90 {:.3} Mbit/s",
        percentile(&err.absolute(), 50.0)?,
        percentile(&err.absolute(), 90.0)?
    );
    Ok(())
}
