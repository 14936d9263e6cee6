//! Property suites, driven by proptest's `TestRunner` so each suite reports
//! as a single line.

use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use pmlpl::channel::{PropagationModel, DEFAULT_QUANTUM_M, SPEED_OF_LIGHT};
use pmlpl::dataset::{decompose, LossSample, Position, PositionPair};
use pmlpl::fading::fit_cdf;
use pmlpl::linksim::{run_scenario, LinkSimConfig, RateAdaptation};
use pmlpl::regress::{
    read_model, train_gbrt, train_svr, write_model, FeatureVector, GammaMode, GbrtParams,
    PathLossRegressor, SvrParams,
};
use pmlpl::rng::{Purpose, StreamRng};
use pmlpl::synth::{generate_pairs, SynthConfig};

use super::fixtures;
use crate::Outcome;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn finish(
    r: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>,
    cases: u32,
) -> Outcome {
    r.map(|_| format!("{cases} cases"))
        .map_err(|err| err.to_string())
}

fn position() -> impl Strategy<Value = Position> {
    (0.0..80.0f64, 0.0..50.0f64, 0.5..3.0f64).prop_map(|(x, y, z)| Position::new(x, y, z))
}

fn pair() -> impl Strategy<Value = PositionPair> {
    (position(), position())
        .prop_filter("distinct ends", |(a, b)| a.distance(b) > 0.1)
        .prop_map(|(a, b)| PositionPair::new(a, b))
}

/// Loss samples over a handful of pairs, several per pair.
fn loss_samples() -> impl Strategy<Value = Vec<LossSample>> {
    prop::collection::vec(pair(), 1..6).prop_flat_map(|pairs| {
        let n = pairs.len();
        prop::collection::vec((0..n, 40.0..120.0f64), 2..60).prop_map(move |rows| {
            rows.into_iter()
                .map(|(i, loss)| LossSample::new(pairs[i], loss))
                .collect()
        })
    })
}

fn training_rows() -> impl Strategy<Value = Vec<(FeatureVector, f64)>> {
    prop::collection::vec((pair(), -5.0..5.0f64), 8..40).prop_map(|rows| {
        rows.into_iter()
            .map(|(p, noise)| {
                let y = 40.0 + 17.0 * p.distance().log10() + noise;
                (FeatureVector::from(&p), y)
            })
            .collect()
    })
}

fn mse(rows: &[(FeatureVector, f64)], f: impl Fn(&FeatureVector) -> f64) -> f64 {
    rows.iter().map(|(x, y)| (f(x) - y).powi(2)).sum::<f64>() / rows.len() as f64
}

pub fn all() -> Vec<(&'static str, fn() -> Outcome)> {
    vec![
        ("residual zero-mean per pair", residual_zero_mean),
        ("path loss + fading reconstructs total loss", reconstruction),
        ("cache transparency", cache_transparency),
        ("CDF inverse monotone, spans min..max", cdf_monotone_inverse),
        ("Friis/Log-Distance closed form within 1e-9 dB", closed_form),
        ("model file round trip, 1000 vectors", model_round_trip),
        ("GBRT staged training MSE non-increasing", gbrt_monotone),
        ("SVR epsilon-tube and KKT conditions", svr_kkt),
        (
            "SVR invariant to translating all positions",
            standardization_invariance,
        ),
        (
            "regressors distinguish link direction",
            direction_sensitivity,
        ),
        ("link simulation replays identically", linksim_determinism),
        (
            "throughput never exceeds the airtime ceiling",
            linksim_ceiling,
        ),
        (
            "frames below the preamble threshold are lost",
            linksim_preamble_gate,
        ),
        (
            "no counted frame ends before warmup",
            linksim_warmup_exclusion,
        ),
    ]
}

fn residual_zero_mean() -> Outcome {
    let cases = 200;
    finish(
        runner(cases).run(&loss_samples(), |samples| {
            let d = decompose(&samples);
            for pair in d.path_loss_table.keys() {
                let r: Vec<f64> = d
                    .samples
                    .iter()
                    .filter(|s| s.pair == *pair)
                    .map(|s| s.fading)
                    .collect();
                let mean = r.iter().sum::<f64>() / r.len() as f64;
                prop_assert!(mean.abs() < 1e-9, "mean residual {} for {}", mean, pair);
            }
            Ok(())
        }),
        cases,
    )
}

fn reconstruction() -> Outcome {
    let cases = 200;
    finish(
        runner(cases).run(&loss_samples(), |samples| {
            let d = decompose(&samples);
            for (s, orig) in d.samples.iter().zip(&samples) {
                prop_assert_eq!(s.total_loss, orig.loss);
                let back = s.path_loss + s.fading;
                prop_assert!(
                    (back - orig.loss).abs() <= 1e-12 * orig.loss.abs(),
                    "{} vs {}",
                    back,
                    orig.loss
                );
                prop_assert_eq!(s.path_loss, d.path_loss_table[&s.pair]);
            }
            Ok(())
        }),
        cases,
    )
}

fn cache_transparency() -> Outcome {
    let s = fixtures::synthetic();
    let gbrt = Arc::new(s.gbrt.clone());
    let cdf = Arc::new(s.cdf.clone());
    let pool: Vec<PositionPair> = s.data.path_loss_table.keys().take(30).copied().collect();
    let cases = 100;
    let strat = (
        prop::collection::vec(0..pool.len(), 1..300),
        0usize..40,
        any::<u64>(),
    );
    finish(
        runner(cases).run(&strat, |(idx, capacity, seed)| {
            let mut on = PropagationModel::pmlpl(gbrt.clone(), cdf.clone(), seed, 0);
            let mut off = PropagationModel::pmlpl(gbrt.clone(), cdf.clone(), seed, 0);
            on.cache_configure(capacity, DEFAULT_QUANTUM_M).unwrap();
            off.cache_configure(0, DEFAULT_QUANTUM_M).unwrap();
            for &i in &idx {
                let a = on.total_loss(&pool[i]).unwrap();
                let b = off.total_loss(&pool[i]).unwrap();
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            let st = on.cache_stats();
            prop_assert_eq!(st.hits + st.misses, idx.len() as u64);
            prop_assert_eq!(st.evaluations, st.misses);
            prop_assert!(st.size <= capacity);
            Ok(())
        }),
        cases,
    )
}

fn cdf_monotone_inverse() -> Outcome {
    let cases = 200;
    let strat = (prop::collection::vec(-20.0..20.0f64, 2..400), 2usize..64);
    finish(
        runner(cases).run(&strat, |(residuals, max_points)| {
            let cdf = fit_cdf(&residuals, max_points).unwrap();
            let lo = residuals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(cdf.inverse(0.0), lo);
            prop_assert_eq!(cdf.inverse(100.0), hi);
            let mut prev = f64::NEG_INFINITY;
            for k in 0..=1000 {
                let v = cdf.inverse(k as f64 / 10.0);
                prop_assert!(v >= prev, "inverse decreased at u={}", k as f64 / 10.0);
                prev = v;
            }
            Ok(())
        }),
        cases,
    )
}

/// Free-space loss from its textbook form `20 log10(4 pi d f / c)`.
fn fspl_oracle(d: f64, f_mhz: f64) -> f64 {
    20.0 * (4.0 * PI * d * f_mhz * 1e6 / SPEED_OF_LIGHT).log10()
}

fn closed_form() -> Outcome {
    let cases = 500;
    let strat = (pair(), 900.0..6000.0f64, 1.0..4.0f64, 0.1..10.0f64);
    finish(
        runner(cases).run(&strat, |(p, f, gamma, d0)| {
            let d = p.distance();
            let friis = PropagationModel::friis(f).path_loss(&p).unwrap();
            prop_assert!(
                (friis - fspl_oracle(d, f)).abs() <= 1e-9,
                "Friis {} vs {}",
                friis,
                fspl_oracle(d, f)
            );
            let ld = PropagationModel::log_distance(gamma, d0, f)
                .path_loss(&p)
                .unwrap();
            let oracle = fspl_oracle(d0, f) + 10.0 * gamma * (d / d0).log10();
            prop_assert!(
                (ld - oracle).abs() <= 1e-9,
                "Log-Distance {} vs {}",
                ld,
                oracle
            );
            Ok(())
        }),
        cases,
    )
}

fn model_round_trip() -> Outcome {
    let s = fixtures::synthetic();
    let mut rng = StreamRng::new(17, 0, Purpose::Synthetic, 7);
    let queries: Vec<FeatureVector> = (0..1000)
        .map(|_| {
            FeatureVector(std::array::from_fn(|f| {
                rng.unit() * if f % 3 == 2 { 3.0 } else { 80.0 }
            }))
        })
        .collect();
    for model in [&s.gbrt, &s.svr] {
        let bytes = write_model(model).map_err(|e| e.to_string())?;
        let back = read_model(&bytes).map_err(|e| e.to_string())?;
        if write_model(&back).map_err(|e| e.to_string())? != bytes {
            return Err(format!("{}: re-serialized bytes differ", model.kind()));
        }
        for q in &queries {
            if model.predict(q).to_bits() != back.predict(q).to_bits() {
                return Err(format!("{}: prediction differs at {:?}", model.kind(), q));
            }
        }
    }
    Ok("GBRT and SVR, 1000 queries each, bit-identical".into())
}

fn gbrt_monotone() -> Outcome {
    let cases = 40;
    let strat = (training_rows(), 1usize..5, 0.05..1.0f64);
    finish(
        runner(cases).run(&strat, |(rows, depth, lr)| {
            let params = GbrtParams {
                n_trees: 25,
                max_depth: depth,
                learning_rate: lr,
                ..GbrtParams::default()
            };
            let m = train_gbrt(&rows, &params).unwrap();
            let mut prev = f64::INFINITY;
            for k in 0..=m.trees.len() {
                let cur = mse(&rows, |x| m.predict_staged(x, k));
                prop_assert!(
                    cur <= prev + 1e-9 * prev.max(1.0),
                    "MSE rose from {} to {} at tree {}",
                    prev,
                    cur,
                    k
                );
                prev = cur;
            }
            Ok(())
        }),
        cases,
    )
}

fn svr_kkt() -> Outcome {
    let cases = 30;
    let strat = (training_rows(), 0.5..20.0f64, 0.05..0.5f64);
    finish(
        runner(cases).run(&strat, |(rows, c, epsilon)| {
            let params = SvrParams {
                c,
                epsilon,
                tolerance: 1e-4,
                ..SvrParams::default()
            };
            let m = train_svr(&rows, &params).unwrap();
            prop_assume!(m.converged);
            let tol = 1e-2;
            let sum: f64 = m.dual_coefficients.iter().sum();
            prop_assert!(
                sum.abs() <= 1e-6 * c * rows.len() as f64,
                "sum of coefficients {}",
                sum
            );
            for (x, y) in &rows {
                let z = m.standardize(x);
                let coef = m
                    .support_vectors
                    .iter()
                    .position(|sv| *sv == z)
                    .map_or(0.0, |i| m.dual_coefficients[i]);
                prop_assert!(
                    coef.abs() <= c * (1.0 + 1e-9),
                    "|coef| {} above C {}",
                    coef,
                    c
                );
                // Residual sign convention: coef > 0 means the target lies above the tube.
                let resid = y - m.predict(x);
                if coef == 0.0 {
                    prop_assert!(
                        resid.abs() <= epsilon + tol,
                        "inactive row outside tube: {}",
                        resid
                    );
                } else if coef.abs() < c * (1.0 - 1e-6) {
                    prop_assert!(
                        (resid.abs() - epsilon).abs() <= tol,
                        "free row off the tube edge: {}",
                        resid
                    );
                    prop_assert!(resid * coef > 0.0, "free row on the wrong side");
                } else {
                    prop_assert!(
                        resid.abs() >= epsilon - tol,
                        "bounded row inside tube: {}",
                        resid
                    );
                }
            }
            Ok(())
        }),
        cases,
    )
}

fn standardization_invariance() -> Outcome {
    let cases = 20;
    let strat = (training_rows(), -50.0..50.0f64, -50.0..50.0f64);
    finish(
        runner(cases).run(&strat, |(rows, dx, dy)| {
            let shift = |v: &FeatureVector| {
                let mut s = v.0;
                for f in [0, 3] {
                    s[f] += dx;
                }
                for f in [1, 4] {
                    s[f] += dy;
                }
                FeatureVector(s)
            };
            let params = SvrParams {
                gamma: GammaMode::Value(0.5),
                ..SvrParams::default()
            };
            let a = train_svr(&rows, &params).unwrap();
            let moved: Vec<_> = rows.iter().map(|(x, y)| (shift(x), *y)).collect();
            let b = train_svr(&moved, &params).unwrap();
            for (x, _) in &rows {
                let (pa, pb) = (a.predict(x), b.predict(&shift(x)));
                prop_assert!((pa - pb).abs() <= 1e-6, "{} vs {}", pa, pb);
            }
            Ok(())
        }),
        cases,
    )
}

fn direction_sensitivity() -> Outcome {
    // Links are 6 dB lossier when the transmitter sits west of the receiver.
    let cfg = SynthConfig {
        n_pairs: 150,
        samples_per_pair: 10,
        asymmetry_db: 6.0,
        seed: 21,
        ..SynthConfig::default()
    };
    let pairs = generate_pairs(&cfg).map_err(|e| e.to_string())?;
    let rows: Vec<(FeatureVector, f64)> = pairs
        .iter()
        .flat_map(|p| {
            [
                (FeatureVector::from(p), cfg.path_loss(p)),
                (
                    FeatureVector::from(&p.reversed()),
                    cfg.path_loss(&p.reversed()),
                ),
            ]
        })
        .collect();
    let gbrt = PathLossRegressor::Gbrt(
        train_gbrt(&rows, &GbrtParams::default()).map_err(|e| e.to_string())?,
    );
    let mut gaps = Vec::new();
    for p in &pairs {
        let (west, east) = if p.tx.x < p.rx.x {
            (*p, p.reversed())
        } else {
            (p.reversed(), *p)
        };
        gaps.push(gbrt.predict(&(&west).into()) - gbrt.predict(&(&east).into()));
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    if (mean - 6.0).abs() <= 1.0 {
        Ok(format!(
            "mean predicted direction gap {mean:.2} dB (true 6 dB)"
        ))
    } else {
        Err(format!(
            "mean predicted direction gap {mean:.2} dB, expected ~6 dB"
        ))
    }
}

fn short_link(seed: u64) -> LinkSimConfig {
    LinkSimConfig {
        warmup_s: 0.1,
        measure_s: 0.3,
        seed,
        trace_stride: 1,
        ..LinkSimConfig::default()
    }
}

fn noisy_friis(seed: u64) -> PropagationModel {
    PropagationModel::friis(5220.0)
        .with_normal_fading(0.0, 3.0, seed, 0)
        .unwrap()
}

fn linksim_determinism() -> Outcome {
    let cases = 10;
    let strat = (prop::collection::vec(pair(), 1..4), any::<u64>());
    finish(
        runner(cases).run(&strat, |(pairs, seed)| {
            let a = run_scenario(&pairs, &mut noisy_friis(seed), &short_link(seed)).unwrap();
            let b = run_scenario(&pairs, &mut noisy_friis(seed), &short_link(seed)).unwrap();
            prop_assert_eq!(a.outcomes(), b.outcomes());
            Ok(())
        }),
        cases,
    )
}

fn linksim_ceiling() -> Outcome {
    let cases = 15;
    let rates = prop::sample::select(vec![
        RateAdaptation::MinstrelLite,
        RateAdaptation::Fixed(6),
        RateAdaptation::Fixed(24),
        RateAdaptation::Fixed(54),
    ]);
    let strat = (pair(), rates, 200u64..1500, any::<u64>());
    finish(
        runner(cases).run(&strat, |(p, rate, payload, seed)| {
            let cfg = LinkSimConfig {
                rate_adaptation: rate,
                payload_bytes: payload,
                trace_stride: 0,
                ..short_link(seed)
            };
            let ceiling = cfg.throughput_ceiling_mbps().unwrap();
            let res = run_scenario(&[p], &mut noisy_friis(seed), &cfg).unwrap();
            let t = res.records[0].throughput_mbps;
            // One exchange may straddle the window edge.
            let slack = (payload * 8) as f64 / (cfg.measure_s * 1e6);
            prop_assert!(t <= ceiling + slack, "{} above ceiling {}", t, ceiling);
            Ok(())
        }),
        cases,
    )
}

fn linksim_preamble_gate() -> Outcome {
    let cases = 20;
    let strat = (pair(), -60.0..-30.0f64);
    finish(
        runner(cases).run(&strat, |(p, margin)| {
            // Threshold above the received power of every frame.
            let mut m = PropagationModel::friis(5220.0);
            let rx = -13.0 - m.path_loss(&p).unwrap();
            let cfg = LinkSimConfig {
                preamble_threshold_dbm: rx - margin,
                per_packet_fading: false,
                ..short_link(1)
            };
            prop_assume!(cfg.preamble_threshold_dbm > rx);
            let res = run_scenario(&[p], &mut m, &cfg).unwrap();
            let r = &res.records[0];
            prop_assert_eq!(r.delivered, 0);
            prop_assert_eq!(r.throughput_mbps, 0.0);
            prop_assert!(r.lost > 0);
            prop_assert!(r
                .trace
                .iter()
                .all(|f| !f.success && f.rx_power_dbm < cfg.preamble_threshold_dbm));
            Ok(())
        }),
        cases,
    )
}

fn linksim_warmup_exclusion() -> Outcome {
    let cases = 15;
    let strat = (pair(), 0.0..0.5f64, any::<u64>());
    finish(
        runner(cases).run(&strat, |(p, warmup, seed)| {
            let cfg = LinkSimConfig {
                warmup_s: warmup,
                ..short_link(seed)
            };
            let res = run_scenario(&[p], &mut noisy_friis(seed), &cfg).unwrap();
            let start = (warmup * 1e9).round() as u64;
            let end = start + (cfg.measure_s * 1e9).round() as u64;
            let r = &res.records[0];
            prop_assert!(r
                .trace
                .iter()
                .all(|f| f.time_ns >= start && f.time_ns < end));
            prop_assert_eq!(r.trace.len() as u64, r.delivered + r.lost);
            Ok(())
        }),
        cases,
    )
}
