//! Command-line front end: preprocess → train → fit-fading → eval →
//! simulate → bench, plus selftest and rerun.
//!
//! Every command that writes files also writes a manifest (inputs, seed,
//! version, output hashes). Exit codes: 0 success, 1 validation or usage
//! error, 2 I/O error, 3 self-test failure.

pub mod manifest;
pub mod scenario;
pub mod selftest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::channel::{ModelConfig, PropagationModel};
use crate::dataset::{
    self, decompose, derive_losses, load_dataset, read_preprocessed, remove_outliers_with,
    write_preprocessed, DecomposedDataset, RawSample, Split, DEFAULT_Z_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::fading::{
    cdf_fit_mse, export_cdf, fit_cdf, import_cdf, FadingCdf, DEFAULT_MAX_POINTS, FIT_BINS,
};
use crate::linksim::{benchmark, run_scenario, write_results, BenchCase, SimResult};
use crate::metrics::{error_cdf, loss_errors, percentile, write_cdf_csv, ErrorKind, ErrorSeries};
use crate::regress::{
    evaluate_mse, feature_rows, grid_search_svr, load_model, save_model, train_gbrt, train_svr,
    FoldPolicy, GammaMode, GbrtParams, PathLossRegressor, SvrGrid, SvrParams,
};

pub use manifest::Manifest;
pub use scenario::Scenario;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_SELFTEST: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "pmlpl",
    version,
    about = "Position-based ML propagation loss toolkit"
)]
pub struct Cli {
    /// Global seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print progress to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive losses, drop outliers, decompose and split a trace dataset.
    Preprocess(PreprocessArgs),
    /// Train a path-loss regressor on a preprocessed dataset.
    Train(TrainArgs),
    /// Fit the fast-fading CDF to training residuals.
    FitFading(FitFadingArgs),
    /// Score P-MLPL (and optionally baselines) on the test split.
    Eval(EvalArgs),
    /// Replay a scenario through the link simulator.
    Simulate(SimulateArgs),
    /// Time scenario runs with the path-loss cache off and on.
    Bench(BenchArgs),
    /// Check the vendored example model end to end.
    Selftest(SelftestArgs),
    /// Repeat the run recorded in a manifest and compare output hashes.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Link-budget JSON; required when rows carry SNR or received power
    /// instead of loss.
    #[arg(long)]
    pub budget: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_Z_THRESHOLD)]
    pub z_threshold: f64,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    #[value(alias = "xgboost")]
    Gbrt,
    Svr,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Preprocessed CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub n_trees: usize,
    #[arg(long, default_value_t = 6)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 0.3)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 1)]
    pub min_samples_leaf: usize,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// `scale` or a positive number.
    #[arg(long, default_value = "scale")]
    pub gamma: String,
    #[arg(long)]
    pub max_iterations: Option<u64>,
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    /// Pick SVR C and gamma by cross-validation on the training split.
    #[arg(long)]
    pub grid: bool,
    #[arg(long, default_value_t = 3)]
    pub folds: usize,
}

#[derive(Debug, Args)]
pub struct FitFadingArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_POINTS)]
    pub max_points: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub cdf: PathBuf,
    /// Preprocessed CSV; its test split is scored.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Also score Friis and log-distance.
    #[arg(long)]
    pub baselines: bool,
    /// Score path loss only: no fading draw, targets are path-loss values.
    #[arg(long)]
    pub no_fading: bool,
    #[arg(long, default_value_t = 5220.0)]
    pub frequency_mhz: f64,
    #[arg(long, default_value_t = 1.7)]
    pub exponent: f64,
    #[arg(long, default_value_t = 1.0)]
    pub reference_distance_m: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub model_config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Write recorded frames as a dataset CSV (SNR form) plus its link
    /// budget, for training a model on simulator output.
    #[arg(long)]
    pub export_trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// One or more model configs.
    #[arg(long = "model-config", required = true)]
    pub model_configs: Vec<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub repetitions: usize,
    /// Duration table CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Directory holding the example dataset, model, CDF and known pairs.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    pub manifest: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Errors are printed to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
        }
    };
    let argv: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(&cli, &argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Ctx<'a> {
    seed: u64,
    verbose: u8,
    argv: &'a [String],
}

impl Ctx<'_> {
    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose > 0 {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn manifest(&self, command: &str) -> Manifest {
        Manifest::new(command, self.argv, self.seed)
    }
}

fn execute(cli: &Cli, argv: &[String]) -> Result<i32> {
    let ctx = Ctx {
        seed: cli.seed,
        verbose: cli.verbose,
        argv,
    };
    match &cli.command {
        Command::Preprocess(a) => preprocess(&ctx, a).map(|_| EXIT_OK),
        Command::Train(a) => train(&ctx, a).map(|_| EXIT_OK),
        Command::FitFading(a) => fit_fading(&ctx, a).map(|_| EXIT_OK),
        Command::Eval(a) => eval(&ctx, a).map(|_| EXIT_OK),
        Command::Simulate(a) => simulate(&ctx, a).map(|_| EXIT_OK),
        Command::Bench(a) => bench(&ctx, a).map(|_| EXIT_OK),
        Command::Selftest(a) => {
            let dir = a
                .data_dir
                .clone()
                .unwrap_or_else(selftest::default_data_dir);
            let report = selftest::run_selftest(&dir);
            print!("{}", report.render());
            Ok(if report.passed() {
                EXIT_OK
            } else {
                EXIT_SELFTEST
            })
        }
        Command::Rerun(a) => rerun(a),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn preprocess(ctx: &Ctx, a: &PreprocessArgs) -> Result<DecomposedDataset> {
    if !(a.z_threshold > 0.0) {
        return Err(Error::validation("z_threshold must be > 0"));
    }
    let (raw, budget) = load_dataset(&a.dataset, a.budget.as_deref())?;
    let losses = derive_losses(&raw, budget.as_ref())?;
    let (kept, removed) = remove_outliers_with(&losses, a.z_threshold);
    let data = dataset::split(&decompose(&kept), a.train_fraction, ctx.seed)?;
    ctx.log(format!("{} samples, {removed} outliers removed", raw.len()));

    create_dir(&a.out_dir)?;
    let out = a.out_dir.join("preprocessed.csv");
    write_preprocessed(&data, &out)?;
    let summary = json!({
        "total_samples": raw.len(),
        "outliers_removed": removed,
        "kept_samples": data.len(),
        "pairs": data.path_loss_table.len(),
        "train_samples": data.samples_in(Split::Train).count(),
        "test_samples": data.samples_in(Split::Test).count(),
        "residual_std_db": data.residual_std(),
        "z_threshold": a.z_threshold,
        "train_fraction": a.train_fraction,
        "seed": ctx.seed,
    });
    let summary_path = a.out_dir.join("summary.json");
    write_json(&summary_path, &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);

    let mut m = ctx.manifest("preprocess");
    m.input(&a.dataset)?;
    if let Some(b) = &a.budget {
        m.input(b)?;
    }
    m.output(&out, true)?;
    m.output(&summary_path, true)?;
    m.report = summary;
    m.write(&a.out_dir.join("manifest.json"))?;
    Ok(data)
}

fn parse_gamma(s: &str) -> Result<GammaMode> {
    if s == "scale" {
        return Ok(GammaMode::Scale);
    }
    match s.parse::<f64>() {
        Ok(g) if g > 0.0 && g.is_finite() => Ok(GammaMode::Value(g)),
        _ => Err(Error::validation(format!(
            "gamma must be 'scale' or a positive number, got '{s}'"
        ))),
    }
}

fn gamma_json(g: GammaMode) -> serde_json::Value {
    match g {
        GammaMode::Scale => json!("scale"),
        GammaMode::Value(v) => json!(v),
    }
}

fn train(ctx: &Ctx, a: &TrainArgs) -> Result<PathLossRegressor> {
    let data = read_preprocessed(&a.data)?;
    let train_rows = feature_rows(&data.path_loss_rows(Split::Train));
    let test_rows = feature_rows(&data.path_loss_rows(Split::Test));
    let mut report = serde_json::Map::new();
    let model = match a.algo {
        Algo::Gbrt => {
            let params = GbrtParams {
                n_trees: a.n_trees,
                max_depth: a.max_depth,
                learning_rate: a.learning_rate,
                min_samples_leaf: a.min_samples_leaf,
                seed: ctx.seed,
                ..Default::default()
            };
            report.insert(
                "params".into(),
                json!({"n_trees": a.n_trees, "max_depth": a.max_depth,
                       "learning_rate": a.learning_rate, "min_samples_leaf": a.min_samples_leaf}),
            );
            PathLossRegressor::Gbrt(train_gbrt(&train_rows, &params)?)
        }
        Algo::Svr => {
            let mut params = SvrParams {
                c: a.c,
                epsilon: a.epsilon,
                gamma: parse_gamma(&a.gamma)?,
                max_iterations: a.max_iterations,
                tolerance: a.tolerance,
                seed: ctx.seed,
            };
            if a.grid {
                let grid = SvrGrid {
                    epsilon: vec![a.epsilon],
                    ..Default::default()
                };
                let res = grid_search_svr(
                    &train_rows,
                    &params,
                    &grid,
                    a.folds,
                    ctx.seed,
                    FoldPolicy::Samples,
                )?;
                let scores: Vec<_> = res
                    .scores
                    .iter()
                    .map(|(p, mse)| json!({"c": p.c, "gamma": gamma_json(p.gamma), "cv_mse": mse}))
                    .collect();
                report.insert("grid".into(), json!(scores));
                params = res.best;
            }
            report.insert(
                "params".into(),
                json!({"c": params.c, "epsilon": params.epsilon, "gamma": gamma_json(params.gamma),
                       "tolerance": params.tolerance, "max_iterations": params.max_iterations}),
            );
            let m = train_svr(&train_rows, &params)?;
            if !m.converged {
                eprintln!(
                    "warning: SVR solver stopped after {} iterations without converging",
                    m.iterations
                );
            }
            report.insert("converged".into(), json!(m.converged));
            report.insert("iterations".into(), json!(m.iterations));
            PathLossRegressor::Svr(m)
        }
    };
    let test_mse = if test_rows.is_empty() {
        None
    } else {
        Some(evaluate_mse(&model, &test_rows)?)
    };
    report.insert("algo".into(), json!(model.kind()));
    report.insert("train_rows".into(), json!(train_rows.len()));
    report.insert("test_rows".into(), json!(test_rows.len()));
    report.insert("test_mse_db2".into(), json!(test_mse));
    save_model(&model, &a.out)?;
    match test_mse {
        Some(mse) => println!(
            "{} test MSE: {mse:.4} dB^2 ({} rows)",
            model.kind(),
            test_rows.len()
        ),
        None => println!("{} trained; no test rows", model.kind()),
    }

    let mut m = ctx.manifest("train");
    m.input(&a.data)?;
    m.output(&a.out, true)?;
    m.report = serde_json::Value::Object(report);
    m.write(&sibling(&a.out, ".manifest.json"))?;
    Ok(model)
}

fn fit_fading(ctx: &Ctx, a: &FitFadingArgs) -> Result<FadingCdf> {
    let data = read_preprocessed(&a.data)?;
    let residuals: Vec<f64> = data.samples_in(Split::Train).map(|s| s.fading).collect();
    if residuals.is_empty() {
        return Err(Error::validation(format!(
            "{}: no training residuals",
            a.data.display()
        )));
    }
    if a.max_points == 2 {
        eprintln!(
            "warning: max_points 2 keeps only the minimum and maximum; the CDF is a straight line"
        );
    }
    let cdf = fit_cdf(&residuals, a.max_points)?;
    let mse = cdf_fit_mse(&cdf, &residuals, FIT_BINS)?;
    export_cdf(&cdf, &a.out)?;
    println!(
        "fading CDF: {} points, fit MSE {mse:.3e} over {FIT_BINS} bins",
        cdf.points().len()
    );

    let mut m = ctx.manifest("fit-fading");
    m.input(&a.data)?;
    m.output(&a.out, true)?;
    m.report = json!({
        "residuals": residuals.len(),
        "points": cdf.points().len(),
        "fit_mse": mse,
        "max_points": a.max_points,
    });
    m.write(&sibling(&a.out, ".manifest.json"))?;
    Ok(cdf)
}

/// Summary line of one scored model.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EvalRow {
    pub model: String,
    pub n: usize,
    pub mse: f64,
    pub mean_error: f64,
    pub median_abs: f64,
    pub p90_abs: f64,
    pub fraction_negative: f64,
}

impl EvalRow {
    fn from_series(s: &ErrorSeries) -> Result<Self> {
        Ok(Self {
            model: s.label.clone(),
            n: s.len(),
            mse: s.mse()?,
            mean_error: s.values.iter().sum::<f64>() / s.len() as f64,
            median_abs: s.median_abs()?,
            p90_abs: percentile(&s.absolute(), 90.0)?,
            fraction_negative: s.fraction_negative(),
        })
    }
}

fn slug(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect();
    s.split('-')
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join("-")
}

fn eval(ctx: &Ctx, a: &EvalArgs) -> Result<Vec<EvalRow>> {
    let regressor = Arc::new(load_model(&a.model)?);
    let cdf = if a.no_fading {
        FadingCdf::degenerate(0.0)
    } else {
        import_cdf(&a.cdf)?
    };
    let data = read_preprocessed(&a.data)?;
    let test = if a.no_fading {
        data.path_loss_rows(Split::Test)
    } else {
        data.total_loss_rows(Split::Test)
    };
    if test.is_empty() {
        return Err(Error::validation(format!(
            "{}: test split is empty",
            a.data.display()
        )));
    }
    let mut models = vec![PropagationModel::pmlpl(
        regressor,
        Arc::new(cdf),
        ctx.seed,
        0,
    )];
    if a.baselines {
        models.push(PropagationModel::friis(a.frequency_mhz));
        models.push(PropagationModel::log_distance(
            a.exponent,
            a.reference_distance_m,
            a.frequency_mhz,
        ));
    }
    create_dir(&a.out_dir)?;
    let mut m = ctx.manifest("eval");
    m.input(&a.model)?;
    if !a.no_fading {
        m.input(&a.cdf)?;
    }
    m.input(&a.data)?;
    let mut rows = Vec::new();
    for model in &mut models {
        let label = model.label();
        let series = loss_errors(model, &test, &label)?;
        for (absolute, name) in [(false, "signed"), (true, "abs")] {
            let path = a.out_dir.join(format!("{}_{name}_cdf.csv", slug(&label)));
            write_cdf_csv(
                &error_cdf(&series, absolute)?,
                &label,
                ErrorKind::Loss,
                ctx.seed,
                &path,
            )?;
            m.output(&path, true)?;
        }
        rows.push(EvalRow::from_series(&series)?);
    }
    let mut table =
        String::from("model,n,mse_db2,mean_error_db,median_abs_db,p90_abs_db,fraction_negative\n");
    for r in &rows {
        table.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            r.model, r.n, r.mse, r.mean_error, r.median_abs, r.p90_abs, r.fraction_negative
        ));
    }
    print!("{table}");
    let summary = a.out_dir.join("summary.csv");
    std::fs::write(&summary, &table).map_err(|e| Error::io(&summary, e))?;
    m.output(&summary, true)?;
    m.report = serde_json::to_value(&rows)?;
    m.write(&a.out_dir.join("manifest.json"))?;
    Ok(rows)
}

fn load_model_config(path: &Path, seed: u64) -> Result<ModelConfig> {
    let mut cfg = ModelConfig::load(path)?;
    cfg.seed = seed;
    Ok(cfg)
}

fn config_inputs(m: &mut Manifest, cfg: &ModelConfig) -> Result<()> {
    for p in [&cfg.regressor_path, &cfg.cdf_path].into_iter().flatten() {
        m.input(p)?;
    }
    Ok(())
}

fn simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<SimResult> {
    let scenario = Scenario::load(&a.scenario)?;
    let pairs = scenario.resolve_pairs()?;
    let model_cfg = load_model_config(&a.model_config, ctx.seed)?;
    let mut model = model_cfg.build()?;
    let mut link = scenario.link.clone();
    link.seed = ctx.seed;
    if a.export_trace.is_some() && link.trace_stride == 0 {
        link.trace_stride = 50;
    }
    ctx.log(format!(
        "simulating {} pair(s) with {}",
        pairs.len(),
        model.label()
    ));
    let result = run_scenario(&pairs, &mut model, &link)?;

    create_dir(&a.out_dir)?;
    let mut m = ctx.manifest("simulate");
    m.input(&a.scenario)?;
    if let Some(d) = &scenario.dataset {
        m.input(d)?;
    }
    m.input(&a.model_config)?;
    config_inputs(&mut m, &model_cfg)?;

    let results = a.out_dir.join("results.csv");
    write_results(&result, &results)?;
    m.output(&results, true)?;
    let run = json!({
        "seed": ctx.seed,
        "model": model.label(),
        "pairs": result.records.len(),
        "mean_throughput_mbps": result.mean_throughput(),
        "wall_clock_s": result.wall_clock_s,
        "cache": result.cache_stats,
    });
    let run_path = a.out_dir.join("run.json");
    write_json(&run_path, &run)?;
    m.output(&run_path, false)?;

    if let Some(trace) = &a.export_trace {
        let budget_path = sibling(trace, ".budget.json");
        export_trace(&result, &link, trace, &budget_path)?;
        m.output(trace, true)?;
        m.output(&budget_path, true)?;
    }
    println!(
        "{} pair(s), mean throughput {:.3} Mbit/s, {:.3} s wall clock",
        result.records.len(),
        result.mean_throughput(),
        result.wall_clock_s
    );
    m.report = json!({"mean_throughput_mbps": result.mean_throughput()});
    m.write(&a.out_dir.join("manifest.json"))?;
    Ok(result)
}

/// Recorded frames as dataset rows: received power, SNR against the
/// configured noise floor, and the pair's simulated throughput.
pub fn trace_samples(result: &SimResult, link: &crate::linksim::LinkSimConfig) -> Vec<RawSample> {
    let mut rows = Vec::new();
    for r in &result.records {
        for f in &r.trace {
            rows.push(RawSample {
                pair: r.pair,
                loss: None,
                snr: Some(f.rx_power_dbm - link.noise_floor_dbm),
                noise_floor: Some(link.noise_floor_dbm),
                rx_power: Some(f.rx_power_dbm),
                throughput: Some(r.throughput_mbps),
            });
        }
    }
    rows
}

pub fn export_trace(
    result: &SimResult,
    link: &crate::linksim::LinkSimConfig,
    csv_path: &Path,
    budget_path: &Path,
) -> Result<()> {
    let rows = trace_samples(result, link);
    if rows.is_empty() {
        return Err(Error::validation(
            "no frames were recorded; nothing to export",
        ));
    }
    dataset::write_raw(&rows, csv_path)?;
    write_json(budget_path, &serde_json::to_value(&link.budget)?)
}

fn bench(ctx: &Ctx, a: &BenchArgs) -> Result<()> {
    let scenario = Scenario::load(&a.scenario)?;
    let pairs = scenario.resolve_pairs()?;
    let configs = a
        .model_configs
        .iter()
        .map(|p| load_model_config(p, ctx.seed))
        .collect::<Result<Vec<_>>>()?;
    let mut cases = Vec::new();
    for cfg in &configs {
        let label = cfg.build()?.label();
        cases.push(BenchCase::new(label, move |seed| {
            ModelConfig {
                seed,
                ..cfg.clone()
            }
            .build()
        }));
    }
    let mut link = scenario.link.clone();
    link.seed = ctx.seed;
    let report = benchmark(&pairs, &cases, &link, a.repetitions)?;
    let csv = report.to_csv();
    print!("{csv}");
    for (label, ok) in &report.transparent {
        if !ok {
            eprintln!("warning: {label}: simulated outcomes differ between cache on and off");
        }
    }
    std::fs::write(&a.out, &csv).map_err(|e| Error::io(&a.out, e))?;

    let mut m = ctx.manifest("bench");
    m.input(&a.scenario)?;
    for (p, cfg) in a.model_configs.iter().zip(&configs) {
        m.input(p)?;
        config_inputs(&mut m, cfg)?;
    }
    m.output(&a.out, false)?;
    m.report = json!({
        "transparent": report.transparent,
        "speedup": report.transparent.iter()
            .map(|(l, _)| json!({"model": l, "speedup": report.speedup(l)}))
            .collect::<Vec<_>>(),
    });
    m.write(&sibling(&a.out, ".manifest.json"))
}

fn rerun(a: &RerunArgs) -> Result<i32> {
    let m = Manifest::load(&a.manifest)?;
    let mut args = vec![m.tool.clone()];
    args.extend(m.argv.iter().cloned());
    let here = std::env::current_dir().map_err(|e| Error::io(".", e))?;
    std::env::set_current_dir(&m.cwd).map_err(|e| Error::io(&m.cwd, e))?;
    let code = run(args);
    let changed = m.changed_outputs();
    std::env::set_current_dir(&here).map_err(|e| Error::io(&here, e))?;
    if code != EXIT_OK {
        return Ok(code);
    }
    let changed = changed?;
    if changed.is_empty() {
        println!("rerun: all primary outputs reproduced");
        Ok(EXIT_OK)
    } else {
        for p in &changed {
            eprintln!("rerun: output differs: {}", p.display());
        }
        Err(Error::validation(format!(
            "{} output(s) not reproduced",
            changed.len()
        )))
    }
}
