//! Trace ingestion and preprocessing.
//!
//! A trace is a CSV file of `(transmitter position, receiver position)`
//! samples that carry either a propagation loss directly, or the received
//! power / SNR from which the loss is derived with a link budget. The
//! preprocessing chain is
//!
//! ```text
//! load_dataset -> derive_loss -> remove_outliers -> decompose -> split
//! ```
//!
//! and ends with a [`DecomposedDataset`] whose samples are split into a
//! deterministic path loss (the per-pair mean) and a zero-mean fading residual.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Purpose, StreamRng};

/// Column layout of a raw trace CSV.
pub const CSV_HEADER: [&str; 11] = [
    "tx_x",
    "tx_y",
    "tx_z",
    "rx_x",
    "rx_y",
    "rx_z",
    "loss_db",
    "snr_db",
    "noise_dbm",
    "rx_power_dbm",
    "throughput_mbps",
];

/// Extra columns appended to [`CSV_HEADER`] in preprocessed files.
pub const PREPROCESSED_EXTRA: [&str; 3] = ["path_loss_db", "fading_db", "split"];

/// Noise floor used when a row does not carry one: thermal noise over 20 MHz
/// (-101 dBm) plus a 7 dB receiver noise figure.
pub const DEFAULT_NOISE_FLOOR_DBM: f64 = -94.0;

/// Outlier threshold on the absolute z-score.
pub const DEFAULT_Z_THRESHOLD: f64 = 5.0;

/// Cartesian position in meters relative to the scenario origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const ORIGIN: Position = Position {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(&self, other: &Position) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn translated(&self, dx: f64, dy: f64, dz: f64) -> Self {
        Self::new(self.x + dx, self.y + dy, self.z + dz)
    }
}

/// Ordered transmitter/receiver positions. `(a, b)` and `(b, a)` are
/// different pairs.
///
/// Equality, hashing and ordering compare the coordinate bit patterns (with
/// `-0.0` folded onto `0.0`), so pairs can key hash maps and ordered maps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PositionPair {
    pub tx: Position,
    pub rx: Position,
}

impl PositionPair {
    pub fn new(tx: Position, rx: Position) -> Self {
        Self { tx, rx }
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.rx, self.tx)
    }

    pub fn distance(&self) -> f64 {
        self.tx.distance(&self.rx)
    }

    /// `[tx.x, tx.y, tx.z, rx.x, rx.y, rx.z]`
    pub fn coords(&self) -> [f64; 6] {
        [
            self.tx.x, self.tx.y, self.tx.z, self.rx.x, self.rx.y, self.rx.z,
        ]
    }

    fn key_bits(&self) -> [u64; 6] {
        self.coords()
            .map(|c| if c == 0.0 { 0 } else { c.to_bits() })
    }
}

impl PartialEq for PositionPair {
    fn eq(&self, other: &Self) -> bool {
        self.key_bits() == other.key_bits()
    }
}

impl Eq for PositionPair {}

impl Hash for PositionPair {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key_bits().hash(state)
    }
}

impl Ord for PositionPair {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coords()
            .iter()
            .zip(other.coords().iter())
            .map(|(a, b)| {
                let a = if *a == 0.0 { 0.0 } else { *a };
                let b = if *b == 0.0 { 0.0 } else { *b };
                a.total_cmp(&b)
            })
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

impl PartialOrd for PositionPair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for PositionPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {}, {}) -> ({}, {}, {})",
            self.tx.x, self.tx.y, self.tx.z, self.rx.x, self.rx.y, self.rx.z
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WifiStandard {
    #[serde(rename = "802.11a")]
    Ieee80211a,
}

/// Radio parameters of the testbed that recorded a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub wifi_standard: WifiStandard,
    pub tx_power_dbm: f64,
    pub tx_antenna_gain_dbi: f64,
    pub rx_antenna_gain_dbi: f64,
    pub channel_frequency_mhz: f64,
    pub channel_bandwidth_mhz: f64,
}

impl LinkBudget {
    /// Testbed parameters of the warehouse traces: 1 dBm, -7 dBi antennas,
    /// 5220 MHz, 20 MHz.
    pub fn warehouse() -> Self {
        Self {
            wifi_standard: WifiStandard::Ieee80211a,
            tx_power_dbm: 1.0,
            tx_antenna_gain_dbi: -7.0,
            rx_antenna_gain_dbi: -7.0,
            channel_frequency_mhz: 5220.0,
            channel_bandwidth_mhz: 20.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.tx_power_dbm,
            self.tx_antenna_gain_dbi,
            self.rx_antenna_gain_dbi,
            self.channel_frequency_mhz,
            self.channel_bandwidth_mhz,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::validation("link budget values must be finite"));
        }
        if self.channel_frequency_mhz <= 0.0 {
            return Err(Error::validation("channel_frequency_mhz must be > 0"));
        }
        if self.channel_bandwidth_mhz <= 0.0 {
            return Err(Error::validation("channel_bandwidth_mhz must be > 0"));
        }
        Ok(())
    }

    /// Sum of transmit power and both antenna gains, dBm.
    pub fn eirp_with_rx_gain(&self) -> f64 {
        self.tx_power_dbm + self.tx_antenna_gain_dbi + self.rx_antenna_gain_dbi
    }
}

/// One trace row as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    pub pair: PositionPair,
    pub loss: Option<f64>,
    pub snr: Option<f64>,
    pub noise_floor: Option<f64>,
    pub rx_power: Option<f64>,
    pub throughput: Option<f64>,
}

impl RawSample {
    pub fn with_loss(pair: PositionPair, loss: f64) -> Self {
        Self {
            pair,
            loss: Some(loss),
            snr: None,
            noise_floor: None,
            rx_power: None,
            throughput: None,
        }
    }

    fn has_loss_source(&self) -> bool {
        self.loss.is_some() || self.rx_power.is_some() || self.snr.is_some()
    }

    fn needs_budget(&self) -> bool {
        self.loss.is_none()
    }
}

/// A sample whose total propagation loss is known.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSample {
    pub pair: PositionPair,
    pub loss: f64,
    pub source: RawSample,
}

impl LossSample {
    pub fn new(pair: PositionPair, loss: f64) -> Self {
        Self {
            pair,
            loss,
            source: RawSample::with_loss(pair, loss),
        }
    }
}

/// Reads a link-budget JSON file.
pub fn load_link_budget(path: impl AsRef<Path>) -> Result<LinkBudget> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let budget: LinkBudget = serde_json::from_str(&text)
        .map_err(|e| Error::validation(format!("{}: invalid link budget: {e}", path.display())))?;
    budget.validate()?;
    Ok(budget)
}

fn check_header(path: &Path, found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found != expected {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            row: 1,
            message: format!(
                "header mismatch: expected `{}`, found `{}`",
                expected.join(","),
                found.join(",")
            ),
        });
    }
    Ok(())
}

fn parse_cell(
    path: &Path,
    row: usize,
    record: &csv::StringRecord,
    idx: usize,
) -> Result<Option<f64>> {
    let Some(cell) = record.get(idx).map(str::trim) else {
        return Ok(None);
    };
    if cell.is_empty() {
        return Ok(None);
    }
    let v: f64 = cell.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        row,
        message: format!(
            "column `{}`: cannot parse `{cell}` as a number",
            CSV_HEADER[idx]
        ),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            row,
            message: format!("column `{}`: value must be finite", CSV_HEADER[idx]),
        });
    }
    Ok(Some(v))
}

fn parse_raw_row(
    path: &Path,
    row: usize,
    record: &csv::StringRecord,
    max_fields: usize,
) -> Result<RawSample> {
    if record.len() > max_fields {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            row,
            message: format!(
                "expected at most {} fields, found {}",
                max_fields,
                record.len()
            ),
        });
    }
    let mut coords = [0.0; 6];
    for (i, c) in coords.iter_mut().enumerate() {
        *c = parse_cell(path, row, record, i)?.ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            row,
            message: format!("missing mandatory column `{}`", CSV_HEADER[i]),
        })?;
    }
    let pair = PositionPair::new(
        Position::new(coords[0], coords[1], coords[2]),
        Position::new(coords[3], coords[4], coords[5]),
    );
    let sample = RawSample {
        pair,
        loss: parse_cell(path, row, record, 6)?,
        snr: parse_cell(path, row, record, 7)?,
        noise_floor: parse_cell(path, row, record, 8)?,
        rx_power: parse_cell(path, row, record, 9)?,
        throughput: parse_cell(path, row, record, 10)?,
    };
    if !sample.has_loss_source() {
        return Err(Error::validation(format!(
            "{}: row {row}: no loss_db, snr_db or rx_power_dbm; propagation loss cannot be derived",
            path.display()
        )));
    }
    Ok(sample)
}

/// Reads a raw trace CSV and, when given, its link-budget JSON.
///
/// Trailing empty optional cells may be omitted from a row. If any row lacks
/// `loss_db` and no budget is supplied, loading fails with a message asking
/// for one.
pub fn load_dataset(
    csv_path: impl AsRef<Path>,
    link_budget_path: Option<&Path>,
) -> Result<(Vec<RawSample>, Option<LinkBudget>)> {
    let path = csv_path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(file);
    let header = reader.headers()?.clone();
    check_header(path, &header, &CSV_HEADER)?;

    let mut samples = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            row: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        samples.push(parse_raw_row(path, row, &record, CSV_HEADER.len())?);
    }

    let budget = link_budget_path.map(load_link_budget).transpose()?;
    if budget.is_none() && samples.iter().any(RawSample::needs_budget) {
        return Err(Error::validation(format!(
            "{}: rows without loss_db need a link-budget JSON to derive the loss; supply one",
            path.display()
        )));
    }
    Ok((samples, budget))
}

/// Total propagation loss of a sample, excluding antenna gains.
///
/// A recorded `loss` is returned as is. Otherwise the received power is taken
/// from `rx_power`, or computed as `noise_floor + snr` (with
/// [`DEFAULT_NOISE_FLOOR_DBM`] when the row has no noise floor), and
/// `loss = tx_power + tx_gain + rx_gain - rx_power`.
pub fn derive_loss(sample: &RawSample, budget: Option<&LinkBudget>) -> Result<f64> {
    if let Some(loss) = sample.loss {
        return Ok(loss);
    }
    let rx_power = match (sample.rx_power, sample.snr) {
        (Some(p), _) => p,
        (None, Some(snr)) => sample.noise_floor.unwrap_or(DEFAULT_NOISE_FLOOR_DBM) + snr,
        (None, None) => {
            return Err(Error::validation(format!(
                "sample {}: needs loss_db, rx_power_dbm or snr_db",
                sample.pair
            )))
        }
    };
    let budget = budget.ok_or_else(|| {
        Error::validation(format!(
            "sample {}: deriving loss from received power needs a link budget",
            sample.pair
        ))
    })?;
    Ok(budget.eirp_with_rx_gain() - rx_power)
}

/// Applies [`derive_loss`] to every raw sample.
pub fn derive_losses(
    samples: &[RawSample],
    budget: Option<&LinkBudget>,
) -> Result<Vec<LossSample>> {
    samples
        .iter()
        .map(|s| {
            Ok(LossSample {
                pair: s.pair,
                loss: derive_loss(s, budget)?,
                source: s.clone(),
            })
        })
        .collect()
}

fn group_indices(samples: &[LossSample]) -> HashMap<PositionPair, Vec<usize>> {
    let mut groups: HashMap<PositionPair, Vec<usize>> = HashMap::new();
    for (i, s) in samples.iter().enumerate() {
        groups.entry(s.pair).or_default().push(i);
    }
    groups
}

/// Drops samples whose absolute z-score within their position-pair group is
/// strictly above `threshold`. Population mean and deviation are used; groups
/// with zero deviation are kept whole. Sample order is preserved.
pub fn remove_outliers_with(samples: &[LossSample], threshold: f64) -> (Vec<LossSample>, usize) {
    let mut keep = vec![true; samples.len()];
    for idx in group_indices(samples).values() {
        let n = idx.len() as f64;
        let mean = idx.iter().map(|&i| samples[i].loss).sum::<f64>() / n;
        let var = idx
            .iter()
            .map(|&i| (samples[i].loss - mean).powi(2))
            .sum::<f64>()
            / n;
        let sigma = var.sqrt();
        if sigma == 0.0 {
            continue;
        }
        for &i in idx {
            if ((samples[i].loss - mean) / sigma).abs() > threshold {
                keep[i] = false;
            }
        }
    }
    let kept: Vec<LossSample> = samples
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(s, _)| s.clone())
        .collect();
    let removed = samples.len() - kept.len();
    (kept, removed)
}

/// [`remove_outliers_with`] at the default |z| > 5 threshold.
pub fn remove_outliers(samples: &[LossSample]) -> (Vec<LossSample>, usize) {
    remove_outliers_with(samples, DEFAULT_Z_THRESHOLD)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedSample {
    pub pair: PositionPair,
    pub total_loss: f64,
    pub path_loss: f64,
    pub fading: f64,
    pub split: Split,
    pub source: RawSample,
}

/// Samples separated into per-pair path loss and pooled fading residuals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecomposedDataset {
    /// Mean total loss of every position pair.
    pub path_loss_table: BTreeMap<PositionPair, f64>,
    pub samples: Vec<DecomposedSample>,
}

impl DecomposedDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Fading residuals of all samples, in sample order.
    pub fn fading_residuals(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.fading).collect()
    }

    pub fn samples_in(&self, split: Split) -> impl Iterator<Item = &DecomposedSample> {
        self.samples.iter().filter(move |s| s.split == split)
    }

    /// `(pair, path loss)` rows of one partition, the regressor training format.
    pub fn path_loss_rows(&self, split: Split) -> Vec<(PositionPair, f64)> {
        self.samples_in(split)
            .map(|s| (s.pair, s.path_loss))
            .collect()
    }

    /// `(pair, total loss)` rows of one partition.
    pub fn total_loss_rows(&self, split: Split) -> Vec<(PositionPair, f64)> {
        self.samples_in(split)
            .map(|s| (s.pair, s.total_loss))
            .collect()
    }

    /// Population standard deviation of the fading residuals.
    pub fn residual_std(&self) -> f64 {
        let r = self.fading_residuals();
        if r.is_empty() {
            return 0.0;
        }
        let n = r.len() as f64;
        let mean = r.iter().sum::<f64>() / n;
        (r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
    }
}

/// Splits every sample's total loss into the mean loss of its position pair
/// and a residual. All samples start in the training partition.
pub fn decompose(samples: &[LossSample]) -> DecomposedDataset {
    let mut sums: BTreeMap<PositionPair, (f64, usize)> = BTreeMap::new();
    for s in samples {
        let e = sums.entry(s.pair).or_insert((0.0, 0));
        e.0 += s.loss;
        e.1 += 1;
    }
    let table: BTreeMap<PositionPair, f64> = sums
        .into_iter()
        .map(|(p, (sum, n))| (p, sum / n as f64))
        .collect();
    let samples = samples
        .iter()
        .map(|s| {
            let path_loss = table[&s.pair];
            DecomposedSample {
                pair: s.pair,
                total_loss: s.loss,
                path_loss,
                fading: s.loss - path_loss,
                split: Split::Train,
                source: s.source.clone(),
            }
        })
        .collect();
    DecomposedDataset {
        path_loss_table: table,
        samples,
    }
}

/// Number of training samples for `n` samples: `round(fraction * n)`, kept
/// within `1..n` so both partitions are non-empty.
pub fn train_count(n: usize, train_fraction: f64) -> usize {
    ((train_fraction * n as f64).round() as usize).clamp(1, n - 1)
}

/// Randomly labels samples as train or test. The partition depends only on
/// `(seed, number of samples, train_fraction)`.
pub fn split(
    dataset: &DecomposedDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<DecomposedDataset> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::validation(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let n = dataset.len();
    if n < 2 {
        return Err(Error::validation(format!(
            "cannot split {n} sample(s); need at least 2"
        )));
    }
    let labels = partition_labels(n, train_fraction, seed);
    let mut out = dataset.clone();
    for (s, l) in out.samples.iter_mut().zip(labels) {
        s.split = l;
    }
    Ok(out)
}

fn partition_labels(n: usize, train_fraction: f64, seed: u64) -> Vec<Split> {
    let mut rng = StreamRng::new(seed, 0, Purpose::Split, 0);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.index(i + 1);
        order.swap(i, j);
    }
    let n_train = train_count(n, train_fraction);
    let mut labels = vec![Split::Test; n];
    for &i in &order[..n_train] {
        labels[i] = Split::Train;
    }
    labels
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the preprocessed CSV: the raw schema (with `loss_db` holding the
/// derived total loss) followed by `path_loss_db`, `fading_db` and `split`.
/// Rows keep dataset order and numbers use shortest round-trip formatting.
pub fn write_preprocessed(dataset: &DecomposedDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    let header: Vec<&str> = CSV_HEADER
        .iter()
        .chain(PREPROCESSED_EXTRA.iter())
        .copied()
        .collect();
    writeln!(out, "{}", header.join(",")).expect("write to vec");
    for s in &dataset.samples {
        let c = s.pair.coords();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c[0],
            c[1],
            c[2],
            c[3],
            c[4],
            c[5],
            s.total_loss,
            fmt_opt(s.source.snr),
            fmt_opt(s.source.noise_floor),
            fmt_opt(s.source.rx_power),
            fmt_opt(s.source.throughput),
            s.path_loss,
            s.fading,
            s.split.as_str()
        )
        .expect("write to vec");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a file produced by [`write_preprocessed`].
pub fn read_preprocessed(path: impl AsRef<Path>) -> Result<DecomposedDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let expected: Vec<&str> = CSV_HEADER
        .iter()
        .chain(PREPROCESSED_EXTRA.iter())
        .copied()
        .collect();
    check_header(path, reader.headers()?, &expected)?;

    let mut ds = DecomposedDataset::default();
    for result in reader.records() {
        let record = result.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            row: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let raw = parse_raw_row(path, row, &record, expected.len())?;
        let num = |idx: usize, name: &str| -> Result<f64> {
            record
                .get(idx)
                .and_then(|c| c.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    row,
                    message: format!("column `{name}` missing or not a number"),
                })
        };
        let total_loss = raw.loss.ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            row,
            message: "preprocessed rows must carry loss_db".into(),
        })?;
        let path_loss = num(11, "path_loss_db")?;
        let fading = num(12, "fading_db")?;
        let split = match record.get(13).map(str::trim) {
            Some("train") => Split::Train,
            Some("test") => Split::Test,
            other => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row,
                    message: format!("split must be `train` or `test`, found {other:?}"),
                })
            }
        };
        ds.path_loss_table.insert(raw.pair, path_loss);
        ds.samples.push(DecomposedSample {
            pair: raw.pair,
            total_loss,
            path_loss,
            fading,
            split,
            source: raw,
        });
    }
    Ok(ds)
}

/// Writes a raw trace CSV in the [`CSV_HEADER`] layout.
pub fn write_raw(samples: &[RawSample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    writeln!(out, "{}", CSV_HEADER.join(",")).expect("write to vec");
    for s in samples {
        let c = s.pair.coords();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c[0],
            c[1],
            c[2],
            c[3],
            c[4],
            c[5],
            fmt_opt(s.loss),
            fmt_opt(s.snr),
            fmt_opt(s.noise_floor),
            fmt_opt(s.rx_power),
            fmt_opt(s.throughput)
        )
        .expect("write to vec");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
