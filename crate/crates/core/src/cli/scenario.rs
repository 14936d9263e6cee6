use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{Position, PositionPair, CSV_HEADER};
use crate::error::{Error, Result};
use crate::linksim::LinkSimConfig;

/// Simulation scenario file: link parameters plus the pairs to replay,
/// listed inline or taken from a dataset CSV (unique pairs in order of first
/// appearance). Relative dataset paths resolve against the scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub link: LinkSimConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PositionPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    /// Use at most this many pairs from the dataset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_pairs: Option<usize>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut s: Scenario = serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
        if let Some(d) = &mut s.dataset {
            if d.is_relative() {
                *d = path.parent().unwrap_or(Path::new(".")).join(&*d);
            }
        }
        Ok(s)
    }

    /// Inline pairs followed by the dataset pairs.
    pub fn resolve_pairs(&self) -> Result<Vec<PositionPair>> {
        let mut pairs = self.pairs.clone();
        if let Some(d) = &self.dataset {
            let mut from_file = read_pairs(d)?;
            if let Some(n) = self.max_pairs {
                from_file.truncate(n);
            }
            pairs.extend(from_file);
        }
        if pairs.is_empty() {
            return Err(Error::validation("scenario lists no position pairs"));
        }
        Ok(pairs)
    }
}

/// Unique position pairs of a dataset CSV (raw or preprocessed), in order
/// of first appearance.
pub fn read_pairs(path: &Path) -> Result<Vec<PositionPair>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let header = r.headers()?.clone();
    if header.len() < 6 || header.iter().take(6).ne(CSV_HEADER.iter().take(6).copied()) {
        return Err(Error::Parse {
            path: path.into(),
            row: 1,
            message: format!(
                "expected header starting with {}",
                CSV_HEADER[..6].join(",")
            ),
        });
    }
    let mut seen = HashSet::new();
    let mut pairs = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line() as usize);
        let mut c = [0.0; 6];
        for (i, v) in c.iter_mut().enumerate() {
            *v = rec
                .get(i)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| Error::Parse {
                    path: path.into(),
                    row,
                    message: format!("column {} is not a number", CSV_HEADER[i]),
                })?;
        }
        let p = PositionPair::new(
            Position::new(c[0], c[1], c[2]),
            Position::new(c[3], c[4], c[5]),
        );
        if seen.insert(p) {
            pairs.push(p);
        }
    }
    Ok(pairs)
}
