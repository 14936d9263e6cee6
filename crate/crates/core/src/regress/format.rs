//! Binary model files. The byte layout is documented in `docs/model-format.md`.

use std::path::Path;

use super::{GbrtModel, Node, PathLossRegressor, SvrModel, Tree, N_FEATURES};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"PMLPLMDL";
pub const FORMAT_VERSION: u16 = 1;

const KIND_GBRT: u8 = 1;
const KIND_SVR: u8 = 2;
const TAG_LEAF: u8 = 0;
const TAG_SPLIT: u8 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn len32(&mut self, n: usize) -> Result<()> {
        let n = u32::try_from(n).map_err(|_| Error::ModelFormat("collection too large".into()))?;
        self.u32(n);
        Ok(())
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::ModelFormat(format!(
                "truncated file: needed {n} more byte(s) at offset {}",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    /// Element count, checked against the bytes left so a corrupt count
    /// cannot trigger a huge allocation.
    fn count(&mut self, min_elem_size: usize) -> Result<usize> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_elem_size) > self.buf.len() - self.pos {
            return Err(Error::ModelFormat(format!(
                "truncated file: count {n} exceeds remaining data"
            )));
        }
        Ok(n)
    }
}

/// Serializes a model to bytes.
pub fn write_model(model: &PathLossRegressor) -> Result<Vec<u8>> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u16(FORMAT_VERSION);
    match model {
        PathLossRegressor::Gbrt(m) => {
            w.u8(KIND_GBRT);
            w.f64(m.learning_rate);
            w.f64(m.base_prediction);
            w.len32(m.trees.len())?;
            for t in &m.trees {
                w.len32(t.nodes.len())?;
                for n in &t.nodes {
                    match *n {
                        Node::Leaf { value } => {
                            w.u8(TAG_LEAF);
                            w.f64(value);
                        }
                        Node::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => {
                            w.u8(TAG_SPLIT);
                            w.u8(feature as u8);
                            w.f64(threshold);
                            w.u32(left);
                            w.u32(right);
                        }
                    }
                }
            }
        }
        PathLossRegressor::Svr(m) => {
            w.u8(KIND_SVR);
            w.f64(m.kernel_gamma);
            w.f64(m.bias);
            m.feature_means.iter().for_each(|v| w.f64(*v));
            m.feature_scales.iter().for_each(|v| w.f64(*v));
            w.u8(m.converged as u8);
            w.u64(m.iterations);
            w.len32(m.support_vectors.len())?;
            for (sv, a) in m.support_vectors.iter().zip(&m.dual_coefficients) {
                sv.iter().for_each(|v| w.f64(*v));
                w.f64(*a);
            }
        }
    }
    Ok(w.0)
}

/// Parses bytes produced by [`write_model`].
pub fn read_model(bytes: &[u8]) -> Result<PathLossRegressor> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::ModelFormat("not a model file (bad magic)".into()));
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported format version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let model = match r.u8()? {
        KIND_GBRT => {
            let learning_rate = r.f64()?;
            let base_prediction = r.f64()?;
            let n_trees = r.count(4)?;
            let mut trees = Vec::with_capacity(n_trees);
            for _ in 0..n_trees {
                let n_nodes = r.count(9)?;
                let mut nodes = Vec::with_capacity(n_nodes);
                for _ in 0..n_nodes {
                    nodes.push(match r.u8()? {
                        TAG_LEAF => Node::Leaf { value: r.f64()? },
                        TAG_SPLIT => Node::Split {
                            feature: r.u8()? as usize,
                            threshold: r.f64()?,
                            left: r.u32()?,
                            right: r.u32()?,
                        },
                        t => return Err(Error::ModelFormat(format!("unknown node tag {t}"))),
                    });
                }
                trees.push(Tree { nodes });
            }
            let m = GbrtModel {
                trees,
                learning_rate,
                base_prediction,
            };
            m.validate()?;
            PathLossRegressor::Gbrt(m)
        }
        KIND_SVR => {
            let kernel_gamma = r.f64()?;
            let bias = r.f64()?;
            let mut feature_means = [0.0; N_FEATURES];
            let mut feature_scales = [0.0; N_FEATURES];
            for v in feature_means.iter_mut() {
                *v = r.f64()?;
            }
            for v in feature_scales.iter_mut() {
                *v = r.f64()?;
            }
            let converged = match r.u8()? {
                0 => false,
                1 => true,
                b => return Err(Error::ModelFormat(format!("invalid convergence flag {b}"))),
            };
            let iterations = r.u64()?;
            let n = r.count(8 * (N_FEATURES + 1))?;
            let mut support_vectors = Vec::with_capacity(n);
            let mut dual_coefficients = Vec::with_capacity(n);
            for _ in 0..n {
                let mut sv = [0.0; N_FEATURES];
                for v in sv.iter_mut() {
                    *v = r.f64()?;
                }
                support_vectors.push(sv);
                dual_coefficients.push(r.f64()?);
            }
            let m = SvrModel {
                support_vectors,
                dual_coefficients,
                bias,
                kernel_gamma,
                feature_means,
                feature_scales,
                converged,
                iterations,
            };
            m.validate()?;
            PathLossRegressor::Svr(m)
        }
        k => return Err(Error::ModelFormat(format!("unknown model kind tag {k}"))),
    };
    if r.pos != bytes.len() {
        return Err(Error::ModelFormat(format!(
            "{} trailing byte(s) after model payload",
            bytes.len() - r.pos
        )));
    }
    Ok(model)
}

pub fn save_model(model: &PathLossRegressor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_model(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PathLossRegressor> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_model(&bytes).map_err(|e| match e {
        Error::ModelFormat(m) => Error::ModelFormat(format!("{}: {m}", path.display())),
        e => e,
    })
}

impl PathLossRegressor {
    pub fn into_gbrt(self) -> Result<GbrtModel> {
        match self {
            PathLossRegressor::Gbrt(m) => Ok(m),
            other => Err(Error::ModelFormat(format!(
                "expected a gbrt model, found {}",
                other.kind()
            ))),
        }
    }

    pub fn into_svr(self) -> Result<SvrModel> {
        match self {
            PathLossRegressor::Svr(m) => Ok(m),
            other => Err(Error::ModelFormat(format!(
                "expected an svr model, found {}",
                other.kind()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::{train_gbrt, train_svr, FeatureVector, GbrtParams, SvrParams};

    fn rows() -> Vec<(FeatureVector, f64)> {
        (0..40)
            .map(|i| {
                let t = i as f64;
                (
                    FeatureVector([0.0, 0.0, 1.0, t, (t * 0.7).sin() * 5.0, 1.5]),
                    50.0 + 10.0 * (1.0 + t).log10() + (t * 0.3).cos(),
                )
            })
            .collect()
    }

    #[test]
    fn gbrt_bytes_round_trip() {
        let m = PathLossRegressor::Gbrt(
            train_gbrt(
                &rows(),
                &GbrtParams {
                    n_trees: 10,
                    ..Default::default()
                },
            )
            .unwrap(),
        );
        assert_eq!(read_model(&write_model(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn svr_bytes_round_trip() {
        let m = PathLossRegressor::Svr(train_svr(&rows(), &SvrParams::default()).unwrap());
        assert_eq!(read_model(&write_model(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn rejects_corruption() {
        let m = PathLossRegressor::Gbrt(
            train_gbrt(
                &rows(),
                &GbrtParams {
                    n_trees: 3,
                    ..Default::default()
                },
            )
            .unwrap(),
        );
        let bytes = write_model(&m).unwrap();

        let mut bad_kind = bytes.clone();
        bad_kind[10] = 9;
        assert!(read_model(&bad_kind)
            .unwrap_err()
            .to_string()
            .contains("kind"));

        let mut bad_version = bytes.clone();
        bad_version[8] = 2;
        assert!(read_model(&bad_version)
            .unwrap_err()
            .to_string()
            .contains("version"));

        let truncated = &bytes[..bytes.len() - 3];
        assert!(read_model(truncated)
            .unwrap_err()
            .to_string()
            .contains("truncated"));

        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(read_model(&trailing).is_err());

        assert!(read_model(b"nonsense").is_err());
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let m = PathLossRegressor::Gbrt(GbrtModel::constant(3.0));
        let back = read_model(&write_model(&m).unwrap()).unwrap();
        assert!(back.clone().into_svr().is_err());
        assert!(back.into_gbrt().is_ok());
    }
}
