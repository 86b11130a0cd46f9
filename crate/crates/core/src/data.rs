//! Dataset container, LIBSVM text I/O, and seeded synthetic generation.
//!
//! LIBSVM lines are `<label> <index>:<value> ...` with 1-based indices;
//! internally indices are 0-based. Labels `0`/`-1` map to `-1`, labels
//! `1`/`+1` map to `+1`. Files ending in `.gz` are compressed transparently
//! on both read and write.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use rand::seq::index::sample as index_sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::objectives::LabeledSample;
use crate::sparse::{DenseVec, SparseVec};

#[derive(Debug, Clone)]
pub struct Dataset {
    pub samples: Vec<LabeledSample>,
    pub dim: usize,
    pub name: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Canonical LIBSVM bytes of the dataset; also the cache key material
    /// for anything derived from its contents.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for s in &self.samples {
            write_sample_line(&mut out, s).expect("writing to Vec cannot fail");
        }
        out
    }
}

fn parse_label(token: &str, path: &str, line: usize) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::Parse {
        path: path.to_string(),
        line,
        msg: format!("unparseable label {token:?}"),
    })?;
    if v == 1.0 {
        Ok(1.0)
    } else if v == 0.0 || v == -1.0 {
        Ok(-1.0)
    } else {
        Err(Error::Parse {
            path: path.to_string(),
            line,
            msg: format!("label {token} outside {{0, 1, -1, +1}}"),
        })
    }
}

/// Reads a LIBSVM file. The dimension is `dim_override` when given,
/// otherwise one past the largest feature index seen.
/// Source line number, label, and index/value pairs awaiting the second
/// pass (dimension inference happens after the whole file is read).
type RawLine = (usize, f64, Vec<(usize, f64)>);

pub fn read_libsvm(path: impl AsRef<Path>, dim_override: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let file = File::open(path)?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };

    let mut raw: Vec<RawLine> = Vec::new();
    let mut max_index = 0usize;
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let mut tokens = line.split_ascii_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let y = parse_label(label_tok, &shown, lineno)?;
        let mut pairs: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let (idx_str, val_str) = tok.split_once(':').ok_or_else(|| Error::Parse {
                path: shown.clone(),
                line: lineno,
                msg: format!("expected index:value, got {tok:?}"),
            })?;
            let idx: usize = idx_str.parse().map_err(|_| Error::Parse {
                path: shown.clone(),
                line: lineno,
                msg: format!("unparseable feature index {idx_str:?}"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    path: shown.clone(),
                    line: lineno,
                    msg: "feature indices are 1-based".into(),
                });
            }
            let val: f64 = val_str.parse().map_err(|_| Error::Parse {
                path: shown.clone(),
                line: lineno,
                msg: format!("unparseable feature value {val_str:?}"),
            })?;
            if pairs.last().is_some_and(|&(prev, _)| idx - 1 <= prev) {
                return Err(Error::Parse {
                    path: shown.clone(),
                    line: lineno,
                    msg: format!("feature indices must be strictly ascending at {idx_str}"),
                });
            }
            max_index = max_index.max(idx - 1);
            pairs.push((idx - 1, val));
        }
        raw.push((lineno, y, pairs));
    }

    let dim = dim_override.unwrap_or(if raw.is_empty() { 0 } else { max_index + 1 });
    let mut samples = Vec::with_capacity(raw.len());
    for (lineno, y, pairs) in raw {
        let x = SparseVec::from_pairs(dim, pairs).map_err(|e| Error::Parse {
            path: shown.clone(),
            line: lineno,
            msg: e.to_string(),
        })?;
        samples.push(LabeledSample::new(x, y)?);
    }
    Ok(Dataset {
        samples,
        dim,
        name: shown,
    })
}

fn write_sample_line(out: &mut impl Write, s: &LabeledSample) -> std::io::Result<()> {
    if s.y() > 0.0 {
        out.write_all(b"+1")?;
    } else {
        out.write_all(b"-1")?;
    }
    for (i, v) in s.x.iter() {
        write!(out, " {}:{}", i + 1, v)?;
    }
    out.write_all(b"\n")
}

/// Writes the canonical LIBSVM form: `+1`/`-1` labels, 1-based sorted
/// indices, shortest round-trip float formatting. Reading the result back
/// and writing it again reproduces the bytes.
pub fn write_libsvm(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path)?;
    let mut writer: Box<dyn Write> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(BufWriter::new(GzEncoder::new(
            file,
            flate2::Compression::default(),
        )))
    } else {
        Box::new(BufWriter::new(file))
    };
    for s in &data.samples {
        write_sample_line(&mut writer, s)?;
    }
    writer.flush()?;
    Ok(())
}

/// Generates `n` samples of dimension `dim` with `nnz` drawn uniformly from
/// `[nnz_lo, nnz_hi]`, distinct indices, and values uniform in `(0, 1]`.
/// Labels are `sign(planted_w . x + noise)` with `noise ~ N(0, 0.1)` when a
/// planted model is given, otherwise independent coin flips. Fully
/// deterministic in `seed`.
pub fn gen_synthetic(
    dim: usize,
    n: usize,
    nnz_lo: usize,
    nnz_hi: usize,
    seed: u64,
    planted_w: Option<&DenseVec>,
) -> Result<Dataset> {
    if nnz_lo < 1 || nnz_lo > nnz_hi || nnz_hi > dim {
        return Err(Error::Config(format!(
            "need 1 <= nnz_lo <= nnz_hi <= dim, got lo={nnz_lo} hi={nnz_hi} dim={dim}"
        )));
    }
    if let Some(w) = planted_w {
        if w.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: w.dim(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.1).expect("fixed std is valid");
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let k = rng.gen_range(nnz_lo..=nnz_hi);
        let mut pairs: Vec<(usize, f64)> = index_sample(&mut rng, dim, k)
            .into_iter()
            .map(|i| (i, 1.0 - rng.gen::<f64>()))
            .collect();
        pairs.sort_unstable_by_key(|&(i, _)| i);
        let x = SparseVec::from_pairs(dim, pairs)?;
        let y = match planted_w {
            Some(w) => {
                let margin = x.dot(w)? + noise.sample(&mut rng);
                if margin >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            None => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        samples.push(LabeledSample::new(x, y)?);
    }
    let name = format!("synthetic-d{dim}-n{n}-nnz{nnz_lo}-{nnz_hi}-seed{seed}");
    Ok(Dataset { samples, dim, name })
}
