//! Nearest-neighbor recognition over z-scored feature vectors, and the
//! template store file format.
//!
//! A store file is UTF-8 text with LF line endings:
//!
//! ```text
//! GLYPHSTORE v1
//! dim <D> size <S> rings <R>
//! mean <D decimals>
//! std <D decimals>
//! <label>\t<D decimals>
//! ...
//! ```
//!
//! Decimals are written in the shortest form that parses back to the same
//! `f64`, so a store survives a save/load cycle bit for bit.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::features::{feature_vector, FeatureConfig, FeatureError};
use crate::glyphnorm::Glyph;

const MAGIC: &str = "GLYPHSTORE";
const VERSION: &str = "v1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("no training samples")]
    EmptyTrainingSet,
    #[error("no vectors to fit normalization on")]
    NoVectors,
    #[error("training sample `{sample}` has an empty glyph")]
    EmptySample { sample: String },
    #[error("training sample `{sample}`: {source}")]
    Sample {
        sample: String,
        #[source]
        source: FeatureError,
    },
    #[error("label {label:?} is empty or contains a tab or line break")]
    InvalidLabel { label: String },
    #[error("vector has {actual} components, expected {expected}")]
    DimMismatch { expected: usize, actual: usize },
    #[error("query glyph is {query}x{query} but the store was built from {store}x{store} glyphs")]
    ConfigMismatch { store: usize, query: usize },
    #[error("neighbor count must be at least 1")]
    ZeroNeighbors,
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("unsupported store version `{0}` (expected {MAGIC} {VERSION})")]
    UnsupportedVersion(String),
    #[error("store line {line}: {reason}")]
    Format { line: usize, reason: String },
}

fn format_err(line: usize, reason: impl Into<String>) -> StoreError {
    StoreError::Format {
        line,
        reason: reason.into(),
    }
}

/// One labeled exemplar.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub label: String,
    pub vector: Vec<f64>,
}

/// A glyph to learn, with a name used in error messages.
#[derive(Clone, Debug)]
pub struct TrainingSample {
    pub name: String,
    pub label: String,
    pub glyph: Glyph,
}

/// One of the nearest records to a query.
#[derive(Clone, Debug, PartialEq)]
pub struct Neighbor {
    pub record: usize,
    pub label: String,
    pub distance: f64,
}

/// Outcome of [`TemplateStore::classify`].
#[derive(Clone, Debug, PartialEq)]
pub struct Match {
    pub label: String,
    /// Distance to the closest record carrying `label`.
    pub distance: f64,
    /// The `k` nearest records, closest first.
    pub ranked: Vec<Neighbor>,
}

fn check_label(label: &str) -> Result<(), ClassifyError> {
    if label.is_empty() || label.contains(['\t', '\n', '\r']) {
        return Err(ClassifyError::InvalidLabel {
            label: label.to_string(),
        });
    }
    Ok(())
}

/// Per-dimension mean and population standard deviation. Dimensions with no
/// spread get a standard deviation of 1.
pub fn fit_normalization(vectors: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>), ClassifyError> {
    let first = vectors.first().ok_or(ClassifyError::NoVectors)?;
    let dim = first.len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(ClassifyError::DimMismatch {
            expected: dim,
            actual: bad.len(),
        });
    }
    let n = vectors.len() as f64;
    let mut mean = vec![0.0; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let mut std = vec![0.0; dim];
    for v in vectors {
        for ((s, x), m) in std.iter_mut().zip(v).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    for (d, s) in std.iter_mut().enumerate() {
        // Compare values directly: a rounded mean can leave a constant
        // dimension with a tiny nonzero spread.
        if vectors.iter().all(|v| v[d] == first[d]) {
            mean[d] = first[d];
            *s = 1.0;
        } else {
            *s = (*s / n).sqrt();
        }
    }
    Ok((mean, std))
}

/// Labeled feature vectors plus the statistics used to z-score them.
#[derive(Clone, Debug, PartialEq)]
pub struct TemplateStore {
    config: FeatureConfig,
    records: Vec<Record>,
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl TemplateStore {
    /// Builds a store from raw vectors and fits normalization over them.
    pub fn from_records(config: FeatureConfig, records: Vec<Record>) -> Result<Self, ClassifyError> {
        if records.is_empty() {
            return Err(ClassifyError::EmptyTrainingSet);
        }
        for r in &records {
            check_label(&r.label)?;
            if r.vector.len() != config.dim() {
                return Err(ClassifyError::DimMismatch {
                    expected: config.dim(),
                    actual: r.vector.len(),
                });
            }
        }
        let vectors: Vec<Vec<f64>> = records.iter().map(|r| r.vector.clone()).collect();
        let (mean, std) = fit_normalization(&vectors)?;
        Ok(Self {
            config,
            records,
            mean,
            std,
        })
    }

    pub fn config(&self) -> FeatureConfig {
        self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    fn zscore(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }

    /// Recognizes a glyph extracted with this store's configuration.
    pub fn classify(&self, g: &Glyph, k: usize) -> Result<Match, ClassifyError> {
        if g.size() != self.config.size {
            return Err(ClassifyError::ConfigMismatch {
                store: self.config.size,
                query: g.size(),
            });
        }
        let v = feature_vector(g, self.config)?;
        self.classify_vector(v.values(), k)
    }

    /// k-nearest-neighbor vote on a raw (un-normalized) feature vector.
    ///
    /// The label held by most of the `k` nearest records wins; a tie goes to
    /// the smaller summed distance, then to the lexicographically smaller
    /// label. Records at equal distance keep store order.
    pub fn classify_vector(&self, query: &[f64], k: usize) -> Result<Match, ClassifyError> {
        if k == 0 {
            return Err(ClassifyError::ZeroNeighbors);
        }
        if query.len() != self.dim() {
            return Err(ClassifyError::DimMismatch {
                expected: self.dim(),
                actual: query.len(),
            });
        }
        let q = self.zscore(query);
        let mut scored: Vec<(usize, f64)> = self
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let d2: f64 = self
                    .zscore(&r.vector)
                    .iter()
                    .zip(&q)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (i, d2.sqrt())
            })
            .collect();
        scored.sort_by(|a, b| a.1.total_cmp(&b.1));
        scored.truncate(k);

        let ranked: Vec<Neighbor> = scored
            .iter()
            .map(|&(record, distance)| Neighbor {
                record,
                label: self.records[record].label.clone(),
                distance,
            })
            .collect();

        let mut votes: HashMap<&str, (usize, f64, f64)> = HashMap::new();
        for n in &ranked {
            let entry = votes.entry(&n.label).or_insert((0, 0.0, n.distance));
            entry.0 += 1;
            entry.1 += n.distance;
        }
        let (label, &(_, _, distance)) = votes
            .iter()
            .min_by(|(la, a), (lb, b)| {
                b.0.cmp(&a.0)
                    .then(a.1.total_cmp(&b.1))
                    .then(la.cmp(lb))
            })
            .expect("k >= 1 and the store is nonempty");
        Ok(Match {
            label: label.to_string(),
            distance,
            ranked,
        })
    }

    /// Serializes the store in the `GLYPHSTORE v1` text format.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| {
            let mut s = String::new();
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                write!(s, "{x}").unwrap();
            }
            s
        };
        let mut out = String::new();
        writeln!(out, "{MAGIC} {VERSION}").unwrap();
        writeln!(
            out,
            "dim {} size {} rings {}",
            self.dim(),
            self.config.size,
            self.config.rings
        )
        .unwrap();
        writeln!(out, "mean {}", join(&self.mean)).unwrap();
        writeln!(out, "std {}", join(&self.std)).unwrap();
        for r in &self.records {
            writeln!(out, "{}\t{}", r.label, join(&r.vector)).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, StoreError> {
        let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));

        let (_, header) = lines.next().ok_or_else(|| format_err(1, "empty store"))?;
        match header.split_once(' ') {
            Some((MAGIC, VERSION)) => {}
            Some((MAGIC, other)) => return Err(StoreError::UnsupportedVersion(other.to_string())),
            _ => return Err(format_err(1, format!("expected `{MAGIC} {VERSION}`"))),
        }

        let (n, dims) = lines.next().ok_or_else(|| format_err(2, "missing dimension line"))?;
        let fields: Vec<&str> = dims.split(' ').collect();
        let config = match fields.as_slice() {
            ["dim", d, "size", s, "rings", r] => {
                let num = |t: &str| {
                    t.parse::<usize>()
                        .map_err(|_| format_err(n, format!("`{t}` is not a non-negative integer")))
                };
                let (dim, size, rings) = (num(d)?, num(s)?, num(r)?);
                let config = FeatureConfig { size, rings };
                if config.dim() != dim {
                    return Err(format_err(
                        n,
                        format!("dim {dim} does not match size {size} and rings {rings}"),
                    ));
                }
                config
            }
            _ => return Err(format_err(n, "expected `dim <D> size <S> rings <R>`")),
        };
        let dim = config.dim();

        let parse_vec = |n: usize, body: &str| -> Result<Vec<f64>, StoreError> {
            let v = body
                .split(' ')
                .map(|t| {
                    t.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| format_err(n, format!("`{t}` is not a finite decimal")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if v.len() != dim {
                return Err(format_err(n, format!("{} values, expected {dim}", v.len())));
            }
            Ok(v)
        };
        let mut tagged = |tag: &str| -> Result<Vec<f64>, StoreError> {
            let (n, line) = lines
                .next()
                .ok_or_else(|| format_err(0, format!("missing `{tag}` line")))?;
            let body = line
                .strip_prefix(tag)
                .and_then(|rest| rest.strip_prefix(' '))
                .ok_or_else(|| format_err(n, format!("expected `{tag}` line")))?;
            parse_vec(n, body)
        };
        let mean = tagged("mean")?;
        let std = tagged("std")?;
        if let Some(i) = std.iter().position(|&s| s <= 0.0) {
            return Err(format_err(4, format!("std component {i} is not positive")));
        }

        let mut records = Vec::new();
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (label, body) = line
                .split_once('\t')
                .ok_or_else(|| format_err(n, "expected `<label>\\t<values>`"))?;
            if label.is_empty() || label.contains('\r') {
                return Err(format_err(n, "invalid label"));
            }
            records.push(Record {
                label: label.to_string(),
                vector: parse_vec(n, body)?,
            });
        }
        if records.is_empty() {
            return Err(format_err(5, "store holds no records"));
        }
        Ok(Self {
            config,
            records,
            mean,
            std,
        })
    }
}

/// Extracts features from every sample and fits a store over them.
pub fn train(samples: &[TrainingSample], config: FeatureConfig) -> Result<TemplateStore, ClassifyError> {
    if samples.is_empty() {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    let mut records = Vec::with_capacity(samples.len());
    for s in samples {
        check_label(&s.label)?;
        let vector = feature_vector(&s.glyph, config).map_err(|e| match e {
            FeatureError::EmptyGlyph => ClassifyError::EmptySample {
                sample: s.name.clone(),
            },
            source => ClassifyError::Sample {
                sample: s.name.clone(),
                source,
            },
        })?;
        records.push(Record {
            label: s.label.clone(),
            vector: vector.into_values(),
        });
    }
    TemplateStore::from_records(config, records)
}
