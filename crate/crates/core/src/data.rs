//! Synthetic instance generation and SVMlight/LIBSVM text I/O.
//!
//! Synthetic least-squares instances follow the classic sparse-recovery
//! protocol: sample rows w_i i.i.d. from N(0, Σ), plant a sparse ground
//! truth x* with uniform nonzeros, and observe y_i = w_iᵀx* + ε_i with
//! Gaussian noise. Σ is either the identity or the equicorrelation matrix
//! (1−ρ)I + ρ𝟙𝟙ᵀ, which is sampled in O(d) per row through its shared-factor
//! form w = √(1−ρ)·z + √ρ·u·𝟙 instead of a dense Cholesky factor.
//!
//! All randomness comes from a ChaCha8 stream seeded with the spec's 64-bit
//! seed; normal variates use the `rand_distr` ziggurat sampler. Draw order
//! is: support subset, then the s* nonzeros of x* in index order, then per
//! sample the d row entries, the shared equicorrelation factor (when Σ is
//! not the identity), and one noise variate. The noise variate is drawn even
//! when σ² = 0 so the design matrix is invariant to the noise level.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::objective::{SparseColumn, SparseDataset};
use crate::vector::{DenseVector, SupportSet};
use crate::{Error, Result};

/// Row covariance of the synthetic design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Covariance {
    Identity,
    /// Σ = (1−ρ)I + ρ𝟙𝟙ᵀ: unit diagonal, constant off-diagonal ρ.
    UniformOffDiag {
        rho: f64,
    },
}

/// Parameters of a synthetic sparse-regression instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub s_star: usize,
    pub covariance: Covariance,
    pub noise_variance: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        if self.s_star == 0 || self.s_star > self.d {
            return Err(Error::InvalidSparsity {
                level: self.s_star,
                dim: self.d,
            });
        }
        if self.d > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!(
                "dimension {} exceeds the supported maximum",
                self.d
            )));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be finite and nonnegative, got {}",
                self.noise_variance
            )));
        }
        if let Covariance::UniformOffDiag { rho } = self.covariance {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::InvalidArgument(format!(
                    "off-diagonal correlation must lie in [0, 1), got {rho}"
                )));
            }
        }
        Ok(())
    }
}

/// The planted sparse parameter of a synthetic instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub x_star: DenseVector,
    pub support: SupportSet,
}

/// Generates a synthetic instance; bit-reproducible from the spec's seed.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(SparseDataset, GroundTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut support_idx = rand::seq::index::sample(&mut rng, spec.d, spec.s_star).into_vec();
    support_idx.sort_unstable();
    let support = SupportSet::new(support_idx.clone())?;
    let mut x_star = vec![0.0; spec.d];
    for &j in &support_idx {
        x_star[j] = loop {
            let v: f64 = rng.random_range(-1.0..1.0);
            if v != 0.0 {
                break v;
            }
        };
    }
    let x_star = DenseVector::from_values(x_star)?;

    let noise_std = spec.noise_variance.sqrt();
    let mut columns = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    let mut row = vec![0.0; spec.d];
    for _ in 0..spec.n {
        for r in row.iter_mut() {
            *r = rng.sample(StandardNormal);
        }
        if let Covariance::UniformOffDiag { rho } = spec.covariance {
            let shared: f64 = rng.sample(StandardNormal);
            let own = (1.0 - rho).sqrt();
            let common = rho.sqrt() * shared;
            for r in row.iter_mut() {
                *r = own * *r + common;
            }
        }
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                indices.push(j as u32);
                values.push(v);
            }
        }
        let column = SparseColumn::new(indices, values)?;
        let eps: f64 = rng.sample(StandardNormal);
        labels.push(column.dot(&x_star) + noise_std * eps);
        columns.push(column);
    }
    let data = SparseDataset::new(columns, labels, spec.d)?;
    Ok((data, GroundTruth { x_star, support }))
}

/// Summary counts of a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetStats {
    pub n: usize,
    pub dim: usize,
    pub nnz: usize,
    pub density: f64,
}

pub fn dataset_stats(data: &SparseDataset) -> DatasetStats {
    DatasetStats {
        n: data.n(),
        dim: data.dim(),
        nnz: data.nnz(),
        density: data.density(),
    }
}

impl std::fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "samples: {}\nfeatures: {}\nnonzeros: {}\ndensity: {:.6}%",
            self.n,
            self.dim,
            self.nnz,
            self.density * 100.0
        )
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Parses an SVMlight/LIBSVM text file: one `label idx:val idx:val ...` line
/// per sample, 1-based feature indices, `#` starting a comment.
///
/// Indices are converted to 0-based. The dimension is the largest index seen
/// unless `dim_override` supplies it (required to preserve trailing all-zero
/// features). Binary 0/1 label sets are remapped to −1/+1; ±1 sets are kept;
/// anything else is treated as real-valued regression targets. Zero-valued
/// entries are dropped, blank lines are skipped, and malformed lines are
/// reported with their line number.
pub fn parse_libsvm(path: impl AsRef<Path>, dim_override: Option<usize>) -> Result<SparseDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let reader = BufReader::new(file);

    let mut columns = Vec::new();
    let mut labels = Vec::new();
    let mut max_dim = 0usize;
    for (line_idx, line) in reader.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = line.map_err(|e| io_error(path, e))?;
        let text = line.split('#').next().unwrap_or("");
        let mut tokens = text.split_whitespace();
        let Some(label_token) = tokens.next() else {
            continue;
        };
        let label: f64 = label_token
            .parse()
            .map_err(|_| parse_error(path, line_no, format!("invalid label `{label_token}`")))?;
        if !label.is_finite() {
            return Err(parse_error(path, line_no, "non-finite label"));
        }

        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut previous: Option<u64> = None;
        for token in tokens {
            let (idx_text, val_text) = token.split_once(':').ok_or_else(|| {
                parse_error(
                    path,
                    line_no,
                    format!("expected index:value, got `{token}`"),
                )
            })?;
            let idx: u64 = idx_text.parse().map_err(|_| {
                parse_error(path, line_no, format!("invalid feature index `{idx_text}`"))
            })?;
            if idx == 0 {
                return Err(parse_error(path, line_no, "feature indices are 1-based"));
            }
            if let Some(prev) = previous {
                if idx <= prev {
                    return Err(parse_error(
                        path,
                        line_no,
                        format!("feature index {idx} not increasing after {prev}"),
                    ));
                }
            }
            previous = Some(idx);
            let value: f64 = val_text.parse().map_err(|_| {
                parse_error(path, line_no, format!("invalid feature value `{val_text}`"))
            })?;
            if !value.is_finite() {
                return Err(parse_error(path, line_no, "non-finite feature value"));
            }
            if value == 0.0 {
                continue;
            }
            let zero_based = idx - 1;
            if zero_based > u32::MAX as u64 {
                return Err(parse_error(
                    path,
                    line_no,
                    format!("feature index {idx} exceeds the supported maximum"),
                ));
            }
            if let Some(dim) = dim_override {
                if zero_based as usize >= dim {
                    return Err(parse_error(
                        path,
                        line_no,
                        format!("feature index {idx} exceeds dimension {dim}"),
                    ));
                }
            }
            max_dim = max_dim.max(zero_based as usize + 1);
            indices.push(zero_based as u32);
            values.push(value);
        }
        columns.push(SparseColumn::new(indices, values)?);
        labels.push(label);
    }
    if columns.is_empty() {
        return Err(parse_error(path, 0, "file contains no samples"));
    }

    let pm_one = labels.iter().all(|&y| y == 1.0 || y == -1.0);
    let zero_one = labels.iter().all(|&y| y == 0.0 || y == 1.0);
    if !pm_one && zero_one {
        for y in &mut labels {
            *y = if *y == 0.0 { -1.0 } else { 1.0 };
        }
    }

    SparseDataset::new(columns, labels, dim_override.unwrap_or(max_dim))
}

/// Writes a dataset in SVMlight format (1-based indices, shortest
/// round-trip float printing, one sample per line).
pub fn write_svmlight(data: &SparseDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>, data: &SparseDataset| -> std::io::Result<()> {
        for i in 0..data.n() {
            write!(out, "{}", data.label(i))?;
            for (j, v) in data.column(i).iter() {
                write!(out, " {}:{}", j + 1, v)?;
            }
            writeln!(out)?;
        }
        out.flush()
    };
    write(&mut out, data).map_err(|e| io_error(path, e))
}
