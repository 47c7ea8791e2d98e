//! Finite-sum objectives F(x) = (1/n) Σ f_i(x) over sparse samples.
//!
//! Two losses are provided: least squares f_i(x) = ½(y_i − w_iᵀx)² and
//! logistic f_i(x) = log(1 + exp(−y_i w_iᵀx)). Both factor through the
//! margin w_iᵀx, so a component gradient is a scalar multiple of the sample
//! column; solvers exploit this to keep stochastic steps proportional to the
//! column's nonzero count. The 1/n averaging lives in [`Objective::loss`]
//! and [`Objective::full_gradient`]; component functions return the raw
//! f_i terms.

use crate::vector::{DenseVector, SupportSet};
use crate::{Error, Result};

/// One sample w_i stored as parallel (index, value) arrays with strictly
/// increasing indices and finite nonzero values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseColumn {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseColumn {
    pub fn new(indices: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "column has {} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "column indices must be strictly increasing".into(),
            ));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if values.contains(&0.0) {
            return Err(Error::InvalidArgument(
                "column values must be nonzero".into(),
            ));
        }
        Ok(Self { indices, values })
    }

    pub fn empty() -> Self {
        Self {
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| (i as usize, v))
    }

    /// Sparse-dense inner product Σ value·x[index].
    pub fn dot(&self, x: &DenseVector) -> f64 {
        self.dot_slice(x.as_slice())
    }

    pub(crate) fn dot_slice(&self, x: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| v * x[i as usize])
            .sum()
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().map(|&i| i as usize)
    }

    pub fn support(&self) -> SupportSet {
        SupportSet::new(self.indices.iter().map(|&i| i as usize).collect())
            .expect("column indices are strictly increasing")
    }

    fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }
}

/// A design matrix of n sparse samples over dimension d plus responses y.
///
/// Responses are real-valued for regression and ±1 labels for
/// classification; immutable once constructed (normalization excepted) and
/// safe to share read-only across concurrent solver runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset {
    columns: Vec<SparseColumn>,
    labels: Vec<f64>,
    dim: usize,
}

impl SparseDataset {
    pub fn new(columns: Vec<SparseColumn>, labels: Vec<f64>, dim: usize) -> Result<Self> {
        if columns.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} samples but {} labels",
                columns.len(),
                labels.len()
            )));
        }
        if let Some(index) = labels.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        for col in &columns {
            if let Some(max) = col.max_index() {
                if max >= dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: max + 1,
                    });
                }
            }
        }
        Ok(Self {
            columns,
            labels,
            dim,
        })
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, i: usize) -> &SparseColumn {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[SparseColumn] {
        &self.columns
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(SparseColumn::nnz).sum()
    }

    /// Fraction of stored nonzeros, nnz/(n·d); zero for an empty dataset.
    pub fn density(&self) -> f64 {
        let cells = self.n() as f64 * self.dim as f64;
        if cells == 0.0 {
            0.0
        } else {
            self.nnz() as f64 / cells
        }
    }

    /// Rescales every sample to unit Euclidean norm (empty samples kept).
    pub fn normalize_columns(&mut self) {
        for col in &mut self.columns {
            let norm = col.squared_norm().sqrt();
            if norm > 0.0 {
                col.scale(1.0 / norm);
            }
        }
    }

    /// Largest squared sample norm; a crude Lipschitz-scale estimate for
    /// step-size grids.
    pub fn max_squared_column_norm(&self) -> f64 {
        self.columns
            .iter()
            .map(SparseColumn::squared_norm)
            .fold(0.0, f64::max)
    }
}

/// Which per-sample loss f_i the objective uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    LeastSquares,
    Logistic,
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LossKind::LeastSquares => "least-squares",
            LossKind::Logistic => "logistic",
        })
    }
}

/// A finite-sum objective: a loss kind over a borrowed dataset.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    data: &'a SparseDataset,
    kind: LossKind,
}

impl<'a> Objective<'a> {
    /// Pairs a dataset with a loss. Logistic objectives require every label
    /// to be exactly −1 or +1; both kinds require at least one sample.
    pub fn new(data: &'a SparseDataset, kind: LossKind) -> Result<Self> {
        if data.n() == 0 {
            return Err(Error::InvalidArgument(
                "objective requires at least one sample".into(),
            ));
        }
        if kind == LossKind::Logistic {
            if let Some(i) = data.labels().iter().position(|&y| y != 1.0 && y != -1.0) {
                return Err(Error::InvalidArgument(format!(
                    "logistic label at sample {i} is {}, expected -1 or +1",
                    data.label(i)
                )));
            }
        }
        Ok(Self { data, kind })
    }

    pub fn data(&self) -> &'a SparseDataset {
        self.data
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    fn check_dim(&self, x: &DenseVector) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        Ok(())
    }

    fn check_sample(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::SampleOutOfRange {
                index: i,
                count: self.n(),
            });
        }
        Ok(())
    }

    /// Per-sample loss value from its label and margin w_iᵀx.
    ///
    /// The logistic branch evaluates log(1 + exp(−y·m)) as
    /// max(−y·m, 0) + log1p(exp(−|y·m|)), which stays finite for margins of
    /// any magnitude.
    pub(crate) fn loss_term(&self, label: f64, margin: f64) -> f64 {
        match self.kind {
            LossKind::LeastSquares => {
                let r = margin - label;
                0.5 * r * r
            }
            LossKind::Logistic => {
                let u = -(label * margin);
                u.max(0.0) + (-u.abs()).exp().ln_1p()
            }
        }
    }

    /// Scalar a(label, margin) with ∇f_i(x) = a·w_i.
    ///
    /// Least squares: a = m − y. Logistic: a = −y·σ(−y·m) = −y/(1 + e^{y·m}),
    /// which underflows to an exact 0 for strongly satisfied margins instead
    /// of producing NaN.
    pub(crate) fn factor(&self, label: f64, margin: f64) -> f64 {
        match self.kind {
            LossKind::LeastSquares => margin - label,
            LossKind::Logistic => -label / (1.0 + (label * margin).exp()),
        }
    }

    /// Margin w_iᵀx of sample `i`, in O(nnz(w_i)).
    pub fn margin(&self, i: usize, x: &DenseVector) -> Result<f64> {
        self.check_sample(i)?;
        self.check_dim(x)?;
        Ok(self.data.column(i).dot(x))
    }

    /// f_i(x), un-averaged.
    pub fn component_loss(&self, i: usize, x: &DenseVector) -> Result<f64> {
        self.check_sample(i)?;
        self.check_dim(x)?;
        Ok(self.loss_term(self.data.label(i), self.data.column(i).dot(x)))
    }

    /// F(x) = (1/n) Σ f_i(x). Nonnegative; +∞ signals a diverged iterate.
    pub fn loss(&self, x: &DenseVector) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.loss_slice(x.as_slice()))
    }

    pub(crate) fn loss_slice(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (col, &label) in self.data.columns().iter().zip(self.data.labels()) {
            total += self.loss_term(label, col.dot_slice(x));
        }
        total / self.n() as f64
    }

    /// The scalar a with ∇f_i(x) = a·w_i.
    pub fn component_gradient_factor(&self, i: usize, x: &DenseVector) -> Result<f64> {
        self.check_sample(i)?;
        self.check_dim(x)?;
        Ok(self.factor(self.data.label(i), self.data.column(i).dot(x)))
    }

    /// ∇f_i(x), densified. Its support is contained in the sample's support.
    pub fn component_gradient(&self, i: usize, x: &DenseVector) -> Result<DenseVector> {
        let factor = self.component_gradient_factor(i, x)?;
        let col = self.data.column(i);
        let mut out = DenseVector::zeros(self.dim());
        let buf = out.as_mut_slice();
        for (j, v) in col.iter() {
            buf[j] = factor * v;
        }
        debug_assert!(out.support().is_subset_of(&col.support()));
        Ok(out)
    }

    /// ∇F(x) = (1/n) Σ ∇f_i(x). One evaluation costs one effective pass.
    pub fn full_gradient(&self, x: &DenseVector) -> Result<DenseVector> {
        self.check_dim(x)?;
        let mut g = vec![0.0; self.dim()];
        self.accumulate_gradient(x.as_slice(), &mut g);
        DenseVector::from_values(g)
    }

    /// Adds ∇F(x) into `out` (which must be zeroed by the caller).
    pub(crate) fn accumulate_gradient(&self, x: &[f64], out: &mut [f64]) {
        for (col, &label) in self.data.columns().iter().zip(self.data.labels()) {
            let factor = self.factor(label, col.dot_slice(x));
            for (j, v) in col.iter() {
                out[j] += factor * v;
            }
        }
        let inv_n = 1.0 / self.n() as f64;
        for v in out.iter_mut() {
            *v *= inv_n;
        }
    }

    /// One sweep computing ∇F(x) into `gradient` and every sample margin
    /// w_iᵀx into `margins`. Epochs snapshot at x reuse the margins, so the
    /// sweep costs the same single pass as the gradient alone.
    pub(crate) fn gradient_and_margins(
        &self,
        x: &[f64],
        gradient: &mut Vec<f64>,
        margins: &mut Vec<f64>,
    ) {
        gradient.clear();
        gradient.resize(self.dim(), 0.0);
        margins.clear();
        margins.reserve(self.n());
        for (col, &label) in self.data.columns().iter().zip(self.data.labels()) {
            let margin = col.dot_slice(x);
            margins.push(margin);
            let factor = self.factor(label, margin);
            for (j, v) in col.iter() {
                gradient[j] += factor * v;
            }
        }
        let inv_n = 1.0 / self.n() as f64;
        for v in gradient.iter_mut() {
            *v *= inv_n;
        }
    }
}
