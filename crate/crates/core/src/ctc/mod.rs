//! Training objective and decoding for phoneme recognition.
//!
//! Probability rows have width `N + 1`: the inventory's phonemes followed by
//! the CTC blank. The soft CTC loss replaces each frame's emission
//! probability for label `z` with `q_t(z) = sum_j S_hat(z, j) * p_t(j)`,
//! where `S_hat` is the row-normalized similarity extended with a one-hot
//! blank row. The soft-mapping loss is the squared distance between
//! per-target-step distributions and the soft labels `S_hat(y_t, .)`.
//!
//! Loss functions return gradients with respect to the probabilities;
//! [`softmax_backward`] folds in the softmax for logit parameterizations.

mod decode;
mod fit;
mod loss;

use serde::{Deserialize, Serialize};

use crate::inventory::PhonemeId;
use crate::{Error, Result};

pub use decode::{beam_decode, beam_search, greedy_decode, labeling_log_prob, Hypothesis};
pub use fit::{fit_logits_demo, FitConfig, FitReport, Reduction};
pub use loss::{
    combined_loss, soft_ctc_loss, soft_ctc_loss_from_logits, soft_mapping_loss,
    soft_mapping_loss_from_logits, standard_ctc_loss, standard_ctc_loss_from_logits, CombinedLoss,
    LossPart,
};

const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Dense row-major `rows x cols` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, values: vec![0.0; rows * cols] }
    }

    pub fn from_flat(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Dimension { expected: rows * cols, got: values.len() });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Dimension { expected: cols, got: r.len() });
            }
            values.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, values })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.cols.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Unconstrained scores; each row maps to a distribution by softmax.
pub type LogitMatrix = Matrix;

/// Gradient with respect to a probability or logit matrix of the same shape.
pub type GradMatrix = Matrix;

/// Rows of probabilities over phonemes plus blank. Each row sums to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbMatrix(Matrix);

impl ProbMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows == 0 || m.cols < 2 {
            return Err(Error::Probabilities(format!(
                "need at least one row and two columns, got {}x{}",
                m.rows, m.cols
            )));
        }
        for t in 0..m.rows {
            let row = m.row(t);
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Probabilities(format!("row {t} has entry {v} outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::Probabilities(format!("row {t} sums to {sum}")));
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Exponentiates rows of log-probabilities.
    pub fn from_log_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let mut m = Matrix::from_rows(rows)?;
        m.values.iter_mut().for_each(|v| *v = v.exp());
        Self::new(m)
    }

    /// Row-wise softmax of `logits`.
    pub fn softmax(logits: &LogitMatrix) -> Self {
        let mut out = logits.clone();
        for row in out.values.chunks_mut(logits.cols.max(1)) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            row.iter_mut().for_each(|v| *v /= sum);
        }
        Self(out)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    #[inline]
    pub fn frames(&self) -> usize {
        self.0.rows
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.0.cols
    }

    /// Column of the blank symbol (the last one).
    #[inline]
    pub fn blank(&self) -> usize {
        self.0.cols - 1
    }

    #[inline]
    pub fn get(&self, t: usize, k: usize) -> f64 {
        self.0.get(t, k)
    }

    pub fn row(&self, t: usize) -> &[f64] {
        self.0.row(t)
    }
}

/// Chain rule through a row-wise softmax: given `probs = softmax(z)` and
/// `dL/dprobs`, returns `dL/dz`.
pub fn softmax_backward(probs: &ProbMatrix, grad: &GradMatrix) -> GradMatrix {
    let mut out = grad.clone();
    let w = probs.width();
    for (t, row) in out.values.chunks_mut(w).enumerate() {
        let p = probs.row(t);
        let dot: f64 = p.iter().zip(row.iter()).map(|(a, b)| a * b).sum();
        for (g, &pk) in row.iter_mut().zip(p) {
            *g = pk * (*g - dot);
        }
    }
    out
}

/// Nonempty target phoneme sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetSeq(Vec<PhonemeId>);

impl TargetSeq {
    pub fn new(phonemes: Vec<PhonemeId>) -> Result<Self> {
        if phonemes.is_empty() {
            return Err(Error::EmptyTarget);
        }
        Ok(Self(phonemes))
    }

    pub fn as_slice(&self) -> &[PhonemeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Fewest frames a CTC alignment needs: one per label plus a blank
    /// between each adjacent repeat.
    pub fn min_frames(&self) -> usize {
        self.0.len() + self.0.windows(2).filter(|w| w[0] == w[1]).count()
    }
}

/// Task weights of the combined objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lambdas {
    pub ctc: f64,
    pub map: f64,
}

impl Lambdas {
    pub const DEFAULT: Lambdas = Lambdas { ctc: 0.8, map: 0.2 };

    pub fn new(ctc: f64, map: f64) -> Result<Self> {
        if !(ctc >= 0.0 && map >= 0.0 && ctc.is_finite() && map.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "loss weights must be nonnegative, got ({ctc}, {map})"
            )));
        }
        Ok(Self { ctc, map })
    }
}

impl Default for Lambdas {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossValue {
    pub total: f64,
    pub ctc_part: f64,
    pub map_part: f64,
    pub lambdas: Lambdas,
}

impl LossValue {
    pub fn new(ctc_part: f64, map_part: f64, lambdas: Lambdas) -> Self {
        Self { total: lambdas.ctc * ctc_part + lambdas.map * map_part, ctc_part, map_part, lambdas }
    }
}
