use serde::{Deserialize, Serialize};

use super::ChaosError;

/// Delay-embedding parameters: lag `tau` and embedding dimension `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub tau: usize,
    pub m: usize,
}

impl EmbeddingParams {
    pub fn new(tau: usize, m: usize) -> Result<Self, ChaosError> {
        if tau == 0 || m == 0 {
            return Err(ChaosError::InvalidParams { tau, m });
        }
        Ok(Self { tau, m })
    }

    /// Span of history one target needs: `m * tau`.
    pub fn span(&self) -> usize {
        self.m * self.tau
    }
}

/// Multi-input single-output view of a series.
///
/// Row `r` predicts `targets[r] = y[t]` with `t = origin_indices[r]` from
/// the lagged inputs `(y[t - tau], y[t - 2 tau], ..., y[t - m tau])`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedDataset {
    params: EmbeddingParams,
    // row-major, rows * m
    inputs: Vec<f64>,
    targets: Vec<f64>,
    origin_indices: Vec<usize>,
}

impl EmbeddedDataset {
    pub fn params(&self) -> EmbeddingParams {
        self.params
    }

    pub fn rows(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input_row(&self, row: usize) -> &[f64] {
        let m = self.params.m;
        &self.inputs[row * m..(row + 1) * m]
    }

    pub fn input_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.inputs.chunks_exact(self.params.m)
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn origin_indices(&self) -> &[usize] {
        &self.origin_indices
    }

    /// Splits rows into those whose target index is `< first_test_index`
    /// and the rest.
    pub fn split_at_origin(&self, first_test_index: usize) -> (Self, Self) {
        let cut = self
            .origin_indices
            .partition_point(|&t| t < first_test_index);
        let m = self.params.m;
        let part = |rows: std::ops::Range<usize>| Self {
            params: self.params,
            inputs: self.inputs[rows.start * m..rows.end * m].to_vec(),
            targets: self.targets[rows.clone()].to_vec(),
            origin_indices: self.origin_indices[rows].to_vec(),
        };
        (part(0..cut), part(cut..self.rows()))
    }
}

/// Builds the MISO dataset; the first target sits at 0-based index `m * tau`.
pub fn reconstruct(values: &[f64], params: EmbeddingParams) -> Result<EmbeddedDataset, ChaosError> {
    let span = params.span();
    let n = values.len();
    if n <= span {
        return Err(ChaosError::SeriesTooShort {
            len: n,
            required: span + 1,
        });
    }
    let rows = n - span;
    let mut inputs = Vec::with_capacity(rows * params.m);
    for t in span..n {
        inputs.extend((1..=params.m).map(|j| values[t - j * params.tau]));
    }
    Ok(EmbeddedDataset {
        params,
        inputs,
        targets: values[span..].to_vec(),
        origin_indices: (span..n).collect(),
    })
}

/// Forward delay vectors `(x_i, x_{i+tau}, ..., x_{i+(dim-1)tau})`, row-major.
pub(crate) fn delay_vectors(values: &[f64], tau: usize, dim: usize, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count * dim);
    for i in 0..count {
        out.extend((0..dim).map(|d| values[i + d * tau]));
    }
    out
}
