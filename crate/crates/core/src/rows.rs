//! Row-oriented training data that can be gathered into dense minibatches.

use ndarray::Array2;

use crate::corpus::{SentenceVector, VectorMode};

pub trait RowSource: Sync {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    /// Dense copy of the selected rows, in the given order.
    fn gather(&self, rows: &[usize]) -> Array2<f64>;

    fn gather_all(&self) -> Array2<f64> {
        let all: Vec<usize> = (0..self.n_rows()).collect();
        self.gather(&all)
    }
}

impl RowSource for Array2<f64> {
    fn n_rows(&self) -> usize {
        self.nrows()
    }

    fn n_cols(&self) -> usize {
        self.ncols()
    }

    fn gather(&self, rows: &[usize]) -> Array2<f64> {
        self.select(ndarray::Axis(0), rows)
    }
}

/// Sparse sentence vectors viewed as dense rows of width `dim`.
#[derive(Debug, Clone, Copy)]
pub struct SparseRows<'a> {
    vectors: &'a [SentenceVector],
    dim: usize,
    mode: VectorMode,
}

impl<'a> SparseRows<'a> {
    /// Panics if any vector has an index outside `dim`.
    pub fn new(vectors: &'a [SentenceVector], dim: usize, mode: VectorMode) -> Self {
        assert!(
            vectors.iter().all(|v| v.min_dim() <= dim),
            "sentence vector index out of range for dimension {dim}"
        );
        Self { vectors, dim, mode }
    }
}

impl RowSource for SparseRows<'_> {
    fn n_rows(&self) -> usize {
        self.vectors.len()
    }

    fn n_cols(&self) -> usize {
        self.dim
    }

    fn gather(&self, rows: &[usize]) -> Array2<f64> {
        let mut out = Array2::zeros((rows.len(), self.dim));
        for (r, &i) in rows.iter().enumerate() {
            let mut row = out.row_mut(r);
            let slice = row.as_slice_mut().expect("fresh array rows are contiguous");
            self.vectors[i].scatter_into(slice, self.mode);
        }
        out
    }
}
