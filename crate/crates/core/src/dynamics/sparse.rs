use crate::algebra::{Operator, C64};

/// Row- and column-indexed nonzeros of a square operator.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    dim: usize,
    /// `rows[r]` holds `(c, value)` for every nonzero `A[r, c]`.
    pub(crate) rows: Vec<Vec<(usize, C64)>>,
    /// `cols[c]` holds `(r, value)` for every nonzero `A[r, c]`.
    pub(crate) cols: Vec<Vec<(usize, C64)>>,
}

impl SparseOp {
    /// Exact zeros are dropped.
    pub fn from_operator(op: &Operator) -> Self {
        let d = op.dim();
        let m = op.matrix();
        let mut rows = vec![Vec::new(); d];
        let mut cols = vec![Vec::new(); d];
        for c in 0..d {
            for r in 0..d {
                let v = m[(r, c)];
                if v.re != 0.0 || v.im != 0.0 {
                    rows[r].push((c, v));
                    cols[c].push((r, v));
                }
            }
        }
        SparseOp { dim: d, rows, cols }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Induced ∞-norm, `max_r Σ_c |A[r, c]|`.
    pub fn max_row_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| row.iter().map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}
