use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Compressed sparse row matrix. Column indices within a row are sorted and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from 0-based `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for (i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::dims(
                    "CsrMatrix::from_triplets",
                    format!("index < {nrows}x{ncols}"),
                    format!("({i}, {j})"),
                ));
            }
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    /// `y += a * self * x`
    pub fn gemv_acc(&self, a: f64, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.nrows) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi += a * s;
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.triplets().map(|(i, j, v)| (j, i, v)))
            .expect("transposed indices are in range")
    }

    fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out
    }

    fn lincomb(a: f64, m: &Self, b: f64, n: &Self) -> Self {
        let entries = m
            .triplets()
            .map(|(i, j, v)| (i, j, a * v))
            .chain(n.triplets().map(|(i, j, v)| (i, j, b * v)));
        Self::from_triplets(m.nrows, m.ncols, entries).expect("shapes checked by caller")
    }
}

/// One `n_α × n_β` block of a block operator.
#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Dense(DMatrix<f64>),
    Sparse(CsrMatrix),
}

impl Block {
    pub fn identity(n: usize) -> Self {
        Block::Sparse(CsrMatrix::identity(n))
    }

    pub fn scaled_identity(n: usize, a: f64) -> Self {
        Block::Sparse(CsrMatrix::identity(n).scaled(a))
    }

    pub fn nrows(&self) -> usize {
        match self {
            Block::Dense(m) => m.nrows(),
            Block::Sparse(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Block::Dense(m) => m.ncols(),
            Block::Sparse(m) => m.ncols(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows(), self.ncols())
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Block::Sparse(_))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Block::Dense(m) => m.clone(),
            Block::Sparse(m) => m.to_dense(),
        }
    }

    /// `y += a * self * x`
    pub fn gemv_acc(&self, a: f64, x: &[f64], y: &mut [f64]) {
        match self {
            Block::Dense(m) => {
                for (i, yi) in y.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for (j, xj) in x.iter().enumerate() {
                        s += m[(i, j)] * xj;
                    }
                    *yi += a * s;
                }
            }
            Block::Sparse(m) => m.gemv_acc(a, x, y),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows()];
        self.gemv_acc(1.0, x, &mut y);
        y
    }

    pub fn transpose(&self) -> Self {
        match self {
            Block::Dense(m) => Block::Dense(m.transpose()),
            Block::Sparse(m) => Block::Sparse(m.transpose()),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        match self {
            Block::Dense(m) => Block::Dense(m * a),
            Block::Sparse(m) => Block::Sparse(m.scaled(a)),
        }
    }

    /// `a * m + b * n`; stays sparse only when both inputs are sparse.
    pub fn lincomb(a: f64, m: &Block, b: f64, n: &Block) -> Block {
        match (m, n) {
            (Block::Sparse(x), Block::Sparse(y)) => Block::Sparse(CsrMatrix::lincomb(a, x, b, y)),
            _ => Block::Dense(m.to_dense() * a + n.to_dense() * b),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Block::Dense(m) => m.amax(),
            Block::Sparse(m) => m.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())),
        }
    }
}
