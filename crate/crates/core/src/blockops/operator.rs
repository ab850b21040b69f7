use nalgebra::DMatrix;

use super::block::Block;
use super::vector::{dot, BlockDims, BlockVector};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// A `p × p` grid of blocks `M_{αβ}: H_β → H_α`. Absent blocks act as exact zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    dims: BlockDims,
    blocks: Vec<Option<Block>>,
}

impl BlockOperator {
    pub fn zeros(dims: &BlockDims) -> Self {
        let p = dims.p();
        Self {
            dims: dims.clone(),
            blocks: vec![None; p * p],
        }
    }

    pub fn identity(dims: &BlockDims) -> Self {
        Self::scaled_identity(dims, 1.0)
    }

    pub fn scaled_identity(dims: &BlockDims, a: f64) -> Self {
        let mut op = Self::zeros(dims);
        for alpha in 0..dims.p() {
            op.blocks[alpha * dims.p() + alpha] = Some(Block::scaled_identity(dims.size(alpha), a));
        }
        op
    }

    /// Cuts a dense `N_tot × N_tot` matrix into blocks; all-zero blocks become absent.
    pub fn from_dense(dims: &BlockDims, m: &DMatrix<f64>) -> Result<Self> {
        let n = dims.total();
        if m.shape() != (n, n) {
            return Err(Error::dims(
                "BlockOperator::from_dense",
                format!("{n}x{n}"),
                format!("{:?}", m.shape()),
            ));
        }
        let mut op = Self::zeros(dims);
        for a in 0..dims.p() {
            for b in 0..dims.p() {
                let blk = m
                    .view((dims.offset(a), dims.offset(b)), (dims.size(a), dims.size(b)))
                    .into_owned();
                if blk.iter().any(|v| *v != 0.0) {
                    op.blocks[a * dims.p() + b] = Some(Block::Dense(blk));
                }
            }
        }
        Ok(op)
    }

    pub fn dims(&self) -> &BlockDims {
        &self.dims
    }

    pub fn p(&self) -> usize {
        self.dims.p()
    }

    pub fn block(&self, alpha: usize, beta: usize) -> Option<&Block> {
        self.blocks[alpha * self.p() + beta].as_ref()
    }

    pub fn set_block(&mut self, alpha: usize, beta: usize, block: Option<Block>) -> Result<()> {
        let p = self.p();
        if alpha >= p || beta >= p {
            return Err(Error::dims(
                "BlockOperator::set_block",
                format!("index < {p}"),
                format!("({alpha}, {beta})"),
            ));
        }
        if let Some(b) = &block {
            let want = (self.dims.size(alpha), self.dims.size(beta));
            if b.shape() != want {
                return Err(Error::dims(
                    "BlockOperator::set_block",
                    format!("{want:?}"),
                    format!("{:?}", b.shape()),
                ));
            }
        }
        self.blocks[alpha * p + beta] = block;
        Ok(())
    }

    pub fn with_block(mut self, alpha: usize, beta: usize, block: Block) -> Result<Self> {
        self.set_block(alpha, beta, Some(block))?;
        Ok(self)
    }

    /// Iterates present blocks as `(α, β, block)`.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize, &Block)> + '_ {
        let p = self.p();
        self.blocks
            .iter()
            .enumerate()
            .filter_map(move |(k, b)| b.as_ref().map(|b| (k / p, k % p, b)))
    }

    /// `true` when no block off the diagonal is present.
    pub fn is_block_diagonal(&self) -> bool {
        self.blocks().all(|(a, b, _)| a == b)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dims.total();
        let mut m = DMatrix::zeros(n, n);
        for (a, b, blk) in self.blocks() {
            m.view_mut((self.dims.offset(a), self.dims.offset(b)), blk.shape())
                .copy_from(&blk.to_dense());
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks().fold(0.0_f64, |m, (_, _, b)| m.max(b.max_abs()))
    }

    pub fn transpose(&self) -> Self {
        let p = self.p();
        let mut out = Self::zeros(&self.dims);
        for (a, b, blk) in self.blocks() {
            out.blocks[b * p + a] = Some(blk.transpose());
        }
        out
    }

    /// `(Mx)_α = Σ_β M_{αβ} x_β`.
    pub fn apply(&self, x: &BlockVector) -> Result<BlockVector> {
        self.apply_with(Execution::Sequential, x)
    }

    /// As [`apply`](Self::apply), distributing block rows according to `exec`.
    pub fn apply_with(&self, exec: Execution, x: &BlockVector) -> Result<BlockVector> {
        self.dims.expect_same(x.dims(), "BlockOperator::apply")?;
        let p = self.p();
        let rows = par::map(exec, (0..p).collect(), |alpha| {
            let mut y = vec![0.0; self.dims.size(alpha)];
            for beta in 0..p {
                if let Some(blk) = self.block(alpha, beta) {
                    blk.gemv_acc(1.0, x.component(beta), &mut y);
                }
            }
            y
        });
        BlockVector::from_flat(&self.dims, rows.into_iter().flatten().collect())
    }

    /// Blockwise `a·M + b·N`; the sparsity pattern is the union of both.
    pub fn lincomb(a: f64, m: &BlockOperator, b: f64, n: &BlockOperator) -> Result<BlockOperator> {
        m.dims.expect_same(&n.dims, "BlockOperator::lincomb")?;
        let blocks = m
            .blocks
            .iter()
            .zip(&n.blocks)
            .map(|pair| match pair {
                (None, None) => None,
                (Some(x), None) => Some(x.scaled(a)),
                (None, Some(y)) => Some(y.scaled(b)),
                (Some(x), Some(y)) => Some(Block::lincomb(a, x, b, y)),
            })
            .collect();
        Ok(BlockOperator {
            dims: m.dims.clone(),
            blocks,
        })
    }

    pub fn scaled(&self, a: f64) -> BlockOperator {
        BlockOperator {
            dims: self.dims.clone(),
            blocks: self.blocks.iter().map(|b| b.as_ref().map(|b| b.scaled(a))).collect(),
        }
    }
}

/// `(Dx, y)`.
pub fn weighted_inner(d: &BlockOperator, x: &BlockVector, y: &BlockVector) -> Result<f64> {
    d.dims().expect_same(y.dims(), "weighted_inner")?;
    let dx = d.apply(x)?;
    Ok(dot(dx.as_slice(), y.as_slice()))
}

/// `sqrt((Dx, x))` for an operator claimed to be SPD.
///
/// Tiny negative values produced by rounding are clamped to zero; anything
/// beyond that is reported as a certificate violation.
pub fn weighted_norm(d: &BlockOperator, x: &BlockVector) -> Result<f64> {
    Ok(weighted_norm_sq(d, x)?.sqrt())
}

pub fn weighted_norm_sq(d: &BlockOperator, x: &BlockVector) -> Result<f64> {
    let q = weighted_inner(d, x, x)?;
    if q < 0.0 {
        let scale = d.max_abs() * dot(x.as_slice(), x.as_slice());
        if q < -1e-12 * scale {
            return Err(Error::CertificateViolation(format!(
                "(Dx, x) = {q:e} < 0 for an operator claimed positive definite"
            )));
        }
        return Ok(0.0);
    }
    Ok(q)
}
