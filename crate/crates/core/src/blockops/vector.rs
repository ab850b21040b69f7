use std::ops::Range;

use crate::error::{Error, Result};

/// Layout of the direct sum `H = H_1 ⊕ … ⊕ H_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDims {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockDims {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidDims("need at least one component".into()));
        }
        if let Some(alpha) = sizes.iter().position(|&n| n == 0) {
            return Err(Error::InvalidDims(format!("component {alpha} has size 0")));
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &n in &sizes {
            acc += n;
            offsets.push(acc);
        }
        Ok(Self { sizes, offsets })
    }

    /// `p` components of equal size `n`.
    pub fn uniform(p: usize, n: usize) -> Result<Self> {
        Self::new(vec![n; p])
    }

    pub fn p(&self) -> usize {
        self.sizes.len()
    }

    pub fn size(&self, alpha: usize) -> usize {
        self.sizes[alpha]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.offsets[self.sizes.len()]
    }

    pub fn offset(&self, alpha: usize) -> usize {
        self.offsets[alpha]
    }

    pub fn range(&self, alpha: usize) -> Range<usize> {
        self.offsets[alpha]..self.offsets[alpha + 1]
    }

    pub(crate) fn expect_same(&self, other: &BlockDims, context: &'static str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::dims(
                context,
                format!("{:?}", self.sizes),
                format!("{:?}", other.sizes),
            ))
        }
    }
}

/// Element of the direct sum space, stored contiguously component after component.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    dims: BlockDims,
    data: Vec<f64>,
}

impl BlockVector {
    pub fn zeros(dims: &BlockDims) -> Self {
        Self {
            data: vec![0.0; dims.total()],
            dims: dims.clone(),
        }
    }

    pub fn from_flat(dims: &BlockDims, data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.total() {
            return Err(Error::dims("BlockVector::from_flat", dims.total(), data.len()));
        }
        Ok(Self {
            dims: dims.clone(),
            data,
        })
    }

    pub fn from_components(components: Vec<Vec<f64>>) -> Result<Self> {
        let dims = BlockDims::new(components.iter().map(Vec::len).collect())?;
        Ok(Self {
            data: components.into_iter().flatten().collect(),
            dims,
        })
    }

    pub fn from_fn(dims: &BlockDims, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims.total());
        for alpha in 0..dims.p() {
            for i in 0..dims.size(alpha) {
                data.push(f(alpha, i));
            }
        }
        Self {
            dims: dims.clone(),
            data,
        }
    }

    pub fn dims(&self) -> &BlockDims {
        &self.dims
    }

    pub fn component(&self, alpha: usize) -> &[f64] {
        &self.data[self.dims.range(alpha)]
    }

    pub fn component_mut(&mut self, alpha: usize) -> &mut [f64] {
        let r = self.dims.range(alpha);
        &mut self.data[r]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.data
    }

    /// Euclidean inner product over all components.
    pub fn dot(&self, other: &BlockVector) -> Result<f64> {
        self.dims.expect_same(&other.dims, "BlockVector::dot")?;
        Ok(dot(&self.data, &other.data))
    }

    pub fn norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &BlockVector) -> Result<()> {
        self.dims.expect_same(&x.dims, "BlockVector::axpy")?;
        for (s, v) in self.data.iter_mut().zip(&x.data) {
            *s += a * v;
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    pub fn scaled(&self, a: f64) -> BlockVector {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `a * self + b * other`
    pub fn combine(&self, a: f64, other: &BlockVector, b: f64) -> Result<BlockVector> {
        self.dims.expect_same(&other.dims, "BlockVector::combine")?;
        Ok(BlockVector {
            dims: self.dims.clone(),
            data: self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect(),
        })
    }

    pub fn sub(&self, other: &BlockVector) -> Result<BlockVector> {
        self.combine(1.0, other, -1.0)
    }

    pub fn add(&self, other: &BlockVector) -> Result<BlockVector> {
        self.combine(1.0, other, 1.0)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
