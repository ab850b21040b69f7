use super::certify::symmetry_defect;
use super::operator::BlockOperator;
use crate::error::{Error, Result};

/// Mutually adjoint block-triangular halves of a symmetric operator:
/// `lower + upper = M` and `lowerᵀ = upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularPair {
    pub lower: BlockOperator,
    pub upper: BlockOperator,
}

impl TriangularPair {
    pub fn reconstruct(&self) -> Result<BlockOperator> {
        BlockOperator::lincomb(1.0, &self.lower, 1.0, &self.upper)
    }
}

/// Splits a symmetric block operator into `M_1` (blocks below the diagonal
/// plus half the diagonal blocks) and `M_2` (blocks above plus the other half).
pub fn triangular_split(m: &BlockOperator) -> Result<TriangularPair> {
    triangular_split_with_tol(m, super::DEFAULT_TOL_SYM)
}

pub fn triangular_split_with_tol(m: &BlockOperator, tol_sym: f64) -> Result<TriangularPair> {
    let defect = symmetry_defect(m);
    if defect > tol_sym {
        return Err(Error::CertificateViolation(format!(
            "triangular split needs a symmetric operator; relative asymmetry {defect:e} > {tol_sym:e}"
        )));
    }
    let mut lower = BlockOperator::zeros(m.dims());
    let mut upper = BlockOperator::zeros(m.dims());
    for (a, b, blk) in m.blocks() {
        if a > b {
            lower.set_block(a, b, Some(blk.clone()))?;
        } else if a < b {
            upper.set_block(a, b, Some(blk.clone()))?;
        } else {
            let half = blk.scaled(0.5);
            lower.set_block(a, a, Some(half.clone()))?;
            upper.set_block(a, a, Some(half))?;
        }
    }
    Ok(TriangularPair { lower, upper })
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::blockops::BlockDims;

    #[test]
    fn two_by_two_split() {
        let d = BlockDims::new(vec![1, 1]).unwrap();
        let m = BlockOperator::from_dense(&d, &DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        let s = triangular_split(&m).unwrap();
        assert_eq!(s.lower.to_dense(), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]));
        assert_eq!(s.upper.to_dense(), DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
    }

    #[test]
    fn identity_splits_into_halves() {
        let d = BlockDims::new(vec![2, 3]).unwrap();
        let s = triangular_split(&BlockOperator::identity(&d)).unwrap();
        let half = DMatrix::<f64>::identity(5, 5) * 0.5;
        assert_eq!(s.lower.to_dense(), half);
        assert_eq!(s.upper.to_dense(), half);
    }

    #[test]
    fn nonsymmetric_is_rejected() {
        let d = BlockDims::new(vec![1, 1]).unwrap();
        let m = BlockOperator::from_dense(&d, &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])).unwrap();
        assert!(matches!(triangular_split(&m), Err(Error::CertificateViolation(_))));
    }
}
