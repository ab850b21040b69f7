//! Inner linear solvers: SPD factorization of diagonal blocks, block
//! forward/backward substitution, and monolithic SPD solves.

use nalgebra::{DMatrix, DVector};

use crate::blockops::{Block, BlockDims, BlockOperator, BlockVector};
use crate::error::{Error, Result};

/// Dense Cholesky factor `G = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    /// Factors the lower triangle of `g`. The first non-positive pivot is reported.
    pub fn factor(g: &DMatrix<f64>) -> Result<Self> {
        let n = g.nrows();
        if g.ncols() != n {
            return Err(Error::dims(
                "Cholesky::factor",
                "square matrix",
                format!("{:?}", g.shape()),
            ));
        }
        let mut l = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut d = g[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = g[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn factor_matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// Overwrites `x` with `L⁻¹ x`.
    #[allow(clippy::needless_range_loop)]
    pub fn forward_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[(i, k)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
    }

    /// Overwrites `x` with `L⁻ᵀ x`.
    #[allow(clippy::needless_range_loop)]
    pub fn backward_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.forward_in_place(&mut x);
        self.backward_in_place(&mut x);
        x
    }
}

/// Direct symmetric factorization of one matrix block.
pub fn factor_spd(g: &Block) -> Result<Cholesky> {
    Cholesky::factor(&g.to_dense())
}

/// How diagonal-block systems are solved.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum DiagStrategy {
    #[default]
    Direct,
    ConjugateGradient {
        rel_tol: f64,
        max_iter_factor: usize,
    },
    /// Direct up to `direct_limit` unknowns per block, CG above.
    Auto {
        direct_limit: usize,
    },
}

impl DiagStrategy {
    pub const CG_DEFAULT: DiagStrategy = DiagStrategy::ConjugateGradient {
        rel_tol: 1e-12,
        max_iter_factor: 10,
    };
}

#[derive(Debug, Clone)]
pub enum DiagSolver {
    Direct(Cholesky),
    ConjugateGradient {
        matrix: Block,
        rel_tol: f64,
        max_iter: usize,
    },
}

impl DiagSolver {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match self {
            DiagSolver::Direct(c) => Ok(c.solve(rhs)),
            DiagSolver::ConjugateGradient {
                matrix,
                rel_tol,
                max_iter,
            } => conjugate_gradient(matrix, rhs, *rel_tol, *max_iter),
        }
    }
}

/// Solvers for every diagonal block `G_α` of a block operator.
#[derive(Debug, Clone)]
pub struct DiagFactorization {
    dims: BlockDims,
    solvers: Vec<DiagSolver>,
}

impl DiagFactorization {
    pub fn new(op: &BlockOperator, strategy: DiagStrategy) -> Result<Self> {
        let solvers = (0..op.p())
            .map(|alpha| {
                let g = op.block(alpha, alpha).ok_or(Error::MissingDiagonalBlock(alpha))?;
                let n = g.nrows();
                let cg = |rel_tol, factor: usize| DiagSolver::ConjugateGradient {
                    matrix: g.clone(),
                    rel_tol,
                    max_iter: factor * n,
                };
                Ok(match strategy {
                    DiagStrategy::Direct => DiagSolver::Direct(factor_spd(g)?),
                    DiagStrategy::ConjugateGradient {
                        rel_tol,
                        max_iter_factor,
                    } => cg(rel_tol, max_iter_factor),
                    DiagStrategy::Auto { direct_limit } if n <= direct_limit => DiagSolver::Direct(factor_spd(g)?),
                    DiagStrategy::Auto { .. } => cg(1e-12, 10),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dims: op.dims().clone(),
            solvers,
        })
    }

    pub fn direct(op: &BlockOperator) -> Result<Self> {
        Self::new(op, DiagStrategy::Direct)
    }

    pub fn dims(&self) -> &BlockDims {
        &self.dims
    }

    pub fn solve(&self, alpha: usize, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solvers[alpha].solve(rhs)
    }
}

pub fn conjugate_gradient(m: &Block, rhs: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = rhs.len();
    let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    for _ in 0..max_iter {
        let ap = m.apply(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap.is_nan() || pap <= 0.0 {
            return Err(Error::NotPositiveDefinite { pivot: 0, value: pap });
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        if rr_new.sqrt() <= rel_tol * bnorm {
            return Ok(x);
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Err(Error::CgNoConvergence {
        iterations: max_iter,
        residual: rr.sqrt() / bnorm,
    })
}

fn check_factor_dims(op: &BlockOperator, rhs: &BlockVector, f: &DiagFactorization) -> Result<()> {
    op.dims().expect_same(rhs.dims(), "block substitution")?;
    op.dims().expect_same(f.dims(), "block substitution factorization")
}

/// Forward block substitution: `x_α = G_α⁻¹ (rhs_α − Σ_{β<α} L_{αβ} x_β)`.
pub fn solve_block_lower(l: &BlockOperator, rhs: &BlockVector, f: &DiagFactorization) -> Result<BlockVector> {
    check_factor_dims(l, rhs, f)?;
    if let Some((row, col, _)) = l.blocks().find(|(a, b, _)| b > a) {
        return Err(Error::NotTriangular {
            expected: "lower",
            row,
            col,
        });
    }
    let mut x = BlockVector::zeros(l.dims());
    for alpha in 0..l.p() {
        let mut r = rhs.component(alpha).to_vec();
        for beta in 0..alpha {
            if let Some(blk) = l.block(alpha, beta) {
                blk.gemv_acc(-1.0, x.component(beta), &mut r);
            }
        }
        if l.block(alpha, alpha).is_none() {
            return Err(Error::MissingDiagonalBlock(alpha));
        }
        let xa = f.solve(alpha, &r)?;
        x.component_mut(alpha).copy_from_slice(&xa);
    }
    Ok(x)
}

/// Backward block substitution: `x_α = G_α⁻¹ (rhs_α − Σ_{β>α} U_{αβ} x_β)`, α = p..1.
pub fn solve_block_upper(u: &BlockOperator, rhs: &BlockVector, f: &DiagFactorization) -> Result<BlockVector> {
    check_factor_dims(u, rhs, f)?;
    if let Some((row, col, _)) = u.blocks().find(|(a, b, _)| b < a) {
        return Err(Error::NotTriangular {
            expected: "upper",
            row,
            col,
        });
    }
    let p = u.p();
    let mut x = BlockVector::zeros(u.dims());
    for alpha in (0..p).rev() {
        let mut r = rhs.component(alpha).to_vec();
        for beta in alpha + 1..p {
            if let Some(blk) = u.block(alpha, beta) {
                blk.gemv_acc(-1.0, x.component(beta), &mut r);
            }
        }
        if u.block(alpha, alpha).is_none() {
            return Err(Error::MissingDiagonalBlock(alpha));
        }
        let xa = f.solve(alpha, &r)?;
        x.component_mut(alpha).copy_from_slice(&xa);
    }
    Ok(x)
}

/// Relative residual tolerance of monolithic SPD solves.
pub const SPD_RESIDUAL_TOL: f64 = 1e-11;

/// Cached dense factorization of a whole SPD block operator.
#[derive(Debug, Clone)]
pub struct SpdSolver {
    dims: BlockDims,
    matrix: DMatrix<f64>,
    chol: Cholesky,
    norm_inf: f64,
}

impl SpdSolver {
    pub fn new(m: &BlockOperator) -> Result<Self> {
        let matrix = m.to_dense();
        let chol = Cholesky::factor(&matrix)?;
        let norm_inf = matrix
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(Self {
            dims: m.dims().clone(),
            matrix,
            chol,
            norm_inf,
        })
    }

    pub fn dims(&self) -> &BlockDims {
        &self.dims
    }

    /// Solves and checks the normwise relative residual
    /// `‖Mx − b‖∞ / (‖M‖∞‖x‖∞ + ‖b‖∞)`.
    pub fn solve(&self, rhs: &BlockVector) -> Result<BlockVector> {
        self.dims.expect_same(rhs.dims(), "SpdSolver::solve")?;
        let x = self.chol.solve(rhs.as_slice());
        let r = &self.matrix * DVector::from_column_slice(&x) - DVector::from_column_slice(rhs.as_slice());
        let xn = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let denom = self.norm_inf * xn + rhs.max_abs();
        let rel = if denom > 0.0 { r.amax() / denom } else { 0.0 };
        if rel > SPD_RESIDUAL_TOL {
            return Err(Error::ResidualTooLarge {
                residual: rel,
                tolerance: SPD_RESIDUAL_TOL,
            });
        }
        BlockVector::from_flat(&self.dims, x)
    }

    /// `(M⁻¹ b, b)`.
    pub fn inverse_form(&self, b: &BlockVector) -> Result<f64> {
        let x = self.solve(b)?;
        x.dot(b)
    }
}

pub fn solve_spd_full(m: &BlockOperator, rhs: &BlockVector) -> Result<BlockVector> {
    SpdSolver::new(m)?.solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockops::CsrMatrix;

    fn op(sizes: &[usize], rows: &[f64]) -> BlockOperator {
        let d = BlockDims::new(sizes.to_vec()).unwrap();
        let n = d.total();
        BlockOperator::from_dense(&d, &DMatrix::from_row_slice(n, n, rows)).unwrap()
    }

    fn bv(sizes: &[usize], v: &[f64]) -> BlockVector {
        BlockVector::from_flat(&BlockDims::new(sizes.to_vec()).unwrap(), v.to_vec()).unwrap()
    }

    #[test]
    fn scalar_factor() {
        let c = factor_spd(&Block::Dense(DMatrix::from_element(1, 1, 4.0))).unwrap();
        assert_eq!(c.factor_matrix()[(0, 0)], 2.0);
    }

    #[test]
    fn two_by_two_closed_form() {
        let c = Cholesky::factor(&DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        let x = c.solve(&[1.0, 1.0]);
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-15 && (x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn laplacian_plus_identity_residual() {
        let n = 16;
        let g = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 3.0,
            1 => -1.0,
            _ => 0.0,
        });
        let c = Cholesky::factor(&g).unwrap();
        let b: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let x = c.solve(&b);
        let r = &g * DVector::from_vec(x) - DVector::from_vec(b.clone());
        assert!(r.amax() <= 1e-12 * DVector::from_vec(b).amax());
    }

    #[test]
    fn non_positive_pivot_is_named() {
        let err = Cholesky::factor(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { pivot: 1, .. }));
    }

    #[test]
    fn lower_substitution_by_hand() {
        let l = op(&[1, 1], &[1.0, 0.0, 1.0, 1.0]);
        let f = DiagFactorization::direct(&l).unwrap();
        let x = solve_block_lower(&l, &bv(&[1, 1], &[1.0, 1.0]), &f).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn upper_substitution_by_hand() {
        let u = op(&[1, 1], &[1.0, 1.0, 0.0, 1.0]);
        let f = DiagFactorization::direct(&u).unwrap();
        let x = solve_block_upper(&u, &bv(&[1, 1], &[1.0, 1.0]), &f).unwrap();
        assert_eq!(x.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn identity_substitution_returns_rhs() {
        let d = BlockDims::new(vec![2, 3]).unwrap();
        let id = BlockOperator::identity(&d);
        let f = DiagFactorization::direct(&id).unwrap();
        let rhs = BlockVector::from_fn(&d, |a, i| (a + i) as f64);
        assert_eq!(solve_block_lower(&id, &rhs, &f).unwrap(), rhs);
        assert_eq!(solve_block_upper(&id, &rhs, &f).unwrap(), rhs);
    }

    #[test]
    fn wrong_triangle_is_rejected() {
        let u = op(&[1, 1], &[1.0, 1.0, 0.0, 1.0]);
        let f = DiagFactorization::direct(&u).unwrap();
        let err = solve_block_lower(&u, &bv(&[1, 1], &[1.0, 1.0]), &f).unwrap_err();
        assert!(matches!(err, Error::NotTriangular { row: 0, col: 1, .. }));
    }

    #[test]
    fn missing_diagonal_block() {
        let d = BlockDims::new(vec![1, 1]).unwrap();
        let m = BlockOperator::zeros(&d).with_block(0, 0, Block::identity(1)).unwrap();
        assert!(matches!(
            DiagFactorization::direct(&m),
            Err(Error::MissingDiagonalBlock(1))
        ));
    }

    #[test]
    fn cg_path_matches_direct() {
        let n = 12;
        let s = CsrMatrix::from_triplets(
            n,
            n,
            (0..n).flat_map(|i| {
                let mut v = vec![(i, i, 4.0)];
                if i > 0 {
                    v.push((i, i - 1, -1.0));
                }
                if i + 1 < n {
                    v.push((i, i + 1, -1.0));
                }
                v
            }),
        )
        .unwrap();
        let d = BlockDims::new(vec![n]).unwrap();
        let m = BlockOperator::zeros(&d).with_block(0, 0, Block::Sparse(s)).unwrap();
        let rhs = BlockVector::from_fn(&d, |_, i| (i as f64).sin());
        let direct = DiagFactorization::direct(&m).unwrap();
        let cg = DiagFactorization::new(&m, DiagStrategy::CG_DEFAULT).unwrap();
        let a = solve_block_lower(&m, &rhs, &direct).unwrap();
        let b = solve_block_lower(&m, &rhs, &cg).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn cg_iteration_cap() {
        let m = Block::Dense(DMatrix::from_fn(5, 5, |i, j| if i == j { (i + 1) as f64 } else { 0.1 }));
        let err = conjugate_gradient(&m, &[1.0; 5], 1e-15, 1).unwrap_err();
        assert!(matches!(err, Error::CgNoConvergence { iterations: 1, .. }));
    }

    #[test]
    fn spd_full_closed_forms() {
        let d = BlockDims::new(vec![2, 1]).unwrap();
        let m = BlockOperator::scaled_identity(&d, 2.0);
        let x = solve_spd_full(&m, &BlockVector::from_flat(&d, vec![2.0; 3]).unwrap()).unwrap();
        assert!(x.as_slice().iter().all(|v| (v - 1.0).abs() < 1e-15));

        let m = op(&[1, 1], &[2.0, 1.0, 1.0, 2.0]);
        let x = solve_spd_full(&m, &bv(&[1, 1], &[3.0, 3.0])).unwrap();
        assert!((x.as_slice()[0] - 1.0).abs() < 1e-15 && (x.as_slice()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spd_full_rejects_indefinite() {
        let m = op(&[1, 1], &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            solve_spd_full(&m, &bv(&[1, 1], &[1.0, 1.0])),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
