use nalgebra::{DMatrix, SymmetricEigen};

use super::operator::BlockOperator;
use crate::error::{Error, Result};
use crate::linsolve::Cholesky;

/// Symmetry and positivity facts about an operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorCertificate {
    pub symmetric: bool,
    /// `max|M − Mᵀ| / max|M|`.
    pub symmetry_defect: f64,
    pub tol_sym: f64,
    pub positive_definite: bool,
    /// Smallest eigenvalue of the symmetric part.
    pub min_eig_estimate: f64,
}

impl OperatorCertificate {
    pub fn is_spd(&self) -> bool {
        self.symmetric && self.positive_definite
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub tol_sym: f64,
    /// Dense eigensolve up to this total dimension, inverse iteration above it.
    pub dense_threshold: usize,
    pub max_iterations: usize,
    pub rel_tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            tol_sym: super::DEFAULT_TOL_SYM,
            dense_threshold: 2000,
            max_iterations: 20_000,
            rel_tol: 1e-12,
        }
    }
}

pub fn certify(m: &BlockOperator, tol_sym: f64) -> Result<OperatorCertificate> {
    certify_with(
        m,
        &CertifyOptions {
            tol_sym,
            ..CertifyOptions::default()
        },
    )
}

pub fn certify_with(m: &BlockOperator, opts: &CertifyOptions) -> Result<OperatorCertificate> {
    let defect = symmetry_defect(m);
    let dense = m.to_dense();
    let sym = (&dense + dense.transpose()) * 0.5;
    let min_eig = if m.dims().total() <= opts.dense_threshold {
        min_eigenvalue_dense(&sym)
    } else {
        min_eigenvalue_inverse_iteration(&sym, opts.max_iterations, opts.rel_tol)?
    };
    Ok(OperatorCertificate {
        symmetric: defect <= opts.tol_sym,
        symmetry_defect: defect,
        tol_sym: opts.tol_sym,
        positive_definite: min_eig > 0.0,
        min_eig_estimate: min_eig,
    })
}

/// Relative entrywise asymmetry `max|M − Mᵀ| / max|M|`, computed blockwise.
pub fn symmetry_defect(m: &BlockOperator) -> f64 {
    let scale = m.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let p = m.p();
    let mut worst = 0.0_f64;
    for a in 0..p {
        for b in a..p {
            let d = match (m.block(a, b), m.block(b, a)) {
                (None, None) => 0.0,
                (Some(x), None) | (None, Some(x)) if a != b => x.max_abs(),
                (Some(x), Some(y)) => (x.to_dense() - y.to_dense().transpose()).amax(),
                _ => 0.0,
            };
            worst = worst.max(d);
        }
    }
    worst / scale
}

pub fn min_eigenvalue_dense(sym: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(sym.clone()).eigenvalues.min()
}

/// Smallest eigenvalue of a symmetric matrix by inverse iteration on `S − sI`,
/// with `s = 0` when `S` factors and a Gershgorin lower bound otherwise.
pub fn min_eigenvalue_inverse_iteration(sym: &DMatrix<f64>, max_iterations: usize, rel_tol: f64) -> Result<f64> {
    let n = sym.nrows();
    let scale = sym.amax().max(f64::MIN_POSITIVE);
    let (shift, chol) = match Cholesky::factor(sym) {
        Ok(c) => (0.0, c),
        Err(_) => {
            let gersh = (0..n)
                .map(|i| {
                    let off: f64 = (0..n).filter(|&j| j != i).map(|j| sym[(i, j)].abs()).sum();
                    sym[(i, i)] - off
                })
                .fold(f64::INFINITY, f64::min);
            let shift = gersh - 1e-3 * scale;
            let shifted = sym - DMatrix::identity(n, n) * shift;
            (shift, Cholesky::factor(&shifted)?)
        }
    };
    // Deterministic start vector with components in every direction.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 101) as f64 / 101.0).collect();
    normalize(&mut x);
    let mut mu_prev = f64::INFINITY;
    for it in 1..=max_iterations {
        let mut y = chol.solve(&x);
        normalize(&mut y);
        let sy = sym * nalgebra::DVector::from_column_slice(&y);
        let mu: f64 = sy.iter().zip(&y).map(|(a, b)| a * b).sum();
        x = y;
        if (mu - mu_prev).abs() <= rel_tol * (mu.abs().max(scale * 1e-3)) {
            log::debug!("inverse iteration converged in {it} iterations (shift {shift:e})");
            return Ok(mu);
        }
        mu_prev = mu;
    }
    Err(Error::EigenNoConvergence {
        iterations: max_iterations,
    })
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}
