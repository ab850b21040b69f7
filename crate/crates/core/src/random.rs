//! Seeded random instances for tests, sweeps and benchmarks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blockops::{Block, BlockDims, BlockOperator, BlockVector};
use crate::error::Result;
use crate::schemes::{EvolutionProblem, Forcing};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_dims(rng: &mut impl Rng, p_range: (usize, usize), n_range: (usize, usize)) -> BlockDims {
    let p = rng.random_range(p_range.0..=p_range.1);
    BlockDims::new((0..p).map(|_| rng.random_range(n_range.0..=n_range.1)).collect()).expect("sizes ≥ 1")
}

pub fn random_vector(rng: &mut impl Rng, dims: &BlockDims) -> BlockVector {
    BlockVector::from_fn(dims, |_, _| rng.random_range(-1.0..1.0))
}

fn random_dense(rng: &mut impl Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

/// Symmetric block operator; each off-diagonal block pair is present with
/// probability `fill`, and sparse blocks are mixed in.
pub fn random_symmetric(rng: &mut impl Rng, dims: &BlockDims, fill: f64) -> BlockOperator {
    let p = dims.p();
    let mut op = BlockOperator::zeros(dims);
    for a in 0..p {
        for b in 0..=a {
            if a != b && !rng.random_bool(fill) {
                continue;
            }
            let mut m = random_dense(rng, dims.size(a), dims.size(b));
            if a == b {
                m = (&m + m.transpose()) * 0.5;
            }
            let as_sparse = rng.random_bool(0.3);
            let block = |m: DMatrix<f64>| {
                if as_sparse {
                    Block::Sparse(
                        crate::blockops::CsrMatrix::from_triplets(
                            m.nrows(),
                            m.ncols(),
                            (0..m.nrows())
                                .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
                                .map(|(i, j)| (i, j, m[(i, j)])),
                        )
                        .expect("in range"),
                    )
                } else {
                    Block::Dense(m)
                }
            };
            op.set_block(a, b, Some(block(m.clone()))).expect("shape");
            if a != b {
                op.set_block(b, a, Some(block(m.transpose()))).expect("shape");
            }
        }
    }
    op
}

/// Symmetric positive definite operator: a random symmetric operator made
/// strictly diagonally dominant with margin `margin`.
pub fn random_spd(rng: &mut impl Rng, dims: &BlockDims, fill: f64, margin: f64) -> BlockOperator {
    let sym = random_symmetric(rng, dims, fill);
    let dense = sym.to_dense();
    let n = dims.total();
    let mut shift = DMatrix::zeros(n, n);
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| dense[(i, j)].abs()).sum();
        shift[(i, i)] = off - dense[(i, i)] + margin * (1.0 + rng.random_range(0.0..1.0));
    }
    let diag_shift = BlockOperator::from_dense(dims, &shift).expect("dims");
    BlockOperator::lincomb(1.0, &sym, 1.0, &diag_shift).expect("dims")
}

/// SPD operator with only diagonal blocks.
pub fn random_block_diagonal_spd(rng: &mut impl Rng, dims: &BlockDims, margin: f64) -> BlockOperator {
    random_spd(rng, dims, 0.0, margin)
}

/// `f(t) = g₁ cos(ω₁ t) + g₂ sin(ω₂ t) + g₃`, smooth and bounded.
pub fn smooth_forcing(rng: &mut impl Rng, dims: &BlockDims) -> Forcing {
    let g1 = random_vector(rng, dims);
    let g2 = random_vector(rng, dims);
    let g3 = random_vector(rng, dims);
    let w1 = rng.random_range(0.5..3.0);
    let w2 = rng.random_range(0.5..3.0);
    Forcing::custom(move |t| {
        let mut f = g1.scaled((w1 * t).cos());
        f.axpy((w2 * t).sin(), &g2).expect("same dims");
        f.axpy(1.0, &g3).expect("same dims");
        f
    })
}

/// Random SPD problem. `coupled_b` selects a B with off-diagonal blocks.
pub fn random_problem(
    rng: &mut impl Rng,
    dims: &BlockDims,
    coupled_b: bool,
    forcing: bool,
) -> Result<EvolutionProblem> {
    let a = random_spd(rng, dims, 0.7, 0.5);
    let b = if coupled_b {
        random_spd(rng, dims, 1.0, 0.5)
    } else {
        random_block_diagonal_spd(rng, dims, 0.5)
    };
    let v0 = random_vector(rng, dims);
    let f = if forcing {
        smooth_forcing(rng, dims)
    } else {
        Forcing::Zero
    };
    EvolutionProblem::new(a, b, f, v0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockops::{certify, symmetry_defect};

    #[test]
    fn generated_operators_are_spd() {
        let mut r = rng(7);
        for _ in 0..20 {
            let d = random_dims(&mut r, (2, 4), (1, 8));
            let m = random_spd(&mut r, &d, 0.7, 0.1);
            assert_eq!(symmetry_defect(&m), 0.0);
            assert!(certify(&m, 1e-12).unwrap().positive_definite);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let d = BlockDims::new(vec![3, 2]).unwrap();
        let a = random_spd(&mut rng(3), &d, 0.5, 1.0);
        let b = random_spd(&mut rng(3), &d, 0.5, 1.0);
        assert_eq!(a, b);
    }
}
