//! Finite-difference model problems on `[0, 1]` with homogeneous Dirichlet
//! boundaries: multicomponent diffusion (diagonal capacity matrix) and
//! double-porosity flow (coupled capacity matrix), plus manufactured
//! solutions whose error is purely temporal.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::blockops::{Block, BlockDims, BlockOperator, BlockVector, CsrMatrix};
use crate::error::{Error, Result};
use crate::schemes::{EvolutionProblem, Forcing};

/// Coefficients of a coupled 1D diffusion-reaction system with `p = k.nrows()`
/// species on `m` interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSpec {
    pub m: usize,
    /// Diffusion coefficients `k_{αβ}`.
    pub k: DMatrix<f64>,
    /// Reaction / exchange coefficients `r_{αβ}`.
    pub r: DMatrix<f64>,
    /// Capacity coefficients `b_{αβ}`.
    pub b: DMatrix<f64>,
}

impl DiffusionSpec {
    pub fn p(&self) -> usize {
        self.k.nrows()
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.m as f64 + 1.0)
    }

    pub fn dims(&self) -> Result<BlockDims> {
        BlockDims::uniform(self.p(), self.m)
    }

    /// Two-species multicomponent medium used throughout the tests.
    pub fn multicomponent_default(m: usize) -> Self {
        Self {
            m,
            k: DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 0.5]),
            r: DMatrix::from_row_slice(2, 2, &[0.3, -0.1, -0.1, 0.3]),
            b: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]),
        }
    }

    /// Two-continuum medium: exchange `γ[[1, −1], [−1, 1]] + μI` with
    /// `γ = 1`, `μ = 0.01`, and a coupled capacity matrix.
    pub fn double_porosity_default(m: usize) -> Self {
        let (gamma, mu) = (1.0, 0.01);
        Self {
            m,
            k: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.1]),
            r: DMatrix::from_row_slice(2, 2, &[gamma + mu, -gamma, -gamma, gamma + mu]),
            b: DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]),
        }
    }

    fn validate(&self) -> Result<()> {
        let p = self.p();
        if p == 0 || self.m == 0 {
            return Err(Error::InvalidConfig("need p ≥ 1 species and M ≥ 1 nodes".into()));
        }
        for (name, c) in [("k", &self.k), ("r", &self.r), ("b", &self.b)] {
            if c.shape() != (p, p) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be {p}x{p}, got {:?}",
                    c.shape()
                )));
            }
            let asym = (c - c.transpose()).amax();
            if asym > 1e-14 * c.amax() {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be symmetric (asymmetry {asym:e})"
                )));
            }
        }
        Ok(())
    }

    fn b_is_diagonal(&self) -> bool {
        let p = self.p();
        (0..p).all(|a| (0..p).all(|b| a == b || self.b[(a, b)] == 0.0))
    }

    /// `A = k ⊗ L + r ⊗ I`, `B = b ⊗ I`.
    pub fn assemble(&self) -> Result<(BlockOperator, BlockOperator)> {
        self.validate()?;
        let dims = self.dims()?;
        let lap = Block::Sparse(laplacian(self.m));
        let eye = Block::identity(self.m);
        let mut a = BlockOperator::zeros(&dims);
        let mut b = BlockOperator::zeros(&dims);
        for al in 0..self.p() {
            for be in 0..self.p() {
                let (k, r, c) = (self.k[(al, be)], self.r[(al, be)], self.b[(al, be)]);
                if k != 0.0 || r != 0.0 {
                    a.set_block(al, be, Some(Block::lincomb(k, &lap, r, &eye)))?;
                }
                if c != 0.0 {
                    b.set_block(al, be, Some(eye.scaled(c)))?;
                }
            }
        }
        Ok((a, b))
    }
}

/// `(1/h²) tridiag(−1, 2, −1)` on `m` interior nodes of `[0, 1]`.
pub fn laplacian(m: usize) -> CsrMatrix {
    let h = 1.0 / (m as f64 + 1.0);
    let s = 1.0 / (h * h);
    let entries = (0..m).flat_map(move |i| {
        let mut row = vec![(i, i, 2.0 * s)];
        if i > 0 {
            row.push((i, i - 1, -s));
        }
        if i + 1 < m {
            row.push((i, i + 1, -s));
        }
        row
    });
    CsrMatrix::from_triplets(m, m, entries).expect("indices in range")
}

/// Interior node coordinates `x_j = j h`, `j = 1..=m`.
pub fn grid(m: usize) -> Vec<f64> {
    let h = 1.0 / (m as f64 + 1.0);
    (1..=m).map(|j| j as f64 * h).collect()
}

/// `u_α(x_j, t) = c_α e^{−t} sin(π x_j)`.
pub fn profile_vector(m: usize, c: &[f64], t: f64) -> Result<BlockVector> {
    let dims = BlockDims::uniform(c.len(), m)?;
    let x = grid(m);
    let decay = (-t).exp();
    Ok(BlockVector::from_fn(&dims, |a, j| c[a] * decay * (PI * x[j]).sin()))
}

/// Default profile constants `c_α = α` (1-based).
pub fn default_profile(p: usize) -> Vec<f64> {
    (1..=p).map(|a| a as f64).collect()
}

/// Multicomponent diffusion with a diagonal capacity matrix. Initial data
/// and forcing are zero; attach them with the problem's `with_*` methods.
pub fn build_coupled_diffusion(spec: &DiffusionSpec) -> Result<EvolutionProblem> {
    spec.validate()?;
    if !spec.b_is_diagonal() {
        return Err(Error::InvalidConfig(
            "multicomponent diffusion needs a diagonal capacity matrix b; use the double-porosity builder".into(),
        ));
    }
    from_spec(spec)
}

/// Double-porosity flow: the capacity matrix may couple components, so `B`
/// carries off-diagonal blocks.
pub fn build_double_porosity(spec: &DiffusionSpec) -> Result<EvolutionProblem> {
    from_spec(spec)
}

fn from_spec(spec: &DiffusionSpec) -> Result<EvolutionProblem> {
    let (a, b) = spec.assemble()?;
    let zero = BlockVector::zeros(a.dims());
    EvolutionProblem::new(a, b, Forcing::Zero, zero, 1.0)
}

/// A problem whose semi-discrete solution is exactly `e^{−t} u0`.
#[derive(Debug, Clone)]
pub struct ManufacturedProblem {
    pub problem: EvolutionProblem,
    pub u0: BlockVector,
}

impl ManufacturedProblem {
    pub fn exact(&self, t: f64) -> BlockVector {
        self.u0.scaled((-t).exp())
    }

    /// `du*/dt`.
    pub fn exact_derivative(&self, t: f64) -> BlockVector {
        self.u0.scaled(-(-t).exp())
    }
}

/// Builds `f(t) = B du*/dt + A u* = e^{−t}(A − B) u0` at the discrete level,
/// with `u0` the sampled profile and `v0 = u0`; horizon `T = 1`.
pub fn manufactured_problem(spec: &DiffusionSpec, profile: &[f64]) -> Result<ManufacturedProblem> {
    if profile.len() != spec.p() {
        return Err(Error::dims("manufactured_problem profile", spec.p(), profile.len()));
    }
    let base = from_spec(spec)?;
    let u0 = profile_vector(spec.m, profile, 0.0)?;
    let amplitude = base.a().apply(&u0)?.sub(&base.b().apply(&u0)?)?;
    let problem = base
        .with_v0(u0.clone())?
        .with_forcing(Forcing::Exponential { amplitude, rate: 1.0 })?;
    Ok(ManufacturedProblem { problem, u0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockops::{certify, symmetry_defect};

    fn spec1(m: usize) -> DiffusionSpec {
        DiffusionSpec {
            m,
            k: DMatrix::from_element(1, 1, 1.0),
            r: DMatrix::zeros(1, 1),
            b: DMatrix::from_element(1, 1, 1.0),
        }
    }

    #[test]
    fn scalar_heat_equation_assembly() {
        let p = build_coupled_diffusion(&spec1(3)).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]) * 16.0;
        assert_eq!(p.a().to_dense(), expected);
        assert_eq!(p.b().to_dense(), DMatrix::identity(3, 3));
    }

    #[test]
    fn multicomponent_default_is_spd() {
        let spec = DiffusionSpec::multicomponent_default(15);
        let p = build_coupled_diffusion(&spec).unwrap();
        let c = certify(p.a(), 1e-12).unwrap();
        assert!(c.positive_definite && c.symmetric);
        assert!(p.b().is_block_diagonal());
    }

    #[test]
    fn double_porosity_is_spd_and_coupled() {
        let spec = DiffusionSpec::double_porosity_default(15);
        let p = build_double_porosity(&spec).unwrap();
        assert!(certify(p.b(), 1e-12).unwrap().is_spd());
        assert!(certify(p.a(), 1e-12).unwrap().is_spd());
        assert!(!p.b().is_block_diagonal());
        assert!(build_coupled_diffusion(&spec).is_err());
    }

    #[test]
    fn assembly_is_symmetric() {
        let (a, b) = DiffusionSpec::double_porosity_default(7).assemble().unwrap();
        assert_eq!(symmetry_defect(&a), 0.0);
        assert_eq!(symmetry_defect(&b), 0.0);
    }

    #[test]
    fn indefinite_coefficients_fail_fast() {
        let mut spec = DiffusionSpec::multicomponent_default(5);
        spec.k = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let err = build_coupled_diffusion(&spec).unwrap_err();
        assert!(matches!(err, Error::CertificateViolation(m) if m.contains("min eigenvalue")));
    }

    #[test]
    fn asymmetric_coefficients_rejected() {
        let mut spec = DiffusionSpec::multicomponent_default(5);
        spec.r[(0, 1)] = 0.7;
        assert!(matches!(build_coupled_diffusion(&spec), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn manufactured_forcing_at_zero() {
        let spec = DiffusionSpec::multicomponent_default(9);
        let mp = manufactured_problem(&spec, &default_profile(2)).unwrap();
        let p = &mp.problem;
        let expect = p.a().apply(&mp.u0).unwrap().sub(&p.b().apply(&mp.u0).unwrap()).unwrap();
        assert!(p.f(0.0).sub(&expect).unwrap().max_abs() <= 1e-13 * expect.max_abs());
        assert_eq!(p.v0(), &mp.u0);
    }

    #[test]
    fn manufactured_semi_discrete_residual_vanishes() {
        let spec = DiffusionSpec::double_porosity_default(11);
        let mp = manufactured_problem(&spec, &[1.0, 2.0]).unwrap();
        let p = &mp.problem;
        for t in [0.0, 0.3, 0.77, 1.0] {
            let lhs = p
                .b()
                .apply(&mp.exact_derivative(t))
                .unwrap()
                .add(&p.a().apply(&mp.exact(t)).unwrap())
                .unwrap();
            let res = lhs.sub(&p.f(t)).unwrap();
            assert!(
                res.max_abs() <= 1e-12 * p.f(t).max_abs().max(1.0),
                "t = {t}: {}",
                res.max_abs()
            );
        }
    }
}
