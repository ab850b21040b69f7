//! Numerical audit of the schemes: level-wise energy estimates, operator
//! identities, an exact modal reference solution, convergence orders and
//! scheme-to-scheme comparisons.
//!
//! Everything here works on densified operators and is meant for desk-scale
//! problems (a few hundred unknowns).

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::blockops::{triangular_split, BlockDims, BlockOperator, BlockVector};
use crate::error::{Error, Result};
use crate::linsolve::{Cholesky, SpdSolver};
use crate::par::{self, Execution};
use crate::schemes::{
    run, Annotation, EvolutionProblem, Forcing, LevelRecord, Observer, RunLog, SchemeConfig, SchemeKind, SchemeState,
    ThreeLevelOperators, TrajectoryRecorder, Transition,
};

pub type EnergyRecord = LevelRecord;

/// Estimates may be violated only by rounding: slack ≥ −SLACK_TOL · scale.
pub const SLACK_TOL: f64 = 1e-10;
/// Observed-order window for second-order schemes (finest τ pair).
pub const SECOND_ORDER_WINDOW: (f64, f64) = (1.8, 2.2);
/// Observed-order window for first-order schemes (finest τ pair).
pub const FIRST_ORDER_WINDOW: (f64, f64) = (0.8, 1.2);
/// Refinement of the tiny-step numerical reference.
pub const TINY_STEP_REFINEMENT: usize = 1024;

/// Order window the scheme is expected to reach, if it is covered by a claim.
pub fn expected_order_window(cfg: &SchemeConfig) -> Option<(f64, f64)> {
    match cfg.kind {
        SchemeKind::Weighted | SchemeKind::FactorizedAtm if cfg.sigma == 0.5 => Some(SECOND_ORDER_WINDOW),
        SchemeKind::Weighted | SchemeKind::FactorizedAtm if cfg.sigma > 0.5 => Some(FIRST_ORDER_WINDOW),
        SchemeKind::ThreeLevelFactorized if cfg.sigma >= 1.0 => Some(FIRST_ORDER_WINDOW),
        _ => None,
    }
}

fn dense_vec(v: &BlockVector) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

fn quad(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    (m * x).dot(x)
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn rel_asymmetry(m: &DMatrix<f64>) -> f64 {
    let s = m.amax();
    if s == 0.0 {
        0.0
    } else {
        (m - m.transpose()).amax() / s
    }
}

/// `X = M⁻¹ R` column by column.
fn solve_columns(chol: &Cholesky, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = rhs.clone();
    for mut col in out.column_iter_mut() {
        let x = chol.solve(col.as_slice());
        col.copy_from_slice(&x);
    }
    out
}

fn two_level_norm_operator(problem: &EvolutionProblem, cfg: &SchemeConfig, enlarged: bool) -> Result<DMatrix<f64>> {
    let a = problem.a().to_dense();
    let b = problem.b().to_dense();
    let mut n = &b + &a * ((cfg.sigma - 0.5) * cfg.tau);
    if enlarged {
        n += FactorizedDense::new(problem, cfg)?.perturbation;
    }
    Ok(symmetrize(&n))
}

/// `B + (σ − ½)τA`, whose inverse weights `φ` in the weighted-scheme estimate.
pub fn weighted_estimate_operator(problem: &EvolutionProblem, cfg: &SchemeConfig) -> Result<DMatrix<f64>> {
    two_level_norm_operator(problem, cfg, false)
}

/// `B + (σ − ½)τA + σ²τ²A₁B⁻¹A₂`, the factorized-scheme counterpart.
pub fn factorized_estimate_operator(problem: &EvolutionProblem, cfg: &SchemeConfig) -> Result<DMatrix<f64>> {
    two_level_norm_operator(problem, cfg, true)
}

fn two_level_slack(
    problem: &EvolutionProblem,
    cfg: &SchemeConfig,
    norm_op: &SpdSolver,
    y_n: &BlockVector,
    y_np1: &BlockVector,
    phi_n: &BlockVector,
) -> Result<(f64, f64)> {
    let before = problem.norm_a(y_n)?.powi(2);
    let after = problem.norm_a(y_np1)?.powi(2);
    let bound = before + 0.5 * cfg.tau * norm_op.inverse_form(phi_n)?;
    Ok((bound, bound - after))
}

/// Slack of `‖y^{n+1}‖²_A ≤ ‖y^n‖²_A + (τ/2)‖φ^n‖²_{(B+(σ−½)τA)⁻¹}`.
pub fn check_estimate_thm1(
    problem: &EvolutionProblem,
    cfg: &SchemeConfig,
    y_n: &BlockVector,
    y_np1: &BlockVector,
    phi_n: &BlockVector,
) -> Result<f64> {
    let op = BlockOperator::from_dense(problem.dims(), &weighted_estimate_operator(problem, cfg)?)?;
    two_level_slack(problem, cfg, &SpdSolver::new(&op)?, y_n, y_np1, phi_n).map(|(_, s)| s)
}

/// Same estimate with the enlarged operator of the factorized scheme.
pub fn check_estimate_thm2(
    problem: &EvolutionProblem,
    cfg: &SchemeConfig,
    y_n: &BlockVector,
    y_np1: &BlockVector,
    phi_n: &BlockVector,
) -> Result<f64> {
    let op = BlockOperator::from_dense(problem.dims(), &factorized_estimate_operator(problem, cfg)?)?;
    two_level_slack(problem, cfg, &SpdSolver::new(&op)?, y_n, y_np1, phi_n).map(|(_, s)| s)
}

/// Dense assembly of the factorized-scheme operators for a block-diagonal `B`.
#[derive(Debug, Clone)]
pub struct FactorizedDense {
    /// `(B + στA₁) B⁻¹ (B + στA₂)`.
    pub product: DMatrix<f64>,
    /// `B + στA + σ²τ²A₁B⁻¹A₂`.
    pub expansion: DMatrix<f64>,
    /// `σ²τ²A₁B⁻¹A₂`.
    pub perturbation: DMatrix<f64>,
    /// `B + στA`.
    pub weighted: DMatrix<f64>,
}

impl FactorizedDense {
    pub fn new(problem: &EvolutionProblem, cfg: &SchemeConfig) -> Result<Self> {
        if !problem.b().is_block_diagonal() {
            return Err(Error::SchemeInapplicable(
                "factorized operator needs a block-diagonal B".into(),
            ));
        }
        let split = triangular_split(problem.a())?;
        let a = problem.a().to_dense();
        let b = problem.b().to_dense();
        let a1 = split.lower.to_dense();
        let a2 = split.upper.to_dense();
        let chol = Cholesky::factor(&b)?;
        let st = cfg.sigma * cfg.tau;
        let left = &b + &a1 * st;
        let right = &b + &a2 * st;
        let product = &left * solve_columns(&chol, &right);
        let perturbation = &a1 * solve_columns(&chol, &a2) * (st * st);
        let weighted = &b + &a * st;
        Ok(Self {
            expansion: &weighted + &perturbation,
            product,
            perturbation,
            weighted,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BtildeReport {
    /// `max|product − expansion| / max|expansion|`.
    pub max_rel_err: f64,
    /// Smallest eigenvalue of `B̃ − (B + στA)`.
    pub min_eig_excess: f64,
    pub asymmetry: f64,
}

/// Compares the factorized operator with its expansion and checks `B̃ ⪰ B + στA`.
pub fn check_btilde_identity(problem: &EvolutionProblem, cfg: &SchemeConfig) -> Result<BtildeReport> {
    let f = FactorizedDense::new(problem, cfg)?;
    let max_rel_err = (&f.product - &f.expansion).amax() / f.expansion.amax();
    let excess = symmetrize(&(&f.product - &f.weighted));
    Ok(BtildeReport {
        max_rel_err,
        min_eig_excess: SymmetricEigen::new(excess).eigenvalues.min(),
        asymmetry: rel_asymmetry(&f.product),
    })
}

/// Dense operators of the three-level scheme.
#[derive(Debug, Clone)]
pub struct ThreeLevelDense {
    pub a: DMatrix<f64>,
    pub c1: DMatrix<f64>,
    pub c2: DMatrix<f64>,
    /// `C = C₁ + C₂ = B + στA`.
    pub c: DMatrix<f64>,
    /// `D = (τ/2ε)(C₁C₂ + ε²E)`.
    pub d: DMatrix<f64>,
    /// `R = D − (τ²/4)A`.
    pub r: DMatrix<f64>,
    tau: f64,
}

/// Relative asymmetry allowed for `C₁C₂`, `D` and `R` before assembly is deemed broken.
pub const ASSEMBLY_SYM_TOL: f64 = 1e-10;

impl ThreeLevelDense {
    pub fn new(problem: &EvolutionProblem, cfg: &SchemeConfig) -> Result<Self> {
        let ops = ThreeLevelOperators::new(problem, cfg)?;
        let a = problem.a().to_dense();
        let c1 = ops.c.lower.to_dense();
        let c2 = ops.c.upper.to_dense();
        let n = a.nrows();
        let (tau, eps) = (cfg.tau, cfg.epsilon);
        let d = (&c1 * &c2 + DMatrix::identity(n, n) * (eps * eps)) * (tau / (2.0 * eps));
        let r = &d - &a * (tau * tau / 4.0);
        Ok(Self {
            c: &c1 + &c2,
            a,
            c1,
            c2,
            d,
            r,
            tau,
        })
    }

    /// Relative asymmetries of `(C₁C₂, D, R)`.
    pub fn symmetry_defects(&self) -> (f64, f64, f64) {
        (
            rel_asymmetry(&(&self.c1 * &self.c2)),
            rel_asymmetry(&self.d),
            rel_asymmetry(&self.r),
        )
    }

    /// `E_n = ‖(y^n + y^{n−1})/2‖²_A + ‖(y^n − y^{n−1})/τ‖²_R`.
    pub fn energy(&self, y_n: &BlockVector, y_nm1: &BlockVector) -> Result<f64> {
        let v = y_n.combine(0.5, y_nm1, 0.5)?;
        let w = y_n.combine(1.0 / self.tau, y_nm1, -1.0 / self.tau)?;
        Ok(quad(&self.a, &dense_vec(&v)) + quad(&self.r, &dense_vec(&w)))
    }
}

pub fn energy_thm3(
    problem: &EvolutionProblem,
    cfg: &SchemeConfig,
    y_n: &BlockVector,
    y_nm1: &BlockVector,
) -> Result<f64> {
    ThreeLevelDense::new(problem, cfg)?.energy(y_n, y_nm1)
}

/// Smallest eigenvalue of `R`, after checking that `C₁C₂`, `D` and `R` are symmetric.
pub fn check_r_positive(problem: &EvolutionProblem, cfg: &SchemeConfig) -> Result<f64> {
    let t = ThreeLevelDense::new(problem, cfg)?;
    let (cc, d, r) = t.symmetry_defects();
    let worst = cc.max(d).max(r);
    if worst > ASSEMBLY_SYM_TOL {
        return Err(Error::CertificateViolation(format!(
            "three-level operators are not symmetric (C1C2 {cc:e}, D {d:e}, R {r:e}); assembly bug"
        )));
    }
    Ok(SymmetricEigen::new(symmetrize(&t.r)).eigenvalues.min())
}

/// Minimum over the trajectory of `E_n + (τ/2)(C⁻¹φ^n, φ^n) − E_{n+1}`, `n ≥ 1`.
pub fn check_estimate_thm3(problem: &EvolutionProblem, cfg: &SchemeConfig, traj: &TrajectoryRecorder) -> Result<f64> {
    let t = ThreeLevelDense::new(problem, cfg)?;
    let c = SpdSolver::new(&BlockOperator::from_dense(problem.dims(), &symmetrize(&t.c))?)?;
    let mut worst = f64::INFINITY;
    for n in 1..traj.levels.len().saturating_sub(1) {
        let e_n = t.energy(&traj.levels[n], &traj.levels[n - 1])?;
        let e_np1 = t.energy(&traj.levels[n + 1], &traj.levels[n])?;
        let bound = e_n + 0.5 * cfg.tau * c.inverse_form(&traj.phis[n])?;
        worst = worst.min(bound - e_np1);
    }
    Ok(worst)
}

/// Observer that annotates every level with the applicable estimate's
/// right-hand side and slack, and for the three-level scheme with `E_n`.
pub struct EstimateObserver {
    inner: EstimateKind,
}

enum EstimateKind {
    TwoLevel {
        problem: EvolutionProblem,
        cfg: SchemeConfig,
        norm_op: Option<SpdSolver>,
    },
    ThreeLevel {
        dense: ThreeLevelDense,
        c: SpdSolver,
        tau: f64,
        last_energy: Option<f64>,
    },
}

impl EstimateObserver {
    pub fn new(problem: &EvolutionProblem, cfg: &SchemeConfig) -> Result<Self> {
        let inner = match cfg.kind {
            SchemeKind::Weighted | SchemeKind::FactorizedAtm => {
                let m = two_level_norm_operator(problem, cfg, cfg.kind == SchemeKind::FactorizedAtm)?;
                // Below σ = ½ the weight operator may be indefinite; no estimate then.
                let norm_op = BlockOperator::from_dense(problem.dims(), &m)
                    .and_then(|op| SpdSolver::new(&op))
                    .ok();
                EstimateKind::TwoLevel {
                    problem: problem.clone(),
                    cfg: *cfg,
                    norm_op,
                }
            }
            SchemeKind::ThreeLevelFactorized => {
                let dense = ThreeLevelDense::new(problem, cfg)?;
                let c = SpdSolver::new(&BlockOperator::from_dense(problem.dims(), &symmetrize(&dense.c))?)?;
                EstimateKind::ThreeLevel {
                    dense,
                    c,
                    tau: cfg.tau,
                    last_energy: None,
                }
            }
        };
        Ok(Self { inner })
    }
}

impl Observer for EstimateObserver {
    fn on_start(&mut self, _state: &SchemeState) -> Result<Annotation> {
        if let EstimateKind::ThreeLevel { last_energy, .. } = &mut self.inner {
            *last_energy = None;
        }
        Ok(Annotation::default())
    }

    fn on_step(&mut self, tr: &Transition<'_>) -> Result<Annotation> {
        match &mut self.inner {
            EstimateKind::TwoLevel { problem, cfg, norm_op } => match norm_op {
                None => Ok(Annotation::default()),
                Some(op) => {
                    let (bound, slack) =
                        two_level_slack(problem, cfg, op, &tr.before.y_curr, &tr.after.y_curr, tr.phi)?;
                    Ok(Annotation {
                        energy: None,
                        bound_rhs: Some(bound),
                        slack: Some(slack),
                    })
                }
            },
            EstimateKind::ThreeLevel {
                dense,
                c,
                tau,
                last_energy,
            } => {
                let prev = tr.after.y_prev.as_ref().ok_or(Error::MissingPreviousLevel)?;
                let e = dense.energy(&tr.after.y_curr, prev)?;
                let mut ann = Annotation {
                    energy: Some(e),
                    ..Annotation::default()
                };
                if let Some(e_prev) = *last_energy {
                    let bound = e_prev + 0.5 * *tau * c.inverse_form(tr.phi)?;
                    ann.bound_rhs = Some(bound);
                    ann.slack = Some(bound - e);
                }
                *last_energy = Some(e);
                Ok(ann)
            }
        }
    }
}

/// Runs the scheme with an [`EstimateObserver`] attached.
pub fn audit(problem: &EvolutionProblem, cfg: &SchemeConfig) -> Result<RunLog> {
    let mut obs = EstimateObserver::new(problem, cfg)?;
    run(problem, cfg, &mut [&mut obs])
}

/// Scale against which estimate slacks are judged: `‖y⁰‖²_A` for two-level
/// schemes and `E₁` for the three-level scheme, falling back to the largest
/// logged level quantity when that vanishes.
pub fn slack_scale(log: &RunLog) -> f64 {
    let first = match log.config.kind {
        SchemeKind::ThreeLevelFactorized => log.records.get(1).and_then(|r| r.energy).unwrap_or(0.0),
        _ => log.records.first().map_or(0.0, |r| r.norm_a * r.norm_a),
    };
    if first > 0.0 {
        return first;
    }
    log.records
        .iter()
        .map(|r| r.energy.unwrap_or(r.norm_a * r.norm_a).max(r.bound_rhs.unwrap_or(0.0)))
        .fold(f64::MIN_POSITIVE, f64::max)
}

/// Exact solution of the semi-discrete problem via the generalized
/// eigenproblem `A x = λ B x`.
#[derive(Debug, Clone)]
pub struct ModalReference {
    dims: BlockDims,
    /// B-orthonormal eigenvectors as columns.
    modes: DMatrix<f64>,
    lambda: DVector<f64>,
    initial: DVector<f64>,
    forcing: ModalForcing,
}

#[derive(Debug, Clone)]
enum ModalForcing {
    Zero,
    Constant(DVector<f64>),
    Exponential { coeffs: DVector<f64>, rate: f64 },
}

impl ModalReference {
    pub fn new(problem: &EvolutionProblem) -> Result<Self> {
        let forcing_vec = match problem.forcing() {
            Forcing::Custom(_) => return Err(Error::UnsupportedForcing),
            Forcing::Zero => None,
            Forcing::Constant(c) | Forcing::Exponential { amplitude: c, .. } => Some(dense_vec(c)),
        };
        let a = problem.a().to_dense();
        let b = problem.b().to_dense();
        let chol = Cholesky::factor(&b)?;
        // S = L⁻¹ A L⁻ᵀ
        let linv_a = solve_lower_columns(&chol, &a);
        let s = symmetrize(&solve_lower_columns(&chol, &linv_a.transpose()));
        let eig = SymmetricEigen::new(s);
        let mut modes = eig.eigenvectors.clone();
        for mut col in modes.column_iter_mut() {
            let mut x = col.as_slice().to_vec();
            chol.backward_in_place(&mut x);
            col.copy_from_slice(&x);
        }
        let project = |v: &DVector<f64>| modes.transpose() * v;
        let initial = modes.transpose() * (&b * dense_vec(problem.v0()));
        let forcing = match (problem.forcing(), forcing_vec) {
            (Forcing::Constant(_), Some(v)) => ModalForcing::Constant(project(&v)),
            (Forcing::Exponential { rate, .. }, Some(v)) => ModalForcing::Exponential {
                coeffs: project(&v),
                rate: *rate,
            },
            _ => ModalForcing::Zero,
        };
        Ok(Self {
            dims: problem.dims().clone(),
            modes,
            lambda: eig.eigenvalues,
            initial,
            forcing,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.lambda
    }

    pub fn at(&self, t: f64) -> BlockVector {
        let coeffs = DVector::from_fn(self.lambda.len(), |k, _| {
            let lam = self.lambda[k];
            let homogeneous = (-lam * t).exp() * self.initial[k];
            let driven = match &self.forcing {
                ModalForcing::Zero => 0.0,
                // ∫₀ᵗ e^{−λ(t−s)} ds
                ModalForcing::Constant(g) => g[k] * (-(-lam * t).exp_m1()) / lam,
                // ∫₀ᵗ e^{−λ(t−s)} e^{−μs} ds = e^{−μt} (1 − e^{−(λ−μ)t}) / (λ − μ)
                ModalForcing::Exponential { coeffs, rate } => {
                    let delta = lam - rate;
                    let kernel = if delta == 0.0 {
                        t
                    } else {
                        -(-delta * t).exp_m1() / delta
                    };
                    coeffs[k] * (-rate * t).exp() * kernel
                }
            };
            homogeneous + driven
        });
        BlockVector::from_flat(&self.dims, (&self.modes * coeffs).as_slice().to_vec())
            .expect("modal basis has the problem's dimension")
    }
}

fn solve_lower_columns(chol: &Cholesky, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = rhs.clone();
    for mut col in out.column_iter_mut() {
        let mut x = col.as_slice().to_vec();
        chol.forward_in_place(&mut x);
        col.copy_from_slice(&x);
    }
    out
}

/// Exact `u(t)`; forcing must be zero, constant or exponential.
pub fn reference_solution(problem: &EvolutionProblem, t: f64) -> Result<BlockVector> {
    Ok(ModalReference::new(problem)?.at(t))
}

/// Number of uniform steps of size `tau` that reach `t_final`.
pub fn steps_for(t_final: f64, tau: f64) -> Result<usize> {
    let n = (t_final / tau).round();
    if n < 1.0 || ((n * tau) - t_final).abs() > 1e-9 * t_final {
        return Err(Error::InvalidConfig(format!(
            "tau = {tau} does not divide T = {t_final}"
        )));
    }
    Ok(n as usize)
}

/// Weighted σ = ½ solution at `T` with step `tau / 1024`.
pub fn tiny_step_reference(problem: &EvolutionProblem, tau: f64) -> Result<BlockVector> {
    let n = steps_for(problem.t_final(), tau)? * TINY_STEP_REFINEMENT;
    let cfg = SchemeConfig::new(SchemeKind::Weighted, 0.5, problem.t_final(), n);
    Ok(run(problem, &cfg, &mut [])?.final_state.y_curr)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub tau: f64,
    pub error_a: f64,
    /// Observed order against the previous (coarser) row.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub config: SchemeConfig,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn finest_order(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.order)
    }
}

fn observed_order(e_coarse: f64, e_fine: f64, tau_coarse: f64, tau_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (tau_coarse / tau_fine).ln()
}

fn check_taus(taus: &[f64]) -> Result<()> {
    if taus.len() < 2 {
        return Err(Error::InvalidConfig("need at least two tau values".into()));
    }
    if taus.windows(2).any(|w| w[1].is_nan() || w[1] >= w[0]) || taus.iter().any(|t| t.is_nan() || *t <= 0.0) {
        return Err(Error::InvalidConfig(
            "tau values must be positive and strictly decreasing".into(),
        ));
    }
    Ok(())
}

pub fn convergence_study(
    problem: &EvolutionProblem,
    cfg_base: &SchemeConfig,
    taus: &[f64],
) -> Result<ConvergenceReport> {
    convergence_study_with(problem, cfg_base, taus, Execution::default())
}

/// Errors `‖y^N − u(T)‖_A` for each τ. The exact modal reference is used
/// when the forcing allows it, the tiny-step reference otherwise.
pub fn convergence_study_with(
    problem: &EvolutionProblem,
    cfg_base: &SchemeConfig,
    taus: &[f64],
    exec: Execution,
) -> Result<ConvergenceReport> {
    check_taus(taus)?;
    let t_final = problem.t_final();
    let exact = match ModalReference::new(problem) {
        Ok(m) => m.at(t_final),
        Err(Error::UnsupportedForcing) => tiny_step_reference(problem, *taus.last().unwrap())?,
        Err(e) => return Err(e),
    };
    let errors = par::try_map(exec, taus.to_vec(), |tau| {
        let cfg = SchemeConfig {
            tau,
            n_steps: steps_for(t_final, tau)?,
            ..*cfg_base
        };
        let y = run(problem, &cfg, &mut [])?.final_state.y_curr;
        problem.norm_a(&y.sub(&exact)?)
    })?;
    let rows = taus
        .iter()
        .zip(&errors)
        .enumerate()
        .map(|(i, (&tau, &error_a))| ConvergenceRow {
            tau,
            error_a,
            order: (i > 0).then(|| observed_order(errors[i - 1], error_a, taus[i - 1], tau)),
        })
        .collect();
    Ok(ConvergenceReport {
        config: *cfg_base,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRow {
    pub tau: f64,
    /// `max_n ‖y_weighted^n − y_factorized^n‖_A`.
    pub max_step_diff: f64,
    pub final_diff: f64,
    /// `max_step_diff` of the previous row divided by this one.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub sigma: f64,
    pub rows: Vec<CompareRow>,
}

impl CompareReport {
    pub fn finest_ratio(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.ratio)
    }
}

pub fn compare_schemes(problem: &EvolutionProblem, cfg: &SchemeConfig, taus: &[f64]) -> Result<CompareReport> {
    compare_schemes_with(problem, cfg, taus, Execution::default())
}

/// Runs the weighted and factorized schemes on identical data and measures
/// how far their trajectories drift apart in the A-norm.
pub fn compare_schemes_with(
    problem: &EvolutionProblem,
    cfg: &SchemeConfig,
    taus: &[f64],
    exec: Execution,
) -> Result<CompareReport> {
    check_taus(taus)?;
    if !problem.b().is_block_diagonal() {
        return Err(Error::SchemeInapplicable(
            "scheme comparison needs a block-diagonal B".into(),
        ));
    }
    let t_final = problem.t_final();
    let diffs = par::try_map(exec, taus.to_vec(), |tau| {
        let n_steps = steps_for(t_final, tau)?;
        let traj = |kind| -> Result<Vec<BlockVector>> {
            let c = SchemeConfig {
                kind,
                tau,
                n_steps,
                ..*cfg
            };
            let mut rec = TrajectoryRecorder::default();
            run(problem, &c, &mut [&mut rec])?;
            Ok(rec.levels)
        };
        let w = traj(SchemeKind::Weighted)?;
        let f = traj(SchemeKind::FactorizedAtm)?;
        let per_level = w
            .iter()
            .zip(&f)
            .map(|(x, y)| problem.norm_a(&x.sub(y)?))
            .collect::<Result<Vec<_>>>()?;
        Ok::<_, Error>((
            per_level.iter().cloned().fold(0.0, f64::max),
            *per_level.last().unwrap(),
        ))
    })?;
    let rows = taus
        .iter()
        .zip(&diffs)
        .enumerate()
        .map(|(i, (&tau, &(max_step_diff, final_diff)))| CompareRow {
            tau,
            max_step_diff,
            final_diff,
            ratio: (i > 0).then(|| diffs[i - 1].0 / max_step_diff),
        })
        .collect();
    Ok(CompareReport { sigma: cfg.sigma, rows })
}

/// One `(σ, τ, scheme)` cell of a stability sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCell {
    pub sigma: f64,
    pub tau: f64,
    pub kind: SchemeKind,
    /// Minimum estimate slack divided by [`slack_scale`]; `None` when no
    /// estimate applies.
    pub min_slack: Option<f64>,
    /// Smallest eigenvalue of `R` (three-level only).
    pub r_min_eig: Option<f64>,
    pub in_hypothesis: bool,
}

impl StabilityCell {
    /// Cells outside the theorem hypotheses never fail.
    pub fn passed(&self) -> bool {
        !self.in_hypothesis
            || (self.min_slack.is_some_and(|s| s >= -SLACK_TOL) && self.r_min_eig.is_none_or(|r| r > 0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySweep {
    pub kinds: Vec<SchemeKind>,
    pub sigmas: Vec<f64>,
    pub taus: Vec<f64>,
    pub n_steps: usize,
    pub epsilon: f64,
}

/// Audits every `(scheme, σ, τ)` cell for `n_steps` steps. Cells come back
/// in scheme-major, then σ, then τ order.
pub fn stability_sweep(
    problem: &EvolutionProblem,
    sweep: &StabilitySweep,
    exec: Execution,
) -> Result<Vec<StabilityCell>> {
    let mut cells = Vec::new();
    for &kind in &sweep.kinds {
        for &sigma in &sweep.sigmas {
            for &tau in &sweep.taus {
                cells.push(SchemeConfig {
                    kind,
                    sigma,
                    tau,
                    epsilon: sweep.epsilon,
                    n_steps: sweep.n_steps,
                });
            }
        }
    }
    par::try_map(exec, cells, |cfg| {
        let log = audit(problem, &cfg)?;
        let scale = slack_scale(&log);
        let r_min_eig = match cfg.kind {
            SchemeKind::ThreeLevelFactorized => Some(check_r_positive(problem, &cfg)?),
            _ => None,
        };
        Ok(StabilityCell {
            sigma: cfg.sigma,
            tau: cfg.tau,
            kind: cfg.kind,
            min_slack: log.min_slack().map(|s| s / scale),
            r_min_eig,
            in_hypothesis: cfg.within_hypothesis(),
        })
    })
}
