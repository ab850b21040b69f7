//! Time-stepping schemes for `B du/dt + A u = f(t)`.
//!
//! * [`SchemeKind::Weighted`]: the two-level σ-weighted scheme, one monolithic
//!   SPD solve with `B + στA` per step.
//! * [`SchemeKind::FactorizedAtm`]: the alternating-triangular variant for
//!   block-diagonal `B`, with transition operator
//!   `(B + στA₁) B⁻¹ (B + στA₂)`; each step is a forward block sweep, a
//!   multiplication by `B` and a backward block sweep.
//! * [`SchemeKind::ThreeLevelFactorized`]: the three-level scheme for a
//!   coupled `B`, inverting `(C₁ + εE)(C₂ + εE)` with `C_i = B_i + στA_i`.
//!
//! Only diagonal blocks are ever factorized by the splitting schemes, and all
//! factorizations are built once per [`Stepper`].

use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::blockops::{
    certify, triangular_split, weighted_norm, BlockDims, BlockOperator, BlockVector, OperatorCertificate,
    TriangularPair, DEFAULT_TOL_SYM,
};
use crate::error::{Error, Result};
use crate::linsolve::{solve_block_lower, solve_block_upper, DiagFactorization, DiagStrategy, SpdSolver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Weighted,
    FactorizedAtm,
    ThreeLevelFactorized,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [
        SchemeKind::Weighted,
        SchemeKind::FactorizedAtm,
        SchemeKind::ThreeLevelFactorized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Weighted => "weighted",
            SchemeKind::FactorizedAtm => "factorized",
            SchemeKind::ThreeLevelFactorized => "three_level",
        }
    }

    /// Smallest weight for which the energy estimate of this scheme is guaranteed.
    pub fn sigma_threshold(self) -> f64 {
        match self {
            SchemeKind::Weighted | SchemeKind::FactorizedAtm => 0.5,
            SchemeKind::ThreeLevelFactorized => 1.0,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted" => Ok(SchemeKind::Weighted),
            "factorized" | "factorized_atm" | "atm" => Ok(SchemeKind::FactorizedAtm),
            "three_level" | "three-level" | "three_level_factorized" => Ok(SchemeKind::ThreeLevelFactorized),
            other => Err(Error::InvalidConfig(format!(
                "unknown scheme {other:?} (expected weighted, factorized or three_level)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Weight σ ∈ [0, 1].
    pub sigma: f64,
    pub tau: f64,
    /// Regularization ε > 0 of the three-level scheme.
    pub epsilon: f64,
    pub n_steps: usize,
}

impl SchemeConfig {
    pub const DEFAULT_EPSILON: f64 = 1.0;

    /// Uniform grid `t_n = nτ` with `τ = t_final / n_steps`.
    pub fn new(kind: SchemeKind, sigma: f64, t_final: f64, n_steps: usize) -> Self {
        Self {
            kind,
            sigma,
            tau: t_final / n_steps as f64,
            epsilon: Self::DEFAULT_EPSILON,
            n_steps,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_kind(mut self, kind: SchemeKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }

    pub fn t_final(&self) -> f64 {
        self.time(self.n_steps)
    }

    /// Whether σ lies in the range covered by the scheme's stability estimate.
    pub fn within_hypothesis(&self) -> bool {
        self.sigma >= self.kind.sigma_threshold()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(Error::InvalidConfig(format!(
                "sigma = {} outside the allowed range [0, 1]",
                self.sigma
            )));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidConfig(format!("tau = {} must be positive", self.tau)));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidConfig("need at least one time step".into()));
        }
        if self.kind == SchemeKind::ThreeLevelFactorized && (self.epsilon.is_nan() || self.epsilon <= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        if !self.within_hypothesis() && first_warning(self.kind, self.sigma) {
            log::warn!(
                "sigma = {} is below {} for the {} scheme; the stability estimate does not apply",
                self.sigma,
                self.kind.sigma_threshold(),
                self.kind
            );
        }
        Ok(())
    }
}

/// Studies validate one configuration per τ; warn once per `(scheme, σ)`.
fn first_warning(kind: SchemeKind, sigma: f64) -> bool {
    static SEEN: Mutex<BTreeSet<(&'static str, u64)>> = Mutex::new(BTreeSet::new());
    SEEN.lock()
        .map_or(true, |mut seen| seen.insert((kind.name(), sigma.to_bits())))
}

/// Right-hand side `f(t)`.
#[derive(Clone)]
pub enum Forcing {
    Zero,
    Constant(BlockVector),
    /// `f(t) = e^{−rate·t} · amplitude`.
    Exponential {
        amplitude: BlockVector,
        rate: f64,
    },
    Custom(Arc<dyn Fn(f64) -> BlockVector + Send + Sync>),
}

impl Forcing {
    pub fn custom(f: impl Fn(f64) -> BlockVector + Send + Sync + 'static) -> Self {
        Forcing::Custom(Arc::new(f))
    }

    pub fn eval(&self, dims: &BlockDims, t: f64) -> BlockVector {
        match self {
            Forcing::Zero => BlockVector::zeros(dims),
            Forcing::Constant(c) => c.clone(),
            Forcing::Exponential { amplitude, rate } => amplitude.scaled((-rate * t).exp()),
            Forcing::Custom(f) => f(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Forcing::Zero)
    }
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Zero => f.write_str("Zero"),
            Forcing::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Forcing::Exponential { amplitude, rate } => f
                .debug_struct("Exponential")
                .field("amplitude", amplitude)
                .field("rate", rate)
                .finish(),
            Forcing::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Cauchy problem `B du/dt + A u = f(t)`, `u(0) = v0`, on `[0, T]`.
#[derive(Debug, Clone)]
pub struct EvolutionProblem {
    a: BlockOperator,
    b: BlockOperator,
    forcing: Forcing,
    v0: BlockVector,
    t_final: f64,
    cert_a: OperatorCertificate,
    cert_b: OperatorCertificate,
}

impl EvolutionProblem {
    /// Both `A` and `B` must be certified symmetric positive definite.
    pub fn new(a: BlockOperator, b: BlockOperator, forcing: Forcing, v0: BlockVector, t_final: f64) -> Result<Self> {
        a.dims().expect_same(b.dims(), "EvolutionProblem (A vs B)")?;
        a.dims().expect_same(v0.dims(), "EvolutionProblem (A vs v0)")?;
        if let Forcing::Constant(c) | Forcing::Exponential { amplitude: c, .. } = &forcing {
            a.dims().expect_same(c.dims(), "EvolutionProblem (A vs f)")?;
        }
        if t_final.is_nan() || t_final <= 0.0 {
            return Err(Error::InvalidConfig(format!("horizon T = {t_final} must be positive")));
        }
        let cert_a = certify(&a, DEFAULT_TOL_SYM)?;
        let cert_b = certify(&b, DEFAULT_TOL_SYM)?;
        for (name, c) in [("A", &cert_a), ("B", &cert_b)] {
            if !c.is_spd() {
                return Err(Error::CertificateViolation(format!(
                    "{name} must be symmetric positive definite (asymmetry {:e}, min eigenvalue {:e})",
                    c.symmetry_defect, c.min_eig_estimate
                )));
            }
        }
        Ok(Self {
            a,
            b,
            forcing,
            v0,
            t_final,
            cert_a,
            cert_b,
        })
    }

    pub fn a(&self) -> &BlockOperator {
        &self.a
    }

    pub fn b(&self) -> &BlockOperator {
        &self.b
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn v0(&self) -> &BlockVector {
        &self.v0
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn dims(&self) -> &BlockDims {
        self.a.dims()
    }

    pub fn certificate_a(&self) -> &OperatorCertificate {
        &self.cert_a
    }

    pub fn certificate_b(&self) -> &OperatorCertificate {
        &self.cert_b
    }

    pub fn f(&self, t: f64) -> BlockVector {
        self.forcing.eval(self.dims(), t)
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Result<Self> {
        if let Forcing::Constant(c) | Forcing::Exponential { amplitude: c, .. } = &forcing {
            self.dims().expect_same(c.dims(), "EvolutionProblem::with_forcing")?;
        }
        self.forcing = forcing;
        Ok(self)
    }

    pub fn with_v0(mut self, v0: BlockVector) -> Result<Self> {
        self.dims().expect_same(v0.dims(), "EvolutionProblem::with_v0")?;
        self.v0 = v0;
        Ok(self)
    }

    pub fn with_t_final(mut self, t_final: f64) -> Result<Self> {
        if t_final.is_nan() || t_final <= 0.0 {
            return Err(Error::InvalidConfig(format!("horizon T = {t_final} must be positive")));
        }
        self.t_final = t_final;
        Ok(self)
    }

    /// `‖y‖_A`.
    pub fn norm_a(&self, y: &BlockVector) -> Result<f64> {
        weighted_norm(&self.a, y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeState {
    pub n: usize,
    pub t: f64,
    pub y_curr: BlockVector,
    /// `y^{n−1}`, carried only by the three-level scheme once `n ≥ 1`.
    pub y_prev: Option<BlockVector>,
}

impl SchemeState {
    pub fn initial(problem: &EvolutionProblem) -> Self {
        Self {
            n: 0,
            t: 0.0,
            y_curr: problem.v0().clone(),
            y_prev: None,
        }
    }
}

/// `φ^n = f(σ t_{n+1} + (1 − σ) t_n)`.
pub fn make_phi(problem: &EvolutionProblem, cfg: &SchemeConfig, n: usize) -> BlockVector {
    let t = cfg.sigma * cfg.time(n + 1) + (1.0 - cfg.sigma) * cfg.time(n);
    problem.f(t)
}

/// Operators of the three-level scheme, in split form.
#[derive(Debug, Clone)]
pub struct ThreeLevelOperators {
    /// `C₁ = B₁ + στA₁`, `C₂ = B₂ + στA₂`.
    pub c: TriangularPair,
    pub plus_lower: BlockOperator,
    pub plus_upper: BlockOperator,
    pub minus_lower: BlockOperator,
    pub minus_upper: BlockOperator,
}

impl ThreeLevelOperators {
    pub fn new(problem: &EvolutionProblem, cfg: &SchemeConfig) -> Result<Self> {
        let sa = triangular_split(problem.a())?;
        let sb = triangular_split(problem.b())?;
        let st = cfg.sigma * cfg.tau;
        let c1 = BlockOperator::lincomb(1.0, &sb.lower, st, &sa.lower)?;
        let c2 = BlockOperator::lincomb(1.0, &sb.upper, st, &sa.upper)?;
        let eye = BlockOperator::identity(problem.dims());
        let e = cfg.epsilon;
        Ok(Self {
            plus_lower: BlockOperator::lincomb(1.0, &c1, e, &eye)?,
            plus_upper: BlockOperator::lincomb(1.0, &c2, e, &eye)?,
            minus_lower: BlockOperator::lincomb(1.0, &c1, -e, &eye)?,
            minus_upper: BlockOperator::lincomb(1.0, &c2, -e, &eye)?,
            c: TriangularPair { lower: c1, upper: c2 },
        })
    }
}

/// Factorized operators of the alternating-triangular scheme:
/// `B + στA₁` and `B + στA₂`.
#[derive(Debug, Clone)]
pub struct FactorizedOperators {
    pub lower: BlockOperator,
    pub upper: BlockOperator,
    pub split_a: TriangularPair,
}

impl FactorizedOperators {
    pub fn new(problem: &EvolutionProblem, cfg: &SchemeConfig) -> Result<Self> {
        if !problem.b().is_block_diagonal() {
            return Err(Error::SchemeInapplicable(
                "the factorized alternating-triangular scheme needs a block-diagonal B; \
                 use the three_level scheme for coupled time derivatives"
                    .into(),
            ));
        }
        let split_a = triangular_split(problem.a())?;
        let st = cfg.sigma * cfg.tau;
        Ok(Self {
            lower: BlockOperator::lincomb(1.0, problem.b(), st, &split_a.lower)?,
            upper: BlockOperator::lincomb(1.0, problem.b(), st, &split_a.upper)?,
            split_a,
        })
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
enum Prepared {
    Weighted {
        lhs: SpdSolver,
    },
    Factorized {
        ops: FactorizedOperators,
        diag: DiagFactorization,
    },
    ThreeLevel {
        start: SpdSolver,
        ops: ThreeLevelOperators,
        diag: DiagFactorization,
    },
}

/// A scheme bound to one problem and configuration, with all factorizations cached.
#[derive(Debug, Clone)]
pub struct Stepper<'p> {
    problem: &'p EvolutionProblem,
    cfg: SchemeConfig,
    prepared: Prepared,
}

impl<'p> Stepper<'p> {
    pub fn new(problem: &'p EvolutionProblem, cfg: &SchemeConfig) -> Result<Self> {
        Self::with_strategy(problem, cfg, DiagStrategy::default())
    }

    pub fn with_strategy(problem: &'p EvolutionProblem, cfg: &SchemeConfig, strategy: DiagStrategy) -> Result<Self> {
        cfg.validate()?;
        let weighted_lhs = || {
            SpdSolver::new(&BlockOperator::lincomb(
                1.0,
                problem.b(),
                cfg.sigma * cfg.tau,
                problem.a(),
            )?)
        };
        let prepared = match cfg.kind {
            SchemeKind::Weighted => Prepared::Weighted { lhs: weighted_lhs()? },
            SchemeKind::FactorizedAtm => {
                let ops = FactorizedOperators::new(problem, cfg)?;
                // B + στA₁ and B + στA₂ share their diagonal blocks B_α + σ(τ/2)A_αα.
                let diag = DiagFactorization::new(&ops.lower, strategy)?;
                Prepared::Factorized { ops, diag }
            }
            SchemeKind::ThreeLevelFactorized => {
                let ops = ThreeLevelOperators::new(problem, cfg)?;
                // Diagonal blocks ½B_αα + σ(τ/2)A_αα + εE_α, common to both sweeps.
                let diag = DiagFactorization::new(&ops.plus_lower, strategy)?;
                Prepared::ThreeLevel {
                    start: weighted_lhs()?,
                    ops,
                    diag,
                }
            }
        };
        Ok(Self {
            problem,
            cfg: *cfg,
            prepared,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn problem(&self) -> &EvolutionProblem {
        self.problem
    }

    pub fn initial_state(&self) -> SchemeState {
        SchemeState::initial(self.problem)
    }

    /// `τ(φ^n − A y^n)`.
    fn residual(&self, state: &SchemeState, phi: &BlockVector) -> Result<BlockVector> {
        let ay = self.problem.a().apply(&state.y_curr)?;
        phi.combine(self.cfg.tau, &ay, -self.cfg.tau)
    }

    fn advance(&self, state: &SchemeState, increment: &BlockVector, keep_prev: bool) -> Result<SchemeState> {
        let n = state.n + 1;
        Ok(SchemeState {
            n,
            t: self.cfg.time(n),
            y_curr: state.y_curr.add(increment)?,
            y_prev: keep_prev.then(|| state.y_curr.clone()),
        })
    }

    /// One transition `y^n → y^{n+1}`.
    pub fn step(&self, state: &SchemeState) -> Result<SchemeState> {
        self.step_detailed(state).map(|(s, _)| s)
    }

    /// One transition, also returning the `φ^n` that drove it.
    pub fn step_detailed(&self, state: &SchemeState) -> Result<(SchemeState, BlockVector)> {
        let phi = make_phi(self.problem, &self.cfg, state.n);
        let g = self.residual(state, &phi)?;
        let next = match &self.prepared {
            Prepared::Weighted { lhs } => {
                let d = lhs.solve(&g)?;
                self.advance(state, &d, false)?
            }
            Prepared::Factorized { ops, diag } => {
                let z = solve_block_lower(&ops.lower, &g, diag)?;
                let bz = self.problem.b().apply(&z)?;
                let d = solve_block_upper(&ops.upper, &bz, diag)?;
                self.advance(state, &d, false)?
            }
            Prepared::ThreeLevel { start, ops, diag } => match &state.y_prev {
                None if state.n == 0 => {
                    let d = start.solve(&g)?;
                    self.advance(state, &d, true)?
                }
                None => return Err(Error::MissingPreviousLevel),
                Some(prev) => {
                    let e = self.cfg.epsilon;
                    let dy = state.y_curr.sub(prev)?;
                    let mut rhs = ops.minus_lower.apply(&ops.minus_upper.apply(&dy)?)?;
                    rhs.axpy(2.0 * e, &g)?;
                    let half = solve_block_lower(&ops.plus_lower, &rhs, diag)?;
                    let d = solve_block_upper(&ops.plus_upper, &half, diag)?;
                    self.advance(state, &d, true)?
                }
            },
        };
        Ok((next, phi))
    }
}

fn expect_kind(cfg: &SchemeConfig, kind: SchemeKind) -> Result<()> {
    if cfg.kind == kind {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "expected a {kind} configuration, got {}",
            cfg.kind
        )))
    }
}

pub fn weighted_step(problem: &EvolutionProblem, cfg: &SchemeConfig, state: &SchemeState) -> Result<SchemeState> {
    expect_kind(cfg, SchemeKind::Weighted)?;
    Stepper::new(problem, cfg)?.step(state)
}

pub fn factorized_step(problem: &EvolutionProblem, cfg: &SchemeConfig, state: &SchemeState) -> Result<SchemeState> {
    expect_kind(cfg, SchemeKind::FactorizedAtm)?;
    Stepper::new(problem, cfg)?.step(state)
}

/// `y^0 = v0` and `y^1` from one weighted step with the same σ.
pub fn three_level_init(problem: &EvolutionProblem, cfg: &SchemeConfig) -> Result<SchemeState> {
    expect_kind(cfg, SchemeKind::ThreeLevelFactorized)?;
    let stepper = Stepper::new(problem, cfg)?;
    stepper.step(&stepper.initial_state())
}

pub fn three_level_step(problem: &EvolutionProblem, cfg: &SchemeConfig, state: &SchemeState) -> Result<SchemeState> {
    expect_kind(cfg, SchemeKind::ThreeLevelFactorized)?;
    if state.y_prev.is_none() {
        return Err(Error::MissingPreviousLevel);
    }
    Stepper::new(problem, cfg)?.step(state)
}

/// Per-level values attached to a run by observers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Annotation {
    pub energy: Option<f64>,
    pub bound_rhs: Option<f64>,
    pub slack: Option<f64>,
}

impl Annotation {
    fn merge(&mut self, other: Annotation) {
        self.energy = other.energy.or(self.energy);
        self.bound_rhs = other.bound_rhs.or(self.bound_rhs);
        self.slack = other.slack.or(self.slack);
    }
}

/// One transition `before → after` driven by `phi`.
#[derive(Debug)]
pub struct Transition<'a> {
    pub before: &'a SchemeState,
    pub after: &'a SchemeState,
    pub phi: &'a BlockVector,
}

pub trait Observer {
    fn on_start(&mut self, _state: &SchemeState) -> Result<Annotation> {
        Ok(Annotation::default())
    }

    fn on_step(&mut self, transition: &Transition<'_>) -> Result<Annotation>;
}

/// Keeps every level `y^n` and every `φ^n`.
#[derive(Debug, Default, Clone)]
pub struct TrajectoryRecorder {
    pub levels: Vec<BlockVector>,
    pub phis: Vec<BlockVector>,
}

impl Observer for TrajectoryRecorder {
    fn on_start(&mut self, state: &SchemeState) -> Result<Annotation> {
        self.levels.clear();
        self.phis.clear();
        self.levels.push(state.y_curr.clone());
        Ok(Annotation::default())
    }

    fn on_step(&mut self, tr: &Transition<'_>) -> Result<Annotation> {
        self.levels.push(tr.after.y_curr.clone());
        self.phis.push(tr.phi.clone());
        Ok(Annotation::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub n: usize,
    pub t: f64,
    pub norm_a: f64,
    pub energy: Option<f64>,
    pub bound_rhs: Option<f64>,
    pub slack: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunLog {
    pub config: SchemeConfig,
    pub records: Vec<LevelRecord>,
    pub final_state: SchemeState,
}

impl RunLog {
    pub fn min_slack(&self) -> Option<f64> {
        self.records.iter().filter_map(|r| r.slack).reduce(f64::min)
    }

    pub fn final_norm_a(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.norm_a)
    }
}

/// Advances `cfg.n_steps` times from `v0`, notifying observers at every level.
pub fn run(problem: &EvolutionProblem, cfg: &SchemeConfig, observers: &mut [&mut dyn Observer]) -> Result<RunLog> {
    let stepper = Stepper::new(problem, cfg)?;
    run_with(&stepper, observers)
}

pub fn run_with(stepper: &Stepper<'_>, observers: &mut [&mut dyn Observer]) -> Result<RunLog> {
    let problem = stepper.problem();
    let cfg = *stepper.config();
    let mut state = stepper.initial_state();
    let mut records = Vec::with_capacity(cfg.n_steps + 1);
    let mut ann = Annotation::default();
    for obs in observers.iter_mut() {
        ann.merge(obs.on_start(&state).map_err(|e| e.at_step(0))?);
    }
    records.push(record(problem, &state, ann).map_err(|e| e.at_step(0))?);
    for step in 1..=cfg.n_steps {
        let (next, phi) = stepper.step_detailed(&state).map_err(|e| e.at_step(step))?;
        let tr = Transition {
            before: &state,
            after: &next,
            phi: &phi,
        };
        let mut ann = Annotation::default();
        for obs in observers.iter_mut() {
            ann.merge(obs.on_step(&tr).map_err(|e| e.at_step(step))?);
        }
        records.push(record(problem, &next, ann).map_err(|e| e.at_step(step))?);
        state = next;
    }
    Ok(RunLog {
        config: cfg,
        records,
        final_state: state,
    })
}

fn record(problem: &EvolutionProblem, state: &SchemeState, ann: Annotation) -> Result<LevelRecord> {
    Ok(LevelRecord {
        n: state.n,
        t: state.t,
        norm_a: problem.norm_a(&state.y_curr)?,
        energy: ann.energy,
        bound_rhs: ann.bound_rhs,
        slack: ann.slack,
    })
}
