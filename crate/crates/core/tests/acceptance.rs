//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line.
//!
//! Run with `cargo test -p splitstep --test acceptance -- --nocapture`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use splitstep::blockops::triangular_split;
use splitstep::problems::{
    build_coupled_diffusion, build_double_porosity, default_profile, manufactured_problem, profile_vector,
    DiffusionSpec,
};
use splitstep::random::{random_dims, random_problem, random_symmetric, rng, smooth_forcing};
use splitstep::schemes::{Stepper, ThreeLevelOperators};
use splitstep::verify::{
    audit, check_btilde_identity, check_r_positive, compare_schemes, convergence_study, reference_solution,
    tiny_step_reference, FactorizedDense, FIRST_ORDER_WINDOW, SECOND_ORDER_WINDOW, SLACK_TOL,
};
use splitstep::{BlockVector, EvolutionProblem, Forcing, SchemeConfig, SchemeKind, SchemeState};

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    println!(
        "[{}] criterion {id}: {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn rel_entrywise(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let scale = y.amax().max(x.amax());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).amax() / scale
    }
}

const TAUS: [f64; 5] = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];

fn cfg(kind: SchemeKind, sigma: f64, tau: f64, n_steps: usize) -> SchemeConfig {
    SchemeConfig {
        kind,
        sigma,
        tau,
        epsilon: 1.0,
        n_steps,
    }
}

#[test]
fn criterion_1_split_identities() {
    let mut r = rng(101);
    let mut worst_sum = 0.0_f64;
    let mut worst_adj = 0.0_f64;
    for _ in 0..100 {
        let dims = random_dims(&mut r, (2, 4), (1, 8));
        let a = random_symmetric(&mut r, &dims, 0.7);
        let s = triangular_split(&a).unwrap();
        let dense = a.to_dense();
        worst_sum = worst_sum.max(rel_entrywise(&s.reconstruct().unwrap().to_dense(), &dense));
        worst_adj = worst_adj.max(rel_entrywise(&s.lower.transpose().to_dense(), &s.upper.to_dense()));
    }
    verdict(
        1,
        "triangular split identities",
        worst_sum <= 1e-14 && worst_adj <= 1e-14,
        format!("max rel |A1+A2-A| = {worst_sum:.3e}, max rel |A1^T-A2| = {worst_adj:.3e} (tol 1e-14)"),
    );
}

#[test]
fn criterion_2_btilde_identity() {
    let mut r = rng(202);
    let mut worst_err = 0.0_f64;
    let mut worst_eig = f64::INFINITY;
    for _ in 0..20 {
        let dims = random_dims(&mut r, (2, 4), (1, 8));
        let p = random_problem(&mut r, &dims, false, false).unwrap();
        let sigma = r.random_range(0.5..=1.0);
        let tau = [1e-2, 1e-1, 1.0][r.random_range(0..3)];
        let rep = check_btilde_identity(&p, &cfg(SchemeKind::FactorizedAtm, sigma, tau, 1)).unwrap();
        worst_err = worst_err.max(rep.max_rel_err);
        worst_eig = worst_eig.min(rep.min_eig_excess);
    }
    verdict(
        2,
        "factorized operator expansion",
        worst_err <= 1e-12 && worst_eig >= -1e-12,
        format!("max rel err = {worst_err:.3e} (tol 1e-12), min eig(B~ - (B+s*tau*A)) = {worst_eig:.3e} (>= -1e-12)"),
    );
}

fn two_level_sweep(kind: SchemeKind, forcing: bool, seed: u64) -> (f64, f64) {
    // Returns (min normalized slack, max normalized A-norm² increase).
    let mut r = rng(seed);
    let mut min_slack = f64::INFINITY;
    let mut max_increase = f64::NEG_INFINITY;
    for instance in 0..3 {
        let dims = random_dims(&mut r, (2, 4), (2, 8));
        let coupled_b = kind == SchemeKind::Weighted && instance == 2;
        let p = random_problem(&mut r, &dims, coupled_b, forcing).unwrap();
        for sigma in [0.5, 0.75, 1.0] {
            for tau in [1e-3, 1e-2, 1e-1, 1.0] {
                let log = audit(&p, &cfg(kind, sigma, tau, 100)).unwrap();
                let scale = log.records[0].norm_a.powi(2);
                min_slack = min_slack.min(log.min_slack().unwrap() / scale);
                for w in log.records.windows(2) {
                    max_increase = max_increase.max((w[1].norm_a.powi(2) - w[0].norm_a.powi(2)) / scale);
                }
            }
        }
    }
    (min_slack, max_increase)
}

#[test]
fn criterion_3_weighted_estimate() {
    let (min_slack, _) = two_level_sweep(SchemeKind::Weighted, true, 303);
    verdict(
        3,
        "weighted scheme level-wise estimate",
        min_slack >= -SLACK_TOL,
        format!("min slack / ||y0||_A^2 = {min_slack:.3e} over sigma x tau x 100 steps (>= -1e-10)"),
    );
}

#[test]
fn criterion_4_factorized_stability() {
    let (_, max_increase) = two_level_sweep(SchemeKind::FactorizedAtm, false, 404);
    let (min_slack, _) = two_level_sweep(SchemeKind::FactorizedAtm, true, 405);
    verdict(
        4,
        "factorized scheme stability",
        max_increase <= SLACK_TOL && min_slack >= -SLACK_TOL,
        format!(
            "homogeneous max increase of ||y||_A^2 / ||y0||_A^2 = {max_increase:.3e} (<= 1e-10); \
             forced min slack = {min_slack:.3e} (>= -1e-10)"
        ),
    );
}

#[test]
fn criterion_5_three_level_estimate() {
    let spec = DiffusionSpec::double_porosity_default(31);
    let dims = spec.dims().unwrap();
    let mut r = rng(505);
    let p = build_double_porosity(&spec)
        .unwrap()
        .with_v0(profile_vector(31, &default_profile(2), 0.0).unwrap())
        .unwrap()
        .with_forcing(smooth_forcing(&mut r, &dims))
        .unwrap();
    let mut min_slack = f64::INFINITY;
    let mut min_r = f64::INFINITY;
    for eps in [0.5, 1.0, 2.0] {
        for tau in [1e-2, 1e-1] {
            let c = cfg(SchemeKind::ThreeLevelFactorized, 1.0, tau, 100).with_epsilon(eps);
            let log = audit(&p, &c).unwrap();
            let e1 = log.records[1].energy.unwrap();
            min_slack = min_slack.min(log.min_slack().unwrap() / e1);
            min_r = min_r.min(check_r_positive(&p, &c).unwrap());
        }
    }
    verdict(
        5,
        "three-level energy estimate",
        min_slack >= -SLACK_TOL && min_r > 0.0,
        format!("min slack / E1 = {min_slack:.3e} (>= -1e-10), min eig(R) = {min_r:.3e} (> 0)"),
    );
}

#[test]
fn criterion_6_convergence_orders() {
    let spec = DiffusionSpec::multicomponent_default(31);
    let mp = manufactured_problem(&spec, &default_profile(2)).unwrap();
    let cases = [
        (
            "weighted sigma=1/2",
            cfg(SchemeKind::Weighted, 0.5, 0.1, 1),
            SECOND_ORDER_WINDOW,
        ),
        (
            "weighted sigma=1",
            cfg(SchemeKind::Weighted, 1.0, 0.1, 1),
            FIRST_ORDER_WINDOW,
        ),
        (
            "factorized sigma=1/2",
            cfg(SchemeKind::FactorizedAtm, 0.5, 0.1, 1),
            SECOND_ORDER_WINDOW,
        ),
        (
            "three-level sigma=1 eps=1",
            cfg(SchemeKind::ThreeLevelFactorized, 1.0, 0.1, 1),
            FIRST_ORDER_WINDOW,
        ),
    ];
    let mut all = true;
    let mut details = Vec::new();
    for (name, c, (lo, hi)) in cases {
        let rep = convergence_study(&mp.problem, &c, &TAUS).unwrap();
        let orders: Vec<String> = rep
            .rows
            .iter()
            .filter_map(|r| r.order)
            .map(|o| format!("{o:.3}"))
            .collect();
        let fin = rep.finest_order().unwrap();
        all &= (lo..=hi).contains(&fin);
        details.push(format!("{name}: orders [{}] in [{lo}, {hi}]", orders.join(", ")));
    }
    verdict(6, "temporal convergence orders", all, details.join("; "));
}

#[test]
fn criterion_7_scheme_equivalence() {
    let spec = DiffusionSpec::multicomponent_default(31);
    let mp = manufactured_problem(&spec, &default_profile(2)).unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for sigma in [0.5, 1.0] {
        let rep = compare_schemes(&mp.problem, &cfg(SchemeKind::Weighted, sigma, 0.1, 1), &TAUS).unwrap();
        let ratios: Vec<String> = rep
            .rows
            .iter()
            .filter_map(|r| r.ratio)
            .map(|x| format!("{x:.3}"))
            .collect();
        let fin = rep.finest_ratio().unwrap();
        pass &= (3.5..=4.5).contains(&fin);
        details.push(format!("sigma={sigma}: halving ratios [{}]", ratios.join(", ")));
    }
    // σ = 0 is explicit and unstable on this stiff grid, so the two schemes are compared one step at a
    // time from shared states on the exact trajectory.
    let mut max0 = 0.0_f64;
    for tau in TAUS {
        let n_steps = (1.0 / tau).round() as usize;
        let w_cfg = cfg(SchemeKind::Weighted, 0.0, tau, n_steps);
        let f_cfg = w_cfg.with_kind(SchemeKind::FactorizedAtm);
        let w = Stepper::new(&mp.problem, &w_cfg).unwrap();
        let f = Stepper::new(&mp.problem, &f_cfg).unwrap();
        for n in 0..n_steps {
            let t = n as f64 * tau;
            let state = SchemeState {
                n,
                t,
                y_curr: mp.exact(t),
                y_prev: None,
            };
            let yw = w.step(&state).unwrap().y_curr;
            let yf = f.step(&state).unwrap().y_curr;
            let scale = mp.problem.norm_a(&state.y_curr).unwrap();
            max0 = max0.max(mp.problem.norm_a(&yw.sub(&yf).unwrap()).unwrap() / scale);
        }
    }
    pass &= max0 <= 1e-13;
    details.push(format!(
        "sigma=0 max one-step difference / ||u(t_n)||_A = {max0:.3e} (<= 1e-13)"
    ));
    verdict(7, "weighted vs factorized difference", pass, details.join("; "));
}

fn dense_solve(m: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    m.clone().lu().solve(rhs).expect("nonsingular")
}

#[test]
fn criterion_8_sweep_vs_monolithic() {
    let mut r = rng(808);
    let mut worst_atm = 0.0_f64;
    let mut worst_three = 0.0_f64;
    for _ in 0..20 {
        let dims = random_dims(&mut r, (2, 4), (1, 8));
        let sigma = r.random_range(0.5..=1.0);
        let tau = [1e-2, 1e-1, 1.0][r.random_range(0..3)];

        // Factorized: B~ d = τ(φ − A y).
        let p = random_problem(&mut r, &dims, false, true).unwrap();
        let c = cfg(SchemeKind::FactorizedAtm, sigma, tau, 10);
        let st = Stepper::new(&p, &c).unwrap();
        let s0 = st.initial_state();
        let (s1, phi) = st.step_detailed(&s0).unwrap();
        let g = phi.combine(tau, &p.a().apply(&s0.y_curr).unwrap(), -tau).unwrap();
        let d_ref = dense_solve(
            &FactorizedDense::new(&p, &c).unwrap().product,
            &DVector::from_column_slice(g.as_slice()),
        );
        let d = s1.y_curr.sub(&s0.y_curr).unwrap();
        worst_atm = worst_atm.max((DVector::from_column_slice(d.as_slice()) - &d_ref).amax() / d_ref.amax());

        // Three-level: (C1+εE)(C2+εE) d = (C1−εE)(C2−εE)(y^n − y^{n−1}) + 2ετ(φ − A y^n).
        let p = random_problem(&mut r, &dims, true, true).unwrap();
        let eps = r.random_range(0.5..2.0);
        let c = cfg(SchemeKind::ThreeLevelFactorized, sigma, tau, 10).with_epsilon(eps);
        let st = Stepper::new(&p, &c).unwrap();
        let s1 = st.step(&st.initial_state()).unwrap();
        let (s2, phi) = st.step_detailed(&s1).unwrap();
        let ops = ThreeLevelOperators::new(&p, &c).unwrap();
        let lhs = ops.plus_lower.to_dense() * ops.plus_upper.to_dense();
        let minus = ops.minus_lower.to_dense() * ops.minus_upper.to_dense();
        let dy = DVector::from_column_slice(s1.y_curr.sub(s1.y_prev.as_ref().unwrap()).unwrap().as_slice());
        let g = phi.combine(tau, &p.a().apply(&s1.y_curr).unwrap(), -tau).unwrap();
        let rhs = minus * dy + DVector::from_column_slice(g.as_slice()) * (2.0 * eps);
        let d_ref = dense_solve(&lhs, &rhs);
        let d = s2.y_curr.sub(&s1.y_curr).unwrap();
        worst_three = worst_three.max((DVector::from_column_slice(d.as_slice()) - &d_ref).amax() / d_ref.amax());
    }
    verdict(
        8,
        "block sweeps vs monolithic dense solves",
        worst_atm <= 1e-12 && worst_three <= 1e-12,
        format!("factorized max rel diff {worst_atm:.3e}, three-level max rel diff {worst_three:.3e} (tol 1e-12)"),
    );
}

#[test]
fn criterion_9_oracle_cross_check() {
    let multi = DiffusionSpec::multicomponent_default(31);
    let dp = DiffusionSpec::double_porosity_default(31);
    let profile = default_profile(2);
    let v0 = profile_vector(31, &profile, 0.0).unwrap();
    let mut r = rng(909);
    let rdims = random_dims(&mut r, (3, 3), (4, 8));
    let rand_problem = random_problem(&mut r, &rdims, true, false).unwrap();
    let const_f = Forcing::Constant(BlockVector::from_fn(v0.dims(), |a, _| 1.0 + a as f64));
    let problems: Vec<(&str, EvolutionProblem)> = vec![
        (
            "manufactured multicomponent",
            manufactured_problem(&multi, &profile).unwrap().problem,
        ),
        (
            "manufactured double-porosity",
            manufactured_problem(&dp, &profile).unwrap().problem,
        ),
        (
            "multicomponent, f = 0",
            build_coupled_diffusion(&multi).unwrap().with_v0(v0.clone()).unwrap(),
        ),
        (
            "double-porosity, constant f",
            build_double_porosity(&dp)
                .unwrap()
                .with_v0(v0.clone())
                .unwrap()
                .with_forcing(const_f)
                .unwrap(),
        ),
        ("random coupled SPD, f = 0", rand_problem),
    ];
    let mut worst = 0.0_f64;
    let mut details = Vec::new();
    for (name, p) in &problems {
        let exact = reference_solution(p, p.t_final()).unwrap();
        let tiny = tiny_step_reference(p, 1.0 / 16.0).unwrap();
        let diff = p.norm_a(&exact.sub(&tiny).unwrap()).unwrap();
        worst = worst.max(diff);
        details.push(format!("{name}: {diff:.2e}"));
    }
    verdict(
        9,
        "modal reference vs tau/1024 reference",
        worst <= 1e-8,
        format!("A-norm differences [{}] (tol 1e-8)", details.join("; ")),
    );
}
