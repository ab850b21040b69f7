//! Subcommand bodies. Preparation errors are configuration errors; the
//! rest are run failures.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use log::info;
use splitstep::par::Execution;
use splitstep::verify::{
    audit, compare_schemes_with, convergence_study_with, expected_order_window, slack_scale, stability_sweep,
    StabilitySweep, SLACK_TOL,
};
use splitstep::{EvolutionProblem, SchemeConfig, SchemeKind};

use crate::config::RunConfig;

/// Accepted `τ`-halving ratio of the scheme difference.
pub const RATIO_WINDOW: (f64, f64) = (3.5, 4.5);

const DEFAULT_SWEEP_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Converge,
    Stability,
    Compare,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Converge => "converge",
            Command::Stability => "stability",
            Command::Compare => "compare",
        }
    }
}

/// A validated unit of work.
pub enum Job {
    Run(EvolutionProblem, SchemeConfig),
    Converge(EvolutionProblem, SchemeConfig, Vec<f64>),
    Stability(EvolutionProblem, StabilitySweep),
    Compare(EvolutionProblem, SchemeConfig, Vec<f64>),
}

pub fn prepare(cmd: Command, cfg: &RunConfig) -> Result<Job> {
    let problem = cfg.build_problem()?;
    let check_applicable = |kind: SchemeKind| {
        if kind == SchemeKind::FactorizedAtm && !problem.b().is_block_diagonal() {
            bail!("the factorized scheme needs a block-diagonal B; use three_level for this problem");
        }
        Ok(())
    };
    let job = match cmd {
        Command::Run => {
            let sc = cfg.scheme_config()?;
            check_applicable(sc.kind)?;
            Job::Run(problem, sc)
        }
        Command::Converge => {
            let taus = cfg.taus()?;
            let sc = cfg.config_for(cfg.scheme.kind, cfg.scheme.sigma, taus[0])?;
            check_applicable(sc.kind)?;
            Job::Converge(problem, sc, taus)
        }
        Command::Compare => {
            let taus = cfg.taus()?;
            let sc = cfg.config_for(SchemeKind::Weighted, cfg.scheme.sigma, taus[0])?;
            check_applicable(SchemeKind::FactorizedAtm)?;
            Job::Compare(problem, sc, taus)
        }
        Command::Stability => {
            let raw = match (&cfg.scheme.taus, cfg.scheme.tau) {
                (Some(t), _) => t.clone(),
                (None, Some(t)) => vec![t],
                (None, None) => bail!("stability sweeps need `scheme.taus` or `scheme.tau`"),
            };
            let kinds = cfg.kinds();
            let sigmas = cfg.sigmas();
            let mut taus = Vec::with_capacity(raw.len());
            for &tau in &raw {
                taus.push(cfg.config_for(kinds[0], sigmas[0], tau)?.tau);
            }
            for &kind in &kinds {
                check_applicable(kind)?;
                for &sigma in &sigmas {
                    cfg.config_for(kind, sigma, taus[0])?;
                }
            }
            let sweep = StabilitySweep {
                kinds,
                sigmas,
                taus,
                n_steps: cfg.scheme.steps.unwrap_or(DEFAULT_SWEEP_STEPS),
                epsilon: cfg.scheme.epsilon,
            };
            Job::Stability(problem, sweep)
        }
    };
    Ok(job)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    info!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Executes a job, writes its CSV into `out_dir` and returns whether every
/// assertion passed.
pub fn execute(cmd: Command, job: Job, cfg: &RunConfig, out_dir: &Path, quiet: bool) -> Result<bool> {
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let csv = out_dir.join(cfg.csv_name(&format!("{}.csv", cmd.name())));
    let exec = Execution::default();
    let say = |line: String| {
        if !quiet {
            println!("{line}");
        }
    };
    match job {
        Job::Run(problem, sc) => {
            let log = audit(&problem, &sc)?;
            let rows: Vec<_> = log
                .records
                .iter()
                .map(|r| vec![r.n.to_string(), num(r.t), num(r.norm_a), opt(r.energy), opt(r.slack)])
                .collect();
            write_csv(&csv, &["step", "t", "norm_A", "energy_E", "thm_slack"], &rows)?;
            let min_slack = log.min_slack();
            let pass = !sc.within_hypothesis() || min_slack.is_none_or(|s| s >= -SLACK_TOL * slack_scale(&log));
            say(format!(
                "{} sigma={} tau={} steps={}: final ||y||_A = {}, min slack = {} [{}]",
                sc.kind,
                sc.sigma,
                sc.tau,
                sc.n_steps,
                num(log.final_norm_a()),
                min_slack.map_or("n/a".into(), num),
                if sc.within_hypothesis() {
                    verdict(pass)
                } else {
                    "n/a(hypothesis)"
                }
            ));
            Ok(pass)
        }
        Job::Converge(problem, sc, taus) => {
            let report = convergence_study_with(&problem, &sc, &taus, exec)?;
            let rows: Vec<_> = report
                .rows
                .iter()
                .map(|r| vec![num(r.tau), num(r.error_a), opt(r.order)])
                .collect();
            write_csv(&csv, &["tau", "error_A", "observed_order"], &rows)?;
            let order = report.finest_order();
            let window = expected_order_window(&sc);
            let pass = match (order, window) {
                (Some(o), Some((lo, hi))) => (lo..=hi).contains(&o),
                _ => true,
            };
            say(format!(
                "{} sigma={}: observed order {} (expected {}) [{}]",
                sc.kind,
                sc.sigma,
                opt(order),
                window.map_or("none".into(), |(lo, hi)| format!("[{lo}, {hi}]")),
                verdict(pass)
            ));
            Ok(pass)
        }
        Job::Compare(problem, sc, taus) => {
            let report = compare_schemes_with(&problem, &sc, &taus, exec)?;
            let rows: Vec<_> = report
                .rows
                .iter()
                .map(|r| vec![num(r.tau), num(r.max_step_diff), num(r.final_diff), opt(r.ratio)])
                .collect();
            write_csv(&csv, &["tau", "max_step_diff", "final_diff", "ratio"], &rows)?;
            let ratio = report.finest_ratio();
            let pass = sc.sigma == 0.0 || ratio.is_some_and(|r| (RATIO_WINDOW.0..=RATIO_WINDOW.1).contains(&r));
            say(format!(
                "weighted vs factorized sigma={}: finest halving ratio {} (expected [{}, {}]) [{}]",
                sc.sigma,
                opt(ratio),
                RATIO_WINDOW.0,
                RATIO_WINDOW.1,
                verdict(pass)
            ));
            Ok(pass)
        }
        Job::Stability(problem, sweep) => {
            let cells = stability_sweep(&problem, &sweep, exec)?;
            let rows: Vec<_> = cells
                .iter()
                .map(|c| {
                    let status = if !c.in_hypothesis {
                        "n/a(hypothesis)"
                    } else if c.passed() {
                        "pass"
                    } else {
                        "fail"
                    };
                    vec![
                        num(c.sigma),
                        num(c.tau),
                        c.kind.to_string(),
                        opt(c.min_slack),
                        opt(c.r_min_eig),
                        status.into(),
                    ]
                })
                .collect();
            write_csv(
                &csv,
                &["sigma", "tau", "scheme", "min_slack", "r_min_eig", "status"],
                &rows,
            )?;
            let failed = cells.iter().filter(|c| !c.passed()).count();
            let skipped = cells.iter().filter(|c| !c.in_hypothesis).count();
            say(format!(
                "stability sweep: {} cells, {failed} failed, {skipped} outside hypotheses [{}]",
                cells.len(),
                verdict(failed == 0)
            ));
            Ok(failed == 0)
        }
    }
}
