//! TOML run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use log::info;
use nalgebra::DMatrix;
use serde::Deserialize;
use splitstep::blockops::io::read_manifest;
use splitstep::blockops::BlockVector;
use splitstep::problems::{
    build_coupled_diffusion, build_double_porosity, default_profile, manufactured_problem, profile_vector,
    DiffusionSpec,
};
use splitstep::{EvolutionProblem, Forcing, SchemeConfig, SchemeKind};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(skip)]
    base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    CoupledDiffusion,
    DoublePorosity,
    Manufactured,
    MatrixFiles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficients {
    Multicomponent,
    DoublePorosity,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: ProblemKind,
    /// Interior grid nodes per component.
    #[serde(default = "default_m")]
    pub m: usize,
    /// Preset the coefficient matrices default to.
    pub coefficients: Option<Coefficients>,
    pub k: Option<Vec<Vec<f64>>>,
    pub r: Option<Vec<Vec<f64>>>,
    pub b: Option<Vec<Vec<f64>>>,
    /// Amplitudes `c_α` of the sine initial profile.
    pub profile: Option<Vec<f64>>,
    /// Per-component constant source; zero when absent.
    pub forcing: Option<Vec<f64>>,
    pub a_manifest: Option<PathBuf>,
    pub b_manifest: Option<PathBuf>,
    /// Per-component constant initial value for `matrix_files`.
    pub initial: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(default = "default_kind", deserialize_with = "scheme_kind")]
    pub kind: SchemeKind,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    pub tau: Option<f64>,
    pub taus: Option<Vec<f64>>,
    pub sigmas: Option<Vec<f64>>,
    #[serde(default, deserialize_with = "scheme_kinds")]
    pub kinds: Option<Vec<SchemeKind>>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    /// Steps per stability cell; `T/τ` when absent.
    pub steps: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    pub verbosity: Option<String>,
}

fn default_m() -> usize {
    31
}

fn default_kind() -> SchemeKind {
    SchemeKind::Weighted
}

fn default_sigma() -> f64 {
    0.5
}

fn default_epsilon() -> f64 {
    1.0
}

fn default_t_final() -> f64 {
    1.0
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            sigma: default_sigma(),
            tau: None,
            taus: None,
            sigmas: None,
            kinds: None,
            epsilon: default_epsilon(),
            t_final: default_t_final(),
            steps: None,
        }
    }
}

fn scheme_kind<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<SchemeKind, D::Error> {
    String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
}

fn scheme_kinds<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<SchemeKind>>, D::Error> {
    Vec::<String>::deserialize(d)?
        .iter()
        .map(|s| s.parse().map_err(serde::de::Error::custom))
        .collect::<std::result::Result<_, _>>()
        .map(Some)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn verbosity(&self) -> Option<&str> {
        self.output.verbosity.as_deref()
    }

    pub fn csv_name(&self, default: &str) -> PathBuf {
        self.output.csv.clone().unwrap_or_else(|| PathBuf::from(default))
    }

    pub fn build_problem(&self) -> Result<EvolutionProblem> {
        let p = &self.problem;
        let problem = match p.kind {
            ProblemKind::CoupledDiffusion | ProblemKind::DoublePorosity | ProblemKind::Manufactured => {
                let spec = self.diffusion_spec()?;
                let profile = p.profile.clone().unwrap_or_else(|| default_profile(spec.p()));
                if p.kind == ProblemKind::Manufactured {
                    if p.forcing.is_some() {
                        bail!("manufactured problems derive their own forcing; remove `forcing`");
                    }
                    manufactured_problem(&spec, &profile)?.problem
                } else {
                    let base = if p.kind == ProblemKind::CoupledDiffusion {
                        build_coupled_diffusion(&spec)?
                    } else {
                        build_double_porosity(&spec)?
                    };
                    let base = base.with_v0(profile_vector(spec.m, &profile, 0.0)?)?;
                    let forcing = self.forcing(base.v0())?;
                    base.with_forcing(forcing)?
                }
            }
            ProblemKind::MatrixFiles => {
                let path = |f: &Option<PathBuf>, key: &str| {
                    f.as_ref()
                        .map(|f| self.base_dir.join(f))
                        .ok_or_else(|| anyhow!("matrix_files problems need `{key}`"))
                };
                let a = read_manifest(&path(&p.a_manifest, "a_manifest")?)?;
                let b = read_manifest(&path(&p.b_manifest, "b_manifest")?)?;
                let dims = a.dims().clone();
                let initial = p.initial.clone().unwrap_or_else(|| vec![1.0; dims.p()]);
                if initial.len() != dims.p() {
                    bail!(
                        "`initial` has {} values but the operators have {} components",
                        initial.len(),
                        dims.p()
                    );
                }
                let v0 = BlockVector::from_fn(&dims, |alpha, _| initial[alpha]);
                let forcing = self.forcing(&v0)?;
                EvolutionProblem::new(a, b, forcing, v0, 1.0)?
            }
        };
        Ok(problem.with_t_final(self.scheme.t_final)?)
    }

    fn diffusion_spec(&self) -> Result<DiffusionSpec> {
        let p = &self.problem;
        let preset = p.coefficients.unwrap_or(match p.kind {
            ProblemKind::DoublePorosity => Coefficients::DoublePorosity,
            _ => Coefficients::Multicomponent,
        });
        let mut spec = match preset {
            Coefficients::Multicomponent => DiffusionSpec::multicomponent_default(p.m),
            Coefficients::DoublePorosity => DiffusionSpec::double_porosity_default(p.m),
        };
        let components = [p.k.as_ref(), p.r.as_ref(), p.b.as_ref()]
            .into_iter()
            .flatten()
            .next()
            .map(Vec::len);
        let q = components.unwrap_or(spec.p());
        for (name, rows, target) in [
            ("k", &p.k, &mut spec.k),
            ("r", &p.r, &mut spec.r),
            ("b", &p.b, &mut spec.b),
        ] {
            match rows {
                Some(rows) => *target = square(name, rows, q)?,
                None if q != target.nrows() => {
                    bail!("`{name}` must be given when the component count differs from the preset")
                }
                None => {}
            }
        }
        Ok(spec)
    }

    fn forcing(&self, v0: &BlockVector) -> Result<Forcing> {
        match &self.problem.forcing {
            None => Ok(Forcing::Zero),
            Some(c) if c.len() == v0.dims().p() => Ok(Forcing::Constant(BlockVector::from_fn(v0.dims(), |a, _| c[a]))),
            Some(c) => bail!(
                "`forcing` has {} values but the problem has {} components",
                c.len(),
                v0.dims().p()
            ),
        }
    }

    /// Single-run scheme configuration with `τ` adjusted so that `τN = T`.
    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        let s = &self.scheme;
        let tau = s.tau.ok_or_else(|| anyhow!("`scheme.tau` is required"))?;
        self.config_for(s.kind, s.sigma, tau)
    }

    pub fn config_for(&self, kind: SchemeKind, sigma: f64, tau: f64) -> Result<SchemeConfig> {
        let t_final = self.scheme.t_final;
        if !(tau > 0.0 && tau.is_finite()) {
            bail!("time step {tau} must be positive");
        }
        let n = (t_final / tau - 1e-9).ceil().max(1.0) as usize;
        let cfg = SchemeConfig::new(kind, sigma, t_final, n).with_epsilon(self.scheme.epsilon);
        if cfg.tau != tau {
            info!(
                "tau {tau} adjusted to {} so that {n} steps reach T = {t_final}",
                cfg.tau
            );
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Time steps for studies, each adjusted to divide `T`.
    pub fn taus(&self) -> Result<Vec<f64>> {
        let taus = self
            .scheme
            .taus
            .clone()
            .ok_or_else(|| anyhow!("`scheme.taus` is required"))?;
        if taus.len() < 2 {
            bail!("`scheme.taus` needs at least 2 values, got {}", taus.len());
        }
        taus.iter()
            .map(|&tau| self.config_for(self.scheme.kind, self.scheme.sigma, tau).map(|c| c.tau))
            .collect()
    }

    pub fn kinds(&self) -> Vec<SchemeKind> {
        self.scheme.kinds.clone().unwrap_or_else(|| vec![self.scheme.kind])
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.scheme.sigmas.clone().unwrap_or_else(|| vec![self.scheme.sigma])
    }
}

fn square(name: &str, rows: &[Vec<f64>], q: usize) -> Result<DMatrix<f64>> {
    if rows.len() != q || rows.iter().any(|r| r.len() != q) {
        bail!("`{name}` must be a {q}x{q} matrix");
    }
    Ok(DMatrix::from_fn(q, q, |i, j| rows[i][j]))
}
