use serde::{Deserialize, Serialize};

use nlwave::orlicz::{make_kerr_nonlinearity, make_logtype_nonlinearity, make_power_nonlinearity, Nonlinearity};
use nlwave::te_ode::{OdeForm, ShootingProblem};
use nlwave::variational::{PermittivityKind, SolverOptions};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    TeShoot,
    TmSolve,
    Verify,
    Spectrum,
    OrliczCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NlKind {
    Kerr,
    Power,
    Logtype,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlConfig {
    pub kind: NlKind,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub chi3: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub half_width: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 128, half_width: 12.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub states: usize,
    pub tol: f64,
    pub inner_tol: f64,
    pub max_iter: usize,
    pub path_points: usize,
    pub switch_tol: f64,
    pub newton_tol: f64,
    pub newton_max: usize,
    pub minres_max: usize,
    /// Kerr strengths, relative to `chi3`, at which the rescaling law is checked.
    pub rescale_lambdas: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::<f64>::default();
        Self {
            states: o.states,
            tol: o.tol,
            inner_tol: o.inner.tol,
            max_iter: o.max_iter,
            path_points: o.path_points,
            switch_tol: o.switch_tol,
            newton_tol: o.newton_tol,
            newton_max: o.newton_max,
            minres_max: o.minres_max,
            rescale_lambdas: vec![0.5, 2.0],
        }
    }
}

impl SolverConfig {
    pub fn options(&self, seed: u64) -> SolverOptions<f64> {
        let mut o = SolverOptions::<f64>::default();
        o.states = self.states;
        o.tol = self.tol;
        o.inner.tol = self.inner_tol;
        o.max_iter = self.max_iter;
        o.path_points = self.path_points;
        o.switch_tol = self.switch_tol;
        o.newton_tol = self.newton_tol;
        o.newton_max = self.newton_max;
        o.minres_max = self.minres_max;
        o.seed = seed;
        o
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TeConfig {
    pub n: Vec<usize>,
    pub form: OdeForm,
    pub r_max: f64,
    pub rtol: f64,
    /// Radial spacing of the profile CSV.
    pub csv_step: f64,
}

impl Default for TeConfig {
    fn default() -> Self {
        let p = ShootingProblem::<f64>::default();
        Self { n: vec![1, 2, 3], form: p.form, r_max: p.r_max, rtol: p.rtol, csv_step: 0.05 }
    }
}

impl TeConfig {
    pub fn problem(&self) -> ShootingProblem<f64> {
        ShootingProblem { form: self.form, r_max: self.r_max, rtol: self.rtol, ..ShootingProblem::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Frequencies per axis.
    pub points: usize,
    /// Extra wavenumbers to tabulate besides `k`.
    pub extra_k: Vec<f64>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { points: 64, extra_k: Vec::new() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    /// Left ends of the unit `x₃` windows.
    pub a: Vec<f64>,
    /// Times as fractions of the period `2π/ω`.
    pub t_fractions: Vec<f64>,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self { a: vec![0.0, 0.5], t_fractions: vec![0.0, 0.25, 0.5] }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Output directory of an earlier tm-solve run.
    pub input: Option<String>,
}

/// Contents of the `--config` file. Physical parameters have no defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub k: Option<f64>,
    pub omega: Option<f64>,
    pub permittivity: Option<PermittivityKind<f64>>,
    pub nonlinearity: Option<NlConfig>,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub te: TeConfig,
    pub spectrum: SpectrumConfig,
    pub energy: EnergyConfig,
    pub verify: VerifyConfig,
}

fn missing(what: &str) -> CliError {
    CliError::validation(format!("missing required parameter `{what}`"))
}

fn finite(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::validation(format!("`{name}` must be finite, got {x}")))
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::validation(format!("config does not parse: {e}")))
    }

    pub fn k(&self) -> Result<f64, CliError> {
        let k = finite("k", self.k.ok_or_else(|| missing("k"))?)?;
        if k == 0.0 {
            return Err(CliError::validation("k must be nonzero".into()));
        }
        Ok(k)
    }

    pub fn omega(&self) -> Result<f64, CliError> {
        let w = finite("omega", self.omega.ok_or_else(|| missing("omega"))?)?;
        if w <= 0.0 {
            return Err(CliError::validation(format!("omega must be positive, got {w}")));
        }
        Ok(w)
    }

    pub fn permittivity(&self) -> Result<PermittivityKind<f64>, CliError> {
        self.permittivity.ok_or_else(|| missing("permittivity"))
    }

    /// Builds `F`. A Kerr term without its own `omega` takes the wave's.
    pub fn nonlinearity(&self) -> Result<Nonlinearity<f64>, CliError> {
        let nl = self.nonlinearity.as_ref().ok_or_else(|| missing("nonlinearity"))?;
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| missing(&format!("nonlinearity.{name}")));
        let built = match nl.kind {
            NlKind::Kerr => {
                let omega = match (nl.omega, self.omega) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(CliError::validation(format!(
                            "nonlinearity.omega = {a} differs from omega = {b}"
                        )))
                    }
                    (Some(a), _) | (None, Some(a)) => a,
                    (None, None) => return Err(missing("nonlinearity.omega")),
                };
                make_kerr_nonlinearity(omega, need(nl.chi3, "chi3")?)
            }
            NlKind::Power => make_power_nonlinearity(need(nl.p, "p")?),
            NlKind::Logtype => make_logtype_nonlinearity(need(nl.p, "p")?, need(nl.q, "q")?),
        };
        built.map_err(CliError::from)
    }

    /// Fills in what the file left implicit so the echo is complete.
    pub fn resolve(mut self) -> Self {
        if let Some(nl) = self.nonlinearity.as_mut() {
            if nl.kind == NlKind::Kerr && nl.omega.is_none() {
                nl.omega = self.omega;
            }
        }
        self
    }
}
