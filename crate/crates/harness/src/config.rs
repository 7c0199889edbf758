//! The JSON study document.

use freqbc_core::geometry::{
    AlternationConfig, AlternationError, BoundaryCurve, Circle, Ellipse, LengthRule, ThetaError, ThetaKind, ThetaMap,
};
use freqbc_fem::LimitKind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("sweep list is empty")]
    EmptySweep,
    #[error("sweep values must be even, at least 4 and strictly increasing: {0:?}")]
    BadSweep(Vec<usize>),
    #[error("{0}")]
    Incompatible(String),
    #[error("invalid value for {field}: {value}")]
    BadValue { field: &'static str, value: f64 },
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveSpec {
    Circle {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Ellipse {
        semi_x: f64,
        semi_y: f64,
        #[serde(default)]
        center: [f64; 2],
    },
}

fn one() -> f64 {
    1.0
}

impl CurveSpec {
    pub fn build(&self) -> Box<dyn BoundaryCurve<f64>> {
        match *self {
            CurveSpec::Circle { radius, center } => Box::new(Circle { center, radius }),
            CurveSpec::Ellipse { semi_x, semi_y, center } => Box::new(Ellipse::new(center, semi_x, semi_y)),
        }
    }

    pub fn is_unit_circle(&self) -> bool {
        matches!(*self, CurveSpec::Circle { radius, .. } if radius == 1.0)
    }
}

/// Which limiting problem the sweep approaches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    DirichletLimit,
    NeumannLimit,
    RobinLimit { a: f64 },
}

impl Regime {
    pub fn robin_a(&self) -> f64 {
        match *self {
            Regime::RobinLimit { a } => a,
            _ => 0.0,
        }
    }

    /// The limit problem solved as the base of the comparison.
    pub fn limit_kind(&self, mu: f64) -> LimitKind {
        match *self {
            Regime::DirichletLimit => LimitKind::Dirichlet,
            Regime::NeumannLimit => LimitKind::Neumann,
            Regime::RobinLimit { a } => LimitKind::Corrected { a, mu },
        }
    }
}

/// How `η` (equivalently `μ`) depends on `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EtaRule {
    Fixed { eta: f64 },
    /// `η = exp(-1/(ε(A+μ)))` with a constant `μ`.
    FromMu { mu: f64 },
    /// `μ_N = mu0 (n0/N)^power`, `η` as in `FromMu`.
    MuSchedule { mu0: f64, n0: usize, power: f64 },
}

impl EtaRule {
    pub fn mu_at(&self, n: usize) -> Option<f64> {
        match *self {
            EtaRule::Fixed { .. } => None,
            EtaRule::FromMu { mu } => Some(mu),
            EtaRule::MuSchedule { mu0, n0, power } => Some(mu0 * (n0 as f64 / n as f64).powf(power)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    /// Interior edge length.
    pub h: f64,
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    /// Boundary edges per arc period; `None` keeps the boundary at `h`.
    #[serde(default)]
    pub per_period: Option<f64>,
    /// Conformal patches around the short features.
    #[serde(default)]
    pub patched: bool,
    /// Uniform refinements; with at least one, eigenvalues are Richardson-extrapolated.
    #[serde(default)]
    pub levels: usize,
    #[serde(default = "default_max_vertices")]
    pub max_vertices: usize,
}

fn default_n_min() -> usize {
    4
}

fn default_max_vertices() -> usize {
    3_000_000
}

/// Where the limit eigenvalues come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseSpec {
    /// The same triangulation, retagged.
    #[default]
    SameMesh,
    /// A plain mesh of size `h`, refined `levels` times.
    Reference { h: f64, levels: usize },
    /// Bessel roots (unit disk); eigenfunctions for the corrections from a plain mesh of size `h`.
    Oracle { h: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative eigen-residual.
    #[serde(default = "default_eig")]
    pub eig: f64,
    /// Slack on the sign constraints.
    #[serde(default = "default_sign")]
    pub sign: f64,
    #[serde(default = "default_cluster")]
    pub cluster: f64,
}

fn default_eig() -> f64 {
    1e-8
}
fn default_sign() -> f64 {
    1e-8
}
fn default_cluster() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eig: default_eig(),
            sign: default_sign(),
            cluster: default_cluster(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub name: String,
    pub curve: CurveSpec,
    #[serde(default = "identity_kind")]
    pub theta: ThetaKind<f64>,
    pub rule: LengthRule<f64>,
    #[serde(default)]
    pub anchor0: f64,
    pub regime: Regime,
    pub eta: EtaRule,
    pub sweep: Vec<usize>,
    pub mesh: MeshSpec,
    #[serde(default)]
    pub base: BaseSpec,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default)]
    pub tol: Tolerances,
}

fn identity_kind() -> ThetaKind<f64> {
    ThetaKind::Identity
}

fn default_modes() -> usize {
    1
}

fn positive(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::BadValue { field, value })
    }
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: StudyConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sweep.is_empty() {
            return Err(ConfigError::EmptySweep);
        }
        let increasing = self.sweep.windows(2).all(|w| w[0] < w[1]);
        if !increasing || self.sweep.iter().any(|&n| n < 4 || n % 2 != 0) {
            return Err(ConfigError::BadSweep(self.sweep.clone()));
        }
        if self.modes == 0 {
            return Err(ConfigError::BadValue { field: "modes", value: 0.0 });
        }
        match self.curve {
            CurveSpec::Circle { radius, .. } => positive("curve.radius", radius)?,
            CurveSpec::Ellipse { semi_x, semi_y, .. } => {
                positive("curve.semi_x", semi_x)?;
                positive("curve.semi_y", semi_y)?;
            }
        }
        positive("mesh.h", self.mesh.h)?;
        if let Some(k) = self.mesh.per_period {
            positive("mesh.per_period", k)?;
        }
        if self.mesh.levels > 4 {
            return Err(ConfigError::BadValue { field: "mesh.levels", value: self.mesh.levels as f64 });
        }
        positive("tol.eig", self.tol.eig)?;
        positive("tol.cluster", self.tol.cluster)?;
        if !(self.tol.sign >= 0.0) {
            return Err(ConfigError::BadValue { field: "tol.sign", value: self.tol.sign });
        }
        match self.base {
            BaseSpec::SameMesh => {}
            BaseSpec::Reference { h, levels } => {
                positive("base.h", h)?;
                if levels > 4 {
                    return Err(ConfigError::BadValue { field: "base.levels", value: levels as f64 });
                }
            }
            BaseSpec::Oracle { h } => {
                positive("base.h", h)?;
                if !self.curve.is_unit_circle() || self.theta != ThetaKind::Identity {
                    return Err(ConfigError::Incompatible(
                        "the disk oracle needs the unit circle with the identity theta map".into(),
                    ));
                }
            }
        }
        match (self.regime, self.eta) {
            (Regime::DirichletLimit, EtaRule::Fixed { eta }) => {
                if !(0.05..=1.4).contains(&eta) {
                    return Err(ConfigError::Incompatible(format!(
                        "dirichlet_limit sweeps fix eta in [0.05, 1.4], got {eta}"
                    )));
                }
            }
            (Regime::DirichletLimit, _) => {
                return Err(ConfigError::Incompatible(
                    "dirichlet_limit needs a fixed eta so that eps ln eta -> 0".into(),
                ))
            }
            (_, EtaRule::Fixed { .. }) => {
                return Err(ConfigError::Incompatible(
                    "neumann_limit and robin_limit derive eta from mu; use from_mu or mu_schedule".into(),
                ))
            }
            (Regime::NeumannLimit, rule) => {
                for &n in &self.sweep {
                    positive("eta.mu", rule.mu_at(n).unwrap_or(0.0))?;
                }
            }
            (Regime::RobinLimit { a }, rule) => {
                positive("regime.a", a)?;
                for &n in &self.sweep {
                    let mu = rule.mu_at(n).unwrap_or(f64::NAN);
                    if !(mu >= 0.0 && mu.is_finite()) {
                        return Err(ConfigError::BadValue { field: "eta.mu", value: mu });
                    }
                }
            }
        }
        if let EtaRule::MuSchedule { n0, .. } = self.eta {
            if n0 == 0 {
                return Err(ConfigError::BadValue { field: "eta.n0", value: 0.0 });
            }
        }
        // Fails early on an inadmissible map.
        self.theta_map()?;
        Ok(())
    }

    pub fn theta_map(&self) -> Result<ThetaMap<f64>, ThetaError> {
        ThetaMap::new(self.theta.clone(), self.curve.build().length())
    }

    /// `(μ, ln η)` at `N`; `μ = -(ε ln η)⁻¹ - A` for a fixed `η`.
    pub fn small_params(&self, n: usize) -> (f64, f64) {
        let eps = 2.0 / n as f64;
        let a = self.regime.robin_a();
        match self.eta {
            EtaRule::Fixed { eta } => {
                let ln = eta.ln();
                (-1.0 / (eps * ln) - a, ln)
            }
            rule => {
                let mu = rule.mu_at(n).expect("mu rule");
                (mu, -1.0 / (eps * (a + mu)))
            }
        }
    }

    pub fn alternation(&self, map: &ThetaMap<f64>, n: usize) -> Result<AlternationConfig<f64>, AlternationError> {
        let (_, ln_eta) = self.small_params(n);
        AlternationConfig::generate(map, n, &self.rule, ln_eta.exp(), self.regime.robin_a(), self.anchor0)
    }
}
