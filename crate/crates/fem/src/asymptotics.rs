//! Explicit correction terms and the two-sided bound checks.

use crate::assembly::OperatorSet;
use crate::eigen::Spectrum;
use crate::mesh::Mesh;
use crate::trace::{boundary_trace_integral, normal_derivative_integral};
use freqbc_core::geometry::{ArcQuantities, ThetaMap};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticError {
    #[error("profile f is not positive at s = {s} (value {value:e}); arc lengths violate the admissibility bounds")]
    NonPositiveProfile { s: f64, value: f64 },
    #[error("eta must lie in (0, pi/2], got {0}")]
    EtaRange(f64),
    #[error("mode {0} is not in the spectrum")]
    BadMode(usize),
    #[error("records disagree on {0}")]
    Mixed(&'static str),
    #[error("no records")]
    Empty,
    #[error("{0}")]
    Trace(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    RobinTwoTerm,
    RobinFirstOrder,
    DirichletCorrection,
    AppendixSlope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub regime: Regime,
    pub base: f64,
    pub correction: f64,
    pub predicted: f64,
    pub epsilon: f64,
    pub ln_eta: f64,
    pub mu: f64,
    pub robin_a: f64,
}

fn trace_err(e: impl std::fmt::Display) -> AsymptoticError {
    AsymptoticError::Trace(e.to_string())
}

/// `Λ₁ = (A+μ)² ∮ Ψ² ln f(θ_ε(s)) θ'_ε(s) ds` (order-8 Gauss per edge).
pub fn lambda1_two_term(
    spec: &Spectrum,
    mesh: &Mesh,
    map: &ThetaMap<f64>,
    q: &ArcQuantities<f64>,
    mode: usize,
    robin_a: f64,
    mu: f64,
) -> Result<f64, AsymptoticError> {
    let u = spec.vectors.get(mode).ok_or(AsymptoticError::BadMode(mode))?;
    let nodes = mesh.boundary_quadrature(8).map_err(trace_err)?;
    let mut total = 0.0;
    for n in &nodes {
        let f = q.profile(map.theta(n.s));
        if !(f > 0.0) {
            return Err(AsymptoticError::NonPositiveProfile { s: n.s, value: f });
        }
        let e = &mesh.boundary_edges[n.edge];
        let v = n.shape[0] * u[e.v[0]] + n.shape[1] * u[e.v[1]];
        total += n.weight * v * v * f.ln() * map.theta_prime(n.s);
    }
    Ok((robin_a + mu).powi(2) * total)
}

/// `Λ₀ + ε Λ₁` for mode `mode` of the Robin problem with coefficient `(A+μ)θ'_ε`.
#[allow(clippy::too_many_arguments)]
pub fn two_term_prediction(
    spec: &Spectrum,
    mesh: &Mesh,
    map: &ThetaMap<f64>,
    q: &ArcQuantities<f64>,
    epsilon: f64,
    mode: usize,
    robin_a: f64,
    mu: f64,
) -> Result<Prediction, AsymptoticError> {
    let l1 = lambda1_two_term(spec, mesh, map, q, mode, robin_a, mu)?;
    let base = spec.eigenvalues[mode];
    Ok(Prediction {
        regime: Regime::RobinTwoTerm,
        base,
        correction: epsilon * l1,
        predicted: base + epsilon * l1,
        epsilon,
        ln_eta: -1.0 / (epsilon * (robin_a + mu)),
        mu,
        robin_a,
    })
}

/// Slope `∮ ψ² θ'_0 ds` of the first-order Robin expansion.
pub fn robin_first_order(spec0: &Spectrum, mesh: &Mesh, map: &ThetaMap<f64>, mode: usize) -> Result<f64, AsymptoticError> {
    boundary_trace_integral(spec0, mesh, &|s| map.limit_theta_prime(s), mode).map_err(trace_err)
}

pub fn robin_prediction(
    spec0: &Spectrum,
    mesh: &Mesh,
    map: &ThetaMap<f64>,
    mode: usize,
    epsilon: f64,
    robin_a: f64,
    mu: f64,
) -> Result<Prediction, AsymptoticError> {
    let slope = robin_first_order(spec0, mesh, map, mode)?;
    let base = spec0.eigenvalues[mode];
    Ok(Prediction {
        regime: Regime::RobinFirstOrder,
        base,
        correction: mu * slope,
        predicted: base + mu * slope,
        epsilon,
        ln_eta: -1.0 / (epsilon * (robin_a + mu)),
        mu,
        robin_a,
    })
}

/// `∮ (∂ψ/∂ν)² / θ'_ε ds` for a mode of the Dirichlet problem.
pub fn dirichlet_slope(
    ops: &OperatorSet,
    spec: &Spectrum,
    mesh: &Mesh,
    map: &ThetaMap<f64>,
    mode: usize,
) -> Result<f64, AsymptoticError> {
    normal_derivative_integral(ops, spec, mesh, &|s| 1.0 / map.theta_prime(s), mode).map_err(trace_err)
}

/// `λ₀ + ε ln sin η · ∮ (∂ψ/∂ν)²/θ'_ε ds`.
#[allow(clippy::too_many_arguments)]
pub fn dirichlet_correction(
    ops: &OperatorSet,
    spec: &Spectrum,
    mesh: &Mesh,
    map: &ThetaMap<f64>,
    epsilon: f64,
    eta: f64,
    mode: usize,
) -> Result<Prediction, AsymptoticError> {
    if !(eta > 0.0 && eta <= std::f64::consts::FRAC_PI_2) {
        return Err(AsymptoticError::EtaRange(eta));
    }
    let base = *spec.eigenvalues.get(mode).ok_or(AsymptoticError::BadMode(mode))?;
    let log_sin = if eta == std::f64::consts::FRAC_PI_2 { 0.0 } else { eta.sin().ln() };
    let correction = if log_sin == 0.0 {
        0.0
    } else {
        epsilon * log_sin * dirichlet_slope(ops, spec, mesh, map, mode)?
    };
    Ok(Prediction {
        regime: Regime::DirichletCorrection,
        base,
        correction,
        predicted: base + correction,
        epsilon,
        ln_eta: eta.ln(),
        mu: 0.0,
        robin_a: 0.0,
    })
}

/// Which bound a batch of records is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    /// `λ_ε − λ₀ ≤ 0` (Dirichlet limit).
    UpperDirichlet,
    /// `0 ≤ λ_ε − λ₀ ≤ C μ` (Neumann limit).
    NeumannEnvelope,
    /// `|λ_ε − λ₀| ≤ C (μ + σ)` (Robin limit).
    RobinEnvelope,
}

/// One computed eigenvalue against its limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub family: String,
    pub mode: usize,
    pub epsilon: f64,
    pub mu: f64,
    pub sigma: f64,
    pub lambda_eps: f64,
    pub lambda_0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: Theorem,
    /// Largest sign violation (positive means violated beyond `tol`).
    pub max_violation: f64,
    pub sign_ok: bool,
    /// Pointwise constants `(λ_ε − λ₀)/scale` where the theorem has an envelope.
    pub constants: Vec<f64>,
    /// Least-squares envelope constant.
    pub fitted: f64,
    /// `max/min` of the pointwise constants.
    pub stability: f64,
}

pub fn two_sided_check(records: &[BoundRecord], theorem: Theorem, tol: f64) -> Result<BoundReport, AsymptoticError> {
    let first = records.first().ok_or(AsymptoticError::Empty)?;
    if records.iter().any(|r| r.family != first.family) {
        return Err(AsymptoticError::Mixed("family"));
    }
    if records.iter().any(|r| r.mode != first.mode) {
        return Err(AsymptoticError::Mixed("mode"));
    }
    let diffs: Vec<f64> = records.iter().map(|r| r.lambda_eps - r.lambda_0).collect();
    let (violation, scales): (f64, Vec<f64>) = match theorem {
        Theorem::UpperDirichlet => (diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max), Vec::new()),
        Theorem::NeumannEnvelope => (
            diffs.iter().map(|d| -d).fold(f64::NEG_INFINITY, f64::max),
            records.iter().map(|r| r.mu).collect(),
        ),
        Theorem::RobinEnvelope => (f64::NEG_INFINITY, records.iter().map(|r| r.mu + r.sigma).collect()),
    };
    // A vanishing scale (μ = σ = 0) carries no information about the constant.
    let pairs: Vec<(f64, f64)> = diffs.iter().zip(&scales).map(|(d, s)| (d.abs(), *s)).filter(|p| p.1 > 0.0).collect();
    let constants: Vec<f64> = pairs.iter().map(|(d, s)| d / s).collect();
    let fitted = if pairs.is_empty() {
        0.0
    } else {
        let num: f64 = pairs.iter().map(|(d, s)| d * s).sum();
        let den: f64 = pairs.iter().map(|(_, s)| s * s).sum();
        num / den
    };
    let stability = if constants.is_empty() {
        1.0
    } else {
        let hi = constants.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = constants.iter().cloned().fold(f64::INFINITY, f64::min);
        hi / lo
    };
    Ok(BoundReport {
        theorem,
        max_violation: violation,
        sign_ok: violation <= tol,
        constants,
        fitted,
        stability,
    })
}
