//! Theorem checks: min-max monotonicity, the first-order slope, sign constraints of a sweep.

use crate::config::{BaseSpec, Regime, StudyConfig};
use crate::fit::{fit_rate, RateFit};
use crate::study::{Status, StudyRecord};
use freqbc_core::geometry::{AlternationConfig, ThetaMap};
use freqbc_fem::asymptotics::{robin_first_order, two_sided_check, BoundRecord, Theorem};
use freqbc_fem::homogenized::{limit_operators, orthogonalize_all};
use freqbc_fem::{assemble, solve_eigs_with, LimitKind, Mesh, SolveOptions, Spectrum, Tag};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("configuration {0} is not contained in configuration {1}")]
    NotNested(usize, usize),
    #[error("mu list needs a value and its negative, got {0:?}")]
    NotSymmetric(Vec<f64>),
    #[error("cluster of mode {mode} has {got} members at mu = {mu}, {want} at mu = 0")]
    ClusterMismatch { mode: usize, mu: f64, got: usize, want: usize },
    #[error("{0}")]
    Numerical(String),
}

fn num(e: impl std::fmt::Display) -> CheckError {
    CheckError::Numerical(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub labels: Vec<String>,
    /// Lowest `k` eigenvalues per chain member, anchors included.
    pub spectra: Vec<Vec<f64>>,
    /// Largest decrease between neighbours (negative when strictly increasing).
    pub max_drop: f64,
    pub ok: bool,
}

/// Spectra along `∅ ⊆ chain[0] ⊆ … ⊆ ∂Ω` on one mesh; only the tags change.
pub fn check_monotonicity(
    mesh: &Mesh,
    chain: &[AlternationConfig<f64>],
    k: usize,
    opts: &SolveOptions,
    tol: f64,
) -> Result<MonotonicityReport, CheckError> {
    for i in 1..chain.len() {
        if !chain[i - 1].is_subset_of(&chain[i]) {
            return Err(CheckError::NotNested(i - 1, i));
        }
    }
    let mut meshes = vec![("empty".to_string(), mesh.retagged(Tag::Neumann))];
    for (i, c) in chain.iter().enumerate() {
        meshes.push((format!("set {}", i + 1), mesh.retagged_by(c, Tag::Neumann)));
    }
    meshes.push(("boundary".to_string(), mesh.retagged(Tag::Dirichlet)));
    let mut o = opts.clone();
    o.k = k;
    let mut labels = Vec::new();
    let mut spectra: Vec<Vec<f64>> = Vec::new();
    for (label, m) in meshes {
        let ops = assemble(&m, &|_| 0.0).map_err(num)?;
        let s = solve_eigs_with(&ops, &o).map_err(num)?;
        labels.push(label);
        spectra.push(s.eigenvalues[..k.min(s.len())].to_vec());
    }
    let mut max_drop = f64::NEG_INFINITY;
    for w in spectra.windows(2) {
        for (a, b) in w[0].iter().zip(&w[1]) {
            max_drop = max_drop.max(a - b);
        }
    }
    Ok(MonotonicityReport {
        labels,
        spectra,
        max_drop,
        ok: max_drop <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub robin_a: f64,
    /// 0-based mode index.
    pub mode: usize,
    pub lambda0: f64,
    pub mus: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Central differences `(h, (Λ(h) - Λ(-h))/2h)`, `h` descending.
    pub differences: Vec<(f64, f64)>,
    pub richardson: f64,
    /// `∮ ψ² θ'_0 ds` of the limit mode.
    pub trace_slope: f64,
    /// Fit of `|Λ(μ) - Λ(0) - μ slope|` over the positive `μ` (at least three needed).
    pub remainder: Option<RateFit>,
}

fn solve_at(mesh: &Mesh, map: &ThetaMap<f64>, a: f64, mu: f64, opts: &SolveOptions) -> Result<(Mesh, Spectrum), CheckError> {
    let (tagged, ops) = limit_operators(&LimitKind::Corrected { a, mu }, mesh, map).map_err(num)?;
    let s = solve_eigs_with(&ops, opts).map_err(num)?;
    Ok((tagged, s))
}

/// Finite-difference slope of `μ ↦ Λ₀(μ)` at `μ = 0` against the boundary trace integral.
pub fn appendix_slope_check(
    mesh: &Mesh,
    map: &ThetaMap<f64>,
    a: f64,
    mus: &[f64],
    mode: usize,
    opts: &SolveOptions,
) -> Result<SlopeReport, CheckError> {
    let mut hs: Vec<f64> = mus.iter().copied().filter(|&m| m > 0.0 && mus.contains(&-m)).collect();
    hs.sort_by(|p, q| q.total_cmp(p));
    hs.dedup();
    if hs.is_empty() || mus.iter().any(|m| !mus.contains(&-m)) {
        return Err(CheckError::NotSymmetric(mus.to_vec()));
    }
    let mut o = opts.clone();
    o.k = o.k.max(mode + 1);
    let (tagged, s0) = solve_at(mesh, map, a, 0.0, &o)?;
    let want = s0.cluster_members(s0.clusters[mode]).len();
    let lambda0 = s0.eigenvalues[mode];
    let at = |mu: f64| -> Result<f64, CheckError> {
        let (_, s) = solve_at(mesh, map, a, mu, &o)?;
        let got = s.cluster_members(s.clusters[mode]).len();
        if got != want {
            return Err(CheckError::ClusterMismatch { mode, mu, got, want });
        }
        Ok(s.eigenvalues[mode])
    };
    let mut pairs = Vec::new();
    for &h in &hs {
        pairs.push((h, at(h)?, at(-h)?));
    }
    let differences: Vec<(f64, f64)> = pairs.iter().map(|&(h, p, m)| (h, (p - m) / (2.0 * h))).collect();
    let richardson = match differences.as_slice() {
        [.., (h1, d1), (h2, d2)] => {
            let r2 = (h1 / h2).powi(2);
            d2 + (d2 - d1) / (r2 - 1.0)
        }
        [(_, d)] => *d,
        [] => unreachable!("hs is nonempty"),
    };
    let rotated = orthogonalize_all(&s0, &tagged, &|s| map.limit_theta_prime(s)).map_err(num)?;
    let trace_slope = robin_first_order(&rotated, &tagged, map, mode).map_err(num)?;
    let rem: Vec<f64> = pairs.iter().map(|&(h, p, _)| (p - lambda0 - h * trace_slope).abs()).collect();
    let remainder = if hs.len() >= 3 { Some(fit_rate(&hs, &rem).map_err(num)?) } else { None };
    let mut mus_out = Vec::new();
    let mut lambdas = Vec::new();
    for &(h, p, m) in &pairs {
        mus_out.extend([h, -h]);
        lambdas.extend([p, m]);
    }
    Ok(SlopeReport {
        robin_a: a,
        mode,
        lambda0,
        mus: mus_out,
        lambdas,
        differences,
        richardson,
        trace_slope,
        remainder,
    })
}

/// Outcome of one named check over a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// The sign constraints of the regime's theorem, per mode, plus envelope stability.
pub fn theorem_checks(cfg: &StudyConfig, records: &[StudyRecord]) -> Vec<CheckSummary> {
    let ok: Vec<&StudyRecord> = records.iter().filter(|r| r.status != Status::Failed).collect();
    let mut out = Vec::new();
    if ok.is_empty() {
        return out;
    }
    let same = cfg.base == BaseSpec::SameMesh;
    for k in 0..cfg.modes {
        let bounds: Vec<BoundRecord> = ok
            .iter()
            .filter_map(|r| r.modes.get(k).map(|m| (r, m)))
            .map(|(r, m)| BoundRecord {
                family: cfg.name.clone(),
                mode: k,
                epsilon: r.epsilon,
                mu: r.mu,
                sigma: r.sigma,
                lambda_eps: if same { m.lambda_eps_fine } else { m.lambda_eps },
                lambda_0: if same { m.base_fine } else { m.base },
            })
            .collect();
        let theorem = match cfg.regime {
            Regime::DirichletLimit => Theorem::UpperDirichlet,
            Regime::NeumannLimit => Theorem::NeumannEnvelope,
            Regime::RobinLimit { .. } => Theorem::RobinEnvelope,
        };
        match two_sided_check(&bounds, theorem, cfg.tol.sign) {
            Ok(rep) => {
                let detail = match theorem {
                    Theorem::UpperDirichlet => format!("max(lambda_eps - lambda_0) = {:.3e}", rep.max_violation),
                    Theorem::NeumannEnvelope => format!(
                        "max(lambda_0 - lambda_eps) = {:.3e}, C = {:.4}, stability {:.3}",
                        rep.max_violation, rep.fitted, rep.stability
                    ),
                    Theorem::RobinEnvelope if rep.constants.is_empty() => "mu + sigma = 0, no envelope constant to fit".to_string(),
                    Theorem::RobinEnvelope => format!("C = {:.4}, stability {:.3}", rep.fitted, rep.stability),
                };
                out.push(CheckSummary {
                    name: format!("sign mode {}", k + 1),
                    passed: rep.sign_ok,
                    detail,
                });
            }
            Err(e) => out.push(CheckSummary {
                name: format!("sign mode {}", k + 1),
                passed: false,
                detail: e.to_string(),
            }),
        }
        if let Regime::RobinLimit { .. } = cfg.regime {
            let worst = ok
                .iter()
                .filter_map(|r| r.modes.get(k).map(|m| m.correction / r.epsilon))
                .fold(f64::NEG_INFINITY, f64::max);
            out.push(CheckSummary {
                name: format!("lambda1 nonpositive mode {}", k + 1),
                passed: ok.iter().all(|r| r.modes.get(k).is_some_and(|m| !m.flagged)),
                detail: format!("max Lambda1 = {worst:.4e}"),
            });
        }
    }
    out
}

/// Rate of `|norm_remainder|` against `ε` per mode, where enough points exist.
pub fn remainder_fits(cfg: &StudyConfig, records: &[StudyRecord]) -> Vec<(usize, RateFit)> {
    let mut out = Vec::new();
    for k in 0..cfg.modes {
        let (xs, ys): (Vec<f64>, Vec<f64>) = records
            .iter()
            .filter(|r| r.status != Status::Failed)
            .filter_map(|r| r.modes.get(k).map(|m| (r.epsilon, m.norm_remainder.abs())))
            .unzip();
        if let Ok(f) = fit_rate(&xs, &ys) {
            out.push((k + 1, f));
        }
    }
    out
}
