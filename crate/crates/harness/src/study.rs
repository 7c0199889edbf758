//! One sweep point: geometry, mesh, perturbed and limit spectra, predictions.

use crate::config::{BaseSpec, MeshSpec, Regime, StudyConfig};
use freqbc_core::geometry::{AlternationConfig, ArcQuantities, BoundaryCurve, ThetaMap};
use freqbc_fem::asymptotics::{dirichlet_correction, lambda1_two_term, robin_first_order};
use freqbc_fem::homogenized::{limit_operators, orthogonalize_all};
use freqbc_fem::mesh::{triangulate, triangulate_patched};
use freqbc_fem::{assemble, disk_oracle, solve_eigs_with, Mesh, MeshOptions, OperatorSet, PatchOptions, SolveOptions, Spectrum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Computed, but a sign constraint of the regime's theorem is violated.
    Flagged,
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Flagged => "flagged",
            Status::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    /// 1-based position in the ascending spectrum.
    pub mode: usize,
    /// Extrapolated when the mesh is refined, otherwise the raw value.
    pub lambda_eps: f64,
    /// Value on the finest mesh.
    pub lambda_eps_fine: f64,
    pub base: f64,
    pub base_fine: f64,
    pub correction: f64,
    pub prediction: f64,
    pub raw_err: f64,
    pub norm_remainder: f64,
    pub residual: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub n: usize,
    pub epsilon: f64,
    pub eta: f64,
    pub ln_eta: f64,
    pub mu: f64,
    pub robin_a: f64,
    pub sigma: f64,
    /// Scale dividing the remainder: `ε|ln sin η|`, `μ` or `ε(A+μ)` by regime.
    pub scale: f64,
    pub h_max: f64,
    pub vertices: usize,
    pub status: Status,
    pub reason: Option<String>,
    pub modes: Vec<ModeRecord>,
}

type PointResult<T> = Result<T, String>;

fn at<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> String {
    move |e| format!("{stage}: {e}")
}

/// `(h, h_boundary)` for `N` arcs: the boundary resolves a period with `per_period` edges.
pub fn mesh_sizes(spec: &MeshSpec, length: f64, n: usize) -> (f64, f64) {
    match spec.per_period {
        Some(k) => {
            let hb = length / n as f64 / k;
            (spec.h.min(4.0 * hb).max(hb), hb)
        }
        None => (spec.h, spec.h),
    }
}

/// Patch resolution tied to the boundary resolution.
pub fn patch_options(spec: &MeshSpec) -> PatchOptions {
    match spec.per_period {
        Some(k) => PatchOptions {
            angular: (std::f64::consts::FRAC_PI_2 * k).ceil() as usize,
            growth: 1.0 + 6.4 / k,
            ..Default::default()
        },
        None => PatchOptions::default(),
    }
}

/// The perturbed-problem mesh at `N`, before refinement.
pub fn build_mesh(curve: &dyn BoundaryCurve<f64>, alt: &AlternationConfig<f64>, spec: &MeshSpec) -> PointResult<Mesh> {
    let (h, hb) = mesh_sizes(spec, curve.length(), alt.n_arcs);
    let mut opts = MeshOptions::new(h).with_boundary_h(hb);
    opts.n_min = spec.n_min;
    opts.max_vertices = spec.max_vertices;
    let shortest = alt.arcs().filter(|a| !a.is_empty()).map(|a| a.length()).fold(f64::INFINITY, f64::min);
    if shortest.is_finite() {
        let floor = if spec.patched { 1e-280 } else { opts.floor * curve.length() };
        if shortest < 4.0 * floor {
            return Err(format!(
                "arc length {shortest:e} is below 4x the mesh floor {floor:e}; raise mu or lower N{}",
                if spec.patched { "" } else { ", or use a patched mesh" }
            ));
        }
    }
    if spec.patched {
        triangulate_patched(curve, alt, &opts, &patch_options(spec)).map_err(at("mesh"))
    } else {
        triangulate(curve, Some(alt), &opts).map_err(at("mesh"))
    }
}

fn solve(ops: &OperatorSet, cfg: &StudyConfig) -> PointResult<Spectrum> {
    let mut o = SolveOptions::new(cfg.modes, cfg.tol.eig);
    o.cluster_tol = cfg.tol.cluster;
    let s = solve_eigs_with(ops, &o).map_err(at("eigensolve"))?;
    if s.len() < cfg.modes {
        return Err(format!("eigensolve returned {} of {} modes", s.len(), cfg.modes));
    }
    Ok(s)
}

/// One step of Richardson extrapolation for an `O(h²)` sequence under halving.
pub fn richardson(levels: &[Vec<f64>]) -> Vec<f64> {
    match levels {
        [] => Vec::new(),
        [only] => only.clone(),
        [.., coarse, fine] => fine.iter().zip(coarse).map(|(f, c)| f + (f - c) / 3.0).collect(),
    }
}

/// Limit spectrum with its finest mesh and operators, kept for the corrections.
struct Base {
    values: Vec<f64>,
    fine: Vec<f64>,
    mesh: Mesh,
    ops: OperatorSet,
    spec: Spectrum,
}

fn plain_base(
    cfg: &StudyConfig,
    curve: &dyn BoundaryCurve<f64>,
    map: &ThetaMap<f64>,
    mu: f64,
    h: f64,
    levels: usize,
) -> PointResult<Base> {
    let kind = cfg.regime.limit_kind(mu);
    let mut mesh = triangulate(curve, None, &MeshOptions::new(h)).map_err(at("reference mesh"))?;
    let mut history = Vec::new();
    for lev in 0..=levels {
        if lev > 0 {
            mesh = mesh.refine_uniform(curve).map_err(at("reference refinement"))?;
        }
        let (tagged, ops) = limit_operators(&kind, &mesh, map).map_err(at("limit assembly"))?;
        let spec = solve(&ops, cfg)?;
        history.push(spec.eigenvalues[..cfg.modes].to_vec());
        if lev == levels {
            return Ok(Base {
                values: richardson(&history),
                fine: history.last().cloned().unwrap_or_default(),
                mesh: tagged,
                ops,
                spec,
            });
        }
    }
    unreachable!("loop returns on the last level")
}

/// Runs one sweep point; failures become a failed row.
pub fn run_point(cfg: &StudyConfig, n: usize) -> StudyRecord {
    let eps = 2.0 / n as f64;
    let (mu, ln_eta) = cfg.small_params(n);
    match try_point(cfg, n) {
        Ok(r) => r,
        Err(reason) => StudyRecord {
            n,
            epsilon: eps,
            eta: ln_eta.exp(),
            ln_eta,
            mu,
            robin_a: cfg.regime.robin_a(),
            sigma: 0.0,
            scale: 0.0,
            h_max: 0.0,
            vertices: 0,
            status: Status::Failed,
            reason: Some(reason),
            modes: Vec::new(),
        },
    }
}

fn try_point(cfg: &StudyConfig, n: usize) -> PointResult<StudyRecord> {
    let curve = cfg.curve.build();
    let map = cfg.theta_map().map_err(at("theta map"))?;
    let eps = 2.0 / n as f64;
    let (mu, ln_eta) = cfg.small_params(n);
    let eta = ln_eta.exp();
    if !(eta > 0.0) {
        return Err(format!("eta = exp({ln_eta}) underflows"));
    }
    let a = cfg.regime.robin_a();
    let alt = cfg.alternation(&map, n).map_err(at("alternation"))?;
    let kind = cfg.regime.limit_kind(mu);

    let mut mesh = build_mesh(&*curve, &alt, &cfg.mesh)?;
    let same = cfg.base == BaseSpec::SameMesh;
    let mut pert_levels = Vec::new();
    let mut base_levels = Vec::new();
    let mut pert_spec = None;
    let mut same_base = None;
    for lev in 0..=cfg.mesh.levels {
        if lev > 0 {
            mesh = mesh.refine_uniform(&*curve).map_err(at("refinement"))?;
        }
        if mesh.num_vertices() > cfg.mesh.max_vertices {
            return Err(format!("refined mesh has {} vertices, above the cap", mesh.num_vertices()));
        }
        let ops = assemble(&mesh, &|_| 0.0).map_err(at("assembly"))?;
        let spec = solve(&ops, cfg)?;
        pert_levels.push(spec.eigenvalues[..cfg.modes].to_vec());
        pert_spec = Some(spec);
        drop(ops);
        if same {
            let (tagged, ops) = limit_operators(&kind, &mesh, &map).map_err(at("limit assembly"))?;
            let spec = solve(&ops, cfg)?;
            base_levels.push(spec.eigenvalues[..cfg.modes].to_vec());
            if lev == cfg.mesh.levels {
                same_base = Some((tagged, ops, spec));
            }
        }
    }
    let pert_spec = pert_spec.expect("at least one level");
    let base = match cfg.base {
        BaseSpec::SameMesh => {
            let (mesh, ops, spec) = same_base.expect("same-mesh base solved");
            Base {
                values: richardson(&base_levels),
                fine: base_levels.last().cloned().unwrap_or_default(),
                mesh,
                ops,
                spec,
            }
        }
        BaseSpec::Reference { h, levels } => plain_base(cfg, &*curve, &map, mu, h, levels)?,
        BaseSpec::Oracle { h } => {
            let mut b = plain_base(cfg, &*curve, &map, mu, h, 0)?;
            b.values = disk_oracle(&kind, cfg.modes).values(cfg.modes);
            b.fine = b.values.clone();
            b
        }
    };

    // Corrections need a cluster basis rotated by the boundary weight.
    let corrections: Vec<f64> = match cfg.regime {
        Regime::DirichletLimit => (0..cfg.modes)
            .map(|k| {
                dirichlet_correction(&base.ops, &base.spec, &base.mesh, &map, eps, eta, k)
                    .map(|p| p.correction)
                    .map_err(at("flux correction"))
            })
            .collect::<PointResult<_>>()?,
        Regime::NeumannLimit => {
            let rotated = orthogonalize_all(&base.spec, &base.mesh, &|s| map.limit_theta_prime(s)).map_err(at("orthogonalize"))?;
            (0..cfg.modes)
                .map(|k| robin_first_order(&rotated, &base.mesh, &map, k).map(|s| mu * s).map_err(at("slope")))
                .collect::<PointResult<_>>()?
        }
        Regime::RobinLimit { .. } => {
            let rotated = orthogonalize_all(&base.spec, &base.mesh, &|s| map.theta_prime(s)).map_err(at("orthogonalize"))?;
            let q = ArcQuantities::new(&alt, &map);
            (0..cfg.modes)
                .map(|k| {
                    lambda1_two_term(&rotated, &base.mesh, &map, &q, k, a, mu)
                        .map(|l1| eps * l1)
                        .map_err(at("two-term correction"))
                })
                .collect::<PointResult<_>>()?
        }
    };

    let scale = match cfg.regime {
        Regime::DirichletLimit => eps * eta.sin().ln().abs(),
        Regime::NeumannLimit => mu,
        Regime::RobinLimit { .. } => eps * (a + mu),
    };
    let values = richardson(&pert_levels);
    let fine = pert_levels.last().cloned().unwrap_or_default();
    let slack = cfg.tol.sign;
    let mut modes = Vec::with_capacity(cfg.modes);
    for k in 0..cfg.modes {
        // Sign checks compare like with like: raw values on one mesh, else the best estimates.
        let (le, lb) = if same { (fine[k], base.fine[k]) } else { (values[k], base.values[k]) };
        let flagged = match cfg.regime {
            Regime::DirichletLimit => le - lb > slack,
            Regime::NeumannLimit => lb - le > slack,
            Regime::RobinLimit { .. } => corrections[k] > 1e-14 * eps,
        };
        let prediction = base.values[k] + corrections[k];
        modes.push(ModeRecord {
            mode: k + 1,
            lambda_eps: values[k],
            lambda_eps_fine: fine[k],
            base: base.values[k],
            base_fine: base.fine[k],
            correction: corrections[k],
            prediction,
            raw_err: values[k] - base.values[k],
            norm_remainder: (values[k] - prediction) / scale,
            residual: pert_spec.residuals[k],
            flagged,
        });
    }
    let status = if modes.iter().any(|m| m.flagged) { Status::Flagged } else { Status::Ok };
    Ok(StudyRecord {
        n,
        epsilon: eps,
        eta,
        ln_eta,
        mu,
        robin_a: a,
        sigma: map.sigma(),
        scale,
        h_max: mesh.h_max,
        vertices: mesh.num_vertices(),
        status,
        reason: None,
        modes,
    })
}

/// Every sweep point, sorted by `ε` descending; `jobs` points run concurrently.
pub fn run_sweep(cfg: &StudyConfig, jobs: usize) -> Result<Vec<StudyRecord>, crate::HarnessError> {
    cfg.validate()?;
    let jobs = jobs.clamp(1, cfg.sweep.len());
    let mut records: Vec<StudyRecord> = if jobs == 1 {
        cfg.sweep.iter().map(|&n| run_point(cfg, n)).collect()
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let out = std::sync::Mutex::new(Vec::new());
        std::thread::scope(|s| {
            for _ in 0..jobs {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    let Some(&n) = cfg.sweep.get(i) else { break };
                    let r = run_point(cfg, n);
                    out.lock().expect("no worker panicked").push(r);
                });
            }
        });
        out.into_inner().expect("no worker panicked")
    };
    records.sort_by(|p, q| q.epsilon.total_cmp(&p.epsilon));
    if records.iter().all(|r| r.status == Status::Failed) {
        let reasons: Vec<String> = records.iter().filter_map(|r| r.reason.clone()).collect();
        return Err(crate::HarnessError::Numerical(format!("every sweep point failed: {}", reasons.join("; "))));
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::richardson;

    #[test]
    fn richardson_removes_the_h2_term() {
        // v(h) = 1 + 3 h², h = 1/2 then 1/4
        let got = richardson(&[vec![1.75], vec![1.1875]]);
        assert!((got[0] - 1.0).abs() < 1e-15);
        assert_eq!(richardson(&[vec![2.0]]), vec![2.0]);
    }
}
