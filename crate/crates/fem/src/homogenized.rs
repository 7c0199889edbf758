//! Limiting problems, disk oracles and weighted orthogonalization within clusters.

use crate::assembly::{assemble, AssemblyError, OperatorSet};
use crate::eigen::{dense_symmetric_eigen, solve_eigs_with, EigenError, SolveOptions, Spectrum};
use crate::mesh::{Mesh, Tag};
use crate::trace::boundary_products;
use freqbc_core::bessel::{DiskKind, DiskOracle};
use freqbc_core::geometry::ThetaMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The limiting boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitKind {
    /// `ψ = 0` on the whole boundary.
    Dirichlet,
    /// `∂ψ/∂ν + A θ'_0 ψ = 0`.
    RobinA { a: f64 },
    /// `∂ψ/∂ν = 0`.
    Neumann,
    /// `∂Ψ/∂ν + (A + μ) θ'_ε Ψ = 0`.
    Corrected { a: f64, mu: f64 },
}

impl LimitKind {
    /// Boundary weight of the Robin form; `None` for the Dirichlet problem.
    pub fn weight<'a>(&self, map: &'a ThetaMap<f64>) -> Option<Box<dyn Fn(f64) -> f64 + 'a>> {
        match *self {
            LimitKind::Dirichlet => None,
            LimitKind::Neumann => Some(Box::new(|_| 0.0)),
            LimitKind::RobinA { a } => Some(Box::new(move |s| a * map.limit_theta_prime(s))),
            LimitKind::Corrected { a, mu } => Some(Box::new(move |s| (a + mu) * map.theta_prime(s))),
        }
    }

    pub fn disk_kind(&self) -> Option<DiskKind<f64>> {
        match *self {
            LimitKind::Dirichlet => Some(DiskKind::Dirichlet),
            LimitKind::Neumann => Some(DiskKind::Neumann),
            LimitKind::RobinA { a } if a == 0.0 => Some(DiskKind::Neumann),
            LimitKind::RobinA { a } => Some(DiskKind::Robin { a }),
            LimitKind::Corrected { a, mu } if a + mu == 0.0 => Some(DiskKind::Neumann),
            LimitKind::Corrected { a, mu } => Some(DiskKind::Robin { a: a + mu }),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("cluster {0} is not in the spectrum")]
    NoCluster(usize),
    #[error("boundary Gram matrix of cluster {cluster} is singular (smallest eigenvalue {min:e}); the modes vanish on the boundary")]
    SingularGram { cluster: usize, min: f64 },
    #[error("{0}")]
    Trace(String),
}

/// The mesh with every boundary edge tagged for `kind`.
pub fn limit_mesh(kind: &LimitKind, mesh: &Mesh) -> Mesh {
    match kind {
        LimitKind::Dirichlet => mesh.retagged(Tag::Dirichlet),
        _ => mesh.retagged(Tag::Robin),
    }
}

/// Operators of the limiting problem on the same triangulation.
pub fn limit_operators(kind: &LimitKind, mesh: &Mesh, map: &ThetaMap<f64>) -> Result<(Mesh, OperatorSet), LimitError> {
    let tagged = limit_mesh(kind, mesh);
    let ops = match kind.weight(map) {
        None => assemble(&tagged, &|_| 0.0)?,
        Some(w) => assemble(&tagged, &*w)?,
    };
    Ok((tagged, ops))
}

pub fn solve_limit(kind: &LimitKind, mesh: &Mesh, map: &ThetaMap<f64>, opts: &SolveOptions) -> Result<Spectrum, LimitError> {
    let (_, ops) = limit_operators(kind, mesh, map)?;
    Ok(solve_eigs_with(&ops, opts)?)
}

/// Bessel-root table of the limiting problem on the unit disk.
pub fn disk_oracle(kind: &LimitKind, count: usize) -> DiskOracle<f64> {
    DiskOracle::new(kind.disk_kind().unwrap_or(DiskKind::Dirichlet), count)
}

/// Rotates cluster `cluster` so that `∮ u_i u_j w ds` is diagonal; M-orthonormality is kept.
///
/// Single-member clusters come back unchanged.
pub fn weighted_orthogonalize(
    spec: &Spectrum,
    mesh: &Mesh,
    weight: &dyn Fn(f64) -> f64,
    cluster: usize,
) -> Result<Spectrum, LimitError> {
    let members = spec.cluster_members(cluster);
    if members.is_empty() {
        return Err(LimitError::NoCluster(cluster));
    }
    if members.len() == 1 {
        return Ok(spec.clone());
    }
    let gram = boundary_gram(spec, mesh, weight, &members)?;
    let (vals, vecs) = dense_symmetric_eigen(&gram)?;
    let top = vals.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 1e-12 * top.max(1e-300)) || top < 1e-12 {
        return Err(LimitError::SingularGram { cluster, min });
    }
    let mut out = spec.clone();
    let n = spec.vectors[members[0]].len();
    for (c, y) in vecs.iter().enumerate() {
        let mut u = vec![0.0; n];
        let mut lam = 0.0;
        for (i, &m) in members.iter().enumerate() {
            for (ui, vi) in u.iter_mut().zip(&spec.vectors[m]) {
                *ui += y[i] * vi;
            }
            lam += y[i] * y[i] * spec.eigenvalues[m];
        }
        let imax = (0..n).fold(0, |b, i| if u[i].abs() > u[b].abs() { i } else { b });
        if u[imax] < 0.0 {
            u.iter_mut().for_each(|v| *v = -*v);
        }
        let slot = members[c];
        out.vectors[slot] = u;
        out.eigenvalues[slot] = lam;
        out.residuals[slot] = members.iter().map(|&m| spec.residuals[m]).fold(0.0, f64::max);
    }
    Ok(out)
}

/// Applies [`weighted_orthogonalize`] to every cluster with at least two members.
pub fn orthogonalize_all(spec: &Spectrum, mesh: &Mesh, weight: &dyn Fn(f64) -> f64) -> Result<Spectrum, LimitError> {
    let mut out = spec.clone();
    let ids: std::collections::BTreeSet<usize> = spec.clusters.iter().copied().collect();
    for id in ids {
        if out.cluster_members(id).len() > 1 {
            out = weighted_orthogonalize(&out, mesh, weight, id)?;
        }
    }
    Ok(out)
}

/// `∮ u_i u_j w ds` over the given modes.
pub fn boundary_gram(
    spec: &Spectrum,
    mesh: &Mesh,
    weight: &dyn Fn(f64) -> f64,
    members: &[usize],
) -> Result<Vec<Vec<f64>>, LimitError> {
    let p = members.len();
    let mut g = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in i..p {
            let v = boundary_products(mesh, &spec.vectors[members[i]], &spec.vectors[members[j]], weight, 4)
                .map_err(|e| LimitError::Trace(e.to_string()))?;
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}
