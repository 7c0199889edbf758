//! Boundary integrals of eigenfunction traces and recovered normal fluxes.

use crate::assembly::{boundary_mass, OperatorSet};
use crate::eigen::Spectrum;
use crate::mesh::{Mesh, MeshError};
use crate::sparse::Csr;
use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("mode {0} is not in the spectrum")]
    BadMode(usize),
    #[error("flux recovery needs every boundary vertex constrained; {0} are free")]
    NotDirichlet(usize),
    #[error("boundary mass factorization failed")]
    Factorization,
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] crate::assembly::AssemblyError),
}

/// `∮ f² g ds` for a P1 field `f` given per vertex.
pub fn boundary_integral_of_field(mesh: &Mesh, f: &[f64], g: &dyn Fn(f64) -> f64, order: usize) -> Result<f64, TraceError> {
    Ok(boundary_products(mesh, f, f, g, order)?)
}

/// `∮ f₁ f₂ g ds`.
pub fn boundary_products(
    mesh: &Mesh,
    f1: &[f64],
    f2: &[f64],
    g: &dyn Fn(f64) -> f64,
    order: usize,
) -> Result<f64, MeshError> {
    let nodes = mesh.boundary_quadrature(order)?;
    let mut total = 0.0;
    for q in &nodes {
        let e = &mesh.boundary_edges[q.edge];
        let a = q.shape[0] * f1[e.v[0]] + q.shape[1] * f1[e.v[1]];
        let b = q.shape[0] * f2[e.v[0]] + q.shape[1] * f2[e.v[1]];
        total += q.weight * a * b * g(q.s);
    }
    Ok(total)
}

/// `∮ u_k² g ds` using order-4 Gauss per edge.
pub fn boundary_trace_integral(spec: &Spectrum, mesh: &Mesh, g: &dyn Fn(f64) -> f64, mode: usize) -> Result<f64, TraceError> {
    boundary_trace_integral_with_order(spec, mesh, g, mode, 4)
}

pub fn boundary_trace_integral_with_order(
    spec: &Spectrum,
    mesh: &Mesh,
    g: &dyn Fn(f64) -> f64,
    mode: usize,
    order: usize,
) -> Result<f64, TraceError> {
    let u = spec.vectors.get(mode).ok_or(TraceError::BadMode(mode))?;
    boundary_integral_of_field(mesh, u, g, order)
}

/// Variational normal derivative of a Dirichlet mode on the boundary vertices:
/// solves `B q = K u − λ M u` with `B` the boundary mass matrix.
pub fn recover_flux(ops: &OperatorSet, spec: &Spectrum, mesh: &Mesh, mode: usize) -> Result<Vec<f64>, TraceError> {
    let u = spec.vectors.get(mode).ok_or(TraceError::BadMode(mode))?;
    let lam = spec.eigenvalues[mode];
    let on = mesh.boundary_vertices();
    let free = on.iter().zip(&ops.dirichlet).filter(|(b, d)| **b && !**d).count();
    if free > 0 {
        return Err(TraceError::NotDirichlet(free));
    }
    let ku = ops.k.mul_vec(u);
    let mu = ops.m.mul_vec(u);
    let bdofs: Vec<usize> = (0..on.len()).filter(|&i| on[i]).collect();
    let b: Csr = boundary_mass(mesh, &|_| 1.0, &|_| true, 4)?.restrict(&bdofs);
    let llt = b
        .to_faer()
        .map_err(|_| TraceError::Factorization)?
        .sp_cholesky(Side::Lower)
        .map_err(|_| TraceError::Factorization)?;
    let mut rhs = Mat::<f64>::from_fn(bdofs.len(), 1, |k, _| ku[bdofs[k]] - lam * mu[bdofs[k]]);
    llt.solve_in_place(rhs.as_mut());
    let mut q = vec![0.0; on.len()];
    for (k, &i) in bdofs.iter().enumerate() {
        q[i] = rhs[(k, 0)];
    }
    Ok(q)
}

/// `∮ (∂u_k/∂ν)² g ds` with the flux from [`recover_flux`].
pub fn normal_derivative_integral(
    ops: &OperatorSet,
    spec: &Spectrum,
    mesh: &Mesh,
    g: &dyn Fn(f64) -> f64,
    mode: usize,
) -> Result<f64, TraceError> {
    let q = recover_flux(ops, spec, mesh, mode)?;
    boundary_integral_of_field(mesh, &q, g, 4)
}
