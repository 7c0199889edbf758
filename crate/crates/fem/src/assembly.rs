//! P1 stiffness, mass and weighted boundary-mass assembly.

use crate::mesh::{blend_metric, signed_area, triangle_rule, Blend, Mesh, MeshError, Patch, Tag};
use crate::sparse::Csr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("boundary weight is not finite at s = {s}: {value}")]
    NonFiniteWeight { s: f64, value: f64 },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Discrete operators of one boundary value problem on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet {
    /// Stiffness `∫ ∇φ_i·∇φ_j`.
    pub k: Csr,
    /// Mass `∫ φ_i φ_j`.
    pub m: Csr,
    /// Weighted boundary mass `∫ w φ_i φ_j ds` over Robin edges.
    pub b: Csr,
    /// Vertices eliminated by the Dirichlet condition.
    pub dirichlet: Vec<bool>,
}

impl OperatorSet {
    pub fn n(&self) -> usize {
        self.k.n
    }

    /// `K + B_w`, the operator of the eigenproblem.
    pub fn operator(&self) -> Csr {
        self.k.combine(1.0, &self.b, 1.0)
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.dirichlet[i]).collect()
    }

    pub fn has_dirichlet(&self) -> bool {
        self.dirichlet.iter().any(|&d| d)
    }
}

/// Local stiffness for a P1 triangle with vertex coordinates `c`.
pub fn local_stiffness(c: [[f64; 2]; 3]) -> [[f64; 3]; 3] {
    let area = signed_area(c);
    let b: [[f64; 2]; 3] = std::array::from_fn(|i| {
        let p = c[(i + 1) % 3];
        let q = c[(i + 2) % 3];
        [p[1] - q[1], q[0] - p[0]]
    });
    std::array::from_fn(|i| std::array::from_fn(|j| (b[i][0] * b[j][0] + b[i][1] * b[j][1]) / (4.0 * area)))
}

/// Assembles `K` and `M`.
pub fn assemble_volume(mesh: &Mesh) -> (Csr, Csr) {
    let n = mesh.num_vertices();
    let rule = triangle_rule(6);
    let mut kt = Vec::with_capacity(9 * mesh.triangles.len());
    let mut mt = Vec::with_capacity(9 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let c = mesh.element_coords(t);
        let ke = local_stiffness(c);
        let area = signed_area(c);
        if let (Some(p), Some(blend)) = (mesh.triangle_patch[t], mesh.blends[t]) {
            let (ke, me) = blended_element(&mesh.patches[p], &blend, c, &rule);
            for i in 0..3 {
                for j in 0..3 {
                    kt.push((tri[i], tri[j], ke[i][j]));
                    mt.push((tri[i], tri[j], me[i][j]));
                }
            }
            continue;
        }
        let me: [[f64; 3]; 3] = match mesh.triangle_patch[t] {
            None => std::array::from_fn(|i| std::array::from_fn(|j| area / if i == j { 6.0 } else { 12.0 })),
            Some(p) => {
                let patch = &mesh.patches[p];
                let mut me = [[0.0; 3]; 3];
                for &(l, w) in &rule {
                    let x = l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0];
                    let y = l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1];
                    let f = 2.0 * area * w * patch.ln_jacobian(x, y).exp();
                    for i in 0..3 {
                        for j in 0..3 {
                            me[i][j] += f * l[i] * l[j];
                        }
                    }
                }
                me
            }
        };
        for i in 0..3 {
            for j in 0..3 {
                kt.push((tri[i], tri[j], ke[i][j]));
                mt.push((tri[i], tri[j], me[i][j]));
            }
        }
    }
    (Csr::from_triplets(n, kt), Csr::from_triplets(n, mt))
}

type Local = [[f64; 3]; 3];

/// Stiffness and mass of a blended cell by quadrature in `ζ`.
fn blended_element(patch: &Patch, blend: &Blend, c: [[f64; 2]; 3], rule: &[([f64; 3], f64)]) -> (Local, Local) {
    let area = signed_area(c);
    let grad: [[f64; 2]; 3] = std::array::from_fn(|i| {
        let p = c[(i + 1) % 3];
        let q = c[(i + 2) % 3];
        [(p[1] - q[1]) / (2.0 * area), (q[0] - p[0]) / (2.0 * area)]
    });
    let mut ke = [[0.0; 3]; 3];
    let mut me = [[0.0; 3]; 3];
    for &(l, w) in rule {
        let x = l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0];
        let y = l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1];
        let (gx, gy) = blend.jacobian(patch, x, y);
        let (det, g) = blend_metric(gx, gy);
        let f = 2.0 * area * w;
        for i in 0..3 {
            let gi = [g[0][0] * grad[i][0] + g[0][1] * grad[i][1], g[1][0] * grad[i][0] + g[1][1] * grad[i][1]];
            for j in 0..3 {
                ke[i][j] += f * (gi[0] * grad[j][0] + gi[1] * grad[j][1]);
                me[i][j] += f * det * l[i] * l[j];
            }
        }
    }
    (ke, me)
}

/// `∫ w φ_i φ_j ds` over edges whose tag passes `select`, by Gauss rule of `order`.
pub fn boundary_mass(
    mesh: &Mesh,
    weight: &dyn Fn(f64) -> f64,
    select: &dyn Fn(Tag) -> bool,
    order: usize,
) -> Result<Csr, AssemblyError> {
    let nodes = mesh.boundary_quadrature(order)?;
    let mut trip = Vec::new();
    for q in nodes.iter().filter(|q| select(q.tag)) {
        let w = weight(q.s);
        if !w.is_finite() {
            return Err(AssemblyError::NonFiniteWeight { s: q.s, value: w });
        }
        let e = &mesh.boundary_edges[q.edge];
        for a in 0..2 {
            for b in 0..2 {
                trip.push((e.v[a], e.v[b], q.weight * w * q.shape[a] * q.shape[b]));
            }
        }
    }
    Ok(Csr::from_triplets(mesh.num_vertices(), trip))
}

/// Full operator set: Robin edges carry `weight`, Dirichlet edges constrain their vertices.
pub fn assemble(mesh: &Mesh, weight: &dyn Fn(f64) -> f64) -> Result<OperatorSet, AssemblyError> {
    assemble_with_order(mesh, weight, 4)
}

pub fn assemble_with_order(mesh: &Mesh, weight: &dyn Fn(f64) -> f64, order: usize) -> Result<OperatorSet, AssemblyError> {
    let (k, m) = assemble_volume(mesh);
    let b = boundary_mass(mesh, weight, &|t| t == Tag::Robin, order)?;
    Ok(OperatorSet {
        k,
        m,
        b,
        dirichlet: mesh.dirichlet_vertices(),
    })
}
