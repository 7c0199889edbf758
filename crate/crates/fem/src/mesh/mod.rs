//! Boundary-conforming triangulations with tagged boundary edges.
//!
//! Two constructions are provided. [`triangulate`] inscribes a graded polygon in the
//! curve and fills it by constrained Delaunay refinement. [`triangulate_patched`]
//! additionally resolves each short boundary feature inside a conformal patch, where
//! vertices carry coordinates `ζ` with `z = z_mid + h cosh ζ`; this is what lets arcs
//! of length `1e-50` coexist with an `O(1)` outer mesh.

mod build;
mod io;
mod patch;
mod size;

pub use build::{triangulate, triangulate_patched, MeshOptions, PatchOptions, PatchTarget};
pub use size::SizeField;

use freqbc_core::geometry::{wrap, AlternationConfig};
use freqbc_core::quad::gauss_legendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

/// Boundary condition carried by a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    Dirichlet,
    Neumann,
    Robin,
}

impl Tag {
    pub fn letter(self) -> char {
        match self {
            Tag::Dirichlet => 'D',
            Tag::Neumann => 'N',
            Tag::Robin => 'R',
        }
    }

    pub fn from_letter(c: &str) -> Option<Self> {
        match c {
            "D" => Some(Tag::Dirichlet),
            "N" => Some(Tag::Neumann),
            "R" => Some(Tag::Robin),
            _ => None,
        }
    }
}

/// How the P1 trace is interpolated along an edge in terms of the arclength offset `t`.
///
/// `Linear` edges interpolate linearly in `t`. Patch edges interpolate linearly in
/// `acosh(|t|/half)` (beside a feature) or `acos(t/half)` (on it), which is linear in
/// the patch coordinate to leading order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EdgeParam {
    Linear,
    Cosh { half: f64 },
    Cos { half: f64 },
}

impl EdgeParam {
    fn coordinate(self, t: f64) -> f64 {
        match self {
            EdgeParam::Linear => t,
            EdgeParam::Cosh { half } => (t.abs() / half).max(1.0).acosh(),
            EdgeParam::Cos { half } => (t / half).clamp(-1.0, 1.0).acos(),
        }
    }

    fn offset(self, g: f64, sign: f64) -> f64 {
        match self {
            EdgeParam::Linear => g,
            EdgeParam::Cosh { half } => sign * half * g.cosh(),
            EdgeParam::Cos { half } => half * g.cos(),
        }
    }

    fn speed(self, g: f64) -> f64 {
        match self {
            EdgeParam::Linear => 1.0,
            EdgeParam::Cosh { half } => half * g.sinh(),
            EdgeParam::Cos { half } => half * g.sin(),
        }
    }
}

/// One boundary edge. It covers arclength `base + t[0] .. base + t[1]` with `t[0] < t[1]`,
/// and `v[0]` sits at the smaller arclength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub base: f64,
    pub t: [f64; 2],
    pub tag: Tag,
    pub param: EdgeParam,
}

impl BoundaryEdge {
    /// Arclength covered by the edge.
    pub fn length(&self) -> f64 {
        self.t[1] - self.t[0]
    }
}

/// A conformal patch `z = z_mid + h cosh ζ` around one short boundary feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    /// Arclength of the feature midpoint.
    pub center: f64,
    /// Half the feature's arclength.
    pub half: f64,
    /// `ln |h|`.
    pub ln_scale: f64,
    /// `Re ζ` on the interface with the outer mesh.
    pub x_interface: f64,
    /// Tag of the feature itself.
    pub feature: Tag,
}

impl Patch {
    /// `ln |dz/dζ|²` at `ζ = (x, y)`.
    pub fn ln_jacobian(&self, x: f64, y: f64) -> f64 {
        let x = x.abs();
        let core = if x > 18.0 {
            let e = (-2.0 * x).exp();
            2.0 * x - 2.0 * std::f64::consts::LN_2 + ((1.0 - e).powi(2) + 4.0 * e * y.sin().powi(2)).ln()
        } else {
            (x.sinh().powi(2) + y.sin().powi(2)).ln()
        };
        2.0 * self.ln_scale + core
    }
}

impl Patch {
    /// `|h| cosh ζ`, the patch map up to a rigid motion.
    pub fn map(&self, z: Complex64) -> Complex64 {
        0.5 * ((self.ln_scale + z).exp() + (self.ln_scale - z).exp())
    }

    /// `|h| sinh ζ`.
    pub fn map_derivative(&self, z: Complex64) -> Complex64 {
        0.5 * ((self.ln_scale + z).exp() - (self.ln_scale - z).exp())
    }
}

/// A patch triangle with edge `a b` on the interface, mapped by
/// `G(ζ) = w(ζ) + (1 − λ_c) δ(λ_b / (1 − λ_c))` with `λ` the barycentric coordinates
/// in `ζ` and `δ(t) = (1−t) w(a) + t w(b) − w(a + t(b − a))`. The edge `a b` goes to
/// the straight chord shared with the neighbouring ordinary triangle; the other two
/// edges keep their conformal images, so the element is conforming on every side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blend {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
}

struct BlendFrame {
    za: Complex64,
    zb: Complex64,
    wa: Complex64,
    wb: Complex64,
    /// `∇λ_b`, `∇λ_c` as `(∂/∂X, ∂/∂Y)`.
    gb: [f64; 2],
    gc: [f64; 2],
    lb: f64,
    lc: f64,
}

impl Blend {
    fn frame(&self, patch: &Patch, x: f64, y: f64) -> BlendFrame {
        let [a, b, c] = [self.a, self.b, self.c];
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        // λ_b = ((ζ−a) × (c−a)) / det, λ_c = ((b−a) × (ζ−a)) / det
        let gb = [(c[1] - a[1]) / det, -(c[0] - a[0]) / det];
        let gc = [-(b[1] - a[1]) / det, (b[0] - a[0]) / det];
        let (dx, dy) = (x - a[0], y - a[1]);
        let za = Complex64::new(a[0], a[1]);
        let zb = Complex64::new(b[0], b[1]);
        BlendFrame {
            za,
            zb,
            wa: patch.map(za),
            wb: patch.map(zb),
            gb,
            gc,
            lb: gb[0] * dx + gb[1] * dy,
            lc: gc[0] * dx + gc[1] * dy,
        }
    }

    /// `G(ζ)` at `ζ = (x, y)`.
    pub fn map(&self, patch: &Patch, x: f64, y: f64) -> Complex64 {
        let f = self.frame(patch, x, y);
        let s = 1.0 - f.lc;
        let w = patch.map(Complex64::new(x, y));
        if s <= 0.0 {
            return w;
        }
        let t = f.lb / s;
        let delta = f.wa + t * (f.wb - f.wa) - patch.map(f.za + t * (f.zb - f.za));
        w + s * delta
    }

    /// Columns `(∂G/∂X, ∂G/∂Y)` of the Jacobian at `ζ = (x, y)`.
    pub fn jacobian(&self, patch: &Patch, x: f64, y: f64) -> (Complex64, Complex64) {
        let f = self.frame(patch, x, y);
        let dw = patch.map_derivative(Complex64::new(x, y));
        let s = 1.0 - f.lc;
        if s <= 0.0 {
            return (dw, Complex64::i() * dw);
        }
        let t = f.lb / s;
        let line = f.za + t * (f.zb - f.za);
        let delta = f.wa + t * (f.wb - f.wa) - patch.map(line);
        let ddelta = f.wb - f.wa - patch.map_derivative(line) * (f.zb - f.za);
        // ∂(s δ(t)) = −δ ∇λ_c + δ'(t) (∇λ_b + t ∇λ_c)
        let part = |j: usize| -delta * f.gc[j] + ddelta * (f.gb[j] + t * f.gc[j]);
        (dw + part(0), Complex64::i() * dw + part(1))
    }
}

/// Metric data of a curved cell at one point: `det J` and `(JᵀJ)⁻¹ det J`.
pub(crate) fn blend_metric(gx: Complex64, gy: Complex64) -> (f64, [[f64; 2]; 2]) {
    let (a, b, c, d) = (gx.re, gy.re, gx.im, gy.im);
    let det = a * d - b * c;
    let g11 = a * a + c * c;
    let g12 = a * b + c * d;
    let g22 = b * b + d * d;
    // (JᵀJ)⁻¹ det J = adj(JᵀJ) / det J
    (det, [[g22 / det, -g12 / det], [-g12 / det, g11 / det]])
}

/// A triangulated domain with tagged boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Patch coordinates `(patch, ζ)` for vertices that belong to a patch.
    pub charts: Vec<Option<(usize, [f64; 2])>>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Patch owning each triangle, if any; such triangles live in `ζ` coordinates.
    pub triangle_patch: Vec<Option<usize>>,
    /// Blended map of triangles in the outermost row of a patch.
    pub blends: Vec<Option<Blend>>,
    pub patches: Vec<Patch>,
    /// Boundary edges in increasing arclength order, forming one closed cycle.
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Length of the boundary curve.
    pub length: f64,
    pub h_max: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh size must be positive and finite, got {0}")]
    BadSize(f64),
    #[error("n_min must be at least 4, got {0}")]
    BadMinEdges(usize),
    #[error(
        "arc {arc} needs local size {size:e}, below the floor {floor:e}; use a larger eta or a smaller N, or the patched mesh"
    )]
    ArcTooThin { arc: usize, size: f64, floor: f64 },
    #[error("feature of length {0:e} is too small to represent in double precision")]
    FeatureTooSmall(f64),
    #[error("constrained triangulation failed: {0}")]
    Triangulation(String),
    #[error("refinement failure: {0}")]
    Refinement(String),
    #[error("degenerate triangle {index} with area {area:e}")]
    Degenerate { index: usize, area: f64 },
    #[error("mesh is not conforming: {0}")]
    NonConforming(String),
    #[error("quadrature order must be 2, 4 or 8, got {0}")]
    BadOrder(usize),
    #[error("mesh file line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// One boundary quadrature node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub edge: usize,
    /// Arclength position in `[0, S)`.
    pub s: f64,
    pub weight: f64,
    pub tag: Tag,
    /// Values of the two edge-vertex hat functions at the node.
    pub shape: [f64; 2],
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Element coordinates: physical for ordinary triangles, `ζ` for patch triangles.
    pub fn element_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let tri = self.triangles[t];
        match self.triangle_patch[t] {
            None => tri.map(|v| self.vertices[v]),
            Some(p) => tri.map(|v| match self.charts[v] {
                Some((q, z)) if q == p => z,
                _ => panic!("patch triangle {t} has a vertex without a chart in patch {p}"),
            }),
        }
    }

    /// Physical area of triangle `t` (quadrature of the conformal factor on patches).
    pub fn triangle_area(&self, t: usize) -> f64 {
        let c = self.element_coords(t);
        let a = signed_area(c);
        match self.triangle_patch[t] {
            None => a,
            Some(p) if self.blends[t].is_some() => {
                let patch = &self.patches[p];
                let blend = self.blends[t].unwrap();
                triangle_rule(6)
                    .iter()
                    .map(|&(l, w)| {
                        let x = l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0];
                        let y = l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1];
                        let (gx, gy) = blend.jacobian(patch, x, y);
                        w * blend_metric(gx, gy).0
                    })
                    .sum::<f64>()
                    * a
                    * 2.0
            }
            Some(p) => {
                let patch = &self.patches[p];
                triangle_rule(6)
                    .iter()
                    .map(|&(l, w)| {
                        let x = l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0];
                        let y = l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1];
                        w * patch.ln_jacobian(x, y).exp()
                    })
                    .sum::<f64>()
                    * a
                    * 2.0
            }
        }
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Indices of vertices lying on the boundary.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            on[e.v[0]] = true;
            on[e.v[1]] = true;
        }
        on
    }

    /// Vertices touched by a Dirichlet edge.
    pub fn dirichlet_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for e in self.boundary_edges.iter().filter(|e| e.tag == Tag::Dirichlet) {
            on[e.v[0]] = true;
            on[e.v[1]] = true;
        }
        on
    }

    /// Total arclength carried by edges with `tag`.
    pub fn tag_length(&self, tag: Tag) -> f64 {
        self.boundary_edges.iter().filter(|e| e.tag == tag).map(|e| e.length()).sum()
    }

    /// A copy with every boundary edge carrying `tag`.
    pub fn retagged(&self, tag: Tag) -> Mesh {
        let mut m = self.clone();
        for e in &mut m.boundary_edges {
            e.tag = tag;
        }
        m
    }

    /// A copy whose edges are tagged from `cfg`: Dirichlet inside arcs, `other` elsewhere.
    ///
    /// Every arc endpoint of `cfg` must already be a boundary vertex.
    pub fn retagged_by(&self, cfg: &AlternationConfig<f64>, other: Tag) -> Mesh {
        let mut m = self.clone();
        for e in &mut m.boundary_edges {
            let mid = 0.5 * (e.t[0] + e.t[1]);
            let s = wrap(e.base + mid, self.length);
            e.tag = if cfg.is_dirichlet(s) { Tag::Dirichlet } else { other };
        }
        m
    }

    /// Gauss–Legendre nodes on every boundary edge, `order ∈ {2, 4, 8}`.
    pub fn boundary_quadrature(&self, order: usize) -> Result<Vec<BoundaryNode>, MeshError> {
        if ![2, 4, 8].contains(&order) {
            return Err(MeshError::BadOrder(order));
        }
        let (x, w) = gauss_legendre::<f64>(order);
        let mut out = Vec::with_capacity(self.boundary_edges.len() * order);
        for (ei, e) in self.boundary_edges.iter().enumerate() {
            let sign = if e.t[0] + e.t[1] < 0.0 { -1.0 } else { 1.0 };
            let g0 = e.param.coordinate(e.t[0]);
            let g1 = e.param.coordinate(e.t[1]);
            let first = out.len();
            let mut total = 0.0;
            for (&xi, &wi) in x.iter().zip(&w) {
                let g = 0.5 * (g0 + g1) + 0.5 * (g1 - g0) * xi;
                let t = match e.param {
                    EdgeParam::Linear => g,
                    _ => e.param.offset(g, sign),
                };
                let weight = wi * 0.5 * (g1 - g0).abs() * e.param.speed(g).abs();
                let lam = if g1 == g0 { 0.5 } else { (g - g0) / (g1 - g0) };
                total += weight;
                out.push(BoundaryNode {
                    edge: ei,
                    s: wrap(e.base + t, self.length),
                    weight,
                    tag: e.tag,
                    shape: [1.0 - lam, lam],
                });
            }
            // Rescale curved-coordinate rules so each edge integrates 1 exactly.
            if total > 0.0 {
                let fix = e.length() / total;
                for n in &mut out[first..] {
                    n.weight *= fix;
                }
            }
        }
        Ok(out)
    }

    /// Asserts orientation, conformity, and the closed boundary cycle.
    pub fn validate(&self) -> Result<(), MeshError> {
        for t in 0..self.triangles.len() {
            let a = signed_area(self.element_coords(t));
            if !(a > 1e-14) {
                return Err(MeshError::Degenerate { index: t, area: a });
            }
        }
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut boundary: Vec<(usize, usize)> = Vec::new();
        for (&e, &c) in &count {
            match c {
                1 => boundary.push(e),
                2 => {}
                _ => return Err(MeshError::NonConforming(format!("edge {e:?} shared by {c} triangles"))),
            }
        }
        if boundary.len() != self.boundary_edges.len() {
            return Err(MeshError::NonConforming(format!(
                "{} free edges but {} boundary edges",
                boundary.len(),
                self.boundary_edges.len()
            )));
        }
        for e in &self.boundary_edges {
            let key = (e.v[0].min(e.v[1]), e.v[0].max(e.v[1]));
            if count.get(&key) != Some(&1) {
                return Err(MeshError::NonConforming(format!("boundary edge {:?} is not a free edge", e.v)));
            }
            if !(e.t[1] > e.t[0]) {
                return Err(MeshError::NonConforming(format!("boundary edge {:?} has empty interval", e.v)));
            }
        }
        let n = self.boundary_edges.len();
        for i in 0..n {
            if self.boundary_edges[i].v[1] != self.boundary_edges[(i + 1) % n].v[0] {
                return Err(MeshError::NonConforming(format!("boundary cycle breaks after edge {i}")));
            }
        }
        let total: f64 = self.boundary_edges.iter().map(|e| e.length()).sum();
        if (total - self.length).abs() > 1e-9 * self.length {
            return Err(MeshError::NonConforming(format!(
                "boundary arclength {total} differs from curve length {}",
                self.length
            )));
        }
        Ok(())
    }

    /// Smallest interior angle in degrees over triangles outside every patch.
    pub fn min_angle_deg(&self) -> f64 {
        let mut best = 180.0f64;
        for t in 0..self.triangles.len() {
            if self.triangle_patch[t].is_some() || self.triangles[t].iter().any(|&v| self.charts[v].is_some()) {
                continue;
            }
            let c = self.element_coords(t);
            for k in 0..3 {
                let p = c[k];
                let u = sub(c[(k + 1) % 3], p);
                let v = sub(c[(k + 2) % 3], p);
                let cos = (u[0] * v[0] + u[1] * v[1]) / (norm(u) * norm(v));
                best = best.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
        best
    }

    pub(crate) fn compute_h_max(&mut self) {
        self.h_max = self
            .triangles
            .iter()
            .map(|tri| {
                (0..3)
                    .map(|k| norm(sub(self.vertices[tri[k]], self.vertices[tri[(k + 1) % 3]])))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
    }
}

pub(crate) fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

pub(crate) fn signed_area(c: [[f64; 2]; 3]) -> f64 {
    let u = sub(c[1], c[0]);
    let v = sub(c[2], c[0]);
    0.5 * (u[0] * v[1] - u[1] * v[0])
}

/// Collapsed Gauss rule on the reference triangle: barycentric nodes and weights summing to 1/2.
pub fn triangle_rule(n: usize) -> Vec<([f64; 3], f64)> {
    let (x, w) = gauss_legendre::<f64>(n);
    let mut out = Vec::with_capacity(n * n);
    for (&xi, &wi) in x.iter().zip(&w) {
        let u = 0.5 * (xi + 1.0);
        for (&xj, &wj) in x.iter().zip(&w) {
            let v = 0.5 * (xj + 1.0) * (1.0 - u);
            let weight = 0.25 * wi * wj * (1.0 - u);
            out.push(([1.0 - u - v, u, v], weight));
        }
    }
    out
}
