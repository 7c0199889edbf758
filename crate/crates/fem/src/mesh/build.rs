//! Mesh construction: graded boundary sampling, constrained Delaunay fill, patches.

use super::patch::{build_patch, Frame, PatchGrid, PatchSpec};
use super::{Blend, BoundaryEdge, EdgeParam, Mesh, MeshError, SizeField, Tag};
use freqbc_core::geometry::{wrap, AlternationConfig, Arc, BoundaryCurve};
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};
use num_complex::Complex64;
use std::collections::{HashMap, HashSet};

/// Controls for [`triangulate`] and [`triangulate_patched`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeshOptions {
    /// Target edge length away from arc endpoints.
    pub h: f64,
    /// Minimum number of edges inside each Dirichlet arc.
    pub n_min: usize,
    /// Ratio between neighbouring boundary edges in graded zones.
    pub ratio: f64,
    pub min_angle_deg: f64,
    pub max_vertices: usize,
    /// Smallest admissible edge length as a fraction of the curve length.
    pub floor: f64,
    /// Edge length along the boundary; defaults to `h`. A smaller value adds a band of
    /// interior rings whose spacing grows by `band_growth` per unit depth up to `h`.
    pub boundary_h: Option<f64>,
    pub band_growth: f64,
}

impl MeshOptions {
    pub fn new(h: f64) -> Self {
        MeshOptions {
            h,
            n_min: 4,
            ratio: 2.0,
            min_angle_deg: 25.0,
            max_vertices: 3_000_000,
            floor: 1e-6,
            boundary_h: None,
            band_growth: 0.25,
        }
    }

    pub fn with_boundary_h(self, hb: f64) -> Self {
        MeshOptions {
            boundary_h: Some(hb),
            ..self
        }
    }

    fn hb(&self) -> f64 {
        self.boundary_h.unwrap_or(self.h).min(self.h)
    }
}

/// Which features receive a conformal patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchTarget {
    /// Whichever of arcs or gaps has the smaller total length.
    Auto,
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchOptions {
    pub target: PatchTarget,
    /// Minimum number of angular intervals.
    pub angular: usize,
    /// Growth of the radial step away from the interface.
    pub growth: f64,
    pub max_step: f64,
    /// Fraction of the neighbouring gap a patch may cover.
    pub reach: f64,
}

impl Default for PatchOptions {
    fn default() -> Self {
        PatchOptions {
            target: PatchTarget::Auto,
            angular: 16,
            growth: 1.4,
            max_step: 3.0,
            reach: 0.45,
        }
    }
}

fn check_options(opts: &MeshOptions) -> Result<(), MeshError> {
    if !(opts.h > 0.0 && opts.h.is_finite()) {
        return Err(MeshError::BadSize(opts.h));
    }
    if let Some(hb) = opts.boundary_h {
        if !(hb > 0.0 && hb.is_finite()) {
            return Err(MeshError::BadSize(hb));
        }
    }
    if !(opts.ratio > 1.0 && opts.ratio.is_finite()) {
        return Err(MeshError::BadSize(opts.ratio));
    }
    if !(opts.band_growth > 0.0) {
        return Err(MeshError::BadSize(opts.band_growth));
    }
    if opts.n_min < 4 {
        return Err(MeshError::BadMinEdges(opts.n_min));
    }
    Ok(())
}

/// A nonempty arc in absolute arclength. `half` and `gap_after` are formed from the
/// local offsets, so they stay exact for arcs far below the resolution of `start`.
#[derive(Debug, Clone, Copy)]
struct Span {
    start: f64,
    end: f64,
    center: f64,
    half: f64,
    gap_after: f64,
    index: usize,
}

/// Nonempty arcs sorted by position in `[0, S)`.
fn sorted_arcs(cfg: &AlternationConfig<f64>) -> Vec<Span> {
    let len = cfg.length;
    let mut arcs: Vec<(Arc<f64>, f64)> = cfg
        .arcs()
        .filter(|a| !a.is_empty())
        .map(|a| (a, wrap(a.anchor + a.center_offset(), len)))
        .collect();
    arcs.sort_by(|p, q| p.1.total_cmp(&q.1));
    let n = arcs.len();
    (0..n)
        .map(|k| {
            let (a, center) = arcs[k];
            let q = arcs[(k + 1) % n].0;
            let start = wrap(a.anchor + a.lo, len);
            let gap_after = if n == 1 {
                len - a.length()
            } else {
                wrap(q.anchor - a.anchor, len) + q.lo - a.hi
            };
            Span {
                start,
                end: start + a.length(),
                center,
                half: 0.5 * a.length(),
                gap_after,
                index: a.index,
            }
        })
        .collect()
}

/// Graded CDT mesh whose boundary polygon is inscribed in the curve.
///
/// Arc endpoints are boundary vertices; each arc gets at least `n_min` edges, graded
/// geometrically toward its endpoints.
pub fn triangulate(
    curve: &dyn BoundaryCurve<f64>,
    cfg: Option<&AlternationConfig<f64>>,
    opts: &MeshOptions,
) -> Result<Mesh, MeshError> {
    check_options(opts)?;
    let len = curve.length();
    let arcs = cfg.map(sorted_arcs).unwrap_or_default();
    let mut s_pts: Vec<f64> = Vec::new();
    let mut tags: Vec<Tag> = Vec::new();
    if arcs.is_empty() {
        let n = ((len / opts.hb() - 1e-9).ceil() as usize).max(3);
        for k in 0..n {
            s_pts.push(len * k as f64 / n as f64);
            tags.push(Tag::Neumann);
        }
    } else {
        let floor = opts.floor * len;
        let ends: Vec<f64> = arcs
            .iter()
            .map(|sp| {
                let size = opts.hb().min(2.0 * sp.half / opts.n_min as f64);
                if size < floor {
                    Err(MeshError::ArcTooThin { arc: sp.index, size, floor })
                } else {
                    Ok(size)
                }
            })
            .collect::<Result<_, _>>()?;
        for (k, sp) in arcs.iter().enumerate() {
            let next = (k + 1) % arcs.len();
            let (a, b) = (sp.start, sp.end);
            let c = b + sp.gap_after;
            let sf = SizeField::new(2.0 * sp.half, ends[k], ends[k], opts.hb(), opts.ratio);
            s_pts.push(a);
            tags.push(Tag::Dirichlet);
            for x in sf.subdivide(opts.n_min) {
                s_pts.push(a + x);
                tags.push(Tag::Dirichlet);
            }
            let gap = SizeField::new(c - b, ends[k], ends[next], opts.hb(), opts.ratio);
            s_pts.push(b);
            tags.push(Tag::Neumann);
            for x in gap.subdivide(1) {
                s_pts.push(b + x);
                tags.push(Tag::Neumann);
            }
        }
    }
    // An arc straddling s = 0 starts near S; keep the sequence increasing.
    for i in 1..s_pts.len() {
        while s_pts[i] < s_pts[i - 1] {
            s_pts[i] += len;
        }
    }
    let n = s_pts.len();
    let polygon: Vec<[f64; 2]> = s_pts.iter().map(|&s| curve.point(s)).collect();
    let band = band_points(curve, opts, &[]);
    let (vertices, triangles) = fill_polygon(&polygon, &band, opts)?;
    let s0 = s_pts[0];
    let boundary_edges = (0..n)
        .map(|i| {
            let t1 = if i + 1 < n { s_pts[i + 1] } else { s0 + len };
            BoundaryEdge {
                v: [i, (i + 1) % n],
                base: 0.0,
                t: [s_pts[i], t1],
                tag: tags[i],
                param: EdgeParam::Linear,
            }
        })
        .collect();
    let nv = vertices.len();
    let nt = triangles.len();
    let mut mesh = Mesh {
        vertices,
        charts: vec![None; nv],
        triangles,
        triangle_patch: vec![None; nt],
        blends: vec![None; nt],
        patches: Vec::new(),
        boundary_edges,
        length: len,
        h_max: 0.0,
    };
    mesh.compute_h_max();
    mesh.validate()?;
    Ok(mesh)
}

/// Triangulates a simple ccw polygon and refines its interior. Polygon vertices keep
/// their indices; Steiner points follow.
fn fill_polygon(
    polygon: &[[f64; 2]],
    extra: &[[f64; 2]],
    opts: &MeshOptions,
) -> Result<(Vec<[f64; 2]>, Vec<[usize; 3]>), MeshError> {
    let n = polygon.len();
    let pts: Vec<Point2<f64>> = polygon.iter().map(|p| Point2::new(p[0], p[1])).collect();
    let edges: Vec<[usize; 2]> = (0..n).map(|i| [i, (i + 1) % n]).collect();
    let mut conflicts = 0usize;
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::try_bulk_load_cdt(pts, edges, |_| conflicts += 1)
        .map_err(|e| MeshError::Triangulation(format!("{e:?}")))?;
    if conflicts > 0 || cdt.num_vertices() != n {
        return Err(MeshError::Triangulation(format!(
            "boundary polygon self-intersects ({conflicts} conflicting edges, {} of {n} vertices kept)",
            cdt.num_vertices()
        )));
    }
    for p in extra {
        cdt.insert(Point2::new(p[0], p[1]))
            .map_err(|e| MeshError::Triangulation(format!("{e:?}")))?;
    }
    let params = RefinementParameters::<f64>::new()
        .exclude_outer_faces(true)
        .keep_constraint_edges()
        .with_max_allowed_area(0.5 * opts.h * opts.h)
        .with_angle_limit(AngleLimit::from_deg(opts.min_angle_deg))
        .with_max_additional_vertices(opts.max_vertices);
    let result = cdt.refine(params);
    if !result.refinement_complete {
        return Err(MeshError::Refinement(format!(
            "vertex budget of {} exhausted; increase h or the budget",
            opts.max_vertices
        )));
    }
    let excluded: HashSet<usize> = result.excluded_faces.iter().map(|f| f.index()).collect();
    let vertices: Vec<[f64; 2]> = cdt
        .vertices()
        .map(|v| {
            let p = v.position();
            [p.x, p.y]
        })
        .collect();
    for (i, p) in polygon.iter().enumerate() {
        if vertices[i] != *p {
            return Err(MeshError::Triangulation("vertex order not preserved".into()));
        }
    }
    let triangles = cdt
        .inner_faces()
        .filter(|f| !excluded.contains(&f.fix().index()))
        .map(|f| f.vertices().map(|v| v.fix().index()))
        .collect();
    Ok((vertices, triangles))
}

/// Interior rings parallel to the boundary that grade the mesh from `boundary_h` to
/// `h`. Points inside `(center, radius)` discs, enlarged by the local spacing, are skipped.
fn band_points(curve: &dyn BoundaryCurve<f64>, opts: &MeshOptions, keep_out: &[([f64; 2], f64)]) -> Vec<[f64; 2]> {
    let hb = opts.hb();
    if hb >= opts.h {
        return Vec::new();
    }
    let len = curve.length();
    let samples = 512;
    let kmax = (0..samples)
        .map(|i| curve.curvature(len * i as f64 / samples as f64).abs())
        .fold(0.0, f64::max);
    let depth_cap = if kmax > 0.0 { 0.5 / kmax } else { f64::INFINITY };
    let mut out = Vec::new();
    let mut depth = 0.87 * hb;
    let mut ring = 0;
    loop {
        let size = (hb + opts.band_growth * depth).min(opts.h);
        if size >= opts.h || depth > depth_cap {
            break;
        }
        let n = (len / size).ceil() as usize;
        let shift = if ring % 2 == 0 { 0.0 } else { 0.5 };
        for i in 0..n {
            let s = len * (i as f64 + shift) / n as f64;
            let p = curve.point(s);
            let nu = curve.inward_normal(s);
            let q = [p[0] + depth * nu[0], p[1] + depth * nu[1]];
            let blocked = keep_out.iter().any(|(c, r)| {
                let d = ((q[0] - c[0]).powi(2) + (q[1] - c[1]).powi(2)).sqrt();
                d < r + size
            });
            if !blocked {
                out.push(q);
            }
        }
        depth += 0.87 * size;
        ring += 1;
    }
    out
}

struct Feature {
    center: f64,
    half: f64,
    gap_before: f64,
    gap_after: f64,
}

/// Mesh with every short feature (arc or gap, per `popts.target`) inside a conformal patch.
///
/// Falls back to [`triangulate`] on a configuration without arcs.
pub fn triangulate_patched(
    curve: &dyn BoundaryCurve<f64>,
    cfg: &AlternationConfig<f64>,
    opts: &MeshOptions,
    popts: &PatchOptions,
) -> Result<Mesh, MeshError> {
    check_options(opts)?;
    let len = curve.length();
    let arcs = sorted_arcs(cfg);
    if arcs.is_empty() {
        return triangulate(curve, None, opts);
    }
    let na = arcs.len();
    let d_total: f64 = arcs.iter().map(|a| 2.0 * a.half).sum();
    let target = match popts.target {
        PatchTarget::Auto if d_total <= len - d_total => Tag::Dirichlet,
        PatchTarget::Auto => Tag::Neumann,
        PatchTarget::Dirichlet => Tag::Dirichlet,
        PatchTarget::Neumann => Tag::Neumann,
    };
    let features: Vec<Feature> = (0..na)
        .map(|k| {
            let a = arcs[k];
            let prev = arcs[(k + na - 1) % na];
            let next = arcs[(k + 1) % na];
            if target == Tag::Dirichlet {
                Feature {
                    center: a.center,
                    half: a.half,
                    gap_before: prev.gap_after,
                    gap_after: a.gap_after,
                }
            } else {
                Feature {
                    center: wrap(a.center + a.half + 0.5 * a.gap_after, len),
                    half: 0.5 * a.gap_after,
                    gap_before: 2.0 * a.half,
                    gap_after: 2.0 * next.half,
                }
            }
        })
        .collect();
    let other = if target == Tag::Dirichlet { Tag::Neumann } else { Tag::Dirichlet };

    let mut grids: Vec<PatchGrid> = Vec::with_capacity(features.len());
    for f in &features {
        let room = f.gap_before.min(f.gap_after);
        let reach = popts.reach * room;
        let radius = f.half + reach;
        let angular = popts.angular.max((std::f64::consts::PI * radius / opts.h).ceil() as usize);
        let spec = PatchSpec {
            center: f.center,
            half: f.half,
            reach,
            room: 0.5 * room,
            feature: target,
            angular,
            growth: popts.growth,
            max_step: popts.max_step,
        };
        grids.push(build_patch(curve, &spec)?);
    }

    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut charts: Vec<Option<(usize, [f64; 2])>> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut triangle_patch: Vec<Option<usize>> = Vec::new();
    let mut blends: Vec<Option<Blend>> = Vec::new();
    let mut ids: Vec<Vec<Vec<usize>>> = Vec::new();
    for (p, g) in grids.iter().enumerate() {
        let mut grid_ids = Vec::with_capacity(g.layers());
        for i in 0..g.layers() {
            let mut row = Vec::with_capacity(g.m + 1);
            for k in 0..=g.m {
                row.push(vertices.len());
                vertices.push(g.pos[i][k]);
                charts.push(Some((p, g.zeta[i][k])));
            }
            grid_ids.push(row);
        }
        for i in 0..g.layers() - 1 {
            for k in 0..g.m {
                let v00 = grid_ids[i][k];
                let v10 = grid_ids[i + 1][k];
                let v11 = grid_ids[i + 1][k + 1];
                let v01 = grid_ids[i][k + 1];
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
                triangle_patch.push(Some(p));
                triangle_patch.push(Some(p));
                blends.push((i + 2 == g.layers()).then(|| Blend {
                    a: g.zeta[i + 1][k],
                    b: g.zeta[i + 1][k + 1],
                    c: g.zeta[i][k],
                }));
                blends.push(None);
            }
        }
        ids.push(grid_ids);
    }

    // Outer polygon: each patch interface from the top (k = m) to the bottom (k = 0),
    // then curve points up to the next patch.
    let mut polygon: Vec<[f64; 2]> = Vec::new();
    let mut poly_ids: Vec<usize> = Vec::new();
    let mut boundary_edges: Vec<BoundaryEdge> = Vec::new();
    let np = grids.len();
    let end_size = |g: &PatchGrid| {
        let l = g.layers();
        (g.t_bottom[l - 1] - g.t_bottom[l - 2]).min(g.t_top[l - 2] - g.t_top[l - 1]).min(opts.hb())
    };
    for p in 0..np {
        let g = &grids[p];
        let l = g.layers();
        let half = g.patch.half;
        let c = g.patch.center;
        let gi = &ids[p];
        for k in (0..=g.m).rev() {
            polygon.push(vertices[gi[l - 1][k]]);
            poly_ids.push(gi[l - 1][k]);
        }
        for i in (0..l - 1).rev() {
            boundary_edges.push(BoundaryEdge {
                v: [gi[i + 1][g.m], gi[i][g.m]],
                base: c,
                t: [g.t_top[i + 1], g.t_top[i]],
                tag: other,
                param: EdgeParam::Cosh { half },
            });
        }
        for k in (0..g.m).rev() {
            boundary_edges.push(BoundaryEdge {
                v: [gi[0][k + 1], gi[0][k]],
                base: c,
                t: [g.t_left[k + 1], g.t_left[k]],
                tag: target,
                param: EdgeParam::Cos { half },
            });
        }
        for i in 0..l - 1 {
            boundary_edges.push(BoundaryEdge {
                v: [gi[i][0], gi[i + 1][0]],
                base: c,
                t: [g.t_bottom[i], g.t_bottom[i + 1]],
                tag: other,
                param: EdgeParam::Cosh { half },
            });
        }
        let q = (p + 1) % np;
        let h = &grids[q];
        let s_a = c + g.t_bottom[l - 1];
        let mut s_b = h.patch.center + h.t_top[h.layers() - 1];
        while s_b <= s_a {
            s_b += len;
        }
        let sf = SizeField::new(s_b - s_a, end_size(g), end_size(h), opts.hb(), opts.ratio);
        let mut prev_id = gi[l - 1][0];
        let mut prev_s = s_a;
        for x in sf.subdivide(1) {
            let s = s_a + x;
            let id = vertices.len();
            let pt = curve.point(s);
            vertices.push(pt);
            charts.push(None);
            polygon.push(pt);
            poly_ids.push(id);
            boundary_edges.push(BoundaryEdge {
                v: [prev_id, id],
                base: 0.0,
                t: [prev_s, s],
                tag: other,
                param: EdgeParam::Linear,
            });
            prev_id = id;
            prev_s = s;
        }
        let hl = h.layers();
        boundary_edges.push(BoundaryEdge {
            v: [prev_id, ids[q][hl - 1][h.m]],
            base: 0.0,
            t: [prev_s, s_b],
            tag: other,
            param: EdgeParam::Linear,
        });
    }

    let keep_out: Vec<([f64; 2], f64)> = grids
        .iter()
        .map(|g| (curve.point(g.patch.center), g.patch.half + g.reach))
        .collect();
    let band = band_points(curve, opts, &keep_out);
    let (outer_vertices, outer_triangles) = fill_polygon(&polygon, &band, opts)?;
    let mut map = poly_ids.clone();
    for v in outer_vertices.iter().skip(polygon.len()) {
        map.push(vertices.len());
        vertices.push(*v);
        charts.push(None);
    }
    for t in outer_triangles {
        triangles.push(t.map(|v| map[v]));
        triangle_patch.push(None);
        blends.push(None);
    }

    let mut mesh = Mesh {
        vertices,
        charts,
        triangles,
        triangle_patch,
        blends,
        patches: grids.iter().map(|g| g.patch).collect(),
        boundary_edges,
        length: len,
        h_max: 0.0,
    };
    mesh.compute_h_max();
    mesh.validate()?;
    Ok(mesh)
}

impl Mesh {
    /// Red refinement: every triangle splits into four and boundary midpoints move onto
    /// the curve. Patch triangles split in `ζ`, and blended ones keep their parent's map.
    pub fn refine_uniform(&self, curve: &dyn BoundaryCurve<f64>) -> Result<Mesh, MeshError> {
        let frames: Vec<Frame> = self.patches.iter().map(|p| Frame::new(curve, p.center, p.half)).collect();
        let mut vertices = self.vertices.clone();
        let mut charts = self.charts.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let tm = match e.param {
                EdgeParam::Linear => 0.5 * (e.t[0] + e.t[1]),
                param => {
                    let sign = if e.t[0] + e.t[1] < 0.0 { -1.0 } else { 1.0 };
                    param.offset(0.5 * (param.coordinate(e.t[0]) + param.coordinate(e.t[1])), sign)
                }
            };
            let chart = match (self.charts[e.v[0]], self.charts[e.v[1]], e.param) {
                (Some((p, _)), Some((q, _)), EdgeParam::Cosh { .. } | EdgeParam::Cos { .. }) if p == q => {
                    let z = frames[p].zeta(tm);
                    Some((p, [z.re, z.im]))
                }
                _ => None,
            };
            let id = vertices.len();
            vertices.push(curve.point(e.base + tm));
            charts.push(chart);
            mid.insert((e.v[0].min(e.v[1]), e.v[0].max(e.v[1])), id);
            boundary_edges.push(BoundaryEdge { v: [e.v[0], id], t: [e.t[0], tm], ..*e });
            boundary_edges.push(BoundaryEdge { v: [id, e.v[1]], t: [tm, e.t[1]], ..*e });
        }
        let nt = self.triangles.len();
        let mut triangles = Vec::with_capacity(4 * nt);
        let mut triangle_patch = Vec::with_capacity(4 * nt);
        let mut blends = Vec::with_capacity(4 * nt);
        for (t, tri) in self.triangles.iter().enumerate() {
            let owner = self.triangle_patch[t];
            let mut m = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let zeta = owner.map(|p| {
                    let (za, zb) = (self.chart_in(a, p), self.chart_in(b, p));
                    (p, [0.5 * (za[0] + zb[0]), 0.5 * (za[1] + zb[1])])
                });
                let id = *mid.entry(key).or_insert_with(|| {
                    let pos = match (zeta, self.blends[t]) {
                        (None, _) => {
                            let (pa, pb) = (self.vertices[a], self.vertices[b]);
                            [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
                        }
                        (Some((p, z)), None) => frames[p].physical(Complex64::new(z[0], z[1])),
                        (Some((p, z)), Some(bl)) => frames[p].from_scaled(bl.map(&self.patches[p], z[0], z[1])),
                    };
                    vertices.push(pos);
                    charts.push(None);
                    vertices.len() - 1
                });
                if charts[id].is_none() {
                    charts[id] = zeta;
                }
                m[k] = id;
            }
            let [a, b, c] = *tri;
            for child in [[a, m[0], m[2]], [m[0], b, m[1]], [m[2], m[1], c], [m[0], m[1], m[2]]] {
                triangles.push(child);
                triangle_patch.push(owner);
                blends.push(self.blends[t]);
            }
        }
        let mut out = Mesh {
            vertices,
            charts,
            triangles,
            triangle_patch,
            blends,
            patches: self.patches.clone(),
            boundary_edges,
            length: self.length,
            h_max: 0.0,
        };
        out.compute_h_max();
        out.validate()?;
        Ok(out)
    }

    fn chart_in(&self, v: usize, p: usize) -> [f64; 2] {
        match self.charts[v] {
            Some((q, z)) if q == p => z,
            _ => panic!("vertex {v} has no chart in patch {p}"),
        }
    }
}
