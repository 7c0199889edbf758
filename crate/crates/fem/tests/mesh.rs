use freqbc_core::geometry::{AlternationConfig, BoundaryCurve, Circle, Ellipse, LengthRule, ThetaMap};
use freqbc_fem::mesh::{triangulate, triangulate_patched};
use freqbc_fem::{Mesh, MeshOptions, PatchOptions, Tag};
use std::f64::consts::PI;

fn circle() -> Circle<f64> {
    Circle::unit()
}

fn uniform_arcs(n: usize, a: f64) -> AlternationConfig<f64> {
    let map = ThetaMap::identity(2.0 * PI);
    AlternationConfig::generate(&map, n, &LengthRule::Uniform { a, b: a }, 0.1, 0.0, 0.0).unwrap()
}

fn scaled_arcs(n: usize, ln_eta: f64) -> AlternationConfig<f64> {
    let map = ThetaMap::identity(2.0 * PI);
    AlternationConfig::generate(&map, n, &LengthRule::Scaled { alpha: 0.5, beta: 0.5 }, ln_eta.exp(), 0.0, 0.0).unwrap()
}

#[test]
fn plain_mesh_is_the_inscribed_polygon() {
    let m = triangulate(&circle(), None, &MeshOptions::new(0.1)).unwrap();
    m.validate().unwrap();
    let n = m.boundary_edges.len() as f64;
    let polygon = 0.5 * n * (2.0 * PI / n).sin();
    assert!((m.area() - polygon).abs() < 1e-12, "{} vs {polygon}", m.area());
}

#[test]
fn arcs_get_enough_dirichlet_edges_and_the_right_length() {
    let cfg = uniform_arcs(8, 0.1);
    let mut opts = MeshOptions::new(0.05);
    opts.n_min = 4;
    let m = triangulate(&circle(), Some(&cfg), &opts).unwrap();
    m.validate().unwrap();
    for arc in cfg.arcs() {
        let lo = arc.anchor + arc.lo;
        let hi = arc.anchor + arc.hi;
        let inside = m
            .boundary_edges
            .iter()
            .filter(|e| e.tag == Tag::Dirichlet)
            .filter(|e| {
                let mid = (e.base + 0.5 * (e.t[0] + e.t[1])).rem_euclid(2.0 * PI);
                let c = (mid - lo).rem_euclid(2.0 * PI);
                c < hi - lo
            })
            .count();
        assert!(inside >= 4, "arc {} has {inside} edges", arc.index);
    }
    // Tags are assigned on arclength intervals, so the total is exact.
    let want = cfg.dirichlet_length();
    assert!((m.tag_length(Tag::Dirichlet) - want).abs() < 1e-12, "{} vs {want}", m.tag_length(Tag::Dirichlet));
    let total = m.tag_length(Tag::Dirichlet) + m.tag_length(Tag::Neumann);
    assert!((total - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn area_converges_at_second_order() {
    let c = circle();
    let h = 0.2;
    let errs: Vec<f64> = [h, h / 2.0, h / 4.0]
        .iter()
        .map(|&h| {
            let m = triangulate(&c, None, &MeshOptions::new(h)).unwrap();
            PI - m.area()
        })
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "{errs:?}");
    }
}

#[test]
fn uniform_refinement_keeps_quality_and_order() {
    let c = circle();
    let mut m = triangulate(&c, Some(&uniform_arcs(8, 0.1)), &MeshOptions::new(0.1)).unwrap();
    let angle0 = m.min_angle_deg();
    assert!(angle0 >= 20.0, "{angle0}");
    let mut errs = vec![PI - m.area()];
    for _ in 0..2 {
        m = m.refine_uniform(&c).unwrap();
        m.validate().unwrap();
        assert!(m.min_angle_deg() >= 20.0);
        errs.push(PI - m.area());
    }
    for w in errs.windows(2) {
        assert!((w[0] / w[1] - 4.0).abs() < 0.3, "{errs:?}");
    }
}

#[test]
fn boundary_quadrature_follows_the_curve() {
    let m = triangulate(&circle(), None, &MeshOptions::new(0.2)).unwrap();
    for order in [2, 4, 8] {
        let q = m.boundary_quadrature(order).unwrap();
        let total: f64 = q.iter().map(|n| n.weight).sum();
        assert!((total - 2.0 * PI).abs() < 1e-10);
        let c1: f64 = q.iter().map(|n| n.weight * n.s.cos()).sum();
        assert!(c1.abs() < 1e-10);
    }
    let q = m.boundary_quadrature(8).unwrap();
    let c2: f64 = q.iter().map(|n| n.weight * n.s.cos().powi(2)).sum();
    assert!((c2 - PI).abs() < 1e-8);
}

#[test]
fn ellipse_meshes_are_valid() {
    let e = Ellipse::new([0.0, 0.0], 1.5, 0.8);
    let map = ThetaMap::identity(e.length());
    let cfg = AlternationConfig::generate(&map, 12, &LengthRule::Uniform { a: 0.2, b: 0.3 }, 0.1, 0.0, 0.0).unwrap();
    let m = triangulate(&e, Some(&cfg), &MeshOptions::new(0.1)).unwrap();
    m.validate().unwrap();
    assert!((m.area() - PI * 1.5 * 0.8).abs() < 1e-2);
}

#[test]
fn patched_meshes_resolve_exponentially_small_arcs() {
    let c = circle();
    for ln_eta in [-10.0, -60.0] {
        let cfg = scaled_arcs(16, ln_eta);
        let m = triangulate_patched(&c, &cfg, &MeshOptions::new(0.1).with_boundary_h(0.05), &PatchOptions::default()).unwrap();
        m.validate().unwrap();
        assert!(!m.patches.is_empty());
        let want = cfg.dirichlet_length();
        let got = m.tag_length(Tag::Dirichlet);
        assert!((got - want).abs() <= 1e-12 * want.max(1e-300) + 1e-15 * 2.0 * PI, "{got:e} vs {want:e}");
        // Blended interface triangles carry no overlap: the area stays near the polygon's.
        assert!((m.area() - PI).abs() < 5e-3, "{}", m.area());
    }
}

#[test]
fn patched_refinement_converges_in_area() {
    let c = circle();
    let cfg = scaled_arcs(8, -8.0);
    let mut m = triangulate_patched(&c, &cfg, &MeshOptions::new(0.1).with_boundary_h(0.05), &PatchOptions::default()).unwrap();
    let mut errs = vec![PI - m.area()];
    for _ in 0..2 {
        m = m.refine_uniform(&c).unwrap();
        m.validate().unwrap();
        errs.push(PI - m.area());
    }
    for w in errs.windows(2) {
        let r = w[0] / w[1];
        assert!((3.5..4.5).contains(&r), "{errs:?}");
    }
    assert_eq!(m.tag_length(Tag::Dirichlet), m.tag_length(Tag::Dirichlet));
    assert!(!m.patches.is_empty());
}

#[test]
fn text_roundtrip_is_exact() {
    let c = circle();
    let cfg = scaled_arcs(8, -6.0);
    let m = triangulate_patched(&c, &cfg, &MeshOptions::new(0.2).with_boundary_h(0.1), &PatchOptions::default()).unwrap();
    assert!(m.blends.iter().any(|b| b.is_some()));
    let back = Mesh::from_text(&m.to_text()).unwrap();
    assert_eq!(back.vertices, m.vertices);
    assert_eq!(back.triangles, m.triangles);
    assert_eq!(back.charts, m.charts);
    assert_eq!(back.blends, m.blends);
    assert_eq!(back.boundary_edges, m.boundary_edges);
    assert_eq!(back.to_text(), m.to_text());
}

#[test]
fn arcs_below_the_floor_are_rejected() {
    let cfg = scaled_arcs(8, -40.0);
    assert!(triangulate(&circle(), Some(&cfg), &MeshOptions::new(0.1)).is_err());
}
