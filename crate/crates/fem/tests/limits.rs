use freqbc_core::bessel::radial_ground_boundary_mass;
use freqbc_core::geometry::{AlternationConfig, ArcQuantities, Circle, LengthRule, ThetaMap};
use freqbc_fem::asymptotics::{lambda1_two_term, robin_first_order, two_sided_check, BoundRecord, Theorem};
use freqbc_fem::homogenized::{boundary_gram, limit_operators, orthogonalize_all};
use freqbc_fem::mesh::triangulate;
use freqbc_fem::{
    disk_oracle, normal_derivative_integral, solve_eigs_with, solve_limit, weighted_orthogonalize, LimitKind, Mesh,
    MeshOptions, SolveOptions,
};
use std::f64::consts::PI;

fn disk(h: f64) -> Mesh {
    triangulate(&Circle::unit(), None, &MeshOptions::new(h)).unwrap()
}

fn identity() -> ThetaMap<f64> {
    ThetaMap::identity(2.0 * PI)
}

fn opts(k: usize) -> SolveOptions {
    SolveOptions::new(k, 1e-10)
}

#[test]
fn limit_spectra_match_bessel_roots() {
    let m = disk(0.03);
    let map = identity();
    let cases = [
        (LimitKind::Dirichlet, 5.783185962946784),
        (LimitKind::Neumann, 0.0),
        (LimitKind::RobinA { a: 1.0 }, 1.576_992_730_808_6),
    ];
    for (kind, want) in cases {
        let s = solve_limit(&kind, &m, &map, &opts(4)).unwrap();
        let oracle = disk_oracle(&kind, 4).values(4);
        assert!((oracle[0] - want).abs() < 1e-6, "{kind:?}: oracle {}", oracle[0]);
        for k in 0..4 {
            let err = (s.eigenvalues[k] - oracle[k]).abs() / oracle[k].max(1.0);
            assert!(err < 5e-3, "{kind:?} mode {k}: {} vs {}", s.eigenvalues[k], oracle[k]);
        }
    }
    let n = solve_limit(&LimitKind::Neumann, &m, &map, &opts(3)).unwrap();
    let j11 = 1.841_183_781_340_659_f64;
    assert!((n.eigenvalues[1] - j11 * j11).abs() < 1e-2);
    assert_eq!(n.clusters[1], n.clusters[2]);
}

#[test]
fn dirichlet_flux_obeys_the_rellich_identity() {
    // On the unit disk x·ν = 1, so ∮ (∂ψ/∂ν)² ds = 2λ for a normalized mode.
    let m = disk(0.04);
    let (tagged, ops) = limit_operators(&LimitKind::Dirichlet, &m, &identity()).unwrap();
    let s = solve_eigs_with(&ops, &opts(1)).unwrap();
    let flux = normal_derivative_integral(&ops, &s, &tagged, &|_| 1.0, 0).unwrap();
    let want = 2.0 * s.eigenvalues[0];
    assert!((flux - want).abs() < 1e-2 * want, "{flux} vs {want}");
    let zero = normal_derivative_integral(&ops, &s, &tagged, &|_| 0.0, 0).unwrap();
    assert_eq!(zero, 0.0);
}

#[test]
fn flux_recovery_needs_a_dirichlet_boundary() {
    let m = disk(0.2);
    let (tagged, ops) = limit_operators(&LimitKind::Neumann, &m, &identity()).unwrap();
    let s = solve_eigs_with(&ops, &opts(1)).unwrap();
    assert!(normal_derivative_integral(&ops, &s, &tagged, &|_| 1.0, 0).is_err());
}

#[test]
fn weighted_orthogonalization_diagonalizes_the_boundary_gram() {
    let m = disk(0.05);
    let map = identity();
    let (tagged, ops) = limit_operators(&LimitKind::Neumann, &m, &map).unwrap();
    let mut s = solve_eigs_with(&ops, &opts(3)).unwrap();
    // The discrete doublet splits by O(h²) on an unstructured mesh.
    s.recluster(1e-2);
    let w = |s: f64| 1.0 + 0.5 * s.cos();
    let c = s.clusters[1];
    let r = weighted_orthogonalize(&s, &tagged, &w, c).unwrap();
    let members = r.cluster_members(c);
    assert_eq!(members.len(), 2);
    let g = boundary_gram(&r, &tagged, &w, &members).unwrap();
    assert!(g[0][1].abs() < 1e-10 * g[0][0].abs());
    for &i in &members {
        for &j in &members {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((ops.m.form(&r.vectors[i], &r.vectors[j]) - want).abs() < 1e-10);
        }
    }
    // A singleton cluster is returned untouched.
    let single = weighted_orthogonalize(&s, &tagged, &w, s.clusters[0]).unwrap();
    assert_eq!(single.vectors[0], s.vectors[0]);
    assert!(weighted_orthogonalize(&s, &tagged, &w, 99).is_err());
}

#[test]
fn orthogonalization_rejects_modes_that_vanish_on_the_boundary() {
    let m = disk(0.1);
    let (tagged, ops) = limit_operators(&LimitKind::Neumann, &m, &identity()).unwrap();
    let mut s = solve_eigs_with(&ops, &opts(3)).unwrap();
    s.recluster(1e-2);
    assert!(weighted_orthogonalize(&s, &tagged, &|_| 0.0, s.clusters[1]).is_err());
}

#[test]
fn robin_zero_is_neumann_and_robin_decreases_toward_it() {
    let m = disk(0.08);
    let map = identity();
    let n = solve_limit(&LimitKind::Neumann, &m, &map, &opts(4)).unwrap();
    let r0 = solve_limit(&LimitKind::RobinA { a: 0.0 }, &m, &map, &opts(4)).unwrap();
    for k in 0..4 {
        assert!((n.eigenvalues[k] - r0.eigenvalues[k]).abs() < 1e-9);
    }
    let mut prev = solve_limit(&LimitKind::Dirichlet, &m, &map, &opts(1)).unwrap().eigenvalues[0];
    for a in [8.0, 2.0, 0.5, 0.1, 0.01] {
        let v = solve_limit(&LimitKind::RobinA { a }, &m, &map, &opts(1)).unwrap().eigenvalues[0];
        assert!(v < prev && v > n.eigenvalues[0], "A = {a}: {v}");
        prev = v;
    }
}

fn scaled(n: usize, alpha: f64, beta: f64, ln_eta: f64) -> AlternationConfig<f64> {
    AlternationConfig::generate(&identity(), n, &LengthRule::Scaled { alpha, beta }, ln_eta.exp(), 0.0, 0.0).unwrap()
}

#[test]
fn second_term_vanishes_for_unit_profile_and_is_negative_otherwise() {
    let m = disk(0.05);
    let map = identity();
    let (a, mu) = (0.25, 0.5);
    let (tagged, ops) = limit_operators(&LimitKind::Corrected { a, mu }, &m, &map).unwrap();
    let s = solve_eigs_with(&ops, &opts(3)).unwrap();
    let s = orthogonalize_all(&s, &tagged, &|x| map.theta_prime(x)).unwrap();

    let unit = ArcQuantities::new(&scaled(16, 0.5, 0.5, -4.0), &map);
    for k in 0..3 {
        let l1 = lambda1_two_term(&s, &tagged, &map, &unit, k, a, mu).unwrap();
        assert!(l1.abs() < 1e-12, "mode {k}: {l1}");
    }

    // Constant profile d: Λ₁ = (A+μ)² ln d ∮ Ψ² ds.
    let d: f64 = 0.5;
    let half = ArcQuantities::new(&scaled(16, 0.25, 0.25, -4.0), &map);
    for k in 0..3 {
        let l1 = lambda1_two_term(&s, &tagged, &map, &half, k, a, mu).unwrap();
        let trace = robin_first_order(&s, &tagged, &map, k).unwrap();
        let want = (a + mu).powi(2) * d.ln() * trace;
        assert!(l1 <= 0.0);
        assert!((l1 - want).abs() < 1e-10 * want.abs(), "mode {k}: {l1} vs {want}");
    }
}

#[test]
fn first_order_slope_matches_radial_oracle() {
    let map = identity();
    let m = disk(0.03);
    // The discrete Neumann ground state is the constant 1/√|Ω_h|, so ∮ ψ² = |∂Ω_h|/|Ω_h| → 2.
    let (t0, o0) = limit_operators(&LimitKind::Neumann, &m, &map).unwrap();
    let s0 = solve_eigs_with(&o0, &opts(1)).unwrap();
    let slope = robin_first_order(&s0, &t0, &map, 0).unwrap();
    let perimeter: f64 = m.boundary_edges.iter().map(|e| e.length()).sum();
    assert!((slope - perimeter / m.area()).abs() < 1e-8, "{slope}");
    assert!((slope - 2.0).abs() < 1e-3);

    let kind = LimitKind::RobinA { a: 1.0 };
    let (t1, o1) = limit_operators(&kind, &m, &map).unwrap();
    let s1 = solve_eigs_with(&o1, &opts(1)).unwrap();
    let root = disk_oracle(&kind, 1).values(1)[0].sqrt();
    let want = radial_ground_boundary_mass(root);
    let got = robin_first_order(&s1, &t1, &map, 0).unwrap();
    assert!((got - want).abs() < 2e-3 * want, "{got} vs {want}");
}

fn record(eps: f64, mu: f64, le: f64, l0: f64) -> BoundRecord {
    BoundRecord {
        family: "f".into(),
        mode: 0,
        epsilon: eps,
        mu,
        sigma: 0.0,
        lambda_eps: le,
        lambda_0: l0,
    }
}

#[test]
fn two_sided_checks_see_sign_violations() {
    let good = [record(0.25, 0.5, 1.0, 0.0), record(0.125, 0.25, 0.5, 0.0)];
    let rep = two_sided_check(&good, Theorem::NeumannEnvelope, 1e-8).unwrap();
    assert!(rep.sign_ok);
    assert!((rep.fitted - 2.0).abs() < 1e-12 && (rep.stability - 1.0).abs() < 1e-12);
    assert!(!two_sided_check(&good, Theorem::UpperDirichlet, 1e-8).unwrap().sign_ok);

    let bad = [record(0.25, 0.5, -1e-6, 0.0)];
    assert!(!two_sided_check(&bad, Theorem::NeumannEnvelope, 1e-8).unwrap().sign_ok);
    assert!(two_sided_check(&bad, Theorem::UpperDirichlet, 1e-8).unwrap().sign_ok);

    let flat = [record(0.25, 0.0, 0.9, 1.0)];
    let rep = two_sided_check(&flat, Theorem::RobinEnvelope, 1e-8).unwrap();
    assert!(rep.constants.is_empty() && rep.fitted.is_finite());
    assert!(two_sided_check(&[], Theorem::RobinEnvelope, 1e-8).is_err());
}
