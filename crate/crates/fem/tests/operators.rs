use freqbc_core::geometry::{AlternationConfig, Circle, LengthRule, ThetaMap};
use freqbc_fem::assembly::{assemble_volume, boundary_mass, local_stiffness};
use freqbc_fem::eigen::{cluster_ids, dense_symmetric_eigen, solve_pencil};
use freqbc_fem::mesh::triangulate;
use freqbc_fem::{assemble, solve_eigs, Csr, MeshOptions, SolveOptions, Tag};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn disk(h: f64) -> freqbc_fem::Mesh {
    triangulate(&Circle::unit(), None, &MeshOptions::new(h)).unwrap()
}

#[test]
fn stiffness_kills_constants_and_masses_integrate_one() {
    let mut m = disk(0.1);
    let (k, mass) = assemble_volume(&m);
    let one = vec![1.0; m.num_vertices()];
    let k1 = k.mul_vec(&one);
    assert!(k1.iter().all(|v| v.abs() < 1e-12));
    assert!((mass.form(&one, &one) - m.area()).abs() < 1e-12);
    assert!(k.asymmetry() < 1e-14 && mass.asymmetry() < 1e-14);

    let b = boundary_mass(&m, &|_| 1.0, &|_| true, 4).unwrap();
    let perimeter: f64 = m.boundary_edges.iter().map(|e| e.length()).sum();
    assert!((b.form(&one, &one) - perimeter).abs() < 1e-12);
    assert!((perimeter - 2.0 * PI).abs() < 1e-12);

    m = m.retagged(Tag::Robin);
    let ops = assemble(&m, &|s| s.cos().powi(2)).unwrap();
    assert!((ops.b.form(&one, &one) - PI).abs() < 1e-3);
}

#[test]
fn reference_element_stiffness() {
    let k = local_stiffness([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    let want = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((k[i][j] - want[i][j]).abs() < 1e-15);
        }
    }
}

#[test]
fn dirichlet_vertices_are_removed() {
    let map = ThetaMap::identity(2.0 * PI);
    let cfg = AlternationConfig::generate(&map, 8, &LengthRule::Uniform { a: 0.2, b: 0.2 }, 0.1, 0.0, 0.0).unwrap();
    let m = triangulate(&Circle::unit(), Some(&cfg), &MeshOptions::new(0.1)).unwrap();
    let ops = assemble(&m, &|_| 0.0).unwrap();
    assert!(ops.has_dirichlet());
    let dv = m.dirichlet_vertices();
    let free = ops.free_dofs();
    assert_eq!(free.len(), dv.iter().filter(|d| !**d).count());
    assert!(free.iter().all(|&i| !dv[i]));
}

/// Cyclic Jacobi rotations: an oracle independent of the library's dense solver.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    d.sort_by(f64::total_cmp);
    d
}

#[test]
fn dense_solver_diagonal() {
    let (vals, vecs) = dense_symmetric_eigen(&[vec![3.0, 0.0], vec![0.0, 2.0]]).unwrap();
    assert_eq!(vals, vec![2.0, 3.0]);
    assert!((vecs[0][1].abs() - 1.0).abs() < 1e-15);
}

#[test]
fn dense_solver_matches_jacobi_on_random_spd() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 12;
    let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| g[i][k] * g[j][k]).sum::<f64>() + if i == j { 0.5 } else { 0.0 }).collect())
        .collect();
    let (vals, vecs) = dense_symmetric_eigen(&a).unwrap();
    let oracle = jacobi_eigenvalues(a.clone());
    for (v, o) in vals.iter().zip(&oracle) {
        assert!((v - o).abs() < 1e-10 * o.abs().max(1.0), "{v} vs {o}");
    }
    for (lam, x) in vals.iter().zip(&vecs) {
        let r: f64 = (0..n).map(|i| ((0..n).map(|j| a[i][j] * x[j]).sum::<f64>() - lam * x[i]).powi(2)).sum();
        assert!(r.sqrt() < 1e-10);
    }
}

#[test]
fn lanczos_matches_dense_on_a_small_pencil() {
    let m = disk(0.25);
    let (k, mass) = assemble_volume(&m);
    let n = k.n;
    let opts = SolveOptions::new(6, 1e-10);
    let (vals, _, res) = solve_pencil(&k, &mass, &opts, -0.1).unwrap();
    assert!(res.iter().all(|r| *r < 1e-9));
    // M is SPD, so its Cholesky factor turns the pencil into a standard problem.
    let md = mass.to_dense();
    let kd = k.to_dense();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = md[i][j] - (0..j).map(|p| l[i][p] * l[j][p]).sum::<f64>();
            l[i][j] = if i == j { s.sqrt() } else { s / l[j][j] };
        }
    }
    let solve_lower = |b: &[f64]| {
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = (b[i] - (0..i).map(|p| l[i][p] * y[p]).sum::<f64>()) / l[i][i];
        }
        y
    };
    let mut c = vec![vec![0.0; n]; n];
    let cols: Vec<Vec<f64>> = (0..n).map(|j| solve_lower(&(0..n).map(|i| kd[i][j]).collect::<Vec<_>>())).collect();
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| cols[j][i]).collect();
        let z = solve_lower(&row);
        for j in 0..n {
            c[i][j] = z[j];
        }
    }
    let oracle = jacobi_eigenvalues(c);
    for (v, o) in vals.iter().zip(&oracle) {
        assert!((v - o).abs() < 1e-8 * o.abs().max(1.0), "{v} vs {o}");
    }
}

#[test]
fn neumann_ground_state_is_zero_and_normalized() {
    let m = disk(0.1);
    let ops = assemble(&m, &|_| 0.0).unwrap();
    let s = solve_eigs(&ops, 3, 1e-10).unwrap();
    assert!(s.eigenvalues[0].abs() < 1e-9, "{}", s.eigenvalues[0]);
    let u = &s.vectors[0];
    assert!((ops.m.form(u, u) - 1.0).abs() < 1e-10);
    let spread = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - u.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 1e-6);
    // The first nonzero Neumann eigenvalue of the disk is a doublet, split only by the mesh.
    let split = (s.eigenvalues[2] - s.eigenvalues[1]) / s.eigenvalues[1];
    assert!((0.0..1e-2).contains(&split), "{split}");
}

#[test]
fn clusters_group_close_values() {
    assert_eq!(cluster_ids(&[1.0, 1.0 + 1e-9, 2.0, 3.0, 3.0], 1e-6), vec![0, 0, 1, 2, 2]);
}

#[test]
fn solver_is_deterministic() {
    let m = disk(0.1);
    let ops = assemble(&m.retagged(Tag::Dirichlet), &|_| 0.0).unwrap();
    let a = solve_eigs(&ops, 4, 1e-10).unwrap();
    let b = solve_eigs(&ops, 4, 1e-10).unwrap();
    assert_eq!(a.eigenvalues, b.eigenvalues);
    assert_eq!(a.vectors, b.vectors);
}

#[test]
fn bad_requests_are_errors() {
    let m = disk(0.3);
    let ops = assemble(&m, &|_| 0.0).unwrap();
    assert!(solve_eigs(&ops, 0, 1e-10).is_err());
    assert!(solve_eigs(&ops, 3, 1e-3).is_err());
    assert!(solve_eigs(&ops, ops.n() + 1, 1e-10).is_err());
    let c = Csr::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 1.0), (1, 1, 3.0)]);
    assert_eq!(c.get(0, 0), 2.0);
}
