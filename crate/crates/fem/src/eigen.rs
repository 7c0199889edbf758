//! Lowest eigenpairs of `A u = λ M u` by shift-invert Lanczos with locking.

use crate::assembly::OperatorSet;
use crate::sparse::Csr;
use faer::linalg::solvers::Solve;
use faer::{Mat, Par, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("requested {k} modes but only {free} free degrees of freedom")]
    TooManyModes { k: usize, free: usize },
    #[error("tolerance {0:e} outside [1e-12, 1e-6]")]
    BadTolerance(f64),
    #[error("factorization of A - σM failed for every shift down to σ = {0}")]
    Factorization(f64),
    #[error("Lanczos did not converge: {locked} of {k} modes locked, worst residual {residual:e}")]
    NoConvergence { k: usize, locked: usize, residual: f64 },
    #[error("dense eigensolver failed")]
    Dense,
    #[error("{0}")]
    Invalid(String),
}

/// Eigenvalues in ascending order with M-orthonormal eigenvectors on all vertices
/// (zero on constrained vertices).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `‖A u − λ M u‖ / (‖A u‖ + |λ| ‖M u‖)`.
    pub residuals: Vec<f64>,
    /// Cluster id per eigenvalue; equal ids are treated as one multiple eigenvalue.
    pub clusters: Vec<usize>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Indices belonging to cluster `id`.
    pub fn cluster_members(&self, id: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.clusters[i] == id).collect()
    }

    /// Regroups eigenvalues whose relative gap is at most `tol`.
    pub fn recluster(&mut self, tol: f64) {
        self.clusters = cluster_ids(&self.eigenvalues, tol);
    }

    /// CSV with columns `index,eigenvalue,residual,cluster`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue,residual,cluster\n");
        for i in 0..self.len() {
            let _ = writeln!(out, "{},{:e},{:e},{}", i + 1, self.eigenvalues[i], self.residuals[i], self.clusters[i]);
        }
        out
    }

    /// Per-vertex dump `x,y,u1,...,uk` for plotting.
    pub fn fields_csv(&self, vertices: &[[f64; 2]]) -> String {
        let mut out = String::from("x,y");
        for i in 0..self.len() {
            let _ = write!(out, ",u{}", i + 1);
        }
        out.push('\n');
        for (v, p) in vertices.iter().enumerate() {
            let _ = write!(out, "{:e},{:e}", p[0], p[1]);
            for u in &self.vectors {
                let _ = write!(out, ",{:e}", u[v]);
            }
            out.push('\n');
        }
        out
    }
}

/// Assigns cluster ids to ascending values: neighbours within relative gap `tol` share an id.
pub fn cluster_ids(values: &[f64], tol: f64) -> Vec<usize> {
    let mut ids = Vec::with_capacity(values.len());
    let mut id = 0;
    for i in 0..values.len() {
        if i > 0 {
            let (a, b) = (values[i - 1], values[i]);
            let scale = a.abs().max(b.abs()).max(1e-12);
            if (b - a).abs() > tol * scale {
                id += 1;
            }
        }
        ids.push(id);
    }
    ids
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub k: usize,
    pub tol: f64,
    pub cluster_tol: f64,
    /// Krylov dimension per run; `None` picks `max(3k + 30, 60)`.
    pub krylov: Option<usize>,
    pub seed: u64,
    pub max_runs: usize,
    /// Overrides the default shift.
    pub shift: Option<f64>,
}

impl SolveOptions {
    pub fn new(k: usize, tol: f64) -> Self {
        SolveOptions {
            k,
            tol,
            cluster_tol: 1e-6,
            krylov: None,
            seed: 0x5eed,
            max_runs: 0,
            shift: None,
        }
    }
}

/// Lowest `k` eigenpairs of `(K + B_w) u = λ M u` on the free vertices.
pub fn solve_eigs(ops: &OperatorSet, k: usize, tol: f64) -> Result<Spectrum, EigenError> {
    solve_eigs_with(ops, &SolveOptions::new(k, tol))
}

pub fn solve_eigs_with(ops: &OperatorSet, opts: &SolveOptions) -> Result<Spectrum, EigenError> {
    let free = ops.free_dofs();
    let a = ops.operator().restrict(&free);
    let m = ops.m.restrict(&free);
    let shift = opts.shift.unwrap_or(if ops.has_dirichlet() { 0.0 } else { -0.1 });
    let (vals, vecs, res) = solve_pencil(&a, &m, opts, shift)?;
    let n = ops.n();
    let vectors = vecs
        .into_iter()
        .map(|x| {
            let mut u = vec![0.0; n];
            for (k, &i) in free.iter().enumerate() {
                u[i] = x[k];
            }
            u
        })
        .collect();
    let clusters = cluster_ids(&vals, opts.cluster_tol);
    Ok(Spectrum {
        eigenvalues: vals,
        vectors,
        residuals: res,
        clusters,
    })
}

struct ShiftInvert {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl ShiftInvert {
    fn new(a: &Csr, m: &Csr, sigma: f64) -> Option<Self> {
        let shifted = a.combine(1.0, m, -sigma).to_faer().ok()?;
        let llt = shifted.sp_cholesky(Side::Lower).ok()?;
        Some(ShiftInvert { llt })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        self.llt.solve_in_place(x.as_mut());
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Symmetric dense eigendecomposition, ascending; columns of the second result are vectors.
pub fn dense_symmetric_eigen(a: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>), EigenError> {
    let n = a.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mat = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (a[i][j] + a[j][i]));
    let evd = mat.self_adjoint_eigen(Side::Lower).map_err(|_| EigenError::Dense)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    let vals = order.iter().map(|&i| s[i]).collect();
    let vecs = order.iter().map(|&j| (0..n).map(|i| u[(i, j)]).collect()).collect();
    Ok((vals, vecs))
}

/// `‖Ax − λMx‖ / (‖Ax‖ + (|λ| + |σ|)‖Mx‖)`; the shift keeps a kernel vector measurable.
fn relative_residual(a: &Csr, m: &Csr, lam: f64, sigma: f64, x: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let mx = m.mul_vec(x);
    let r: Vec<f64> = ax.iter().zip(&mx).map(|(p, q)| p - lam * q).collect();
    norm2(&r) / (norm2(&ax) + (lam.abs() + sigma.abs()) * norm2(&mx)).max(f64::MIN_POSITIVE)
}

/// Core solver on an already restricted pencil `(a, m)`.
pub fn solve_pencil(
    a: &Csr,
    m: &Csr,
    opts: &SolveOptions,
    shift: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<f64>), EigenError> {
    faer::set_global_parallelism(Par::Seq);
    let n = a.n;
    let k = opts.k;
    if k == 0 || k > n {
        return Err(EigenError::TooManyModes { k, free: n });
    }
    if !(1e-12..=1e-6).contains(&opts.tol) {
        return Err(EigenError::BadTolerance(opts.tol));
    }
    let mut sigma = shift;
    let mut op = None;
    for _ in 0..4 {
        op = ShiftInvert::new(a, m, sigma);
        if op.is_some() {
            break;
        }
        sigma -= 1.0;
    }
    let op = op.ok_or(EigenError::Factorization(sigma))?;

    let dim = opts.krylov.unwrap_or((3 * k + 30).max(60)).min(n);
    let max_runs = if opts.max_runs > 0 { opts.max_runs } else { 4 * k + 8 };
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut locked_m: Vec<Vec<f64>> = Vec::new();
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut worst = f64::INFINITY;
    let mut done = false;

    for run in 0..max_runs {
        if locked.len() >= n {
            done = true;
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(run as u64));
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut q: Vec<Vec<f64>> = Vec::new();
        let mut mq: Vec<Vec<f64>> = Vec::new();
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let room = dim.min(n - locked.len());
        // Orthogonalize v against locked vectors and normalize.
        for _ in 0..2 {
            for (u, mu) in locked.iter().zip(&locked_m) {
                let c = dot(mu, &v);
                axpy(&mut v, -c, u);
            }
        }
        let mut mv = m.mul_vec(&v);
        let nv = dot(&v, &mv).sqrt();
        if !(nv > 0.0) {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        mv.iter_mut().for_each(|x| *x /= nv);
        q.push(v);
        mq.push(mv);
        let mut last_beta = 0.0;
        for j in 0..room {
            let mut w = op.solve(&mq[j]);
            let aj = dot(&mq[j], &w);
            alpha.push(aj);
            for _ in 0..2 {
                for (u, mu) in locked.iter().zip(&locked_m) {
                    let c = dot(mu, &w);
                    axpy(&mut w, -c, u);
                }
                for (qi, mqi) in q.iter().zip(&mq) {
                    let c = dot(mqi, &w);
                    axpy(&mut w, -c, qi);
                }
            }
            let mw = m.mul_vec(&w);
            let b = dot(&w, &mw).max(0.0).sqrt();
            last_beta = b;
            if j + 1 == room || b <= 1e-13 * aj.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            beta.push(b);
            q.push(w.iter().map(|x| x / b).collect());
            mq.push(mw.iter().map(|x| x / b).collect());
        }
        let size = alpha.len();
        let mut t = vec![vec![0.0; size]; size];
        for i in 0..size {
            t[i][i] = alpha[i];
            if i + 1 < size {
                t[i][i + 1] = beta[i];
                t[i + 1][i] = beta[i];
            }
        }
        let (theta, y) = dense_symmetric_eigen(&t)?;
        // Largest θ = smallest λ.
        let mut accepted: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut smallest_ritz = f64::INFINITY;
        for idx in (0..size).rev() {
            let th = theta[idx];
            if !(th > 0.0) {
                continue;
            }
            let lam = sigma + 1.0 / th;
            smallest_ritz = smallest_ritz.min(lam);
            let estimate = (last_beta * y[idx][size - 1]).abs() / th;
            if estimate > 1e3 * opts.tol.max(1e-10) && size < room {
                continue;
            }
            let mut x = vec![0.0; n];
            for (i, qi) in q.iter().enumerate().take(size) {
                axpy(&mut x, y[idx][i], qi);
            }
            let r = relative_residual(a, m, lam, sigma, &x);
            // A pair converged in the shift-inverted space is at the attainable
            // floor; dropping it would hide a lower eigenvalue.
            if r <= opts.tol || estimate <= 1e-2 * opts.tol {
                accepted.push((lam, x));
            } else {
                worst = worst.min(r);
            }
        }
        let kth = if locked_vals.len() >= k {
            let mut s = locked_vals.clone();
            s.sort_by(f64::total_cmp);
            Some(s[k - 1])
        } else {
            None
        };
        let found_lower = accepted
            .iter()
            .any(|(lam, _)| kth.is_none_or(|kv| *lam <= kv * (1.0 + 1e-9) + 1e-12));
        for (lam, mut x) in accepted {
            for _ in 0..2 {
                for (u, mu) in locked.iter().zip(&locked_m) {
                    let c = dot(mu, &x);
                    axpy(&mut x, -c, u);
                }
            }
            let mut mx = m.mul_vec(&x);
            let nx = dot(&x, &mx).sqrt();
            if !(nx > 1e-8) {
                continue;
            }
            x.iter_mut().for_each(|v| *v /= nx);
            mx.iter_mut().for_each(|v| *v /= nx);
            locked.push(x);
            locked_m.push(mx);
            locked_vals.push(lam);
        }
        if let Some(kv) = kth {
            if !found_lower && smallest_ritz > kv * (1.0 + 1e-9) {
                done = true;
                break;
            }
        }
        if locked.len() >= n {
            done = true;
            break;
        }
    }
    if !done && locked.len() < k {
        return Err(EigenError::NoConvergence {
            k,
            locked: locked.len(),
            residual: worst,
        });
    }

    // Final Rayleigh–Ritz on the locked space.
    let p = locked.len();
    let ax: Vec<Vec<f64>> = locked.iter().map(|x| a.mul_vec(x)).collect();
    let g: Vec<Vec<f64>> = (0..p).map(|i| (0..p).map(|j| dot(&locked[i], &ax[j])).collect()).collect();
    let (vals, y) = dense_symmetric_eigen(&g)?;
    let mut out_vals = Vec::with_capacity(k);
    let mut out_vecs = Vec::with_capacity(k);
    let mut out_res = Vec::with_capacity(k);
    for (c, &lam) in vals.iter().enumerate().take(k) {
        let mut x = vec![0.0; n];
        for (i, xi) in locked.iter().enumerate() {
            axpy(&mut x, y[c][i], xi);
        }
        let nx = m.form(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        // Deterministic sign: largest-magnitude entry positive.
        let imax = (0..n).fold(0, |b, i| if x[i].abs() > x[b].abs() { i } else { b });
        if x[imax] < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        out_res.push(relative_residual(a, m, lam, sigma, &x));
        out_vals.push(lam);
        out_vecs.push(x);
    }
    if out_vals.len() < k {
        return Err(EigenError::NoConvergence {
            k,
            locked: out_vals.len(),
            residual: worst,
        });
    }
    let bad = out_res.iter().cloned().fold(0.0, f64::max);
    if bad > opts.tol * 10.0 {
        return Err(EigenError::NoConvergence { k, locked: p, residual: bad });
    }
    Ok((out_vals, out_vecs, out_res))
}
