//! Bessel functions of the first kind and the analytic unit-disk spectra.

use crate::quad::gauss_legendre;
use crate::Real;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// `J_n(x)` for `x >= 0`: power series for `x <= 12`, Miller's downward recurrence beyond.
pub fn bessel_j<T: Real>(n: usize, x: T) -> T {
    assert!(x >= T::zero(), "bessel_j expects x >= 0");
    if x == T::zero() {
        return if n == 0 { T::one() } else { T::zero() };
    }
    if x <= T::lit(12.0) {
        series(n, x)
    } else {
        miller(n, x)
    }
}

fn series<T: Real>(n: usize, x: T) -> T {
    let half = x / T::lit(2.0);
    let mut term = T::one();
    for k in 1..=n {
        term = term * half / T::of(k);
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 0usize;
    loop {
        k += 1;
        term = term * q / (T::of(k) * T::of(k + n));
        sum += term;
        if term.abs() < T::lit(1e-18) * sum.abs() && k > 2 {
            break;
        }
        if k > 500 {
            break;
        }
    }
    sum
}

fn miller<T: Real>(n: usize, x: T) -> T {
    let xf = x.f64();
    let start = 2 * ((n.max(xf as usize) + 40 + (xf.sqrt() as usize) * 8) / 2);
    let two = T::lit(2.0);
    let (mut jp1, mut j) = (T::zero(), T::lit(1e-30));
    let mut norm = T::zero();
    let mut out = T::zero();
    for k in (1..=start).rev() {
        let jm1 = two * T::of(k) / x * j - jp1;
        jp1 = j;
        j = jm1;
        let idx = k - 1;
        if idx == n {
            out = j;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += two * j;
        }
        // rescale to avoid overflow
        if j.abs() > T::lit(1e250) {
            j = j * T::lit(1e-250);
            jp1 = jp1 * T::lit(1e-250);
            norm = norm * T::lit(1e-250);
            out = out * T::lit(1e-250);
        }
    }
    norm += j;
    if n == 0 {
        out = j;
    }
    out / norm
}

/// `J_n'(x)`.
pub fn bessel_j_prime<T: Real>(n: usize, x: T) -> T {
    if n == 0 {
        -bessel_j(1, x)
    } else {
        (bessel_j(n - 1, x) - bessel_j(n + 1, x)) / T::lit(2.0)
    }
}

/// Boundary condition of the disk problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiskKind<T> {
    Dirichlet,
    Neumann,
    /// `∂u/∂ν + A u = 0`.
    Robin { a: T },
}

/// Characteristic function whose positive roots `x` give eigenvalues `x²` for angular order `n`.
pub fn characteristic<T: Real>(kind: DiskKind<T>, n: usize, x: T) -> T {
    match kind {
        DiskKind::Dirichlet => bessel_j(n, x),
        DiskKind::Neumann => bessel_j_prime(n, x),
        DiskKind::Robin { a } => x * bessel_j_prime(n, x) + a * bessel_j(n, x),
    }
}

/// One separated mode family of the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskMode<T> {
    /// Angular order.
    pub n: usize,
    /// Radial index (1-based).
    pub m: usize,
    pub root: T,
    pub eigenvalue: T,
    pub multiplicity: usize,
}

/// Analytic spectrum of the unit disk, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskOracle<T> {
    pub kind: DiskKind<T>,
    pub modes: Vec<DiskMode<T>>,
}

fn bisect<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T, tol: T) -> T {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if (fm < T::zero()) == (flo < T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::lit(2.0)
}

/// Positive roots of the characteristic function below `xmax`.
pub fn roots<T: Real>(kind: DiskKind<T>, n: usize, xmax: T) -> Vec<T> {
    let step = T::lit(1e-2);
    let tol = T::lit(1e-13).max(T::epsilon() * T::lit(16.0) * xmax);
    let f = |x: T| characteristic(kind, n, x);
    let mut out = Vec::new();
    let mut a = step;
    let mut fa = f(a);
    while a < xmax {
        let b = a + step;
        let fb = f(b);
        if fa == T::zero() {
            out.push(a);
        } else if (fa < T::zero()) != (fb < T::zero()) && fb != T::zero() {
            out.push(bisect(f, a, b, tol));
        }
        a = b;
        fa = fb;
    }
    out
}

impl<T: Real> DiskOracle<T> {
    /// The lowest `count` eigenvalues counting multiplicity (the table may hold a few more).
    pub fn new(kind: DiskKind<T>, count: usize) -> Self {
        assert!((1..=50).contains(&count), "oracle supports 1..=50 eigenvalues");
        let mut xmax = T::lit(8.0);
        loop {
            let mut modes = Vec::new();
            if matches!(kind, DiskKind::Neumann) {
                modes.push(DiskMode { n: 0, m: 0, root: T::zero(), eigenvalue: T::zero(), multiplicity: 1 });
            }
            // J_n and J_n' have no zeros below n, so orders up to xmax suffice.
            let nmax = xmax.f64().ceil() as usize + 1;
            for n in 0..=nmax {
                for (i, r) in roots(kind, n, xmax).into_iter().enumerate() {
                    modes.push(DiskMode {
                        n,
                        m: i + 1,
                        root: r,
                        eigenvalue: r * r,
                        multiplicity: if n == 0 { 1 } else { 2 },
                    });
                }
            }
            let total: usize = modes.iter().map(|m| m.multiplicity).sum();
            if total >= count {
                modes.sort_by(|a, b| a.eigenvalue.partial_cmp(&b.eigenvalue).expect("finite"));
                let mut kept = Vec::new();
                let mut c = 0;
                for m in modes {
                    if c >= count {
                        break;
                    }
                    c += m.multiplicity;
                    kept.push(m);
                }
                return DiskOracle { kind, modes: kept };
            }
            xmax = xmax * T::lit(1.5);
        }
    }

    /// Eigenvalues repeated by multiplicity, truncated to `count`.
    pub fn values(&self, count: usize) -> Vec<T> {
        self.modes
            .iter()
            .flat_map(|m| std::iter::repeat_n(m.eigenvalue, m.multiplicity))
            .take(count)
            .collect()
    }

    /// CSV table `n,m,eigenvalue,multiplicity`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,m,eigenvalue,multiplicity\n");
        for m in &self.modes {
            let _ = writeln!(s, "{},{},{:.15e},{}", m.n, m.m, m.eigenvalue.f64(), m.multiplicity);
        }
        s
    }
}

/// `∮ ψ² ds` for the L²(disk)-normalized radial ground state `c J₀(x r)` of the unit disk.
pub fn radial_ground_boundary_mass<T: Real>(root: T) -> T {
    let (x, w) = gauss_legendre::<T>(40);
    let half = T::lit(0.5);
    // ∫₀¹ J₀(root r)² r dr
    let int: T = x
        .iter()
        .zip(&w)
        .map(|(&xi, &wi)| {
            let r = half * (xi + T::one());
            let j = bessel_j(0, root * r);
            wi * j * j * r
        })
        .sum::<T>()
        * half;
    let c2 = (T::TAU() * int).recip();
    let jb = bessel_j(0, root);
    T::TAU() * c2 * jb * jb
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        // reference values from an arbitrary-precision evaluation
        assert!((bessel_j(0, 1.0f64) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1, 2.5f64) - 0.497_094_102_464_274).abs() < 1e-13);
        assert!((bessel_j(0, 20.0f64) - 0.167_024_664_340_583_2).abs() < 1e-12);
        assert!((bessel_j(3, 15.0f64) - (-0.194_018_257_820_123)).abs() < 1e-12);
    }

    #[test]
    fn series_and_recurrence_agree() {
        for n in [0usize, 1, 2, 5, 9] {
            for x in [9.0f64, 11.5, 12.0] {
                let a = series(n, x);
                let b = miller(n, x);
                assert!((a - b).abs() < 1e-11, "n={n} x={x}: {a} {b}");
            }
        }
    }

    #[test]
    fn wronskian_like_identity() {
        // J_{n+1} J_n' - J_n J_{n+1}' relation via J_{n-1} + J_{n+1} = (2n/x) J_n
        for n in 1usize..6 {
            for x in [0.7f64, 3.3, 8.0, 14.0, 21.0] {
                let lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
                let rhs = 2.0 * n as f64 / x * bessel_j(n, x);
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn oracle_tables() {
        let d = DiskOracle::<f64>::new(DiskKind::Dirichlet, 6);
        assert!((d.values(1)[0] - 5.783_185_962_946_784).abs() < 1e-10);
        let n = DiskOracle::<f64>::new(DiskKind::Neumann, 5);
        let v = n.values(5);
        assert_eq!(v[0], 0.0);
        assert!((v[1].sqrt() - 1.841_183_781_340_659).abs() < 1e-11);
        assert_eq!(v[1], v[2]);
        let r = DiskOracle::<f64>::new(DiskKind::Robin { a: 1.0 }, 5);
        assert!((r.values(1)[0].sqrt() - 1.255_783_711_794_59).abs() < 1e-11);
        assert!(d.to_csv().starts_with("n,m,eigenvalue,multiplicity\n0,1,"));
    }

    #[test]
    fn robin_tends_to_neumann_from_above() {
        let n = DiskOracle::<f64>::new(DiskKind::Neumann, 6).values(6);
        let mut prev = vec![f64::INFINITY; 6];
        for a in [1e-1, 1e-2, 1e-3] {
            let r = DiskOracle::<f64>::new(DiskKind::Robin { a }, 6).values(6);
            for k in 0..6 {
                assert!(r[k] > n[k] && r[k] < prev[k]);
            }
            prev = r;
        }
        assert!((prev[0] - 2e-3).abs() < 1e-5);
    }

    #[test]
    fn neumann_ground_boundary_mass() {
        // root -> 0 gives the constant mode: ∮ (1/√π)² ds = 2
        assert!((radial_ground_boundary_mass(1e-8f64) - 2.0).abs() < 1e-12);
    }
}
