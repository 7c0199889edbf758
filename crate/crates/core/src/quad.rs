//! Gauss–Legendre rules and a globally adaptive Gauss–Kronrod integrator.

use crate::Real;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "rule needs at least one node");
    // Newton on P_n in f64, then converted; f32 callers lose nothing relevant.
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (
        x.into_iter().map(T::lit).collect(),
        w.into_iter().map(T::lit).collect(),
    )
}

/// Integrates `f` over `[a, b]` with an `n`-point Gauss rule.
pub fn gauss<T: Real>(f: impl Fn(T) -> T, a: T, b: T, n: usize) -> T {
    let (x, w) = gauss_legendre::<T>(n);
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| wi * f(mid + half * xi))
        .sum::<T>()
        * half
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("adaptive quadrature did not converge: estimate {estimate:e}, error {error:e} after {intervals} intervals")]
pub struct QuadError {
    pub estimate: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn gk21<T: Real>(f: &impl Fn(T) -> T, a: T, b: T) -> (T, T) {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let fc = f(mid);
    let mut k = fc * T::lit(WGK[10]);
    let mut g = T::zero();
    for j in 0..10 {
        let dx = half * T::lit(XGK[j]);
        let s = f(mid - dx) + f(mid + dx);
        k += T::lit(WGK[j]) * s;
        if j % 2 == 1 {
            g += T::lit(WG[j / 2]) * s;
        }
    }
    let k = k * half;
    let g = g * half;
    (k, (k - g).abs())
}

struct Piece<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Piece<T> {}
impl<T: Real> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Globally adaptive 21-point Gauss–Kronrod integration over the given
/// breakpoints, bisecting the worst interval until the summed error estimate
/// falls below `max(abs_tol, rel_tol * |value|)`.
pub fn adaptive<T: Real>(
    f: impl Fn(T) -> T,
    breakpoints: &[T],
    abs_tol: T,
    rel_tol: T,
    max_intervals: usize,
) -> Result<Quadrature<T>, QuadError> {
    assert!(breakpoints.len() >= 2, "need an interval");
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        let (v, e) = gk21(&f, w[0], w[1]);
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    loop {
        let value: T = heap.iter().map(|p| p.value).sum();
        let error: T = heap.iter().map(|p| p.error).sum();
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target {
            return Ok(Quadrature {
                value,
                error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= max_intervals {
            return Err(QuadError {
                estimate: value.f64(),
                error: error.f64(),
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("nonempty");
        let m = (worst.a + worst.b) / T::lit(2.0);
        if m <= worst.a || m >= worst.b {
            // Interval cannot be split further in this precision.
            return Err(QuadError {
                estimate: value.f64(),
                error: error.f64(),
                intervals: heap.len() + 1,
            });
        }
        for (a, b) in [(worst.a, m), (m, worst.b)] {
            let (v, e) = gk21(&f, a, b);
            heap.push(Piece {
                a,
                b,
                value: v,
                error: e,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rules_integrate_polynomials() {
        for n in [1usize, 2, 4, 8, 16] {
            let (x, w) = gauss_legendre::<f64>(n);
            let sw: f64 = w.iter().sum();
            assert!((sw - 2.0).abs() < 1e-14);
            let deg = 2 * n - 1;
            let m: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((m - exact).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let q = adaptive(|x: f64| 1.0 / x.sqrt(), &[0.0, 1.0], 1e-12, 1e-12, 2000).unwrap();
        assert!((q.value - 2.0).abs() < 1e-9, "{}", q.value);
        let q = adaptive(|x: f64| x.ln(), &[0.0, 1.0], 1e-13, 1e-13, 2000).unwrap();
        assert!((q.value + 1.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_reports_failure() {
        let r = adaptive(|x: f64| 1.0 / x, &[0.0, 1.0], 1e-12, 1e-12, 50);
        assert!(r.is_err());
    }
}
