//! Reparametrizations `θ_ε` of the boundary onto the unit circle.

use crate::Real;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Zero-mean trigonometric polynomial in the phase `ω s`, `ω = 2π / S`:
/// `g(s) = Σ_k cos[k-1] cos(k ω s) + sin[k-1] sin(k ω s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct TrigSeries<T> {
    #[serde(default)]
    pub cos: Vec<T>,
    #[serde(default)]
    pub sin: Vec<T>,
}

impl<T: Real> TrigSeries<T> {
    pub fn cosine() -> Self {
        TrigSeries {
            cos: vec![T::one()],
            sin: vec![],
        }
    }

    fn terms(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    fn coef(&self, k: usize) -> (T, T) {
        (
            self.cos.get(k).copied().unwrap_or_else(T::zero),
            self.sin.get(k).copied().unwrap_or_else(T::zero),
        )
    }

    pub fn value(&self, omega: T, s: T) -> T {
        (0..self.terms())
            .map(|i| {
                let (c, d) = self.coef(i);
                let ph = T::of(i + 1) * omega * s;
                c * ph.cos() + d * ph.sin()
            })
            .sum()
    }

    pub fn derivative(&self, omega: T, s: T) -> T {
        (0..self.terms())
            .map(|i| {
                let (c, d) = self.coef(i);
                let kw = T::of(i + 1) * omega;
                let ph = kw * s;
                kw * (d * ph.cos() - c * ph.sin())
            })
            .sum()
    }

    /// `G(s + t) - G(s)` where `G' = g`, `G(0) = 0`, without cancellation for small `t`.
    pub fn primitive_increment(&self, omega: T, s: T, t: T) -> T {
        let two = T::lit(2.0);
        (0..self.terms())
            .map(|i| {
                let (c, d) = self.coef(i);
                let kw = T::of(i + 1) * omega;
                let mid = kw * (s + t / two);
                let sh = (kw * t / two).sin();
                // sin(x+u)-sin(x) = 2cos(x+u/2)sin(u/2); -(cos(x+u)-cos(x)) = 2sin(x+u/2)sin(u/2)
                two * sh * (c * mid.cos() + d * mid.sin()) / kw
            })
            .sum()
    }
}

/// Which family a map belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaKind<T> {
    /// `θ(s) = 2π s / S`.
    Identity,
    /// `θ(s) = 2π s / S + rate · G(s)` with `G' = g`.
    Perturbed { g: TrigSeries<T>, rate: T },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThetaError {
    #[error("theta map is not monotone: min theta' = {0}")]
    NotMonotone(f64),
    #[error("perturbation too large: rate*sup|g| = {size} exceeds half of theta'_0 = {half}")]
    TooLarge { size: f64, half: f64 },
    #[error("curve length must be positive, got {0}")]
    BadLength(f64),
}

/// A strictly increasing `θ_ε` with `θ(0) = 0`, `θ(S) = 2π`, extended by `θ(s + kS) = θ(s) + 2πk`.
#[derive(Clone, PartialEq)]
pub struct ThetaMap<T> {
    length: T,
    kind: ThetaKind<T>,
    c1: T,
    c2: T,
    sigma: T,
}

impl<T: Real> fmt::Debug for ThetaMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ThetaMap")
            .field("length", &self.length)
            .field("kind", &self.kind)
            .field("bounds", &(self.c1, self.c2))
            .finish()
    }
}

const SAMPLES: usize = 10_000;

impl<T: Real> ThetaMap<T> {
    /// Builds the map for a curve of length `length`; bounds are certified by sampling.
    pub fn new(kind: ThetaKind<T>, length: T) -> Result<Self, ThetaError> {
        if !(length > T::zero()) {
            return Err(ThetaError::BadLength(length.f64()));
        }
        let mut m = ThetaMap {
            length,
            kind,
            c1: T::zero(),
            c2: T::zero(),
            sigma: T::zero(),
        };
        let base = m.omega();
        let (mut lo, mut hi, mut dev) = (T::infinity(), T::neg_infinity(), T::zero());
        for i in 0..SAMPLES {
            let s = length * T::of(i) / T::of(SAMPLES);
            let d = m.theta_prime(s);
            lo = lo.min(d);
            hi = hi.max(d);
            dev = dev.max((d - base).abs());
        }
        if !(lo > T::zero()) {
            return Err(ThetaError::NotMonotone(lo.f64()));
        }
        let half = base / T::lit(2.0);
        if dev >= half {
            return Err(ThetaError::TooLarge {
                size: dev.f64(),
                half: half.f64(),
            });
        }
        m.c1 = lo;
        m.c2 = hi;
        m.sigma = dev;
        Ok(m)
    }

    pub fn identity(length: T) -> Self {
        Self::new(ThetaKind::Identity, length).expect("identity map is always valid")
    }

    pub fn kind(&self) -> &ThetaKind<T> {
        &self.kind
    }

    pub fn length(&self) -> T {
        self.length
    }

    fn omega(&self) -> T {
        T::TAU() / self.length
    }

    pub fn theta(&self, s: T) -> T {
        self.omega() * s + self.increment_perturbation(T::zero(), s)
    }

    fn increment_perturbation(&self, s: T, t: T) -> T {
        match &self.kind {
            ThetaKind::Identity => T::zero(),
            ThetaKind::Perturbed { g, rate } => *rate * g.primitive_increment(self.omega(), s, t),
        }
    }

    /// `θ(s + t) - θ(s)`, accurate for tiny `t`.
    pub fn increment(&self, s: T, t: T) -> T {
        self.omega() * t + self.increment_perturbation(s, t)
    }

    pub fn theta_prime(&self, s: T) -> T {
        match &self.kind {
            ThetaKind::Identity => self.omega(),
            ThetaKind::Perturbed { g, rate } => self.omega() + *rate * g.value(self.omega(), s),
        }
    }

    pub fn theta_second(&self, s: T) -> T {
        match &self.kind {
            ThetaKind::Identity => T::zero(),
            ThetaKind::Perturbed { g, rate } => *rate * g.derivative(self.omega(), s),
        }
    }

    /// `θ'_0`, the limit as the perturbation rate vanishes.
    pub fn limit_theta_prime(&self, _s: T) -> T {
        self.omega()
    }

    pub fn bounds(&self) -> (T, T) {
        (self.c1, self.c2)
    }

    /// `sup |θ' - θ'_0|` over the sampling grid.
    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// Solves `θ(s) = target` by bisection to an absolute tolerance `tol` in `s`.
    pub fn inverse(&self, target: T, tol: T) -> T {
        let turns = (target / T::TAU()).floor();
        let rem = target - turns * T::TAU();
        let (mut lo, mut hi) = (T::zero(), self.length);
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.theta(mid) < rem {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) / T::lit(2.0) + turns * self.length
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn identity_on_unit_circle() {
        let m = ThetaMap::<f64>::identity(TAU);
        for s in [0.0, 1.0, 3.0, 6.0] {
            assert!((m.theta(s) - s).abs() < 1e-15);
            assert_eq!(m.theta_prime(s), 1.0);
        }
        assert_eq!(m.sigma(), 0.0);
        assert!((m.theta(TAU) - TAU).abs() < 1e-15);
    }

    #[test]
    fn cosine_perturbation() {
        let kind = ThetaKind::Perturbed {
            g: TrigSeries::cosine(),
            rate: 0.1,
        };
        let m = ThetaMap::new(kind, TAU).unwrap();
        let (c1, c2) = m.bounds();
        assert!((c1 - 0.9).abs() < 1e-9 && (c2 - 1.1).abs() < 1e-12);
        assert!((m.theta(TAU) - TAU).abs() < 1e-13);
        assert!((m.theta_prime(0.3) - (1.0 + 0.1 * 0.3f64.cos())).abs() < 1e-15);
        for s in [0.1, 1.7, 4.0] {
            let target = m.theta(s);
            assert!((m.inverse(target, 1e-13) - s).abs() < 1e-12);
            let t = 1e-9;
            let inc = m.increment(s, t);
            assert!((inc / t - m.theta_prime(s)).abs() < 1e-8);
        }
        let th = m.theta(1.0) + 2.0 * PI;
        assert!((m.inverse(th, 1e-13) - (1.0 + TAU)).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_monotone() {
        let kind = ThetaKind::Perturbed {
            g: TrigSeries::cosine(),
            rate: 1.5,
        };
        assert!(matches!(ThetaMap::new(kind, TAU), Err(ThetaError::NotMonotone(_))));
        let kind = ThetaKind::Perturbed {
            g: TrigSeries::cosine(),
            rate: 0.7,
        };
        assert!(matches!(ThetaMap::new(kind, TAU), Err(ThetaError::TooLarge { .. })));
    }
}
