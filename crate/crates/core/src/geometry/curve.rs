//! Smooth closed boundary curves parametrized by arclength, oriented counterclockwise.

use crate::quad::gauss_legendre;
use crate::Real;
use serde::{Deserialize, Serialize};
use std::fmt::Debug;

/// Reduces `s` into `[0, len)`.
pub fn wrap<T: Real>(s: T, len: T) -> T {
    let r = s % len;
    if r < T::zero() {
        r + len
    } else {
        r
    }
}

/// A smooth closed curve `s -> r(s)` with `|r'(s)| = 1`, traversed counterclockwise.
pub trait BoundaryCurve<T: Real>: Debug + Send + Sync {
    /// Total length `S`.
    fn length(&self) -> T;
    fn point(&self, s: T) -> [T; 2];
    /// Unit tangent `r'(s)`.
    fn tangent(&self, s: T) -> [T; 2];
    /// Signed curvature; positive for a convex counterclockwise curve.
    fn curvature(&self, s: T) -> T;

    fn outward_normal(&self, s: T) -> [T; 2] {
        let t = self.tangent(s);
        [t[1], -t[0]]
    }

    fn inward_normal(&self, s: T) -> [T; 2] {
        let t = self.tangent(s);
        [-t[1], t[0]]
    }

    /// `r(s + t) - r(s)`, accurate in relative terms even for tiny `t`.
    fn chord(&self, s: T, t: T) -> [T; 2] {
        let len = self.length();
        if t.abs() >= T::lit(1e-4) * len {
            let p = self.point(s + t);
            let q = self.point(s);
            return [p[0] - q[0], p[1] - q[1]];
        }
        let [ct, cn] = self.chord_local(s, t);
        let tan = self.tangent(s);
        let nor = self.inward_normal(s);
        [ct * tan[0] + cn * nor[0], ct * tan[1] + cn * nor[1]]
    }

    /// The chord in the frame (tangent, inward normal) at `s`. Both components keep
    /// relative accuracy for tiny `t`; the normal one is of order `κ t²/2`.
    fn chord_local(&self, s: T, t: T) -> [T; 2] {
        let len = self.length();
        let tan = self.tangent(s);
        let nor = self.inward_normal(s);
        if t.abs() >= T::lit(1e-4) * len {
            let p = self.point(s + t);
            let q = self.point(s);
            let c = [p[0] - q[0], p[1] - q[1]];
            return [c[0] * tan[0] + c[1] * tan[1], c[0] * nor[0] + c[1] * nor[1]];
        }
        let k = self.curvature(s);
        let d = T::lit(1e-3) * len;
        let dk = (self.curvature(s + d) - self.curvature(s - d)) / (d + d);
        let t3 = t * t * t / T::lit(6.0);
        [t - k * k * t3, k * t * t / T::lit(2.0) + dk * t3]
    }

    /// Short human-readable description.
    fn describe(&self) -> String;
}

/// Circle of radius `r` centred at `c`; `s = 0` at angle zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle<T> {
    pub center: [T; 2],
    pub radius: T,
}

impl<T: Real> Circle<T> {
    pub fn unit() -> Self {
        Circle {
            center: [T::zero(); 2],
            radius: T::one(),
        }
    }
}

impl<T: Real> BoundaryCurve<T> for Circle<T> {
    fn length(&self) -> T {
        T::TAU() * self.radius
    }
    fn point(&self, s: T) -> [T; 2] {
        let a = s / self.radius;
        [
            self.center[0] + self.radius * a.cos(),
            self.center[1] + self.radius * a.sin(),
        ]
    }
    fn tangent(&self, s: T) -> [T; 2] {
        let a = s / self.radius;
        [-a.sin(), a.cos()]
    }
    fn curvature(&self, _s: T) -> T {
        self.radius.recip()
    }
    fn chord(&self, s: T, t: T) -> [T; 2] {
        let half = t / (self.radius + self.radius);
        let m = (self.radius + self.radius) * half.sin();
        let dir = s / self.radius + half;
        [-m * dir.sin(), m * dir.cos()]
    }
    fn chord_local(&self, _s: T, t: T) -> [T; 2] {
        let half = t / (self.radius + self.radius);
        let m = (self.radius + self.radius) * half.sin();
        [m * half.cos(), m * half.sin()]
    }
    fn describe(&self) -> String {
        format!(
            "circle(center=({}, {}), radius={})",
            self.center[0], self.center[1], self.radius
        )
    }
}

/// Axis-aligned ellipse `(a cos φ, b sin φ)` reparametrized by arclength numerically.
#[derive(Debug, Clone)]
pub struct Ellipse<T> {
    pub center: [T; 2],
    pub semi_x: T,
    pub semi_y: T,
    panel_s: Vec<T>,
    nodes: Vec<T>,
    weights: Vec<T>,
}

const ELLIPSE_PANELS: usize = 256;

impl<T: Real> Ellipse<T> {
    pub fn new(center: [T; 2], semi_x: T, semi_y: T) -> Self {
        assert!(semi_x > T::zero() && semi_y > T::zero(), "semi-axes must be positive");
        let (nodes, weights) = gauss_legendre::<T>(20);
        let mut e = Ellipse {
            center,
            semi_x,
            semi_y,
            panel_s: Vec::with_capacity(ELLIPSE_PANELS + 1),
            nodes,
            weights,
        };
        let dphi = T::TAU() / T::of(ELLIPSE_PANELS);
        let mut acc = T::zero();
        e.panel_s.push(acc);
        for k in 0..ELLIPSE_PANELS {
            let a = dphi * T::of(k);
            acc += e.arc(a, a + dphi);
            e.panel_s.push(acc);
        }
        e
    }

    fn speed(&self, phi: T) -> T {
        (self.semi_x * phi.sin()).hypot(self.semi_y * phi.cos())
    }

    fn arc(&self, a: T, b: T) -> T {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * self.speed(mid + half * x))
            .sum::<T>()
            * half
    }

    /// Curve parameter `φ` for arclength `s`.
    pub fn phi(&self, s: T) -> T {
        let len = self.length();
        let s = wrap(s, len);
        let dphi = T::TAU() / T::of(ELLIPSE_PANELS);
        let k = match self
            .panel_s
            .binary_search_by(|v| v.partial_cmp(&s).expect("finite"))
        {
            Ok(i) => i.min(ELLIPSE_PANELS - 1),
            Err(i) => i.saturating_sub(1).min(ELLIPSE_PANELS - 1),
        };
        let a = dphi * T::of(k);
        let target = s - self.panel_s[k];
        let mut phi = a + dphi * target / (self.panel_s[k + 1] - self.panel_s[k]);
        for _ in 0..30 {
            let f = self.arc(a, phi) - target;
            let step = f / self.speed(phi);
            phi -= step;
            if step.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        phi
    }
}

impl<T: Real> BoundaryCurve<T> for Ellipse<T> {
    fn length(&self) -> T {
        self.panel_s[ELLIPSE_PANELS]
    }
    fn point(&self, s: T) -> [T; 2] {
        let p = self.phi(s);
        [
            self.center[0] + self.semi_x * p.cos(),
            self.center[1] + self.semi_y * p.sin(),
        ]
    }
    fn tangent(&self, s: T) -> [T; 2] {
        let p = self.phi(s);
        let v = self.speed(p);
        [-self.semi_x * p.sin() / v, self.semi_y * p.cos() / v]
    }
    fn curvature(&self, s: T) -> T {
        let p = self.phi(s);
        let v = self.speed(p);
        self.semi_x * self.semi_y / (v * v * v)
    }
    fn describe(&self) -> String {
        format!(
            "ellipse(center=({}, {}), semi_x={}, semi_y={})",
            self.center[0], self.center[1], self.semi_x, self.semi_y
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_unit_speed<C: BoundaryCurve<f64>>(c: &C) {
        let len = c.length();
        for i in 0..200 {
            let s = len * i as f64 / 200.0;
            let h = 1e-6;
            let p = c.point(s + h);
            let q = c.point(s - h);
            let sp = ((p[0] - q[0]).hypot(p[1] - q[1])) / (2.0 * h);
            assert!((sp - 1.0).abs() < 1e-8, "speed {sp} at {s}");
            let t = c.tangent(s);
            assert!((t[0].hypot(t[1]) - 1.0).abs() < 1e-12);
        }
        let a = c.point(0.0);
        let b = c.point(len);
        assert!((a[0] - b[0]).abs() < 1e-10 && (a[1] - b[1]).abs() < 1e-10);
    }

    #[test]
    fn circle_basics() {
        let c = Circle::<f64>::unit();
        assert!((c.length() - std::f64::consts::TAU).abs() < 1e-15);
        assert_eq!(c.curvature(1.3), 1.0);
        check_unit_speed(&c);
        let n = c.outward_normal(0.7);
        let p = c.point(0.7);
        assert!((n[0] - p[0]).abs() < 1e-15 && (n[1] - p[1]).abs() < 1e-15);
    }

    #[test]
    fn ellipse_basics() {
        let e = Ellipse::new([0.0, 0.0], 1.5, 1.0);
        check_unit_speed(&e);
        // Ramanujan's second approximation is accurate to ~1e-10 at this aspect.
        let (a, b) = (1.5f64, 1.0f64);
        let h = ((a - b) / (a + b)).powi(2);
        let ram = std::f64::consts::PI * (a + b) * (1.0 + 3.0 * h / (10.0 + (4.0 - 3.0 * h).sqrt()));
        assert!((e.length() - ram).abs() < 1e-8);
        let k = e.curvature(0.0);
        assert!((k - a / (b * b)).abs() < 1e-10);
    }

    #[test]
    fn chords_agree_with_positions() {
        let c = Circle::<f64>::unit();
        let e = Ellipse::new([0.2, -0.1], 1.3, 0.9);
        for s in [0.0, 0.4, 2.0, 5.9] {
            for t in [1e-1, 1e-4, -2e-3] {
                for (ch, p, q) in [
                    (c.chord(s, t), c.point(s + t), c.point(s)),
                    (e.chord(s, t), e.point(s + t), e.point(s)),
                ] {
                    assert!((ch[0] - (p[0] - q[0])).abs() < 1e-12);
                    assert!((ch[1] - (p[1] - q[1])).abs() < 1e-12);
                }
            }
            // tiny chords keep relative accuracy
            let t = 1e-40;
            let ch = e.chord(s, t);
            let tan = e.tangent(s);
            assert!(((ch[0] - t * tan[0]).abs() + (ch[1] - t * tan[1]).abs()) < 1e-12 * t);
            let ch = c.chord(s, t);
            assert!((ch[0].hypot(ch[1]) / t - 1.0).abs() < 1e-15);
            for (local, k) in [(c.chord_local(s, t), 1.0), (e.chord_local(s, t), e.curvature(s))] {
                assert!((local[0] / t - 1.0).abs() < 1e-15);
                assert!((local[1] / (0.5 * k * t * t) - 1.0).abs() < 1e-12);
            }
        }
    }
}
