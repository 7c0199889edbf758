//! Per-arc images under `θ_ε` and the profile `f_ε`.

use super::alternation::AlternationConfig;
use super::theta::ThetaMap;
use crate::cutoff::chi;
use crate::Real;
use std::fmt::Write;

/// Images of the arcs under `θ_ε` and their relative sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcQuantities<T> {
    pub d_lower: Vec<T>,
    pub a_img: Vec<T>,
    pub b_img: Vec<T>,
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
    pub d_upper: Vec<T>,
    /// `δ_j = d_{j+1} - d_j`.
    pub delta_lower: Vec<T>,
    /// `δ^j = d^{j+1} - d^j`.
    pub delta_upper: Vec<T>,
    pub delta_lower_max: T,
    pub delta_upper_max: T,
    epsilon: T,
    theta0: T,
}

impl<T: Real> ArcQuantities<T> {
    pub fn new(cfg: &AlternationConfig<T>, map: &ThetaMap<T>) -> Self {
        let n = cfg.n_arcs;
        let eps = cfg.epsilon;
        let two_eta = T::lit(2.0) * cfg.eta;
        let mut q = ArcQuantities {
            d_lower: (0..n).map(|j| cfg.d(j)).collect(),
            a_img: Vec::with_capacity(n),
            b_img: Vec::with_capacity(n),
            alpha: Vec::with_capacity(n),
            beta: Vec::with_capacity(n),
            d_upper: Vec::with_capacity(n),
            delta_lower: Vec::with_capacity(n),
            delta_upper: Vec::with_capacity(n),
            delta_lower_max: T::zero(),
            delta_upper_max: T::zero(),
            epsilon: eps,
            theta0: map.theta(cfg.anchor0),
        };
        for j in 0..n {
            let s = cfg.anchors[j];
            // θ(s_j) - θ(s_j - ε a_j), evaluated as an increment to keep tiny arcs exact.
            let ai = map.increment(s - eps * cfg.a[j], eps * cfg.a[j]) / eps;
            let bi = map.increment(s, eps * cfg.b[j]) / eps;
            q.a_img.push(ai);
            q.b_img.push(bi);
            q.alpha.push(ai / two_eta);
            q.beta.push(bi / two_eta);
            q.d_upper.push(ai / two_eta + bi / two_eta);
        }
        for j in 0..n {
            let k = (j + 1) % n;
            let dl = q.d_lower[k] - q.d_lower[j];
            let du = q.d_upper[k] - q.d_upper[j];
            q.delta_lower.push(dl);
            q.delta_upper.push(du);
            q.delta_lower_max = q.delta_lower_max.max(dl.abs());
            q.delta_upper_max = q.delta_upper_max.max(du.abs());
        }
        q
    }

    pub fn len(&self) -> usize {
        self.d_upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d_upper.is_empty()
    }

    /// `f_ε(θ) = d^{j+1} - χ((θ - θ(s_j))/(επ)) δ^j` on the cell containing `θ`.
    pub fn profile(&self, theta: T) -> T {
        let n = self.len();
        let cell = self.epsilon * T::PI();
        let u = (theta - self.theta0) % T::TAU();
        let u = if u < T::zero() { u + T::TAU() } else { u };
        let x = u / cell;
        let j = x.floor().to_usize().unwrap_or(0).min(n - 1);
        let t = x - T::of(j);
        self.d_upper[(j + 1) % n] - chi(t) * self.delta_upper[j]
    }

    /// CSV dump: `j, s_j, a_j, b_j, d_j, delta_j, d^j, delta^j`.
    pub fn to_csv(&self, cfg: &AlternationConfig<T>) -> String {
        let mut out = String::from("j,s_j,a_j,b_j,d_j,delta_j,d_sup_j,delta_sup_j\n");
        for j in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                j,
                cfg.anchors[j].f64(),
                cfg.a[j].f64(),
                cfg.b[j].f64(),
                self.d_lower[j].f64(),
                self.delta_lower[j].f64(),
                self.d_upper[j].f64(),
                self.delta_upper[j].f64()
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::alternation::LengthRule;
    use crate::geometry::theta::{ThetaKind, TrigSeries};
    use std::f64::consts::{PI, TAU};

    fn perturbed() -> ThetaMap<f64> {
        ThetaMap::new(
            ThetaKind::Perturbed {
                g: TrigSeries { cos: vec![0.5, 0.2], sin: vec![0.0, 0.3] },
                rate: 0.3,
            },
            TAU,
        )
        .unwrap()
    }

    #[test]
    fn identity_images_equal_preimages() {
        let m = ThetaMap::identity(TAU);
        let c = AlternationConfig::generate(&m, 8, &LengthRule::Remark14, 0.4, 0.0, 0.0).unwrap();
        let q = ArcQuantities::new(&c, &m);
        for j in 0..8 {
            assert!((q.a_img[j] - c.a[j]).abs() < 1e-12);
            assert!((q.d_upper[j] - q.d_lower[j]).abs() < 1e-12);
            assert!((q.delta_upper[j] - q.delta_lower[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_arcs_have_no_jumps() {
        let m = perturbed();
        let c = AlternationConfig::generate(&m, 16, &LengthRule::Scaled { alpha: 0.3, beta: 0.2 }, 0.1, 0.0, 0.0)
            .unwrap();
        let q = ArcQuantities::new(&c, &m);
        assert_eq!(q.delta_lower_max, 0.0);
        assert!(q.delta_upper_max > 0.0);
        let (c1, c2) = m.bounds();
        for j in 0..16 {
            let pre = c.a[j] + c.b[j];
            let img = q.a_img[j] + q.b_img[j];
            assert!(c1 * pre <= img * (1.0 + 1e-12) && img <= c2 * pre * (1.0 + 1e-12));
        }
    }

    #[test]
    fn profile_values_and_smoothness() {
        let m = perturbed();
        let c = AlternationConfig::generate(&m, 8, &LengthRule::Remark14, 0.6, 0.0, 0.3).unwrap();
        let q = ArcQuantities::new(&c, &m);
        let eps = c.epsilon;
        for j in 0..8 {
            let th = m.theta(c.anchors[j]);
            assert!((q.profile(th + 1e-13) - q.d_upper[j]).abs() < 1e-9);
            assert!((q.profile(th + 0.2 * eps * PI) - q.d_upper[j]).abs() < 1e-12);
        }
        // C1 continuity across cell boundaries and 2π periodicity
        let h = 1e-4 * eps * PI;
        let th0 = m.theta(c.anchor0);
        for j in 0..8 {
            let b = th0 + eps * PI * j as f64;
            let left = (q.profile(b) - q.profile(b - h)) / h;
            let right = (q.profile(b + h) - q.profile(b)) / h;
            assert!((left - right).abs() < 1e-6);
            assert!((q.profile(b + 0.37) - q.profile(b + 0.37 + TAU)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_profile() {
        let m = ThetaMap::identity(TAU);
        let c = AlternationConfig::generate(&m, 12, &LengthRule::Scaled { alpha: 0.25, beta: 0.25 }, 0.2, 0.0, 0.0)
            .unwrap();
        let q = ArcQuantities::new(&c, &m);
        for i in 0..100 {
            assert!((q.profile(i as f64 * 0.0731) - 0.5).abs() < 1e-14);
        }
    }
}
