//! The alternating Dirichlet arcs `γ_{ε,j} = {-ε a_j < s - s_j < ε b_j}`.

use super::curve::wrap;
use super::theta::ThetaMap;
use crate::Real;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How the dimensionless half-lengths `(a_j, b_j)` are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum LengthRule<T> {
    /// Same `(a, b)` for every arc.
    Uniform { a: T, b: T },
    /// `a_j = 2η α`, `b_j = 2η β`, so that `d_j = α + β` for every arc.
    Scaled { alpha: T, beta: T },
    /// `a_j = εj(1 + ε sin j)/2`, `b_j = 1 - εj/2`.
    Remark14,
    /// Explicit per-arc table, cycled if shorter than `N`.
    Table { lengths: Vec<(T, T)> },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlternationError {
    #[error("number of arcs must be even and at least 4, got {0}")]
    BadCount(usize),
    #[error("half-lengths must be finite and nonnegative (arc {0})")]
    BadLength(usize),
    #[error("arcs {0} and {1} overlap (gap {2:e})")]
    Overlap(usize, usize, f64),
    #[error("eta must be positive, got {0}")]
    BadEta(f64),
    #[error("empty length table")]
    EmptyTable,
    #[error("assumption C1 fails at arc {j}: a_j + b_j = {sum:e} outside [{lo:e}, {hi:e}]")]
    BoundsViolated { j: usize, sum: f64, lo: f64, hi: f64 },
}

/// One Dirichlet arc in local form: `[anchor + lo, anchor + hi]` with `lo <= 0 <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc<T> {
    pub index: usize,
    pub anchor: T,
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Arc<T> {
    pub fn length(&self) -> T {
        self.hi - self.lo
    }
    pub fn is_empty(&self) -> bool {
        !(self.hi > self.lo)
    }
    /// Arc midpoint relative to the anchor.
    pub fn center_offset(&self) -> T {
        (self.lo + self.hi) / T::lit(2.0)
    }
}

/// The full alternation data for one `ε = 2/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternationConfig<T> {
    pub n_arcs: usize,
    pub epsilon: T,
    pub anchor0: T,
    pub anchors: Vec<T>,
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub eta: T,
    pub robin_a: T,
    pub length: T,
}

impl<T: Real> AlternationConfig<T> {
    /// Builds the alternation from a map; anchors solve `θ(s_j) = θ(s_0) + επj`.
    pub fn generate(
        map: &ThetaMap<T>,
        n: usize,
        rule: &LengthRule<T>,
        eta: T,
        robin_a: T,
        anchor0: T,
    ) -> Result<Self, AlternationError> {
        if n < 4 || n % 2 != 0 {
            return Err(AlternationError::BadCount(n));
        }
        if !(eta > T::zero()) {
            return Err(AlternationError::BadEta(eta.f64()));
        }
        let eps = T::lit(2.0) / T::of(n);
        let len = map.length();
        let th0 = map.theta(anchor0);
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0) * len);
        let anchors: Vec<T> = (0..n)
            .map(|j| {
                if j == 0 {
                    wrap(anchor0, len)
                } else {
                    wrap(map.inverse(th0 + eps * T::PI() * T::of(j), tol), len)
                }
            })
            .collect();
        let two = T::lit(2.0);
        let (a, b): (Vec<T>, Vec<T>) = match rule {
            LengthRule::Uniform { a, b } => (vec![*a; n], vec![*b; n]),
            LengthRule::Scaled { alpha, beta } => (vec![two * eta * *alpha; n], vec![two * eta * *beta; n]),
            LengthRule::Remark14 => (0..n)
                .map(|j| {
                    let jj = T::of(j);
                    (
                        eps * jj * (T::one() + eps * jj.sin()) / two,
                        T::one() - eps * jj / two,
                    )
                })
                .unzip(),
            LengthRule::Table { lengths } => {
                if lengths.is_empty() {
                    return Err(AlternationError::EmptyTable);
                }
                (0..n).map(|j| lengths[j % lengths.len()]).unzip()
            }
        };
        let cfg = AlternationConfig {
            n_arcs: n,
            epsilon: eps,
            anchor0: wrap(anchor0, len),
            anchors,
            a,
            b,
            eta,
            robin_a,
            length: len,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks nonnegativity and pairwise disjointness in cyclic order.
    pub fn validate(&self) -> Result<(), AlternationError> {
        for j in 0..self.n_arcs {
            let ok = |v: T| v.is_finite() && v >= T::zero();
            if !ok(self.a[j]) || !ok(self.b[j]) {
                return Err(AlternationError::BadLength(j));
            }
        }
        let arcs: Vec<Arc<T>> = self.arcs().filter(|a| !a.is_empty()).collect();
        if arcs.len() == 1 && arcs[0].length() >= self.length {
            return Err(AlternationError::Overlap(arcs[0].index, arcs[0].index, 0.0));
        }
        for k in 0..arcs.len() {
            if arcs.len() < 2 {
                break;
            }
            let p = arcs[k];
            let q = arcs[(k + 1) % arcs.len()];
            let gap = wrap(q.anchor - p.anchor, self.length) + q.lo - p.hi;
            if !(gap > T::zero()) {
                return Err(AlternationError::Overlap(p.index, q.index, gap.f64()));
            }
        }
        Ok(())
    }

    /// Arcs in anchor order, including empty ones.
    pub fn arcs(&self) -> impl Iterator<Item = Arc<T>> + '_ {
        (0..self.n_arcs).map(move |j| Arc {
            index: j,
            anchor: self.anchors[j],
            lo: -self.epsilon * self.a[j],
            hi: self.epsilon * self.b[j],
        })
    }

    /// True when all arcs are empty (pure Neumann boundary).
    pub fn is_empty(&self) -> bool {
        self.arcs().all(|a| a.is_empty())
    }

    /// Total Dirichlet length `Σ ε(a_j + b_j)`.
    pub fn dirichlet_length(&self) -> T {
        self.arcs().map(|a| a.length()).sum()
    }

    /// Whether arclength `s` lies in an open Dirichlet arc.
    pub fn is_dirichlet(&self, s: T) -> bool {
        let s = wrap(s, self.length);
        self.arcs().filter(|a| !a.is_empty()).any(|a| {
            let mut d = s - a.anchor;
            let half = self.length / T::lit(2.0);
            if d > half {
                d -= self.length;
            } else if d < -half {
                d += self.length;
            }
            d > a.lo && d < a.hi
        })
    }

    /// `d_j = (a_j + b_j)/(2η)`.
    pub fn d(&self, j: usize) -> T {
        let j = j % self.n_arcs;
        (self.a[j] + self.b[j]) / (T::lit(2.0) * self.eta)
    }

    /// Asserts `c3 η <= a_j + b_j <= 2η/c2` for every arc.
    pub fn check_c1(&self, c3: T, c2: T) -> Result<(), AlternationError> {
        let lo = c3 * self.eta;
        let hi = T::lit(2.0) * self.eta / c2;
        for j in 0..self.n_arcs {
            let sum = self.a[j] + self.b[j];
            let slack = T::lit(1e-12) * hi;
            if sum < lo - slack || sum > hi + slack {
                return Err(AlternationError::BoundsViolated {
                    j,
                    sum: sum.f64(),
                    lo: lo.f64(),
                    hi: hi.f64(),
                });
            }
        }
        Ok(())
    }

    /// True if every arc of `self` lies inside some arc of `other` (same curve).
    pub fn is_subset_of(&self, other: &Self) -> bool {
        let len = self.length;
        let outer: Vec<Arc<T>> = other.arcs().filter(|a| !a.is_empty()).collect();
        self.arcs().filter(|a| !a.is_empty()).all(|a| {
            outer.iter().any(|b| {
                let mut shift = a.anchor - b.anchor;
                let half = len / T::lit(2.0);
                if shift > half {
                    shift -= len;
                } else if shift < -half {
                    shift += len;
                }
                let tol = T::lit(1e-13) * len;
                shift + a.lo >= b.lo - tol && shift + a.hi <= b.hi + tol
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::theta::ThetaMap;
    use std::f64::consts::{FRAC_PI_2, TAU};

    #[test]
    fn uniform_symmetric_arcs() {
        let m = ThetaMap::identity(TAU);
        let eta = 0.2;
        let c = AlternationConfig::generate(
            &m,
            4,
            &LengthRule::Uniform { a: eta / 2.0, b: eta / 2.0 },
            eta,
            0.0,
            0.0,
        )
        .unwrap();
        for (j, s) in c.anchors.iter().enumerate() {
            assert!((s - j as f64 * FRAC_PI_2).abs() < 1e-12);
        }
        for a in c.arcs() {
            assert!((a.length() - 0.2 * c.epsilon).abs() < 1e-15);
        }
        assert!(c.is_dirichlet(0.0) && !c.is_dirichlet(0.5));
        assert!(c.is_dirichlet(TAU - 1e-3));
    }

    #[test]
    fn remark14_rule_and_empty_rule() {
        let m = ThetaMap::identity(TAU);
        let c = AlternationConfig::generate(&m, 8, &LengthRule::Remark14, 0.3, 0.0, 0.0).unwrap();
        let e = 0.25;
        for j in 0..8 {
            let jj = j as f64;
            assert!((c.a[j] - e * jj * (1.0 + e * jj.sin()) / 2.0).abs() < 1e-15);
            assert!((c.b[j] - (1.0 - e * jj / 2.0)).abs() < 1e-15);
        }
        let z = AlternationConfig::generate(&m, 4, &LengthRule::Uniform { a: 0.0, b: 0.0 }, 0.3, 0.0, 0.0)
            .unwrap();
        assert!(z.is_empty());
        assert_eq!(z.dirichlet_length(), 0.0);
    }

    #[test]
    fn overlap_is_reported() {
        let m = ThetaMap::identity(TAU);
        let r = AlternationConfig::generate(&m, 4, &LengthRule::Uniform { a: 1.0, b: 2.5 }, 0.3, 0.0, 0.0);
        assert!(matches!(r, Err(AlternationError::Overlap(..))));
        let r = AlternationConfig::generate(&m, 5, &LengthRule::Uniform { a: 0.1, b: 0.1 }, 0.3, 0.0, 0.0);
        assert!(matches!(r, Err(AlternationError::BadCount(5))));
    }

    #[test]
    fn nesting_and_c1() {
        let m = ThetaMap::identity(TAU);
        let small = AlternationConfig::generate(&m, 8, &LengthRule::Uniform { a: 0.1, b: 0.1 }, 0.3, 0.0, 0.0)
            .unwrap();
        let big = AlternationConfig::generate(&m, 8, &LengthRule::Uniform { a: 0.2, b: 0.2 }, 0.3, 0.0, 0.0)
            .unwrap();
        assert!(small.is_subset_of(&big));
        assert!(!big.is_subset_of(&small));
        assert!(small.check_c1(0.5, 1.0).is_ok());
        assert!(small.check_c1(0.9, 1.0).is_err());
    }
}
