//! Conformal patch around one boundary feature.
//!
//! In a local frame at the feature midpoint, the feature's endpoints are `z_mid ± h`.
//! The map `z = z_mid + h cosh ζ` sends the half strip `X ≥ 0, 0 ≤ Y ≤ π` onto the
//! upper half plane with the segment `[z_mid - h, z_mid + h]` at `X = 0`; `Y = 0` lies
//! beyond the feature's end and `Y = π` beyond its start. The patch is a structured
//! grid in `ζ` whose boundary vertices are exact curve points.

use super::{MeshError, Patch, Tag};
use freqbc_core::geometry::BoundaryCurve;
use num_complex::Complex64;

pub(crate) struct PatchGrid {
    pub patch: Patch,
    /// Number of angular intervals.
    pub m: usize,
    /// `ζ` of vertex `(i, k)`, layer `i`, angular index `k`.
    pub zeta: Vec<Vec<[f64; 2]>>,
    pub pos: Vec<Vec<[f64; 2]>>,
    /// Arclength offsets of the `k = 0` boundary vertices (beyond the feature end).
    pub t_bottom: Vec<f64>,
    /// Offsets of the `k = m` boundary vertices (before the feature start).
    pub t_top: Vec<f64>,
    /// Offsets of the feature vertices `(0, k)`.
    pub t_left: Vec<f64>,
    /// Arclength reach of the patch beyond the feature.
    pub reach: f64,
}

impl PatchGrid {
    pub fn layers(&self) -> usize {
        self.zeta.len()
    }
}

/// Inverse map continued across the feature, so points on the feature have `X ≤ 0`.
/// Beyond the feature's ends a negative `Im u` only nudges `Y` below 0 or above `π`.
fn zeta_of(u: Complex64) -> Complex64 {
    let a = u.acosh();
    if u.im >= 0.0 {
        a
    } else if u.re.abs() <= 1.0 {
        -a
    } else if u.re > 0.0 {
        a
    } else {
        a + Complex64::new(0.0, 2.0 * std::f64::consts::PI)
    }
}

pub(crate) struct Frame<'a> {
    curve: &'a dyn BoundaryCurve<f64>,
    center: f64,
    tan: [f64; 2],
    nor: [f64; 2],
    origin: [f64; 2],
    zmid: Complex64,
    h: Complex64,
    ln_h: Complex64,
}

impl<'a> Frame<'a> {
    /// Local frame of the feature `center ± half`.
    pub(crate) fn new(curve: &'a dyn BoundaryCurve<f64>, center: f64, half: f64) -> Self {
        let mut frame = Frame {
            curve,
            center,
            tan: curve.tangent(center),
            nor: curve.inward_normal(center),
            origin: curve.point(center),
            zmid: Complex64::new(0.0, 0.0),
            h: Complex64::new(1.0, 0.0),
            ln_h: Complex64::new(0.0, 0.0),
        };
        let w_end = frame.local(half);
        let w_start = frame.local(-half);
        frame.zmid = 0.5 * (w_start + w_end);
        frame.h = 0.5 * (w_end - w_start);
        frame.ln_h = frame.h.ln();
        frame
    }

    fn local(&self, t: f64) -> Complex64 {
        let c = self.curve.chord_local(self.center, t);
        Complex64::new(c[0], c[1])
    }

    pub(crate) fn zeta(&self, t: f64) -> Complex64 {
        zeta_of((self.local(t) - self.zmid) / self.h)
    }

    pub(crate) fn physical(&self, z: Complex64) -> [f64; 2] {
        self.from_local(self.zmid + 0.5 * ((self.ln_h + z).exp() + (self.ln_h - z).exp()))
    }

    /// Physical point of `zmid + e^{i arg h} g`, with `g` in the rotated patch coordinates.
    pub(crate) fn from_scaled(&self, g: Complex64) -> [f64; 2] {
        self.from_local(self.zmid + g * (self.h / self.h.norm()))
    }

    fn from_local(&self, w: Complex64) -> [f64; 2] {
        [
            self.origin[0] + w.re * self.tan[0] + w.im * self.nor[0],
            self.origin[1] + w.re * self.tan[1] + w.im * self.nor[1],
        ]
    }

    /// Offset `t` beyond the feature (`side = +1` after the end, `-1` before the start)
    /// whose curve point has `Re ζ = target`.
    fn solve_layer(&self, half: f64, reach: f64, side: f64, target: f64) -> Result<f64, MeshError> {
        let re = |lam: f64| self.zeta(side * (half + lam.exp())).re;
        let (mut lo, mut hi) = ((half * 1e-30).max(1e-300).ln(), reach.ln());
        if re(hi) < target {
            return Err(MeshError::Triangulation(format!(
                "patch layer Re ζ = {target} not reached within the allotted gap"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if re(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        Ok(side * (half + (0.5 * (lo + hi)).exp()))
    }
}

pub(crate) struct PatchSpec {
    pub center: f64,
    pub half: f64,
    /// How far the patch may reach beyond the feature on either side.
    pub reach: f64,
    /// Room available beyond the feature (bisection bracket).
    pub room: f64,
    pub feature: Tag,
    pub angular: usize,
    pub growth: f64,
    pub max_step: f64,
}

pub(crate) fn build_patch(curve: &dyn BoundaryCurve<f64>, spec: &PatchSpec) -> Result<PatchGrid, MeshError> {
    let half = spec.half;
    if !(half > 1e-280) {
        return Err(MeshError::FeatureTooSmall(2.0 * half));
    }
    let frame = Frame::new(curve, spec.center, half);
    let radius = half + spec.reach;
    let x_int = (radius / frame.h.norm()).acosh();

    let m = spec.angular.max(4).next_multiple_of(2);
    let mut xs = vec![x_int];
    // Radial steps keep the physical cell size near the interface spacing until the
    // local scale `|h| cosh X` has shrunk enough for the step to reach `max_step`.
    let dy = std::f64::consts::PI / m as f64;
    let mut step = dy;
    loop {
        let x = xs.last().copied().unwrap() - step;
        if x <= 0.5 * step {
            break;
        }
        xs.push(x);
        let scaled = dy * (x_int - x).exp() * (1.0 + (-2.0 * x_int).exp()) / (1.0 + (-2.0 * x).exp());
        step = (step * spec.growth).min(spec.max_step).min(scaled);
    }
    xs.push(0.0);
    xs.reverse();
    let layers = xs.len();

    let mut t_bottom = vec![half; layers];
    let mut t_top = vec![-half; layers];
    for i in 1..layers {
        t_bottom[i] = frame.solve_layer(half, spec.room, 1.0, xs[i])?;
        t_top[i] = frame.solve_layer(half, spec.room, -1.0, xs[i])?;
    }
    let t_left: Vec<f64> = (0..=m)
        .map(|k| match k {
            0 => half,
            k if k == m => -half,
            k => half * (std::f64::consts::PI * k as f64 / m as f64).cos(),
        })
        .collect();

    let mut zeta = vec![vec![[0.0; 2]; m + 1]; layers];
    let mut pos = vec![vec![[0.0; 2]; m + 1]; layers];
    for k in 0..=m {
        let z = match k {
            0 => Complex64::new(0.0, 0.0),
            k if k == m => Complex64::new(0.0, std::f64::consts::PI),
            _ => frame.zeta(t_left[k]),
        };
        zeta[0][k] = [z.re, z.im];
        pos[0][k] = curve.point(spec.center + t_left[k]);
    }
    for i in 1..layers {
        let zb = frame.zeta(t_bottom[i]);
        let zt = frame.zeta(t_top[i]);
        for k in 0..=m {
            let (z, p) = if k == 0 {
                (zb, curve.point(spec.center + t_bottom[i]))
            } else if k == m {
                (zt, curve.point(spec.center + t_top[i]))
            } else {
                let y = zb.im + (zt.im - zb.im) * k as f64 / m as f64;
                let z = Complex64::new(xs[i], y);
                (z, frame.physical(z))
            };
            zeta[i][k] = [z.re, z.im];
            pos[i][k] = p;
        }
    }

    Ok(PatchGrid {
        reach: spec.reach,
        patch: Patch {
            center: spec.center,
            half,
            ln_scale: frame.h.norm().ln(),
            x_interface: x_int,
            feature: spec.feature,
        },
        m,
        zeta,
        pos,
        t_bottom,
        t_top,
        t_left,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use freqbc_core::geometry::Circle;

    fn spec(half: f64) -> PatchSpec {
        PatchSpec {
            center: 1.0,
            half,
            reach: 0.2,
            room: 0.3,
            feature: Tag::Dirichlet,
            angular: 16,
            growth: 1.4,
            max_step: 3.0,
        }
    }

    #[test]
    fn boundary_vertices_lie_on_expected_lines() {
        let c = Circle::<f64>::unit();
        for half in [0.05, 1e-8, 1e-60] {
            let g = build_patch(&c, &spec(half)).unwrap();
            let l = g.layers();
            for i in 1..l {
                let xb = g.zeta[i][0][0];
                let xt = g.zeta[i][g.m][0];
                assert!((xb - xt).abs() < 1e-9 * xb.max(1.0), "{half} {i} {xb} {xt}");
                assert!(g.zeta[i][0][1] >= -1e-12 && g.zeta[i][g.m][1] <= std::f64::consts::PI + 1e-12);
            }
            // The feature itself maps to Re ζ ≈ 0, slightly negative on a convex curve
            // by an amount proportional to the curvature times the half-length.
            for k in 1..g.m {
                let x = g.zeta[0][k][0];
                assert!(x <= 1e-12 && x > -half, "{x}");
            }
            // The interface sits at distance ≈ radius from the midpoint.
            let p = g.pos[l - 1][g.m / 2];
            let q = c.point(1.0);
            let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            assert!((d - (half + 0.2)).abs() < 0.02 * (half + 0.2), "{d}");
        }
    }

    #[test]
    fn zeta_branch_continues_across_the_segment() {
        let above = zeta_of(Complex64::new(0.3, 1e-9));
        let below = zeta_of(Complex64::new(0.3, -1e-9));
        assert!((above.im - below.im).abs() < 1e-8);
        assert!(above.re > 0.0 && below.re < 0.0);
        for re in [3.0f64, -3.0, 1e40] {
            let above = zeta_of(Complex64::new(re, 1e-9));
            let below = zeta_of(Complex64::new(re, -1e-9));
            assert!((above - below).norm() < 1e-8, "{re} {above} {below}");
        }
    }
}
