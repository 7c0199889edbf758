//! One-dimensional size field along a boundary segment.

/// Target edge length on a segment `[0, len]`: grows linearly from `left` and `right`
/// up to `cap`. Equidistribution of `1/size` makes neighbouring edges differ by
/// `exp(slope)`, so `slope = ln ratio`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeField {
    pub len: f64,
    pub left: f64,
    pub right: f64,
    pub cap: f64,
    pub slope: f64,
}

impl SizeField {
    pub fn new(len: f64, left: f64, right: f64, cap: f64, ratio: f64) -> Self {
        SizeField {
            len,
            left: left.min(cap),
            right: right.min(cap),
            cap,
            slope: ratio.ln(),
        }
    }

    pub fn size(&self, x: f64) -> f64 {
        (self.left + self.slope * x)
            .min(self.right + self.slope * (self.len - x))
            .min(self.cap)
    }

    /// Breakpoints of the piecewise linear size: left ramp, plateau, right ramp.
    fn pieces(&self) -> [f64; 2] {
        let g = self.slope;
        let x1 = (self.cap - self.left) / g;
        let x2 = self.len - (self.cap - self.right) / g;
        if x1 <= x2 {
            [x1.clamp(0.0, self.len), x2.clamp(0.0, self.len)]
        } else {
            let m = ((self.right - self.left + g * self.len) / (2.0 * g)).clamp(0.0, self.len);
            [m, m]
        }
    }

    /// `∫_0^x dx / size`.
    pub fn density(&self, x: f64) -> f64 {
        let g = self.slope;
        let [x1, x2] = self.pieces();
        let ramp = |a: f64, d: f64| (1.0 + g * d / a).ln() / g;
        let mut f = ramp(self.left, x.min(x1));
        if x > x1 {
            f += (x.min(x2) - x1) / self.cap;
        }
        if x > x2 {
            let full = ramp(self.right, self.len - x2);
            let rest = ramp(self.right, self.len - x);
            f += full - rest;
        }
        f
    }

    /// Inverse of [`Self::density`] by bisection.
    pub fn position(&self, f: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, self.len);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.density(mid) < f {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * self.len {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Interior points (in `(0, len)`) of a subdivision into at least `min_edges` edges.
    pub fn subdivide(&self, min_edges: usize) -> Vec<f64> {
        let total = self.density(self.len);
        let n = ((total - 1e-9).ceil() as usize).max(min_edges).max(1);
        (1..n).map(|k| self.position(total * k as f64 / n as f64)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_field_gives_equal_edges() {
        let f = SizeField::new(1.0, 0.1, 0.1, 0.1, 2.0);
        let p = f.subdivide(1);
        assert_eq!(p.len(), 9);
        for (k, x) in p.iter().enumerate() {
            assert!((x - 0.1 * (k + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn graded_field_doubles_toward_interior() {
        let f = SizeField::new(10.0, 0.01, 0.01, 1.0, 2.0);
        let mut p = vec![0.0];
        p.extend(f.subdivide(1));
        p.push(10.0);
        let h: Vec<f64> = p.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(h[0] < 0.03);
        for w in h.windows(2) {
            assert!(w[1] / w[0] < 2.6 && w[0] / w[1] < 2.6);
        }
        assert!(h.iter().cloned().fold(0.0, f64::max) <= 1.0 + 1e-9);
    }
}
