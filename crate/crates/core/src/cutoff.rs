//! Smooth cutoff used by the profile function.

use crate::Real;

fn psi<T: Real>(u: T) -> T {
    if u > T::zero() {
        (-u.recip()).exp()
    } else {
        T::zero()
    }
}

/// Smooth step rising from 0 on `u <= 0` to 1 on `u >= 1`.
pub fn smooth_step<T: Real>(u: T) -> T {
    let p = psi(u);
    let q = psi(T::one() - u);
    p / (p + q)
}

/// `chi(t)`: equals 1 for `t <= 1/4`, 0 for `t >= 3/4`, infinitely smooth in between.
pub fn chi<T: Real>(t: T) -> T {
    let three_quarters = T::lit(0.75);
    smooth_step((three_quarters - t) / T::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_values() {
        assert_eq!(chi(0.0_f64), 1.0);
        assert_eq!(chi(0.25_f64), 1.0);
        assert_eq!(chi(1.0_f64), 0.0);
        assert_eq!(chi(0.75_f64), 0.0);
        assert!((chi(0.5_f64) - 0.5).abs() < 1e-15);
        assert!((chi(0.5_f32) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn symmetric_and_monotone() {
        let mut prev = 1.0;
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            let c = chi(t);
            assert!(c <= prev + 1e-15);
            assert!((0.0..=1.0).contains(&c));
            prev = c;
            if (0.25..=0.75).contains(&t) {
                assert!((c + chi(1.0 - t) - 1.0).abs() < 1e-14);
            }
        }
    }
}
