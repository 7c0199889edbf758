//! Explicit harmonic cell functions of the boundary layer and their exact identities.
//!
//! `X` and `X_η` live on the half-strip `ξ₂ > 0`, π-periodic in `ξ₁`; `Y`, `Y₁` live on the
//! upper half-plane around a single rescaled Dirichlet segment `(-2α, 2β)`.

use crate::cutoff::smooth_step;
use crate::quad::{adaptive, QuadError};
use crate::Real;
use num_complex::Complex;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayerError {
    #[error("point lies within {0:e} of the singular lattice")]
    NearLattice(f64),
    #[error("point lies within {0:e} of a segment endpoint")]
    NearEndpoint(f64),
    #[error("eta must lie in (0, pi/2], got {0}")]
    BadEta(f64),
    #[error("segment half-lengths must be nonnegative with positive sum")]
    BadShape,
    #[error("point must satisfy xi_2 >= 0")]
    LowerHalfPlane,
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Scaled point `ξ = (ξ₁, ξ₂)`, `z = ξ₁ + iξ₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPoint<T> {
    pub xi1: T,
    pub xi2: T,
}

impl<T: Real> CellPoint<T> {
    pub fn new(xi1: T, xi2: T) -> Self {
        CellPoint { xi1, xi2 }
    }
    fn z(&self) -> Complex<T> {
        Complex::new(self.xi1, self.xi2)
    }
    /// `ξ₁` reduced into `[-π/2, π/2)`.
    fn reduced(&self) -> T {
        let p = T::PI();
        let half = p / T::lit(2.0);
        let r = (self.xi1 + half) % p;
        let r = if r < T::zero() { r + p } else { r };
        r - half
    }
}

/// Rescaled Dirichlet segment `(-2α, 2β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcShape<T> {
    pub alpha: T,
    pub beta: T,
}

const LATTICE_GUARD: f64 = 1e-12;
/// Above this height `sin z` is replaced by its exponential form.
const TALL: f64 = 5.0;

fn check_upper<T: Real>(p: &CellPoint<T>) -> Result<(), LayerError> {
    if p.xi2 < T::zero() {
        Err(LayerError::LowerHalfPlane)
    } else {
        Ok(())
    }
}

/// `X(ξ) = Re ln sin z + ln 2 - ξ₂`, evaluated as `ln|1 - e^{2iz}|`.
pub fn eval_x<T: Real>(p: CellPoint<T>) -> Result<T, LayerError> {
    check_upper(&p)?;
    let r1 = p.reduced();
    let dist = r1.hypot(p.xi2);
    if dist < T::lit(LATTICE_GUARD) {
        return Err(LayerError::NearLattice(dist.f64()));
    }
    Ok(log_one_minus_q(p))
}

fn log_one_minus_q<T: Real>(p: CellPoint<T>) -> T {
    let two = T::lit(2.0);
    let e = (-two * p.xi2).exp_m1();
    let r = (-two * p.xi2).exp();
    let s = p.xi1.sin();
    (e * e + T::lit(4.0) * r * s * s).ln() / two
}

fn check_eta<T: Real>(eta: T) -> Result<T, LayerError> {
    if !(eta > T::zero() && eta <= T::FRAC_PI_2() * (T::one() + T::epsilon())) {
        return Err(LayerError::BadEta(eta.f64()));
    }
    let k = eta.sin();
    Ok(k * k)
}

/// `q = e^{2iz}` and `1/sin²z = -4q/(1-q)²`.
fn inv_sin2_tall<T: Real>(p: CellPoint<T>) -> (Complex<T>, Complex<T>) {
    let two = T::lit(2.0);
    let q = Complex::from_polar((-two * p.xi2).exp(), two * p.xi1);
    let one = Complex::new(T::one(), T::zero());
    let d = one - q;
    (q, q * T::lit(-4.0) / (d * d))
}

/// `X_η(ξ) = Re ln(sin z + √(sin²z - sin²η)) - ξ₂` with the branch `√(·) ~ sin z` at infinity.
pub fn eval_x_eta<T: Real>(p: CellPoint<T>, eta: T) -> Result<T, LayerError> {
    check_upper(&p)?;
    let k = check_eta(eta)?;
    let one = Complex::new(T::one(), T::zero());
    if p.xi2 == T::zero() && p.reduced().abs() <= eta {
        return Ok(eta.sin().ln());
    }
    if p.xi2 > T::lit(TALL) {
        let (_, c) = inv_sin2_tall(p);
        let root = (one - c * k).sqrt();
        return Ok(log_one_minus_q(p) - T::LN_2() + (one + root).norm().ln());
    }
    let z = p.z();
    let w = z.sin();
    let r = root_near(z, w, eta);
    Ok((w + r).norm().ln() - p.xi2)
}

/// `√(sin²z - sin²η)` on the decaying branch, via `sin(z-η) sin(z+η)` to keep relative accuracy.
fn root_near<T: Real>(z: Complex<T>, w: Complex<T>, eta: T) -> Complex<T> {
    let e = Complex::new(eta, T::zero());
    let p = (z - e).sin() * (z + e).sin();
    w * (p / (w * w)).sqrt()
}

/// Gradient `(∂X_η/∂ξ₁, ∂X_η/∂ξ₂)` at an interior point (or on the Neumann part of the axis).
pub fn grad_x_eta<T: Real>(p: CellPoint<T>, eta: T) -> Result<[T; 2], LayerError> {
    check_upper(&p)?;
    let k = check_eta(eta)?;
    let g = dx_eta_dz(p, eta, k);
    Ok([g.re, -g.im])
}

/// Complex derivative of the analytic function whose real part is `X_η`.
fn dx_eta_dz<T: Real>(p: CellPoint<T>, eta: T, k: T) -> Complex<T> {
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    if p.xi2 > T::lit(TALL) {
        let (q, c) = inv_sin2_tall(p);
        let cot = i * (one + q) / (q - one);
        cot / (one - c * k).sqrt() + i
    } else {
        let z = p.z();
        let w = z.sin();
        z.cos() / root_near(z, w, eta) + i
    }
}

/// Boundary limit of `∂X_η/∂ξ₂` on the Dirichlet part `|ξ₁| < η` (from `ξ₂ > 0`).
pub fn dirichlet_flux_density<T: Real>(xi1: T, eta: T) -> Result<T, LayerError> {
    check_eta(eta)?;
    let d = (eta - xi1).sin() * (eta + xi1).sin();
    Ok(xi1.cos() / d.sqrt() - T::one())
}

fn shape_sum<T: Real>(shape: &ArcShape<T>) -> Result<T, LayerError> {
    let s = shape.alpha + shape.beta;
    if shape.alpha < T::zero() || shape.beta < T::zero() || !(s > T::zero()) {
        return Err(LayerError::BadShape);
    }
    Ok(s)
}

/// `(Y, Y₁)` with `y = (ς₁ + iς₂ + α - β)/(α + β)`, `Y = Re ln(y + √(y²-1))`,
/// `Y₁ = (α+β) Re √(y²-1)`, the root continued from `√(y²-1) ~ y` at infinity.
pub fn eval_y<T: Real>(p: CellPoint<T>, shape: ArcShape<T>) -> Result<(T, T), LayerError> {
    check_upper(&p)?;
    let s = shape_sum(&shape)?;
    let y = Complex::new(p.xi1 + shape.alpha - shape.beta, p.xi2) / s;
    // Closed segment, endpoints included: Y and Y₁ vanish there.
    if p.xi2 == T::zero() && y.re.abs() <= T::one() {
        return Ok((T::zero(), T::zero()));
    }
    check_endpoints(&p, &shape)?;
    let one = Complex::new(T::one(), T::zero());
    let r = y * (one - one / (y * y)).sqrt();
    Ok(((y + r).norm().ln(), s * r.re))
}

fn check_endpoints<T: Real>(p: &CellPoint<T>, shape: &ArcShape<T>) -> Result<(), LayerError> {
    let two = T::lit(2.0);
    let de = (p.xi1 + two * shape.alpha)
        .hypot(p.xi2)
        .min((p.xi1 - two * shape.beta).hypot(p.xi2));
    if de < T::lit(LATTICE_GUARD) {
        return Err(LayerError::NearEndpoint(de.f64()));
    }
    Ok(())
}

/// Gradient of `Y` at an interior point.
pub fn grad_y<T: Real>(p: CellPoint<T>, shape: ArcShape<T>) -> Result<[T; 2], LayerError> {
    check_upper(&p)?;
    let s = shape_sum(&shape)?;
    check_endpoints(&p, &shape)?;
    let y = Complex::new(p.xi1 + shape.alpha - shape.beta, p.xi2) / s;
    let one = Complex::new(T::one(), T::zero());
    let r = y * (one - one / (y * y)).sqrt();
    let d = one / (r * s);
    Ok([d.re, -d.im])
}

/// The three exact cell integrals over the period strip `Π = {|ξ₁| < π/2, ξ₂ > 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellIntegrals<T> {
    pub eta: T,
    /// `∫_{γ^η∩Π} ∂X_η/∂ξ₂ dξ₁`.
    pub flux: T,
    /// `∫_{Γ^η∩Π} X_η dξ₁`.
    pub trace: T,
    /// `‖∇X_η‖_{L²(Π)}`.
    pub grad_norm: T,
    /// Quadrature plus truncation error estimate for `grad_norm²`.
    pub grad_error: T,
}

/// Height at which the strip integral is truncated.
pub const STRIP_HEIGHT: f64 = 20.0;

pub fn cell_integrals<T: Real>(eta: T, quad_tol: T) -> Result<CellIntegrals<T>, LayerError> {
    let k = check_eta(eta)?;
    if eta >= T::FRAC_PI_2() {
        return Err(LayerError::BadEta(eta.f64()));
    }
    let two = T::lit(2.0);
    let half_pi = T::FRAC_PI_2();
    let cap = 4000;

    // Flux: ξ₁ = η cos u removes the inverse square root at ξ₁ = η.
    let flux_integrand = |u: T| {
        let xi1 = eta * u.cos();
        let h = (u / two).sin();
        let near = (two * eta * h * h).sin();
        let far = (eta + xi1).sin();
        eta * xi1.cos() * u.sin() / (near * far).sqrt() - eta * u.sin()
    };
    let flux = two * adaptive(flux_integrand, &[T::zero(), half_pi], quad_tol, T::zero(), cap)?.value;

    // Trace on the Neumann part: ξ₁ = η + (π/2 - η)v² smooths the square-root onset.
    let span = half_pi - eta;
    let trace_integrand = |v: T| {
        let xi1 = eta + span * v * v;
        let val = eval_x_eta(CellPoint::new(xi1, T::zero()), eta).unwrap_or(T::nan());
        val * two * span * v
    };
    let trace = two * adaptive(trace_integrand, &[T::zero(), T::one()], quad_tol, T::zero(), cap)?.value;

    // Gradient norm on the truncated strip, doubled by evenness. The integrand blows up like
    // 1/ρ at the junction (η, 0); a smooth partition of unity moves that part to polar
    // coordinates with ρ = t², leaving a smooth Cartesian remainder.
    let grad2 = |xi1: T, xi2: T| dx_eta_dz(CellPoint::new(xi1, xi2), eta, k).norm_sqr();
    let rho0 = eta.min(half_pi - eta) / two;
    let omega = |rho: T| T::one() - smooth_step((rho / rho0 - T::lit(0.5)) / T::lit(0.5));
    let inner_tol = quad_tol * T::lit(1e-2);
    let rel = T::lit(1e-12);
    let polar_inner = |phi: T| {
        let (c, sn) = (phi.cos(), phi.sin());
        adaptive(
            |t: T| {
                let rho = t * t;
                grad2(eta + rho * c, rho * sn) * omega(rho) * two * t * t * t
            },
            &[T::zero(), rho0.sqrt()],
            inner_tol,
            rel,
            cap,
        )
        .map(|q| q.value)
        .unwrap_or(T::nan())
    };
    let near = adaptive(polar_inner, &[T::zero(), half_pi, T::PI()], quad_tol * T::lit(0.1), rel, cap)?;
    let smooth = |xi1: T, xi2: T| {
        let rho = (xi1 - eta).hypot(xi2);
        if rho >= rho0 {
            grad2(xi1, xi2)
        } else {
            grad2(xi1, xi2) * (T::one() - omega(rho))
        }
    };
    let inner = |xi2: T| {
        adaptive(|x| smooth(x, xi2), &[T::zero(), eta - rho0, eta, eta + rho0, half_pi], inner_tol, rel, cap)
            .map(|q| q.value)
            .unwrap_or(T::nan())
    };
    let top = T::lit(STRIP_HEIGHT);
    let outer_bp = [T::zero(), rho0, T::one(), T::lit(5.0), top];
    let far = adaptive(inner, &outer_bp, quad_tol * T::lit(0.1), rel, cap)?;
    let g = crate::quad::Quadrature {
        value: near.value + far.value,
        error: near.error + far.error,
        intervals: near.intervals + far.intervals,
    };
    if !g.value.is_finite() {
        return Err(LayerError::Quadrature(QuadError {
            estimate: g.value.f64(),
            error: g.error.f64(),
            intervals: g.intervals,
        }));
    }
    // |G'|² decays like e^{-4ξ₂}; bound the tail by the top-row value.
    let top_row = (0..8)
        .map(|i| grad2(half_pi * T::of(i) / T::lit(8.0), top))
        .fold(T::zero(), T::max);
    let tail = half_pi * top_row / T::lit(4.0);
    let grad_sq = two * (g.value + tail);
    Ok(CellIntegrals {
        eta,
        flux,
        trace,
        grad_norm: grad_sq.sqrt(),
        grad_error: two * (g.error + tail),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2, PI};

    fn pt(a: f64, b: f64) -> CellPoint<f64> {
        CellPoint::new(a, b)
    }

    #[test]
    fn x_examples() {
        assert!((eval_x(pt(FRAC_PI_2, 0.0)).unwrap() - LN_2).abs() < 1e-15);
        assert!(eval_x(pt(0.3, 10.0)).unwrap().abs() <= 1e-8);
        assert!(eval_x(pt(PI, 1e-13)).is_err());
        let rho = 1e-4;
        let v = eval_x(pt(rho, 0.0)).unwrap();
        assert!((v - rho.ln() - LN_2).abs() <= 1e-7);
        // oblique approach keeps the -ξ₂ term
        let (a, b) = (rho * 0.6, rho * 0.8);
        let v = eval_x(pt(a, b)).unwrap();
        assert!((v - rho.ln() - LN_2 + b).abs() <= 1e-7);
    }

    #[test]
    fn x_periodic_even_and_matches_direct_formula() {
        for &(a, b) in &[(0.3, 0.2), (1.1, 2.0), (-0.7, 0.01)] {
            let v = eval_x(pt(a, b)).unwrap();
            assert!((v - eval_x(pt(a + PI, b)).unwrap()).abs() < 1e-13);
            assert!((v - eval_x(pt(-a, b)).unwrap()).abs() < 1e-14);
            let direct = Complex::new(a, b).sin().norm().ln() + LN_2 - b;
            assert!((v - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn x_eta_boundary_values() {
        let v = eval_x_eta(pt(0.1, 0.0), 0.2).unwrap();
        assert!((v - 0.2f64.sin().ln()).abs() < 1e-12);
        for &(a, b) in &[(0.3, 0.0), (0.9, 0.4), (0.0, 3.0), (1.2, 7.0), (2.0, 0.05)] {
            assert!(eval_x_eta(pt(a, b), FRAC_PI_2).unwrap().abs() < 1e-12);
        }
        // Neumann part: ∂X_η/∂ξ₂ = -1
        for eta in [0.2, 0.5, 1.0, 1.4] {
            for xi1 in [eta + 0.05, 1.5, PI - eta - 0.05] {
                let g = grad_x_eta(pt(xi1, 0.0), eta).unwrap();
                assert!((g[1] + 1.0).abs() < 1e-12, "eta {eta} xi1 {xi1}: {g:?}");
            }
        }
    }

    #[test]
    fn x_eta_continuous_across_heights_and_decays() {
        for eta in [0.2, 1.0] {
            for a in [0.1, 0.8, 1.4] {
                let lo = eval_x_eta(pt(a, TALL - 1e-9), eta).unwrap();
                let hi = eval_x_eta(pt(a, TALL + 1e-9), eta).unwrap();
                assert!((lo - hi).abs() < 1e-12);
                let g0 = grad_x_eta(pt(a, TALL - 1e-9), eta).unwrap();
                let g1 = grad_x_eta(pt(a, TALL + 1e-9), eta).unwrap();
                assert!((g0[0] - g1[0]).abs() + (g0[1] - g1[1]).abs() < 1e-10);
            }
            assert!(eval_x_eta(pt(0.4, 15.0), eta).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_flux_matches_interior_limit() {
        let eta = 0.5;
        for xi1 in [-0.4, 0.0, 0.2, 0.45] {
            let h = 1e-7;
            let fd = (eval_x_eta(pt(xi1, h), eta).unwrap() - eval_x_eta(pt(xi1, 0.0), eta).unwrap()) / h;
            let exact = dirichlet_flux_density(xi1, eta).unwrap();
            assert!((fd - exact).abs() < 1e-4 * exact.abs().max(1.0), "{fd} vs {exact}");
        }
    }

    /// Compact 9-point Laplacian; fourth-order accurate on harmonic functions.
    fn laplacian(f: impl Fn(f64, f64) -> f64, a: f64, b: f64) -> f64 {
        let h = 1e-3;
        let edges = f(a + h, b) + f(a - h, b) + f(a, b + h) + f(a, b - h);
        let corners = f(a + h, b + h) + f(a - h, b + h) + f(a + h, b - h) + f(a - h, b - h);
        (4.0 * edges + corners - 20.0 * f(a, b)) / (6.0 * h * h)
    }

    #[test]
    fn harmonic() {
        let shape = ArcShape { alpha: 0.3, beta: 0.5 };
        for &(a, b) in &[(0.3, 0.5), (1.0, 1.2), (-0.6, 0.3), (0.2, 3.0)] {
            assert!(laplacian(|x, y| eval_x(pt(x, y)).unwrap(), a, b).abs() < 1e-6);
            assert!(laplacian(|x, y| eval_x_eta(pt(x, y), 0.7).unwrap(), a, b).abs() < 1e-6);
            assert!(laplacian(|x, y| eval_y(pt(x, y), shape).unwrap().0, a, b).abs() < 1e-6);
            let scale = eval_y(pt(a, b), shape).unwrap().1.abs().max(1.0);
            assert!(laplacian(|x, y| eval_y(pt(x, y), shape).unwrap().1, a, b).abs() < 1e-6 * scale);
        }
    }

    #[test]
    fn y_boundary_behaviour() {
        let shape = ArcShape { alpha: 0.3, beta: 0.5 };
        assert_eq!(eval_y(pt(1.0, 0.0), shape).unwrap().0, 0.0);
        assert_eq!(eval_y(pt(-0.6, 0.0), shape).unwrap().0, 0.0);
        assert!(eval_y(pt(1.0, 1e-13), shape).is_err());
        assert!(grad_y(pt(1.0, 0.0), shape).is_err());
        for i in 1..=64 {
            let x = -0.6 + 1.6 * i as f64 / 65.0;
            let (y, y1) = eval_y(pt(x, 0.0), shape).unwrap();
            assert!(y.abs() < 1e-10 && y1.abs() < 1e-10);
            // limit from above agrees
            let (y, _) = eval_y(pt(x, 1e-12), shape).unwrap();
            assert!(y.abs() < 1e-9);
        }
        for x in [-3.0, -0.7, 1.2, 4.0] {
            let g = grad_y(pt(x, 0.0), shape).unwrap();
            assert!(g[1].abs() < 1e-12);
        }
    }

    #[test]
    fn y_far_field() {
        let shape = ArcShape { alpha: 0.5, beta: 0.5 };
        let r = 1e3;
        let p = pt(r * FRAC_PI_4.cos(), r * FRAC_PI_4.sin());
        let (y, y1) = eval_y(p, shape).unwrap();
        assert!((y - r.ln() - (LN_2 - 1.0f64.ln())).abs() < 1e-5);
        assert!((y1 - p.xi1).abs() <= 1e-2);
        // asymmetric shape: the companion carries the offset α - β
        let shape = ArcShape { alpha: 0.2, beta: 0.7 };
        let (y, y1) = eval_y(p, shape).unwrap();
        assert!((y - r.ln() - (LN_2 - 0.9f64.ln())).abs() < 1e-3);
        assert!((y1 - p.xi1 - (0.2 - 0.7)).abs() <= 1e-2);
    }

    #[test]
    fn pi_quarter_identities() {
        let c = cell_integrals(FRAC_PI_4, 1e-11).unwrap();
        assert!((c.flux - FRAC_PI_2).abs() < 1e-8);
        assert!((c.trace - FRAC_PI_4 * LN_2).abs() < 1e-8);
        assert!((c.grad_norm.powi(2) - PI * LN_2 / 2.0).abs() < 1e-6);
    }

    #[test]
    fn single_precision_evaluation() {
        let v = eval_x(CellPoint::new(std::f32::consts::FRAC_PI_2, 0.0)).unwrap();
        assert!((v - std::f32::consts::LN_2).abs() < 1e-6);
        let v = eval_x_eta(CellPoint::new(0.1f32, 0.0), 0.2).unwrap();
        assert!((v - 0.2f32.sin().ln()).abs() < 1e-6);
    }
}
