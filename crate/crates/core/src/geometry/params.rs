//! The small parameters `ε`, `η`, `μ`, `σ` and the relation `η = exp(-1/(ε(A+μ)))`.

use crate::Real;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("number of arcs must be even and at least 4, got {0}")]
    BadCount(usize),
    #[error("eta must lie in (0, 1) to define mu, got {0}")]
    EtaOutOfRange(f64),
    #[error("A + mu must be positive, got {0}")]
    NonPositive(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallParams<T> {
    pub epsilon: T,
    pub eta: T,
    /// `μ = -(ε ln η)^{-1} - A`.
    pub mu: T,
    pub robin_a: T,
    pub sigma: T,
}

pub fn epsilon_of<T: Real>(n: usize) -> Result<T, ParamError> {
    if n < 4 || n % 2 != 0 {
        return Err(ParamError::BadCount(n));
    }
    Ok(T::lit(2.0) / T::of(n))
}

/// `ln η` from `(ε, A, μ)`; use this rather than `η` itself when `η` underflows.
pub fn log_eta<T: Real>(epsilon: T, robin_a: T, mu: T) -> Result<T, ParamError> {
    let s = robin_a + mu;
    if !(s > T::zero()) {
        return Err(ParamError::NonPositive(s.f64()));
    }
    Ok(-(epsilon * s).recip())
}

pub fn eta_of<T: Real>(epsilon: T, robin_a: T, mu: T) -> Result<T, ParamError> {
    Ok(log_eta(epsilon, robin_a, mu)?.exp())
}

impl<T: Real> SmallParams<T> {
    /// Parameters for a given `N`, `η`, `A`; `sigma` filled in by the caller's map.
    pub fn new(n: usize, eta: T, robin_a: T, sigma: T) -> Result<Self, ParamError> {
        let epsilon = epsilon_of::<T>(n)?;
        if !(eta > T::zero() && eta < T::one()) {
            return Err(ParamError::EtaOutOfRange(eta.f64()));
        }
        let mu = -(epsilon * eta.ln()).recip() - robin_a;
        Ok(SmallParams { epsilon, eta, mu, robin_a, sigma })
    }

    /// Parameters with `μ` as the independent dial; `η` is derived.
    pub fn from_mu(n: usize, mu: T, robin_a: T, sigma: T) -> Result<Self, ParamError> {
        let epsilon = epsilon_of::<T>(n)?;
        let eta = eta_of(epsilon, robin_a, mu)?;
        Ok(SmallParams { epsilon, eta, mu, robin_a, sigma })
    }
}
