//! Least-squares power laws on log-log data.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least 3 points, got {0}")]
    TooFew(usize),
    #[error("xs and ys differ in length ({0} vs {1})")]
    Length(usize, usize),
    #[error("data must be positive and finite: x = {x}, y = {y}")]
    NonPositive { x: f64, y: f64 },
}

/// `ln y = slope ln x + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `ys[i+1] / ys[i]`.
    pub ratios: Vec<f64>,
}

pub fn fit_rate(xs: &[f64], ys: &[f64]) -> Result<RateFit, FitError> {
    if xs.len() != ys.len() {
        return Err(FitError::Length(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(FitError::TooFew(xs.len()));
    }
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(FitError::NonPositive { x, y });
        }
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        ratios: ys.windows(2).map(|w| w[1] / w[0]).collect(),
    })
}
