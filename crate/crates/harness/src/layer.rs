//! Cell-function tables and their exact identities.

use freqbc_core::boundary_layer::{cell_integrals, eval_x_eta, eval_y, grad_x_eta, ArcShape, CellPoint};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRow {
    pub eta: f64,
    pub flux: f64,
    pub trace: f64,
    pub grad_norm: f64,
    /// Deviations from `π − 2η`, `−2η ln sin η` and `π|ln sin η|` (for `grad_norm²`).
    pub flux_err: f64,
    pub trace_err: f64,
    pub grad_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub rows: Vec<LayerRow>,
    /// Largest `|X_η − ln sin η|` on the Dirichlet part of the axis.
    pub dirichlet_value_err: f64,
    /// Largest `|∂X_η/∂ξ₂ + 1|` on the Neumann part.
    pub neumann_flux_err: f64,
    /// Largest `|Y − ln|ς| − ln 2 + ln(α+β) − (α−β)ς₁/|ς|²|` at `|ς| = 10³`.
    pub far_y_err: f64,
    /// Largest `|Y₁ − ς₁ − (α−β)|` at `|ς| = 10³`.
    pub far_y1_err: f64,
}

pub const REFERENCE_ETAS: [f64; 4] = [0.2, 0.5, 1.0, 1.4];

pub fn layer_report(etas: &[f64], quad_tol: f64) -> Result<LayerReport, freqbc_core::boundary_layer::LayerError> {
    let mut rows = Vec::new();
    let mut dv: f64 = 0.0;
    let mut nf: f64 = 0.0;
    for &eta in etas {
        let c = cell_integrals(eta, quad_tol)?;
        let ls = eta.sin().ln();
        rows.push(LayerRow {
            eta,
            flux: c.flux,
            trace: c.trace,
            grad_norm: c.grad_norm,
            flux_err: c.flux - (PI - 2.0 * eta),
            trace_err: c.trace + 2.0 * eta * ls,
            grad_err: c.grad_norm.powi(2) - PI * ls.abs(),
        });
        for i in 1..64 {
            let t = i as f64 / 64.0;
            // Several periods, to exercise the reduction.
            let shift = PI * (i % 5) as f64 - 2.0 * PI;
            let on = -eta + 2.0 * eta * t;
            dv = dv.max((eval_x_eta(CellPoint::new(on + shift, 0.0), eta)? - ls).abs());
            let off = eta + (PI - 2.0 * eta) * t;
            nf = nf.max((grad_x_eta(CellPoint::new(off + shift, 0.0), eta)?[1] + 1.0).abs());
        }
    }
    let mut fy: f64 = 0.0;
    let mut fy1: f64 = 0.0;
    for (alpha, beta) in [(0.5, 0.5), (0.3, 0.7), (1.0, 0.25), (0.05, 0.1)] {
        let shape = ArcShape { alpha, beta };
        for deg in [15.0f64, 45.0, 90.0, 135.0] {
            let r = 1e3;
            let p = CellPoint::new(r * deg.to_radians().cos(), r * deg.to_radians().sin());
            let (y, y1) = eval_y(p, shape)?;
            let first = (alpha - beta) * p.xi1 / (r * r);
            fy = fy.max((y - r.ln() - 2f64.ln() + (alpha + beta).ln() - first).abs());
            // √(y²−1) = y − 1/(2y) + …, so Y₁ − ς₁ tends to α − β, zero only for a symmetric arc.
            fy1 = fy1.max((y1 - p.xi1 - (alpha - beta)).abs());
        }
    }
    Ok(LayerReport {
        rows,
        dirichlet_value_err: dv,
        neumann_flux_err: nf,
        far_y_err: fy,
        far_y1_err: fy1,
    })
}

impl LayerReport {
    pub fn passed(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.flux_err.abs() <= 1e-8 && r.trace_err.abs() <= 1e-8 && r.grad_err.abs() <= 1e-6)
            && self.dirichlet_value_err <= 1e-12
            && self.neumann_flux_err <= 1e-12
            && self.far_y_err <= 1e-5
            && self.far_y1_err <= 1e-2
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("eta,flux,trace,grad_norm,flux_err,trace_err,grad_err\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:.15e},{:.15e},{:.15e},{:.3e},{:.3e},{:.3e}",
                r.eta, r.flux, r.trace, r.grad_norm, r.flux_err, r.trace_err, r.grad_err
            );
        }
        s
    }
}
