use serde::{Deserialize, Serialize};

use crate::chord::{lp_chord_measure, QuadratureScheme};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::polytope::Polytope;
use crate::tolerances::TOL;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    /// `|F_{p,q}(P, v_i) - alpha_i| / alpha_i` per atom.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub mean_residual: f64,
    /// `F_{p,q}(P, v_i)` per atom.
    pub values: Vec<f64>,
    /// Quadrature error bars on `values`, relative to `alpha_i`.
    pub relative_error_bars: Vec<f64>,
    /// Index of each atom's normal in the polytope's normal list.
    pub matched_normals: Vec<usize>,
}

pub fn verify(poly: &Polytope, m: &DiscreteMeasure, p: f64, q: f64, scheme: &QuadratureScheme) -> Result<VerifyReport> {
    super::check_p(p)?;
    if poly.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: poly.dim(), found: m.dim() });
    }
    let mut matched_normals = Vec::with_capacity(m.len());
    for (index, v) in m.normals().iter().enumerate() {
        let hit = poly
            .normals()
            .iter()
            .position(|w| (w - v).norm() <= TOL.angular_duplicate)
            .ok_or(Error::MissingNormal { index })?;
        matched_normals.push(hit);
    }
    let f = lp_chord_measure(poly, p, q, scheme)?;
    let mut residuals = Vec::with_capacity(m.len());
    let mut values = Vec::with_capacity(m.len());
    let mut relative_error_bars = Vec::with_capacity(m.len());
    for (&k, &a) in matched_normals.iter().zip(m.weights()) {
        values.push(f.values[k]);
        residuals.push((f.values[k] - a).abs() / a);
        relative_error_bars.push(f.estimated_error[k] / a);
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let mean_residual = residuals.iter().sum::<f64>() / residuals.len() as f64;
    Ok(VerifyReport { residuals, max_residual, mean_residual, values, relative_error_bars, matched_normals })
}
