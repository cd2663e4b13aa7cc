use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_p, SolverConfig};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::polytope::wulff_shape;

/// Interior minimizer of `xi -> Phi_p(h, xi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterSolution {
    pub xi: Vec<f64>,
    pub grad_norm: f64,
    pub objective: f64,
    /// Smallest Hessian eigenvalue at the returned point.
    pub hessian_min_eig: f64,
    /// Smallest Hessian eigenvalue seen over all Newton iterates.
    pub iterate_min_eig: f64,
    pub iterations: usize,
}

/// Damped Newton from the Chebyshev center of the Wulff shape of `h`.
pub fn inner_center(h: &[f64], m: &DiscreteMeasure, p: f64, cfg: &SolverConfig) -> Result<CenterSolution> {
    check_p(p)?;
    if h.len() != m.len() {
        return Err(Error::DimensionMismatch { expected: m.len(), found: h.len() });
    }
    let shape = wulff_shape(m.normals(), h)?;
    inner_center_from(h, m, p, cfg, shape.center().as_slice())
}

/// Damped Newton from an explicit interior starting point.
pub fn inner_center_from(
    h: &[f64],
    m: &DiscreteMeasure,
    p: f64,
    cfg: &SolverConfig,
    start: &[f64],
) -> Result<CenterSolution> {
    check_p(p)?;
    let n = m.dim();
    let normals = m.normals();
    let alpha = m.weights();
    let mut xi = DVector::from_column_slice(start);
    let mut s = slacks(h, normals, &xi);
    if let Some(index) = s.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::NonPositiveArgument { index });
    }
    let objective = |s: &[f64]| -> f64 { -s.iter().zip(alpha).map(|(x, a)| x.powf(p) * a).sum::<f64>() / p };

    let mut iterate_min_eig = f64::INFINITY;
    let mut value = objective(&s);
    for iteration in 0..=cfg.max_inner {
        let mut g = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        let mut magnitude = 0.0;
        for ((v, &si), &a) in normals.iter().zip(&s).zip(alpha) {
            let t = si.powf(p - 1.0) * a;
            magnitude += t;
            g += v * t;
            hess += (v * v.transpose()) * ((1.0 - p) * si.powf(p - 2.0) * a);
        }
        let eig = hess.clone().symmetric_eigen().eigenvalues;
        let min_eig = eig.min();
        let max_eig = eig.max();
        iterate_min_eig = iterate_min_eig.min(min_eig);
        if !(min_eig > 1e-14 * max_eig) {
            return Err(Error::SingularHessian);
        }
        let grad_norm = g.norm();
        // Gradient entries are sums of terms of size `magnitude`; below this
        // floor the norm is rounding noise.
        let floor = 64.0 * f64::EPSILON * magnitude;
        let done = CenterSolution {
            xi: xi.iter().copied().collect(),
            grad_norm,
            objective: value,
            hessian_min_eig: min_eig,
            iterate_min_eig,
            iterations: iteration,
        };
        if grad_norm <= cfg.inner_tol.max(floor) {
            return Ok(done);
        }
        if iteration == cfg.max_inner {
            return Err(Error::InnerIterations { grad_norm });
        }
        let chol = hess.cholesky().ok_or(Error::SingularHessian)?;
        let step = -chol.solve(&g);
        let decrement = -g.dot(&step);
        // Once the predicted decrease is at rounding level of the objective,
        // full Newton steps are taken as long as they stay interior.
        let quadratic = decrement <= 1e-8 * value.abs();
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &xi + &step * t;
            let st = slacks(h, normals, &trial);
            if st.iter().all(|&x| x > 0.0) {
                let vt = objective(&st);
                if quadratic || vt <= value - 0.25 * t * decrement {
                    xi = trial;
                    s = st;
                    value = vt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            if grad_norm <= 1e3 * floor.max(cfg.inner_tol) {
                return Ok(done);
            }
            return Err(Error::InnerIterations { grad_norm });
        }
    }
    unreachable!("the loop returns on its last iteration")
}

fn slacks(h: &[f64], normals: &[DVector<f64>], xi: &DVector<f64>) -> Vec<f64> {
    normals.iter().zip(h).map(|(v, hi)| hi - v.dot(xi)).collect()
}
