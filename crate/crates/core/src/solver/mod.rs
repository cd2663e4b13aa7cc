//! Discrete L_p chord Minkowski problem for `p < 0`, `q >= 1`.
//!
//! The outer loop maximizes `J(h) = min_xi Phi_p(h, xi)` over support vectors
//! normalized by `I_q = 1`; the inner minimization is a damped Newton method.
//! A stationary point is rescaled so that `F_{p,q}(Q, .) = mu`.

mod inner;
mod outer;
mod verify;

use serde::{Deserialize, Serialize};

use crate::chord::QuadratureScheme;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;

pub use inner::{inner_center, CenterSolution};
pub use outer::{chord_gradient_check, outer_solve, Diagnostics, GradientCheck, SolveReport, Termination, TraceEntry};
pub use verify::{verify, VerifyReport};

/// Sufficient-decrease parameters of the backtracking line search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Armijo {
    pub c1: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
}

impl Default for Armijo {
    fn default() -> Self {
        Self { c1: 1e-4, backtrack: 0.5, max_backtracks: 40 }
    }
}

/// How the starting support vector is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitRadiusPolicy {
    /// `h = r` on every normal, with `r` chosen so that `I_q = 1`.
    ConstantUnitChordIntegral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub p: f64,
    pub q: f64,
    /// Gradient-norm target of the inner Newton iteration.
    pub inner_tol: f64,
    /// Stationarity residual at which the outer iteration stops.
    pub outer_tol: f64,
    /// Largest per-atom residual on the rescaled solution that counts as converged.
    pub residual_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub armijo: Armijo,
    pub init_radius_policy: InitRadiusPolicy,
    pub scheme: QuadratureScheme,
    pub seed: u64,
    /// Run a finite-difference check of `dI_q/dh = F_q` on the final iterate.
    pub gradient_check: bool,
}

impl SolverConfig {
    pub fn new(n: usize, p: f64, q: f64) -> Self {
        Self {
            p,
            q,
            inner_tol: 1e-12,
            outer_tol: 1e-6,
            residual_tol: 1e-2,
            max_outer: 500,
            max_inner: 50,
            armijo: Armijo::default(),
            init_radius_policy: InitRadiusPolicy::ConstantUnitChordIntegral,
            scheme: QuadratureScheme::for_dim(n),
            seed: 0,
            gradient_check: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        if !(self.q >= 1.0) || !self.q.is_finite() {
            return Err(Error::InvalidQ { q: self.q, reason: "the solver needs q >= 1" });
        }
        for (name, value) in
            [("inner_tol", self.inner_tol), ("outer_tol", self.outer_tol), ("residual_tol", self.residual_tol)]
        {
            if !(value > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {value}")));
            }
        }
        let a = &self.armijo;
        if !(a.c1 > 0.0 && a.c1 < 1.0 && a.backtrack > 0.0 && a.backtrack < 1.0) {
            return Err(Error::Config("Armijo parameters must lie in (0, 1)".into()));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::Config("iteration limits must be positive".into()));
        }
        self.scheme.validate()
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p < 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::PositiveP(p))
    }
}

/// `Phi_p(h, xi) = -(1/p) sum_i (h_i - xi . v_i)^p alpha_i`.
pub fn phi(h: &[f64], xi: &[f64], m: &DiscreteMeasure, p: f64) -> Result<f64> {
    check_p(p)?;
    if h.len() != m.len() {
        return Err(Error::DimensionMismatch { expected: m.len(), found: h.len() });
    }
    if xi.len() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: xi.len() });
    }
    let mut sum = 0.0;
    for (index, ((v, &hi), &a)) in m.normals().iter().zip(h).zip(m.weights()).enumerate() {
        let s = hi - v.iter().zip(xi).map(|(x, y)| x * y).sum::<f64>();
        if !(s > 0.0) {
            return Err(Error::NonPositiveArgument { index });
        }
        sum += s.powf(p) * a;
    }
    Ok(-sum / p)
}
