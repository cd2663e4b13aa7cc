use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::inner::{inner_center, CenterSolution};
use super::SolverConfig;
use crate::chord::{chord_integral_and_measure_value, chord_integral_value, QuadratureScheme};
use crate::error::{Error, Result};
use crate::measure::{validate_general_position, DiscreteMeasure};
use crate::polytope::{wulff_shape, Polytope, PolytopeRecord};
use crate::tolerances::TOL;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// `Phi_p(h, o)` after recentring.
    pub objective: f64,
    /// Stationarity residual before rescaling.
    pub residual: f64,
    pub chord_integral: f64,
    /// Accepted step length (0 for the initial entry).
    pub step: f64,
    pub backtracks: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// Stationarity residual reached `outer_tol`.
    Stationary,
    IterationCap,
    LineSearchFailed,
    /// The projected gradient vanished to rounding before `outer_tol`.
    NoAscent,
    /// The objective gain stayed at rounding level for `STAGNATION_LIMIT` iterations.
    Stagnated,
    /// Outer radius exceeded `1e6` times its initial value.
    RadiusSafeguard,
}

/// Fourth-order central differences of `I_q` against `F_q`, one entry per normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub max_deviation: f64,
    pub step: f64,
    pub finite_difference: Vec<f64>,
    pub analytic: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Residual of the proportionality `F_{p,q} ~ mu` on the normalized iterate.
    pub stationarity: f64,
    pub chord_integral: f64,
    pub initial_radius: f64,
    pub center: CenterSolution,
    pub gradient_check: Option<GradientCheck>,
    pub message: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    /// The rescaled solution `Q`.
    #[serde(skip)]
    pub polytope: Polytope,
    #[serde(rename = "polytope")]
    pub polytope_record: PolytopeRecord,
    pub support_trace: Vec<TraceEntry>,
    /// Per-atom `|F_{p,q}(Q, v_i) - alpha_i| / alpha_i`.
    pub residual: Vec<f64>,
    pub max_residual: f64,
    pub scaling_c: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Support vector of the normalized maximizer before rescaling.
    pub normalized_support: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// One recentred, canonical iterate with its quadrature data.
#[derive(Clone)]
struct Iterate {
    poly: Polytope,
    h: Vec<f64>,
    center: CenterSolution,
    objective: f64,
    integral: f64,
    measure: Vec<f64>,
}

fn evaluate(m: &DiscreteMeasure, h: &[f64], cfg: &SolverConfig) -> Result<Iterate> {
    let raw = wulff_shape(m.normals(), h)?;
    let canonical = raw.true_support();
    let center = inner_center(&canonical, m, cfg.p, cfg)?;
    let h: Vec<f64> = canonical
        .iter()
        .zip(m.normals())
        .map(|(hi, v)| hi - v.iter().zip(&center.xi).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let poly = wulff_shape(m.normals(), &h)?;
    let objective = super::phi(&h, &vec![0.0; m.dim()], m, cfg.p)?;
    let (integral, measure) = chord_integral_and_measure_value(&poly, cfg.q, &cfg.scheme)?;
    Ok(Iterate { poly, h, center, objective, integral, measure })
}

/// `max_i |h_i^{1-p} F_i - alpha_i / kappa| / (alpha_i / kappa)` with
/// `kappa = (-p) Phi / (n + q - 1)`.
fn stationarity(it: &Iterate, alpha: &[f64], p: f64, exponent: f64) -> f64 {
    let kappa = -p * it.objective / exponent;
    it.h.iter()
        .zip(&it.measure)
        .zip(alpha)
        .map(|((h, f), a)| {
            let target = a / kappa;
            (h.powf(1.0 - p) * f - target).abs() / target
        })
        .fold(0.0, f64::max)
}

/// Rescaled trial point of the line search and its objective.
fn trial(m: &DiscreteMeasure, h: &[f64], cfg: &SolverConfig, exponent: f64) -> Option<(f64, f64)> {
    let poly = wulff_shape(m.normals(), h).ok()?;
    let integral = chord_integral_value(&poly, cfg.q, &cfg.scheme).ok()?;
    if !(integral > 0.0) {
        return None;
    }
    let lambda = integral.powf(-1.0 / exponent);
    let scaled: Vec<f64> = poly.true_support().iter().map(|x| lambda * x).collect();
    inner_center(&scaled, m, cfg.p, cfg).ok().map(|c| (c.objective, lambda))
}

/// Backtracking count above which the quasi-Newton metric is discarded.
const BACKTRACK_RESET: usize = 8;

/// Armijo backtracking along `direction`, returning the accepted step, the
/// raw trial point, its normalizing factor and the number of halvings.
fn line_search(
    m: &DiscreteMeasure,
    cfg: &SolverConfig,
    state: &Iterate,
    direction: &DVector<f64>,
    slope: f64,
    exponent: f64,
) -> Option<(f64, Vec<f64>, f64, usize)> {
    let mut t = 1.0;
    for backtracks in 0..=cfg.armijo.max_backtracks {
        let candidate: Vec<f64> = state.h.iter().zip(direction.iter()).map(|(x, dx)| x + t * dx).collect();
        if candidate.iter().all(|&x| x > 0.0) {
            if let Some((value, lambda)) = trial(m, &candidate, cfg, exponent) {
                if value >= state.objective + cfg.armijo.c1 * t * slope {
                    return Some((t, candidate, lambda, backtracks));
                }
            }
        }
        t *= cfg.armijo.backtrack;
    }
    None
}

/// Consecutive steps with a rounding-level objective gain after which the
/// iteration stops.
const STAGNATION_LIMIT: usize = 25;

/// Relative size of the rounding noise in `J` from the quadrature sums.
const OBJECTIVE_NOISE: f64 = 1e-12;

/// Step taken once the Armijo gain falls below the rounding noise of `J`:
/// the objective may not drop by more than that noise and the stationarity
/// residual has to decrease.
fn noise_limited_step(
    m: &DiscreteMeasure,
    cfg: &SolverConfig,
    state: &Iterate,
    direction: &DVector<f64>,
    residual: f64,
    exponent: f64,
) -> Option<(f64, f64, usize, Iterate)> {
    let alpha = m.weights();
    let floor = OBJECTIVE_NOISE * state.objective.abs();
    let mut t = 1.0;
    for backtracks in 0..=cfg.armijo.max_backtracks {
        let candidate: Vec<f64> = state.h.iter().zip(direction.iter()).map(|(x, dx)| x + t * dx).collect();
        if candidate.iter().all(|&x| x > 0.0) {
            if let Some((value, lambda)) = trial(m, &candidate, cfg, exponent) {
                if value >= state.objective - floor {
                    let normalized: Vec<f64> = candidate.iter().map(|x| lambda * x).collect();
                    if let Ok(next) = evaluate(m, &normalized, cfg) {
                        if stationarity(&next, alpha, cfg.p, exponent) < residual {
                            return Some((t, lambda, backtracks, next));
                        }
                    }
                }
            }
        }
        t *= cfg.armijo.backtrack;
    }
    None
}

/// Gradient in `h` of `J(I_q(h)^{-1/(n+q-1)} h)` at a recentred iterate,
/// `g - (g . h / F . h) F` with `g_i = -alpha_i h_i^{p-1}`.
fn ascent_gradient(it: &Iterate, alpha: &[f64], p: f64) -> DVector<f64> {
    let g = DVector::from_iterator(it.h.len(), it.h.iter().zip(alpha).map(|(x, a)| -a * x.powf(p - 1.0)));
    let h = DVector::from_column_slice(&it.h);
    let f = DVector::from_column_slice(&it.measure);
    let c = g.dot(&h) / f.dot(&h);
    g - f * c
}

/// `diag(h_i^{2-p} / ((1-p) alpha_i))`, the inverse curvature of `Phi_p` in each `h_i`.
fn diagonal_metric(h: &[f64], alpha: &[f64], p: f64) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(
        h.len(),
        h.iter().zip(alpha).map(|(x, a)| x.powf(2.0 - p) / ((1.0 - p) * a)),
    ))
}

/// Maximizes `J(h) = min_xi Phi_p(h, xi)` on `{I_q = 1}` and rescales the
/// maximizer to `Q = cP`.
///
/// Each step is a BFGS step on the degree-zero extension `J(I_q(h)^{-1/(n+q-1)} h)`
/// with Armijo backtracking, started from the diagonal curvature of `Phi_p`.
/// Every accepted point is renormalized to `I_q = 1` and recentred at the
/// inner minimizer.
pub fn outer_solve(m: &DiscreteMeasure, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let n = m.dim();
    if !(n == 2 || n == 3) {
        return Err(Error::UnsupportedDimension(n));
    }
    if cfg.scheme.directions == 0 {
        return Err(Error::Config("empty quadrature".into()));
    }
    let gp = validate_general_position(m, TOL.subset_det);
    if !gp.in_general_position {
        let reason = match (&gp.dependent_subset, &gp.hemisphere_witness) {
            (Some(s), _) => format!("normals {s:?} are linearly dependent"),
            (None, Some(w)) => format!("all normals lie in the closed hemisphere around {w:?}"),
            _ => "general position check failed".to_string(),
        };
        return Err(Error::NotGeneralPosition(reason));
    }
    let (p, q) = (cfg.p, cfg.q);
    let alpha = m.weights();
    let exponent = n as f64 + q - 1.0;

    let unit = wulff_shape(m.normals(), &vec![1.0; m.len()])?;
    let r = chord_integral_value(&unit, q, &cfg.scheme)?.powf(-1.0 / exponent);
    let mut state = evaluate(m, &vec![r; m.len()], cfg)?;
    let initial_radius = state.poly.outer_radius();
    let mut trace = vec![TraceEntry {
        iteration: 0,
        objective: state.objective,
        residual: stationarity(&state, alpha, p, exponent),
        chord_integral: state.integral,
        step: 0.0,
        backtracks: 0,
    }];

    let mut termination = Termination::IterationCap;
    let mut iterations = 0;
    let mut inverse = diagonal_metric(&state.h, alpha, p);
    let mut scaled_metric = false;
    let mut stagnant = 0;
    let mut best = (trace[0].residual, state.clone());
    loop {
        let residual = trace.last().expect("trace starts nonempty").residual;
        if residual <= cfg.outer_tol {
            termination = Termination::Stationary;
            break;
        }
        if iterations >= cfg.max_outer {
            break;
        }
        if stagnant >= STAGNATION_LIMIT {
            termination = Termination::Stagnated;
            break;
        }
        let grad = ascent_gradient(&state, alpha, p);
        let primary = &inverse * &grad;
        let mut search = None;
        for fresh in [false, true] {
            if fresh {
                // An unscaled metric is still the diagonal one.
                if !scaled_metric {
                    break;
                }
                inverse = diagonal_metric(&state.h, alpha, p);
                scaled_metric = false;
            }
            let direction = &inverse * &grad;
            let slope = grad.dot(&direction);
            if !(slope > 1e-15 * state.objective.abs()) {
                continue;
            }
            if let Some((t, candidate, lambda, backtracks)) = line_search(m, cfg, &state, &direction, slope, exponent) {
                let normalized: Vec<f64> = candidate.iter().map(|x| lambda * x).collect();
                search = Some((direction, t, lambda, backtracks, evaluate(m, &normalized, cfg)?));
                break;
            }
        }
        if search.is_none() {
            let direction = if grad.dot(&primary) > 0.0 { primary } else { &inverse * &grad };
            search = noise_limited_step(m, cfg, &state, &direction, residual, exponent)
                .map(|(t, lambda, backtracks, next)| (direction, t, lambda, backtracks, next));
        }
        let Some((direction, t, lambda, backtracks, next)) = search else {
            let descent_free =
                grad.dot(&(diagonal_metric(&state.h, alpha, p) * &grad)) <= 1e-15 * state.objective.abs();
            termination = if descent_free { Termination::NoAscent } else { Termination::LineSearchFailed };
            break;
        };
        let gain = next.objective - state.objective;
        stagnant = if gain <= 10.0 * OBJECTIVE_NOISE * state.objective.abs() { stagnant + 1 } else { 0 };
        state = next;
        iterations += 1;

        // The extension is invariant under translation and homogeneous of
        // degree zero, so its gradient at the raw trial point is `lambda`
        // times the gradient at the recentred, normalized iterate.
        let s = &direction * t;
        let y = &grad - ascent_gradient(&state, alpha, p) * lambda;
        let sy = s.dot(&y);
        if backtracks > BACKTRACK_RESET {
            inverse = diagonal_metric(&state.h, alpha, p);
            scaled_metric = false;
        } else if sy > 1e-12 * s.norm() * y.norm() {
            if !scaled_metric {
                let dy = &inverse * &y;
                inverse *= sy / y.dot(&dy);
                scaled_metric = true;
            }
            let rho = 1.0 / sy;
            let hy = &inverse * &y;
            let yhy = y.dot(&hy);
            inverse -= (&hy * s.transpose() + &s * hy.transpose()) * rho;
            inverse += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }

        let entry = TraceEntry {
            iteration: iterations,
            objective: state.objective,
            residual: stationarity(&state, alpha, p, exponent),
            chord_integral: state.integral,
            step: t,
            backtracks,
        };
        log::debug!(
            "outer {:>4}: phi {:.12e} residual {:.3e} step {:.3e}",
            entry.iteration,
            entry.objective,
            entry.residual,
            entry.step
        );
        if entry.residual < best.0 {
            best = (entry.residual, state.clone());
        }
        trace.push(entry);
        if state.poly.outer_radius() > 1e6 * initial_radius {
            termination = Termination::RadiusSafeguard;
            break;
        }
    }

    // Once the objective is flat to rounding the residual fluctuates, so the
    // iterate with the smallest residual is reported.
    let (stationarity_value, state) = best;
    let scaling_c = (-p * state.objective / exponent).powf(1.0 / (exponent - p));
    let solution = state.poly.scale(scaling_c)?;
    let (_, f_q) = chord_integral_and_measure_value(&solution, q, &cfg.scheme)?;
    let h_q = solution.true_support();
    let residual: Vec<f64> =
        f_q.iter().zip(&h_q).zip(alpha).map(|((f, h), a)| (h.powf(1.0 - p) * f - a).abs() / a).collect();
    let max_residual = residual.iter().copied().fold(0.0, f64::max);
    let converged = termination != Termination::RadiusSafeguard
        && max_residual <= cfg.residual_tol
        && solution.contains_origin_interior();

    let gradient_check = if cfg.gradient_check {
        Some(chord_gradient_check(&state.poly, q, &cfg.scheme, 1e-4 * state.poly.inner_radius())?)
    } else {
        None
    };
    let message = match termination {
        Termination::RadiusSafeguard => Some(format!(
            "outer radius {:.6e} exceeds 1e6 times the initial radius {:.6e}",
            state.poly.outer_radius(),
            initial_radius
        )),
        Termination::LineSearchFailed => Some("line search found no sufficient ascent".into()),
        Termination::IterationCap => Some(format!("stopped after {} outer iterations", cfg.max_outer)),
        Termination::Stagnated => Some(format!(
            "objective flat to rounding for {STAGNATION_LIMIT} iterations at stationarity {stationarity_value:.3e}"
        )),
        _ => None,
    };
    log::info!(
        "outer solve: {:?} after {} iterations, stationarity {:.3e}, max residual {:.3e}",
        termination,
        iterations,
        stationarity_value,
        max_residual
    );

    Ok(SolveReport {
        polytope_record: solution.to_record(),
        polytope: solution,
        support_trace: trace,
        residual,
        max_residual,
        scaling_c,
        iterations,
        converged,
        termination,
        normalized_support: state.h.clone(),
        diagnostics: Diagnostics {
            stationarity: stationarity_value,
            chord_integral: state.integral,
            initial_radius,
            center: state.center,
            gradient_check,
            message,
        },
    })
}

/// Five-point central differences of `I_q` in each support number against `F_q`.
/// Deviations are relative to `|F_i|`, floored at `1e-9 max_j |F_j|` so that
/// inactive coordinates (both sides zero) report zero.
pub fn chord_gradient_check(p: &Polytope, q: f64, scheme: &QuadratureScheme, step: f64) -> Result<GradientCheck> {
    if !(step > 0.0) {
        return Err(Error::Config(format!("finite-difference step must be positive, got {step}")));
    }
    let (_, analytic) = chord_integral_and_measure_value(p, q, scheme)?;
    let mut finite_difference = Vec::with_capacity(analytic.len());
    let at = |i: usize, offset: f64| -> Result<f64> {
        let mut h = p.support().to_vec();
        h[i] += offset;
        chord_integral_value(&wulff_shape(p.normals(), &h)?, q, scheme)
    };
    for i in 0..p.facet_count() {
        let near = at(i, step)? - at(i, -step)?;
        let far = at(i, 2.0 * step)? - at(i, -2.0 * step)?;
        finite_difference.push((8.0 * near - far) / (12.0 * step));
    }
    let scale = analytic.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let max_deviation = finite_difference
        .iter()
        .zip(&analytic)
        .map(|(fd, f)| (fd - f).abs() / f.abs().max(1e-9 * scale))
        .fold(0.0, f64::max);
    Ok(GradientCheck { max_deviation, step, finite_difference, analytic })
}
