//! Chord integrals, dual quermassintegrals and chord measures of polytopes.
//!
//! Both `I_q` and the chord measure `F_q` are double integrals over a
//! direction `u` and a transverse variable. For a fixed `u` the chord length
//! is piecewise linear on a polygonal subdivision of the shadow of `P`, so the
//! transverse integral is done exactly in one variable and by Gauss-Legendre
//! between breakpoints in the other (n = 3 only). The same sweep hands every
//! chord's `X^{q-1}` to its entry and exit facet, which gives the facet
//! integrals of `X(z,u)^{q-1}` needed by `F_q` after swapping the order of
//! integration. The direct route (facet nodes times the boundary form of
//! `V~_{q-1}`) is available through [`MeasureMethod::FacetNodes`].

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{chord_length, facet_quadrature_refined, ray_length, Polytope};
use crate::rules::gauss_legendre_unit;
use crate::sphere::{orthonormal_complement, unit_ball_volume, NodeMode, SphereRule};
use crate::tolerances::TOL;

/// How facet integrals of the chord measure are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureMethod {
    /// Swapped order: exact facet integrals per direction from the shadow sweep.
    Swept,
    /// Facet quadrature nodes, each carrying the boundary form of `V~_{q-1}`.
    FacetNodes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureScheme {
    /// Number of sphere directions `M` (even, at least 16).
    pub directions: usize,
    /// Target number of section nodes across the shadow (n = 3).
    pub section_budget: usize,
    /// Polynomial order of the facet rules used by [`MeasureMethod::FacetNodes`].
    pub facet_order: usize,
    /// Dyadic refinement levels of those facet rules.
    pub facet_refinement: usize,
    pub seed: u64,
    pub mode: NodeMode,
    pub measure_method: MeasureMethod,
}

impl QuadratureScheme {
    /// Default budgets: 4096 angles on the circle, 2048 directions on `S^2`.
    pub fn for_dim(n: usize) -> Self {
        Self {
            directions: if n == 2 { 4096 } else { 2048 },
            section_budget: 256,
            facet_order: 5,
            facet_refinement: 4,
            seed: 0,
            mode: NodeMode::DeterministicLattice,
            measure_method: MeasureMethod::Swept,
        }
    }

    pub fn with_budget(mut self, directions: usize, section_budget: usize, facet_order: usize) -> Self {
        self.directions = directions;
        self.section_budget = section_budget;
        self.facet_order = facet_order;
        self
    }

    pub fn monte_carlo(mut self, seed: u64) -> Self {
        self.mode = NodeMode::MonteCarlo;
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.directions < 16 || !self.directions.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "direction count must be even and at least 16, got {}",
                self.directions
            )));
        }
        if self.section_budget < 2 {
            return Err(Error::Config("section budget must be at least 2".into()));
        }
        if self.facet_order == 0 {
            return Err(Error::Config("facet order must be positive".into()));
        }
        Ok(())
    }

    /// The coarse level of the two-level error estimate.
    pub fn halved(&self) -> Self {
        let mut coarse = self.clone();
        coarse.directions = ((self.directions / 2).max(16) + 1) & !1;
        coarse.section_budget = (self.section_budget / 2).max(2);
        coarse.facet_refinement = self.facet_refinement.saturating_sub(1);
        coarse
    }

    /// Sphere rule for dimension `n`, shared by every call with the same
    /// dimension, count, mode and seed.
    pub fn sphere_rule(&self, n: usize) -> Arc<SphereRule> {
        type Key = (usize, usize, NodeMode, u64);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<SphereRule>>>> = OnceLock::new();
        let seed = if self.mode == NodeMode::MonteCarlo { self.seed } else { 0 };
        let key = (n, self.directions, self.mode, seed);
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("sphere rule cache poisoned");
        map.entry(key)
            .or_insert_with(|| {
                Arc::new(match self.mode {
                    NodeMode::DeterministicLattice => SphereRule::lattice(n, self.directions, None),
                    NodeMode::MonteCarlo => SphereRule::monte_carlo(n, self.directions, self.seed),
                })
            })
            .clone()
    }

    fn aligned_rule(&self, n: usize, pole: &[f64]) -> SphereRule {
        match self.mode {
            NodeMode::DeterministicLattice => SphereRule::lattice(n, self.directions, Some(pole)),
            NodeMode::MonteCarlo => (*self.sphere_rule(n)).clone(),
        }
    }
}

/// A quadrature value with its two-level error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Per-normal chord measure values, aligned with the polytope's normal list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChordMeasureVector {
    pub values: Vec<f64>,
    pub q: f64,
    pub estimated_error: Vec<f64>,
}

/// Relative roundoff floor added to two-level differences.
const ROUNDOFF: f64 = 1e-12;

fn check_supported(p: &Polytope) -> Result<()> {
    match p.dim() {
        2 | 3 => Ok(()),
        n => Err(Error::UnsupportedDimension(n)),
    }
}

/// `V~_q(P, z)`. Interior points use `(1/n) sum w rho^q`, boundary points the
/// X-ray form `(1/2n) sum w X^q`.
pub fn dual_quermassintegral(p: &Polytope, z: &DVector<f64>, q: f64, scheme: &QuadratureScheme) -> Result<f64> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidQ { q, reason: "the dual quermassintegral needs q > 0" });
    }
    check_supported(p)?;
    scheme.validate()?;
    if z.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: z.len() });
    }
    let scale = p.outer_radius();
    let excess = p.violation(z);
    if excess > TOL.containment * scale {
        return Err(Error::OutsidePolytope { excess });
    }
    let rule = scheme.sphere_rule(p.dim());
    let slack: Vec<f64> = p.slack(z.as_slice()).into_iter().map(|s| s.max(0.0)).collect();
    let on_boundary = slack.iter().any(|&s| s <= TOL.containment * scale);
    Ok(if on_boundary { xray_form(p, &slack, q, &rule) } else { radial_form(p, &slack, q, &rule) })
}

fn radial_form(p: &Polytope, slack: &[f64], q: f64, rule: &SphereRule) -> f64 {
    let normals = p.flat_normals();
    let sum: f64 = (0..rule.len()).map(|j| rule.weights[j] * ray_length(normals, slack, rule.point(j)).powf(q)).sum();
    sum / p.dim() as f64
}

/// `(1/2n) sum w X^q`, with `X^0` read as the indicator of a nondegenerate chord.
fn xray_form(p: &Polytope, slack: &[f64], q: f64, rule: &SphereRule) -> f64 {
    let normals = p.flat_normals();
    let sum: f64 = (0..rule.len())
        .map(|j| {
            let x = chord_length(normals, slack, rule.point(j));
            rule.weights[j] * if q == 0.0 { (x > 0.0) as u8 as f64 } else { x.powf(q) }
        })
        .sum();
    sum / (2.0 * p.dim() as f64)
}

/// `I_q(P)` with a two-level error estimate.
pub fn chord_integral(p: &Polytope, q: f64, scheme: &QuadratureScheme) -> Result<Estimate> {
    check_q_integral(q)?;
    check_supported(p)?;
    scheme.validate()?;
    let fine = sweep(p, q, scheme, false).integral;
    let coarse = sweep(p, q, &scheme.halved(), false).integral;
    Ok(Estimate { value: fine, error: (fine - coarse).abs() + ROUNDOFF * fine.abs() })
}

/// `I_q(P)` at the given budget only, without an error estimate.
pub fn chord_integral_value(p: &Polytope, q: f64, scheme: &QuadratureScheme) -> Result<f64> {
    check_q_integral(q)?;
    check_supported(p)?;
    scheme.validate()?;
    Ok(sweep(p, q, scheme, false).integral)
}

fn check_q_integral(q: f64) -> Result<()> {
    if q.is_finite() && q >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidQ { q, reason: "chord integrals need q >= 0" })
    }
}

fn check_q_measure(q: f64) -> Result<()> {
    if q.is_finite() && q >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidQ { q, reason: "chord measures are implemented for q >= 1" })
    }
}

/// Closed forms of `I_0`, `I_1` and `I_{n+1}` through volume and surface area.
pub fn chord_integral_reference(p: &Polytope, q: f64) -> Result<f64> {
    check_supported(p)?;
    let n = p.dim();
    let omega = unit_ball_volume(n);
    if q == 0.0 {
        Ok(unit_ball_volume(n - 1) / (n as f64 * omega) * p.surface_area())
    } else if q == 1.0 {
        Ok(p.volume())
    } else if q == (n + 1) as f64 {
        let v = p.volume();
        Ok((n + 1) as f64 / omega * v * v)
    } else {
        Err(Error::NoReference(q))
    }
}

/// `F_q(P, v_i)` for every normal, `q >= 1`.
pub fn chord_measure(p: &Polytope, q: f64, scheme: &QuadratureScheme) -> Result<ChordMeasureVector> {
    Ok(chord_integral_and_measure(p, q, scheme)?.1)
}

/// `I_q(P)` and `F_q(P, .)` from the same node sets, each with error estimates.
pub fn chord_integral_and_measure(
    p: &Polytope,
    q: f64,
    scheme: &QuadratureScheme,
) -> Result<(Estimate, ChordMeasureVector)> {
    check_q_measure(q)?;
    check_supported(p)?;
    scheme.validate()?;
    let fine = measure_pass(p, q, scheme)?;
    let coarse = measure_pass(p, q, &scheme.halved())?;
    let integral = Estimate {
        value: fine.integral,
        error: (fine.integral - coarse.integral).abs() + ROUNDOFF * fine.integral.abs(),
    };
    let estimated_error =
        fine.facets.iter().zip(&coarse.facets).map(|(a, b)| (a - b).abs() + ROUNDOFF * a.abs()).collect();
    Ok((integral, ChordMeasureVector { values: fine.facets, q, estimated_error }))
}

/// `I_q(P)` and `F_q(P, .)` at the given budget only (no error estimate).
pub fn chord_integral_and_measure_value(p: &Polytope, q: f64, scheme: &QuadratureScheme) -> Result<(f64, Vec<f64>)> {
    check_q_measure(q)?;
    check_supported(p)?;
    scheme.validate()?;
    let pass = measure_pass(p, q, scheme)?;
    Ok((pass.integral, pass.facets))
}

/// `F_{p,q}(P, v_i) = h_i^{1-p} F_q(P, v_i)` with true support values.
pub fn lp_chord_measure(poly: &Polytope, p: f64, q: f64, scheme: &QuadratureScheme) -> Result<ChordMeasureVector> {
    if !poly.contains_origin_interior() {
        return Err(Error::OriginNotInterior);
    }
    let f = chord_measure(poly, q, scheme)?;
    Ok(reweight(poly, p, f))
}

pub(crate) fn reweight(poly: &Polytope, p: f64, mut f: ChordMeasureVector) -> ChordMeasureVector {
    let h = poly.true_support();
    for ((value, error), h) in f.values.iter_mut().zip(f.estimated_error.iter_mut()).zip(&h) {
        let factor = h.powf(1.0 - p);
        *value *= factor;
        *error *= factor;
    }
    f
}

struct Pass {
    integral: f64,
    facets: Vec<f64>,
}

fn measure_pass(p: &Polytope, q: f64, scheme: &QuadratureScheme) -> Result<Pass> {
    match scheme.measure_method {
        MeasureMethod::Swept => Ok(sweep(p, q, scheme, true)),
        MeasureMethod::FacetNodes => {
            let integral = sweep(p, q, scheme, false).integral;
            let facets = facet_node_measure(p, q, scheme)?;
            Ok(Pass { integral, facets })
        }
    }
}

fn facet_node_measure(p: &Polytope, q: f64, scheme: &QuadratureScheme) -> Result<Vec<f64>> {
    let n = p.dim();
    let factor = 2.0 * q / unit_ball_volume(n);
    let scale = p.outer_radius();
    (0..p.facet_count())
        .map(|i| {
            if !p.is_active(i) {
                return Ok(0.0);
            }
            let rule = scheme.aligned_rule(n, p.normals()[i].as_slice());
            let fq = facet_quadrature_refined(p, i, scheme.facet_order, scheme.facet_refinement as u32)?;
            let values: Vec<f64> = fq
                .nodes
                .par_iter()
                .map(|z| {
                    let mut slack = p.slack(z.as_slice());
                    for s in slack.iter_mut() {
                        if *s < TOL.containment * scale {
                            *s = s.max(0.0);
                        }
                    }
                    xray_form(p, &slack, q - 1.0, &rule)
                })
                .collect();
            Ok(factor * values.iter().zip(&fq.weights).map(|(v, w)| v * w).sum::<f64>())
        })
        .collect()
}

/// Geometry in coordinates centered at the Chebyshev center.
struct Frame {
    n: usize,
    count: usize,
    normals: Vec<f64>,
    offsets: Vec<f64>,
    vertices: Vec<f64>,
    edges: Vec<(usize, usize)>,
    active: Vec<bool>,
    scale: f64,
}

impl Frame {
    fn new(p: &Polytope) -> Self {
        let n = p.dim();
        let c = p.center();
        let normals = p.flat_normals().to_vec();
        let offsets = p.normals().iter().zip(p.support()).map(|(v, h)| h - v.dot(c)).collect();
        let vertices = p.vertices().iter().flat_map(|x| (x - c).iter().copied().collect::<Vec<_>>()).collect();
        Self {
            n,
            count: p.facet_count(),
            normals,
            offsets,
            vertices,
            edges: p.edges().to_vec(),
            active: (0..p.facet_count()).map(|i| p.is_active(i)).collect(),
            scale: p.outer_radius(),
        }
    }

    fn project(&self, dir: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let on_normals = self.normals.chunks(n).map(|v| dot(v, dir)).collect();
        let on_vertices = self.vertices.chunks(n).map(|x| dot(x, dir)).collect();
        (on_normals, on_vertices)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sums the transverse integrals over the (folded) sphere rule.
fn sweep(p: &Polytope, q: f64, scheme: &QuadratureScheme, with_facets: bool) -> Pass {
    let frame = Frame::new(p);
    let n = frame.n;
    let rule = scheme.sphere_rule(n).folded();
    let budget = scheme.section_budget;
    let per_direction: Vec<(f64, Vec<f64>)> = (0..rule.len())
        .into_par_iter()
        .map(|j| {
            let mut facets = if with_facets { vec![0.0; frame.count] } else { Vec::new() };
            let u = rule.point(j);
            let value = if n == 2 {
                sweep_plane(&frame, u, q, &mut facets)
            } else {
                sweep_space(&frame, u, q, budget, &mut facets)
            };
            (value, facets)
        })
        .collect();

    let omega = unit_ball_volume(n);
    let norm = 1.0 / (n as f64 * omega);
    let mut integral = 0.0;
    let mut facets = vec![0.0; if with_facets { frame.count } else { 0 }];
    for (j, (value, g)) in per_direction.iter().enumerate() {
        let w = rule.weights[j];
        integral += w * value;
        for (acc, gi) in facets.iter_mut().zip(g) {
            *acc += w * gi;
        }
    }
    // F_i = (2q / omega) (1 / 2n) int_S int_facet X^{q-1}
    let facet_norm = q / (n as f64 * omega);
    for (acc, &active) in facets.iter_mut().zip(&frame.active) {
        *acc = if active { *acc * facet_norm } else { 0.0 };
    }
    Pass { integral: integral * norm, facets }
}

/// `int_{u^perp} X^q` for n = 2, with facet integrals of `X^{q-1}`.
fn sweep_plane(frame: &Frame, u: &[f64], q: f64, facets: &mut [f64]) -> f64 {
    let f = [-u[1], u[0]];
    let (b, t_vertices) = frame.project(&f);
    let (c, _) = frame.project(u);
    let mut breaks = t_vertices;
    section(&b, &c, &frame.offsets, &mut breaks, q, 1.0, frame.scale, facets)
}

/// `int_{u^perp} X^q` for n = 3: Gauss-Legendre in `s` between breakpoints,
/// exact in `t` on each section.
fn sweep_space(frame: &Frame, u: &[f64], q: f64, budget: usize, facets: &mut [f64]) -> f64 {
    let axis = DVector::from_column_slice(u);
    let (e, f) = orthonormal_complement(&axis);
    let (a, s_vertices) = frame.project(e.as_slice());
    let (b, t_vertices) = frame.project(f.as_slice());
    let (c, _) = frame.project(u);

    let mut s_breaks = s_vertices.clone();
    edge_crossings(&frame.edges, &s_vertices, &t_vertices, &mut s_breaks);
    s_breaks.sort_by(f64::total_cmp);
    let merge = 1e-13 * frame.scale;
    s_breaks.dedup_by(|x, y| (*x - *y).abs() <= merge);
    let intervals = s_breaks.len().saturating_sub(1);
    if intervals == 0 {
        return 0.0;
    }
    let per_interval = budget.div_ceil(intervals).max(3);
    let gauss = gauss_legendre_unit(per_interval);

    let mut rhs = vec![0.0; frame.count];
    let mut t_breaks = Vec::with_capacity(frame.edges.len());
    let mut total = 0.0;
    for win in s_breaks.windows(2) {
        let (s0, s1) = (win[0], win[1]);
        let len = s1 - s0;
        for &(x, w) in &gauss {
            let s = s0 + x * len;
            for i in 0..frame.count {
                rhs[i] = frame.offsets[i] - s * a[i];
            }
            t_breaks.clear();
            for &(i, j) in &frame.edges {
                let (si, sj) = (s_vertices[i], s_vertices[j]);
                if (si - s) * (sj - s) < 0.0 {
                    let lambda = (s - si) / (sj - si);
                    t_breaks.push(t_vertices[i] + lambda * (t_vertices[j] - t_vertices[i]));
                }
            }
            total += w * len * section(&b, &c, &rhs, &mut t_breaks, q, w * len, frame.scale, facets);
        }
    }
    total
}

/// Adds the `s` coordinates of proper crossings between projected edges.
fn edge_crossings(edges: &[(usize, usize)], s: &[f64], t: &[f64], out: &mut Vec<f64>) {
    for (k, &(a, b)) in edges.iter().enumerate() {
        let (p0, p1) = ((s[a], t[a]), (s[b], t[b]));
        let d1 = (p1.0 - p0.0, p1.1 - p0.1);
        for &(c, d) in &edges[k + 1..] {
            if c == a || c == b || d == a || d == b {
                continue;
            }
            let (r0, r1) = ((s[c], t[c]), (s[d], t[d]));
            let d2 = (r1.0 - r0.0, r1.1 - r0.1);
            let den = d1.0 * d2.1 - d1.1 * d2.0;
            if den.abs() < 1e-300 {
                continue;
            }
            let w = (r0.0 - p0.0, r0.1 - p0.1);
            let alpha = (w.0 * d2.1 - w.1 * d2.0) / den;
            let beta = (w.0 * d1.1 - w.1 * d1.0) / den;
            if alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0 {
                out.push(p0.0 + alpha * d1.0);
            }
        }
    }
}

/// Chord interval `[lo, hi]` of the line `t f + lambda u` in a planar section
/// with constraints `b_i t + c_i lambda <= r_i`, plus the entry and exit rows.
fn chord_at(b: &[f64], c: &[f64], r: &[f64], t: f64, scale: f64) -> (f64, usize, usize) {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let (mut entry, mut exit) = (usize::MAX, usize::MAX);
    for i in 0..b.len() {
        let rhs = r[i] - b[i] * t;
        let ci = c[i];
        if ci > 1e-12 {
            let v = rhs / ci;
            if v < hi {
                hi = v;
                exit = i;
            }
        } else if ci < -1e-12 {
            let v = rhs / ci;
            if v > lo {
                lo = v;
                entry = i;
            }
        } else if rhs < -1e-12 * scale {
            return (0.0, usize::MAX, usize::MAX);
        }
    }
    ((hi - lo).max(0.0), entry, exit)
}

/// `int_0^len (x0 + (x1 - x0) s / len)^q ds`, stable for nearly equal ends.
fn linear_power_integral(x0: f64, x1: f64, len: f64, q: f64) -> f64 {
    let (lo, hi) = if x0 <= x1 { (x0, x1) } else { (x1, x0) };
    if hi <= 0.0 {
        return 0.0;
    }
    if q == 0.0 {
        return len;
    }
    let d = (lo - hi) / hi;
    let ratio = if d == 0.0 {
        1.0
    } else if d <= -1.0 {
        1.0 / (q + 1.0)
    } else {
        ((q + 1.0) * d.ln_1p()).exp_m1() / ((q + 1.0) * d)
    };
    len * hi.powf(q) * ratio
}

/// Exact `int X(t)^q dt` over one planar section; adds `weight * int X^{q-1}
/// / |c_i|` to the entry and exit facets when `facets` is nonempty.
#[allow(clippy::too_many_arguments)]
fn section(
    b: &[f64],
    c: &[f64],
    r: &[f64],
    breaks: &mut Vec<f64>,
    q: f64,
    weight: f64,
    scale: f64,
    facets: &mut [f64],
) -> f64 {
    breaks.sort_by(f64::total_cmp);
    let merge = 1e-13 * scale;
    breaks.dedup_by(|x, y| (*x - *y).abs() <= merge);
    if breaks.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut x_prev = chord_at(b, c, r, breaks[0], scale).0;
    for k in 1..breaks.len() {
        let (t0, t1) = (breaks[k - 1], breaks[k]);
        let x_next = chord_at(b, c, r, t1, scale).0;
        let len = t1 - t0;
        total += linear_power_integral(x_prev, x_next, len, q);
        if !facets.is_empty() {
            let (x_mid, entry, exit) = chord_at(b, c, r, 0.5 * (t0 + t1), scale);
            if x_mid > 0.0 && entry != usize::MAX && exit != usize::MAX {
                let g = weight * linear_power_integral(x_prev, x_next, len, q - 1.0);
                facets[entry] += g / c[entry].abs();
                facets[exit] += g / c[exit].abs();
            }
        }
        x_prev = x_next;
    }
    total
}
