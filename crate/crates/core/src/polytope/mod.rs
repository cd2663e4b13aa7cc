//! Convex polytopes given by halfspaces `x . v_i <= h_i`.
//!
//! [`wulff_shape`] builds the vertex and facet structure; everything after
//! construction is read-only. Facet areas, facet quadrature, volume and
//! surface area are available for `n <= 3`; support, radial and X-ray
//! queries work in any dimension.

mod enumerate;
mod facet_quadrature;
mod json;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::measure::hemisphere_lp;
use crate::tolerances::TOL;

pub use facet_quadrature::{facet_quadrature, facet_quadrature_refined, FacetQuadrature};
pub use json::PolytopeRecord;

#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub active: bool,
    /// Incident vertices; for `n = 3` in cyclic order around the facet.
    pub vertex_indices: Vec<usize>,
    /// `(n-1)`-dimensional measure of the facet.
    pub area: f64,
    pub centroid: DVector<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    dim: usize,
    normals: Vec<DVector<f64>>,
    support: Vec<f64>,
    vertices: Vec<DVector<f64>>,
    facets: Vec<Facet>,
    edges: Vec<(usize, usize)>,
    center: DVector<f64>,
    inner_radius: f64,
    outer_radius: f64,
    flat_normals: Vec<f64>,
}

/// Builds the Wulff shape `{x : x . v_i <= h_i for all i}`.
pub fn wulff_shape(normals: &[DVector<f64>], support: &[f64]) -> Result<Polytope> {
    let count = normals.len();
    if count != support.len() {
        return Err(Error::DimensionMismatch { expected: count, found: support.len() });
    }
    let Some(n) = normals.first().map(|v| v.len()) else {
        return Err(Error::Unbounded);
    };
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut unit = Vec::with_capacity(count);
    for (index, v) in normals.iter().enumerate() {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::ZeroVector { index });
        }
        unit.push(v / norm);
    }
    if let Some(&h) = support.iter().find(|h| !h.is_finite()) {
        return Err(Error::Config(format!("support value {h} is not finite")));
    }

    let (margin, _) = hemisphere_lp(&unit, n);
    if !(margin < -1e-12) {
        return Err(Error::Unbounded);
    }
    let (center, inner_radius) = chebyshev_center(&unit, support)?;
    if inner_radius <= TOL.min_inner_radius {
        return Err(Error::EmptyInterior { radius: inner_radius });
    }

    let offsets: Vec<f64> = unit.iter().zip(support).map(|(v, h)| h - v.dot(&center)).collect();
    let scale = offsets.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let bound = 2.0 * scale / margin.abs() + scale;
    let local = enumerate::enumerate_vertices(
        n,
        &unit,
        &offsets,
        bound,
        TOL.vertex_feasibility * scale,
        TOL.vertex_merge * scale,
    );
    let outer_radius = local.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let vertices: Vec<DVector<f64>> = local.iter().map(|x| x + &center).collect();

    let incidence_tol = TOL.vertex_feasibility * scale.max(outer_radius);
    let mut facets = Vec::with_capacity(count);
    for (v, &h) in unit.iter().zip(&offsets) {
        let incident: Vec<usize> =
            (0..local.len()).filter(|&k| (v.dot(&local[k]) - h).abs() <= incidence_tol).collect();
        facets.push(build_facet(n, v, incident, &local, &center, outer_radius));
    }
    let edges = if n == 3 { collect_edges(&facets) } else { Vec::new() };
    let flat_normals = unit.iter().flat_map(|v| v.iter().copied()).collect();

    Ok(Polytope {
        dim: n,
        normals: unit,
        support: support.to_vec(),
        vertices,
        facets,
        edges,
        center,
        inner_radius,
        outer_radius,
        flat_normals,
    })
}

/// Center and radius of the largest inscribed ball.
///
/// Solved through the dual program (weights on the normals summing to one and
/// balancing to zero, minimizing the weighted offsets), which keeps the
/// tableau at `n + 1` rows; the center is minus the shadow prices of the
/// balance rows.
fn chebyshev_center(normals: &[DVector<f64>], support: &[f64]) -> Result<(DVector<f64>, f64)> {
    let n = normals[0].len();
    let obj: Vec<f64> = support.iter().map(|h| -h).collect();
    let mut lp = LinearProgram::maximize(obj);
    for k in 0..n {
        lp.constraint(normals.iter().map(|v| v[k]).collect(), Relation::Eq, 0.0);
    }
    lp.constraint(vec![1.0; normals.len()], Relation::Eq, 1.0);
    match lp.solve() {
        LpOutcome::Optimal { value, duals, .. } => {
            let center = DVector::from_iterator(n, duals[..n].iter().map(|d| -d));
            Ok((center, -value))
        }
        LpOutcome::Infeasible => Err(Error::Unbounded),
        LpOutcome::Unbounded => Err(Error::Lp("Chebyshev center program unbounded")),
    }
}

fn build_facet(
    n: usize,
    normal: &DVector<f64>,
    incident: Vec<usize>,
    local: &[DVector<f64>],
    center: &DVector<f64>,
    outer_radius: f64,
) -> Facet {
    let threshold = TOL.facet_active * outer_radius.powi(n as i32 - 1);
    let mean = if incident.is_empty() {
        DVector::zeros(n)
    } else {
        incident.iter().fold(DVector::zeros(n), |acc, &k| acc + &local[k]) / incident.len() as f64
    };
    let (ordered, area, centroid) = match n {
        2 => {
            // Endpoints ordered counter-clockwise (along the tangent rotated from v).
            let t = DVector::from_vec(vec![-normal[1], normal[0]]);
            let mut ordered = incident.clone();
            ordered.sort_by(|&a, &b| t.dot(&local[a]).total_cmp(&t.dot(&local[b])));
            let area = if ordered.len() >= 2 {
                t.dot(&local[*ordered.last().unwrap()]) - t.dot(&local[ordered[0]])
            } else {
                0.0
            };
            if ordered.len() > 2 {
                ordered = vec![ordered[0], *ordered.last().unwrap()];
            }
            (ordered, area, mean)
        }
        3 => {
            let (e1, e2) = crate::sphere::orthonormal_complement(normal);
            let mut ordered = incident.clone();
            let angle = |k: usize| {
                let r = &local[k] - &mean;
                e2.dot(&r).atan2(e1.dot(&r))
            };
            ordered.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
            let mut area = 0.0;
            let mut weighted = DVector::zeros(3);
            for w in 0..ordered.len() {
                let a = &local[ordered[w]];
                let b = &local[ordered[(w + 1) % ordered.len()]];
                let tri = triangle_area(&mean, a, b);
                area += tri;
                weighted += (&mean + a + b) * (tri / 3.0);
            }
            let centroid = if area > 0.0 { weighted / area } else { mean };
            (ordered, area, centroid)
        }
        _ => (incident.clone(), 0.0, mean),
    };
    let active = if n <= 3 { area > threshold } else { affine_rank(&incident, local) >= n - 1 };
    Facet { active, vertex_indices: ordered, area: if n <= 3 { area } else { f64::NAN }, centroid: centroid + center }
}

fn triangle_area(a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>) -> f64 {
    let u = b - a;
    let v = c - a;
    let cross = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    0.5 * (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt()
}

fn affine_rank(indices: &[usize], points: &[DVector<f64>]) -> usize {
    if indices.len() < 2 {
        return 0;
    }
    let base = &points[indices[0]];
    let n = base.len();
    let m = nalgebra::DMatrix::from_fn(n, indices.len() - 1, |r, c| points[indices[c + 1]][r] - base[r]);
    m.rank(1e-9 * m.norm().max(1.0))
}

fn collect_edges(facets: &[Facet]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for f in facets.iter().filter(|f| f.active) {
        let k = f.vertex_indices.len();
        for w in 0..k {
            let (a, b) = (f.vertex_indices[w], f.vertex_indices[(w + 1) % k]);
            let e = (a.min(b), a.max(b));
            if a != b && !edges.contains(&e) {
                edges.push(e);
            }
        }
    }
    edges.sort_unstable();
    edges
}

impl Polytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normals(&self) -> &[DVector<f64>] {
        &self.normals
    }

    /// Halfspace offsets as given at construction (not necessarily tight).
    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Edges as vertex index pairs (`n = 3` only).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    /// Largest vertex distance from the Chebyshev center.
    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn facet_count(&self) -> usize {
        self.normals.len()
    }

    pub(crate) fn flat_normals(&self) -> &[f64] {
        &self.flat_normals
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.facets[i].active
    }

    /// `max_x x . u` over the vertices, with the maximizing vertex index.
    pub fn support_point(&self, u: &DVector<f64>) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (k, x) in self.vertices.iter().enumerate() {
            let val = x.dot(u);
            if val > best.0 {
                best = (val, k);
            }
        }
        best
    }

    /// The support function `h_P(u)`.
    pub fn support_function(&self, u: &DVector<f64>) -> f64 {
        self.support_point(u).0
    }

    /// `h_P(v_i)` for every stored normal. For inactive facets this is at most
    /// the stored offset.
    pub fn true_support(&self) -> Vec<f64> {
        self.normals.iter().map(|v| self.support_function(v)).collect()
    }

    /// Largest constraint violation of `z` (negative when strictly inside).
    pub fn violation(&self, z: &DVector<f64>) -> f64 {
        self.normals.iter().zip(&self.support).map(|(v, h)| v.dot(z) - h).fold(f64::NEG_INFINITY, f64::max)
    }

    fn check_contains(&self, z: &DVector<f64>) -> Result<()> {
        let excess = self.violation(z);
        if excess > TOL.containment * self.outer_radius.max(1.0) {
            Err(Error::OutsidePolytope { excess })
        } else {
            Ok(())
        }
    }

    /// `rho_{P,z}(u) = max{lambda >= 0 : z + lambda u in P}`.
    pub fn radial_function(&self, z: &DVector<f64>, u: &DVector<f64>) -> Result<f64> {
        self.check_contains(z)?;
        let slack = self.slack(z.as_slice());
        Ok(ray_length(self.flat_normals(), &slack, u.as_slice()))
    }

    /// Parallel X-ray: length of the chord through `z` in direction `u`.
    pub fn xray(&self, z: &DVector<f64>, u: &DVector<f64>) -> Result<f64> {
        self.check_contains(z)?;
        let slack = self.slack(z.as_slice());
        Ok(chord_length(self.flat_normals(), &slack, u.as_slice()))
    }

    /// `max(h_i - v_i . z, 0)` for every constraint.
    pub(crate) fn slack(&self, z: &[f64]) -> Vec<f64> {
        let n = self.dim;
        self.support
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let v = &self.flat_normals[i * n..(i + 1) * n];
                (h - dot(v, z)).max(0.0)
            })
            .collect()
    }

    /// Volume as `(1/n) sum_i h_i |F_i|` over active facets (`n <= 3`).
    pub fn volume(&self) -> f64 {
        let c = &self.center;
        self.facets
            .iter()
            .zip(&self.normals)
            .zip(&self.support)
            .filter(|((f, _), _)| f.active)
            .map(|((f, v), h)| (h - v.dot(c)) * f.area)
            .sum::<f64>()
            / self.dim as f64
    }

    pub fn surface_area(&self) -> f64 {
        self.facets.iter().filter(|f| f.active).map(|f| f.area).sum()
    }

    /// `P + x`, with offsets `h_i + v_i . x`.
    pub fn translate(&self, x: &DVector<f64>) -> Polytope {
        let mut out = self.clone();
        for (h, v) in out.support.iter_mut().zip(&self.normals) {
            *h += v.dot(x);
        }
        for p in out.vertices.iter_mut() {
            *p += x;
        }
        for f in out.facets.iter_mut() {
            f.centroid += x;
        }
        out.center += x;
        out
    }

    /// `t P` for `t > 0`.
    pub fn scale(&self, t: f64) -> Result<Polytope> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::NonPositiveScale(t));
        }
        let mut out = self.clone();
        let area_factor = t.powi(self.dim as i32 - 1);
        out.support.iter_mut().for_each(|h| *h *= t);
        out.vertices.iter_mut().for_each(|p| *p *= t);
        for f in out.facets.iter_mut() {
            f.centroid *= t;
            f.area *= area_factor;
        }
        out.center *= t;
        out.inner_radius *= t;
        out.outer_radius *= t;
        Ok(out)
    }

    /// Rebuilds with offsets replaced by the true support values.
    pub fn canonicalized(&self) -> Result<Polytope> {
        wulff_shape(&self.normals, &self.true_support())
    }

    /// Whether the origin is interior, i.e. every true support value is positive.
    pub fn contains_origin_interior(&self) -> bool {
        self.true_support().iter().all(|&h| h > 0.0)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Distance along `u` to the boundary given constraint slacks.
#[inline]
pub(crate) fn ray_length(normals: &[f64], slack: &[f64], u: &[f64]) -> f64 {
    let n = u.len();
    let mut best = f64::INFINITY;
    for (i, &s) in slack.iter().enumerate() {
        let d = dot(&normals[i * n..(i + 1) * n], u);
        if d > 0.0 {
            let t = s / d;
            if t < best {
                best = t;
            }
        }
    }
    best
}

/// `rho(u) + rho(-u)` in one pass over the constraints.
#[inline]
pub(crate) fn chord_length(normals: &[f64], slack: &[f64], u: &[f64]) -> f64 {
    let n = u.len();
    let mut fwd = f64::INFINITY;
    let mut back = f64::INFINITY;
    for (i, &s) in slack.iter().enumerate() {
        let d = dot(&normals[i * n..(i + 1) * n], u);
        if d > 0.0 {
            fwd = fwd.min(s / d);
        } else if d < 0.0 {
            back = back.min(-s / d);
        }
    }
    fwd + back
}

#[cfg(test)]
mod tests;
