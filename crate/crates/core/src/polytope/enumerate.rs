//! Vertex enumeration for bounded halfspace intersections.
//!
//! Coordinates are relative to an interior point, so every offset is
//! positive. Small problems use n-subset intersection with a feasibility
//! filter; larger planar and spatial problems clip a bounding box one
//! halfspace at a time.

use nalgebra::{DMatrix, DVector};

use crate::measure::Combinations;

pub(crate) const SUBSET_LIMIT: usize = 60;

/// All vertices of `{x : v_i . x <= h_i}`, deduplicated within `merge_tol`.
pub(crate) fn enumerate_vertices(
    n: usize,
    normals: &[DVector<f64>],
    offsets: &[f64],
    bound: f64,
    feas_tol: f64,
    merge_tol: f64,
) -> Vec<DVector<f64>> {
    let raw = if normals.len() <= SUBSET_LIMIT || n > 3 {
        by_subsets(n, normals, offsets, feas_tol)
    } else if n == 2 {
        clip_polygon(normals, offsets, bound)
    } else {
        clip_polyhedron(normals, offsets, bound)
    };
    dedupe(raw, merge_tol)
}

pub(crate) fn by_subsets(n: usize, normals: &[DVector<f64>], offsets: &[f64], feas_tol: f64) -> Vec<DVector<f64>> {
    let mut out = Vec::new();
    for subset in Combinations::new(normals.len(), n) {
        let a = DMatrix::from_fn(n, n, |r, c| normals[subset[r]][c]);
        let b = DVector::from_iterator(n, subset.iter().map(|&i| offsets[i]));
        let lu = a.lu();
        if lu.determinant().abs() < 1e-13 {
            continue;
        }
        let Some(x) = lu.solve(&b) else { continue };
        if normals.iter().zip(offsets).all(|(v, &h)| v.dot(&x) <= h + feas_tol) {
            out.push(x);
        }
    }
    out
}

pub(crate) fn dedupe(points: Vec<DVector<f64>>, tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| (q - &p).norm() <= tol) {
            out.push(p);
        }
    }
    out
}

fn clip_polygon(normals: &[DVector<f64>], offsets: &[f64], bound: f64) -> Vec<DVector<f64>> {
    let mut poly: Vec<[f64; 2]> = vec![[-bound, -bound], [bound, -bound], [bound, bound], [-bound, bound]];
    for (v, &h) in normals.iter().zip(offsets) {
        poly = clip_loop(&poly, |p| v[0] * p[0] + v[1] * p[1] - h);
        if poly.is_empty() {
            break;
        }
    }
    poly.into_iter().map(|p| DVector::from_vec(p.to_vec())).collect()
}

/// Sutherland-Hodgman step keeping `f <= 0`.
fn clip_loop<const D: usize>(poly: &[[f64; D]], f: impl Fn(&[f64; D]) -> f64) -> Vec<[f64; D]> {
    let k = poly.len();
    let mut out = Vec::with_capacity(k + 1);
    for idx in 0..k {
        let a = &poly[idx];
        let b = &poly[(idx + 1) % k];
        let (fa, fb) = (f(a), f(b));
        if fa <= 0.0 {
            out.push(*a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            let t = fa / (fa - fb);
            let mut p = [0.0; D];
            for d in 0..D {
                p[d] = a[d] + t * (b[d] - a[d]);
            }
            out.push(p);
        }
    }
    out
}

fn clip_polyhedron(normals: &[DVector<f64>], offsets: &[f64], bound: f64) -> Vec<DVector<f64>> {
    let b = bound;
    let c = |x: f64, y: f64, z: f64| [x * b, y * b, z * b];
    let mut faces: Vec<Vec<[f64; 3]>> = vec![
        vec![c(-1., -1., -1.), c(-1., 1., -1.), c(1., 1., -1.), c(1., -1., -1.)],
        vec![c(-1., -1., 1.), c(1., -1., 1.), c(1., 1., 1.), c(-1., 1., 1.)],
        vec![c(-1., -1., -1.), c(1., -1., -1.), c(1., -1., 1.), c(-1., -1., 1.)],
        vec![c(-1., 1., -1.), c(-1., 1., 1.), c(1., 1., 1.), c(1., 1., -1.)],
        vec![c(-1., -1., -1.), c(-1., -1., 1.), c(-1., 1., 1.), c(-1., 1., -1.)],
        vec![c(1., -1., -1.), c(1., 1., -1.), c(1., 1., 1.), c(1., -1., 1.)],
    ];
    for (v, &h) in normals.iter().zip(offsets) {
        let f = |p: &[f64; 3]| v[0] * p[0] + v[1] * p[1] + v[2] * p[2] - h;
        let mut cap: Vec<[f64; 3]> = Vec::new();
        let mut next = Vec::with_capacity(faces.len() + 1);
        for face in &faces {
            let clipped = clip_loop(face, f);
            for p in &clipped {
                if f(p).abs() <= 1e-12 * (1.0 + h.abs()) {
                    cap.push(*p);
                }
            }
            if clipped.len() >= 3 {
                next.push(clipped);
            }
        }
        if cap.len() >= 3 {
            next.push(order_on_plane(cap, [v[0], v[1], v[2]]));
        }
        faces = next;
        if faces.is_empty() {
            break;
        }
    }
    faces.into_iter().flatten().map(|p| DVector::from_vec(p.to_vec())).collect()
}

fn order_on_plane(points: Vec<[f64; 3]>, normal: [f64; 3]) -> Vec<[f64; 3]> {
    let axis = DVector::from_vec(normal.to_vec());
    let (e1, e2) = crate::sphere::orthonormal_complement(&axis);
    let k = points.len() as f64;
    let mut mean = [0.0; 3];
    for p in &points {
        for d in 0..3 {
            mean[d] += p[d] / k;
        }
    }
    let mut keyed: Vec<(f64, [f64; 3])> = points
        .into_iter()
        .map(|p| {
            let rel = [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]];
            let x = rel[0] * e1[0] + rel[1] * e1[1] + rel[2] * e1[2];
            let y = rel[0] * e2[0] + rel[1] * e2[1] + rel[2] * e2[2];
            (y.atan2(x), p)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    keyed.into_iter().map(|(_, p)| p).collect()
}
