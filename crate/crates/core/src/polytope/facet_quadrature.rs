use nalgebra::DVector;

use super::Polytope;
use crate::error::{Error, Result};
use crate::rules::{gauss_legendre_unit, gauss_points_for_order, triangle_rule};

/// Nodes on one facet with positive weights summing to the facet area.
#[derive(Clone, Debug, PartialEq)]
pub struct FacetQuadrature {
    pub facet_index: usize,
    pub nodes: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
}

impl FacetQuadrature {
    pub fn integrate(&self, f: impl Fn(&DVector<f64>) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Centroid triangulation of facet `i` with a rule exact to degree `order`
/// on every simplex.
pub fn facet_quadrature(p: &Polytope, i: usize, order: usize) -> Result<FacetQuadrature> {
    facet_quadrature_refined(p, i, order, 0)
}

/// As [`facet_quadrature`], with every simplex further split `levels` times
/// (halving segments, or quartering triangles through edge midpoints).
pub fn facet_quadrature_refined(p: &Polytope, i: usize, order: usize, levels: u32) -> Result<FacetQuadrature> {
    let facet = p.facets.get(i).ok_or(Error::InactiveFacet(i))?;
    if !facet.active {
        return Err(Error::InactiveFacet(i));
    }
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match p.dim {
        2 => {
            let a = &p.vertices[facet.vertex_indices[0]];
            let b = &p.vertices[facet.vertex_indices[1]];
            let m = &facet.centroid;
            let rule = gauss_legendre_unit(gauss_points_for_order(order));
            let pieces = 1usize << levels;
            for end in [a, b] {
                let len = (end - m).norm() / pieces as f64;
                for k in 0..pieces {
                    for &(t, w) in &rule {
                        let s = (k as f64 + t) / pieces as f64;
                        nodes.push(m + (end - m) * s);
                        weights.push(w * len);
                    }
                }
            }
        }
        3 => {
            let rule = triangle_rule(order);
            let c = &facet.centroid;
            let k = facet.vertex_indices.len();
            for w in 0..k {
                let a = &p.vertices[facet.vertex_indices[w]];
                let b = &p.vertices[facet.vertex_indices[(w + 1) % k]];
                for [x, y, z] in subdivide([c.clone(), a.clone(), b.clone()], levels) {
                    let area = super::triangle_area(&x, &y, &z);
                    for (bary, wt) in &rule {
                        nodes.push(&x * bary[0] + &y * bary[1] + &z * bary[2]);
                        weights.push(wt * area);
                    }
                }
            }
        }
        n => return Err(Error::UnsupportedDimension(n)),
    }
    Ok(FacetQuadrature { facet_index: i, nodes, weights })
}

fn subdivide(tri: [DVector<f64>; 3], levels: u32) -> Vec<[DVector<f64>; 3]> {
    let mut tris = vec![tri];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = (&a + &b) * 0.5;
            let bc = (&b + &c) * 0.5;
            let ca = (&c + &a) * 0.5;
            next.push([a, ab.clone(), ca.clone()]);
            next.push([ab.clone(), b, bc.clone()]);
            next.push([ca.clone(), bc.clone(), c]);
            next.push([ab, bc, ca]);
        }
        tris = next;
    }
    tris
}
