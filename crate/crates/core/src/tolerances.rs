//! Numerical tolerances shared by the geometry, quadrature and solver code.
//!
//! Every threshold used to make a geometric decision lives here so that a
//! robustness audit has one place to look.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `| |v| - 1 |` allowed for stored unit normals.
    pub unit_norm: f64,
    /// Angle below which two normals are considered equal.
    pub angular_duplicate: f64,
    /// `|det|` below which an n-subset of unit normals is dependent.
    pub subset_det: f64,
    /// Margin used by the closed-hemisphere linear program.
    pub hemisphere_margin: f64,
    /// Constraint violation allowed for vertices, relative to the polytope scale.
    pub vertex_feasibility: f64,
    /// Distance below which two vertices are merged, relative to the polytope scale.
    pub vertex_merge: f64,
    /// A facet is active iff its area exceeds this times `R^(n-1)`.
    pub facet_active: f64,
    /// Minimum inscribed-ball radius for a nonempty interior.
    pub min_inner_radius: f64,
    /// Containment slack for points handed to radial and X-ray queries.
    pub containment: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        TOL
    }
}

pub const TOL: Tolerances = Tolerances {
    unit_norm: 1e-12,
    angular_duplicate: 1e-9,
    subset_det: 1e-10,
    hemisphere_margin: 1e-9,
    vertex_feasibility: 1e-9,
    vertex_merge: 1e-9,
    facet_active: 1e-12,
    min_inner_radius: 1e-12,
    containment: 1e-9,
};
