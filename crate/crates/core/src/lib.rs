//! Chord integrals, chord measures and the discrete L_p chord Minkowski
//! problem for convex polytopes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chord;
pub mod error;
pub mod json;
pub mod lp;
pub mod measure;
pub mod polytope;
pub mod rules;
pub mod solver;
pub mod sphere;
pub mod tolerances;

pub use chord::{
    chord_integral, chord_integral_and_measure, chord_integral_reference, chord_measure, dual_quermassintegral,
    lp_chord_measure, ChordMeasureVector, Estimate, MeasureMethod, QuadratureScheme,
};
pub use error::{Error, Result};
pub use measure::{
    discretize_density, parse_measure, sample_general_position, validate_general_position, DiscreteMeasure,
    GeneralPositionReport,
};
pub use polytope::{facet_quadrature, wulff_shape, FacetQuadrature, Polytope, PolytopeRecord};
pub use solver::{
    chord_gradient_check, inner_center, outer_solve, phi, verify, CenterSolution, SolveReport, SolverConfig,
    Termination, VerifyReport,
};
pub use sphere::{unit_ball_volume, unit_sphere_area};
pub use tolerances::Tolerances;
