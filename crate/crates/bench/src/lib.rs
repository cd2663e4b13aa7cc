//! Deterministic fixtures shared by the benchmarks.

use chordmink_core::{
    lp_chord_measure, sample_general_position, wulff_shape, DiscreteMeasure, Polytope, QuadratureScheme,
};

/// Wulff shape of `count` random normals with support `1 + 0.2 sin(i)`.
pub fn polytope(dim: usize, count: usize, seed: u64) -> Polytope {
    let normals = sample_general_position(dim, count, seed).expect("sampler succeeds").normals().to_vec();
    let support: Vec<f64> = (0..count).map(|i| 1.0 + 0.2 * (i as f64).sin()).collect();
    wulff_shape(&normals, &support).expect("bounded polytope")
}

/// `F_{p,q}` of [`polytope`], restricted to its active facets.
pub fn target_measure(dim: usize, count: usize, seed: u64, p: f64, q: f64) -> DiscreteMeasure {
    let poly = polytope(dim, count, seed);
    let f = lp_chord_measure(&poly, p, q, &QuadratureScheme::for_dim(dim)).expect("origin is interior");
    let (normals, weights): (Vec<_>, Vec<_>) =
        (0..count).filter(|&i| poly.is_active(i)).map(|i| (poly.normals()[i].clone(), f.values[i])).unzip();
    DiscreteMeasure::new(dim, normals, weights).expect("valid measure")
}
