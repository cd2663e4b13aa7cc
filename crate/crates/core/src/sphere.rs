//! Quadrature node sets on `S^{n-1}`.
//!
//! Deterministic sets are a uniform angular grid (circle) and a Fibonacci
//! lattice (2-sphere), both with equal weights. Either can be rotated so that
//! a chosen direction becomes the pole; the lattices are built so that the
//! equator orthogonal to the pole is a cell boundary, which matters when the
//! integrand jumps across a facet plane.
//!
//! The circle grid with an even node count is antipodally symmetric (node
//! `j + M/2` is the antipode of node `j`), so even integrands can be summed
//! over half of it; see [`SphereRule::folded`].

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::measure::random_unit_vector;

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * PI / n as f64,
    }
}

/// Surface measure of `S^{n-1}`, i.e. `n * omega_n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeMode {
    DeterministicLattice,
    MonteCarlo,
}

/// Flat storage of `count` directions in `R^dim` with positive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereRule {
    pub dim: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Set when node `j + M/2` is the antipode of node `j`.
    pub antipodal: bool,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j * self.dim..(j + 1) * self.dim]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Deterministic rule whose pole (angle origin for the circle) is `pole`.
    pub fn lattice(dim: usize, count: usize, pole: Option<&[f64]>) -> Self {
        match dim {
            2 => circle_grid(count, pole),
            3 => fibonacci(count, pole),
            _ => panic!("deterministic sphere lattices exist for n = 2, 3 only"),
        }
    }

    pub fn monte_carlo(dim: usize, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(dim * count);
        for _ in 0..count {
            points.extend(random_unit_vector(&mut rng, dim).iter());
        }
        let w = unit_sphere_area(dim) / count as f64;
        Self { dim, points, weights: vec![w; count], antipodal: false }
    }

    /// For an antipodal rule, its first half with doubled weights (same sums
    /// for integrands with `f(u) = f(-u)`); otherwise the rule itself.
    pub fn folded(&self) -> Self {
        if !self.antipodal {
            return self.clone();
        }
        let half = self.len() / 2;
        Self {
            dim: self.dim,
            points: self.points[..half * self.dim].to_vec(),
            weights: self.weights[..half].iter().map(|w| 2.0 * w).collect(),
            antipodal: false,
        }
    }
}

/// Midpoint grid `theta_k = phi + (k + 1/2) 2pi / M`, where `phi` is the
/// angle of the pole. With `M` divisible by 4 the directions orthogonal to
/// the pole fall on cell boundaries.
fn circle_grid(count: usize, pole: Option<&[f64]>) -> SphereRule {
    use std::f64::consts::TAU;
    let phase = pole.map_or(0.0, |p| p[1].atan2(p[0]));
    let step = TAU / count as f64;
    let mut points = Vec::with_capacity(2 * count);
    for k in 0..count {
        let t = phase + (k as f64 + 0.5) * step;
        points.push(t.cos());
        points.push(t.sin());
    }
    SphereRule { dim: 2, points, weights: vec![step; count], antipodal: count.is_multiple_of(2) }
}

/// Fibonacci lattice with heights `1 - (2k+1)/M` measured along the pole.
fn fibonacci(count: usize, pole: Option<&[f64]>) -> SphereRule {
    use std::f64::consts::PI;
    let golden = PI * (3.0 - 5f64.sqrt());
    let (e1, e2, e3) = match pole {
        Some(p) => {
            let axis = DVector::from_column_slice(p).normalize();
            let (a, b) = orthonormal_complement(&axis);
            (a, b, axis)
        }
        None => (
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0, 0.0]),
            DVector::from_vec(vec![0.0, 0.0, 1.0]),
        ),
    };
    let mut points = Vec::with_capacity(3 * count);
    for k in 0..count {
        let z = 1.0 - (2 * k + 1) as f64 / count as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden * k as f64;
        let (s, c) = phi.sin_cos();
        for d in 0..3 {
            points.push(r * c * e1[d] + r * s * e2[d] + z * e3[d]);
        }
    }
    let w = 4.0 * PI / count as f64;
    SphereRule { dim: 3, points, weights: vec![w; count], antipodal: false }
}

/// Two unit vectors completing `axis` (unit, in `R^3`) to an orthonormal frame.
pub(crate) fn orthonormal_complement(axis: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let helper = if axis[0].abs() < 0.6 {
        DVector::from_vec(vec![1.0, 0.0, 0.0])
    } else if axis[1].abs() < 0.6 {
        DVector::from_vec(vec![0.0, 1.0, 0.0])
    } else {
        DVector::from_vec(vec![0.0, 0.0, 1.0])
    };
    let a = (&helper - axis * axis.dot(&helper)).normalize();
    let b = DVector::from_vec(vec![
        axis[1] * a[2] - axis[2] * a[1],
        axis[2] * a[0] - axis[0] * a[2],
        axis[0] * a[1] - axis[1] * a[0],
    ]);
    (a, b)
}
