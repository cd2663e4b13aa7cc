//! Discrete measures on the unit sphere: file format, general-position
//! certification, and seeded generators.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::sphere::unit_sphere_area;
use crate::tolerances::TOL;

/// Finite sum of weighted Dirac atoms `sum_i alpha_i delta_{v_i}` on `S^{n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    normals: Vec<DVector<f64>>,
    weights: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MeasureFile {
    dim: usize,
    atoms: Vec<AtomRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AtomRecord {
    v: Vec<f64>,
    alpha: f64,
}

impl DiscreteMeasure {
    /// Validates and normalizes raw atoms. Directions closer than the
    /// duplicate tolerance are merged by summing their weights.
    pub fn new(dim: usize, directions: Vec<DVector<f64>>, weights: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if directions.len() != weights.len() {
            return Err(Error::Malformed(format!("{} directions but {} weights", directions.len(), weights.len())));
        }
        let mut normals: Vec<DVector<f64>> = Vec::with_capacity(directions.len());
        let mut merged: Vec<f64> = Vec::with_capacity(weights.len());
        for (index, (v, &alpha)) in directions.into_iter().zip(&weights).enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
            }
            if !alpha.is_finite() || alpha <= 0.0 {
                return Err(Error::NonPositiveWeight { index, value: alpha });
            }
            let norm = v.norm();
            if !norm.is_finite() || norm <= f64::MIN_POSITIVE {
                return Err(Error::ZeroVector { index });
            }
            let u = v / norm;
            if let Some(k) = normals.iter().position(|w| angle_between(w, &u) <= TOL.angular_duplicate) {
                log::warn!("atom {index} duplicates atom {k}; merging weights");
                merged[k] += alpha;
            } else {
                normals.push(u);
                merged.push(alpha);
            }
        }
        if normals.len() <= dim {
            return Err(Error::TooFewAtoms { count: normals.len(), dim });
        }
        Ok(Self { dim, normals, weights: merged })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn normals(&self) -> &[DVector<f64>] {
        &self.normals
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Same atoms with new weights (used to build targets from forward maps).
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.dim, self.normals.clone(), weights)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = MeasureFile {
            dim: self.dim,
            atoms: self
                .normals
                .iter()
                .zip(&self.weights)
                .map(|(v, &alpha)| AtomRecord { v: v.iter().copied().collect(), alpha })
                .collect(),
        };
        serde_json::to_value(file).expect("measure serializes")
    }
}

pub(crate) fn angle_between(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    // atan2 form stays accurate for nearly parallel vectors.
    let cross = (a.norm_squared() * b.norm_squared() - a.dot(b).powi(2)).max(0.0).sqrt();
    cross.atan2(a.dot(b))
}

/// Parses the JSON measure format `{"dim": n, "atoms": [{"v": [...], "alpha": a}, ...]}`.
pub fn parse_measure(text: &str) -> Result<DiscreteMeasure> {
    let file: MeasureFile = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    let (dirs, weights): (Vec<_>, Vec<_>) = file.atoms.into_iter().map(|a| (DVector::from_vec(a.v), a.alpha)).unzip();
    DiscreteMeasure::new(file.dim, dirs, weights)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralPositionReport {
    pub in_general_position: bool,
    /// Nonzero `w` with `w.v_i >= 0` for every atom.
    pub hemisphere_witness: Option<Vec<f64>>,
    /// `n` atom indices whose normals have rank `< n`.
    pub dependent_subset: Option<Vec<usize>>,
    pub min_subset_det: f64,
    /// Optimal value of `max t : w.v_i >= t, |w|_1 = 1`.
    pub hemisphere_margin: f64,
    /// Set when `|hemisphere_margin|` is within ten times the LP margin.
    pub hemisphere_borderline: bool,
    pub exhaustive: bool,
    pub subsets_checked: u64,
    pub sampling_seed: Option<u64>,
}

const EXHAUSTIVE_LIMIT: f64 = 1e5;
const SAMPLED_SUBSETS: u64 = 100_000;
const DEFAULT_SAMPLING_SEED: u64 = 0x5eed;

pub fn validate_general_position(m: &DiscreteMeasure, det_tol: f64) -> GeneralPositionReport {
    validate_general_position_seeded(m, det_tol, DEFAULT_SAMPLING_SEED)
}

/// Checks both halves of the general-position condition: every `n` normals
/// are linearly independent, and the normals do not lie in a closed
/// hemisphere.
pub fn validate_general_position_seeded(m: &DiscreteMeasure, det_tol: f64, seed: u64) -> GeneralPositionReport {
    let n = m.dim;
    let count = m.len();
    let normals = &m.normals;

    let mut min_det = f64::INFINITY;
    let mut dependent: Option<Vec<usize>> = None;
    let mut checked = 0u64;
    let total = binomial(count, n);
    let exhaustive = total <= EXHAUSTIVE_LIMIT;
    let mut sampling_seed = None;

    let mut consider = |subset: &[usize], det: f64, dependent: &mut Option<Vec<usize>>| {
        if det < min_det {
            min_det = det;
        }
        if det <= det_tol && dependent.is_none() {
            *dependent = Some(complete_subset(subset, n, count));
        }
    };

    if exhaustive {
        for subset in Combinations::new(count, n) {
            checked += 1;
            let det = subset_det(normals, &subset);
            consider(&subset, det, &mut dependent);
        }
    } else {
        // Every pair (and triple, for n >= 3) first: a dependent small subset
        // makes every n-subset containing it dependent.
        for small in 2..=n.min(3) {
            for subset in Combinations::new(count, small) {
                checked += 1;
                let vol = if small == n { subset_det(normals, &subset) } else { gram_volume(normals, &subset) };
                consider(&subset, vol, &mut dependent);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sampling_seed = Some(seed);
        let mut idx: Vec<usize> = (0..count).collect();
        for _ in 0..SAMPLED_SUBSETS {
            for k in 0..n {
                let j = rng.random_range(k..count);
                idx.swap(k, j);
            }
            let mut subset = idx[..n].to_vec();
            subset.sort_unstable();
            checked += 1;
            let det = subset_det(normals, &subset);
            consider(&subset, det, &mut dependent);
        }
    }

    let (margin, witness) = hemisphere_lp(normals, n);
    let eps = TOL.hemisphere_margin;
    let hemisphere_witness = if margin >= eps { witness } else { None };
    let borderline = margin.abs() < 10.0 * eps;

    GeneralPositionReport {
        in_general_position: hemisphere_witness.is_none() && dependent.is_none(),
        hemisphere_witness,
        dependent_subset: dependent,
        min_subset_det: min_det,
        hemisphere_margin: margin,
        hemisphere_borderline: borderline,
        exhaustive,
        subsets_checked: checked,
        sampling_seed,
    }
}

/// Solves `max t` subject to `w.v_i >= t` and `|w|_1 = 1`; returns the optimal
/// margin and the maximizing `w`.
///
/// The 1-norm sphere is split into its `2^n` orthant faces. On the face with
/// signs `s`, `w = s * y` with `y` in the simplex, and the problem is the value
/// of a matrix game. Each face is solved in its dual form, which has only
/// `n + 1` rows whatever the number of normals; the maximizing `y` is read off
/// the shadow prices.
pub(crate) fn hemisphere_lp(normals: &[DVector<f64>], n: usize) -> (f64, Option<Vec<f64>>) {
    let count = normals.len();
    let mut best: (f64, Option<Vec<f64>>) = (f64::NEG_INFINITY, None);
    for signs in 0u32..(1 << n) {
        let sigma: Vec<f64> = (0..n).map(|k| if signs >> k & 1 == 1 { -1.0 } else { 1.0 }).collect();
        // variables: lambda (count, >= 0), s (free); maximize -s
        let mut obj = vec![0.0; count + 1];
        obj[count] = -1.0;
        let mut lp = LinearProgram::maximize(obj);
        lp.set_free(count);
        for k in 0..n {
            let mut row: Vec<f64> = normals.iter().map(|v| sigma[k] * v[k]).collect();
            row.push(-1.0);
            lp.constraint(row, Relation::Le, 0.0);
        }
        let mut simplex_row = vec![1.0; count + 1];
        simplex_row[count] = 0.0;
        lp.constraint(simplex_row, Relation::Eq, 1.0);
        if let LpOutcome::Optimal { value, duals, .. } = lp.solve() {
            let margin = -value;
            if margin > best.0 {
                let w = (0..n).map(|k| sigma[k] * duals[k].max(0.0)).collect();
                best = (margin, Some(w));
            }
        }
    }
    if best.1.is_none() {
        // The feasible set is compact and nonempty; reaching here means the
        // tableau broke down numerically.
        return (f64::NAN, None);
    }
    best
}

fn complete_subset(subset: &[usize], n: usize, count: usize) -> Vec<usize> {
    let mut out = subset.to_vec();
    for i in 0..count {
        if out.len() == n {
            break;
        }
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out.sort_unstable();
    out
}

pub(crate) fn subset_det(normals: &[DVector<f64>], subset: &[usize]) -> f64 {
    let n = subset.len();
    match n {
        2 => {
            let (a, b) = (&normals[subset[0]], &normals[subset[1]]);
            (a[0] * b[1] - a[1] * b[0]).abs()
        }
        3 => {
            let (a, b, c) = (&normals[subset[0]], &normals[subset[1]], &normals[subset[2]]);
            (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0]))
                .abs()
        }
        _ => DMatrix::from_fn(n, n, |r, c| normals[subset[c]][r]).determinant().abs(),
    }
}

/// Volume of the parallelepiped spanned by a (possibly non-square) subset.
fn gram_volume(normals: &[DVector<f64>], subset: &[usize]) -> f64 {
    let k = subset.len();
    let gram = DMatrix::from_fn(k, k, |r, c| normals[subset[r]].dot(&normals[subset[c]]));
    gram.determinant().max(0.0).sqrt()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Lexicographic k-subsets of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Self { n, current: (k <= n).then(|| (0..k).collect()) }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.current.take()?;
        let out = cur.clone();
        let k = cur.len();
        let mut next = cur;
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

const RESAMPLE_BUDGET: usize = 100;

pub(crate) fn random_unit_vector(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// `count` uniformly distributed unit normals with unit weights, resampled
/// until the configuration is certified to be in general position.
pub fn sample_general_position(n: usize, count: usize, seed: u64) -> Result<DiscreteMeasure> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    if count <= n {
        return Err(Error::TooFewAtoms { count, dim: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RESAMPLE_BUDGET {
        let dirs: Vec<_> = (0..count).map(|_| random_unit_vector(&mut rng, n)).collect();
        let Ok(m) = DiscreteMeasure::new(n, dirs, vec![1.0; count]) else {
            continue;
        };
        if m.len() == count && validate_general_position_seeded(&m, TOL.subset_det, seed).in_general_position {
            return Ok(m);
        }
    }
    Err(Error::ResampleBudget(RESAMPLE_BUDGET))
}

/// Approximates a positive density on the sphere by `count` atoms with
/// weights `f(v_i) * |S^{n-1}| / count`.
pub fn discretize_density<F>(f: F, n: usize, count: usize, seed: u64) -> Result<DiscreteMeasure>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let base = sample_general_position(n, count, seed)?;
    let cell = unit_sphere_area(n) / count as f64;
    let weights = base
        .normals
        .iter()
        .map(|v| {
            let value = f(v);
            if value.is_finite() && value > 0.0 {
                Ok(value * cell)
            } else {
                Err(Error::InvalidDensity { value })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteMeasure { dim: n, normals: base.normals, weights })
}

/// Unit vector at `degrees` in the plane.
pub fn planar_direction(degrees: f64) -> DVector<f64> {
    let t = degrees.to_radians();
    DVector::from_vec(vec![t.cos(), t.sin()])
}
