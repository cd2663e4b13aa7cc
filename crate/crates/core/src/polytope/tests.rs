use super::*;
use crate::measure::{planar_direction, sample_general_position};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

fn square() -> Polytope {
    wulff_shape(&[v(&[1., 0.]), v(&[-1., 0.]), v(&[0., 1.]), v(&[0., -1.])], &[1.0; 4]).unwrap()
}

fn cube() -> Polytope {
    let mut normals = Vec::new();
    for d in 0..3 {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(3);
            e[d] = s;
            normals.push(e);
        }
    }
    wulff_shape(&normals, &[1.0; 6]).unwrap()
}

fn triangle() -> Polytope {
    let normals: Vec<_> = [90.0, 210.0, 330.0].iter().map(|&a| planar_direction(a)).collect();
    wulff_shape(&normals, &[1.0; 3]).unwrap()
}

fn random_polytope(n: usize, count: usize, seed: u64) -> Polytope {
    let m = sample_general_position(n, count, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    let h: Vec<f64> = (0..count).map(|_| rng.random_range(0.8..1.2)).collect();
    wulff_shape(m.normals(), &h).unwrap()
}

/// Chord length by bisection on membership, independent of the slack formulas.
fn chord_by_bisection(p: &Polytope, z: &DVector<f64>, u: &DVector<f64>) -> f64 {
    let inside = |t: f64| p.violation(&(z + u * t)) <= 1e-13;
    let reach = |sign: f64| {
        let (mut lo, mut hi) = (0.0, 1.0);
        while inside(sign * hi) {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if inside(sign * mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    reach(1.0) + reach(-1.0)
}

#[test]
fn square_structure() {
    let p = square();
    assert_eq!(p.vertices().len(), 4);
    for f in p.facets() {
        assert!(f.active);
        assert!((f.area - 2.0).abs() < 1e-12);
    }
    assert!((p.inner_radius() - 1.0).abs() < 1e-12);
    assert!((p.outer_radius() - 2f64.sqrt()).abs() < 1e-12);
    assert!((p.volume() - 4.0).abs() < 1e-12);
    assert!((p.surface_area() - 8.0).abs() < 1e-12);
}

#[test]
fn equilateral_triangle_structure() {
    // Oracle: an equilateral triangle with inradius 1 has side 2 sqrt 3,
    // circumradius 2, area 3 sqrt 3, perimeter 6 sqrt 3.
    let p = triangle();
    let s3 = 3f64.sqrt();
    assert_eq!(p.vertices().len(), 3);
    for f in p.facets() {
        assert!((f.area - 2.0 * s3).abs() < 1e-12);
    }
    assert!((p.inner_radius() - 1.0).abs() < 1e-12);
    assert!((p.outer_radius() - 2.0).abs() < 1e-12);
    assert!((p.volume() - 3.0 * s3).abs() < 1e-12);
    assert!((p.surface_area() - 6.0 * s3).abs() < 1e-12);
}

#[test]
fn redundant_halfspace_is_inactive() {
    let normals = [v(&[1., 0.]), v(&[-1., 0.]), v(&[0., 1.]), v(&[0., -1.]), v(&[1., 0.])];
    let p = wulff_shape(&normals, &[1., 1., 1., 1., 2.]).unwrap();
    assert!(!p.is_active(4));
    assert_eq!(p.facets()[4].area, 0.0);
    assert_eq!(p.vertices().len(), 4);
    assert!((p.true_support()[4] - 1.0).abs() < 1e-12);
}

#[test]
fn cube_structure() {
    let p = cube();
    assert_eq!(p.vertices().len(), 8);
    assert_eq!(p.edges().len(), 12);
    assert!((p.volume() - 8.0).abs() < 1e-12);
    assert!((p.surface_area() - 24.0).abs() < 1e-12);
    for f in p.facets() {
        assert_eq!(f.vertex_indices.len(), 4);
        assert!((f.area - 4.0).abs() < 1e-12);
    }
}

#[test]
fn construction_errors() {
    let half = [v(&[1., 0.]), v(&[0., 1.]), v(&[-1., 0.])];
    assert_eq!(wulff_shape(&half, &[1.0; 3]).unwrap_err(), Error::Unbounded);
    let normals = [v(&[1., 0.]), v(&[-1., 0.]), v(&[0., 1.]), v(&[0., -1.])];
    assert!(matches!(wulff_shape(&normals, &[1.0, -1.0, 1.0, 1.0]), Err(Error::EmptyInterior { .. })));
    assert!(matches!(wulff_shape(&normals, &[1.0, -1.0, 1.0, 1.0 + 1e-14]), Err(Error::EmptyInterior { .. })));
}

#[test]
fn support_function_examples() {
    let p = square();
    assert!((p.support_function(&v(&[1., 0.])) - 1.0).abs() < 1e-15);
    let d = v(&[1., 1.]) / 2f64.sqrt();
    assert!((p.support_function(&d) - 2f64.sqrt()).abs() < 1e-15);
    let (val, k) = p.support_point(&d);
    assert_eq!(p.vertices()[k].dot(&d), val);
}

#[test]
fn radial_and_xray_examples() {
    let p = square();
    let e1 = v(&[1., 0.]);
    let o = v(&[0., 0.]);
    let left = v(&[-1., 0.]);
    assert!((p.radial_function(&o, &e1).unwrap() - 1.0).abs() < 1e-15);
    assert!((p.radial_function(&left, &e1).unwrap() - 2.0).abs() < 1e-15);
    assert_eq!(p.radial_function(&left, &(-&e1)).unwrap(), 0.0);
    assert!((p.xray(&left, &e1).unwrap() - 2.0).abs() < 1e-15);
    let d = v(&[1., 1.]) / 2f64.sqrt();
    assert!((p.xray(&o, &d).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-14);
    assert!(matches!(p.radial_function(&v(&[2., 0.]), &e1), Err(Error::OutsidePolytope { .. })));

    // triangle: from the incenter towards a vertex the ray has length R = 2
    let t = triangle();
    let apex = t.vertices().iter().find(|x| x[1] < -1.9).unwrap().clone();
    let dir = apex.normalize();
    assert!((t.radial_function(&o, &dir).unwrap() - apex.norm()).abs() < 1e-12);
}

#[test]
fn xray_matches_bisection() {
    let t = triangle();
    let z = t.vertices().iter().fold(DVector::zeros(2), |a, x| a + x) / 3.0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let u = v(&[a.cos(), a.sin()]);
        let x = t.xray(&z, &u).unwrap();
        assert!((x - chord_by_bisection(&t, &z, &u)).abs() < 1e-10);
    }
}

#[test]
fn facet_quadrature_examples() {
    let p = square();
    let fq = facet_quadrature(&p, 0, 2).unwrap();
    assert!((fq.total_weight() - 2.0).abs() < 1e-12);

    // triangle side: x-coordinate is linear, so its integral is length * midpoint x
    let t = triangle();
    let f = &t.facets()[2];
    let a = &t.vertices()[f.vertex_indices[0]];
    let b = &t.vertices()[f.vertex_indices[1]];
    let exact = (b - a).norm() * 0.5 * (a[0] + b[0]);
    let fq = facet_quadrature(&t, 2, 5).unwrap();
    assert!((fq.integrate(|z| z[0]) - exact).abs() < 1e-12);
    // and a quintic along the edge, against the closed form of the segment integral
    let g = |z: &DVector<f64>| (z - a).norm().powi(5);
    let len = (b - a).norm();
    assert!((fq.integrate(g) - len.powi(6) / 6.0).abs() < 1e-10 * len.powi(6));

    let c = cube();
    let fq = facet_quadrature(&c, 0, 2).unwrap();
    assert!((fq.total_weight() - 4.0).abs() < 1e-12);
    for z in &fq.nodes {
        assert!((z[0] - 1.0).abs() < 1e-12 && z[1].abs() <= 1.0 && z[2].abs() <= 1.0);
    }
    let refined = facet_quadrature_refined(&c, 3, 5, 2).unwrap();
    assert!((refined.total_weight() - 4.0).abs() < 1e-12);

    let normals = [v(&[1., 0.]), v(&[-1., 0.]), v(&[0., 1.]), v(&[0., -1.]), v(&[1., 0.])];
    let q = wulff_shape(&normals, &[1., 1., 1., 1., 2.]).unwrap();
    assert_eq!(facet_quadrature(&q, 4, 2).unwrap_err(), Error::InactiveFacet(4));
}

#[test]
fn translate_and_scale_examples() {
    let p = square();
    let big = p.scale(2.0).unwrap();
    assert!((big.volume() - 16.0).abs() < 1e-12);
    assert!((big.support_function(&v(&[1., 0.])) - 2.0).abs() < 1e-15);
    let moved = p.translate(&v(&[1., 0.]));
    assert_eq!(moved.support(), &[2.0, 0.0, 1.0, 1.0]);
    assert!(p.scale(0.0).is_err());
    assert!(p.scale(-1.0).is_err());

    let x = v(&[0.3, -0.2]);
    let a = p.translate(&x).scale(1.7).unwrap();
    let b = p.scale(1.7).unwrap().translate(&(&x * 1.7));
    for (ha, hb) in a.support().iter().zip(b.support()) {
        assert!((ha - hb).abs() < 1e-14);
    }
}

#[test]
fn record_round_trip() {
    let p = random_polytope(3, 9, 4);
    let text = serde_json::to_string(&p.to_record()).unwrap();
    let q = Polytope::from_json(&text).unwrap();
    assert_eq!(q.vertices().len(), p.vertices().len());
    assert!((q.volume() - p.volume()).abs() < 1e-12);
}

#[test]
fn clipping_agrees_with_subset_enumeration() {
    for (n, seed) in [(2, 1u64), (3, 2)] {
        let m = sample_general_position(n, 70, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h: Vec<f64> = (0..70).map(|_| rng.random_range(0.9..1.1)).collect();
        let clipped = wulff_shape(m.normals(), &h).unwrap();
        let subsets = enumerate::by_subsets(n, m.normals(), &h, 1e-9);
        let subsets = enumerate::dedupe(subsets, 1e-9);
        assert_eq!(clipped.vertices().len(), subsets.len());
        for x in &subsets {
            assert!(clipped.vertices().iter().any(|y| (x - y).norm() < 1e-8));
        }
    }
}

#[test]
fn higher_dimensional_queries() {
    // 4-cube: support, radial and X-ray only
    let mut normals = Vec::new();
    for d in 0..4 {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(4);
            e[d] = s;
            normals.push(e);
        }
    }
    let p = wulff_shape(&normals, &[1.0; 8]).unwrap();
    assert_eq!(p.vertices().len(), 16);
    assert!(p.facets().iter().all(|f| f.active));
    let u = DVector::from_element(4, 0.5);
    assert!((p.support_function(&u) - 2.0).abs() < 1e-12);
    assert!((p.xray(&DVector::zeros(4), &u).unwrap() - 4.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn minkowski_closedness(seed in 0u64..500, n in 2usize..4, extra in 1usize..8) {
        let p = random_polytope(n, n + 1 + extra, seed);
        let mut sum = DVector::zeros(n);
        for (f, v) in p.facets().iter().zip(p.normals()) {
            if f.active {
                sum += v * f.area;
            }
        }
        prop_assert!(sum.norm() <= 1e-8);
        prop_assert!(p.inner_radius() <= p.outer_radius());
    }

    #[test]
    fn support_bounded_by_offsets(seed in 0u64..500, n in 2usize..4) {
        let p = random_polytope(n, 8, seed);
        let scale = p.outer_radius();
        for (i, (v, h)) in p.normals().iter().zip(p.support()).enumerate() {
            let hs = p.support_function(v);
            prop_assert!(hs <= h + 1e-9 * scale);
            if p.is_active(i) {
                prop_assert!((hs - h).abs() <= 1e-9 * scale);
            }
        }
        for x in p.vertices() {
            prop_assert!(p.violation(x) <= 1e-9 * scale);
            let tight = p.normals().iter().zip(p.support())
                .filter(|(v, h)| (v.dot(x) - *h).abs() <= 1e-8 * scale).count();
            prop_assert!(tight >= n);
        }
    }

    #[test]
    fn canonicalization_keeps_vertices(seed in 0u64..500) {
        let m = sample_general_position(2, 7, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h: Vec<f64> = (0..7).map(|_| rng.random_range(0.5..2.0)).collect();
        let p = wulff_shape(m.normals(), &h).unwrap();
        let q = p.canonicalized().unwrap();
        prop_assert_eq!(p.vertices().len(), q.vertices().len());
        for x in p.vertices() {
            prop_assert!(q.vertices().iter().any(|y| (x - y).norm() < 1e-9));
        }
    }

    #[test]
    fn xray_symmetry_and_translation(seed in 0u64..500, a in 0.0f64..6.3, bx in -0.3f64..0.3, by in -0.3f64..0.3) {
        let p = random_polytope(2, 6, seed);
        let u = v(&[a.cos(), a.sin()]);
        let z = p.center() + v(&[bx, by]) * p.inner_radius();
        prop_assert!((p.xray(&z, &u).unwrap() - p.xray(&z, &(-&u)).unwrap()).abs() < 1e-12);
        let x = v(&[1.5, -0.7]);
        let moved = p.translate(&x);
        let r0 = p.radial_function(&z, &u).unwrap();
        let r1 = moved.radial_function(&(&z + &x), &u).unwrap();
        prop_assert!((r0 - r1).abs() < 1e-12 * (1.0 + r0));
    }

    #[test]
    fn volume_scales_homogeneously(seed in 0u64..500, n in 2usize..4, t in 0.1f64..5.0) {
        let p = random_polytope(n, 7, seed);
        let q = p.scale(t).unwrap();
        let expected = t.powi(n as i32) * p.volume();
        prop_assert!((q.volume() - expected).abs() <= 1e-12 * expected);
    }
}
