//! Polynomial-exact rules on the reference segment and triangle.

/// Gauss-Legendre nodes and weights on `[0, 1]` with `count` points
/// (exact to degree `2 count - 1`).
pub fn gauss_legendre_unit(count: usize) -> Vec<(f64, f64)> {
    assert!(count > 0);
    let n = count;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Newton on P_n starting from the Chebyshev-like guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Number of Gauss points exact for degree `order`.
pub fn gauss_points_for_order(order: usize) -> usize {
    order / 2 + 1
}

/// Symmetric rule on the reference triangle as barycentric triples with
/// weights summing to one, exact for polynomials of degree `order`.
/// Orders beyond six fall back to a collapsed Gauss product rule.
pub fn triangle_rule(order: usize) -> Vec<([f64; 3], f64)> {
    match order {
        0 | 1 => vec![([1.0 / 3.0; 3], 1.0)],
        2 => orbit3(2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0),
        3 | 4 => {
            let mut r = orbit3(0.108103018168070, 0.445948490915965, 0.223381589678011);
            r.extend(orbit3(0.816847572980459, 0.091576213509771, 0.109951743655322));
            r
        }
        5 => {
            let mut r = vec![([1.0 / 3.0; 3], 0.225)];
            r.extend(orbit3(0.059715871789770, 0.470142064105115, 0.132394152788506));
            r.extend(orbit3(0.797426985353087, 0.101286507323456, 0.125939180544827));
            r
        }
        6 => {
            let mut r = orbit3(0.501426509658179, 0.249286745170910, 0.116786275726379);
            r.extend(orbit3(0.873821971016996, 0.063089014491502, 0.050844906370207));
            r.extend(orbit6(0.053145049844817, 0.310352451033784, 0.082851075618374));
            r
        }
        _ => collapsed_gauss(order),
    }
}

fn orbit3(a: f64, b: f64, w: f64) -> Vec<([f64; 3], f64)> {
    vec![([a, b, b], w), ([b, a, b], w), ([b, b, a], w)]
}

fn orbit6(a: f64, b: f64, w: f64) -> Vec<([f64; 3], f64)> {
    let c = 1.0 - a - b;
    vec![([a, b, c], w), ([a, c, b], w), ([b, a, c], w), ([b, c, a], w), ([c, a, b], w), ([c, b, a], w)]
}

/// Duffy-collapsed product of Gauss rules; positive weights, not symmetric.
fn collapsed_gauss(order: usize) -> Vec<([f64; 3], f64)> {
    let k = gauss_points_for_order(order + 1);
    let g = gauss_legendre_unit(k);
    let mut out = Vec::with_capacity(k * k);
    for &(s, ws) in &g {
        for &(t, wt) in &g {
            // (x, y) = (s, t (1 - s)), Jacobian (1 - s), reference area 1/2
            let x = s;
            let y = t * (1.0 - s);
            out.push(([1.0 - x - y, x, y], 2.0 * ws * wt * (1.0 - s)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn gauss_legendre_is_exact() {
        for count in 1..8 {
            let rule = gauss_legendre_unit(count);
            let total: f64 = rule.iter().map(|r| r.1).sum();
            assert!((total - 1.0).abs() < 1e-14);
            for deg in 0..(2 * count) {
                let approx: f64 = rule.iter().map(|&(x, w)| w * x.powi(deg as i32)).sum();
                assert!((approx - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "count {count} deg {deg}");
            }
        }
    }

    #[test]
    fn triangle_rules_integrate_monomials() {
        // oracle: int_T x^a y^b = a! b! / (a + b + 2)!, area(T) = 1/2
        for order in 0..=9 {
            let rule = triangle_rule(order);
            assert!(rule.iter().all(|r| r.1 > 0.0));
            for a in 0..=order as u32 {
                for b in 0..=(order as u32 - a) {
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    let approx: f64 =
                        rule.iter().map(|(bary, w)| 0.5 * w * bary[1].powi(a as i32) * bary[2].powi(b as i32)).sum();
                    assert!((approx - exact).abs() < 1e-12, "order {order} x^{a} y^{b}");
                }
            }
        }
    }
}
