//! Small dense two-phase simplex solver.
//!
//! The geometry code only ever needs tiny linear programs (a handful of
//! variables, at most a few hundred rows): the closed-hemisphere test and the
//! Chebyshev center. A dense tableau with Bland's rule is plenty for that.

const PIVOT_EPS: f64 = 1e-12;
const FEAS_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    /// `duals[i]` is the shadow price of row `i`: the derivative of the
    /// optimal value with respect to that row's right-hand side.
    Optimal {
        x: Vec<f64>,
        value: f64,
        duals: Vec<f64>,
    },
    Infeasible,
    Unbounded,
}

/// `maximize c.x` subject to linear rows; variables are nonnegative unless
/// marked free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    objective: Vec<f64>,
    free: Vec<bool>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self { objective, free: vec![false; n], rows: Vec::new() }
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.free[var] = true;
        self
    }

    pub fn constraint(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.objective.len(), "row length mismatch");
        self.rows.push((coeffs, rel, rhs));
        self
    }

    pub fn solve(&self) -> LpOutcome {
        // Column layout: one column per nonnegative variable (two for free
        // ones), then slack/surplus, then artificials.
        let n_orig = self.objective.len();
        let mut col_of = Vec::with_capacity(n_orig);
        let mut n_struct = 0;
        for &f in &self.free {
            col_of.push(n_struct);
            n_struct += if f { 2 } else { 1 };
        }
        let m = self.rows.len();
        let n_slack = self.rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(m);
        let mut flipped_row = vec![false; m];
        for (coeffs, rel, rhs) in &self.rows {
            let mut expanded = vec![0.0; n_struct];
            for (j, &a) in coeffs.iter().enumerate() {
                expanded[col_of[j]] = a;
                if self.free[j] {
                    expanded[col_of[j] + 1] = -a;
                }
            }
            if *rhs < 0.0 {
                flipped_row[rows.len()] = true;
                let flipped = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                rows.push((expanded.iter().map(|a| -a).collect(), flipped, -rhs));
            } else {
                rows.push((expanded, *rel, *rhs));
            }
        }
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let ncols = n_struct + n_slack + n_art;
        let art_start = n_struct + n_slack;

        let mut tab = vec![vec![0.0; ncols + 1]; m];
        let mut basis = vec![0usize; m];
        // column holding the identity entry of each row in the initial tableau
        let mut unit_col = vec![0usize; m];
        let (mut slack, mut art) = (n_struct, art_start);
        for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
            tab[i][..n_struct].copy_from_slice(coeffs);
            tab[i][ncols] = *rhs;
            match rel {
                Relation::Le => {
                    tab[i][slack] = 1.0;
                    basis[i] = slack;
                    unit_col[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    tab[i][slack] = -1.0;
                    slack += 1;
                    tab[i][art] = 1.0;
                    basis[i] = art;
                    unit_col[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    tab[i][art] = 1.0;
                    basis[i] = art;
                    unit_col[i] = art;
                    art += 1;
                }
            }
        }

        if n_art > 0 {
            let mut phase1 = vec![0.0; ncols];
            for c in phase1.iter_mut().skip(art_start) {
                *c = -1.0;
            }
            if pivot_loop(&mut tab, &mut basis, &phase1, ncols).is_err() {
                return LpOutcome::Infeasible;
            }
            let infeas: f64 =
                basis.iter().enumerate().filter(|(_, &b)| b >= art_start).map(|(i, _)| tab[i][ncols]).sum();
            if infeas > FEAS_EPS {
                return LpOutcome::Infeasible;
            }
            // Drive remaining (zero-level) artificials out of the basis.
            for i in 0..m {
                if basis[i] >= art_start {
                    if let Some(j) = (0..art_start).find(|&j| tab[i][j].abs() > PIVOT_EPS) {
                        pivot(&mut tab, &mut basis, i, j);
                    }
                }
            }
        }

        let mut phase2 = vec![0.0; ncols];
        for (j, &c) in self.objective.iter().enumerate() {
            phase2[col_of[j]] = c;
            if self.free[j] {
                phase2[col_of[j] + 1] = -c;
            }
        }
        if pivot_loop(&mut tab, &mut basis, &phase2, art_start).is_err() {
            return LpOutcome::Unbounded;
        }

        let mut xs = vec![0.0; ncols];
        for (i, &b) in basis.iter().enumerate() {
            xs[b] = tab[i][ncols];
        }
        let x: Vec<f64> = (0..n_orig)
            .map(|j| {
                let c = col_of[j];
                if self.free[j] {
                    xs[c] - xs[c + 1]
                } else {
                    xs[c]
                }
            })
            .collect();
        let value = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        let duals = (0..m)
            .map(|i| {
                let c = unit_col[i];
                let y: f64 = (0..m).map(|r| phase2[basis[r]] * tab[r][c]).sum();
                if flipped_row[i] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        LpOutcome::Optimal { x, value, duals }
    }
}

struct Unbounded;

/// Runs primal simplex iterations (Bland's rule) maximizing `obj`; only
/// columns `< allowed` may enter.
fn pivot_loop(tab: &mut [Vec<f64>], basis: &mut [usize], obj: &[f64], allowed: usize) -> Result<(), Unbounded> {
    let m = tab.len();
    let rhs = obj.len();
    loop {
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let reduced: f64 = (0..m).map(|i| obj[basis[i]] * tab[i][j]).sum::<f64>() - obj[j];
            reduced < -PIVOT_EPS
        });
        let Some(j) = entering else {
            return Ok(());
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tab[i][j];
            if a > PIVOT_EPS {
                let ratio = tab[i][rhs] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        if ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[i] < basis[k]) {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
        }
        let Some((i, _)) = leave else {
            return Err(Unbounded);
        };
        pivot(tab, basis, i, j);
    }
}

fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = tab[row][col];
    for v in tab[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let f = r[col];
        if f != 0.0 {
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
    basis[row] = col;
}
