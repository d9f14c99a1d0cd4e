//! Dense bounded-variable primal simplex for
//! `max c·x  s.t.  A x ≤ b,  0 ≤ x ≤ u` with `b ≥ 0`.
//!
//! The all-slack basis is feasible, so no phase one is needed. Entering and
//! leaving variables follow Bland's rule, which rules out cycling; the result
//! is a basic feasible solution.

use crate::error::{Error, Result};

/// Pivot and optimality tolerance.
pub const TOL: f64 = 1e-9;

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// Constraint rows, each of length `objective.len()`.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// Upper bounds; `f64::INFINITY` for none.
    pub upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
            rhs: Vec::new(),
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.num_vars());
        self.rows.push(coeffs);
        self.rhs.push(rhs);
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row duals (shadow prices), non-negative at optimality.
    pub duals: Vec<f64>,
    /// Basic variable of each row; indices ≥ `num_vars` are slacks.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    Lower,
    Upper,
}

/// Solves `lp`, giving up after `max_iter` pivots or bound flips.
pub fn solve(lp: &LinearProgram, max_iter: usize) -> Result<LpSolution> {
    let n = lp.num_vars();
    let m = lp.rows.len();
    if lp.rhs.iter().any(|&b| b < -TOL) {
        return Err(Error::Parameter(
            "simplex needs a non-negative right-hand side".into(),
        ));
    }
    let total = n + m;
    let mut upper = lp.upper.clone();
    upper.extend(std::iter::repeat_n(f64::INFINITY, m));
    let mut cost = lp.objective.clone();
    cost.extend(std::iter::repeat_n(0.0, m));
    // Tableau B⁻¹[A | I].
    let mut t: Vec<Vec<f64>> = lp
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    let mut value: Vec<f64> = lp.rhs.clone();
    let mut basis: Vec<usize> = (n..total).collect();
    let mut status = vec![Status::Lower; total];
    for &b in &basis {
        status[b] = Status::Basic;
    }
    let mut d = cost.clone();

    let mut iterations = 0;
    loop {
        let entering = (0..total).find(|&j| match status[j] {
            Status::Lower => d[j] > TOL && upper[j] > TOL,
            Status::Upper => d[j] < -TOL,
            Status::Basic => false,
        });
        let Some(j) = entering else { break };
        if iterations >= max_iter {
            return Err(Error::Internal(format!(
                "simplex did not converge in {max_iter} iterations (n = {n}, m = {m})"
            )));
        }
        iterations += 1;
        // Moving x_j by θ ≥ 0 in direction dir changes basic r by −dir·θ·t[r][j].
        let dir = if status[j] == Status::Lower {
            1.0
        } else {
            -1.0
        };
        let mut theta = upper[j];
        let mut leave: Option<(usize, Status)> = None;
        for r in 0..m {
            let a = dir * t[r][j];
            let (limit, to) = if a > TOL {
                (value[r] / a, Status::Lower)
            } else if a < -TOL && upper[basis[r]].is_finite() {
                ((upper[basis[r]] - value[r]) / -a, Status::Upper)
            } else {
                continue;
            };
            let limit = limit.max(0.0);
            let better = match leave {
                _ if limit < theta - TOL => true,
                Some((lr, _)) => limit <= theta + TOL && basis[r] < basis[lr],
                None => false,
            };
            if better {
                theta = limit;
                leave = Some((r, to));
            }
        }
        if theta.is_infinite() {
            return Err(Error::Internal("linear program is unbounded".into()));
        }
        for r in 0..m {
            value[r] -= dir * theta * t[r][j];
        }
        match leave {
            None => {
                status[j] = if status[j] == Status::Lower {
                    Status::Upper
                } else {
                    Status::Lower
                };
            }
            Some((r, to)) => {
                let old = basis[r];
                status[old] = to;
                let entering_value = if dir > 0.0 { theta } else { upper[j] - theta };
                let p = t[r][j];
                for v in t[r].iter_mut() {
                    *v /= p;
                }
                let pivot_row = t[r].clone();
                for (k, row) in t.iter_mut().enumerate() {
                    if k != r && row[j].abs() > 0.0 {
                        let f = row[j];
                        for (x, &y) in row.iter_mut().zip(&pivot_row) {
                            *x -= f * y;
                        }
                    }
                }
                let f = d[j];
                for (x, &y) in d.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
                basis[r] = j;
                status[j] = Status::Basic;
                value[r] = entering_value;
            }
        }
    }

    let mut x = vec![0.0; total];
    for j in 0..total {
        if status[j] == Status::Upper {
            x[j] = upper[j];
        }
    }
    for (r, &b) in basis.iter().enumerate() {
        x[b] = value[r];
    }
    x.truncate(n);
    for v in &mut x {
        if v.abs() < TOL {
            *v = 0.0;
        }
    }
    let objective = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
    let duals = (0..m).map(|i| -d[n + i]).collect();
    Ok(LpSolution {
        x,
        objective,
        duals,
        basis,
        iterations,
    })
}
