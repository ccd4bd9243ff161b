//! Two-phase primal simplex over exact rationals on a dense tableau.
//!
//! The solver maximizes a linear objective subject to equality constraints,
//! per-variable lower bounds and optional upper bounds. Bland's rule picks
//! both the entering column (lowest index with positive reduced cost) and the
//! leaving row (lowest basic-variable index among minimum ratios), which
//! rules out cycling, so termination needs no perturbation or tolerance.
//!
//! An optimal answer is always a basic feasible solution, i.e. an extreme
//! point of the feasible polytope. Several downstream guarantees (notably
//! acyclicity of the consumption graph after the Pareto-improvement solve)
//! rest on exactly this property, which is why the solver is written here
//! rather than delegated to a floating-point library.

use super::{LpProblem, LpSolution, LpStatus};
use crate::rational::Rational;
use num::{One, Signed, Zero};

struct Tableau {
    /// Structural columns: problem variables, then internal bound slacks.
    structural: usize,
    /// Total columns including one artificial per row.
    total: usize,
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
}

enum PivotOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col].clone();
        for entry in self.rows[row].iter_mut() {
            *entry /= &pivot;
        }
        self.rhs[row] /= &pivot;
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for c in 0..self.total {
                let delta = &factor * &self.rows[row][c];
                self.rows[r][c] -= delta;
            }
            let delta = &factor * &self.rhs[row];
            self.rhs[r] -= delta;
        }
        self.basis[row] = col;
    }

    /// Runs Bland-rule pivoting until no reduced cost is positive. Only
    /// structural columns may enter the basis.
    fn run(&mut self, cost: &mut [Rational], value: &mut Rational) -> PivotOutcome {
        loop {
            let entering = (0..self.structural).find(|&j| cost[j].is_positive());
            let Some(entering) = entering else {
                return PivotOutcome::Optimal;
            };
            let mut leaving: Option<usize> = None;
            for r in 0..self.rows.len() {
                if !self.rows[r][entering].is_positive() {
                    continue;
                }
                leaving = match leaving {
                    None => Some(r),
                    Some(best) => {
                        // Compare rhs[r]/a[r] against rhs[best]/a[best]
                        // without forming the quotients.
                        let lhs = &self.rhs[r] * &self.rows[best][entering];
                        let rhs = &self.rhs[best] * &self.rows[r][entering];
                        if lhs < rhs || (lhs == rhs && self.basis[r] < self.basis[best]) {
                            Some(r)
                        } else {
                            Some(best)
                        }
                    }
                };
            }
            let Some(row) = leaving else {
                return PivotOutcome::Unbounded;
            };
            self.pivot(row, entering);
            let gain = cost[entering].clone();
            for (c, coeff) in cost.iter_mut().enumerate() {
                let delta = &gain * &self.rows[row][c];
                *coeff -= delta;
            }
            *value += &gain * &self.rhs[row];
        }
    }
}

/// Solves `problem` exactly. Infeasibility and unboundedness are reported in
/// the returned status, never by panicking; a malformed problem (mismatched
/// dimensions) is a caller bug and asserts.
pub fn solve_simplex(problem: &LpProblem) -> LpSolution {
    let nvars = problem.objective.len();
    assert_eq!(problem.lower_bounds.len(), nvars, "lower bound per variable");
    assert_eq!(problem.upper_bounds.len(), nvars, "upper bound per variable");
    for row in &problem.rows {
        assert_eq!(row.coeffs.len(), nvars, "constraint width");
    }

    let bounded: Vec<usize> = (0..nvars)
        .filter(|&j| problem.upper_bounds[j].is_some())
        .collect();
    let structural = nvars + bounded.len();
    let nrows = problem.rows.len() + bounded.len();
    let total = structural + nrows;

    // Shift every variable by its lower bound so all variables are >= 0;
    // upper bounds become rows `x_j + slack = ub_j - lb_j` with a dedicated
    // slack column; finally one artificial column per row.
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(nrows);
    let mut rhs: Vec<Rational> = Vec::with_capacity(nrows);
    for row in &problem.rows {
        let shift = row
            .coeffs
            .iter()
            .zip(&problem.lower_bounds)
            .fold(Rational::zero(), |acc, (c, lb)| acc + c * lb);
        let mut coeffs = row.coeffs.clone();
        coeffs.resize(total, Rational::zero());
        rows.push(coeffs);
        rhs.push(&row.rhs - shift);
    }
    for (slack, &j) in bounded.iter().enumerate() {
        let mut coeffs = vec![Rational::zero(); total];
        coeffs[j] = Rational::one();
        coeffs[nvars + slack] = Rational::one();
        rows.push(coeffs);
        let ub = problem.upper_bounds[j].as_ref().unwrap();
        rhs.push(ub - &problem.lower_bounds[j]);
    }
    for r in 0..nrows {
        if rhs[r].is_negative() {
            for entry in rows[r].iter_mut() {
                let negated = -entry.clone();
                *entry = negated;
            }
            rhs[r] = -rhs[r].clone();
        }
        rows[r][structural + r] = Rational::one();
    }

    let mut tableau = Tableau {
        structural,
        total,
        rows,
        rhs,
        basis: (structural..total).collect(),
    };

    // Phase 1: maximize minus the sum of artificials from the artificial
    // basis. Reduced costs of structural columns start at the column sums.
    let mut cost = vec![Rational::zero(); total];
    let mut value = Rational::zero();
    for r in 0..nrows {
        for c in 0..structural {
            let add = tableau.rows[r][c].clone();
            cost[c] += add;
        }
        value -= &tableau.rhs[r];
    }
    match tableau.run(&mut cost, &mut value) {
        PivotOutcome::Optimal => {}
        PivotOutcome::Unbounded => unreachable!("phase-1 objective is bounded above by zero"),
    }
    if value.is_negative() {
        return LpSolution {
            status: LpStatus::Infeasible,
            values: Vec::new(),
            objective_value: Rational::zero(),
            basis: Vec::new(),
        };
    }

    // Drive leftover artificials out of the (degenerate) basis; rows with no
    // structural support are redundant and dropped.
    let mut r = 0;
    while r < tableau.rows.len() {
        if tableau.basis[r] >= structural {
            debug_assert!(tableau.rhs[r].is_zero());
            match (0..structural).find(|&j| !tableau.rows[r][j].is_zero()) {
                Some(col) => tableau.pivot(r, col),
                None => {
                    tableau.rows.remove(r);
                    tableau.rhs.remove(r);
                    tableau.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    // Phase 2: rebuild reduced costs for the real objective over the current
    // basis. Internal slack and artificial columns carry objective zero, and
    // artificials may never re-enter (their reduced costs are cleared).
    let objective_of = |j: usize| -> Rational {
        if j < nvars {
            problem.objective[j].clone()
        } else {
            Rational::zero()
        }
    };
    let mut cost: Vec<Rational> = (0..total).map(objective_of).collect();
    let mut value = Rational::zero();
    for (r, &basic) in tableau.basis.iter().enumerate() {
        let weight = objective_of(basic);
        if weight.is_zero() {
            continue;
        }
        for c in 0..total {
            let delta = &weight * &tableau.rows[r][c];
            cost[c] -= delta;
        }
        value += &weight * &tableau.rhs[r];
    }
    for c in structural..total {
        cost[c] = Rational::zero();
    }
    if let PivotOutcome::Unbounded = tableau.run(&mut cost, &mut value) {
        return LpSolution {
            status: LpStatus::Unbounded,
            values: Vec::new(),
            objective_value: Rational::zero(),
            basis: Vec::new(),
        };
    }

    // Read the solution back, undoing the lower-bound shift.
    let mut values = problem.lower_bounds.clone();
    for (r, &basic) in tableau.basis.iter().enumerate() {
        if basic < nvars {
            values[basic] += &tableau.rhs[r];
        }
    }
    let objective_value = problem
        .objective
        .iter()
        .zip(&values)
        .fold(Rational::zero(), |acc, (c, v)| acc + c * v);
    let mut basis: Vec<usize> = tableau
        .basis
        .iter()
        .copied()
        .filter(|&j| j < nvars)
        .collect();
    basis.sort_unstable();
    LpSolution {
        status: LpStatus::Optimal,
        values,
        objective_value,
        basis,
    }
}
