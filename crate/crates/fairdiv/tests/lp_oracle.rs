//! Independent cross-checks of the LP layer.
//!
//! The oracle here shares no code with the simplex solver: it enumerates
//! every basis of the standardized constraint system, solves each square
//! system by Gaussian elimination over exact rationals, filters the feasible
//! ones, and takes the best objective. On tiny instances this visits every
//! vertex of the feasible polytope, so agreement pins down the solver's
//! optimum exactly.

use fairdiv::generate::{generate_instance, InstanceKind};
use fairdiv::lp::{egalitarian_fractional, pareto_improve, proportional_fractional};
use fairdiv::model::{Instance, UtilitySource};
use fairdiv::rational::{rat, Rational};
use itertools::Itertools;
use num::{Signed, Zero};

/// Solves `matrix * x = rhs` exactly; `None` when singular.
fn solve_square(mut matrix: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let size = matrix.len();
    for col in 0..size {
        let pivot = (col..size).find(|&r| !matrix[r][col].is_zero())?;
        matrix.swap(col, pivot);
        rhs.swap(col, pivot);
        let divisor = matrix[col][col].clone();
        for entry in matrix[col].iter_mut() {
            *entry /= &divisor;
        }
        rhs[col] /= &divisor;
        for row in 0..size {
            if row == col || matrix[row][col].is_zero() {
                continue;
            }
            let factor = matrix[row][col].clone();
            for c in 0..size {
                let delta = &factor * &matrix[col][c];
                matrix[row][c] -= delta;
            }
            let delta = &factor * &rhs[col];
            rhs[row] -= delta;
        }
    }
    Some(rhs)
}

/// A standardized equality system `A x = b`, `x >= 0`, maximize `c x + c0`.
struct StandardForm {
    columns: usize,
    matrix: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    objective: Vec<Rational>,
    objective_shift: Rational,
}

impl StandardForm {
    /// Best objective over all basic feasible solutions, found by exhaustive
    /// basis enumeration.
    fn best_vertex_value(&self) -> Option<Rational> {
        let rows = self.matrix.len();
        let mut best: Option<Rational> = None;
        for basis in (0..self.columns).combinations(rows) {
            let square: Vec<Vec<Rational>> = (0..rows)
                .map(|r| basis.iter().map(|&j| self.matrix[r][j].clone()).collect())
                .collect();
            let Some(solution) = solve_square(square, self.rhs.clone()) else {
                continue;
            };
            if solution.iter().any(|v| v.is_negative()) {
                continue;
            }
            let value = basis
                .iter()
                .zip(&solution)
                .fold(self.objective_shift.clone(), |acc, (&j, v)| {
                    acc + &self.objective[j] * v
                });
            if best.as_ref().is_none_or(|b| &value > b) {
                best = Some(value);
            }
        }
        best
    }
}

/// The egalitarian max-min program in standard form, built directly from
/// the instance: columns are the shares (row-major), the shifted max-min
/// variable, and one slack per agent.
fn egalitarian_standard_form(instance: &Instance) -> StandardForm {
    let n = instance.agent_count();
    let m = instance.object_count();
    let columns = n * m + 1 + n;
    let z_col = n * m;

    // min_i sum_o min(u_io, 0) is a floor no allocation's minimum utility
    // can undercut; shifting by it keeps the variable non-negative.
    let shift = (0..n)
        .map(|i| {
            (0..m).fold(Rational::zero(), |acc, o| {
                let v = instance.value(i, o);
                if v.is_negative() {
                    acc + v
                } else {
                    acc
                }
            })
        })
        .min()
        .unwrap_or_else(Rational::zero);

    let mut matrix = Vec::with_capacity(n + m);
    let mut rhs = Vec::with_capacity(n + m);
    for i in 0..n {
        // (shift + z') - sum_o u_io x_io + s_i = 0
        let mut row = vec![Rational::zero(); columns];
        for o in 0..m {
            row[i * m + o] = -instance.value(i, o);
        }
        row[z_col] = rat(1);
        row[z_col + 1 + i] = rat(1);
        matrix.push(row);
        rhs.push(-shift.clone());
    }
    for o in 0..m {
        let mut row = vec![Rational::zero(); columns];
        for i in 0..n {
            row[i * m + o] = rat(1);
        }
        matrix.push(row);
        rhs.push(rat(1));
    }

    let mut objective = vec![Rational::zero(); columns];
    objective[z_col] = rat(1);
    StandardForm {
        columns,
        matrix,
        rhs,
        objective,
        objective_shift: shift,
    }
}

/// The total-utility improvement program in standard form: shares plus one
/// surplus variable per agent floor.
fn improvement_standard_form(instance: &Instance, floors: &[Rational]) -> StandardForm {
    let n = instance.agent_count();
    let m = instance.object_count();
    let columns = n * m + n;

    let mut matrix = Vec::with_capacity(n + m);
    let mut rhs = Vec::with_capacity(n + m);
    for i in 0..n {
        let mut row = vec![Rational::zero(); columns];
        for o in 0..m {
            row[i * m + o] = instance.value(i, o).clone();
        }
        row[n * m + i] = rat(-1);
        matrix.push(row);
        rhs.push(floors[i].clone());
    }
    for o in 0..m {
        let mut row = vec![Rational::zero(); columns];
        for i in 0..n {
            row[i * m + o] = rat(1);
        }
        matrix.push(row);
        rhs.push(rat(1));
    }

    let mut objective = vec![Rational::zero(); columns];
    for i in 0..n {
        for o in 0..m {
            objective[i * m + o] = instance.value(i, o).clone();
        }
    }
    StandardForm {
        columns,
        matrix,
        rhs,
        objective,
        objective_shift: Rational::zero(),
    }
}

fn check_against_oracle(instance: &Instance) {
    let (allocation, z) = egalitarian_fractional(instance);
    let oracle = egalitarian_standard_form(instance)
        .best_vertex_value()
        .expect("the egalitarian program is feasible");
    assert_eq!(z, oracle, "solver and vertex enumeration disagree");
    // The optimum is attained: the worst-off agent sits exactly at z.
    let minimum = allocation.utilities(instance).into_iter().min().unwrap();
    assert_eq!(minimum, z);
}

#[test]
fn egalitarian_value_matches_vertex_enumeration_on_small_instances() {
    let cases = [
        (InstanceKind::Mixed, 2, 3),
        (InstanceKind::Mixed, 3, 3),
        (InstanceKind::Goods, 3, 3),
        (InstanceKind::Chores, 2, 4),
        (InstanceKind::Mixed, 2, 4),
        (InstanceKind::Mixed, 3, 4),
    ];
    for (case, (kind, n, m)) in cases.iter().enumerate() {
        for seed in 0..4 {
            let instance =
                generate_instance(*kind, *n, *m, (-5, 5), 1000 * case as u64 + seed).unwrap();
            check_against_oracle(&instance);
        }
    }
}

#[test]
fn egalitarian_value_matches_vertex_enumeration_on_three_by_five() {
    let instance = generate_instance(InstanceKind::Mixed, 3, 5, (-5, 5), 42).unwrap();
    check_against_oracle(&instance);
}

#[test]
fn improvement_swap_is_the_unique_vertex_optimum() {
    let instance = Instance::from_integers(vec![vec![1, 2], vec![2, 1]]).unwrap();
    let x = proportional_fractional(&instance);
    let floors = x.utilities(&instance);
    let oracle = improvement_standard_form(&instance, &floors)
        .best_vertex_value()
        .expect("the improvement program is feasible");
    assert_eq!(oracle, rat(4));

    let improved = pareto_improve(&instance, &x);
    assert_eq!(improved.utilities(&instance), vec![rat(2), rat(2)]);
    assert_eq!(improved.share(0, 1), &rat(1));
    assert_eq!(improved.share(1, 0), &rat(1));
}

#[test]
fn improvement_optimum_matches_enumeration_on_random_instances() {
    for seed in 0..6 {
        let instance = generate_instance(InstanceKind::Mixed, 2, 3, (-5, 5), 7000 + seed).unwrap();
        let x = proportional_fractional(&instance);
        let floors = x.utilities(&instance);
        let oracle = improvement_standard_form(&instance, &floors)
            .best_vertex_value()
            .expect("feasible");
        let improved = pareto_improve(&instance, &x);
        let total = improved
            .utilities(&instance)
            .into_iter()
            .fold(Rational::zero(), |acc, u| acc + u);
        assert_eq!(total, oracle);
    }
}
