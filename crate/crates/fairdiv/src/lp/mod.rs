//! Linear programs for fair fractional allocations.
//!
//! Two programs drive the pipeline:
//!
//! * the egalitarian program maximizes an auxiliary variable `z` bounded
//!   above by every agent's utility, yielding the best max-min fractional
//!   allocation and its value;
//! * the improvement program maximizes the total utility subject to
//!   per-agent floors taken from an existing allocation, yielding a weak
//!   Pareto improvement that is fractionally Pareto-optimal. Because the
//!   simplex solver returns an extreme point, its consumption graph is
//!   acyclic once neutral splits are consolidated.
//!
//! There is also the trivial proportional allocation (`1/n` of everything),
//! used as an alternative seed.

mod simplex;

pub use simplex::solve_simplex;

use crate::model::{FractionalAllocation, Instance, UtilitySource};
use crate::rational::{rat, Rational};
use num::{Signed, Zero};

/// Meaning of an LP column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarLabel {
    /// Share of `object` given to `agent`.
    Share { agent: usize, object: usize },
    /// The max-min auxiliary variable.
    MinValue,
    /// Slack or surplus attached to an agent's utility row.
    Slack(usize),
}

/// An equality constraint `coeffs . x = rhs`.
#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

/// A maximization problem in equality form with per-variable bounds.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<Rational>,
    pub rows: Vec<LpRow>,
    pub lower_bounds: Vec<Rational>,
    pub upper_bounds: Vec<Option<Rational>>,
    pub labels: Vec<VarLabel>,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output. `values`, `objective_value` and `basis` are meaningful
/// only when `status` is `Optimal`; an optimal solution is always a basic
/// feasible solution (a vertex of the feasible region).
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<Rational>,
    pub objective_value: Rational,
    pub basis: Vec<usize>,
}

impl LpSolution {
    /// Exact re-substitution check of all constraints and bounds.
    pub fn satisfies(&self, problem: &LpProblem) -> bool {
        if self.status != LpStatus::Optimal {
            return false;
        }
        let feasible_rows = problem.rows.iter().all(|row| {
            let lhs = row
                .coeffs
                .iter()
                .zip(&self.values)
                .fold(Rational::zero(), |acc, (c, v)| acc + c * v);
            lhs == row.rhs
        });
        let within_bounds = self.values.iter().enumerate().all(|(j, v)| {
            v >= &problem.lower_bounds[j]
                && problem.upper_bounds[j].as_ref().is_none_or(|ub| v <= ub)
        });
        feasible_rows && within_bounds
    }
}

/// Column index of the share variable for `(agent, object)` under the fixed
/// row-major ordering.
fn share_column(instance: &Instance, agent: usize, object: usize) -> usize {
    agent * instance.object_count() + object
}

/// Builds the egalitarian max-min program: maximize `z` subject to
/// `z <= sum_o u_io x_io` for every agent and unit column sums. The free
/// variable `z` is modeled with the shifted lower bound
/// `min_i sum_o min(u_io, 0)`, which no allocation's minimum utility can
/// undercut, so the shift never constrains the optimum.
pub fn egalitarian_lp(instance: &Instance) -> LpProblem {
    let n = instance.agent_count();
    let m = instance.object_count();
    let shares = n * m;
    let z_col = shares;
    let nvars = shares + 1 + n;

    let mut labels = Vec::with_capacity(nvars);
    for agent in 0..n {
        for object in 0..m {
            labels.push(VarLabel::Share { agent, object });
        }
    }
    labels.push(VarLabel::MinValue);
    labels.extend((0..n).map(VarLabel::Slack));

    let mut objective = vec![Rational::zero(); nvars];
    objective[z_col] = rat(1);

    let z_floor = (0..n)
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
    let mut lower_bounds = vec![Rational::zero(); nvars];
    lower_bounds[z_col] = z_floor;

    let mut rows = Vec::with_capacity(n + m);
    for i in 0..n {
        // z - sum_o u_io x_io + s_i = 0
        let mut coeffs = vec![Rational::zero(); nvars];
        for o in 0..m {
            coeffs[share_column(instance, i, o)] = -instance.value(i, o);
        }
        coeffs[z_col] = rat(1);
        coeffs[shares + 1 + i] = rat(1);
        rows.push(LpRow {
            coeffs,
            rhs: Rational::zero(),
        });
    }
    for o in 0..m {
        let mut coeffs = vec![Rational::zero(); nvars];
        for i in 0..n {
            coeffs[share_column(instance, i, o)] = rat(1);
        }
        rows.push(LpRow { coeffs, rhs: rat(1) });
    }

    LpProblem {
        objective,
        rows,
        lower_bounds,
        upper_bounds: vec![None; nvars],
        labels,
    }
}

/// Builds the Pareto-improvement program: maximize total utility subject to
/// `sum_o u_io y_io >= floor_i` for every agent and unit column sums.
pub fn improvement_lp(instance: &Instance, floors: &[Rational]) -> LpProblem {
    let n = instance.agent_count();
    let m = instance.object_count();
    assert_eq!(floors.len(), n, "one utility floor per agent");
    let shares = n * m;
    let nvars = shares + n;

    let mut labels = Vec::with_capacity(nvars);
    let mut objective = Vec::with_capacity(nvars);
    for agent in 0..n {
        for object in 0..m {
            labels.push(VarLabel::Share { agent, object });
            objective.push(instance.value(agent, object).clone());
        }
    }
    labels.extend((0..n).map(VarLabel::Slack));
    objective.extend(std::iter::repeat_with(Rational::zero).take(n));

    let mut rows = Vec::with_capacity(n + m);
    for i in 0..n {
        // sum_o u_io y_io - t_i = floor_i
        let mut coeffs = vec![Rational::zero(); nvars];
        for o in 0..m {
            coeffs[share_column(instance, i, o)] = instance.value(i, o).clone();
        }
        coeffs[shares + i] = rat(-1);
        rows.push(LpRow {
            coeffs,
            rhs: floors[i].clone(),
        });
    }
    for o in 0..m {
        let mut coeffs = vec![Rational::zero(); nvars];
        for i in 0..n {
            coeffs[share_column(instance, i, o)] = rat(1);
        }
        rows.push(LpRow { coeffs, rhs: rat(1) });
    }

    LpProblem {
        objective,
        rows,
        lower_bounds: vec![Rational::zero(); nvars],
        upper_bounds: vec![None; nvars],
        labels,
    }
}

fn extract_allocation(instance: &Instance, solution: &LpSolution, labels: &[VarLabel]) -> FractionalAllocation {
    let n = instance.agent_count();
    let m = instance.object_count();
    let mut shares = vec![vec![Rational::zero(); m]; n];
    for (value, label) in solution.values.iter().zip(labels) {
        if let VarLabel::Share { agent, object } = *label {
            shares[agent][object] = value.clone();
        }
    }
    FractionalAllocation::new(shares).expect("LP column constraints force a valid allocation")
}

/// Computes a fractional egalitarian allocation and the egalitarian value
/// `z = max_X min_i u_i(X)`. The program is always feasible and bounded
/// (allocations form a compact polytope).
pub fn egalitarian_fractional(instance: &Instance) -> (FractionalAllocation, Rational) {
    let problem = egalitarian_lp(instance);
    let solution = solve_simplex(&problem);
    assert_eq!(
        solution.status,
        LpStatus::Optimal,
        "egalitarian program is feasible and bounded by construction"
    );
    let allocation = extract_allocation(instance, &solution, &problem.labels);
    (allocation, solution.objective_value)
}

/// Returns a fractionally Pareto-optimal weak improvement of `x`: total
/// utility is maximized subject to every agent keeping at least its utility
/// under `x`. Solved by simplex, so the result is an extreme point.
pub fn pareto_improve(instance: &Instance, x: &FractionalAllocation) -> FractionalAllocation {
    let floors = x.utilities(instance);
    let problem = improvement_lp(instance, &floors);
    let solution = solve_simplex(&problem);
    assert_eq!(
        solution.status,
        LpStatus::Optimal,
        "improvement program is feasible (x solves it) and bounded"
    );
    extract_allocation(instance, &solution, &problem.labels)
}

/// The trivial proportional allocation: every agent gets exactly `1/n` of
/// every object, so each agent's utility is `u_i(O) / n`.
pub fn proportional_fractional(instance: &Instance) -> FractionalAllocation {
    let n = instance.agent_count();
    let m = instance.object_count();
    let share = Rational::new(1.into(), (n as i64).into());
    FractionalAllocation::new(vec![vec![share; m]; n])
        .expect("equal shares sum to one per object")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn problem(
        objective: Vec<Rational>,
        rows: Vec<(Vec<i64>, i64)>,
    ) -> LpProblem {
        let nvars = objective.len();
        LpProblem {
            objective,
            rows: rows
                .into_iter()
                .map(|(coeffs, rhs)| LpRow {
                    coeffs: coeffs.into_iter().map(rat).collect(),
                    rhs: rat(rhs),
                })
                .collect(),
            lower_bounds: vec![Rational::zero(); nvars],
            upper_bounds: vec![None; nvars],
            labels: vec![VarLabel::MinValue; nvars],
        }
    }

    #[test]
    fn maximizes_single_bounded_variable() {
        // maximize x subject to x <= 1 (as x + s = 1)
        let p = problem(vec![rat(1), rat(0)], vec![(vec![1, 1], 1)]);
        let s = solve_simplex(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.values[0], rat(1));
        assert_eq!(s.objective_value, rat(1));
        assert_eq!(s.basis, vec![0]);
        assert!(s.satisfies(&p));
    }

    #[test]
    fn returns_a_vertex_not_a_midpoint() {
        // maximize x + y subject to x + y = 1: every point of the segment is
        // optimal but only the endpoints are vertices.
        let p = problem(vec![rat(1), rat(1)], vec![(vec![1, 1], 1)]);
        let s = solve_simplex(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective_value, rat(1));
        let endpoint = (s.values[0] == rat(1) && s.values[1] == rat(0))
            || (s.values[0] == rat(0) && s.values[1] == rat(1));
        assert!(endpoint, "expected a vertex, got {:?}", s.values);
    }

    #[test]
    fn reports_infeasible_without_panicking() {
        // x >= 1 and x <= 0: encode as x - s1 = 1, x + s2 = 0.
        let p = problem(
            vec![rat(0), rat(0), rat(0)],
            vec![(vec![1, -1, 0], 1), (vec![1, 0, 1], 0)],
        );
        assert_eq!(solve_simplex(&p).status, LpStatus::Infeasible);
    }

    #[test]
    fn reports_unbounded() {
        let p = problem(vec![rat(1)], vec![]);
        assert_eq!(solve_simplex(&p).status, LpStatus::Unbounded);
    }

    #[test]
    fn honors_upper_and_lower_bounds() {
        // maximize x + y with -2 <= x <= 3 and y <= 1/2, no other rows.
        let mut p = problem(vec![rat(1), rat(1)], vec![]);
        p.lower_bounds[0] = rat(-2);
        p.upper_bounds[0] = Some(rat(3));
        p.upper_bounds[1] = Some(ratio(1, 2));
        let s = solve_simplex(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.values, vec![rat(3), ratio(1, 2)]);
        assert_eq!(s.objective_value, ratio(7, 2));
        assert!(s.satisfies(&p));
    }

    #[test]
    fn handles_redundant_rows() {
        let p = problem(
            vec![rat(1), rat(0)],
            vec![(vec![1, 1], 1), (vec![2, 2], 2)],
        );
        let s = solve_simplex(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.values[0], rat(1));
    }

    #[test]
    fn drives_stuck_artificials_out_of_the_basis() {
        // Phase 1 leaves an artificial basic at zero on the second row; it
        // must be pivoted out on a structural column before phase 2.
        let p = problem(
            vec![rat(1), rat(0)],
            vec![(vec![1, 1], 1), (vec![1, -1], 1)],
        );
        let s = solve_simplex(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.values, vec![rat(1), rat(0)]);
        assert!(s.satisfies(&p));
    }

    #[test]
    fn terminates_on_beales_cycling_example() {
        // Classic degenerate program that cycles under the steepest-ascent
        // rule; Bland's rule must terminate at the optimum 1/20.
        let mut p = problem(
            vec![
                ratio(3, 4),
                rat(-150),
                ratio(1, 50),
                rat(-6),
                rat(0),
                rat(0),
                rat(0),
            ],
            vec![],
        );
        let rows = [
            (
                vec![ratio(1, 4), rat(-60), ratio(-1, 25), rat(9), rat(1), rat(0), rat(0)],
                rat(0),
            ),
            (
                vec![ratio(1, 2), rat(-90), ratio(-1, 50), rat(3), rat(0), rat(1), rat(0)],
                rat(0),
            ),
            (
                vec![rat(0), rat(0), rat(1), rat(0), rat(0), rat(0), rat(1)],
                rat(1),
            ),
        ];
        p.rows = rows
            .into_iter()
            .map(|(coeffs, rhs)| LpRow { coeffs, rhs })
            .collect();
        let s = solve_simplex(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective_value, ratio(1, 20));
        assert!(s.satisfies(&p));
    }

    #[test]
    fn egalitarian_on_symmetric_single_good() {
        let instance = Instance::from_integers(vec![vec![1], vec![1]]).unwrap();
        let (x, z) = egalitarian_fractional(&instance);
        assert_eq!(z, ratio(1, 2));
        assert_eq!(x.share(0, 0), &ratio(1, 2));
        assert_eq!(x.share(1, 0), &ratio(1, 2));
    }

    #[test]
    fn egalitarian_on_disjoint_goods() {
        let instance = Instance::from_integers(vec![vec![2, 0], vec![0, 2]]).unwrap();
        let (_, z) = egalitarian_fractional(&instance);
        assert_eq!(z, rat(2));
    }

    #[test]
    fn egalitarian_on_symmetric_single_chore() {
        let instance = Instance::from_integers(vec![vec![-1], vec![-1]]).unwrap();
        let (x, z) = egalitarian_fractional(&instance);
        assert_eq!(z, ratio(-1, 2));
        let utilities = x.utilities(&instance);
        assert!(utilities.iter().all(|u| u >= &z));
    }

    #[test]
    fn egalitarian_with_no_objects() {
        let instance = Instance::from_integers(vec![vec![], vec![]]).unwrap();
        let (x, z) = egalitarian_fractional(&instance);
        assert_eq!(z, rat(0));
        assert_eq!(x.object_count(), 0);
    }

    #[test]
    fn improvement_keeps_all_floors() {
        let instance = Instance::from_integers(vec![vec![1, 2], vec![2, 1]]).unwrap();
        let x = proportional_fractional(&instance);
        let y = pareto_improve(&instance, &x);
        assert!(crate::model::weakly_dominates(&instance, &y, &x));
        // The swap is the unique total-utility maximizer here.
        assert_eq!(y.utility(&instance, 0), rat(2));
        assert_eq!(y.utility(&instance, 1), rat(2));
    }

    #[test]
    fn improvement_on_zero_instance() {
        let instance = Instance::from_integers(vec![vec![0]]).unwrap();
        let x = proportional_fractional(&instance);
        let y = pareto_improve(&instance, &x);
        assert_eq!(y.utility(&instance, 0), rat(0));
    }

    #[test]
    fn improvement_is_idempotent_in_utility_space() {
        let instance =
            Instance::from_integers(vec![vec![3, -1, 2], vec![1, 1, -2], vec![0, 4, 1]]).unwrap();
        let x = proportional_fractional(&instance);
        let y1 = pareto_improve(&instance, &x);
        let y2 = pareto_improve(&instance, &y1);
        assert_eq!(y1.utilities(&instance), y2.utilities(&instance));
    }

    #[test]
    fn proportional_shares_are_uniform() {
        let instance = Instance::from_integers(vec![vec![5, -3, 2]]).unwrap();
        let x = proportional_fractional(&instance);
        assert!(x.shares().iter().flatten().all(|s| s == &rat(1)));

        let instance =
            Instance::from_integers(vec![vec![1, 2], vec![3, 4], vec![5, 6], vec![7, 8]]).unwrap();
        let x = proportional_fractional(&instance);
        assert!(x.shares().iter().flatten().all(|s| s == &ratio(1, 4)));
    }

    #[test]
    fn proportional_utilities_are_total_over_n() {
        let instance = Instance::from_integers(vec![vec![3, -1], vec![1, 1]]).unwrap();
        let x = proportional_fractional(&instance);
        assert_eq!(x.utilities(&instance), vec![rat(1), rat(1)]);
    }

    #[test]
    fn optimal_solutions_satisfy_constraints_exactly() {
        let instance =
            Instance::from_integers(vec![vec![2, -5, 1, 0], vec![-4, 3, 3, -1]]).unwrap();
        let p = egalitarian_lp(&instance);
        let s = solve_simplex(&p);
        assert!(s.satisfies(&p));
        let floors = vec![rat(-10), rat(-10)];
        let p = improvement_lp(&instance, &floors);
        let s = solve_simplex(&p);
        assert!(s.satisfies(&p));
    }
}
