//! Independent verification of fairness and efficiency claims.
//!
//! Nothing here trusts the pipeline: the egalitarian optimum over discrete
//! allocations is recomputed by exhaustive enumeration (for small instances),
//! Pareto optimality is certified through an exact LP whose optimum must
//! coincide with the achieved utility sum, and the up-to-one-object bound is
//! re-checked agent by agent in exact arithmetic.

use crate::lp::{improvement_lp, solve_simplex, LpStatus};
use crate::model::{DiscreteAllocation, FractionalAllocation, Instance, UtilitySource};
use crate::rational::Rational;
use num::Zero;
use std::fmt;

/// Fairness criterion an allocation is audited against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Baseline: a fractional egalitarian (max-min) allocation.
    Egalitarian,
    /// Baseline: the proportional split giving each agent `u_i(O) / n`.
    Proportional,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::Egalitarian => write!(f, "egalitarian"),
            Criterion::Proportional => write!(f, "proportional"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    /// The instance admits more discrete allocations than the enumeration
    /// limit; an inexact oracle would be worthless, so none is offered.
    TooLarge { allocations: u128, limit: u64 },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooLarge { allocations, limit } => write!(
                f,
                "instance has {allocations} discrete allocations, above the enumeration limit {limit}"
            ),
        }
    }
}

impl std::error::Error for OracleError {}

/// Exhaustively enumerates all `n^m` discrete allocations and returns one
/// maximizing the minimum utility, together with that value. Ties are broken
/// toward the lexicographically smallest owner vector.
pub fn brute_force_egalitarian(
    instance: &Instance,
    limit: u64,
) -> Result<(DiscreteAllocation, Rational), OracleError> {
    let n = instance.agent_count();
    let m = instance.object_count();
    let allocations = (n as u128)
        .checked_pow(m as u32)
        .filter(|&count| count <= limit as u128)
        .ok_or(OracleError::TooLarge {
            allocations: (n as u128).saturating_pow(m as u32),
            limit,
        })?;
    let _ = allocations;

    let mut owners = vec![0usize; m];
    let mut utilities: Vec<Rational> = (0..n)
        .map(|i| {
            (0..m).fold(Rational::zero(), |acc, o| {
                if owners[o] == i {
                    acc + instance.value(i, o)
                } else {
                    acc
                }
            })
        })
        .collect();
    let mut best_owners = owners.clone();
    let mut best_value = utilities.iter().min().cloned().unwrap_or_else(Rational::zero);

    // Odometer over owner vectors in lexicographic order; strict improvement
    // keeps the lexicographically smallest maximizer.
    loop {
        // Advance to the next owner vector, updating utilities in place.
        let mut position = m;
        while position > 0 {
            let o = position - 1;
            let current = owners[o];
            utilities[current] -= instance.value(current, o);
            if current + 1 < n {
                owners[o] = current + 1;
                utilities[current + 1] += instance.value(current + 1, o);
                break;
            }
            owners[o] = 0;
            utilities[0] += instance.value(0, o);
            position -= 1;
        }
        if position == 0 {
            break;
        }
        let minimum = utilities.iter().min().cloned().unwrap_or_else(Rational::zero);
        if minimum > best_value {
            best_value = minimum;
            best_owners = owners.clone();
        }
    }

    let allocation =
        DiscreteAllocation::new(best_owners, n).expect("enumerated owners are in range");
    Ok((allocation, best_value))
}

/// Exact Pareto-optimality certificate: an allocation is fractionally
/// Pareto-optimal if and only if the total-utility improvement program
/// floored at its own utilities cannot exceed its utility sum.
pub fn certify_fpo<A: UtilitySource>(instance: &Instance, allocation: &A) -> bool {
    let floors = allocation.utilities(instance);
    let achieved: Rational = floors.iter().fold(Rational::zero(), |acc, u| acc + u);
    let problem = improvement_lp(instance, &floors);
    let solution = solve_simplex(&problem);
    assert_eq!(
        solution.status,
        LpStatus::Optimal,
        "the improvement program is feasible and bounded"
    );
    solution.objective_value == achieved
}

/// Per-agent audit row. `deficit` is `baseline - achieved` (negative when
/// the agent ended above its baseline); the up-to-one-object check holds
/// exactly when `achieved >= baseline - max_abs_object`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentAudit {
    pub baseline: Rational,
    pub achieved: Rational,
    pub deficit: Rational,
    pub max_abs_object: Rational,
    pub up_to_one_satisfied: bool,
}

/// Machine-checkable summary of one solver run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FairnessReport {
    pub mode: Criterion,
    pub agents: Vec<AgentAudit>,
    /// Egalitarian LP value; present in egalitarian mode.
    pub egalitarian_value: Option<Rational>,
    /// Discrete brute-force optimum, when it was computed.
    pub brute_force_value: Option<Rational>,
    pub fpo_certified: bool,
}

impl FairnessReport {
    pub fn all_up_to_one(&self) -> bool {
        self.agents.iter().all(|a| a.up_to_one_satisfied)
    }

    /// Both run certificates: Pareto optimality and the per-agent
    /// up-to-one-object bound.
    pub fn certificates_pass(&self) -> bool {
        self.fpo_certified && self.all_up_to_one()
    }
}

/// Audits a discrete allocation against its fractional baseline: in
/// egalitarian mode the baseline is the fractional egalitarian allocation,
/// in proportional mode the proportional split (whose utilities are
/// `u_i(O) / n`). All fields are computed exactly; the Pareto certificate is
/// an LP solve.
pub fn audit(
    instance: &Instance,
    baseline: &FractionalAllocation,
    allocation: &DiscreteAllocation,
    mode: Criterion,
) -> FairnessReport {
    let baselines = baseline.utilities(instance);
    let achieved = allocation.utilities(instance);
    let agents = (0..instance.agent_count())
        .map(|i| {
            let max_abs_object = instance.max_abs_value(i);
            let floor = &baselines[i] - &max_abs_object;
            AgentAudit {
                baseline: baselines[i].clone(),
                achieved: achieved[i].clone(),
                deficit: &baselines[i] - &achieved[i],
                up_to_one_satisfied: achieved[i] >= floor,
                max_abs_object,
            }
        })
        .collect();
    FairnessReport {
        mode,
        agents,
        egalitarian_value: None,
        brute_force_value: None,
        fpo_certified: certify_fpo(instance, allocation),
    }
}
