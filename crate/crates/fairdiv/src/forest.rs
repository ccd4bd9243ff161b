//! Making the consumption graph acyclic without harming any agent.
//!
//! Two mechanisms combine here. First, "easy" edges are dropped: whenever an
//! object is split between an agent valuing it `<= 0` and one valuing it
//! `>= 0`, the whole holding moves to the non-negative valuer at no cost to
//! either. Afterwards every split object is strictly a good for all of its
//! holders or strictly a chore for all of them.
//!
//! Second, cycles are cancelled by trading utility around them. Moving a
//! fraction of a shared object between two same-sign holders helps one and
//! hurts the other at a fixed exchange rate, so utility can be pushed around
//! a cycle, compensating every intermediate agent exactly. The product of
//! the rates around the cycle (the gain ratio `r`) decides the profitable
//! direction for the one uncompensated agent; the transfer size is the
//! largest value that keeps all shares non-negative, which drives at least
//! one share to exactly zero and removes an edge. Repeating terminates
//! within the initial edge count and leaves a forest.

use crate::model::{
    build_consumption_graph, Cycle, FractionalAllocation, Instance, UtilitySource,
};
use crate::rational::Rational;
use num::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanError {
    /// A cycle edge carries a zero valuation; transfer rates are undefined.
    /// Cannot occur once easy edges have been removed.
    ZeroValuation { agent: usize, object: usize },
    /// A cycle object is shared by agents disagreeing on its sign.
    MixedSignObject { object: usize },
    /// The cycle references a share that is already zero.
    MissingEdge { agent: usize, object: usize },
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::ZeroValuation { agent, object } => {
                write!(f, "agent {agent} values cycle object {object} at zero")
            }
            PlanError::MixedSignObject { object } => {
                write!(f, "cycle object {object} is split between opposite-sign valuers")
            }
            PlanError::MissingEdge { agent, object } => {
                write!(f, "agent {agent} holds no share of cycle object {object}")
            }
        }
    }
}

impl std::error::Error for PlanError {}

/// One easy-edge consolidation: `amount` of `object` moved from `giver`
/// (valuing it `<= 0`) to `receiver` (valuing it `>= 0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EasyMove {
    pub object: usize,
    pub giver: usize,
    pub receiver: usize,
    pub amount: Rational,
}

/// Direction in which a cycle transfer is executed, relative to the cycle as
/// given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferDirection {
    Forward,
    Reversed,
}

/// A fully computed cycle trade: applying `deltas` keeps every share within
/// `[0, 1]` and every column sum at one, leaves every non-pivot cycle agent's
/// utility exactly unchanged, changes the pivot (the cycle's first agent) by
/// `pivot_gain() >= 0`, and drives at least one share to exactly zero.
#[derive(Debug, Clone)]
pub struct CycleTransferPlan {
    /// The cycle the plan was computed for, as found.
    pub cycle: Cycle,
    pub direction: TransferDirection,
    /// Gain ratio of the forward traversal: the product over hops of
    /// `|u(giver, object)| / |u(receiver, object)|`.
    pub gain_ratio: Rational,
    /// Utility injected into the pivot's incoming hop of the executed
    /// traversal.
    pub transfer_amount: Rational,
    /// Signed share changes `(agent, object, delta)`.
    pub deltas: Vec<(usize, usize, Rational)>,
}

impl CycleTransferPlan {
    /// Exact utility gained by the pivot agent (zero when the gain ratio is
    /// one).
    pub fn pivot_gain(&self) -> Rational {
        let executed_ratio = match self.direction {
            TransferDirection::Forward => self.gain_ratio.clone(),
            TransferDirection::Reversed => Rational::one() / &self.gain_ratio,
        };
        &self.transfer_amount * (Rational::one() - executed_ratio)
    }

    pub fn pivot_agent(&self) -> usize {
        self.cycle.agents[0]
    }
}

/// Step-by-step record of a forest transformation, for invariant
/// instrumentation.
#[derive(Debug, Clone)]
pub struct ForestTrace {
    pub initial_edge_count: usize,
    pub easy_moves: Vec<EasyMove>,
    /// Per cycle-removal iteration: the executed plan and the utilities of
    /// every agent immediately after applying it.
    pub cycle_steps: Vec<(CycleTransferPlan, Vec<Rational>)>,
}

impl ForestTrace {
    pub fn iterations(&self) -> usize {
        self.cycle_steps.len()
    }
}

/// Moves the holdings of every agent valuing a split object `<= 0` to a
/// co-holder valuing it `>= 0`, object by object, until no such pair exists.
/// Neither side loses utility and no new edge appears. Afterwards every
/// split object is strictly same-signed across its holders.
///
/// Deterministic order: objects are scanned by index; within an object the
/// receiver is the lowest-index holder with a strictly positive value (or,
/// failing that, with a zero value), and the giver is the lowest-index
/// non-positive-valuing holder other than the receiver.
pub fn remove_easy_edges(instance: &Instance, y: &FractionalAllocation) -> FractionalAllocation {
    remove_easy_edges_traced(instance, y).0
}

/// As [`remove_easy_edges`], also returning the individual moves.
pub fn remove_easy_edges_traced(
    instance: &Instance,
    y: &FractionalAllocation,
) -> (FractionalAllocation, Vec<EasyMove>) {
    let n = instance.agent_count();
    let m = instance.object_count();
    let mut shares: Vec<Vec<Rational>> = y.shares().to_vec();
    let mut moves = Vec::new();
    for object in 0..m {
        loop {
            let holders: Vec<usize> =
                (0..n).filter(|&i| !shares[i][object].is_zero()).collect();
            if holders.len() < 2 {
                break;
            }
            let receiver = holders
                .iter()
                .copied()
                .find(|&i| instance.value(i, object).is_positive())
                .or_else(|| {
                    holders
                        .iter()
                        .copied()
                        .find(|&i| instance.value(i, object).is_zero())
                });
            let Some(receiver) = receiver else { break };
            let giver = holders
                .iter()
                .copied()
                .find(|&i| i != receiver && !instance.value(i, object).is_positive());
            let Some(giver) = giver else { break };
            let amount = shares[giver][object].clone();
            shares[giver][object] = Rational::zero();
            shares[receiver][object] += &amount;
            moves.push(EasyMove {
                object,
                giver,
                receiver,
                amount,
            });
        }
    }
    let result = FractionalAllocation::new(shares)
        .expect("moving whole holdings preserves column sums and bounds");
    (result, moves)
}

/// Finds a simple cycle of the consumption graph, or `None` if the graph is
/// a forest. Built on breadth-first search so short cycles are preferred:
/// among the fundamental cycles of all non-tree edges, a shortest one is
/// returned. The result is canonical: its first agent is the lowest-index
/// agent on the cycle and its first object is the smaller of that agent's
/// two cycle neighbors.
pub fn find_cycle(graph: &crate::model::ConsumptionGraph) -> Option<Cycle> {
    let n = graph.agent_count();
    let m = graph.object_count();
    // Vertices: agents are 0..n, objects are n..n+m.
    let vertex_count = n + m;
    let neighbors = |v: usize| -> Vec<usize> {
        if v < n {
            graph.objects_of(v).iter().map(|&o| n + o).collect()
        } else {
            graph.holders_of(v - n).iter().copied().collect()
        }
    };

    let mut parent: Vec<Option<usize>> = vec![None; vertex_count];
    let mut depth: Vec<usize> = vec![0; vertex_count];
    let mut visited = vec![false; vertex_count];
    let mut best: Option<Vec<usize>> = None;

    for root in 0..vertex_count {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for w in neighbors(v) {
                if Some(w) == parent[v] {
                    continue;
                }
                if !visited[w] {
                    visited[w] = true;
                    parent[w] = Some(v);
                    depth[w] = depth[v] + 1;
                    queue.push_back(w);
                } else {
                    // Non-tree edge: walk both endpoints up to their common
                    // ancestor to extract the fundamental cycle.
                    let candidate = fundamental_cycle(&parent, &depth, v, w);
                    if best.as_ref().is_none_or(|b| candidate.len() < b.len()) {
                        best = Some(candidate);
                    }
                }
            }
        }
    }

    best.map(|vertices| canonical_cycle(&vertices, n))
}

fn fundamental_cycle(
    parent: &[Option<usize>],
    depth: &[usize],
    v: usize,
    w: usize,
) -> Vec<usize> {
    let (mut a, mut b) = (v, w);
    let mut path_a = vec![a];
    let mut path_b = vec![b];
    while depth[a] > depth[b] {
        a = parent[a].unwrap();
        path_a.push(a);
    }
    while depth[b] > depth[a] {
        b = parent[b].unwrap();
        path_b.push(b);
    }
    while a != b {
        a = parent[a].unwrap();
        b = parent[b].unwrap();
        path_a.push(a);
        path_b.push(b);
    }
    // path_a ends at the common ancestor; path_b's copy of it is dropped.
    path_b.pop();
    path_b.reverse();
    path_a.extend(path_b);
    path_a
}

/// Rotates and orients a cycle vertex sequence into the canonical
/// agent-first form.
fn canonical_cycle(vertices: &[usize], agent_count: usize) -> Cycle {
    let len = vertices.len();
    debug_assert!(len >= 4 && len % 2 == 0);
    let start = (0..len)
        .filter(|&i| vertices[i] < agent_count)
        .min_by_key(|&i| vertices[i])
        .expect("a cycle alternates agents and objects");
    let forward_object = vertices[(start + 1) % len] - agent_count;
    let backward_object = vertices[(start + len - 1) % len] - agent_count;
    let step_forward = forward_object <= backward_object;

    let mut agents = Vec::with_capacity(len / 2);
    let mut objects = Vec::with_capacity(len / 2);
    for i in 0..len {
        let idx = if step_forward {
            (start + i) % len
        } else {
            (start + len - i) % len
        };
        if i % 2 == 0 {
            agents.push(vertices[idx]);
        } else {
            objects.push(vertices[idx] - agent_count);
        }
    }
    Cycle { agents, objects }
}

/// Computes the transfer that cancels `cycle` in `y`: the gain ratio of the
/// forward traversal, the direction that cannot hurt the pivot, the largest
/// feasible transfer amount, and the resulting share deltas. At least one
/// transfer bound is tight, so at least one cycle edge disappears.
pub fn plan_cycle_removal(
    instance: &Instance,
    y: &FractionalAllocation,
    cycle: &Cycle,
) -> Result<CycleTransferPlan, PlanError> {
    let k = cycle.len();
    assert!(k >= 2, "a consumption-graph cycle has at least two agents");

    // Validate edges: every cycle share positive, every valuation nonzero,
    // and both holders of each cycle object agreeing on its sign.
    for j in 0..k {
        let object = cycle.objects[j];
        let lower = cycle.agents[j];
        let upper = cycle.agents[(j + 1) % k];
        for agent in [lower, upper] {
            if y.share(agent, object).is_zero() {
                return Err(PlanError::MissingEdge { agent, object });
            }
            if instance.value(agent, object).is_zero() {
                return Err(PlanError::ZeroValuation { agent, object });
            }
        }
        if instance.value(lower, object).is_positive()
            != instance.value(upper, object).is_positive()
        {
            return Err(PlanError::MixedSignObject { object });
        }
    }

    let forward_ratio = gain_ratio(instance, cycle);
    let (direction, executed) = if forward_ratio <= Rational::one() {
        (TransferDirection::Forward, cycle.clone())
    } else {
        (TransferDirection::Reversed, cycle.reversed())
    };

    // Hops of the executed traversal, in execution order. Hop j moves
    // utility from agents[j] to agents[j+1] through objects[j]; the pivot's
    // incoming hop (j = k-1, giver agents[k-1] wrapping to receiver
    // agents[0]) runs first, and each later hop compensates the previous
    // giver. The utility through hop j is `scale_j` times the injected
    // amount.
    let mut hops: Vec<(usize, usize, usize, Rational)> = Vec::with_capacity(k);
    let mut scale = Rational::one();
    for step in 0..k {
        let j = k - 1 - step;
        let giver = executed.agents[j];
        let receiver = executed.agents[(j + 1) % k];
        let object = executed.objects[j];
        hops.push((giver, receiver, object, scale.clone()));
        // The next hop must repay this giver's loss.
        let rate = (instance.value(giver, object) / instance.value(receiver, object)).abs();
        scale *= rate;
    }

    // Transfer bound per hop: the moved share is `amount * scale /
    // |u(receiver, object)|`, capped by the loser's current share (the giver
    // side for goods, the receiver side for chores).
    let mut amount: Option<Rational> = None;
    for (giver, receiver, object, scale) in &hops {
        let receiver_value = instance.value(*receiver, *object);
        let capped_holder = if receiver_value.is_positive() { giver } else { receiver };
        let bound = y.share(*capped_holder, *object) * receiver_value.abs() / scale;
        if amount.as_ref().is_none_or(|a| &bound < a) {
            amount = Some(bound);
        }
    }
    let amount = amount.expect("a cycle has at least two hops");

    let mut deltas = Vec::with_capacity(2 * k);
    for (giver, receiver, object, scale) in &hops {
        let receiver_value = instance.value(*receiver, *object);
        let moved = &amount * scale / receiver_value.abs();
        if receiver_value.is_positive() {
            deltas.push((*giver, *object, -moved.clone()));
            deltas.push((*receiver, *object, moved));
        } else {
            // A chore moves toward the giver of utility.
            deltas.push((*receiver, *object, -moved.clone()));
            deltas.push((*giver, *object, moved));
        }
    }

    Ok(CycleTransferPlan {
        cycle: cycle.clone(),
        direction,
        gain_ratio: forward_ratio,
        transfer_amount: amount,
        deltas,
    })
}

/// The product over hops of `|u(giver, object)| / |u(receiver, object)|` for
/// the forward traversal of `cycle`.
fn gain_ratio(instance: &Instance, cycle: &Cycle) -> Rational {
    let k = cycle.len();
    let mut ratio = Rational::one();
    for j in 0..k {
        let giver = cycle.agents[j];
        let receiver = cycle.agents[(j + 1) % k];
        let object = cycle.objects[j];
        ratio *= (instance.value(giver, object) / instance.value(receiver, object)).abs();
    }
    ratio
}

/// Applies a plan computed against `y`. The result weakly Pareto-dominates
/// `y`, every non-pivot cycle agent keeps exactly its utility, and at least
/// one cycle edge is gone.
pub fn apply_plan(y: &FractionalAllocation, plan: &CycleTransferPlan) -> FractionalAllocation {
    let mut shares = y.shares().to_vec();
    for (agent, object, delta) in &plan.deltas {
        shares[*agent][*object] += delta;
    }
    let result = FractionalAllocation::new(shares)
        .expect("cycle transfers preserve column sums and keep shares in [0, 1]");
    let removed_an_edge = plan.deltas.iter().any(|(agent, object, _)| {
        result.share(*agent, *object).is_zero() && !y.share(*agent, *object).is_zero()
    });
    assert!(removed_an_edge, "a tight transfer bound must zero some share");
    result
}

/// Transforms `x` into an allocation whose consumption graph is acyclic,
/// weakly Pareto-dominating `x`: easy edges first, then one cycle cancelled
/// per iteration until none remain. The iteration count never exceeds the
/// initial edge count. If `x` is fractionally Pareto-optimal, so is the
/// result.
pub fn to_forest(instance: &Instance, x: &FractionalAllocation) -> FractionalAllocation {
    to_forest_traced(instance, x).0
}

/// As [`to_forest`], also returning the per-step trace.
pub fn to_forest_traced(
    instance: &Instance,
    x: &FractionalAllocation,
) -> (FractionalAllocation, ForestTrace) {
    let initial_edge_count = build_consumption_graph(x).edge_count();
    let (mut current, easy_moves) = remove_easy_edges_traced(instance, x);
    let mut cycle_steps = Vec::new();
    loop {
        let graph = build_consumption_graph(&current);
        let Some(cycle) = find_cycle(&graph) else {
            break;
        };
        let plan = plan_cycle_removal(instance, &current, &cycle)
            .expect("easy-edge removal establishes the cycle preconditions");
        current = apply_plan(&current, &plan);
        cycle_steps.push((plan, current.utilities(instance)));
        assert!(
            cycle_steps.len() <= initial_edge_count,
            "cycle cancellation must delete an edge per iteration"
        );
    }
    (
        current,
        ForestTrace {
            initial_edge_count,
            easy_moves,
            cycle_steps,
        },
    )
}

/// True when every split object is valued strictly positively by all of its
/// holders or strictly negatively by all of them.
pub fn split_objects_same_signed(instance: &Instance, y: &FractionalAllocation) -> bool {
    let graph = build_consumption_graph(y);
    (0..instance.object_count()).all(|o| {
        let holders: BTreeSet<usize> = graph.holders_of(o).clone();
        holders.len() < 2 || {
            let all_positive = holders.iter().all(|&i| instance.value(i, o).is_positive());
            let all_negative = holders.iter().all(|&i| instance.value(i, o).is_negative());
            all_positive || all_negative
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::weakly_dominates;
    use crate::rational::{rat, ratio};

    fn alloc(rows: Vec<Vec<Rational>>) -> FractionalAllocation {
        FractionalAllocation::new(rows).unwrap()
    }

    fn half() -> Rational {
        ratio(1, 2)
    }

    #[test]
    fn easy_edge_moves_to_positive_valuer() {
        let instance = Instance::from_integers(vec![vec![-1], vec![1]]).unwrap();
        let y = alloc(vec![vec![half()], vec![half()]]);
        let (result, moves) = remove_easy_edges_traced(&instance, &y);
        assert_eq!(result.share(0, 0), &rat(0));
        assert_eq!(result.share(1, 0), &rat(1));
        assert_eq!(result.utilities(&instance), vec![rat(0), rat(1)]);
        assert_eq!(
            moves,
            vec![EasyMove {
                object: 0,
                giver: 0,
                receiver: 1,
                amount: half(),
            }]
        );
    }

    #[test]
    fn neutral_split_consolidates_to_lowest_index() {
        let instance = Instance::from_integers(vec![vec![0], vec![0]]).unwrap();
        let y = alloc(vec![vec![half()], vec![half()]]);
        let result = remove_easy_edges(&instance, &y);
        assert_eq!(result.share(0, 0), &rat(1));
        assert_eq!(result.utilities(&instance), vec![rat(0), rat(0)]);
    }

    #[test]
    fn all_positive_split_is_untouched() {
        let instance = Instance::from_integers(vec![vec![2, 1], vec![1, 2]]).unwrap();
        let y = alloc(vec![
            vec![half(), half()],
            vec![half(), half()],
        ]);
        let result = remove_easy_edges(&instance, &y);
        assert_eq!(&result, &y);
    }

    #[test]
    fn mixed_negative_and_neutral_goes_to_the_neutral() {
        let instance = Instance::from_integers(vec![vec![0], vec![-2]]).unwrap();
        let y = alloc(vec![vec![half()], vec![half()]]);
        let result = remove_easy_edges(&instance, &y);
        assert_eq!(result.share(0, 0), &rat(1));
        assert!(split_objects_same_signed(&instance, &result));
        assert!(weakly_dominates(&instance, &result, &y));
    }

    #[test]
    fn forest_has_no_cycle() {
        let z = crate::model::DiscreteAllocation::new(vec![0, 1, 1], 2).unwrap();
        let graph = build_consumption_graph(&z.to_fractional(2));
        assert!(find_cycle(&graph).is_none());
    }

    #[test]
    fn four_cycle_is_found() {
        let y = alloc(vec![
            vec![half(), half()],
            vec![half(), half()],
        ]);
        let graph = build_consumption_graph(&y);
        let cycle = find_cycle(&graph).expect("two agents sharing two objects form a cycle");
        assert!(cycle.is_valid_in(&graph));
        assert_eq!(cycle.len(), 2);
        assert_eq!(cycle.agents, vec![0, 1]);
        assert_eq!(cycle.objects[0], 0);
    }

    #[test]
    fn shortest_cycle_is_preferred() {
        // A 4-cycle (a0, o0, a1, o1) and an edge-disjoint 6-cycle
        // (a2, o2, a3, o3, a4, o4) in separate components.
        let q = ratio(1, 2);
        let z = Rational::zero();
        let shares = vec![
            vec![q.clone(), q.clone(), z.clone(), z.clone(), z.clone()],
            vec![q.clone(), q.clone(), z.clone(), z.clone(), z.clone()],
            vec![z.clone(), z.clone(), q.clone(), z.clone(), q.clone()],
            vec![z.clone(), z.clone(), q.clone(), q.clone(), z.clone()],
            vec![z.clone(), z.clone(), z.clone(), q.clone(), q.clone()],
        ];
        let graph = build_consumption_graph(&alloc(shares));
        let cycle = find_cycle(&graph).unwrap();
        assert_eq!(cycle.len(), 2, "the 4-cycle is shorter");
        assert_eq!(cycle.agents, vec![0, 1]);

        // Same two cycles sharing agent a0.
        let shares = vec![
            vec![q.clone(), q.clone(), q.clone(), z.clone(), q.clone()],
            vec![q.clone(), q.clone(), z.clone(), z.clone(), z.clone()],
            vec![z.clone(), z.clone(), q.clone(), q.clone(), z.clone()],
            vec![z.clone(), z.clone(), z.clone(), q.clone(), q.clone()],
        ];
        let graph = build_consumption_graph(&alloc(shares));
        let cycle = find_cycle(&graph).unwrap();
        assert_eq!(cycle.len(), 2);
    }

    /// Three agents and three goods arranged in a 6-cycle with a gain ratio
    /// of exactly one.
    fn balanced_three_cycle() -> (Instance, FractionalAllocation) {
        // u(a,1)=1, u(b,1)=2, u(b,2)=1, u(c,2)=1, u(c,3)=2, u(a,3)=1; other
        // values keep the cycle intact but are never on a cycle edge.
        let instance = Instance::from_integers(vec![
            vec![1, -7, 1],
            vec![2, 1, -7],
            vec![-7, 1, 2],
        ])
        .unwrap();
        let y = alloc(vec![
            vec![half(), rat(0), half()],
            vec![half(), half(), rat(0)],
            vec![rat(0), half(), half()],
        ]);
        (instance, y)
    }

    #[test]
    fn balanced_cycle_has_unit_ratio_and_preserves_utilities() {
        let (instance, y) = balanced_three_cycle();
        let graph = build_consumption_graph(&y);
        let cycle = find_cycle(&graph).unwrap();
        assert_eq!(cycle.len(), 3);
        let plan = plan_cycle_removal(&instance, &y, &cycle).unwrap();
        assert_eq!(plan.gain_ratio, rat(1));
        assert_eq!(plan.direction, TransferDirection::Forward);
        assert_eq!(plan.pivot_gain(), rat(0));

        let before = y.utilities(&instance);
        let after_alloc = apply_plan(&y, &plan);
        assert_eq!(after_alloc.utilities(&instance), before);
        let edges_before = graph.edge_count();
        let edges_after = build_consumption_graph(&after_alloc).edge_count();
        assert!(edges_after < edges_before);
    }

    #[test]
    fn unbalanced_cycle_reverses_and_pivot_gains() {
        // Same cycle with u(b,1) dropped to 1: the forward ratio becomes 2,
        // so the trade reverses and the pivot strictly gains.
        let instance = Instance::from_integers(vec![
            vec![1, -7, 1],
            vec![1, 1, -7],
            vec![-7, 1, 2],
        ])
        .unwrap();
        let y = alloc(vec![
            vec![half(), rat(0), half()],
            vec![half(), half(), rat(0)],
            vec![rat(0), half(), half()],
        ]);
        let cycle = find_cycle(&build_consumption_graph(&y)).unwrap();
        let plan = plan_cycle_removal(&instance, &y, &cycle).unwrap();
        assert_eq!(plan.gain_ratio, rat(2));
        assert_eq!(plan.direction, TransferDirection::Reversed);
        let gain = plan.pivot_gain();
        assert!(gain.is_positive());

        let before = y.utilities(&instance);
        let after = apply_plan(&y, &plan).utilities(&instance);
        let pivot = plan.pivot_agent();
        for i in 0..3 {
            if i == pivot {
                assert_eq!(&after[i] - &before[i], gain);
            } else {
                assert_eq!(after[i], before[i]);
            }
        }
    }

    #[test]
    fn chore_cycle_moves_shares_toward_the_compensated_side() {
        // Two agents sharing two chores; the gain ratio is 1/4 so the
        // forward direction already favors the pivot.
        let instance = Instance::from_integers(vec![vec![-1, -2], vec![-2, -1]]).unwrap();
        let y = alloc(vec![
            vec![half(), half()],
            vec![half(), half()],
        ]);
        let cycle = find_cycle(&build_consumption_graph(&y)).unwrap();
        let plan = plan_cycle_removal(&instance, &y, &cycle).unwrap();
        assert_eq!(plan.gain_ratio, ratio(1, 4));
        assert_eq!(plan.direction, TransferDirection::Forward);
        assert_eq!(plan.transfer_amount, rat(1));
        assert_eq!(plan.pivot_gain(), ratio(3, 4));

        let after = apply_plan(&y, &plan);
        assert_eq!(after.share(0, 1), &rat(0));
        assert_eq!(after.share(1, 1), &rat(1));
        assert_eq!(after.share(0, 0), &ratio(3, 4));
        assert_eq!(after.share(1, 0), &ratio(1, 4));
        assert_eq!(
            after.utilities(&instance),
            vec![ratio(-3, 4), ratio(-3, 2)]
        );
    }

    #[test]
    fn chore_cycle_reverses_when_the_forward_ratio_exceeds_one() {
        let instance = Instance::from_integers(vec![vec![-2, -1], vec![-1, -2]]).unwrap();
        let y = alloc(vec![
            vec![half(), half()],
            vec![half(), half()],
        ]);
        let cycle = find_cycle(&build_consumption_graph(&y)).unwrap();
        let plan = plan_cycle_removal(&instance, &y, &cycle).unwrap();
        assert_eq!(plan.gain_ratio, rat(4));
        assert_eq!(plan.direction, TransferDirection::Reversed);
        assert_eq!(plan.pivot_gain(), ratio(3, 4));

        let after = apply_plan(&y, &plan);
        assert_eq!(after.share(0, 0), &rat(0));
        assert_eq!(
            after.utilities(&instance),
            vec![ratio(-3, 4), ratio(-3, 2)]
        );
    }

    #[test]
    fn zero_valuation_on_cycle_is_rejected() {
        let instance = Instance::from_integers(vec![vec![0, 1], vec![1, 1]]).unwrap();
        let y = alloc(vec![
            vec![half(), half()],
            vec![half(), half()],
        ]);
        let cycle = find_cycle(&build_consumption_graph(&y)).unwrap();
        let err = plan_cycle_removal(&instance, &y, &cycle).unwrap_err();
        assert!(matches!(err, PlanError::ZeroValuation { .. }));
    }

    #[test]
    fn identical_goods_cycle_collapses() {
        let instance = Instance::from_integers(vec![vec![1, 1], vec![1, 1]]).unwrap();
        let y = alloc(vec![
            vec![half(), half()],
            vec![half(), half()],
        ]);
        let before = y.utilities(&instance);
        let (result, trace) = to_forest_traced(&instance, &y);
        assert!(find_cycle(&build_consumption_graph(&result)).is_none());
        assert!(build_consumption_graph(&result).edge_count() <= 3);
        assert_eq!(result.utilities(&instance), before);
        assert_eq!(trace.iterations(), 1);
        assert!(trace.iterations() <= trace.initial_edge_count);
    }

    #[test]
    fn forest_and_rounding_preserve_fpo_through_a_real_cycle() {
        // The balanced three-cycle allocation is fractionally
        // Pareto-optimal yet cyclic, so the cancellation actually fires.
        let (instance, y) = balanced_three_cycle();
        assert!(crate::oracle::certify_fpo(&instance, &y));
        let improved = crate::lp::pareto_improve(&instance, &y);
        assert_eq!(improved.utilities(&instance), y.utilities(&instance));

        let (forest, trace) = to_forest_traced(&instance, &y);
        assert_eq!(trace.iterations(), 1);
        assert_eq!(forest.utilities(&instance), y.utilities(&instance));
        assert!(crate::oracle::certify_fpo(&instance, &forest));

        let rounded = crate::rounding::round_allocation(&instance, &forest).unwrap();
        assert!(crate::oracle::certify_fpo(&instance, &rounded));
    }

    #[test]
    fn discrete_input_is_returned_unchanged() {
        let instance = Instance::from_integers(vec![vec![1, -2], vec![3, 4]]).unwrap();
        let z = crate::model::DiscreteAllocation::new(vec![0, 1], 2).unwrap();
        let y = z.to_fractional(2);
        let (result, trace) = to_forest_traced(&instance, &y);
        assert_eq!(result, y);
        assert_eq!(trace.iterations(), 0);
        assert!(trace.easy_moves.is_empty());
    }

    #[test]
    fn to_forest_establishes_all_postconditions() {
        let instance = Instance::from_integers(vec![
            vec![3, -1, 0, 2],
            vec![1, -2, 5, 2],
            vec![-1, -1, 1, 4],
        ])
        .unwrap();
        let x = crate::lp::proportional_fractional(&instance);
        let (result, trace) = to_forest_traced(&instance, &x);
        let graph = build_consumption_graph(&result);
        assert!(find_cycle(&graph).is_none());
        assert!(graph.edge_count() <= 3 + 4 - 1);
        assert!(weakly_dominates(&instance, &result, &x));
        assert!(split_objects_same_signed(&instance, &result));
        assert!(trace.iterations() <= trace.initial_edge_count);

        // Utilities never decrease across any single step.
        let mut previous = {
            let (eased, _) = remove_easy_edges_traced(&instance, &x);
            eased.utilities(&instance)
        };
        for (_, utilities) in &trace.cycle_steps {
            for (before, after) in previous.iter().zip(utilities) {
                assert!(after >= before);
            }
            previous = utilities.clone();
        }
    }
}
