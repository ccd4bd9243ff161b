//! Rounding an acyclic fractional allocation to a discrete one.
//!
//! The forest of agents and objects is dismantled one leaf at a time. An
//! object leaf has a single holder and is assigned to it outright. When an
//! agent leaf departs holding part of an object that some other holder
//! values positively, the share moves to that holder; otherwise the agent
//! takes the object whole (everyone else holding it values it negatively
//! and is glad to be rid of it). Either way no agent still in the graph ever
//! drops below its utility in the input allocation, and the departing agent
//! loses at most the absolute value of the single object involved, which is
//! the source of the up-to-one-object guarantee.
//!
//! The graph is kept in lockstep with the working shares: a share driven to
//! zero removes its edge immediately. Each iteration removes exactly one
//! vertex, so the loop runs exactly once per vertex.

use crate::model::{
    build_consumption_graph, DiscreteAllocation, FractionalAllocation, Instance, UtilitySource,
};
use crate::forest::{find_cycle, split_objects_same_signed};
use crate::rational::Rational;
use num::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundingError {
    /// The consumption graph of the input contains a cycle.
    CyclicGraph,
    /// A split object is not same-signed across its holders.
    MixedSignSplit { object: usize },
}

impl fmt::Display for RoundingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoundingError::CyclicGraph => {
                write!(f, "rounding requires an acyclic consumption graph")
            }
            RoundingError::MixedSignSplit { object } => write!(
                f,
                "object {object} is split between holders disagreeing on its sign"
            ),
        }
    }
}

impl std::error::Error for RoundingError {}

/// A vertex of the bipartite consumption graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vertex {
    Agent(usize),
    Object(usize),
}

/// What a single peeling step did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PeelAction {
    /// A degree-one object assigned to its only holder; no shares move.
    AssignObject { object: usize, owner: usize },
    /// A degree-zero object removed; it was already assigned in an earlier
    /// step.
    RetireObject { object: usize },
    /// A departing agent's share of its last object handed to a
    /// positive-valuing co-holder.
    MoveShare {
        agent: usize,
        object: usize,
        receiver: usize,
        amount: Rational,
    },
    /// A departing agent taking its last object entirely; remaining holders
    /// (all valuing it negatively, if any) surrender their shares.
    TakeObject {
        agent: usize,
        object: usize,
        surrendered: Vec<(usize, Rational)>,
    },
    /// An isolated agent removed with no action.
    RetireAgent { agent: usize },
}

/// One iteration of the peeling loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeelStep {
    pub removed: Vertex,
    pub action: PeelAction,
}

/// Per-iteration instrumentation: the step taken, the utilities of all
/// agents right after it, and which agents are still in the graph.
#[derive(Debug, Clone)]
pub struct RoundingTrace {
    pub baseline_utilities: Vec<Rational>,
    pub steps: Vec<TracedStep>,
}

#[derive(Debug, Clone)]
pub struct TracedStep {
    pub step: PeelStep,
    pub utilities: Vec<Rational>,
    pub active_agents: Vec<bool>,
}

/// Incremental leaf peeler over a validated forest. Exposes one vertex
/// removal per [`step`](LeafPeeler::step) call; leaves are processed lowest
/// index first, objects before agents on index ties, so runs are
/// deterministic.
pub struct LeafPeeler<'a> {
    instance: &'a Instance,
    shares: Vec<Vec<Rational>>,
    agent_adjacency: Vec<BTreeSet<usize>>,
    object_adjacency: Vec<BTreeSet<usize>>,
    owners: Vec<Option<usize>>,
    alive_agents: Vec<bool>,
    alive_objects: Vec<bool>,
    /// Pending leaves keyed by `(index, kind)`; objects carry kind 0 so they
    /// win index ties.
    leaves: BTreeSet<(usize, u8)>,
    remaining: usize,
}

const KIND_OBJECT: u8 = 0;
const KIND_AGENT: u8 = 1;

impl<'a> LeafPeeler<'a> {
    pub fn new(
        instance: &'a Instance,
        y: &FractionalAllocation,
    ) -> Result<Self, RoundingError> {
        let graph = build_consumption_graph(y);
        if find_cycle(&graph).is_some() {
            return Err(RoundingError::CyclicGraph);
        }
        if !split_objects_same_signed(instance, y) {
            let offending = (0..instance.object_count())
                .find(|&o| {
                    let holders = graph.holders_of(o);
                    holders.len() >= 2 && {
                        let positive =
                            holders.iter().all(|&i| instance.value(i, o).is_positive());
                        let negative =
                            holders.iter().all(|&i| instance.value(i, o).is_negative());
                        !positive && !negative
                    }
                })
                .expect("a mixed-sign split exists");
            return Err(RoundingError::MixedSignSplit { object: offending });
        }

        let n = instance.agent_count();
        let m = instance.object_count();
        let agent_adjacency: Vec<BTreeSet<usize>> =
            (0..n).map(|i| graph.objects_of(i).clone()).collect();
        let object_adjacency: Vec<BTreeSet<usize>> =
            (0..m).map(|o| graph.holders_of(o).clone()).collect();
        let mut leaves = BTreeSet::new();
        for i in 0..n {
            if agent_adjacency[i].len() <= 1 {
                leaves.insert((i, KIND_AGENT));
            }
        }
        for o in 0..m {
            if object_adjacency[o].len() <= 1 {
                leaves.insert((o, KIND_OBJECT));
            }
        }
        Ok(LeafPeeler {
            instance,
            shares: y.shares().to_vec(),
            agent_adjacency,
            object_adjacency,
            owners: vec![None; m],
            alive_agents: vec![true; n],
            alive_objects: vec![true; m],
            leaves,
            remaining: n + m,
        })
    }

    pub fn is_done(&self) -> bool {
        self.remaining == 0
    }

    pub fn active_agents(&self) -> Vec<bool> {
        self.alive_agents.clone()
    }

    /// Running utility of an agent under the working allocation.
    pub fn utility(&self, agent: usize) -> Rational {
        self.shares[agent]
            .iter()
            .zip(&self.instance.valuations()[agent])
            .fold(Rational::zero(), |acc, (share, value)| acc + share * value)
    }

    pub fn utilities(&self) -> Vec<Rational> {
        (0..self.instance.agent_count())
            .map(|i| self.utility(i))
            .collect()
    }

    fn drop_edge(&mut self, agent: usize, object: usize) {
        if self.agent_adjacency[agent].remove(&object) {
            self.object_adjacency[object].remove(&agent);
            if self.alive_agents[agent] && self.agent_adjacency[agent].len() <= 1 {
                self.leaves.insert((agent, KIND_AGENT));
            }
            if self.alive_objects[object] && self.object_adjacency[object].len() <= 1 {
                self.leaves.insert((object, KIND_OBJECT));
            }
        }
    }

    /// Removes one leaf vertex and returns what happened, or `None` when the
    /// graph is empty.
    pub fn step(&mut self) -> Option<PeelStep> {
        let (index, kind) = self.leaves.pop_first()?;
        assert!(
            self.remaining > 0,
            "no leaf can be pending once the graph is empty"
        );
        self.remaining -= 1;
        if kind == KIND_OBJECT {
            let object = index;
            self.alive_objects[object] = false;
            let holders = self.object_adjacency[object].clone();
            let action = match holders.len() {
                0 => {
                    assert!(
                        self.owners[object].is_some(),
                        "an isolated object must have been assigned already"
                    );
                    PeelAction::RetireObject { object }
                }
                1 => {
                    let owner = *holders.first().unwrap();
                    assert!(
                        self.shares[owner][object].is_one(),
                        "a degree-one object's single holder owns all of it"
                    );
                    self.owners[object] = Some(owner);
                    self.drop_edge(owner, object);
                    PeelAction::AssignObject { object, owner }
                }
                _ => unreachable!("a popped object leaf has degree at most one"),
            };
            return Some(PeelStep {
                removed: Vertex::Object(object),
                action,
            });
        }

        let agent = index;
        self.alive_agents[agent] = false;
        let Some(&object) = self.agent_adjacency[agent].first() else {
            return Some(PeelStep {
                removed: Vertex::Agent(agent),
                action: PeelAction::RetireAgent { agent },
            });
        };

        let receiver = self.object_adjacency[object]
            .iter()
            .copied()
            .filter(|&k| k != agent && self.instance.value(k, object).is_positive())
            .max_by(|&a, &b| {
                // Largest value first; ties to the lowest index.
                self.instance
                    .value(a, object)
                    .cmp(self.instance.value(b, object))
                    .then(b.cmp(&a))
            });
        let action = if let Some(receiver) = receiver {
            let amount = self.shares[agent][object].clone();
            self.shares[agent][object] = Rational::zero();
            self.shares[receiver][object] += &amount;
            self.drop_edge(agent, object);
            PeelAction::MoveShare {
                agent,
                object,
                receiver,
                amount,
            }
        } else {
            // Everyone else holding the object (if anyone) views it as a
            // chore; the departing agent takes it whole.
            let mut surrendered = Vec::new();
            for holder in self.object_adjacency[object].clone() {
                if holder == agent {
                    continue;
                }
                let amount = self.shares[holder][object].clone();
                self.shares[holder][object] = Rational::zero();
                surrendered.push((holder, amount));
                self.drop_edge(holder, object);
            }
            self.shares[agent][object] = Rational::one();
            self.owners[object] = Some(agent);
            self.drop_edge(agent, object);
            PeelAction::TakeObject {
                agent,
                object,
                surrendered,
            }
        };
        Some(PeelStep {
            removed: Vertex::Agent(agent),
            action,
        })
    }

    /// Finishes peeling and returns the discrete result, asserting full
    /// integrality of the working shares.
    pub fn into_allocation(mut self) -> DiscreteAllocation {
        while self.step().is_some() {}
        assert_eq!(self.remaining, 0, "a forest always offers a leaf");
        let owners: Vec<usize> = self
            .owners
            .iter()
            .map(|owner| owner.expect("every object is assigned before removal"))
            .collect();
        for (o, &owner) in owners.iter().enumerate() {
            for i in 0..self.instance.agent_count() {
                let share = &self.shares[i][o];
                assert!(
                    if i == owner { share.is_one() } else { share.is_zero() },
                    "working shares must be 0/1 and match the owner map"
                );
            }
        }
        DiscreteAllocation::new(owners, self.instance.agent_count())
            .expect("owners are agent indices")
    }
}

/// Rounds an acyclic, same-sign-split fractional allocation into a discrete
/// one in which every agent keeps at least its fractional utility minus the
/// absolute value of a single object. Preserves fractional Pareto
/// optimality.
pub fn round_allocation(
    instance: &Instance,
    y: &FractionalAllocation,
) -> Result<DiscreteAllocation, RoundingError> {
    Ok(LeafPeeler::new(instance, y)?.into_allocation())
}

/// As [`round_allocation`], recording per-iteration utilities for invariant
/// checks.
pub fn round_allocation_traced(
    instance: &Instance,
    y: &FractionalAllocation,
) -> Result<(DiscreteAllocation, RoundingTrace), RoundingError> {
    let mut peeler = LeafPeeler::new(instance, y)?;
    let baseline_utilities = y.utilities(instance);
    let mut steps = Vec::new();
    while let Some(step) = peeler.step() {
        steps.push(TracedStep {
            step,
            utilities: peeler.utilities(),
            active_agents: peeler.active_agents(),
        });
    }
    let allocation = peeler.into_allocation();
    Ok((
        allocation,
        RoundingTrace {
            baseline_utilities,
            steps,
        },
    ))
}
