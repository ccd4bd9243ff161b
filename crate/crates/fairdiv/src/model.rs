//! Problem instances, allocations and the consumption graph.
//!
//! An instance is an exact-rational valuation matrix over agents (rows) and
//! objects (columns). Values may be negative (chores), zero (neutral) or
//! positive (goods), per agent. A fractional allocation splits each object
//! across agents with shares summing to exactly one; a discrete allocation
//! gives each object to a single owner. The consumption graph links an agent
//! to every object it holds a positive share of.
//!
//! All types here are immutable after construction and safe to share across
//! threads; algorithms that rewrite shares work on private copies.

use crate::rational::{rat, Rational};
use num::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    NoAgents,
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    DuplicateAgent(String),
    DuplicateObject(String),
    ShareOutOfRange {
        agent: usize,
        object: usize,
    },
    ColumnSumNotOne {
        object: usize,
    },
    OwnerOutOfRange {
        object: usize,
        owner: usize,
    },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NoAgents => write!(f, "an instance needs at least one agent"),
            ModelError::DimensionMismatch {
                context,
                expected,
                found,
            } => write!(f, "{context}: expected {expected} entries, found {found}"),
            ModelError::DuplicateAgent(name) => write!(f, "duplicate agent name {name:?}"),
            ModelError::DuplicateObject(name) => write!(f, "duplicate object name {name:?}"),
            ModelError::ShareOutOfRange { agent, object } => {
                write!(f, "share for agent {agent}, object {object} is outside [0, 1]")
            }
            ModelError::ColumnSumNotOne { object } => {
                write!(f, "shares of object {object} do not sum to 1")
            }
            ModelError::OwnerOutOfRange { object, owner } => {
                write!(f, "object {object} owned by out-of-range agent {owner}")
            }
        }
    }
}

impl std::error::Error for ModelError {}

/// A fair-division instance: named agents and objects plus the exact
/// valuation matrix, row per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    agents: Vec<String>,
    objects: Vec<String>,
    valuations: Vec<Vec<Rational>>,
}

impl Instance {
    pub fn new(
        agents: Vec<String>,
        objects: Vec<String>,
        valuations: Vec<Vec<Rational>>,
    ) -> Result<Self, ModelError> {
        if agents.is_empty() {
            return Err(ModelError::NoAgents);
        }
        let mut seen = BTreeSet::new();
        for name in &agents {
            if !seen.insert(name) {
                return Err(ModelError::DuplicateAgent(name.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for name in &objects {
            if !seen.insert(name) {
                return Err(ModelError::DuplicateObject(name.clone()));
            }
        }
        if valuations.len() != agents.len() {
            return Err(ModelError::DimensionMismatch {
                context: "valuation rows",
                expected: agents.len(),
                found: valuations.len(),
            });
        }
        for row in &valuations {
            if row.len() != objects.len() {
                return Err(ModelError::DimensionMismatch {
                    context: "valuation row",
                    expected: objects.len(),
                    found: row.len(),
                });
            }
        }
        Ok(Instance {
            agents,
            objects,
            valuations,
        })
    }

    /// Builds an instance from integer valuations, with generated names
    /// `a0..` and `o0..`. Handy for tests and programmatic use.
    pub fn from_integers(valuations: Vec<Vec<i64>>) -> Result<Self, ModelError> {
        let n = valuations.len();
        let m = valuations.first().map_or(0, Vec::len);
        let agents = (0..n).map(|i| format!("a{i}")).collect();
        let objects = (0..m).map(|o| format!("o{o}")).collect();
        let rows = valuations
            .into_iter()
            .map(|row| row.into_iter().map(rat).collect())
            .collect();
        Instance::new(agents, objects, rows)
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn agent_names(&self) -> &[String] {
        &self.agents
    }

    pub fn object_names(&self) -> &[String] {
        &self.objects
    }

    pub fn value(&self, agent: usize, object: usize) -> &Rational {
        &self.valuations[agent][object]
    }

    pub fn valuations(&self) -> &[Vec<Rational>] {
        &self.valuations
    }

    /// Total value an agent assigns to all objects together.
    pub fn total_value(&self, agent: usize) -> Rational {
        self.valuations[agent].iter().fold(Rational::zero(), |a, v| a + v)
    }

    /// Largest absolute value of a single object for this agent; zero when
    /// there are no objects.
    pub fn max_abs_value(&self, agent: usize) -> Rational {
        self.valuations[agent]
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Anything that yields exact per-agent utilities against an instance.
pub trait UtilitySource {
    fn utility(&self, instance: &Instance, agent: usize) -> Rational;

    fn utilities(&self, instance: &Instance) -> Vec<Rational> {
        (0..instance.agent_count())
            .map(|i| self.utility(instance, i))
            .collect()
    }
}

/// Shares matrix `x[agent][object]` with every column summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalAllocation {
    shares: Vec<Vec<Rational>>,
}

impl FractionalAllocation {
    pub fn new(shares: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        if shares.is_empty() {
            return Err(ModelError::NoAgents);
        }
        let m = shares[0].len();
        for row in &shares {
            if row.len() != m {
                return Err(ModelError::DimensionMismatch {
                    context: "share row",
                    expected: m,
                    found: row.len(),
                });
            }
        }
        for (i, row) in shares.iter().enumerate() {
            for (o, share) in row.iter().enumerate() {
                if share.is_negative() || share > &Rational::one() {
                    return Err(ModelError::ShareOutOfRange { agent: i, object: o });
                }
            }
        }
        for o in 0..m {
            let total = shares.iter().fold(Rational::zero(), |a, row| a + &row[o]);
            if !total.is_one() {
                return Err(ModelError::ColumnSumNotOne { object: o });
            }
        }
        Ok(FractionalAllocation { shares })
    }

    pub fn agent_count(&self) -> usize {
        self.shares.len()
    }

    pub fn object_count(&self) -> usize {
        self.shares[0].len()
    }

    pub fn share(&self, agent: usize, object: usize) -> &Rational {
        &self.shares[agent][object]
    }

    pub fn shares(&self) -> &[Vec<Rational>] {
        &self.shares
    }

    pub fn into_shares(self) -> Vec<Vec<Rational>> {
        self.shares
    }

    pub fn is_integral(&self) -> bool {
        self.shares
            .iter()
            .all(|row| row.iter().all(|s| s.is_zero() || s.is_one()))
    }

    /// Converts to a discrete allocation when every share is 0 or 1.
    pub fn to_discrete(&self) -> Option<DiscreteAllocation> {
        let mut owners = Vec::with_capacity(self.object_count());
        for o in 0..self.object_count() {
            let mut owner = None;
            for i in 0..self.agent_count() {
                if self.shares[i][o].is_one() {
                    owner = Some(i);
                } else if !self.shares[i][o].is_zero() {
                    return None;
                }
            }
            owners.push(owner?);
        }
        Some(DiscreteAllocation { owners })
    }
}

impl UtilitySource for FractionalAllocation {
    fn utility(&self, instance: &Instance, agent: usize) -> Rational {
        assert_eq!(
            (self.agent_count(), self.object_count()),
            (instance.agent_count(), instance.object_count()),
            "allocation dimensions do not match instance"
        );
        assert!(agent < instance.agent_count(), "agent index out of range");
        self.shares[agent]
            .iter()
            .zip(&instance.valuations[agent])
            .fold(Rational::zero(), |acc, (share, value)| acc + share * value)
    }
}

/// Total map from object to its single owner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteAllocation {
    owners: Vec<usize>,
}

impl DiscreteAllocation {
    pub fn new(owners: Vec<usize>, agent_count: usize) -> Result<Self, ModelError> {
        for (object, &owner) in owners.iter().enumerate() {
            if owner >= agent_count {
                return Err(ModelError::OwnerOutOfRange { object, owner });
            }
        }
        Ok(DiscreteAllocation { owners })
    }

    pub fn object_count(&self) -> usize {
        self.owners.len()
    }

    pub fn owner(&self, object: usize) -> usize {
        self.owners[object]
    }

    pub fn owners(&self) -> &[usize] {
        &self.owners
    }

    pub fn to_fractional(&self, agent_count: usize) -> FractionalAllocation {
        let mut shares = vec![vec![Rational::zero(); self.owners.len()]; agent_count];
        for (object, &owner) in self.owners.iter().enumerate() {
            shares[owner][object] = Rational::one();
        }
        FractionalAllocation { shares }
    }
}

impl UtilitySource for DiscreteAllocation {
    fn utility(&self, instance: &Instance, agent: usize) -> Rational {
        assert_eq!(
            self.owners.len(),
            instance.object_count(),
            "allocation dimensions do not match instance"
        );
        assert!(agent < instance.agent_count(), "agent index out of range");
        self.owners
            .iter()
            .enumerate()
            .filter(|&(_, &owner)| owner == agent)
            .fold(Rational::zero(), |acc, (object, _)| {
                acc + instance.value(agent, object)
            })
    }
}

/// Bipartite graph over agents and objects with an edge wherever a share is
/// strictly positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsumptionGraph {
    agent_adjacency: Vec<BTreeSet<usize>>,
    object_adjacency: Vec<BTreeSet<usize>>,
}

/// Builds the consumption graph of a fractional allocation. Edge membership
/// is decided by exact comparison against zero.
pub fn build_consumption_graph(allocation: &FractionalAllocation) -> ConsumptionGraph {
    let n = allocation.agent_count();
    let m = allocation.object_count();
    let mut agent_adjacency = vec![BTreeSet::new(); n];
    let mut object_adjacency = vec![BTreeSet::new(); m];
    for i in 0..n {
        for o in 0..m {
            if !allocation.share(i, o).is_zero() {
                agent_adjacency[i].insert(o);
                object_adjacency[o].insert(i);
            }
        }
    }
    ConsumptionGraph {
        agent_adjacency,
        object_adjacency,
    }
}

impl ConsumptionGraph {
    pub fn agent_count(&self) -> usize {
        self.agent_adjacency.len()
    }

    pub fn object_count(&self) -> usize {
        self.object_adjacency.len()
    }

    /// Objects held (in part) by this agent.
    pub fn objects_of(&self, agent: usize) -> &BTreeSet<usize> {
        &self.agent_adjacency[agent]
    }

    /// Agents holding a positive share of this object.
    pub fn holders_of(&self, object: usize) -> &BTreeSet<usize> {
        &self.object_adjacency[object]
    }

    pub fn edge_count(&self) -> usize {
        self.agent_adjacency.iter().map(BTreeSet::len).sum()
    }
}

/// A simple cycle in a consumption graph, as the alternating sequence
/// `a_1, o_1, a_2, o_2, ..., a_k, o_k` where `o_j` is shared by `a_j` and
/// `a_{j+1}` (indices wrapping), with `k >= 2` and all vertices distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub agents: Vec<usize>,
    pub objects: Vec<usize>,
}

impl Cycle {
    /// Number of agent/object pairs on the cycle.
    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// Checks the alternating-incidence invariant against a graph.
    pub fn is_valid_in(&self, graph: &ConsumptionGraph) -> bool {
        let k = self.agents.len();
        if k < 2 || self.objects.len() != k {
            return false;
        }
        let distinct_agents: BTreeSet<_> = self.agents.iter().collect();
        let distinct_objects: BTreeSet<_> = self.objects.iter().collect();
        if distinct_agents.len() != k || distinct_objects.len() != k {
            return false;
        }
        (0..k).all(|j| {
            let holders = graph.holders_of(self.objects[j]);
            holders.contains(&self.agents[j]) && holders.contains(&self.agents[(j + 1) % k])
        })
    }

    /// The same cycle traversed in the opposite direction, keeping the same
    /// starting agent.
    pub fn reversed(&self) -> Cycle {
        let k = self.agents.len();
        let mut agents = vec![self.agents[0]];
        agents.extend(self.agents[1..].iter().rev().copied());
        let objects = (0..k).map(|j| self.objects[k - 1 - j]).collect();
        Cycle { agents, objects }
    }
}

/// True when allocation `y` gives every agent at least the utility it has
/// under `x`, compared exactly.
pub fn weakly_dominates<Y: UtilitySource, X: UtilitySource>(
    instance: &Instance,
    y: &Y,
    x: &X,
) -> bool {
    (0..instance.agent_count()).all(|i| y.utility(instance, i) >= x.utility(instance, i))
}
