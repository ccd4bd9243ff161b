//! End-to-end orchestration: seed, improve, forest, round, audit.
//!
//! The stages always run in the same order. A fractional seed comes from the
//! egalitarian LP (or the proportional split), is improved to a fractionally
//! Pareto-optimal extreme point, has its easy edges removed, is made acyclic
//! per the chosen forest method, is rounded component by component, and the
//! merged result is audited against the seed baseline.
//!
//! The forest method only changes how acyclicity is established:
//!
//! * `Iterative` runs the full cycle-cancelling loop, which handles any
//!   input;
//! * `Simplex` relies on the extreme-point property of the improvement
//!   solve and fails the stage if a cycle is found anyway;
//! * `Both` runs the loop and additionally requires it to have been a no-op,
//!   cross-checking the two mechanisms against each other.
//!
//! On inputs produced by the improvement solve all three behave identically,
//! because the extreme-point allocation is already acyclic once easy edges
//! are gone.

use crate::forest::{
    find_cycle, remove_easy_edges_traced, to_forest_traced, EasyMove, ForestTrace,
};
use crate::lp::{egalitarian_fractional, pareto_improve, proportional_fractional};
use crate::model::{
    build_consumption_graph, DiscreteAllocation, FractionalAllocation, Instance, UtilitySource,
};
use crate::oracle::{audit, Criterion, FairnessReport};
use crate::rational::Rational;
use crate::rounding::{round_allocation_traced, RoundingTrace};
use num::Zero;
use std::fmt;

/// How the consumption graph is made acyclic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForestMethod {
    /// Trust the extreme-point property of the improvement solve; verify it
    /// and fail loudly if a cycle survives.
    #[default]
    Simplex,
    /// Run the cycle-cancelling loop unconditionally.
    Iterative,
    /// Run the loop and require it to find nothing, as a cross-check.
    Both,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub criterion: Criterion,
    pub forest_method: ForestMethod,
    pub split_components: bool,
    /// Seed carried for instance generators; the solve path itself is
    /// deterministic and never draws randomness.
    pub seed: u64,
    pub emit_report: bool,
    pub emit_trace: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            criterion: Criterion::Egalitarian,
            forest_method: ForestMethod::Simplex,
            split_components: false,
            seed: 0,
            emit_report: true,
            emit_trace: false,
        }
    }
}

/// A stage failure, naming the stage it happened in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineError {
    pub stage: &'static str,
    pub message: String,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pipeline stage {:?} failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for PipelineError {}

/// Allocation and utilities after one pipeline stage.
#[derive(Debug, Clone)]
pub struct StageSnapshot {
    pub allocation: FractionalAllocation,
    pub utilities: Vec<Rational>,
}

/// A connected component of a consumption graph, as a self-contained
/// sub-problem: its objects are fully allocated among its agents.
#[derive(Debug, Clone)]
pub struct Component {
    /// Global agent indices, ascending.
    pub agents: Vec<usize>,
    /// Global object indices, ascending.
    pub objects: Vec<usize>,
    pub instance: Instance,
    pub allocation: FractionalAllocation,
}

/// Forest and rounding instrumentation for one component (indices are
/// component-local).
#[derive(Debug, Clone)]
pub struct ComponentTrace {
    pub agents: Vec<usize>,
    pub objects: Vec<usize>,
    pub forest: ForestTrace,
    pub rounding: RoundingTrace,
}

/// Full per-stage instrumentation of a run.
#[derive(Debug, Clone)]
pub struct PipelineTrace {
    pub seed: StageSnapshot,
    pub improved: StageSnapshot,
    pub eased: StageSnapshot,
    pub easy_moves: Vec<EasyMove>,
    pub components: Vec<ComponentTrace>,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub allocation: DiscreteAllocation,
    pub report: FairnessReport,
    pub trace: Option<PipelineTrace>,
}

/// Splits a fractional allocation along the connected components of its
/// consumption graph. Every object lands in exactly one component together
/// with all of its holders, so each component is a complete sub-allocation;
/// agents holding nothing become singleton components. Components are
/// ordered by their lowest agent index.
pub fn split_components(instance: &Instance, y: &FractionalAllocation) -> Vec<Component> {
    let n = instance.agent_count();
    let m = instance.object_count();
    let graph = build_consumption_graph(y);
    let mut agent_seen = vec![false; n];
    let mut object_seen = vec![false; m];
    let mut components = Vec::new();

    for root in 0..n {
        if agent_seen[root] {
            continue;
        }
        let mut agents = Vec::new();
        let mut objects = Vec::new();
        let mut queue = std::collections::VecDeque::from([(true, root)]);
        agent_seen[root] = true;
        while let Some((is_agent, index)) = queue.pop_front() {
            if is_agent {
                agents.push(index);
                for &o in graph.objects_of(index) {
                    if !object_seen[o] {
                        object_seen[o] = true;
                        queue.push_back((false, o));
                    }
                }
            } else {
                objects.push(index);
                for &i in graph.holders_of(index) {
                    if !agent_seen[i] {
                        agent_seen[i] = true;
                        queue.push_back((true, i));
                    }
                }
            }
        }
        agents.sort_unstable();
        objects.sort_unstable();

        let sub_instance = Instance::new(
            agents
                .iter()
                .map(|&i| instance.agent_names()[i].clone())
                .collect(),
            objects
                .iter()
                .map(|&o| instance.object_names()[o].clone())
                .collect(),
            agents
                .iter()
                .map(|&i| {
                    objects
                        .iter()
                        .map(|&o| instance.value(i, o).clone())
                        .collect()
                })
                .collect(),
        )
        .expect("a component restriction of a valid instance is valid");
        let sub_allocation = FractionalAllocation::new(
            agents
                .iter()
                .map(|&i| {
                    objects
                        .iter()
                        .map(|&o| y.share(i, o).clone())
                        .collect()
                })
                .collect(),
        )
        .expect("a component holds the full share mass of its objects");
        components.push(Component {
            agents,
            objects,
            instance: sub_instance,
            allocation: sub_allocation,
        });
    }
    debug_assert!(object_seen.iter().all(|&seen| seen));
    components
}

/// Runs the full solve: seed LP per the criterion, Pareto improvement, easy
/// edge removal, forest stage per the configured method (optionally per
/// connected component), leaf-peeling rounding, and the exact audit of the
/// merged result against the fractional seed baseline.
pub fn run_pipeline(
    instance: &Instance,
    config: &PipelineConfig,
) -> Result<PipelineRun, PipelineError> {
    let (seed_allocation, egalitarian_value) = match config.criterion {
        Criterion::Egalitarian => {
            let (allocation, value) = egalitarian_fractional(instance);
            (allocation, Some(value))
        }
        Criterion::Proportional => (proportional_fractional(instance), None),
    };

    let improved = pareto_improve(instance, &seed_allocation);
    let (eased, easy_moves) = remove_easy_edges_traced(instance, &improved);

    let parts = if config.split_components {
        split_components(instance, &eased)
    } else {
        vec![Component {
            agents: (0..instance.agent_count()).collect(),
            objects: (0..instance.object_count()).collect(),
            instance: instance.clone(),
            allocation: eased.clone(),
        }]
    };

    let mut owners = vec![usize::MAX; instance.object_count()];
    let mut component_traces = Vec::new();
    for part in &parts {
        let (forested, forest_trace) = match config.forest_method {
            ForestMethod::Iterative => to_forest_traced(&part.instance, &part.allocation),
            ForestMethod::Simplex => {
                let graph = build_consumption_graph(&part.allocation);
                if find_cycle(&graph).is_some() {
                    return Err(PipelineError {
                        stage: "forest",
                        message: "improvement solve left a cycle in the consumption graph"
                            .to_string(),
                    });
                }
                (
                    part.allocation.clone(),
                    ForestTrace {
                        initial_edge_count: graph.edge_count(),
                        easy_moves: Vec::new(),
                        cycle_steps: Vec::new(),
                    },
                )
            }
            ForestMethod::Both => {
                let (forested, trace) = to_forest_traced(&part.instance, &part.allocation);
                if trace.iterations() > 0 {
                    return Err(PipelineError {
                        stage: "forest",
                        message: format!(
                            "cycle cancellation performed {} iterations on an allocation \
                             the improvement solve should have left acyclic",
                            trace.iterations()
                        ),
                    });
                }
                (forested, trace)
            }
        };

        let (rounded, rounding_trace) = round_allocation_traced(&part.instance, &forested)
            .map_err(|err| PipelineError {
                stage: "rounding",
                message: err.to_string(),
            })?;
        for (local, &global) in part.objects.iter().enumerate() {
            owners[global] = part.agents[rounded.owner(local)];
        }
        if config.emit_trace {
            component_traces.push(ComponentTrace {
                agents: part.agents.clone(),
                objects: part.objects.clone(),
                forest: forest_trace,
                rounding: rounding_trace,
            });
        }
    }
    debug_assert!(owners.iter().all(|&owner| owner != usize::MAX));
    let allocation = DiscreteAllocation::new(owners, instance.agent_count())
        .expect("merged owners are valid agent indices");

    let mut report = audit(instance, &seed_allocation, &allocation, config.criterion);
    report.egalitarian_value = egalitarian_value;

    let trace = config.emit_trace.then(|| {
        let snapshot = |allocation: &FractionalAllocation| StageSnapshot {
            utilities: allocation.utilities(instance),
            allocation: allocation.clone(),
        };
        PipelineTrace {
            seed: snapshot(&seed_allocation),
            improved: snapshot(&improved),
            eased: snapshot(&eased),
            easy_moves,
            components: component_traces,
        }
    });

    Ok(PipelineRun {
        allocation,
        report,
        trace,
    })
}

/// Smallest utility across agents; the quantity egalitarian allocations
/// maximize. Zero for an empty agent list cannot occur (instances have at
/// least one agent).
pub fn minimum_utility(instance: &Instance, allocation: &DiscreteAllocation) -> Rational {
    allocation
        .utilities(instance)
        .into_iter()
        .min()
        .unwrap_or_else(Rational::zero)
}
