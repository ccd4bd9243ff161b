//! Fair division of indivisible goods and chores.
//!
//! `fairdiv` computes discrete allocations of mixed goods and chores that are
//! fractionally Pareto-optimal and almost-egalitarian: each agent receives at
//! least its utility in a fractional egalitarian allocation, minus the
//! absolute value of a single object. A proportional criterion (each agent
//! gets at least `1/n` of its total value, up to one object) is available as
//! an alternative seed.
//!
//! The pipeline runs in stages, each preserving per-agent utilities:
//!
//! 1. [`lp`] solves the egalitarian max-min program (or builds the trivial
//!    proportional split) and then a total-utility improvement program, all
//!    in exact rational arithmetic;
//! 2. [`forest`] removes no-cost "easy" edges and cancels any cycles of the
//!    consumption graph through utility-preserving trades, leaving a forest;
//! 3. [`rounding`] peels leaves off the forest to reach a discrete
//!    allocation, losing each agent at most one good or gaining at most one
//!    chore;
//! 4. [`oracle`] certifies every claimed guarantee on the concrete run:
//!    Pareto optimality via an exact LP certificate, and the per-agent
//!    up-to-one-object bound against the fractional baseline.
//!
//! Everything is exact: values, shares and utilities are arbitrary-precision
//! rationals, comparisons carry no tolerances, and removed edges are shares
//! driven to literal zero.

pub mod forest;
pub mod generate;
pub mod io;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod rational;
pub mod rounding;

pub use model::{
    build_consumption_graph, weakly_dominates, ConsumptionGraph, Cycle, DiscreteAllocation,
    FractionalAllocation, Instance, UtilitySource,
};
pub use oracle::{audit, certify_fpo, Criterion, FairnessReport};
pub use pipeline::{run_pipeline, PipelineConfig};
pub use rational::Rational;
