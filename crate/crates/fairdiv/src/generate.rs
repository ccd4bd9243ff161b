//! Deterministic random instance generators for testing and benchmarking.

use crate::model::Instance;
use crate::rational::rat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    /// Every value strictly positive.
    Goods,
    /// Every value strictly negative.
    Chores,
    /// Values drawn uniformly from the whole range; signs independent.
    Mixed,
    /// All agents share one identical strictly positive valuation row, the
    /// shape that makes discrete egalitarian allocation a number-partition
    /// problem.
    PartitionHard,
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            InstanceKind::Goods => "goods",
            InstanceKind::Chores => "chores",
            InstanceKind::Mixed => "mixed",
            InstanceKind::PartitionHard => "partition_hard",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenerateError {
    NoAgents,
    EmptyRange { lo: i64, hi: i64 },
    NoPositiveValues { hi: i64 },
    NoNegativeValues { lo: i64 },
}

impl fmt::Display for GenerateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenerateError::NoAgents => write!(f, "at least one agent is required"),
            GenerateError::EmptyRange { lo, hi } => {
                write!(f, "empty value range {lo}:{hi}")
            }
            GenerateError::NoPositiveValues { hi } => {
                write!(f, "range ends at {hi}; goods need positive values")
            }
            GenerateError::NoNegativeValues { lo } => {
                write!(f, "range starts at {lo}; chores need negative values")
            }
        }
    }
}

impl std::error::Error for GenerateError {}

/// Generates an instance with integer values drawn from `value_range`
/// (inclusive). Deterministic for a fixed seed: the stream cipher RNG is
/// stable across platforms and releases.
pub fn generate_instance(
    kind: InstanceKind,
    agents: usize,
    objects: usize,
    value_range: (i64, i64),
    seed: u64,
) -> Result<Instance, GenerateError> {
    let (lo, hi) = value_range;
    if agents == 0 {
        return Err(GenerateError::NoAgents);
    }
    if lo > hi {
        return Err(GenerateError::EmptyRange { lo, hi });
    }
    let positive = (lo.max(1), hi);
    let negative = (lo, hi.min(-1));
    match kind {
        InstanceKind::Goods | InstanceKind::PartitionHard if positive.0 > positive.1 => {
            return Err(GenerateError::NoPositiveValues { hi });
        }
        InstanceKind::Chores if negative.0 > negative.1 => {
            return Err(GenerateError::NoNegativeValues { lo });
        }
        _ => {}
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<i64>> = match kind {
        InstanceKind::Goods => (0..agents)
            .map(|_| (0..objects).map(|_| rng.random_range(positive.0..=positive.1)).collect())
            .collect(),
        InstanceKind::Chores => (0..agents)
            .map(|_| (0..objects).map(|_| rng.random_range(negative.0..=negative.1)).collect())
            .collect(),
        InstanceKind::Mixed => (0..agents)
            .map(|_| (0..objects).map(|_| rng.random_range(lo..=hi)).collect())
            .collect(),
        InstanceKind::PartitionHard => {
            let row: Vec<i64> = (0..objects)
                .map(|_| rng.random_range(positive.0..=positive.1))
                .collect();
            vec![row; agents]
        }
    };

    let agent_names = (0..agents).map(|i| format!("a{i}")).collect();
    let object_names = (0..objects).map(|o| format!("o{o}")).collect();
    let valuations = rows
        .into_iter()
        .map(|row| row.into_iter().map(rat).collect())
        .collect();
    Ok(Instance::new(agent_names, object_names, valuations)
        .expect("generated names are unique and dimensions agree"))
}
