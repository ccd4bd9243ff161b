//! JSON input and output.
//!
//! Instance documents look like
//!
//! ```json
//! {
//!   "agents": ["alice", "bob"],
//!   "objects": ["table", "piano"],
//!   "valuations": [[3, "-1/2"], ["0.25", 4]]
//! }
//! ```
//!
//! Row `i` of `valuations` belongs to agent `i`. A value is a JSON integer,
//! a `"p/q"` fraction string, or a decimal string expanded exactly; bare
//! JSON floats are rejected so no value ever passes through floating point.
//!
//! Solve output documents contain the allocation (object name to agent
//! name), the fairness report with rationals rendered as `"p/q"` strings,
//! the run certificates, and optionally a per-stage trace. Serialization is
//! deterministic: maps are name-sorted and struct fields keep a fixed order.

use crate::model::{DiscreteAllocation, Instance, ModelError};
use crate::oracle::FairnessReport;
use crate::pipeline::{PipelineRun, PipelineTrace};
use crate::rational::{format_rational, parse_rational, Rational, RationalParseError};
use crate::rounding::{PeelAction, Vertex};
use num::One;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub enum ParseError {
    /// Syntax error; the message carries serde's line and column.
    Json(String),
    Rational {
        location: String,
        source: RationalParseError,
    },
    NonIntegerNumber {
        location: String,
    },
    Model(ModelError),
    Allocation(String),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Json(message) => write!(f, "invalid JSON: {message}"),
            ParseError::Rational { location, source } => {
                write!(f, "{location}: {source}")
            }
            ParseError::NonIntegerNumber { location } => write!(
                f,
                "{location}: non-integer numbers must be quoted strings (e.g. \"1/3\" or \"0.25\") to stay exact"
            ),
            ParseError::Model(err) => write!(f, "{err}"),
            ParseError::Allocation(message) => write!(f, "invalid allocation: {message}"),
        }
    }
}

impl std::error::Error for ParseError {}

impl From<ModelError> for ParseError {
    fn from(err: ModelError) -> Self {
        ParseError::Model(err)
    }
}

#[derive(serde::Deserialize)]
struct RawInstance {
    agents: Vec<String>,
    objects: Vec<String>,
    valuations: Vec<Vec<serde_json::Value>>,
}

fn value_to_rational(value: &serde_json::Value, location: String) -> Result<Rational, ParseError> {
    match value {
        serde_json::Value::Number(number) => match number.as_i64() {
            Some(n) => Ok(crate::rational::rat(n)),
            None => Err(ParseError::NonIntegerNumber { location }),
        },
        serde_json::Value::String(text) => {
            parse_rational(text).map_err(|source| ParseError::Rational { location, source })
        }
        other => Err(ParseError::Rational {
            location,
            source: RationalParseError::Malformed(other.to_string()),
        }),
    }
}

/// Parses an instance document.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let raw: RawInstance =
        serde_json::from_str(text).map_err(|err| ParseError::Json(err.to_string()))?;
    let mut valuations = Vec::with_capacity(raw.valuations.len());
    for (i, row) in raw.valuations.iter().enumerate() {
        let mut parsed = Vec::with_capacity(row.len());
        for (o, value) in row.iter().enumerate() {
            parsed.push(value_to_rational(value, format!("valuations[{i}][{o}]"))?);
        }
        valuations.push(parsed);
    }
    Ok(Instance::new(raw.agents, raw.objects, valuations)?)
}

/// Serializes an instance canonically: whole values that fit a 64-bit
/// integer appear as JSON numbers, everything else as `"p/q"` strings.
/// Parsing the result reproduces the instance exactly.
pub fn instance_to_json(instance: &Instance) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        agents: &'a [String],
        objects: &'a [String],
        valuations: Vec<Vec<serde_json::Value>>,
    }
    let valuations = instance
        .valuations()
        .iter()
        .map(|row| row.iter().map(rational_to_value).collect())
        .collect();
    let doc = Doc {
        agents: instance.agent_names(),
        objects: instance.object_names(),
        valuations,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("instance serialization");
    text.push('\n');
    text
}

fn rational_to_value(value: &Rational) -> serde_json::Value {
    if value.denom().is_one() {
        if let Ok(n) = i64::try_from(value.numer().clone()) {
            return serde_json::Value::Number(n.into());
        }
    }
    serde_json::Value::String(format_rational(value))
}

/// Parses a discrete allocation for `instance` from either a full solve
/// output document or a bare `{object: agent}` map.
pub fn parse_allocation(text: &str, instance: &Instance) -> Result<DiscreteAllocation, ParseError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|err| ParseError::Json(err.to_string()))?;
    let map = match &value {
        serde_json::Value::Object(object) => match object.get("allocation") {
            Some(serde_json::Value::Object(inner)) => inner,
            Some(_) => {
                return Err(ParseError::Allocation(
                    "\"allocation\" must be an object mapping object names to agent names"
                        .to_string(),
                ))
            }
            None => object,
        },
        _ => {
            return Err(ParseError::Allocation(
                "expected a JSON object".to_string(),
            ))
        }
    };

    let agent_index: BTreeMap<&str, usize> = instance
        .agent_names()
        .iter()
        .enumerate()
        .map(|(i, name)| (name.as_str(), i))
        .collect();
    let object_index: BTreeMap<&str, usize> = instance
        .object_names()
        .iter()
        .enumerate()
        .map(|(o, name)| (name.as_str(), o))
        .collect();

    let mut owners = vec![None; instance.object_count()];
    for (object_name, agent_value) in map {
        let &object = object_index.get(object_name.as_str()).ok_or_else(|| {
            ParseError::Allocation(format!("unknown object {object_name:?}"))
        })?;
        let agent_name = agent_value.as_str().ok_or_else(|| {
            ParseError::Allocation(format!("owner of {object_name:?} must be an agent name"))
        })?;
        let &agent = agent_index.get(agent_name).ok_or_else(|| {
            ParseError::Allocation(format!("unknown agent {agent_name:?}"))
        })?;
        if owners[object].replace(agent).is_some() {
            return Err(ParseError::Allocation(format!(
                "object {object_name:?} assigned twice"
            )));
        }
    }
    let owners = owners
        .into_iter()
        .enumerate()
        .map(|(o, owner)| {
            owner.ok_or_else(|| {
                ParseError::Allocation(format!(
                    "object {:?} has no owner",
                    instance.object_names()[o]
                ))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DiscreteAllocation::new(owners, instance.agent_count())?)
}

#[derive(Serialize)]
pub struct SolveDocument {
    pub allocation: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportDocument>,
    pub certificates: Certificates,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceDocument>,
}

#[derive(Serialize)]
pub struct ReportDocument {
    pub mode: String,
    pub egalitarian_value: Option<String>,
    pub brute_force_value: Option<String>,
    pub fpo_certified: bool,
    pub agents: Vec<AgentAuditDocument>,
}

#[derive(Serialize)]
pub struct AgentAuditDocument {
    pub agent: String,
    pub baseline: String,
    pub achieved: String,
    pub deficit: String,
    pub max_abs_object: String,
    pub up_to_one_satisfied: bool,
}

#[derive(Serialize)]
pub struct Certificates {
    pub fpo: bool,
    pub up_to_one: bool,
}

#[derive(Serialize)]
pub struct TraceDocument {
    pub stages: Vec<StageDocument>,
    pub components: Vec<ComponentDocument>,
}

#[derive(Serialize)]
pub struct StageDocument {
    pub stage: String,
    pub utilities: Vec<String>,
    pub shares: Vec<Vec<String>>,
}

#[derive(Serialize)]
pub struct ComponentDocument {
    pub agents: Vec<String>,
    pub objects: Vec<String>,
    pub forest_initial_edges: usize,
    pub forest_iterations: usize,
    /// Utilities of the component's agents after each cycle removal.
    pub forest_step_utilities: Vec<Vec<String>>,
    pub rounding_steps: Vec<RoundingStepDocument>,
}

#[derive(Serialize)]
pub struct RoundingStepDocument {
    pub removed: String,
    pub action: String,
    pub utilities: Vec<String>,
}

/// Builds the report section from a [`FairnessReport`].
pub fn report_document(instance: &Instance, report: &FairnessReport) -> ReportDocument {
    ReportDocument {
        mode: report.mode.to_string(),
        egalitarian_value: report.egalitarian_value.as_ref().map(format_rational),
        brute_force_value: report.brute_force_value.as_ref().map(format_rational),
        fpo_certified: report.fpo_certified,
        agents: report
            .agents
            .iter()
            .enumerate()
            .map(|(i, row)| AgentAuditDocument {
                agent: instance.agent_names()[i].clone(),
                baseline: format_rational(&row.baseline),
                achieved: format_rational(&row.achieved),
                deficit: format_rational(&row.deficit),
                max_abs_object: format_rational(&row.max_abs_object),
                up_to_one_satisfied: row.up_to_one_satisfied,
            })
            .collect(),
    }
}

fn trace_document(instance: &Instance, trace: &PipelineTrace) -> TraceDocument {
    let stage = |name: &str, snapshot: &crate::pipeline::StageSnapshot| StageDocument {
        stage: name.to_string(),
        utilities: snapshot.utilities.iter().map(format_rational).collect(),
        shares: snapshot
            .allocation
            .shares()
            .iter()
            .map(|row| row.iter().map(format_rational).collect())
            .collect(),
    };
    TraceDocument {
        stages: vec![
            stage("seed", &trace.seed),
            stage("improved", &trace.improved),
            stage("easy-edges", &trace.eased),
        ],
        components: trace
            .components
            .iter()
            .map(|component| ComponentDocument {
                agents: component
                    .agents
                    .iter()
                    .map(|&i| instance.agent_names()[i].clone())
                    .collect(),
                objects: component
                    .objects
                    .iter()
                    .map(|&o| instance.object_names()[o].clone())
                    .collect(),
                forest_initial_edges: component.forest.initial_edge_count,
                forest_iterations: component.forest.iterations(),
                forest_step_utilities: component
                    .forest
                    .cycle_steps
                    .iter()
                    .map(|(_, utilities)| utilities.iter().map(format_rational).collect())
                    .collect(),
                rounding_steps: component
                    .rounding
                    .steps
                    .iter()
                    .map(|step| RoundingStepDocument {
                        removed: match step.step.removed {
                            Vertex::Agent(i) => format!("agent:{}", component_name(instance, &component.agents, i)),
                            Vertex::Object(o) => format!("object:{}", component_object_name(instance, &component.objects, o)),
                        },
                        action: action_name(&step.step.action),
                        utilities: step.utilities.iter().map(format_rational).collect(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

fn component_name(instance: &Instance, agents: &[usize], local: usize) -> String {
    instance.agent_names()[agents[local]].clone()
}

fn component_object_name(instance: &Instance, objects: &[usize], local: usize) -> String {
    instance.object_names()[objects[local]].clone()
}

fn action_name(action: &PeelAction) -> String {
    match action {
        PeelAction::AssignObject { .. } => "assign-object".to_string(),
        PeelAction::RetireObject { .. } => "retire-object".to_string(),
        PeelAction::MoveShare { .. } => "move-share".to_string(),
        PeelAction::TakeObject { .. } => "take-object".to_string(),
        PeelAction::RetireAgent { .. } => "retire-agent".to_string(),
    }
}

/// Builds the full solve output document.
pub fn solve_document(instance: &Instance, run: &PipelineRun, emit_report: bool) -> SolveDocument {
    let allocation = run
        .allocation
        .owners()
        .iter()
        .enumerate()
        .map(|(o, &owner)| {
            (
                instance.object_names()[o].clone(),
                instance.agent_names()[owner].clone(),
            )
        })
        .collect();
    SolveDocument {
        allocation,
        report: emit_report.then(|| report_document(instance, &run.report)),
        certificates: Certificates {
            fpo: run.report.fpo_certified,
            up_to_one: run.report.all_up_to_one(),
        },
        trace: run.trace.as_ref().map(|trace| trace_document(instance, trace)),
    }
}

/// Pretty-prints any of the documents with a trailing newline.
pub fn to_json_pretty<T: Serialize>(document: &T) -> String {
    let mut text = serde_json::to_string_pretty(document).expect("document serialization");
    text.push('\n');
    text
}
