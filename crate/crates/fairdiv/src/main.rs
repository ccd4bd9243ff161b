//! Command-line front end.
//!
//! Subcommands: `solve` (run the full pipeline on an instance file),
//! `generate` (emit a random instance), `audit` (check an existing
//! allocation), `oracle` (exhaustive discrete egalitarian optimum). Exit
//! code 0 means every certificate passed; 1 means a certificate failed;
//! 2 means bad input or usage.

use clap::{Parser, Subcommand, ValueEnum};
use fairdiv::generate::{generate_instance, InstanceKind};
use fairdiv::io::{
    instance_to_json, parse_allocation, parse_instance, report_document, solve_document,
    to_json_pretty, Certificates, SolveDocument,
};
use fairdiv::lp::{egalitarian_fractional, proportional_fractional};
use fairdiv::oracle::{audit, brute_force_egalitarian, Criterion};
use fairdiv::pipeline::{run_pipeline, ForestMethod, PipelineConfig};
use fairdiv::rational::format_rational;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fairdiv",
    about = "Pareto-efficient, almost-egalitarian allocation of goods and chores",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and report certified fairness guarantees.
    Solve {
        /// Instance file (JSON).
        #[arg(long)]
        input: PathBuf,
        /// Fairness criterion for the fractional seed.
        #[arg(long, value_enum, default_value_t = CriterionArg::Egalitarian)]
        criterion: CriterionArg,
        /// How the consumption graph is made acyclic.
        #[arg(long = "forest-method", value_enum, default_value_t = ForestMethodArg::Simplex)]
        forest_method: ForestMethodArg,
        /// Solve connected components of the consumption graph separately.
        #[arg(long)]
        split_components: bool,
        /// Record per-stage allocations and utilities in the output.
        #[arg(long)]
        trace: bool,
        /// Write the output document here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a random instance.
    Generate {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        agents: usize,
        #[arg(long)]
        objects: usize,
        /// Inclusive integer value range, as LO:HI.
        #[arg(long, default_value = "-5:5", value_parser = parse_range, allow_hyphen_values = true)]
        range: (i64, i64),
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the instance here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Audit an existing allocation against a freshly computed baseline.
    Audit {
        /// Instance file (JSON).
        #[arg(long)]
        input: PathBuf,
        /// Allocation file: solve output or a bare {object: agent} map.
        #[arg(long)]
        allocation: PathBuf,
        #[arg(long, value_enum, default_value_t = CriterionArg::Egalitarian)]
        criterion: CriterionArg,
    },
    /// Brute-force the discrete egalitarian optimum by enumeration.
    Oracle {
        /// Instance file (JSON).
        #[arg(long)]
        input: PathBuf,
        /// Refuse instances with more discrete allocations than this.
        #[arg(long, default_value_t = 1_000_000)]
        limit: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Egalitarian,
    Proportional,
}

impl From<CriterionArg> for Criterion {
    fn from(arg: CriterionArg) -> Self {
        match arg {
            CriterionArg::Egalitarian => Criterion::Egalitarian,
            CriterionArg::Proportional => Criterion::Proportional,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ForestMethodArg {
    Simplex,
    Iterative,
    Both,
}

impl From<ForestMethodArg> for ForestMethod {
    fn from(arg: ForestMethodArg) -> Self {
        match arg {
            ForestMethodArg::Simplex => ForestMethod::Simplex,
            ForestMethodArg::Iterative => ForestMethod::Iterative,
            ForestMethodArg::Both => ForestMethod::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Goods,
    Chores,
    Mixed,
    #[value(alias = "partition_hard")]
    PartitionHard,
}

impl From<KindArg> for InstanceKind {
    fn from(arg: KindArg) -> Self {
        match arg {
            KindArg::Goods => InstanceKind::Goods,
            KindArg::Chores => InstanceKind::Chores,
            KindArg::Mixed => InstanceKind::Mixed,
            KindArg::PartitionHard => InstanceKind::PartitionHard,
        }
    }
}

fn parse_range(text: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| "expected LO:HI".to_string())?;
    let lo = lo.parse().map_err(|_| format!("bad lower bound {lo:?}"))?;
    let hi = hi.parse().map_err(|_| format!("bad upper bound {hi:?}"))?;
    Ok((lo, hi))
}

fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|err| format!("cannot read {}: {err}", path.display()))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), String> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|err| format!("cannot write {}: {err}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run() -> Result<bool, String> {
    match Cli::parse().command {
        Command::Solve {
            input,
            criterion,
            forest_method,
            split_components,
            trace,
            output,
        } => {
            let instance = parse_instance(&read_file(&input)?).map_err(|e| e.to_string())?;
            let config = PipelineConfig {
                criterion: criterion.into(),
                forest_method: forest_method.into(),
                split_components,
                emit_trace: trace,
                ..PipelineConfig::default()
            };
            let run = run_pipeline(&instance, &config).map_err(|e| e.to_string())?;
            let document = solve_document(&instance, &run, config.emit_report);
            emit(&to_json_pretty(&document), output.as_deref())?;
            Ok(run.report.certificates_pass())
        }
        Command::Generate {
            kind,
            agents,
            objects,
            range,
            seed,
            output,
        } => {
            let instance = generate_instance(kind.into(), agents, objects, range, seed)
                .map_err(|e| e.to_string())?;
            emit(&instance_to_json(&instance), output.as_deref())?;
            Ok(true)
        }
        Command::Audit {
            input,
            allocation,
            criterion,
        } => {
            let instance = parse_instance(&read_file(&input)?).map_err(|e| e.to_string())?;
            let given =
                parse_allocation(&read_file(&allocation)?, &instance).map_err(|e| e.to_string())?;
            let criterion: Criterion = criterion.into();
            let (baseline, egalitarian_value) = match criterion {
                Criterion::Egalitarian => {
                    let (baseline, value) = egalitarian_fractional(&instance);
                    (baseline, Some(value))
                }
                Criterion::Proportional => (proportional_fractional(&instance), None),
            };
            let mut report = audit(&instance, &baseline, &given, criterion);
            report.egalitarian_value = egalitarian_value;
            let passed = report.certificates_pass();
            let document = SolveDocument {
                allocation: given
                    .owners()
                    .iter()
                    .enumerate()
                    .map(|(o, &owner)| {
                        (
                            instance.object_names()[o].clone(),
                            instance.agent_names()[owner].clone(),
                        )
                    })
                    .collect(),
                report: Some(report_document(&instance, &report)),
                certificates: Certificates {
                    fpo: report.fpo_certified,
                    up_to_one: report.all_up_to_one(),
                },
                trace: None,
            };
            emit(&to_json_pretty(&document), None)?;
            Ok(passed)
        }
        Command::Oracle { input, limit } => {
            let instance = parse_instance(&read_file(&input)?).map_err(|e| e.to_string())?;
            let (allocation, value) =
                brute_force_egalitarian(&instance, limit).map_err(|e| e.to_string())?;
            #[derive(serde::Serialize)]
            struct OracleDocument {
                value: String,
                allocation: BTreeMap<String, String>,
            }
            let document = OracleDocument {
                value: format_rational(&value),
                allocation: allocation
                    .owners()
                    .iter()
                    .enumerate()
                    .map(|(o, &owner)| {
                        (
                            instance.object_names()[o].clone(),
                            instance.agent_names()[owner].clone(),
                        )
                    })
                    .collect(),
            };
            emit(&to_json_pretty(&document), None)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
