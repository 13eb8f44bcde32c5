mod generate;
mod report;
mod rules;

use std::fs;
use std::io::Read;
use std::process;

use abc_core::laminar::{laminar_forest, LaminarError};
use abc_core::model::{Committee, ElectionInstance};
use abc_core::participation::{
    benefits_by_abstaining, is_outcome, scan_group_benefits, scan_participation,
    single_approval_robustness, unrepresented_check,
};
use abc_core::scoring::DEFAULT_SUBSET_CAP;
use abc_core::sequential::{check_concurrence, check_standardness, ConcurrenceOutcome};
use abc_core::{enumerate_outcomes, EngineConfig, RunConfig};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use report::Format;

/// Approval-based committee elections with exact rational arithmetic.
///
/// Exit codes: 0 — computed (check passed / no witness); 1 — check verb
/// found a witness or violation; 2 — error.
#[derive(Parser)]
#[command(name = "abc", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Format {
        match f {
            OutputFormat::Text => Format::Text,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Args)]
struct CommonOpts {
    /// Output style
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Node cap for the branching engines
    #[arg(long, default_value_t = 1_000_000)]
    max_branches: u64,
    /// Cap on exhaustive k-subset enumeration for scoring rules
    #[arg(long, default_value_t = DEFAULT_SUBSET_CAP)]
    max_subsets: u64,
    /// Worker threads for the scan verbs (0 keeps the library default)
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl CommonOpts {
    fn run_config(&self) -> RunConfig {
        RunConfig {
            engine: EngineConfig {
                max_nodes: self.max_branches,
                ..EngineConfig::default()
            },
            subset_cap: self.max_subsets,
        }
    }

    fn apply_threads(&self) {
        if self.threads > 0 {
            // Errors only when a global pool already exists, which is fine.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(self.threads)
                .build_global();
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute every winning committee of a rule on a profile
    Elect {
        /// Rule name (see `--help` of this subcommand)
        #[arg(long)]
        rule: String,
        /// Committee size; overrides the profile header
        #[arg(long)]
        k: Option<usize>,
        /// Print every branch of a sequential rule with exact keys
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        common: CommonOpts,
        /// Profile file (text or JSON); `-` reads stdin
        profile: String,
    },
    /// Search for voters who gain by abstaining
    Participation {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        k: Option<usize>,
        /// Check one ballot group instead of scanning all of them
        #[arg(long, conflicts_with_all = ["unrepresented", "group_size"])]
        group: Option<usize>,
        /// How many voters of `--group` abstain together
        #[arg(long, default_value_t = 1, requires = "group")]
        count: u64,
        /// Scan abstainer groups up to this total size
        #[arg(long, conflicts_with = "unrepresented")]
        group_size: Option<u64>,
        /// Only scan voters no winning committee represents
        #[arg(long)]
        unrepresented: bool,
        #[command(flatten)]
        common: CommonOpts,
        profile: String,
    },
    /// Check a claimed committee set against the computed outcome
    VerifyOutcome {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        common: CommonOpts,
        profile: String,
        /// JSON file: either `[[ids...], ...]` or `{"committees": [...]}`
        claimed: String,
    },
    /// Search for a single approval change that moves the outcome
    Robustness {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        common: CommonOpts,
        profile: String,
    },
    /// Test whether the ballots form a laminar family
    CheckLaminar {
        /// Write the clone-class forest as Graphviz DOT to this file
        #[arg(long)]
        dot: Option<String>,
        profile: String,
    },
    /// Write one of the built-in election families
    Generate {
        #[command(subcommand)]
        family: generate::Family,
    },
    /// Standardness and tie-concurrence checks for a sequential rule
    AxiomScan {
        /// Sequential rule name
        #[arg(long)]
        rule: String,
        #[arg(long)]
        k: Option<usize>,
        /// Comma-separated pick prefix to check concurrence after
        #[arg(long, value_delimiter = ',')]
        seq: Vec<usize>,
        #[command(flatten)]
        common: CommonOpts,
        profile: String,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            process::exit(2);
        }
    }
}

fn load_instance(path: &str, k: Option<usize>) -> Result<ElectionInstance> {
    let text = if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .context("reading stdin")?;
        buf
    } else {
        fs::read_to_string(path).with_context(|| format!("reading `{path}`"))?
    };
    let instance = ElectionInstance::from_str_any(&text)
        .with_context(|| format!("parsing `{path}`"))?;
    match k {
        None => Ok(instance),
        Some(k) => ElectionInstance::new(instance.profile, k)
            .with_context(|| format!("applying --k {k}")),
    }
}

fn rule_cap(instance: &ElectionInstance) -> usize {
    instance.k.max(instance.profile.max_ballot_size())
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Elect {
            rule,
            k,
            trace,
            common,
            profile,
        } => {
            common.apply_threads();
            let instance = load_instance(&profile, k)?;
            let config = common.run_config();
            let format = common.format.into();
            if trace {
                let rule = rules::parse_sequential_rule(&rule, rule_cap(&instance))?;
                let engine = EngineConfig {
                    collect_traces: true,
                    ..config.engine
                };
                let run = enumerate_outcomes(&rule, &instance, &engine)?;
                report::print_traces(&run.traces, format);
                report::print_outcome(&rule.name(), instance.k, &run.outcome()?, format);
            } else {
                let rule = rules::parse_rule(&rule, rule_cap(&instance))?;
                let outcome = rule.outcomes(&instance, &config)?;
                report::print_outcome(&rule.name(), instance.k, &outcome, format);
            }
            Ok(0)
        }
        Command::Participation {
            rule,
            k,
            group,
            count,
            group_size,
            unrepresented,
            common,
            profile,
        } => {
            common.apply_threads();
            let instance = load_instance(&profile, k)?;
            let config = common.run_config();
            let rule = rules::parse_rule(&rule, rule_cap(&instance))?;
            let witnesses: Vec<_> = if let Some(group) = group {
                if group >= instance.profile.groups().len() {
                    bail!(
                        "group {group} out of range (profile has {} groups)",
                        instance.profile.groups().len()
                    );
                }
                benefits_by_abstaining(&rule, &instance, group, count, &config)?
                    .into_iter()
                    .collect()
            } else if unrepresented {
                unrepresented_check(&rule, &instance, &config)?
                    .into_iter()
                    .collect()
            } else if let Some(total) = group_size {
                scan_group_benefits(&rule, &instance, total, &config)?
            } else {
                scan_participation(&rule, &instance, &config)?
            };
            report::print_abstention_witnesses(&witnesses, common.format.into());
            Ok(if witnesses.is_empty() { 0 } else { 1 })
        }
        Command::VerifyOutcome {
            rule,
            k,
            common,
            profile,
            claimed,
        } => {
            common.apply_threads();
            let instance = load_instance(&profile, k)?;
            let config = common.run_config();
            let rule = rules::parse_rule(&rule, rule_cap(&instance))?;
            let text = fs::read_to_string(&claimed)
                .with_context(|| format!("reading `{claimed}`"))?;
            let claimed_set = parse_claimed(&text)?;
            let ok = is_outcome(&rule, &instance, &claimed_set, &config)?;
            match common.format {
                OutputFormat::Text => {
                    println!("{}", if ok { "outcome matches" } else { "outcome differs" });
                    if !ok {
                        let outcome = rule.outcomes(&instance, &config)?;
                        println!("computed:");
                        for committee in outcome.iter() {
                            println!("  {committee}");
                        }
                    }
                }
                OutputFormat::Json => {
                    let value = if ok {
                        json!({ "matches": true })
                    } else {
                        json!({
                            "matches": false,
                            "computed": rule.outcomes(&instance, &config)?,
                        })
                    };
                    println!("{}", serde_json::to_string_pretty(&value).unwrap());
                }
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Robustness {
            rule,
            k,
            common,
            profile,
        } => {
            common.apply_threads();
            let instance = load_instance(&profile, k)?;
            let config = common.run_config();
            let rule = rules::parse_rule(&rule, rule_cap(&instance))?;
            let witness = single_approval_robustness(&rule, &instance, &config)?;
            report::print_robustness(witness.as_ref(), common.format.into());
            Ok(if witness.is_some() { 1 } else { 0 })
        }
        Command::CheckLaminar { dot, profile } => {
            let instance = load_instance(&profile, None)?;
            match laminar_forest(&instance.profile) {
                Ok(forest) => {
                    println!(
                        "laminar: {} candidates in {} clone classes",
                        instance.profile.m(),
                        forest.classes().len()
                    );
                    if let Some(path) = dot {
                        fs::write(&path, forest.to_dot())
                            .with_context(|| format!("writing `{path}`"))?;
                    }
                    Ok(0)
                }
                Err(e @ LaminarError::NotLaminar { .. }) => {
                    println!("{e}");
                    Ok(1)
                }
            }
        }
        Command::Generate { family } => {
            generate::run(family)?;
            Ok(0)
        }
        Command::AxiomScan {
            rule,
            k,
            seq,
            common,
            profile,
        } => {
            common.apply_threads();
            let instance = load_instance(&profile, k)?;
            let rule = rules::parse_sequential_rule(&rule, rule_cap(&instance))?;
            let profile = &instance.profile;
            let standard = check_standardness(&rule, profile, instance.k)?;
            let mut holds = 0usize;
            let mut premise_fails = 0usize;
            let mut violated: Vec<(usize, usize)> = Vec::new();
            for c in 0..profile.m() {
                for d in 0..profile.m() {
                    if c == d || seq.contains(&c) || seq.contains(&d) {
                        continue;
                    }
                    match check_concurrence(&rule, profile, instance.k, &seq, c, d)? {
                        ConcurrenceOutcome::Holds => holds += 1,
                        ConcurrenceOutcome::PremiseFails(_) => premise_fails += 1,
                        ConcurrenceOutcome::Violated => violated.push((c, d)),
                    }
                }
            }
            match common.format {
                OutputFormat::Text => {
                    println!("standardness: {}", if standard { "pass" } else { "FAIL" });
                    println!(
                        "concurrence: {} hold, {} violated, {} premise-failed",
                        holds,
                        violated.len(),
                        premise_fails
                    );
                    for (c, d) in &violated {
                        println!("  violated for candidates ({c}, {d})");
                    }
                }
                OutputFormat::Json => {
                    let value = json!({
                        "standardness": standard,
                        "concurrence": {
                            "holds": holds,
                            "premise_fails": premise_fails,
                            "violated": violated,
                        },
                    });
                    println!("{}", serde_json::to_string_pretty(&value).unwrap());
                }
            }
            Ok(if standard && violated.is_empty() { 0 } else { 1 })
        }
    }
}

fn parse_claimed(text: &str) -> Result<std::collections::BTreeSet<Committee>> {
    let value: serde_json::Value =
        serde_json::from_str(text).context("claimed outcome is not valid JSON")?;
    let list = match &value {
        serde_json::Value::Array(list) => list,
        serde_json::Value::Object(map) => match map.get("committees") {
            Some(serde_json::Value::Array(list)) => list,
            _ => bail!("claimed outcome object needs a `committees` array"),
        },
        _ => bail!("claimed outcome must be an array of committees"),
    };
    let mut out = std::collections::BTreeSet::new();
    for entry in list {
        let ids: Vec<usize> = serde_json::from_value(entry.clone())
            .context("each committee must be an array of candidate ids")?;
        out.insert(Committee::new(ids));
    }
    Ok(out)
}
