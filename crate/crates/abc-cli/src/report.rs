//! Rendering of outcomes, witnesses and traces in the two output styles.
//!
//! JSON objects are emitted through `serde_json`'s default map, which
//! orders keys alphabetically, so byte-identical reruns stay diffable.
//! Every rational is printed as `p/q`.

use abc_core::model::Outcome;
use abc_core::participation::{AbstentionWitness, ApprovalChange, RobustnessWitness};
use abc_core::sequential::{StepKind, TraceStep};
use serde_json::{json, Value};

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

pub fn print_outcome(rule: &str, k: usize, outcome: &Outcome, format: Format) {
    match format {
        Format::Text => {
            println!("rule: {rule}");
            println!("k: {k}");
            println!("committees ({}):", outcome.len());
            for committee in outcome.iter() {
                println!("  {committee}");
            }
        }
        Format::Json => {
            let value = json!({
                "rule": rule,
                "k": k,
                "committees": outcome,
            });
            println!("{}", serde_json::to_string_pretty(&value).unwrap());
        }
    }
}

pub fn abstention_witness_value(w: &AbstentionWitness) -> Value {
    json!({
        "abstainers": w.abstainers,
        "ballot": w.ballot,
        "outcome_before": w.outcome_before,
        "outcome_after": w.outcome_after,
        "approvals_before": w.approvals_before,
        "approvals_after": w.approvals_after,
    })
}

pub fn print_abstention_witnesses(witnesses: &[AbstentionWitness], format: Format) {
    match format {
        Format::Text => {
            println!("witnesses: {}", witnesses.len());
            for w in witnesses {
                let abstainers: Vec<String> = w
                    .abstainers
                    .iter()
                    .map(|(g, c)| format!("{c} voter(s) of group {g}"))
                    .collect();
                println!("- abstaining: {}", abstainers.join(", "));
                let ballot: Vec<String> = w.ballot.iter().map(|c| c.to_string()).collect();
                println!("  ballot: {{{}}}", ballot.join(" "));
                println!(
                    "  before: {} committee(s), approvals {:?}",
                    w.outcome_before.len(),
                    w.approvals_before
                );
                for committee in w.outcome_before.iter() {
                    println!("    {committee}");
                }
                println!(
                    "  after:  {} committee(s), approvals {:?}",
                    w.outcome_after.len(),
                    w.approvals_after
                );
                for committee in w.outcome_after.iter() {
                    println!("    {committee}");
                }
            }
        }
        Format::Json => {
            let value: Vec<Value> = witnesses.iter().map(abstention_witness_value).collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({ "witnesses": value })).unwrap()
            );
        }
    }
}

pub fn print_robustness(witness: Option<&RobustnessWitness>, format: Format) {
    match format {
        Format::Text => match witness {
            None => println!("no single approval change moves the outcome"),
            Some(w) => {
                let verb = match w.change {
                    ApprovalChange::Added => "adding",
                    ApprovalChange::Removed => "deleting",
                };
                println!(
                    "{verb} candidate {} on one ballot of group {} changes the outcome",
                    w.candidate, w.group
                );
                println!("before:");
                for committee in w.outcome_before.iter() {
                    println!("  {committee}");
                }
                println!("after:");
                for committee in w.outcome_after.iter() {
                    println!("  {committee}");
                }
            }
        },
        Format::Json => {
            let value = match witness {
                None => json!({ "witness": Value::Null }),
                Some(w) => json!({
                    "witness": {
                        "group": w.group,
                        "candidate": w.candidate,
                        "change": match w.change {
                            ApprovalChange::Added => "added",
                            ApprovalChange::Removed => "removed",
                        },
                        "outcome_before": w.outcome_before,
                        "outcome_after": w.outcome_after,
                    }
                }),
            };
            println!("{}", serde_json::to_string_pretty(&value).unwrap());
        }
    }
}

fn kind_name(kind: Option<StepKind>) -> &'static str {
    match kind {
        Some(StepKind::Score) => "score",
        Some(StepKind::Load) => "load",
        Some(StepKind::Price) => "price",
        Some(StepKind::Time) => "time",
        None => "filler",
    }
}

pub fn print_traces(traces: &[Vec<TraceStep>], format: Format) {
    match format {
        Format::Text => {
            for (i, trace) in traces.iter().enumerate() {
                let sequence: Vec<String> =
                    trace.iter().map(|s| s.chosen.to_string()).collect();
                println!("branch {}: {}", i + 1, sequence.join(" "));
                for (j, step) in trace.iter().enumerate() {
                    let tied: Vec<String> = step.tied.iter().map(|c| c.to_string()).collect();
                    let key = step
                        .key
                        .as_ref()
                        .map(|k| k.to_string())
                        .unwrap_or_else(|| "-".into());
                    println!(
                        "  step {}: chose {} ({} {}), tied {{{}}}",
                        j + 1,
                        step.chosen,
                        kind_name(step.kind),
                        key,
                        tied.join(" ")
                    );
                }
            }
        }
        Format::Json => {
            let branches: Vec<Value> = traces
                .iter()
                .map(|trace| {
                    let steps: Vec<Value> = trace
                        .iter()
                        .map(|step| {
                            json!({
                                "chosen": step.chosen,
                                "tied": step.tied,
                                "kind": kind_name(step.kind),
                                "key": step.key.as_ref().map(|k| k.to_string()),
                            })
                        })
                        .collect();
                    json!({
                        "sequence": trace.iter().map(|s| s.chosen).collect::<Vec<_>>(),
                        "steps": steps,
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({ "branches": branches })).unwrap()
            );
        }
    }
}
