//! The `generate` subcommand: writes built-in election families as
//! profile files, with candidate roles and the designated abstainer (where
//! one exists) recorded as `#` comments that the parser skips on re-read.

use std::fs;

use abc_core::generators::{
    concurrence_instance, independent_set_reduction, mes_unrepresented_instance, noshow_family,
    planted_rx3c, rx3c_reduction, CubicGraph, ReducedInstance, Rx3cInstance,
};
use abc_core::laminar::random_laminar;
use abc_core::model::ElectionInstance;
use abc_core::scoring::ScoringFunction;
use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};

#[derive(Args)]
pub(crate) struct OutputOpts {
    /// Write the profile here instead of stdout
    #[arg(long)]
    out: Option<String>,
    /// Emit the JSON profile format instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum IndsetScoring {
    Pav,
    Ccav,
}

#[derive(Subcommand)]
pub enum Family {
    /// Three-candidate AV tie where ties must be concurred in
    Concurrence {
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Family where one voter gains under every sequential rule here
    Noshow {
        /// Committee size (at least 3)
        #[arg(long)]
        k: usize,
        /// Weight multiplier for the right-hand blocks
        #[arg(long)]
        lambda: u64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Instance where equal shares strands an unrepresented voter
    MesUnrep {
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Reduction from independent set on a cubic graph
    Indset {
        /// Edge-list file (`u v` per line), or one of: k4, k33, q3
        #[arg(long)]
        graph: String,
        /// Independent-set size the abstention question encodes
        #[arg(long)]
        t: usize,
        /// Thiele function driving the reduction weights
        #[arg(long, value_enum)]
        scoring: IndsetScoring,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Reduction from restricted exact cover by three-sets
    Rx3c {
        /// Universe size parameter (the universe has 3t elements)
        #[arg(long, conflicts_with = "sets")]
        t: Option<usize>,
        /// Seed for the planted cover
        #[arg(long, default_value_t = 0, conflicts_with = "sets")]
        seed: u64,
        /// Explicit instance file: one triple `a b c` per line
        #[arg(long)]
        sets: Option<String>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Random profile whose supporter sets are nested or disjoint
    Laminar {
        /// Number of candidates
        #[arg(long)]
        m: usize,
        /// Nesting depth of the generated forest
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Children per internal node
        #[arg(long, default_value_t = 2)]
        branching: usize,
        /// Smallest per-ballot weight
        #[arg(long, default_value_t = 1)]
        min_weight: u64,
        /// Largest per-ballot weight
        #[arg(long, default_value_t = 3)]
        max_weight: u64,
        /// Committee size written into the profile header
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        output: OutputOpts,
    },
}

pub fn run(family: Family) -> Result<()> {
    match family {
        Family::Concurrence { output } => {
            emit(&output, &concurrence_instance(), &["family: concurrence".into()])
        }
        Family::Noshow { k, lambda, output } => {
            let reduced = noshow_family(k, lambda)?;
            emit_reduced(&output, &reduced, format!("family: noshow k={k} lambda={lambda}"))
        }
        Family::MesUnrep { output } => {
            let reduced = mes_unrepresented_instance();
            emit_reduced(&output, &reduced, "family: mes-unrep".into())
        }
        Family::Indset {
            graph,
            t,
            scoring,
            output,
        } => {
            let graph = match graph.as_str() {
                "k4" => CubicGraph::k4(),
                "k33" => CubicGraph::k33(),
                "q3" => CubicGraph::q3(),
                path => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("reading `{path}`"))?;
                    CubicGraph::parse(&text)?
                }
            };
            let scoring = match scoring {
                IndsetScoring::Pav => ScoringFunction::pav(8),
                IndsetScoring::Ccav => ScoringFunction::ccav(8),
            };
            let reduced = independent_set_reduction(&graph, t, &scoring)?;
            emit_reduced(
                &output,
                &reduced,
                format!("family: indset t={t} scoring={}", scoring.name()),
            )
        }
        Family::Rx3c {
            t,
            seed,
            sets,
            output,
        } => {
            let source = match (t, sets) {
                (_, Some(path)) => {
                    let text = fs::read_to_string(&path)
                        .with_context(|| format!("reading `{path}`"))?;
                    Rx3cInstance::parse(&text)?
                }
                (Some(t), None) => planted_rx3c(t, seed),
                (None, None) => bail!("rx3c needs either --t or --sets"),
            };
            let reduced = rx3c_reduction(&source)?;
            emit_reduced(
                &output,
                &reduced,
                format!("family: rx3c t={} sets={}", source.t(), source.sets().len()),
            )
        }
        Family::Laminar {
            m,
            depth,
            branching,
            min_weight,
            max_weight,
            k,
            seed,
            output,
        } => {
            if min_weight == 0 || min_weight > max_weight {
                bail!("need 1 <= min-weight <= max-weight");
            }
            let profile = random_laminar(m, depth, branching, (min_weight, max_weight), seed);
            let instance = ElectionInstance::new(profile, k)?;
            emit(
                &output,
                &instance,
                &[format!("family: laminar m={m} depth={depth} seed={seed}")],
            )
        }
    }
}

fn emit_reduced(output: &OutputOpts, reduced: &ReducedInstance, header: String) -> Result<()> {
    let abstainer = &reduced.instance.profile.group(reduced.abstainer_group);
    let ballot: Vec<String> = abstainer.ballot.iter().map(|c| c.to_string()).collect();
    let mut comments = vec![
        header,
        format!(
            "abstainer: group {} (ballot: {})",
            reduced.abstainer_group,
            ballot.join(" ")
        ),
        "candidate roles:".into(),
    ];
    comments.extend(reduced.role_table().lines().map(String::from));
    emit(output, &reduced.instance, &comments)
}

fn emit(output: &OutputOpts, instance: &ElectionInstance, comments: &[String]) -> Result<()> {
    let body = if output.json {
        // The JSON format has no comment syntax, so metadata stays on
        // the text path only.
        let mut s = instance.to_json();
        s.push('\n');
        s
    } else {
        let mut s = String::new();
        for line in comments {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
        s.push_str(&instance.to_text());
        s
    };
    match &output.out {
        Some(path) => {
            fs::write(path, body).with_context(|| format!("writing `{path}`"))?;
        }
        None => print!("{body}"),
    }
    Ok(())
}
