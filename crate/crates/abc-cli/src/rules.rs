//! Rule-string parsing.
//!
//! Accepted names: `av`, `pav`, `ccav`, `sav`, `thiele:<file>`,
//! `general:<file>` (exhaustive scoring rules) and `seqav`, `seqpav`,
//! `seqccav`, `seqthiele:<file>`, `phragmen`, `phragmen-money`, `mes`,
//! `mes:phase1` (sequential rules). The file behind `thiele:` holds one
//! rational per line, `s(0)` first; the file behind `general:` holds one
//! row per ballot size, `y + 1` whitespace-separated rationals in row `y`.

use std::fs;
use std::path::Path;

use abc_core::rational::parse_rational;
use abc_core::{ElectionRule, Rational, ScoringFunction, SequentialRule};
use anyhow::{bail, Context, Result};

/// Parses `spec` into a rule. `cap` must cover every intersection size
/// and ballot size the instance can produce; callers pass
/// `max(k, largest ballot)`.
pub fn parse_rule(spec: &str, cap: usize) -> Result<ElectionRule> {
    if let Some(seq) = parse_sequential(spec, cap)? {
        return Ok(ElectionRule::Sequential(seq));
    }
    let scoring = match spec {
        "av" => ScoringFunction::av(cap),
        "pav" => ScoringFunction::pav(cap),
        "ccav" => ScoringFunction::ccav(cap),
        "sav" => ScoringFunction::sav(cap),
        _ => {
            if let Some(path) = spec.strip_prefix("thiele:") {
                thiele_from_file(path)?
            } else if let Some(path) = spec.strip_prefix("general:") {
                general_from_file(path)?
            } else {
                bail!(
                    "unknown rule `{spec}` (expected av, pav, ccav, sav, thiele:<file>, \
                     general:<file>, seqav, seqpav, seqccav, seqthiele:<file>, phragmen, \
                     phragmen-money, mes, or mes:phase1)"
                );
            }
        }
    };
    Ok(ElectionRule::Scoring(scoring))
}

/// Like [`parse_rule`] but only accepts sequential rules; used by the
/// verbs that need branch traces or query-stage checks.
pub fn parse_sequential_rule(spec: &str, cap: usize) -> Result<SequentialRule> {
    match parse_sequential(spec, cap)? {
        Some(rule) => Ok(rule),
        None => bail!("`{spec}` is not a sequential rule"),
    }
}

fn parse_sequential(spec: &str, cap: usize) -> Result<Option<SequentialRule>> {
    Ok(Some(match spec {
        "seqav" => SequentialRule::seq_av(cap),
        "seqpav" => SequentialRule::seq_pav(cap),
        "seqccav" => SequentialRule::seq_ccav(cap),
        "phragmen" => SequentialRule::Phragmen,
        "phragmen-money" => SequentialRule::PhragmenMoney,
        "mes" => SequentialRule::mes(),
        "mes:phase1" => SequentialRule::mes_phase_one(),
        _ => match spec.strip_prefix("seqthiele:") {
            Some(path) => SequentialRule::Thiele(thiele_from_file(path)?),
            None => return Ok(None),
        },
    }))
}

fn rule_file_name(path: &str) -> String {
    Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string())
}

fn read_rationals(path: &str) -> Result<Vec<Vec<Rational>>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading `{path}`"))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<Rational>, String> =
            line.split_whitespace().map(parse_rational).collect();
        rows.push(row.map_err(|e| anyhow::anyhow!("{path} line {}: {e}", idx + 1))?);
    }
    Ok(rows)
}

fn thiele_from_file(path: &str) -> Result<ScoringFunction> {
    let rows = read_rationals(path)?;
    let mut values = Vec::new();
    for row in rows {
        values.extend(row);
    }
    ScoringFunction::thiele(rule_file_name(path), values)
        .with_context(|| format!("invalid Thiele sequence in `{path}`"))
}

fn general_from_file(path: &str) -> Result<ScoringFunction> {
    let rows = read_rationals(path)?;
    ScoringFunction::general(rule_file_name(path), rows)
        .with_context(|| format!("invalid scoring table in `{path}`"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_names_parse() {
        for name in ["av", "pav", "ccav", "sav"] {
            assert!(matches!(
                parse_rule(name, 3).unwrap(),
                ElectionRule::Scoring(_)
            ));
        }
        for name in ["seqav", "seqpav", "seqccav", "phragmen", "mes", "mes:phase1"] {
            assert!(matches!(
                parse_rule(name, 3).unwrap(),
                ElectionRule::Sequential(_)
            ));
        }
        assert!(parse_rule("borda", 3).is_err());
        assert!(parse_sequential_rule("pav", 3).is_err());
    }
}
