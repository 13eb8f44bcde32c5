//! Structural checks on sequential rule behavior: standardness of the
//! first pick, tie-concurrence between equally-supported candidates, and a
//! continuity probe comparing a profile against a scaled-up perturbation.

use std::collections::BTreeSet;

use crate::model::{CandidateId, Profile};
use crate::sequential::{ApplyError, EngineError, SeqState, SequentialRule, StepResult};

/// Evaluates the rule's query on `state`, transparently crossing the
/// Phase-1 → Phase-2 boundary. Returns the (possibly transitioned) state
/// and the sorted query set: the tie set, the full unchosen set when the
/// rule has no buyer, or the empty set when a Phase-1-only rule stops.
fn query(
    rule: &SequentialRule,
    profile: &Profile,
    state: &SeqState,
) -> Result<(SeqState, Vec<CandidateId>), EngineError> {
    let mut st = state.clone();
    loop {
        match rule.step(profile, &st)? {
            StepResult::Tie(step) => return Ok((st, step.tied)),
            StepResult::NoBuyer { unchosen } => return Ok((st, unchosen)),
            StepResult::PhaseOneComplete => {
                if rule.phase_one_only() {
                    return Ok((st, Vec::new()));
                }
                st = st.enter_phase_two();
            }
        }
    }
}

/// Applies a choice the rule did not necessarily make on its own. The
/// purchase uses the rule's own mechanics where they are defined: a
/// candidate without approvers is added for free, and an unaffordable
/// Phase-1 candidate forces the phase transition only when nothing at all
/// is affordable (otherwise the walk is undefined).
fn forced_apply(
    rule: &SequentialRule,
    profile: &Profile,
    state: &SeqState,
    c: CandidateId,
) -> Result<SeqState, EngineError> {
    let mut st = state.clone();
    loop {
        match rule.apply(profile, &st, c) {
            Ok(next) => return Ok(next),
            Err(ApplyError::NoSupporters { .. }) => return Ok(st.with_choice_only(c)),
            Err(ApplyError::Unaffordable { .. }) => match rule.step(profile, &st)? {
                StepResult::PhaseOneComplete if !rule.phase_one_only() => {
                    st = st.enter_phase_two();
                }
                _ => return Err(EngineError::ForcedStepUndefined { candidate: c }),
            },
            Err(ApplyError::Scoring(e)) => return Err(e.into()),
        }
    }
}

/// A rule is standard when its first pick set, for every committee size,
/// is exactly the set of approval-score maximizers.
pub fn check_standardness(
    rule: &SequentialRule,
    profile: &Profile,
    k: usize,
) -> Result<bool, EngineError> {
    let state = rule.initial_state(profile, k);
    let (_, set) = query(rule, profile, &state)?;
    let scores = profile.approval_scores();
    let best = scores.iter().max().copied().unwrap_or(0);
    let winners: Vec<CandidateId> = (0..profile.m())
        .filter(|&c| scores[c] == best)
        .collect();
    Ok(set == winners)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConcurrenceOutcome {
    /// The instance does not satisfy the check's premises; the reason says
    /// which one failed.
    PremiseFails(String),
    Holds,
    Violated,
}

/// Tie-concurrence check. Premises: all ballots have at most two
/// candidates, every candidate has the same approval score `q` with
/// `q·k ≤ n`, and `seq` is a pick sequence the rule can actually produce,
/// leaving `c` and `d` unchosen. If, for every already-picked `e`, the
/// ballot `{e, d}` has at least the weight of `{e, c}` — strictly for at
/// least one `e` — then `d`'s supporters are strictly better served by
/// the picks so far than `c`'s, and a concurring rule must not offer `d`
/// as a next pick.
pub fn check_concurrence(
    rule: &SequentialRule,
    profile: &Profile,
    k: usize,
    seq: &[CandidateId],
    c: CandidateId,
    d: CandidateId,
) -> Result<ConcurrenceOutcome, EngineError> {
    let fail = |msg: String| Ok(ConcurrenceOutcome::PremiseFails(msg));
    if c == d {
        return fail("the compared candidates must be distinct".into());
    }
    if seq.len() >= k {
        return fail(format!("sequence already has {} of {k} picks", seq.len()));
    }
    if seq.contains(&c) || seq.contains(&d) {
        return fail("compared candidates must be unchosen".into());
    }
    if let Some(g) = profile.groups().iter().find(|g| g.ballot.len() > 2) {
        return fail(format!("a ballot has {} candidates (max 2)", g.ballot.len()));
    }
    let scores = profile.approval_scores();
    let q = scores[0];
    if scores.iter().any(|&s| s != q) {
        return fail("approval scores are not all equal".into());
    }
    if q * (k as u64) > profile.n() {
        return fail(format!(
            "approval score {q} exceeds n/k = {}/{k}",
            profile.n()
        ));
    }
    // Replay the sequence, requiring each pick to be available.
    let mut state = rule.initial_state(profile, k);
    for (i, &e) in seq.iter().enumerate() {
        if state.chosen_contains(e) {
            return fail(format!("candidate {e} picked twice"));
        }
        let (st, set) = query(rule, profile, &state)?;
        if !set.contains(&e) {
            return fail(format!("candidate {e} is not an allowed pick at step {}", i + 1));
        }
        state = forced_apply(rule, profile, &st, e)?;
    }
    // Pairwise dominance of d over c against every picked candidate.
    let pair_weight = |x: CandidateId, y: CandidateId| -> u64 {
        let ballot: BTreeSet<CandidateId> = [x, y].into_iter().collect();
        profile
            .group_index(&ballot)
            .map(|g| profile.group(g).weight)
            .unwrap_or(0)
    };
    let mut strict = false;
    for &e in seq {
        let with_d = pair_weight(e, d);
        let with_c = pair_weight(e, c);
        if with_d < with_c {
            return fail(format!(
                "ballot {{{e},{d}}} has weight {with_d} < {with_c} of {{{e},{c}}}"
            ));
        }
        if with_d > with_c {
            strict = true;
        }
    }
    if !strict {
        return fail("no strict dominance anywhere in the sequence".into());
    }
    let (_, set) = query(rule, profile, &state)?;
    if set.contains(&d) {
        Ok(ConcurrenceOutcome::Violated)
    } else {
        Ok(ConcurrenceOutcome::Holds)
    }
}

/// Continuity probe at a fixed multiplier: walks every pick sequence the
/// rule allows on `a` and checks that on `λ·a + a_prime` the query set at
/// each forced prefix stays inside the query set on `a`. Returns the first
/// prefix where containment fails, or `None`. `max_nodes` caps the walk.
pub fn check_continuity_at(
    rule: &SequentialRule,
    a: &Profile,
    a_prime: &Profile,
    k: usize,
    lambda: u64,
    max_nodes: u64,
) -> Result<Option<Vec<CandidateId>>, EngineError> {
    let star = a.scale(lambda)?.add(a_prime)?;
    let mut nodes: u64 = 0;
    let state_a = rule.initial_state(a, k);
    let state_star = rule.initial_state(&star, k);
    walk(
        rule, a, &star, k, &mut nodes, max_nodes, state_a, state_star, &mut Vec::new(),
    )
}

#[allow(clippy::too_many_arguments)]
fn walk(
    rule: &SequentialRule,
    a: &Profile,
    star: &Profile,
    k: usize,
    nodes: &mut u64,
    max_nodes: u64,
    state_a: SeqState,
    state_star: SeqState,
    prefix: &mut Vec<CandidateId>,
) -> Result<Option<Vec<CandidateId>>, EngineError> {
    *nodes += 1;
    if *nodes > max_nodes {
        return Err(EngineError::BranchExplosion {
            explored: *nodes,
            cap: max_nodes,
        });
    }
    if prefix.len() >= k {
        return Ok(None);
    }
    let (st_a, set_a) = query(rule, a, &state_a)?;
    let (st_star, set_star) = query(rule, star, &state_star)?;
    if set_star.iter().any(|c| !set_a.contains(c)) {
        return Ok(Some(prefix.clone()));
    }
    for &e in &set_a {
        let child_a = forced_apply(rule, a, &st_a, e)?;
        let child_star = forced_apply(rule, star, &st_star, e)?;
        prefix.push(e);
        let hit = walk(
            rule, a, star, k, nodes, max_nodes, child_a, child_star, prefix,
        )?;
        prefix.pop();
        if hit.is_some() {
            return Ok(hit);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Profile;

    fn concurrence_profile() -> Profile {
        Profile::from_raw(
            3,
            vec![(vec![0, 1], 1), (vec![1, 2], 1), (vec![0], 1), (vec![2], 1)],
        )
        .unwrap()
    }

    #[test]
    fn common_rules_are_standard_here() {
        let p = concurrence_profile();
        for rule in [
            SequentialRule::seq_av(2),
            SequentialRule::seq_pav(2),
            SequentialRule::seq_ccav(2),
            SequentialRule::Phragmen,
            SequentialRule::mes(),
        ] {
            assert!(check_standardness(&rule, &p, 2).unwrap(), "{}", rule.name());
        }
    }

    #[test]
    fn phase_one_only_mes_is_not_standard_when_nothing_is_affordable() {
        // k/n = 1/2 budgets and approval scores of 1: nothing reaches 1.
        let p = Profile::from_raw(2, vec![(vec![0], 1), (vec![1], 1)]).unwrap();
        let rule = SequentialRule::mes_phase_one();
        assert!(!check_standardness(&rule, &p, 1).unwrap());
    }

    #[test]
    fn seq_pav_concurs_on_the_pair_profile() {
        let p = concurrence_profile();
        let rule = SequentialRule::seq_pav(2);
        // After picking 2, the {1,2} voter is half satisfied: {2,1} has
        // weight 1 against 0 for {2,0}, so a concurring rule must not
        // offer 1. seqPAV indeed queries {0} alone.
        assert_eq!(
            check_concurrence(&rule, &p, 2, &[2], 0, 1).unwrap(),
            ConcurrenceOutcome::Holds
        );
    }

    #[test]
    fn seq_av_ignores_history_and_fails_concurrence() {
        // seqAV never discounts partially-served voters, so it still
        // offers 1 next to 0 after picking 2 — the myopic indifference
        // that lets plain AV keep participation.
        let p = concurrence_profile();
        let rule = SequentialRule::seq_av(2);
        assert_eq!(
            check_concurrence(&rule, &p, 2, &[2], 0, 1).unwrap(),
            ConcurrenceOutcome::Violated
        );
    }

    #[test]
    fn concurrence_premises_are_enforced() {
        let rule = SequentialRule::seq_av(3);
        let unbalanced =
            Profile::from_raw(3, vec![(vec![0, 1], 2), (vec![1, 2], 1), (vec![2], 1)]).unwrap();
        assert!(matches!(
            check_concurrence(&rule, &unbalanced, 2, &[0], 1, 2).unwrap(),
            ConcurrenceOutcome::PremiseFails(_)
        ));
        let wide = Profile::from_raw(3, vec![(vec![0, 1, 2], 1)]).unwrap();
        assert!(matches!(
            check_concurrence(&rule, &wide, 2, &[0], 1, 2).unwrap(),
            ConcurrenceOutcome::PremiseFails(_)
        ));
        let p = concurrence_profile();
        // Invalid replay: after 0, seqPAV queries {2} alone, so the
        // sequence (0, 1) is not reachable.
        let rule = SequentialRule::seq_pav(2);
        assert!(matches!(
            check_concurrence(&rule, &p, 3, &[0, 1], 2, 0).unwrap(),
            ConcurrenceOutcome::PremiseFails(_)
        ));
    }

    #[test]
    fn continuity_probe_finds_a_diverging_first_step() {
        // On a alone the pick is 1; adding a_prime twice flips it to 0.
        let a = Profile::from_raw(2, vec![(vec![0], 1), (vec![1], 2)]).unwrap();
        let a_prime = Profile::from_raw(2, vec![(vec![0], 2)]).unwrap();
        let rule = SequentialRule::seq_av(1);
        let hit = check_continuity_at(&rule, &a, &a_prime, 1, 1, 10_000).unwrap();
        assert_eq!(hit, Some(vec![]));
    }

    #[test]
    fn continuity_probe_passes_on_reinforcing_perturbation() {
        let a = concurrence_profile();
        let a_prime = Profile::from_raw(3, vec![(vec![1], 1)]).unwrap();
        let rule = SequentialRule::seq_av(2);
        let hit = check_continuity_at(&rule, &a, &a_prime, 2, 1, 10_000).unwrap();
        assert_eq!(hit, None);
    }
}
