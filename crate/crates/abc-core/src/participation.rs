//! Abstention analysis: can voters end up better off by not showing up?
//!
//! Outcomes are committee *sets*, so "better off" uses Kelly's extension
//! of preferences: a voter prefers outcome X to outcome Y when her worst
//! committee in X approves at least as many of her candidates as her best
//! committee in Y (strictly, when additionally some pair is strictly
//! better). A participation witness records a profile, an abstaining
//! (multi)set of voters, and the before/after outcomes with the abstained
//! ballot strictly preferring "after".

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::model::{CandidateId, Committee, ElectionInstance, ModelError, Outcome, Profile};
use crate::rule::{ElectionRule, RunConfig};
use crate::sequential::EngineError;

#[derive(Debug, thiserror::Error)]
pub enum ParticipationError {
    #[error("every voter would abstain, leaving an empty election")]
    AllVotersAbstain,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Kelly comparison of two outcomes from one ballot's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KellyComparison {
    /// Weakly preferred, with at least one strictly better pair.
    Strict,
    /// Every committee of X at least matches every committee of Y.
    Weak,
    /// Incomparable (some committee of X is worse than some of Y).
    None,
}

/// Compares outcome `x` against outcome `y` for a voter with `ballot`.
pub fn kelly_compare(x: &Outcome, y: &Outcome, ballot: &BTreeSet<CandidateId>) -> KellyComparison {
    if x.min_approvals(ballot) < y.max_approvals(ballot) {
        return KellyComparison::None;
    }
    if x.max_approvals(ballot) > y.min_approvals(ballot) {
        KellyComparison::Strict
    } else {
        KellyComparison::Weak
    }
}

/// A successful abstention: the recorded voters leave, and the departed
/// ballot strictly prefers the new outcome under Kelly's extension.
#[derive(Debug, Clone)]
pub struct AbstentionWitness {
    /// Abstaining voters as (group index in the original profile, count).
    pub abstainers: Vec<(usize, u64)>,
    /// Ballot of a strictly benefiting abstainer.
    pub ballot: BTreeSet<CandidateId>,
    pub outcome_before: Outcome,
    pub outcome_after: Outcome,
    /// `|W ∩ ballot|` per committee of `outcome_before`, in order.
    pub approvals_before: Vec<usize>,
    /// Likewise for `outcome_after`.
    pub approvals_after: Vec<usize>,
}

fn approval_counts(outcome: &Outcome, ballot: &BTreeSet<CandidateId>) -> Vec<usize> {
    outcome.iter().map(|w| w.approved_count(ballot)).collect()
}

/// Shared core: runs the rule on the reduced profile and decides whether
/// the abstainers benefit (all weakly, at least one strictly).
fn evaluate_abstention(
    rule: &ElectionRule,
    instance: &ElectionInstance,
    before: &Outcome,
    abstainers: &[(usize, u64)],
    config: &RunConfig,
) -> Result<Option<AbstentionWitness>, ParticipationError> {
    let total: u64 = abstainers.iter().map(|&(_, c)| c).sum();
    if total >= instance.profile.n() {
        return Err(ParticipationError::AllVotersAbstain);
    }
    let reduced = instance.profile.abstain_many(abstainers)?;
    let after = rule.outcomes(&ElectionInstance::new(reduced, instance.k)?, config)?;
    let mut strict_group: Option<usize> = None;
    for &(g, _) in abstainers {
        let ballot = &instance.profile.group(g).ballot;
        match kelly_compare(&after, before, ballot) {
            KellyComparison::None => return Ok(None),
            KellyComparison::Weak => {}
            KellyComparison::Strict => {
                if strict_group.is_none() {
                    strict_group = Some(g);
                }
            }
        }
    }
    let Some(g) = strict_group else {
        return Ok(None);
    };
    let ballot = instance.profile.group(g).ballot.clone();
    Ok(Some(AbstentionWitness {
        abstainers: abstainers.to_vec(),
        approvals_before: approval_counts(before, &ballot),
        approvals_after: approval_counts(&after, &ballot),
        ballot,
        outcome_before: before.clone(),
        outcome_after: after,
    }))
}

/// Do `count` voters of `group` benefit by abstaining together?
pub fn benefits_by_abstaining(
    rule: &ElectionRule,
    instance: &ElectionInstance,
    group: usize,
    count: u64,
    config: &RunConfig,
) -> Result<Option<AbstentionWitness>, ParticipationError> {
    let before = rule.outcomes(instance, config)?;
    evaluate_abstention(rule, instance, &before, &[(group, count)], config)
}

/// Does the given multiset of voters benefit by abstaining together
/// (everyone weakly, someone strictly)?
pub fn group_benefits(
    rule: &ElectionRule,
    instance: &ElectionInstance,
    abstainers: &[(usize, u64)],
    config: &RunConfig,
) -> Result<Option<AbstentionWitness>, ParticipationError> {
    let before = rule.outcomes(instance, config)?;
    evaluate_abstention(rule, instance, &before, abstainers, config)
}

/// Checks every single voter (one per group, in group order) and returns
/// all abstention witnesses. Groups whose departure would empty the
/// election are skipped.
pub fn scan_participation(
    rule: &ElectionRule,
    instance: &ElectionInstance,
    config: &RunConfig,
) -> Result<Vec<AbstentionWitness>, ParticipationError> {
    if instance.profile.n() <= 1 {
        return Ok(Vec::new());
    }
    let before = rule.outcomes(instance, config)?;
    let groups: Vec<usize> = (0..instance.profile.groups().len()).collect();
    let results: Result<Vec<_>, ParticipationError> = groups
        .par_iter()
        .map(|&g| evaluate_abstention(rule, instance, &before, &[(g, 1)], config))
        .collect();
    Ok(results?.into_iter().flatten().collect())
}

/// Enumerates all abstainer multisets of total size 1..=`max_total`
/// (component counts bounded by group weights, never all voters) in
/// lexicographic order and returns every witness found.
pub fn scan_group_benefits(
    rule: &ElectionRule,
    instance: &ElectionInstance,
    max_total: u64,
    config: &RunConfig,
) -> Result<Vec<AbstentionWitness>, ParticipationError> {
    let before = rule.outcomes(instance, config)?;
    let mut multisets: Vec<Vec<(usize, u64)>> = Vec::new();
    let groups = instance.profile.groups();
    let mut current: Vec<(usize, u64)> = Vec::new();
    fn build(
        groups: &[crate::model::BallotGroup],
        from: usize,
        left: u64,
        current: &mut Vec<(usize, u64)>,
        out: &mut Vec<Vec<(usize, u64)>>,
    ) {
        if !current.is_empty() {
            out.push(current.clone());
        }
        for g in from..groups.len() {
            let cap = groups[g].weight.min(left);
            for count in 1..=cap {
                current.push((g, count));
                build(groups, g + 1, left - count, current, out);
                current.pop();
            }
        }
    }
    build(groups, 0, max_total, &mut current, &mut multisets);
    multisets.retain(|ms| ms.iter().map(|&(_, c)| c).sum::<u64>() < instance.profile.n());
    let results: Result<Vec<_>, ParticipationError> = multisets
        .par_iter()
        .map(|ms| evaluate_abstention(rule, instance, &before, ms, config))
        .collect();
    Ok(results?.into_iter().flatten().collect())
}

/// Participation check restricted to unrepresented voters: only groups
/// with some winning committee disjoint from their ballot are tested.
/// Returns the first witness in group order.
pub fn unrepresented_check(
    rule: &ElectionRule,
    instance: &ElectionInstance,
    config: &RunConfig,
) -> Result<Option<AbstentionWitness>, ParticipationError> {
    let before = rule.outcomes(instance, config)?;
    if instance.profile.n() <= 1 {
        return Ok(None);
    }
    for (g, group) in instance.profile.groups().iter().enumerate() {
        if before.min_approvals(&group.ballot) > 0 {
            continue;
        }
        if let Some(w) = evaluate_abstention(rule, instance, &before, &[(g, 1)], config)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Is `claimed` exactly the rule's outcome on `instance`?
pub fn is_outcome(
    rule: &ElectionRule,
    instance: &ElectionInstance,
    claimed: &BTreeSet<Committee>,
    config: &RunConfig,
) -> Result<bool, ParticipationError> {
    let outcome = rule.outcomes(instance, config)?;
    Ok(outcome.committees() == claimed)
}

/// Best case for a group over the winning committees: the maximum number
/// of its approved candidates in any single winner.
pub fn max_approvals(
    rule: &ElectionRule,
    instance: &ElectionInstance,
    group: usize,
    config: &RunConfig,
) -> Result<usize, ParticipationError> {
    let outcome = rule.outcomes(instance, config)?;
    Ok(outcome.max_approvals(&instance.profile.group(group).ballot))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApprovalChange {
    Added,
    Removed,
}

/// A single added or deleted approval that moves the outcome.
#[derive(Debug, Clone)]
pub struct RobustnessWitness {
    pub group: usize,
    pub candidate: CandidateId,
    pub change: ApprovalChange,
    pub outcome_before: Outcome,
    pub outcome_after: Outcome,
}

/// Tries every single-approval modification — one voter split off a group
/// with one candidate added to (or deleted from) her ballot — in
/// deterministic order (groups ascending, candidates ascending; deletions
/// only when the ballot stays non-empty). Returns the first modification
/// that changes the outcome.
pub fn single_approval_robustness(
    rule: &ElectionRule,
    instance: &ElectionInstance,
    config: &RunConfig,
) -> Result<Option<RobustnessWitness>, ParticipationError> {
    let before = rule.outcomes(instance, config)?;
    let profile = &instance.profile;
    for (g, group) in profile.groups().iter().enumerate() {
        for c in 0..profile.m() {
            let removing = group.ballot.contains(&c);
            if removing && group.ballot.len() == 1 {
                continue;
            }
            let mut ballot = group.ballot.clone();
            if removing {
                ballot.remove(&c);
            } else {
                ballot.insert(c);
            }
            let mut groups: Vec<crate::model::BallotGroup> = profile.groups().to_vec();
            groups[g].weight -= 1; // weight 0 is dropped by normalization
            groups.push(crate::model::BallotGroup {
                ballot,
                weight: 1,
            });
            let modified = Profile::new(profile.m(), groups)?;
            let after = rule.outcomes(&ElectionInstance::new(modified, instance.k)?, config)?;
            if after != before {
                return Ok(Some(RobustnessWitness {
                    group: g,
                    candidate: c,
                    change: if removing {
                        ApprovalChange::Removed
                    } else {
                        ApprovalChange::Added
                    },
                    outcome_before: before,
                    outcome_after: after,
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::ScoringFunction;
    use crate::sequential::SequentialRule;

    fn outcome(committees: &[&[usize]]) -> Outcome {
        Outcome::new(
            committees
                .iter()
                .map(|c| Committee::new(c.iter().copied())),
        )
        .unwrap()
    }

    fn ballot(cs: &[usize]) -> BTreeSet<usize> {
        cs.iter().copied().collect()
    }

    #[test]
    fn kelly_identity_is_weak_not_strict() {
        let x = outcome(&[&[0, 1]]);
        assert_eq!(kelly_compare(&x, &x, &ballot(&[0])), KellyComparison::Weak);
    }

    #[test]
    fn kelly_strict_when_every_pair_improves() {
        let x = outcome(&[&[0, 1]]);
        let y = outcome(&[&[2, 3]]);
        assert_eq!(
            kelly_compare(&x, &y, &ballot(&[0])),
            KellyComparison::Strict
        );
    }

    #[test]
    fn kelly_none_when_some_pair_regresses() {
        let x = outcome(&[&[0], &[1]]);
        let y = outcome(&[&[0]]);
        assert_eq!(kelly_compare(&x, &y, &ballot(&[0])), KellyComparison::None);
    }

    #[test]
    fn av_never_rewards_abstaining_here() {
        let p = Profile::from_raw(
            3,
            vec![(vec![0, 1], 2), (vec![1, 2], 2), (vec![0], 1), (vec![2], 2)],
        )
        .unwrap();
        let instance = ElectionInstance::new(p, 2).unwrap();
        let rule = ElectionRule::Scoring(ScoringFunction::av(2));
        let config = RunConfig::default();
        let witnesses = scan_participation(&rule, &instance, &config).unwrap();
        assert!(witnesses.is_empty());
    }

    #[test]
    fn reported_witnesses_satisfy_the_kelly_invariant() {
        let p = Profile::from_raw(3, vec![(vec![0, 1], 2), (vec![1, 2], 1), (vec![2], 1)]).unwrap();
        let instance = ElectionInstance::new(p, 2).unwrap();
        let rule = ElectionRule::Sequential(SequentialRule::seq_pav(2));
        let config = RunConfig::default();
        for g in 0..instance.profile.groups().len() {
            let w = benefits_by_abstaining(&rule, &instance, g, 1, &config).unwrap();
            if let Some(w) = w {
                assert_eq!(
                    kelly_compare(&w.outcome_after, &w.outcome_before, &w.ballot),
                    KellyComparison::Strict
                );
            }
        }
    }

    #[test]
    fn all_voters_abstaining_is_an_error() {
        let p = Profile::from_raw(2, vec![(vec![0], 1), (vec![1], 1)]).unwrap();
        let instance = ElectionInstance::new(p, 1).unwrap();
        let rule = ElectionRule::Scoring(ScoringFunction::av(1));
        let err = group_benefits(&rule, &instance, &[(0, 1), (1, 1)], &RunConfig::default())
            .unwrap_err();
        assert!(matches!(err, ParticipationError::AllVotersAbstain));
    }

    #[test]
    fn multiset_scan_covers_sizes_and_respects_weights() {
        let p = Profile::from_raw(2, vec![(vec![0], 2), (vec![1], 1)]).unwrap();
        let instance = ElectionInstance::new(p, 1).unwrap();
        let rule = ElectionRule::Scoring(ScoringFunction::av(1));
        // Total n = 3 voters; multisets of size ≤ 3 excluding all-voters.
        let out = scan_group_benefits(&rule, &instance, 3, &RunConfig::default()).unwrap();
        assert!(out.is_empty()); // AV: no abstention ever helps
    }

    #[test]
    fn verify_outcome_checks_exact_equality() {
        let p = Profile::from_raw(3, vec![(vec![0], 1), (vec![1], 1), (vec![2], 1)]).unwrap();
        let instance = ElectionInstance::new(p, 1).unwrap();
        let rule = ElectionRule::Scoring(ScoringFunction::av(1));
        let config = RunConfig::default();
        let all: BTreeSet<Committee> = (0..3).map(|c| Committee::new([c])).collect();
        assert!(is_outcome(&rule, &instance, &all, &config).unwrap());
        let partial: BTreeSet<Committee> = [Committee::new([0])].into();
        assert!(!is_outcome(&rule, &instance, &partial, &config).unwrap());
    }

    #[test]
    fn max_approvals_sees_the_best_winning_committee() {
        let p = Profile::from_raw(3, vec![(vec![0, 1], 1), (vec![2], 1)]).unwrap();
        let instance = ElectionInstance::new(p, 2).unwrap();
        let rule = ElectionRule::Scoring(ScoringFunction::av(2));
        // AV scores: {0,1}: 2, {0,2}: 2, {1,2}: 2 — all tied.
        assert_eq!(
            max_approvals(&rule, &instance, 0, &RunConfig::default()).unwrap(),
            2
        );
        assert_eq!(
            max_approvals(&rule, &instance, 1, &RunConfig::default()).unwrap(),
            1
        );
    }

    #[test]
    fn adding_an_approval_can_force_a_tie() {
        // 1×{a}, m=2, k=1 under AV: adding b to the ballot ties {a} with {b}.
        let p = Profile::from_raw(2, vec![(vec![0], 1)]).unwrap();
        let instance = ElectionInstance::new(p, 1).unwrap();
        let rule = ElectionRule::Scoring(ScoringFunction::av(2));
        let w = single_approval_robustness(&rule, &instance, &RunConfig::default())
            .unwrap()
            .expect("adding 1 changes the outcome");
        assert_eq!(w.group, 0);
        assert_eq!(w.candidate, 1);
        assert_eq!(w.change, ApprovalChange::Added);
        assert_eq!(w.outcome_after.len(), 2);
    }

    #[test]
    fn robust_landslide_has_no_single_approval_witness() {
        // Candidate 0 leads by more than any single approval can move.
        let p = Profile::from_raw(2, vec![(vec![0], 5), (vec![1], 1)]).unwrap();
        let instance = ElectionInstance::new(p, 1).unwrap();
        let rule = ElectionRule::Scoring(ScoringFunction::av(1));
        assert!(single_approval_robustness(&rule, &instance, &RunConfig::default())
            .unwrap()
            .is_none());
    }
}
