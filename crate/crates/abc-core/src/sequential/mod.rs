//! Sequential committee rules: a committee is built one candidate at a
//! time, and at every step a *query* returns the full set of tied picks.
//! The engine ([`enumerate_outcomes`]) explores every tie branch and
//! returns all committees reachable by some tie-breaking order.
//!
//! Three families of query are implemented over a shared state shape:
//!
//! * **Sequential Thiele rules** pick an argmax of marginal scores.
//! * **Phragmén's sequential method** picks an argmin of voter load,
//!   `ℓ(c) = (1 + Σ_{g ∋ c} w_g·load_g) / N(c)`; the approvers' loads are
//!   then set to `ℓ(c)`. An equivalent continuous "money" formulation
//!   ([`SequentialRule::PhragmenMoney`]) is kept as a cross-check: budgets
//!   grow at unit rate and a candidate is bought when its approvers hold a
//!   total of 1.
//! * **Method of Equal Shares** starts every voter with budget `k/n`.
//!   Phase 1 repeatedly buys, among candidates whose approvers can still
//!   raise a total price of 1, one minimizing the uniform price cap `ρ(c)`
//!   with `Σ min(ρ(c), budget_i) = 1`. When nothing is affordable the rule
//!   switches to Phase 2, the money formulation above seeded with the
//!   leftover Phase-1 budgets.
//!
//! All quantities are exact rationals, so tie sets are exact.

mod axioms;
mod engine;
pub(crate) mod symmetry;

pub use axioms::{check_concurrence, check_continuity_at, check_standardness, ConcurrenceOutcome};
pub use engine::{enumerate_outcomes, EngineConfig, EngineError, SeqRun, TraceStep};

use num_traits::One;

use crate::bitset::BitSet;
use crate::model::{CandidateId, Profile};
use crate::rational::{rat_u, zero, Rational};
use crate::scoring::{ScoringError, ScoringFunction};

/// A sequential rule, identified by its query function.
#[derive(Debug, Clone)]
pub enum SequentialRule {
    /// Sequential Thiele rule for a (Thiele) scoring function.
    Thiele(ScoringFunction),
    /// Phragmén's sequential method via the load recurrence.
    Phragmen,
    /// Phragmén's sequential method via continuous budget growth. Same
    /// rule, independently computed; used as an oracle for [`Self::Phragmen`].
    PhragmenMoney,
    /// Method of Equal Shares; `phase_one_only` stops when Phase 1 runs
    /// out of affordable candidates (committees may then be short).
    Mes { phase_one_only: bool },
}

impl SequentialRule {
    pub fn seq_av(cap: usize) -> Self {
        SequentialRule::Thiele(ScoringFunction::av(cap))
    }

    pub fn seq_pav(cap: usize) -> Self {
        SequentialRule::Thiele(ScoringFunction::pav(cap))
    }

    pub fn seq_ccav(cap: usize) -> Self {
        SequentialRule::Thiele(ScoringFunction::ccav(cap))
    }

    pub fn mes() -> Self {
        SequentialRule::Mes {
            phase_one_only: false,
        }
    }

    pub fn mes_phase_one() -> Self {
        SequentialRule::Mes {
            phase_one_only: true,
        }
    }

    pub fn name(&self) -> String {
        match self {
            SequentialRule::Thiele(s) => format!("seq-{}", s.name()),
            SequentialRule::Phragmen => "phragmen".into(),
            SequentialRule::PhragmenMoney => "phragmen-money".into(),
            SequentialRule::Mes {
                phase_one_only: false,
            } => "mes".into(),
            SequentialRule::Mes {
                phase_one_only: true,
            } => "mes-phase1".into(),
        }
    }

    pub(crate) fn phase_one_only(&self) -> bool {
        matches!(
            self,
            SequentialRule::Mes {
                phase_one_only: true
            }
        )
    }
}

/// What kind of quantity a step optimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Argmax of marginal score.
    Score,
    /// Argmin of Phragmén load.
    Load,
    /// Argmin of Phase-1 price.
    Price,
    /// Argmin of purchase time (money formulation / Phase 2).
    Time,
}

/// One resolved query: the tied candidates and their shared key.
#[derive(Debug, Clone)]
pub struct Step {
    pub tied: Vec<CandidateId>,
    pub key: Rational,
    pub kind: StepKind,
}

/// Result of evaluating a rule's query on a state.
#[derive(Debug, Clone)]
pub enum StepResult {
    Tie(Step),
    /// No candidate is affordable any more (Method of Equal Shares only).
    PhaseOneComplete,
    /// No remaining candidate has any approver, so the rule's own dynamics
    /// cannot fill the committee. The engine branches over all remaining
    /// candidates and flags the run.
    NoBuyer { unchosen: Vec<CandidateId> },
}

/// Per-group dynamic data; the variant always matches the rule (and, for
/// the Method of Equal Shares, its current phase).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleData {
    Thiele { counts: Vec<u32> },
    Phragmen { loads: Vec<Rational> },
    MesOne { budgets: Vec<Rational> },
    /// Money formulation: per group, the balance at its last reset and the
    /// time of that reset. The current balance at time `t` is
    /// `balance + (t - reset_time)` per voter.
    MesTwo { events: Vec<(Rational, Rational)> },
}

// Memo lookups hash the full per-group data on every node, so the
// rationals are hashed by their components (see `rational::hash_parts`)
// rather than through their stock division-heavy `Hash` impl.
impl std::hash::Hash for RuleData {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        use crate::rational::hash_parts;
        match self {
            RuleData::Thiele { counts } => {
                1u8.hash(state);
                counts.hash(state);
            }
            RuleData::Phragmen { loads } => {
                2u8.hash(state);
                loads.len().hash(state);
                for r in loads {
                    hash_parts(r, state);
                }
            }
            RuleData::MesOne { budgets } => {
                3u8.hash(state);
                budgets.len().hash(state);
                for r in budgets {
                    hash_parts(r, state);
                }
            }
            RuleData::MesTwo { events } => {
                4u8.hash(state);
                events.len().hash(state);
                for (balance, reset) in events {
                    hash_parts(balance, state);
                    hash_parts(reset, state);
                }
            }
        }
    }
}

/// Dynamic state of a sequential election: the chosen prefix plus the
/// rule's per-group data.
#[derive(Debug, Clone)]
pub struct SeqState {
    pub sequence: Vec<CandidateId>,
    pub(crate) chosen: BitSet,
    pub data: RuleData,
}

impl SeqState {
    pub fn chosen_contains(&self, c: CandidateId) -> bool {
        self.chosen.contains(c)
    }

    /// Adds a candidate without touching the rule data (no-buyer filler).
    pub(crate) fn with_choice_only(&self, c: CandidateId) -> SeqState {
        let mut next = self.clone();
        next.sequence.push(c);
        next.chosen.insert(c);
        next
    }

    /// Carries Phase-1 budgets into the money formulation.
    pub(crate) fn enter_phase_two(&self) -> SeqState {
        let budgets = match &self.data {
            RuleData::MesOne { budgets } => budgets,
            _ => panic!("phase transition from a non-Phase-1 state"),
        };
        SeqState {
            sequence: self.sequence.clone(),
            chosen: self.chosen.clone(),
            data: RuleData::MesTwo {
                events: budgets.iter().map(|b| (b.clone(), zero())).collect(),
            },
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ApplyError {
    #[error("candidate {candidate} has no approvers, its purchase is undefined")]
    NoSupporters { candidate: CandidateId },
    #[error("candidate {candidate} is not affordable in Phase 1")]
    Unaffordable { candidate: CandidateId },
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

impl SequentialRule {
    pub fn initial_state(&self, profile: &Profile, k: usize) -> SeqState {
        let groups = profile.groups().len();
        let data = match self {
            SequentialRule::Thiele(_) => RuleData::Thiele {
                counts: vec![0; groups],
            },
            SequentialRule::Phragmen => RuleData::Phragmen {
                loads: vec![zero(); groups],
            },
            SequentialRule::PhragmenMoney => RuleData::MesTwo {
                events: vec![(zero(), zero()); groups],
            },
            SequentialRule::Mes { .. } => {
                let budget = rat_u(k as u64) / rat_u(profile.n());
                RuleData::MesOne {
                    budgets: vec![budget; groups],
                }
            }
        };
        SeqState {
            sequence: Vec::new(),
            chosen: BitSet::new(profile.m()),
            data,
        }
    }

    /// Evaluates the query function on `state`, returning the exact tie set.
    pub fn step(&self, profile: &Profile, state: &SeqState) -> Result<StepResult, ScoringError> {
        match (&self, &state.data) {
            (SequentialRule::Thiele(s), RuleData::Thiele { counts }) => {
                thiele_step(profile, state, s, counts)
            }
            (SequentialRule::Phragmen, RuleData::Phragmen { loads }) => {
                Ok(phragmen_step(profile, state, loads))
            }
            (SequentialRule::PhragmenMoney, RuleData::MesTwo { events })
            | (SequentialRule::Mes { .. }, RuleData::MesTwo { events }) => {
                Ok(money_step(profile, state, events))
            }
            (SequentialRule::Mes { .. }, RuleData::MesOne { budgets }) => {
                Ok(mes_phase1_step(profile, state, budgets))
            }
            _ => panic!("rule/state mismatch in sequential step"),
        }
    }

    /// State after electing `c`, updating loads/budgets per the rule's
    /// payment mechanics. `c` need not be in the current tie set (forced
    /// walks use this for axiom checks), but its purchase must be defined.
    pub fn apply(
        &self,
        profile: &Profile,
        state: &SeqState,
        c: CandidateId,
    ) -> Result<SeqState, ApplyError> {
        debug_assert!(!state.chosen.contains(c));
        let mut next = state.clone();
        next.sequence.push(c);
        next.chosen.insert(c);
        match &mut next.data {
            RuleData::Thiele { counts } => {
                for &g in profile.supporters(c) {
                    counts[g] += 1;
                }
            }
            RuleData::Phragmen { loads } => {
                let ell = phragmen_load(profile, loads, c)
                    .ok_or(ApplyError::NoSupporters { candidate: c })?;
                for &g in profile.supporters(c) {
                    loads[g] = ell.clone();
                }
            }
            RuleData::MesOne { budgets } => {
                let pairs: Vec<(Rational, u64)> = profile
                    .supporters(c)
                    .iter()
                    .map(|&g| (budgets[g].clone(), profile.group(g).weight))
                    .collect();
                let rho = mes_rho(&pairs).ok_or(ApplyError::Unaffordable { candidate: c })?;
                for &g in profile.supporters(c) {
                    if budgets[g] > rho {
                        budgets[g] -= rho.clone();
                    } else {
                        budgets[g] = zero();
                    }
                }
            }
            RuleData::MesTwo { events } => {
                let tau = money_time(profile, events, c)
                    .ok_or(ApplyError::NoSupporters { candidate: c })?;
                for &g in profile.supporters(c) {
                    events[g] = (zero(), tau.clone());
                }
            }
        }
        Ok(next)
    }
}

fn thiele_step(
    profile: &Profile,
    state: &SeqState,
    s: &ScoringFunction,
    counts: &[u32],
) -> Result<StepResult, ScoringError> {
    let mut best: Option<Rational> = None;
    let mut tied: Vec<CandidateId> = Vec::new();
    for c in 0..profile.m() {
        if state.chosen.contains(c) {
            continue;
        }
        let mut marg = zero();
        for &g in profile.supporters(c) {
            let grp = profile.group(g);
            let x = counts[g] as usize;
            let inc = s.value(x + 1, grp.ballot.len())? - s.value(x, grp.ballot.len())?;
            marg += rat_u(grp.weight) * inc;
        }
        match &best {
            Some(b) if marg < *b => {}
            Some(b) if marg == *b => tied.push(c),
            _ => {
                best = Some(marg);
                tied = vec![c];
            }
        }
    }
    let key = best.expect("a non-full committee always has an unchosen candidate");
    Ok(StepResult::Tie(Step {
        tied,
        key,
        kind: StepKind::Score,
    }))
}

fn phragmen_load(profile: &Profile, loads: &[Rational], c: CandidateId) -> Option<Rational> {
    let support = profile.supporters(c);
    if support.is_empty() {
        return None;
    }
    let mut weight: u64 = 0;
    let mut load_sum = zero();
    for &g in support {
        let grp = profile.group(g);
        weight += grp.weight;
        load_sum += rat_u(grp.weight) * &loads[g];
    }
    Some((Rational::one() + load_sum) / rat_u(weight))
}

fn phragmen_step(profile: &Profile, state: &SeqState, loads: &[Rational]) -> StepResult {
    let mut best: Option<Rational> = None;
    let mut tied: Vec<CandidateId> = Vec::new();
    for c in 0..profile.m() {
        if state.chosen.contains(c) {
            continue;
        }
        let Some(ell) = phragmen_load(profile, loads, c) else {
            continue;
        };
        match &best {
            Some(b) if ell > *b => {}
            Some(b) if ell == *b => tied.push(c),
            _ => {
                best = Some(ell);
                tied = vec![c];
            }
        }
    }
    match best {
        Some(key) => StepResult::Tie(Step {
            tied,
            key,
            kind: StepKind::Load,
        }),
        None => StepResult::NoBuyer {
            unchosen: unchosen(profile, state),
        },
    }
}

/// Solves `Σ_i weight_i · min(ρ, budget_i) = 1` for the smallest `ρ`, the
/// Phase-1 price of a candidate with the given approver budgets. `None`
/// when the total budget is below 1 (the candidate is unaffordable).
pub fn mes_rho(budgets: &[(Rational, u64)]) -> Option<Rational> {
    let total: Rational = budgets
        .iter()
        .map(|(b, w)| b * rat_u(*w))
        .fold(zero(), |a, v| a + v);
    if total < Rational::one() {
        return None;
    }
    let mut entries: Vec<&(Rational, u64)> = budgets.iter().collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let mut drained = zero();
    let mut remaining: u64 = budgets.iter().map(|(_, w)| w).sum();
    for (b, w) in entries {
        let rho = (Rational::one() - &drained) / rat_u(remaining);
        if rho <= *b {
            return Some(rho);
        }
        drained += b * rat_u(*w);
        remaining -= w;
    }
    unreachable!("total budget >= 1 guarantees a waterfill breakpoint")
}

fn mes_phase1_step(profile: &Profile, state: &SeqState, budgets: &[Rational]) -> StepResult {
    let mut best: Option<Rational> = None;
    let mut tied: Vec<CandidateId> = Vec::new();
    for c in 0..profile.m() {
        if state.chosen.contains(c) || profile.supporters(c).is_empty() {
            continue;
        }
        let pairs: Vec<(Rational, u64)> = profile
            .supporters(c)
            .iter()
            .map(|&g| (budgets[g].clone(), profile.group(g).weight))
            .collect();
        let Some(rho) = mes_rho(&pairs) else {
            continue;
        };
        match &best {
            Some(b) if rho > *b => {}
            Some(b) if rho == *b => tied.push(c),
            _ => {
                best = Some(rho);
                tied = vec![c];
            }
        }
    }
    match best {
        Some(key) => StepResult::Tie(Step {
            tied,
            key,
            kind: StepKind::Price,
        }),
        None => StepResult::PhaseOneComplete,
    }
}

fn money_time(
    profile: &Profile,
    events: &[(Rational, Rational)],
    c: CandidateId,
) -> Option<Rational> {
    let support = profile.supporters(c);
    if support.is_empty() {
        return None;
    }
    // Every approver's balance at time t is balance_g + (t - reset_g), so c
    // is affordable at the t solving Σ weight_g (balance_g - reset_g) + t·N(c) = 1.
    let mut weight: u64 = 0;
    let mut offset = zero();
    for &g in support {
        let grp = profile.group(g);
        weight += grp.weight;
        let (balance, reset) = &events[g];
        offset += rat_u(grp.weight) * (balance - reset);
    }
    Some((Rational::one() - offset) / rat_u(weight))
}

fn money_step(profile: &Profile, state: &SeqState, events: &[(Rational, Rational)]) -> StepResult {
    let mut best: Option<Rational> = None;
    let mut tied: Vec<CandidateId> = Vec::new();
    for c in 0..profile.m() {
        if state.chosen.contains(c) {
            continue;
        }
        let Some(tau) = money_time(profile, events, c) else {
            continue;
        };
        match &best {
            Some(b) if tau > *b => {}
            Some(b) if tau == *b => tied.push(c),
            _ => {
                best = Some(tau);
                tied = vec![c];
            }
        }
    }
    match best {
        Some(key) => {
            // Purchase times never run backwards: each event was the
            // earliest affordable time when it happened.
            let now = events.iter().map(|(_, t)| t).max().cloned().unwrap_or_else(zero);
            assert!(
                key >= now,
                "purchase time regressed: {key} < {now} — sequential state corrupted"
            );
            StepResult::Tie(Step {
                tied,
                key,
                kind: StepKind::Time,
            })
        }
        None => StepResult::NoBuyer {
            unchosen: unchosen(profile, state),
        },
    }
}

fn unchosen(profile: &Profile, state: &SeqState) -> Vec<CandidateId> {
    (0..profile.m())
        .filter(|&c| !state.chosen.contains(c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Profile;
    use crate::rational::rat;

    fn concurrence() -> Profile {
        Profile::from_raw(
            3,
            vec![
                (vec![0, 1], 1),
                (vec![1, 2], 1),
                (vec![0], 1),
                (vec![2], 1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn waterfill_examples() {
        // 20 voters at 1/10 each
        assert_eq!(mes_rho(&[(rat(1, 10), 20)]), Some(rat(1, 20)));
        // budgets 1/2, 1/4, 1/4: total exactly 1, the max payer pays all
        assert_eq!(
            mes_rho(&[(rat(1, 2), 1), (rat(1, 4), 2)]),
            Some(rat(1, 2))
        );
        // 3 voters at 1/4: total 3/4 < 1
        assert_eq!(mes_rho(&[(rat(1, 4), 3)]), None);
        // mixed: 10 at 49/1020 drained, 9 pay the residue
        let rho = mes_rho(&[(rat(49, 1020), 10), (rat(5, 51), 9)]).unwrap();
        assert_eq!(rho, rat(53, 918));
    }

    #[test]
    fn seq_thiele_first_step_is_approval_argmax() {
        let p = concurrence();
        let rule = SequentialRule::seq_pav(2);
        let st = rule.initial_state(&p, 2);
        match rule.step(&p, &st).unwrap() {
            StepResult::Tie(step) => {
                assert_eq!(step.tied, vec![0, 1, 2]);
                assert_eq!(step.key, rat(2, 1));
            }
            other => panic!("unexpected step result {other:?}"),
        }
    }

    #[test]
    fn seq_pav_prefers_a_after_c() {
        // After electing candidate 2, PAV marginals are a: 2, b: 3/2.
        let p = concurrence();
        let rule = SequentialRule::seq_pav(2);
        let st = rule.initial_state(&p, 2);
        let st = rule.apply(&p, &st, 2).unwrap();
        match rule.step(&p, &st).unwrap() {
            StepResult::Tie(step) => {
                assert_eq!(step.tied, vec![0]);
                assert_eq!(step.key, rat(2, 1));
            }
            other => panic!("unexpected step result {other:?}"),
        }
    }

    #[test]
    fn phragmen_load_formula() {
        // 2×{a}, 1×{b}: ℓ(a) = 1/2, ℓ(b) = 1.
        let p = Profile::from_raw(2, vec![(vec![0], 2), (vec![1], 1)]).unwrap();
        let rule = SequentialRule::Phragmen;
        let st = rule.initial_state(&p, 1);
        match rule.step(&p, &st).unwrap() {
            StepResult::Tie(step) => {
                assert_eq!(step.tied, vec![0]);
                assert_eq!(step.key, rat(1, 2));
            }
            other => panic!("unexpected step result {other:?}"),
        }
    }

    #[test]
    fn phragmen_second_step_carries_loads() {
        // 1×{a,b}, 1×{a}, 1×{b}: ℓ(a) = 1/2, and after electing a the
        // shared voter carries load 1/2, so ℓ(b) = (1 + 1/2) / 2 = 3/4.
        let p = Profile::from_raw(2, vec![(vec![0, 1], 1), (vec![0], 1), (vec![1], 1)]).unwrap();
        let rule = SequentialRule::Phragmen;
        let st = rule.initial_state(&p, 2);
        let st = rule.apply(&p, &st, 0).unwrap();
        match rule.step(&p, &st).unwrap() {
            StepResult::Tie(step) => {
                assert_eq!(step.tied, vec![1]);
                assert_eq!(step.key, rat(3, 4));
            }
            other => panic!("unexpected step result {other:?}"),
        }
    }

    #[test]
    fn phragmen_disjoint_equal_groups_tie_fully() {
        let p = Profile::from_raw(3, vec![(vec![0], 2), (vec![1], 2), (vec![2], 2)]).unwrap();
        let rule = SequentialRule::Phragmen;
        let st = rule.initial_state(&p, 2);
        match rule.step(&p, &st).unwrap() {
            StepResult::Tie(step) => assert_eq!(step.tied, vec![0, 1, 2]),
            other => panic!("unexpected step result {other:?}"),
        }
    }

    #[test]
    fn mes_unaffordable_start_ends_phase_one() {
        // 1×{a}, 1×{b}, k=1: budgets 1/2 each, nothing reaches 1.
        let p = Profile::from_raw(3, vec![(vec![0], 1), (vec![1], 1)]).unwrap();
        let rule = SequentialRule::mes();
        let st = rule.initial_state(&p, 1);
        assert!(matches!(
            rule.step(&p, &st).unwrap(),
            StepResult::PhaseOneComplete
        ));
    }

    #[test]
    fn money_formulation_buys_at_inverse_approvals() {
        // From zero budgets the first purchase time is 1/N(c).
        let p = Profile::from_raw(2, vec![(vec![0], 3), (vec![1], 1)]).unwrap();
        let rule = SequentialRule::PhragmenMoney;
        let st = rule.initial_state(&p, 1);
        match rule.step(&p, &st).unwrap() {
            StepResult::Tie(step) => {
                assert_eq!(step.tied, vec![0]);
                assert_eq!(step.key, rat(1, 3));
            }
            other => panic!("unexpected step result {other:?}"),
        }
    }

    #[test]
    fn no_buyer_when_no_candidate_has_approvers() {
        let p = Profile::from_raw(3, vec![(vec![0], 1)]).unwrap();
        let rule = SequentialRule::Phragmen;
        let st = rule.initial_state(&p, 2);
        let st = rule.apply(&p, &st, 0).unwrap();
        match rule.step(&p, &st).unwrap() {
            StepResult::NoBuyer { unchosen } => assert_eq!(unchosen, vec![1, 2]),
            other => panic!("unexpected step result {other:?}"),
        }
    }
}
