//! ABC scoring rules: score a committee as the weighted sum, over ballots,
//! of a scoring function `s(x, y)` of the intersection size `x = |A ∩ W|`
//! and the ballot size `y = |A|`. Winner determination enumerates all
//! k-subsets exactly (set-valued argmax), guarded by a subset cap.
//!
//! Thiele rules are the special case where `s` depends only on `x` and the
//! increment sequence is concave; those are the functions the sequential
//! rules build on. Custom tables are validated, never extrapolated: looking
//! up a missing entry is an error.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use crate::model::{CandidateId, Committee, ElectionInstance, ModelError, Outcome, Profile};
use crate::rational::{rat, rat_u, zero, Rational};

pub const DEFAULT_SUBSET_CAP: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoringError {
    #[error("scoring table for `{name}` has no entry s({x}, {y})")]
    MissingEntry { name: String, x: usize, y: usize },
    #[error("scoring function `{name}` is not a Thiele function")]
    NotThiele { name: String },
    #[error("invalid scoring table: {0}")]
    BadTable(String),
    #[error("{subsets} committees of size {k} exceed the enumeration cap of {cap}")]
    TooLarge { subsets: u128, k: usize, cap: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Kind {
    /// `values[x]` for `0 <= x <= cap`; depends only on the intersection.
    Thiele { values: Vec<Rational> },
    /// `rows[y][x]` for `0 <= x <= y <= cap`.
    General { rows: Vec<Vec<Rational>> },
}

/// A scoring function `s(x, y)`, either a Thiele sequence or a general
/// table indexed by intersection and ballot size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoringFunction {
    name: String,
    kind: Kind,
}

impl ScoringFunction {
    /// Approval voting: `s(x) = x`.
    pub fn av(cap: usize) -> Self {
        ScoringFunction {
            name: "av".into(),
            kind: Kind::Thiele {
                values: (0..=cap as i64).map(|x| rat(x, 1)).collect(),
            },
        }
    }

    /// Proportional approval voting: `s(x) = 1 + 1/2 + ... + 1/x`.
    pub fn pav(cap: usize) -> Self {
        let mut values = Vec::with_capacity(cap + 1);
        let mut acc = zero();
        values.push(acc.clone());
        for x in 1..=cap as i64 {
            acc += rat(1, x);
            values.push(acc.clone());
        }
        ScoringFunction {
            name: "pav".into(),
            kind: Kind::Thiele { values },
        }
    }

    /// Chamberlin–Courant approval voting: `s(x) = 1` for `x > 0`.
    pub fn ccav(cap: usize) -> Self {
        let mut values = vec![zero(); cap + 1];
        for v in values.iter_mut().skip(1) {
            *v = rat(1, 1);
        }
        ScoringFunction {
            name: "ccav".into(),
            kind: Kind::Thiele { values },
        }
    }

    /// Satisfaction approval voting: `s(x, y) = x / y`. The one built-in
    /// rule whose score depends on the ballot size.
    pub fn sav(cap: usize) -> Self {
        let mut rows = Vec::with_capacity(cap + 1);
        rows.push(vec![zero()]);
        for y in 1..=cap as i64 {
            rows.push((0..=y).map(|x| rat(x, y)).collect());
        }
        ScoringFunction {
            name: "sav".into(),
            kind: Kind::General { rows },
        }
    }

    /// A custom Thiele rule from its value sequence `s(0), s(1), ...`.
    ///
    /// Requires `s(0) = 0`, `s(1) > 0`, weakly increasing values and concave
    /// increments.
    pub fn thiele(name: impl Into<String>, values: Vec<Rational>) -> Result<Self, ScoringError> {
        let name = name.into();
        if values.len() < 2 {
            return Err(ScoringError::BadTable(
                "a Thiele sequence needs at least s(0) and s(1)".into(),
            ));
        }
        if !values[0].is_zero() {
            return Err(ScoringError::BadTable("s(0) must be 0".into()));
        }
        if values[1] <= zero() {
            return Err(ScoringError::BadTable("s(1) must be positive".into()));
        }
        for x in 1..values.len() {
            if values[x] < values[x - 1] {
                return Err(ScoringError::BadTable(format!(
                    "s({x}) < s({}) violates monotonicity",
                    x - 1
                )));
            }
        }
        for x in 2..values.len() {
            let d1 = &values[x - 1] - &values[x - 2];
            let d2 = &values[x] - &values[x - 1];
            if d2 > d1 {
                return Err(ScoringError::BadTable(format!(
                    "increments s({x})-s({}) > s({})-s({}) violate concavity",
                    x - 1,
                    x - 1,
                    x - 2
                )));
            }
        }
        Ok(ScoringFunction {
            name,
            kind: Kind::Thiele { values },
        })
    }

    /// A custom general table `rows[y][x]`; row `y` must have `y + 1`
    /// entries, `s(0, y) = 0`, and each row must be weakly increasing.
    pub fn general(name: impl Into<String>, rows: Vec<Vec<Rational>>) -> Result<Self, ScoringError> {
        let name = name.into();
        if rows.is_empty() {
            return Err(ScoringError::BadTable("empty table".into()));
        }
        for (y, row) in rows.iter().enumerate() {
            if row.len() != y + 1 {
                return Err(ScoringError::BadTable(format!(
                    "row {y} must have {} entries, found {}",
                    y + 1,
                    row.len()
                )));
            }
            if !row[0].is_zero() {
                return Err(ScoringError::BadTable(format!("s(0, {y}) must be 0")));
            }
            for x in 1..row.len() {
                if row[x] < row[x - 1] {
                    return Err(ScoringError::BadTable(format!(
                        "s({x}, {y}) < s({}, {y}) violates monotonicity",
                        x - 1
                    )));
                }
            }
        }
        Ok(ScoringFunction {
            name,
            kind: Kind::General { rows },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_thiele(&self) -> bool {
        matches!(self.kind, Kind::Thiele { .. })
    }

    /// Largest argument the table covers.
    pub fn cap(&self) -> usize {
        match &self.kind {
            Kind::Thiele { values } => values.len() - 1,
            Kind::General { rows } => rows.len() - 1,
        }
    }

    /// `s(x, y)`; `y` is ignored by Thiele functions.
    pub fn value(&self, x: usize, y: usize) -> Result<Rational, ScoringError> {
        match &self.kind {
            Kind::Thiele { values } => values.get(x).cloned().ok_or(ScoringError::MissingEntry {
                name: self.name.clone(),
                x,
                y,
            }),
            Kind::General { rows } => rows
                .get(y)
                .and_then(|row| row.get(x))
                .cloned()
                .ok_or(ScoringError::MissingEntry {
                    name: self.name.clone(),
                    x,
                    y,
                }),
        }
    }

    /// The Thiele increment `δ(x) = s(x) - s(x-1)`.
    pub fn delta(&self, x: usize) -> Result<Rational, ScoringError> {
        match &self.kind {
            Kind::Thiele { values } => match (values.get(x), x.checked_sub(1).and_then(|p| values.get(p))) {
                (Some(hi), Some(lo)) => Ok(hi - lo),
                _ => Err(ScoringError::MissingEntry {
                    name: self.name.clone(),
                    x,
                    y: x,
                }),
            },
            Kind::General { .. } => Err(ScoringError::NotThiele {
                name: self.name.clone(),
            }),
        }
    }

    pub fn thiele_values(&self) -> Option<&[Rational]> {
        match &self.kind {
            Kind::Thiele { values } => Some(values),
            Kind::General { .. } => None,
        }
    }
}

/// `ŝ(A, W) = Σ_groups weight · s(|ballot ∩ W|, |ballot|)`.
pub fn committee_score(
    profile: &Profile,
    members: &BTreeSet<CandidateId>,
    s: &ScoringFunction,
) -> Result<Rational, ScoringError> {
    let mut total = zero();
    for g in profile.groups() {
        let x = g.ballot.intersection(members).count();
        if x == 0 {
            continue; // s(0, y) = 0 by construction
        }
        total += rat_u(g.weight) * s.value(x, g.ballot.len())?;
    }
    Ok(total)
}

/// Marginal scores `ŝ(A, P ∪ {c}) - ŝ(A, P)` for every candidate `c ∉ P`.
pub fn marginal_scores(
    profile: &Profile,
    partial: &BTreeSet<CandidateId>,
    s: &ScoringFunction,
) -> Result<BTreeMap<CandidateId, Rational>, ScoringError> {
    let mut counts = vec![0usize; profile.groups().len()];
    for (i, g) in profile.groups().iter().enumerate() {
        counts[i] = g.ballot.intersection(partial).count();
    }
    let mut out = BTreeMap::new();
    for c in 0..profile.m() {
        if partial.contains(&c) {
            continue;
        }
        let mut marg = zero();
        for &gi in profile.supporters(c) {
            let g = profile.group(gi);
            let y = g.ballot.len();
            let x = counts[gi];
            let inc = s.value(x + 1, y)? - s.value(x, y)?;
            marg += rat_u(g.weight) * inc;
        }
        out.insert(c, marg);
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Exhaustive set-valued winner determination: the exact argmax of
/// `ŝ(A, ·)` over all k-subsets of candidates.
pub fn elect_scoring(
    instance: &ElectionInstance,
    s: &ScoringFunction,
    subset_cap: u64,
) -> Result<Outcome, ScoringError> {
    let m = instance.profile.m();
    let k = instance.k;
    let subsets = binomial(m, k);
    if subsets > subset_cap as u128 {
        return Err(ScoringError::TooLarge {
            subsets,
            k,
            cap: subset_cap,
        });
    }

    // Incremental enumeration in lexicographic order, keeping the running
    // argmax set. Scores are recomputed per subset; the profiles this is
    // used on are small (the sequential rules never go through here).
    let mut best: Option<Rational> = None;
    let mut winners: Vec<Committee> = Vec::new();
    let mut members: Vec<usize> = (0..k).collect();
    loop {
        let set: BTreeSet<usize> = members.iter().copied().collect();
        let score = committee_score(&instance.profile, &set, s)?;
        match &best {
            Some(b) if score < *b => {}
            Some(b) if score == *b => winners.push(Committee::new(set)),
            _ => {
                best = Some(score);
                winners = vec![Committee::new(set)];
            }
        }
        // next k-combination of 0..m
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(Outcome::new(winners)?);
            }
            i -= 1;
            if members[i] != i + m - k {
                members[i] += 1;
                for j in i + 1..k {
                    members[j] = members[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Profile;

    fn concurrence() -> ElectionInstance {
        let p = Profile::from_raw(
            3,
            vec![
                (vec![0, 1], 1),
                (vec![1, 2], 1),
                (vec![0], 1),
                (vec![2], 1),
            ],
        )
        .unwrap();
        ElectionInstance::new(p, 2).unwrap()
    }

    #[test]
    fn builtin_values() {
        assert_eq!(ScoringFunction::pav(5).value(3, 3).unwrap(), rat(11, 6));
        assert_eq!(ScoringFunction::ccav(5).value(5, 5).unwrap(), rat(1, 1));
        assert_eq!(ScoringFunction::av(5).value(0, 2).unwrap(), zero());
        assert_eq!(ScoringFunction::sav(5).value(2, 4).unwrap(), rat(1, 2));
    }

    #[test]
    fn thiele_validation() {
        // decreasing
        assert!(ScoringFunction::thiele("bad", vec![rat(0, 1), rat(1, 1), rat(1, 2)]).is_err());
        // convex increments
        assert!(
            ScoringFunction::thiele("bad", vec![rat(0, 1), rat(1, 1), rat(3, 1)]).is_err()
        );
        // s(0) != 0
        assert!(ScoringFunction::thiele("bad", vec![rat(1, 1), rat(2, 1)]).is_err());
        // s(1) = 0
        assert!(ScoringFunction::thiele("bad", vec![rat(0, 1), rat(0, 1)]).is_err());
        assert!(ScoringFunction::thiele(
            "ok",
            vec![rat(0, 1), rat(2, 1), rat(3, 1), rat(7, 2)]
        )
        .is_ok());
    }

    #[test]
    fn general_validation_and_missing_entries() {
        let s = ScoringFunction::sav(2);
        assert!(matches!(
            s.value(1, 3),
            Err(ScoringError::MissingEntry { x: 1, y: 3, .. })
        ));
        assert!(ScoringFunction::general("bad", vec![vec![zero()], vec![zero()]]).is_err());
        assert!(matches!(
            s.delta(1),
            Err(ScoringError::NotThiele { .. })
        ));
    }

    #[test]
    fn committee_scores_on_concurrence_profile() {
        let inst = concurrence();
        let av = ScoringFunction::av(2);
        let w: BTreeSet<usize> = [0, 1].into_iter().collect();
        assert_eq!(committee_score(&inst.profile, &w, &av).unwrap(), rat(4, 1));
        let ccav = ScoringFunction::ccav(2);
        let w: BTreeSet<usize> = [0, 2].into_iter().collect();
        assert_eq!(
            committee_score(&inst.profile, &w, &ccav).unwrap(),
            rat(4, 1)
        );
        let empty: BTreeSet<usize> = BTreeSet::new();
        assert_eq!(
            committee_score(&inst.profile, &empty, &av).unwrap(),
            zero()
        );
    }

    #[test]
    fn elect_av_ties_all_pairs_on_concurrence_profile() {
        let inst = concurrence();
        let out = elect_scoring(&inst, &ScoringFunction::av(2), DEFAULT_SUBSET_CAP).unwrap();
        let expect: Vec<Committee> = vec![
            Committee::new([0, 1]),
            Committee::new([0, 2]),
            Committee::new([1, 2]),
        ];
        assert_eq!(out.iter().cloned().collect::<Vec<_>>(), expect);
    }

    #[test]
    fn elect_ccav_prefers_coverage() {
        let inst = concurrence();
        let out = elect_scoring(&inst, &ScoringFunction::ccav(2), DEFAULT_SUBSET_CAP).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out.contains(&Committee::new([0, 2])));
    }

    #[test]
    fn elect_trivial_singleton() {
        let p = Profile::from_raw(2, vec![(vec![0], 1)]).unwrap();
        let inst = ElectionInstance::new(p, 1).unwrap();
        let out = elect_scoring(&inst, &ScoringFunction::av(1), DEFAULT_SUBSET_CAP).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out.contains(&Committee::new([0])));
    }

    #[test]
    fn subset_cap_is_enforced() {
        let p = Profile::from_raw(30, vec![(vec![0], 1)]).unwrap();
        let inst = ElectionInstance::new(p, 15).unwrap();
        let err = elect_scoring(&inst, &ScoringFunction::av(1), 1000).unwrap_err();
        assert!(matches!(err, ScoringError::TooLarge { .. }));
    }

    #[test]
    fn marginals_match_direct_differences() {
        let inst = concurrence();
        let pav = ScoringFunction::pav(2);
        let partial: BTreeSet<usize> = [2].into_iter().collect();
        let marg = marginal_scores(&inst.profile, &partial, &pav).unwrap();
        // voter {1,2} contributes s(2)-s(1)=1/2, voter {0,1} contributes 1
        assert_eq!(marg[&1], rat(3, 2));
        assert_eq!(marg[&0], rat(2, 1));
        let full = committee_score(
            &inst.profile,
            &[1, 2].into_iter().collect(),
            &pav,
        )
        .unwrap();
        let base = committee_score(&inst.profile, &partial, &pav).unwrap();
        assert_eq!(marg[&1], full - base);
    }

    #[test]
    fn marginal_at_empty_prefix_is_s1_times_approvals() {
        let inst = concurrence();
        let pav = ScoringFunction::pav(2);
        let marg = marginal_scores(&inst.profile, &BTreeSet::new(), &pav).unwrap();
        for c in 0..3 {
            assert_eq!(marg[&c], rat_u(inst.profile.approval_score(c)));
        }
    }

    #[test]
    fn scaling_weights_preserves_outcomes() {
        let inst = concurrence();
        let scaled = ElectionInstance::new(inst.profile.scale(7).unwrap(), 2).unwrap();
        for s in [
            ScoringFunction::av(2),
            ScoringFunction::pav(2),
            ScoringFunction::ccav(2),
            ScoringFunction::sav(2),
        ] {
            let a = elect_scoring(&inst, &s, DEFAULT_SUBSET_CAP).unwrap();
            let b = elect_scoring(&scaled, &s, DEFAULT_SUBSET_CAP).unwrap();
            assert_eq!(a, b, "rule {}", s.name());
        }
    }
}
