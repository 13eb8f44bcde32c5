//! Election data model: weighted approval ballots, profiles, instances,
//! committees and outcomes.
//!
//! A [`Profile`] is a normalized list of [`BallotGroup`]s over candidates
//! `0..m`: groups are sorted lexicographically by ballot, identical ballots
//! are merged by summing weights, and zero-weight groups are dropped. A
//! "voter" is addressed as a group index; abstention decrements the weight
//! of a group (removing it at zero). All types are immutable after
//! construction and safe to share across threads.
//!
//! Two interchangeable file formats are supported:
//!
//! ```text
//! # committee size and candidates first, then one line per ballot group
//! 3 2
//! 1: 0 1
//! 1: 1 2
//! 1: 0
//! 1: 2
//! ```
//!
//! and a JSON mirror `{"m": 3, "k": 2, "groups": [{"weight": 1, "ballot":
//! [0, 1]}, ...]}`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type CandidateId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("ballot group {group} has an empty ballot")]
    EmptyBallot { group: usize },
    #[error("ballot group {group} approves candidate {candidate}, but there are only {m} candidates")]
    BadCandidate {
        group: usize,
        candidate: usize,
        m: usize,
    },
    #[error("profile has no voters")]
    EmptyProfile,
    #[error("no ballot group with index {group} (profile has {groups})")]
    NoSuchGroup { group: usize, groups: usize },
    #[error("cannot remove {count} voters from group {group} of weight {weight}")]
    TooManyAbstainers {
        group: usize,
        weight: u64,
        count: u64,
    },
    #[error("committee size {k} is out of range for {m} candidates (need 1 <= k <= m-1)")]
    BadCommitteeSize { k: usize, m: usize },
    #[error("profiles have different candidate counts ({left} vs {right})")]
    CandidateCountMismatch { left: usize, right: usize },
    #[error("an outcome must contain at least one committee")]
    EmptyOutcome,
    #[error("committees in one outcome must all have the same size")]
    UnequalCommitteeSizes,
}

// ---------------------------------------------------------------------------
// Ballot groups and profiles
// ---------------------------------------------------------------------------

/// A maximal set of voters casting the identical approval ballot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BallotGroup {
    pub ballot: BTreeSet<CandidateId>,
    pub weight: u64,
}

impl BallotGroup {
    pub fn new(ballot: impl IntoIterator<Item = CandidateId>, weight: u64) -> Self {
        BallotGroup {
            ballot: ballot.into_iter().collect(),
            weight,
        }
    }
}

/// A normalized approval profile over candidates `0..m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    m: usize,
    groups: Vec<BallotGroup>,
    /// `supporters[c]` lists the indices of groups whose ballot contains `c`.
    supporters: Vec<Vec<usize>>,
}

impl Profile {
    /// Builds a profile, normalizing the given groups: identical ballots are
    /// merged, groups are ordered lexicographically by ballot, zero-weight
    /// groups are dropped.
    pub fn new(
        m: usize,
        groups: impl IntoIterator<Item = BallotGroup>,
    ) -> Result<Self, ModelError> {
        let mut merged: std::collections::BTreeMap<BTreeSet<usize>, u64> =
            std::collections::BTreeMap::new();
        for (idx, g) in groups.into_iter().enumerate() {
            if g.ballot.is_empty() {
                return Err(ModelError::EmptyBallot { group: idx });
            }
            if let Some(&c) = g.ballot.iter().next_back() {
                if c >= m {
                    return Err(ModelError::BadCandidate {
                        group: idx,
                        candidate: c,
                        m,
                    });
                }
            }
            if g.weight == 0 {
                continue;
            }
            *merged.entry(g.ballot).or_insert(0) += g.weight;
        }
        let groups: Vec<BallotGroup> = merged
            .into_iter()
            .map(|(ballot, weight)| BallotGroup { ballot, weight })
            .collect();
        if groups.is_empty() {
            return Err(ModelError::EmptyProfile);
        }
        let mut supporters = vec![Vec::new(); m];
        for (i, g) in groups.iter().enumerate() {
            for &c in &g.ballot {
                supporters[c].push(i);
            }
        }
        Ok(Profile {
            m,
            groups,
            supporters,
        })
    }

    /// Convenience constructor from `(ballot, weight)` pairs.
    pub fn from_raw(
        m: usize,
        raw: impl IntoIterator<Item = (Vec<CandidateId>, u64)>,
    ) -> Result<Self, ModelError> {
        Profile::new(
            m,
            raw.into_iter().map(|(b, w)| BallotGroup::new(b, w)),
        )
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn groups(&self) -> &[BallotGroup] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> &BallotGroup {
        &self.groups[i]
    }

    /// Total number of voters `n`.
    pub fn n(&self) -> u64 {
        self.groups.iter().map(|g| g.weight).sum()
    }

    /// Indices of the groups whose ballot contains `c`.
    pub fn supporters(&self, c: CandidateId) -> &[usize] {
        &self.supporters[c]
    }

    /// Total weight of voters approving `c`.
    pub fn approval_score(&self, c: CandidateId) -> u64 {
        self.supporters[c]
            .iter()
            .map(|&g| self.groups[g].weight)
            .sum()
    }

    pub fn approval_scores(&self) -> Vec<u64> {
        (0..self.m).map(|c| self.approval_score(c)).collect()
    }

    pub fn max_ballot_size(&self) -> usize {
        self.groups.iter().map(|g| g.ballot.len()).max().unwrap_or(0)
    }

    /// Binary-searches the (sorted) group list for an exact ballot.
    pub fn group_index(&self, ballot: &BTreeSet<CandidateId>) -> Option<usize> {
        self.groups
            .binary_search_by(|g| g.ballot.cmp(ballot))
            .ok()
    }

    /// The profile after `count` voters of the given group abstain.
    pub fn abstain(&self, group: usize, count: u64) -> Result<Profile, ModelError> {
        let g = self.groups.get(group).ok_or(ModelError::NoSuchGroup {
            group,
            groups: self.groups.len(),
        })?;
        if count > g.weight {
            return Err(ModelError::TooManyAbstainers {
                group,
                weight: g.weight,
                count,
            });
        }
        let groups = self.groups.iter().enumerate().map(|(i, g)| BallotGroup {
            ballot: g.ballot.clone(),
            weight: if i == group { g.weight - count } else { g.weight },
        });
        Profile::new(self.m, groups)
    }

    /// The profile after several groups lose voters at once.
    pub fn abstain_many(&self, abstainers: &[(usize, u64)]) -> Result<Profile, ModelError> {
        let mut weights: Vec<u64> = self.groups.iter().map(|g| g.weight).collect();
        for &(group, count) in abstainers {
            let w = weights.get_mut(group).ok_or(ModelError::NoSuchGroup {
                group,
                groups: self.groups.len(),
            })?;
            if count > *w {
                return Err(ModelError::TooManyAbstainers {
                    group,
                    weight: *w,
                    count,
                });
            }
            *w -= count;
        }
        Profile::new(
            self.m,
            self.groups.iter().zip(weights).map(|(g, w)| BallotGroup {
                ballot: g.ballot.clone(),
                weight: w,
            }),
        )
    }

    /// Multiplies every weight by `lambda`.
    pub fn scale(&self, lambda: u64) -> Result<Profile, ModelError> {
        Profile::new(
            self.m,
            self.groups.iter().map(|g| BallotGroup {
                ballot: g.ballot.clone(),
                weight: g
                    .weight
                    .checked_mul(lambda)
                    .expect("weight overflow while scaling profile"),
            }),
        )
    }

    /// Merges two profiles over the same candidate set.
    pub fn add(&self, other: &Profile) -> Result<Profile, ModelError> {
        if self.m != other.m {
            return Err(ModelError::CandidateCountMismatch {
                left: self.m,
                right: other.m,
            });
        }
        Profile::new(
            self.m,
            self.groups.iter().chain(other.groups.iter()).cloned(),
        )
    }
}

// ---------------------------------------------------------------------------
// Instances, committees, outcomes
// ---------------------------------------------------------------------------

/// A profile together with the committee size `k`, `1 <= k <= m-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElectionInstance {
    pub profile: Profile,
    pub k: usize,
}

impl ElectionInstance {
    pub fn new(profile: Profile, k: usize) -> Result<Self, ModelError> {
        if k < 1 || k + 1 > profile.m() {
            return Err(ModelError::BadCommitteeSize { k, m: profile.m() });
        }
        Ok(ElectionInstance { profile, k })
    }
}

/// A set of candidates; the size constraint `|members| = k` is enforced by
/// the owning [`Outcome`] / instance, not by this type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Committee(BTreeSet<CandidateId>);

impl Committee {
    pub fn new(members: impl IntoIterator<Item = CandidateId>) -> Self {
        Committee(members.into_iter().collect())
    }

    pub fn members(&self) -> &BTreeSet<CandidateId> {
        &self.0
    }

    pub fn contains(&self, c: CandidateId) -> bool {
        self.0.contains(&c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = CandidateId> + '_ {
        self.0.iter().copied()
    }

    /// `|ballot ∩ members|`.
    pub fn approved_count(&self, ballot: &BTreeSet<CandidateId>) -> usize {
        self.0.intersection(ballot).count()
    }
}

impl fmt::Display for Committee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Committee {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

impl<'de> Deserialize<'de> for Committee {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let members: Vec<usize> = Vec::deserialize(deserializer)?;
        Ok(Committee::new(members))
    }
}

/// The non-empty set of tied winning committees of one election.
///
/// Committees are kept in canonical (lexicographic) order, and all have the
/// same size — usually `k`, except for explicitly partial rule variants
/// (e.g. a phase-one-only election), which may return shorter committees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    committees: BTreeSet<Committee>,
}

impl Outcome {
    pub fn new(committees: impl IntoIterator<Item = Committee>) -> Result<Self, ModelError> {
        let committees: BTreeSet<Committee> = committees.into_iter().collect();
        let mut sizes = committees.iter().map(|c| c.len());
        let first = sizes.next().ok_or(ModelError::EmptyOutcome)?;
        if sizes.any(|s| s != first) {
            return Err(ModelError::UnequalCommitteeSizes);
        }
        Ok(Outcome { committees })
    }

    pub fn single(committee: Committee) -> Self {
        Outcome {
            committees: std::iter::once(committee).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Committee> {
        self.committees.iter()
    }

    pub fn len(&self) -> usize {
        self.committees.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn committee_size(&self) -> usize {
        self.committees.iter().next().map(|c| c.len()).unwrap_or(0)
    }

    pub fn contains(&self, committee: &Committee) -> bool {
        self.committees.contains(committee)
    }

    pub fn committees(&self) -> &BTreeSet<Committee> {
        &self.committees
    }

    /// Minimum over committees of `|W ∩ ballot|`.
    pub fn min_approvals(&self, ballot: &BTreeSet<CandidateId>) -> usize {
        self.committees
            .iter()
            .map(|w| w.approved_count(ballot))
            .min()
            .unwrap_or(0)
    }

    /// Maximum over committees of `|W ∩ ballot|`.
    pub fn max_approvals(&self, ballot: &BTreeSet<CandidateId>) -> usize {
        self.committees
            .iter()
            .map(|w| w.approved_count(ballot))
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.committees.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.committees.iter())
    }
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GroupRepr {
    weight: u64,
    ballot: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    m: usize,
    k: usize,
    groups: Vec<GroupRepr>,
}

impl ElectionInstance {
    /// Parses the plain-text format; `#` starts a comment anywhere.
    pub fn from_text(input: &str) -> Result<Self, ParseError> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut raw: Vec<(Vec<usize>, u64)> = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if header.is_none() {
                let mut parts = line.split_whitespace();
                let m = parts
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| ParseError::new(lineno, "expected header `m k`"))?;
                let k = parts
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| ParseError::new(lineno, "expected header `m k`"))?;
                if parts.next().is_some() {
                    return Err(ParseError::new(lineno, "trailing tokens after `m k` header"));
                }
                header = Some((m, k, lineno));
                continue;
            }
            let (weight, ballot) = line.split_once(':').ok_or_else(|| {
                ParseError::new(lineno, "expected `<weight>: c1 c2 ...`")
            })?;
            let weight: u64 = weight.trim().parse().map_err(|_| {
                ParseError::new(lineno, format!("bad weight `{}`", weight.trim()))
            })?;
            let mut candidates = Vec::new();
            for tok in ballot.split_whitespace() {
                let c: usize = tok
                    .parse()
                    .map_err(|_| ParseError::new(lineno, format!("bad candidate id `{tok}`")))?;
                candidates.push(c);
            }
            if candidates.is_empty() {
                return Err(ParseError::new(lineno, "empty ballot"));
            }
            raw.push((candidates, weight));
        }
        let (m, k, header_line) =
            header.ok_or_else(|| ParseError::new(1, "missing `m k` header"))?;
        let profile = Profile::from_raw(m, raw)
            .map_err(|e| ParseError::new(header_line, e.to_string()))?;
        ElectionInstance::new(profile, k)
            .map_err(|e| ParseError::new(header_line, e.to_string()))
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.profile.m(), self.k);
        for g in self.profile.groups() {
            let _ = write!(out, "{}:", g.weight);
            for c in &g.ballot {
                let _ = write!(out, " {c}");
            }
            let _ = writeln!(out);
        }
        out
    }

    pub fn from_json(input: &str) -> Result<Self, ParseError> {
        let repr: InstanceRepr = serde_json::from_str(input)
            .map_err(|e| ParseError::new(e.line(), e.to_string()))?;
        let profile = Profile::from_raw(
            repr.m,
            repr.groups.into_iter().map(|g| (g.ballot, g.weight)),
        )
        .map_err(|e| ParseError::new(0, e.to_string()))?;
        ElectionInstance::new(profile, repr.k).map_err(|e| ParseError::new(0, e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let repr = InstanceRepr {
            m: self.profile.m(),
            k: self.k,
            groups: self
                .profile
                .groups()
                .iter()
                .map(|g| GroupRepr {
                    weight: g.weight,
                    ballot: g.ballot.iter().copied().collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&repr).expect("instance serialization cannot fail")
    }

    /// Parses either format, deciding by the first non-space byte.
    pub fn from_str_any(input: &str) -> Result<Self, ParseError> {
        if input.trim_start().starts_with('{') {
            ElectionInstance::from_json(input)
        } else {
            ElectionInstance::from_text(input)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn normalization_merges_identical_ballots() {
        let p = Profile::from_raw(2, vec![(vec![0], 1), (vec![0], 2)]).unwrap();
        assert_eq!(p.groups().len(), 1);
        assert_eq!(p.group(0).weight, 3);
    }

    #[test]
    fn normalization_keeps_distinct_ballots() {
        let p = Profile::from_raw(3, vec![(vec![0, 1], 1), (vec![1, 2], 1)]).unwrap();
        assert_eq!(p.groups().len(), 2);
    }

    #[test]
    fn empty_ballot_is_rejected() {
        let err = Profile::from_raw(2, vec![(vec![], 1)]).unwrap_err();
        assert_eq!(err, ModelError::EmptyBallot { group: 0 });
    }

    #[test]
    fn out_of_range_candidate_is_rejected() {
        let err = Profile::from_raw(2, vec![(vec![0, 2], 1)]).unwrap_err();
        assert!(matches!(err, ModelError::BadCandidate { candidate: 2, .. }));
    }

    #[test]
    fn normalization_is_idempotent() {
        let p = concurrence();
        let again = Profile::new(p.m(), p.groups().to_vec()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn groups_are_in_lexicographic_ballot_order() {
        let p = Profile::from_raw(3, vec![(vec![2], 5), (vec![0, 2], 1), (vec![0, 1], 2)]).unwrap();
        let ballots: Vec<Vec<usize>> = p
            .groups()
            .iter()
            .map(|g| g.ballot.iter().copied().collect())
            .collect();
        assert_eq!(ballots, vec![vec![0, 1], vec![0, 2], vec![2]]);
    }

    #[test]
    fn approval_scores_weight_groups() {
        let p = concurrence();
        assert_eq!(p.approval_scores(), vec![2, 2, 2]);
        let q = Profile::from_raw(3, vec![(vec![0, 1], 5)]).unwrap();
        assert_eq!(q.approval_scores(), vec![5, 5, 0]);
    }

    #[test]
    fn approval_scores_sum_to_weighted_ballot_sizes() {
        let p = concurrence();
        let lhs: u64 = p.approval_scores().iter().sum();
        let rhs: u64 = p
            .groups()
            .iter()
            .map(|g| g.weight * g.ballot.len() as u64)
            .sum();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn abstain_decrements_and_removes() {
        let p = Profile::from_raw(2, vec![(vec![0], 3), (vec![1], 1)]).unwrap();
        let q = p.abstain(0, 1).unwrap();
        assert_eq!(q.group(0).weight, 2);
        let r = p.abstain(1, 1).unwrap();
        assert_eq!(r.groups().len(), 1);
        assert_eq!(
            p.abstain(1, 2).unwrap_err(),
            ModelError::TooManyAbstainers {
                group: 1,
                weight: 1,
                count: 2
            }
        );
    }

    #[test]
    fn abstain_composes() {
        let p = Profile::from_raw(2, vec![(vec![0], 3), (vec![1], 2)]).unwrap();
        assert_eq!(
            p.abstain(0, 1).unwrap().abstain(0, 1).unwrap(),
            p.abstain(0, 2).unwrap()
        );
    }

    #[test]
    fn instance_validates_committee_size() {
        let p = concurrence();
        assert!(ElectionInstance::new(p.clone(), 2).is_ok());
        assert!(matches!(
            ElectionInstance::new(p.clone(), 3),
            Err(ModelError::BadCommitteeSize { .. })
        ));
        assert!(matches!(
            ElectionInstance::new(p, 0),
            Err(ModelError::BadCommitteeSize { .. })
        ));
    }

    #[test]
    fn outcome_rejects_empty_and_mixed_sizes() {
        assert_eq!(Outcome::new(vec![]).unwrap_err(), ModelError::EmptyOutcome);
        let err = Outcome::new(vec![Committee::new([0]), Committee::new([0, 1])]).unwrap_err();
        assert_eq!(err, ModelError::UnequalCommitteeSizes);
    }

    #[test]
    fn text_format_round_trips() {
        let text = "3 2\n1: 0 1\n1: 1 2\n1: 0\n1: 2\n";
        let inst = ElectionInstance::from_text(text).unwrap();
        assert_eq!(inst.profile, concurrence());
        assert_eq!(inst.k, 2);
        let again = ElectionInstance::from_text(&inst.to_text()).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn text_format_reports_line_numbers() {
        let err = ElectionInstance::from_text("3 2\n1: 0 1\noops\n").unwrap_err();
        assert_eq!(err.line, 3);
        let err = ElectionInstance::from_text("2 2\n1: 0\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("committee size"));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# instance\n\n3 2   # header\n1: 0 1\n1: 1 2 # pair\n1: 0\n1: 2\n";
        let inst = ElectionInstance::from_text(text).unwrap();
        assert_eq!(inst.profile, concurrence());
    }

    #[test]
    fn json_round_trips_and_matches_text() {
        let text = "3 2\n1: 0 1\n1: 1 2\n1: 0\n1: 2\n";
        let inst = ElectionInstance::from_text(text).unwrap();
        let json = inst.to_json();
        let back = ElectionInstance::from_json(&json).unwrap();
        assert_eq!(back, inst);
        assert_eq!(ElectionInstance::from_str_any(&json).unwrap(), inst);
    }
}
