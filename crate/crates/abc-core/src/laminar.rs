//! Laminar profiles: every two candidates have nested or disjoint
//! supporter sets. Such profiles generalize party lists and decompose
//! into a forest of candidate *clone classes* (candidates with identical
//! supporter sets), where a class's parent is the nearest class with a
//! strictly larger supporter set and every ballot is exactly a class
//! together with all of its ancestors (its *up-set*).

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{BallotGroup, CandidateId, ModelError, Profile};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LaminarError {
    #[error(
        "profile is not laminar: candidates {c} and {d} have overlapping, non-nested supporter sets"
    )]
    NotLaminar { c: CandidateId, d: CandidateId },
}

/// Containment/disjointness relation between two sorted supporter lists.
fn classify(a: &[usize], b: &[usize]) -> (bool, bool, bool) {
    // (a ⊆ b, b ⊆ a, disjoint)
    let sa: BTreeSet<usize> = a.iter().copied().collect();
    let sb: BTreeSet<usize> = b.iter().copied().collect();
    let a_in_b = sa.is_subset(&sb);
    let b_in_a = sb.is_subset(&sa);
    let disjoint = sa.is_disjoint(&sb);
    (a_in_b, b_in_a, disjoint)
}

fn first_violation(profile: &Profile) -> Option<(CandidateId, CandidateId)> {
    for c in 0..profile.m() {
        for d in (c + 1)..profile.m() {
            let (cd, dc, disjoint) = classify(profile.supporters(c), profile.supporters(d));
            if !cd && !dc && !disjoint {
                return Some((c, d));
            }
        }
    }
    None
}

/// Do all candidate pairs have nested or disjoint supporter sets?
/// Weights are irrelevant: the relation lives on ballot groups.
pub fn is_laminar(profile: &Profile) -> bool {
    first_violation(profile).is_none()
}

/// One node of the laminar forest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CloneClass {
    /// Candidates sharing this supporter set, ascending.
    pub candidates: Vec<CandidateId>,
    /// Index of the class with the smallest strictly larger supporter
    /// set; `None` for roots.
    pub parent: Option<usize>,
    /// Weight of the ballot group equal to this class's up-set (0 when no
    /// such ballot was cast).
    pub weight: u64,
    /// The shared supporter set (ballot-group indices, ascending).
    pub supporters: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct LaminarForest {
    classes: Vec<CloneClass>,
    m: usize,
}

impl LaminarForest {
    pub fn classes(&self) -> &[CloneClass] {
        &self.classes
    }

    /// Index of the class containing `c`.
    pub fn class_of(&self, c: CandidateId) -> usize {
        self.classes
            .iter()
            .position(|cl| cl.candidates.contains(&c))
            .expect("every candidate belongs to a class")
    }

    /// The class's candidates together with all ancestors' candidates.
    pub fn up_set(&self, class: usize) -> BTreeSet<CandidateId> {
        let mut out: BTreeSet<CandidateId> = BTreeSet::new();
        let mut cursor = Some(class);
        while let Some(i) = cursor {
            out.extend(self.classes[i].candidates.iter().copied());
            cursor = self.classes[i].parent;
        }
        out
    }

    /// Re-emits the forest as ballots (up-sets with node weights). For a
    /// forest built from a profile this reproduces it exactly.
    pub fn to_profile(&self) -> Result<Profile, ModelError> {
        let groups = self
            .classes
            .iter()
            .enumerate()
            .filter(|(_, cl)| cl.weight > 0)
            .map(|(i, cl)| BallotGroup {
                ballot: self.up_set(i),
                weight: cl.weight,
            });
        Profile::new(self.m, groups)
    }

    /// Graphviz rendering: one box per clone class, edges parent → child.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph laminar {\n  rankdir=TB;\n  node [shape=box];\n");
        for (i, cl) in self.classes.iter().enumerate() {
            let members = cl
                .candidates
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(out, "  c{i} [label=\"{{{members}}} w={}\"];", cl.weight);
        }
        for (i, cl) in self.classes.iter().enumerate() {
            if let Some(p) = cl.parent {
                let _ = writeln!(out, "  c{p} -> c{i};");
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Decomposes a laminar profile into its forest of clone classes.
pub fn laminar_forest(profile: &Profile) -> Result<LaminarForest, LaminarError> {
    if let Some((c, d)) = first_violation(profile) {
        return Err(LaminarError::NotLaminar { c, d });
    }
    // Clone classes: candidates keyed by their exact supporter list.
    let mut by_supporters: Vec<(Vec<usize>, Vec<CandidateId>)> = Vec::new();
    for c in 0..profile.m() {
        let key = profile.supporters(c).to_vec();
        match by_supporters.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(c),
            None => by_supporters.push((key, vec![c])),
        }
    }
    by_supporters.sort_by_key(|(_, members)| members[0]);
    // Parent: the smallest strict superset among the other classes. By
    // laminarity all strict supersets of a non-empty set form a chain, so
    // the smallest one is unique.
    let mut classes: Vec<CloneClass> = Vec::with_capacity(by_supporters.len());
    for (key, members) in &by_supporters {
        let mut parent: Option<usize> = None;
        if !key.is_empty() {
            for (j, (other, _)) in by_supporters.iter().enumerate() {
                if other.len() <= key.len() {
                    continue;
                }
                let (sub, _, _) = classify(key, other);
                if sub
                    && parent
                        .map(|p: usize| other.len() < by_supporters[p].0.len())
                        .unwrap_or(true)
                {
                    parent = Some(j);
                }
            }
        }
        classes.push(CloneClass {
            candidates: members.clone(),
            parent,
            weight: 0,
            supporters: key.clone(),
        });
    }
    let mut forest = LaminarForest {
        classes,
        m: profile.m(),
    };
    // Node weights: the weight of the ballot equal to the node's up-set.
    // In a laminar profile every ballot is such an up-set, so the total
    // re-emitted weight matches the profile.
    for i in 0..forest.classes.len() {
        let up = forest.up_set(i);
        forest.classes[i].weight = profile
            .group_index(&up)
            .map(|g| profile.group(g).weight)
            .unwrap_or(0);
    }
    debug_assert_eq!(
        forest.classes.iter().map(|c| c.weight).sum::<u64>(),
        profile.n(),
        "every ballot of a laminar profile is an up-set"
    );
    Ok(forest)
}

/// First position in `sequence` where a candidate is picked while some
/// unchosen candidate with a strictly larger (non-equal) supporter set
/// remains, or `None` if the order respects the forest. On laminar
/// profiles the sequential rules studied here never violate this.
pub fn forest_order_violation(profile: &Profile, sequence: &[CandidateId]) -> Option<usize> {
    let mut chosen = vec![false; profile.m()];
    for (pos, &c) in sequence.iter().enumerate() {
        if !profile.supporters(c).is_empty() {
            for d in 0..profile.m() {
                if chosen[d] || d == c {
                    continue;
                }
                let (cd, dc, _) = classify(profile.supporters(c), profile.supporters(d));
                if cd && !dc {
                    return Some(pos);
                }
            }
        }
        chosen[c] = true;
    }
    None
}

/// Seeded random laminar profile: a random forest over `m` candidates
/// (clone classes of size 1–2, at most `branching` children per node, at
/// most `depth` levels) emitted as up-set ballots with weights drawn from
/// `weight_range`. `depth == 1` yields a party-list profile.
pub fn random_laminar(
    m: usize,
    depth: usize,
    branching: usize,
    weight_range: (u64, u64),
    seed: u64,
) -> Profile {
    assert!(m >= 1 && depth >= 1 && branching >= 1);
    let (lo, hi) = weight_range;
    assert!(lo <= hi, "empty weight range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<CandidateId> = (0..m).collect();
    pool.shuffle(&mut rng);
    let mut pool = std::collections::VecDeque::from(pool);

    struct Node {
        members: Vec<CandidateId>,
        parent: Option<usize>,
        level: usize,
    }
    let mut nodes: Vec<Node> = Vec::new();
    let mut frontier: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    while !pool.is_empty() {
        let (parent, level) = match frontier.pop_front() {
            Some(p) if nodes[p].level < depth => (Some(p), nodes[p].level + 1),
            _ => (None, 1),
        };
        let children = if parent.is_some() {
            rng.gen_range(0..=branching)
        } else {
            1
        };
        for _ in 0..children {
            if pool.is_empty() {
                break;
            }
            let size = rng.gen_range(1..=2usize).min(pool.len());
            let members: Vec<CandidateId> = (0..size).map(|_| pool.pop_front().unwrap()).collect();
            nodes.push(Node {
                members,
                parent,
                level,
            });
            frontier.push_back(nodes.len() - 1);
        }
    }

    let mut weights: Vec<u64> = (0..nodes.len()).map(|_| rng.gen_range(lo..=hi)).collect();
    if weights.iter().all(|&w| w == 0) {
        weights[0] = 1;
    }
    let groups = nodes.iter().enumerate().map(|(i, _)| {
        let mut ballot: BTreeSet<CandidateId> = BTreeSet::new();
        let mut cursor = Some(i);
        while let Some(j) = cursor {
            ballot.extend(nodes[j].members.iter().copied());
            cursor = nodes[j].parent;
        }
        BallotGroup {
            ballot,
            weight: weights[i],
        }
    });
    Profile::new(m, groups).expect("generated forest always has a positive-weight ballot")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Profile;

    #[test]
    fn party_lists_are_laminar() {
        let p = Profile::from_raw(4, vec![(vec![0, 1], 2), (vec![2, 3], 1)]).unwrap();
        assert!(is_laminar(&p));
    }

    #[test]
    fn pairwise_overlap_is_not_laminar() {
        let p = Profile::from_raw(
            3,
            vec![(vec![0, 1], 1), (vec![1, 2], 1), (vec![0, 2], 1)],
        )
        .unwrap();
        assert!(!is_laminar(&p));
        let err = laminar_forest(&p).unwrap_err();
        assert!(matches!(err, LaminarError::NotLaminar { .. }));
    }

    #[test]
    fn nested_supporters_are_laminar() {
        let p = Profile::from_raw(2, vec![(vec![0, 1], 1), (vec![1], 1)]).unwrap();
        assert!(is_laminar(&p));
        let forest = laminar_forest(&p).unwrap();
        // 1 is the root class (both groups support it), 0 its child.
        let root = forest.class_of(1);
        let child = forest.class_of(0);
        assert_eq!(forest.classes()[root].parent, None);
        assert_eq!(forest.classes()[child].parent, Some(root));
        assert_eq!(forest.up_set(child), [0, 1].into_iter().collect());
    }

    #[test]
    fn clones_share_a_class() {
        let p = Profile::from_raw(3, vec![(vec![0, 1, 2], 2), (vec![0, 1], 1)]).unwrap();
        let forest = laminar_forest(&p).unwrap();
        assert_eq!(forest.classes().len(), 2);
        let root = forest.class_of(0);
        assert_eq!(forest.classes()[root].candidates, vec![0, 1]);
        assert_eq!(forest.classes()[root].weight, 1);
        let child = forest.class_of(2);
        assert_eq!(forest.classes()[child].parent, Some(root));
        assert_eq!(forest.classes()[child].weight, 2);
    }

    #[test]
    fn round_trip_reproduces_the_profile() {
        let p = Profile::from_raw(
            5,
            vec![
                (vec![0, 1], 3),
                (vec![0, 1, 2], 1),
                (vec![3], 2),
                (vec![3, 4], 1),
            ],
        )
        .unwrap();
        let forest = laminar_forest(&p).unwrap();
        assert_eq!(forest.to_profile().unwrap(), p);
    }

    #[test]
    fn unsupported_candidates_form_a_rootless_class() {
        let p = Profile::from_raw(4, vec![(vec![0], 1)]).unwrap();
        let forest = laminar_forest(&p).unwrap();
        let empty = forest.class_of(1);
        assert_eq!(forest.classes()[empty].candidates, vec![1, 2, 3]);
        assert_eq!(forest.classes()[empty].parent, None);
        assert_eq!(forest.classes()[empty].weight, 0);
        assert_eq!(forest.to_profile().unwrap(), p);
    }

    #[test]
    fn generated_profiles_are_laminar_and_deterministic() {
        for seed in 0..20 {
            let p = random_laminar(8, 3, 2, (0, 3), seed);
            assert!(is_laminar(&p), "seed {seed}");
            let q = random_laminar(8, 3, 2, (0, 3), seed);
            assert_eq!(p, q, "seed {seed} must be deterministic");
        }
    }

    #[test]
    fn depth_one_gives_party_lists() {
        let p = random_laminar(9, 1, 3, (1, 2), 7);
        assert!(is_laminar(&p));
        // Party list: all ballots pairwise disjoint.
        let groups = p.groups();
        for i in 0..groups.len() {
            for j in (i + 1)..groups.len() {
                assert!(groups[i].ballot.is_disjoint(&groups[j].ballot));
            }
        }
    }

    #[test]
    fn order_violations_are_detected() {
        // Root class {1} must precede its child {0}.
        let p = Profile::from_raw(2, vec![(vec![0, 1], 1), (vec![1], 1)]).unwrap();
        assert_eq!(forest_order_violation(&p, &[1, 0]), None);
        assert_eq!(forest_order_violation(&p, &[0, 1]), Some(0));
    }

    #[test]
    fn dot_output_mentions_every_class() {
        let p = Profile::from_raw(2, vec![(vec![0, 1], 1), (vec![1], 1)]).unwrap();
        let forest = laminar_forest(&p).unwrap();
        let dot = forest.to_dot();
        assert!(dot.contains("digraph"));
        assert!(dot.contains("w=1"));
        assert!(dot.contains("->"));
    }
}
