//! Candidate symmetries of a profile mid-run, used by the branching engine
//! to explore one representative per orbit of a tie set.
//!
//! A candidate permutation π is *valid at a state* when it is an
//! automorphism of the weighted profile (every group's ballot maps to a
//! group of equal weight), fixes the chosen set setwise, and preserves the
//! per-group rule data. Every rule query is a function of exactly that
//! data, so a valid π commutes with the remainder of the run: the subtree
//! after electing π(c) is the π-image of the subtree after electing c.
//! Branching on orbit representatives and closing the collected committees
//! under the node's valid permutations is therefore exact.
//!
//! Permutations are found by color refinement (Weisfeiler–Leman style over
//! the candidate/group incidence structure, with weights, chosen flags and
//! rule data baked into the initial colors) plus individualization when
//! refinement alone does not separate candidates. Every candidate
//! permutation is re-verified from first principles before use;
//! refinement only guides the search and cannot introduce unsoundness.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::{Hash, Hasher};
use std::rc::Rc;

use crate::bitset::BitSet;
use crate::model::{CandidateId, Profile};
use crate::sequential::{RuleData, SeqState};

/// A compiled candidate permutation: the static (profile) part is checked
/// at construction, so per-state re-validation only has to compare rule
/// data on the group pairs the permutation actually moves.
#[derive(Debug, Clone)]
pub(crate) struct Perm {
    pub map: Vec<usize>,
    moved_candidates: Vec<usize>,
    /// Pairs (g, h): group g's ballot maps onto group h's ballot.
    moved_groups: Vec<(usize, usize)>,
}

impl Perm {
    /// Compiles `map` against the static profile. `None` when `map` is not
    /// an automorphism of the weighted profile.
    pub fn compile(profile: &Profile, map: Vec<usize>) -> Option<Perm> {
        debug_assert_eq!(map.len(), profile.m());
        let moved_candidates: Vec<usize> =
            (0..profile.m()).filter(|&c| map[c] != c).collect();
        let mut moved_groups = Vec::new();
        for (g, grp) in profile.groups().iter().enumerate() {
            if grp.ballot.iter().all(|&c| map[c] == c) {
                continue;
            }
            let image: std::collections::BTreeSet<CandidateId> =
                grp.ballot.iter().map(|&c| map[c]).collect();
            if image == grp.ballot {
                continue;
            }
            let h = profile.group_index(&image)?;
            if profile.group(h).weight != grp.weight {
                return None;
            }
            moved_groups.push((g, h));
        }
        Some(Perm {
            map,
            moved_candidates,
            moved_groups,
        })
    }

    /// Checks the dynamic part: chosen set fixed setwise, rule data equal
    /// across every moved group pair.
    pub fn valid_at(&self, state: &SeqState) -> bool {
        for &c in &self.moved_candidates {
            if state.chosen.contains(c) != state.chosen.contains(self.map[c]) {
                return false;
            }
        }
        for &(g, h) in &self.moved_groups {
            if !data_slots_equal(&state.data, g, h) {
                return false;
            }
        }
        true
    }

    pub fn apply_set(
        &self,
        set: &std::collections::BTreeSet<CandidateId>,
    ) -> std::collections::BTreeSet<CandidateId> {
        set.iter().map(|&c| self.map[c]).collect()
    }
}

fn data_slots_equal(data: &RuleData, g: usize, h: usize) -> bool {
    match data {
        RuleData::Thiele { counts } => counts[g] == counts[h],
        RuleData::Phragmen { loads } => loads[g] == loads[h],
        RuleData::MesOne { budgets } => budgets[g] == budgets[h],
        RuleData::MesTwo { events } => events[g] == events[h],
    }
}

fn hash_one<T: Hash>(tag: u8, value: &T) -> u64 {
    let mut h = DefaultHasher::new();
    tag.hash(&mut h);
    value.hash(&mut h);
    h.finish()
}

fn data_slot_hash(data: &RuleData, g: usize) -> u64 {
    use crate::rational::hash_parts;
    let mut h = DefaultHasher::new();
    match data {
        RuleData::Thiele { counts } => {
            1u8.hash(&mut h);
            counts[g].hash(&mut h);
        }
        RuleData::Phragmen { loads } => {
            2u8.hash(&mut h);
            hash_parts(&loads[g], &mut h);
        }
        RuleData::MesOne { budgets } => {
            3u8.hash(&mut h);
            hash_parts(&budgets[g], &mut h);
        }
        RuleData::MesTwo { events } => {
            4u8.hash(&mut h);
            hash_parts(&events[g].0, &mut h);
            hash_parts(&events[g].1, &mut h);
        }
    }
    h.finish()
}

/// Initial group colors: weight plus the group's rule-data slot. These do
/// not depend on pins, so one node computes them once and shares them
/// across every refinement run of its searches.
fn initial_group_colors(profile: &Profile, state: &SeqState) -> Vec<u64> {
    (0..profile.groups().len())
        .map(|g| hash_one(11, &(profile.group(g).weight, data_slot_hash(&state.data, g))))
        .collect()
}

/// Color refinement over the candidate/group incidence structure.
/// Returns stable candidate colors; candidates with different colors are
/// in different orbits of the state's automorphism group (the converse
/// need not hold, which is why search results are verified).
fn refine_colors(
    profile: &Profile,
    state: &SeqState,
    pins: &[(usize, u32)],
    grp_init: &[u64],
) -> Vec<u64> {
    let m = profile.m();
    let groups = profile.groups();
    let mut cand: Vec<u64> = (0..m)
        .map(|c| {
            let pin = pins.iter().find(|(p, _)| *p == c).map(|(_, t)| *t);
            hash_one(10, &(state.chosen.contains(c), pin))
        })
        .collect();
    let mut grp: Vec<u64> = grp_init.to_vec();
    let mut distinct = 0usize;
    for _ in 0..12 {
        let mut next_grp = Vec::with_capacity(grp.len());
        for (g, group) in groups.iter().enumerate() {
            let mut neigh: Vec<u64> = group.ballot.iter().map(|&c| cand[c]).collect();
            neigh.sort_unstable();
            next_grp.push(hash_one(12, &(grp[g], neigh)));
        }
        let mut next_cand = Vec::with_capacity(m);
        for c in 0..m {
            let mut neigh: Vec<u64> = profile.supporters(c).iter().map(|&g| next_grp[g]).collect();
            neigh.sort_unstable();
            next_cand.push(hash_one(13, &(cand[c], neigh)));
        }
        cand = next_cand;
        grp = next_grp;
        let now = {
            let mut seen: Vec<u64> = cand.clone();
            seen.sort_unstable();
            seen.dedup();
            seen.len()
        };
        if now == distinct {
            break;
        }
        distinct = now;
    }
    cand
}

struct PermSearch<'a> {
    profile: &'a Profile,
    state: &'a SeqState,
    grp_init: &'a [u64],
    budget: u64,
}

impl<'a> PermSearch<'a> {
    /// Individualization–refinement: pins force `a ↔ b`, refinement
    /// propagates, and unresolved classes are split by pinning a fresh
    /// pair. Returns an unverified candidate mapping.
    fn run(
        &mut self,
        pins_a: &mut Vec<(usize, u32)>,
        pins_b: &mut Vec<(usize, u32)>,
        next_tag: u32,
    ) -> Option<Vec<usize>> {
        if self.budget == 0 {
            return None;
        }
        self.budget -= 1;
        let ca = refine_colors(self.profile, self.state, pins_a, self.grp_init);
        let cb = refine_colors(self.profile, self.state, pins_b, self.grp_init);
        let mut classes_a: HashMap<u64, Vec<usize>> = HashMap::new();
        let mut classes_b: HashMap<u64, Vec<usize>> = HashMap::new();
        for c in 0..self.profile.m() {
            classes_a.entry(ca[c]).or_default().push(c);
            classes_b.entry(cb[c]).or_default().push(c);
        }
        if classes_a.len() != classes_b.len() {
            return None;
        }
        let mut map = vec![usize::MAX; self.profile.m()];
        let mut split: Option<(Vec<usize>, Vec<usize>)> = None;
        let mut untouched: Vec<Vec<usize>> = Vec::new();
        for (color, members_a) in &classes_a {
            let members_b = classes_b.get(color)?;
            if members_a.len() != members_b.len() {
                return None;
            }
            if members_a.len() == 1 {
                map[members_a[0]] = members_b[0];
            } else if members_a == members_b {
                // The class has the same members on both sides: the pins
                // did not touch this part of the profile, so the identity
                // completes it. Committing to the identity instead of
                // individualizing keeps clone-heavy instances from paying
                // one recursion level per interchangeable class; the
                // finished map is verified like any other.
                untouched.push(members_a.clone());
            } else if split
                .as_ref()
                .map(|(s, _)| members_a.len() < s.len())
                .unwrap_or(true)
            {
                split = Some((members_a.clone(), members_b.clone()));
            }
        }
        match split {
            None => {
                for class in untouched {
                    for u in class {
                        map[u] = u;
                    }
                }
                Some(map)
            }
            Some((members_a, members_b)) => {
                let u = *members_a.iter().min().unwrap();
                let mut targets = members_b.clone();
                targets.sort_unstable();
                for v in targets {
                    pins_a.push((u, next_tag));
                    pins_b.push((v, next_tag));
                    let found = self.run(pins_a, pins_b, next_tag + 1);
                    pins_a.pop();
                    pins_b.pop();
                    if found.is_some() {
                        return found;
                    }
                    if self.budget == 0 {
                        return None;
                    }
                }
                None
            }
        }
    }
}

/// Searches for a valid permutation sending `a` to `b`. The result has
/// passed both static compilation and dynamic validation.
fn search_perm(
    profile: &Profile,
    state: &SeqState,
    grp_init: &[u64],
    a: CandidateId,
    b: CandidateId,
    budget: &mut u64,
) -> Option<Perm> {
    let mut search = PermSearch {
        profile,
        state,
        grp_init,
        budget: *budget,
    };
    let mut pins_a = vec![(a, 0u32)];
    let mut pins_b = vec![(b, 0u32)];
    let map = search.run(&mut pins_a, &mut pins_b, 1);
    *budget = search.budget;
    let map = map?;
    if map.contains(&usize::MAX) || map[a] != b {
        return None;
    }
    let mut seen = vec![false; map.len()];
    for &d in &map {
        if seen[d] {
            return None;
        }
        seen[d] = true;
    }
    let perm = Perm::compile(profile, map)?;
    if perm.valid_at(state) {
        Some(perm)
    } else {
        None
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// The symmetry information the engine uses at one branching node.
pub(crate) struct NodeSymmetry {
    /// Permutations valid at this state (used to close committee sets).
    pub gens: Vec<Rc<Perm>>,
    /// One representative per orbit of the tie set, ascending.
    pub reps: Vec<CandidateId>,
}

/// Cross-node cache of discovered permutations. Compilation against the
/// static profile happens once; each node cheaply re-validates the cached
/// permutations against its own rule data and searches only for links
/// between orbit representatives that refinement colors alike.
///
/// Eviction is first-in-first-out: as a run progresses, the links it needs
/// drift (each choice retires some permutations and calls for new ones),
/// so the cache must keep admitting late discoveries — a frozen cache
/// would force a fresh search at every node for the rest of the run.
/// Pairs that a search has exhaustively refuted are remembered too and
/// never searched again in this run; like every heuristic here, both
/// policies only steer which permutations get found, not how the found
/// ones are used.
pub(crate) struct SymmetryCache {
    gens: VecDeque<Rc<Perm>>,
    max_gens: usize,
    /// `(a, b, shared refinement color)` triples a search has exhaustively
    /// refuted. The color pins the refutation to its structural context:
    /// after backtracking, a state where the pair is symmetric again
    /// colors the pair differently and is not suppressed.
    refuted: HashSet<(usize, usize, u64)>,
}

/// Nodes whose ties the cache already links pay no search at all, so a
/// single search is allowed a healthy slice of the node budget: deep
/// individualization chains (nested clone classes) fit, while a doomed
/// search cannot starve the rest of the node.
const PER_SEARCH_BUDGET: u64 = 200;

impl SymmetryCache {
    pub fn new() -> Self {
        SymmetryCache {
            gens: VecDeque::new(),
            max_gens: 512,
            refuted: HashSet::new(),
        }
    }

    fn remember(&mut self, perm: Rc<Perm>) {
        if self.gens.len() == self.max_gens {
            self.gens.pop_front();
        }
        self.gens.push_back(perm);
    }

    pub fn node_symmetry(
        &mut self,
        profile: &Profile,
        state: &SeqState,
        tied: &[CandidateId],
        search_budget: u64,
    ) -> NodeSymmetry {
        let mut valid: Vec<Rc<Perm>> = self
            .gens
            .iter()
            .filter(|p| p.valid_at(state))
            .cloned()
            .collect();
        if tied.len() <= 1 {
            return NodeSymmetry {
                gens: valid,
                reps: tied.to_vec(),
            };
        }
        let mut in_tie = BitSet::new(profile.m());
        for &c in tied {
            in_tie.insert(c);
        }
        let mut uf = UnionFind::new(profile.m());
        for p in &valid {
            for &c in tied {
                let d = p.map[c];
                if d != c && in_tie.contains(d) {
                    uf.union(c, d);
                }
            }
        }
        let reps = |uf: &mut UnionFind| -> Vec<usize> {
            let mut out: Vec<usize> = tied.iter().map(|&c| uf.find(c)).collect();
            out.sort_unstable();
            out.dedup();
            out
        };
        let mut budget = search_budget;
        let current = reps(&mut uf);
        if current.len() > 1 && budget > 0 {
            // Try to link consecutive same-color representatives; chains
            // of adjacent links survive later choices better than stars.
            let grp_init = initial_group_colors(profile, state);
            let colors = refine_colors(profile, state, &[], &grp_init);
            let mut by_color: HashMap<u64, Vec<usize>> = HashMap::new();
            for &r in &current {
                by_color.entry(colors[r]).or_default().push(r);
            }
            let mut classes: Vec<Vec<usize>> = by_color.into_values().collect();
            classes.sort_by_key(|c| c[0]);
            for class in classes {
                for pair in class.windows(2) {
                    if budget == 0 {
                        break;
                    }
                    if uf.find(pair[0]) == uf.find(pair[1]) {
                        continue;
                    }
                    // Clones (same supporter structure) are linked by the
                    // bare transposition; try it before the general search.
                    let swap = {
                        let mut map: Vec<usize> = (0..profile.m()).collect();
                        map.swap(pair[0], pair[1]);
                        Perm::compile(profile, map).filter(|p| p.valid_at(state))
                    };
                    let found = swap.or_else(|| {
                        let key = (pair[0], pair[1], colors[pair[0]]);
                        if self.refuted.contains(&key) {
                            return None;
                        }
                        let mut slice = budget.min(PER_SEARCH_BUDGET);
                        let spent_from = slice;
                        let found =
                            search_perm(profile, state, &grp_init, pair[0], pair[1], &mut slice);
                        budget -= spent_from - slice;
                        if found.is_none() && slice > 0 {
                            // The search space was exhausted, not the
                            // budget: the pair is genuinely asymmetric in
                            // this context.
                            self.refuted.insert(key);
                        }
                        found
                    });
                    if let Some(perm) = found {
                        for &c in tied {
                            let d = perm.map[c];
                            if d != c && in_tie.contains(d) {
                                uf.union(c, d);
                            }
                        }
                        let perm = Rc::new(perm);
                        valid.push(perm.clone());
                        self.remember(perm);
                    }
                }
            }
        }
        NodeSymmetry {
            gens: valid,
            reps: reps(&mut uf),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Profile;
    use crate::sequential::SequentialRule;

    fn disjoint_pairs() -> Profile {
        // Two interchangeable blocks {0,1} and {2,3}, plus a fixed candidate 4.
        Profile::from_raw(
            5,
            vec![(vec![0, 1], 2), (vec![2, 3], 2), (vec![4], 1)],
        )
        .unwrap()
    }

    #[test]
    fn compile_rejects_weight_mismatch() {
        let p = Profile::from_raw(2, vec![(vec![0], 1), (vec![1], 2)]).unwrap();
        assert!(Perm::compile(&p, vec![1, 0]).is_none());
    }

    #[test]
    fn compile_accepts_block_swap() {
        let p = disjoint_pairs();
        // 0↔2, 1↔3 maps the first block's ballot onto the second's.
        let perm = Perm::compile(&p, vec![2, 3, 0, 1, 4]).unwrap();
        let rule = SequentialRule::Phragmen;
        let state = rule.initial_state(&p, 2);
        assert!(perm.valid_at(&state));
    }

    #[test]
    fn validity_breaks_after_asymmetric_choice() {
        let p = disjoint_pairs();
        let perm = Perm::compile(&p, vec![2, 3, 0, 1, 4]).unwrap();
        let rule = SequentialRule::Phragmen;
        let state = rule.initial_state(&p, 2);
        let state = rule.apply(&p, &state, 0).unwrap();
        // Candidate 0 chosen but its image 2 is not, and the first group
        // now carries load while the second does not.
        assert!(!perm.valid_at(&state));
    }

    #[test]
    fn search_finds_the_swap() {
        let p = disjoint_pairs();
        let rule = SequentialRule::Phragmen;
        let state = rule.initial_state(&p, 2);
        let grp_init = initial_group_colors(&p, &state);
        let mut budget = 1000;
        let perm = search_perm(&p, &state, &grp_init, 0, 2, &mut budget).expect("swap exists");
        assert_eq!(perm.map[0], 2);
        assert!(perm.valid_at(&state));
    }

    #[test]
    fn search_refuses_asymmetric_pair() {
        let p = disjoint_pairs();
        let rule = SequentialRule::Phragmen;
        let state = rule.initial_state(&p, 2);
        let grp_init = initial_group_colors(&p, &state);
        let mut budget = 1000;
        assert!(search_perm(&p, &state, &grp_init, 0, 4, &mut budget).is_none());
    }

    #[test]
    fn node_symmetry_collapses_symmetric_ties() {
        let p = disjoint_pairs();
        let rule = SequentialRule::Phragmen;
        let state = rule.initial_state(&p, 2);
        let mut cache = SymmetryCache::new();
        let sym = cache.node_symmetry(&p, &state, &[0, 1, 2, 3], 1000);
        assert_eq!(sym.reps, vec![0]);
        // Cached generators revalidate instantly on a fresh equal state.
        let sym2 = cache.node_symmetry(&p, &state, &[0, 1, 2, 3], 0);
        assert_eq!(sym2.reps, vec![0]);
    }
}
