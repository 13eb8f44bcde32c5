//! Restricted exact cover by 3-sets: regular instances (3t triples over
//! a 3t-element universe, every element in exactly three triples), a
//! budgeted exact-cover search, and the reduction from such instances to
//! abstention analysis for budget-based committee rules.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{expect_score, expect_total, GeneratorError, ReducedInstance, Role};
use crate::model::{ElectionInstance, Profile};

/// A regular exact-cover-by-3-sets instance: universe `0..3t`, family of
/// `3t` triples, each element in exactly three of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rx3cInstance {
    t: usize,
    sets: Vec<[usize; 3]>,
}

impl Rx3cInstance {
    /// Validates the regularity invariants and rejects violations as
    /// [`GeneratorError::NotRegular`].
    pub fn new(t: usize, sets: Vec<[usize; 3]>) -> Result<Self, GeneratorError> {
        if t == 0 {
            return Err(GeneratorError::NotRegular("t must be at least 1".into()));
        }
        if sets.len() != 3 * t {
            return Err(GeneratorError::NotRegular(format!(
                "expected {} sets for t = {t}, got {}",
                3 * t,
                sets.len()
            )));
        }
        let mut occurrences = vec![0usize; 3 * t];
        for (i, s) in sets.iter().enumerate() {
            if s[0] == s[1] || s[0] == s[2] || s[1] == s[2] {
                return Err(GeneratorError::NotRegular(format!(
                    "set {i} has repeated elements: {s:?}"
                )));
            }
            for &e in s {
                if e >= 3 * t {
                    return Err(GeneratorError::NotRegular(format!(
                        "set {i} mentions element {e} outside the universe 0..{}",
                        3 * t
                    )));
                }
                occurrences[e] += 1;
            }
        }
        if let Some(e) = (0..3 * t).find(|&e| occurrences[e] != 3) {
            return Err(GeneratorError::NotRegular(format!(
                "element {e} appears in {} sets, not 3",
                occurrences[e]
            )));
        }
        Ok(Rx3cInstance { t, sets })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn universe_size(&self) -> usize {
        3 * self.t
    }

    pub fn sets(&self) -> &[[usize; 3]] {
        &self.sets
    }

    /// Parses one triple per line (three whitespace-separated element
    /// numbers). Blank lines and `#` comments are skipped; `t` is the
    /// line count divided by three.
    pub fn parse(text: &str) -> Result<Self, GeneratorError> {
        let mut sets = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let elements: Vec<usize> = line
                .split_whitespace()
                .map(|p| p.parse())
                .collect::<Result<_, _>>()
                .map_err(|_| {
                    GeneratorError::Parse(format!(
                        "line {}: expected element numbers, got {line:?}",
                        lineno + 1
                    ))
                })?;
            let [a, b, c] = elements[..] else {
                return Err(GeneratorError::Parse(format!(
                    "line {}: expected exactly three elements, got {}",
                    lineno + 1,
                    elements.len()
                )));
            };
            sets.push([a, b, c]);
        }
        if sets.len() % 3 != 0 {
            return Err(GeneratorError::Parse(format!(
                "number of sets ({}) is not a multiple of three",
                sets.len()
            )));
        }
        Rx3cInstance::new(sets.len() / 3, sets)
    }
}

/// Builds a solvable instance: a random partition of the universe into
/// triples, included three times over (so each partition is itself an
/// exact cover and each element lies in exactly three sets). The three
/// copies of a block are adjacent in the set order. Deterministic per
/// seed.
pub fn planted_rx3c(t: usize, seed: u64) -> Rx3cInstance {
    assert!(t >= 1, "planted instances need t >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..3 * t).collect();
    pool.shuffle(&mut rng);
    let mut sets = Vec::with_capacity(3 * t);
    for block in pool.chunks(3) {
        let mut s = [block[0], block[1], block[2]];
        s.sort_unstable();
        for _ in 0..3 {
            sets.push(s);
        }
    }
    Rx3cInstance::new(t, sets).expect("planted construction is regular")
}

/// Exhaustive exact-cover search over an arbitrary family of triples.
/// Picks the uncovered element with the fewest usable sets, tries each,
/// and backtracks; every search node costs one unit of `node_budget`.
/// Returns the chosen set indices (sorted) or `None` if no exact cover
/// exists.
pub fn exact_cover(
    universe_size: usize,
    sets: &[[usize; 3]],
    node_budget: u64,
) -> Result<Option<Vec<usize>>, GeneratorError> {
    let mut occurrences = vec![Vec::new(); universe_size];
    for (i, s) in sets.iter().enumerate() {
        for &e in s {
            if e >= universe_size {
                return Err(GeneratorError::NotRegular(format!(
                    "set {i} mentions element {e} outside the universe 0..{universe_size}"
                )));
            }
            occurrences[e].push(i);
        }
    }
    let mut search = Search {
        sets,
        occurrences,
        covered: vec![false; universe_size],
        chosen: Vec::new(),
        nodes_left: node_budget,
        budget: node_budget,
    };
    if search.run()? {
        search.chosen.sort_unstable();
        Ok(Some(search.chosen))
    } else {
        Ok(None)
    }
}

/// Runs [`exact_cover`] on a regular instance.
pub fn exact_cover_oracle(
    instance: &Rx3cInstance,
    node_budget: u64,
) -> Result<Option<Vec<usize>>, GeneratorError> {
    exact_cover(instance.universe_size(), instance.sets(), node_budget)
}

struct Search<'a> {
    sets: &'a [[usize; 3]],
    occurrences: Vec<Vec<usize>>,
    covered: Vec<bool>,
    chosen: Vec<usize>,
    nodes_left: u64,
    budget: u64,
}

impl Search<'_> {
    fn usable(&self, set: usize) -> bool {
        self.sets[set].iter().all(|&e| !self.covered[e])
    }

    fn run(&mut self) -> Result<bool, GeneratorError> {
        if self.nodes_left == 0 {
            return Err(GeneratorError::BudgetExceeded { budget: self.budget });
        }
        self.nodes_left -= 1;
        let mut tightest: Option<(usize, usize)> = None;
        for e in 0..self.covered.len() {
            if self.covered[e] {
                continue;
            }
            let count = self.occurrences[e].iter().filter(|&&s| self.usable(s)).count();
            if tightest.is_none_or(|(best, _)| count < best) {
                tightest = Some((count, e));
                if count == 0 {
                    break;
                }
            }
        }
        let Some((count, element)) = tightest else {
            return Ok(true);
        };
        if count == 0 {
            return Ok(false);
        }
        let options: Vec<usize> = self.occurrences[element]
            .iter()
            .copied()
            .filter(|&s| self.usable(s))
            .collect();
        for set in options {
            for &e in &self.sets[set] {
                self.covered[e] = true;
            }
            self.chosen.push(set);
            if self.run()? {
                return Ok(true);
            }
            self.chosen.pop();
            for &e in &self.sets[set] {
                self.covered[e] = false;
            }
        }
        Ok(false)
    }
}

/// Maps a regular cover instance to a weighted election in which one
/// designated voter can steer the committee by abstaining exactly when
/// the instance has an exact cover.
///
/// Candidates: six gadget candidates `g1..g6` (ids 0..6), one candidate
/// per set (ids `6..6+3t`), auxiliary candidates `a1..at`, and two
/// filler candidates `b1, b2`; the committee size is `4t + 5`. Voter
/// weights are polynomials in `t`; the construction needs
/// `t³ ≥ 90t² + 120t + 60` (so `t ≥ 92`) to keep its comparisons
/// ordered, and smaller `t` is rejected. The built profile is audited
/// against the closed-form voter and approval-score counts before being
/// returned.
pub fn rx3c_reduction(instance: &Rx3cInstance) -> Result<ReducedInstance, GeneratorError> {
    let t = instance.t() as u64;
    if t * t * t < 90 * t * t + 120 * t + 60 {
        return Err(GeneratorError::TBoundViolated { t });
    }
    let t3 = t * t * t;
    let tu = instance.t();
    let sets = instance.sets();

    // Candidate ids.
    let g = |i: usize| i - 1; // g1..g6 -> 0..6
    let c_set = |s: usize| 6 + s;
    let a_aux = |i: usize| 6 + 3 * tu + i; // i in 0..t
    let b1 = 6 + 4 * tu;
    let b2 = 7 + 4 * tu;
    let m = 4 * tu + 8;
    let k = 4 * tu + 5;

    let mut groups: Vec<(Vec<usize>, u64)> = Vec::new();
    for i in 0..tu {
        groups.push((vec![a_aux(i)], 10 * t3 + 45 * t));
        groups.push((vec![g(4), a_aux(i)], 15));
    }
    groups.push((vec![b1], 7 * t3));
    groups.push((vec![b2], 7 * t3 - (90 * t * t + 120 * t + 60)));
    for s in 0..sets.len() {
        groups.push((vec![c_set(s)], 10 * t3));
    }
    for e in 0..instance.universe_size() {
        let containing: Vec<usize> = (0..sets.len())
            .filter(|&s| sets[s].contains(&e))
            .map(c_set)
            .collect();
        let mut with_g1 = containing.clone();
        with_g1.push(g(1));
        groups.push((with_g1, 5));
        groups.push((containing, 15 * t));
    }
    groups.push((vec![g(1), g(2), g(3)], 1));
    groups.push((vec![g(1), g(4)], 4 * t3 + 30 * t + 13));
    groups.push((vec![g(1)], 6 * t3));
    groups.push((vec![g(2)], 3 * t3 + 11));
    groups.push((vec![g(3)], 3 * t3 + 11));
    groups.push((vec![g(5)], 12));
    groups.push((vec![g(6)], 12));
    groups.push((vec![g(2), g(5)], 7 * t3 + 30 * t));
    groups.push((vec![g(3), g(6)], 7 * t3 + 30 * t));
    groups.push((vec![g(4), g(5)], 3 * t3));
    groups.push((vec![g(4), g(6)], 3 * t3));

    let profile = Profile::from_raw(m, groups)?;
    let instance = ElectionInstance::new(profile, k)?;

    expect_total(&instance, 10 * t3 * (4 * t + 5))?;
    expect_score(&instance, g(1), 10 * t3 + 45 * t + 14, "g1")?;
    expect_score(&instance, g(2), 10 * t3 + 30 * t + 12, "g2")?;
    expect_score(&instance, g(3), 10 * t3 + 30 * t + 12, "g3")?;
    expect_score(&instance, g(4), 10 * t3 + 45 * t + 13, "g4")?;
    expect_score(&instance, g(5), 10 * t3 + 30 * t + 12, "g5")?;
    expect_score(&instance, g(6), 10 * t3 + 30 * t + 12, "g6")?;
    expect_score(&instance, b1, 7 * t3, "b1")?;
    expect_score(&instance, b2, 7 * t3 - (90 * t * t + 120 * t + 60), "b2")?;
    for i in 0..tu {
        expect_score(&instance, a_aux(i), 10 * t3 + 45 * t + 15, "an auxiliary candidate")?;
    }
    for s in 0..sets.len() {
        expect_score(&instance, c_set(s), 10 * t3 + 45 * t + 15, "a set candidate")?;
    }

    let abstainer_ballot = [g(1), g(2), g(3)].into_iter().collect();
    let abstainer_group = instance
        .profile
        .group_index(&abstainer_ballot)
        .expect("the three-gadget ballot forms its own group");

    let mut roles = Vec::with_capacity(m);
    roles.extend((1..=6).map(|i| Role::Gadget(i)));
    roles.extend((0..3 * tu).map(Role::SetCopy));
    roles.extend((1..=tu).map(Role::Aux));
    roles.push(Role::Dummy(1));
    roles.push(Role::Dummy(2));

    Ok(ReducedInstance {
        instance,
        abstainer_group,
        roles,
    })
}
