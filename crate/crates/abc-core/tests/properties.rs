//! Randomized cross-checks of the library's independent implementations:
//! the reference branching engine against the memoizing/symmetry engine,
//! sequential approval voting against exhaustive scoring, the two
//! formulations of Phragmén's method against each other, and structural
//! invariants of outcome comparisons and laminar decompositions.

use std::collections::BTreeSet;

use proptest::prelude::*;

use abc_core::laminar::{is_laminar, laminar_forest, random_laminar};
use abc_core::participation::{kelly_compare, KellyComparison};
use abc_core::scoring::DEFAULT_SUBSET_CAP;
use abc_core::sequential::{SeqState, StepResult};
use abc_core::{
    elect_scoring, enumerate_outcomes, BallotGroup, Committee, ElectionInstance, EngineConfig,
    Outcome, Profile, ScoringFunction, SequentialRule,
};

fn arb_instance() -> impl Strategy<Value = ElectionInstance> {
    (2..=5usize)
        .prop_flat_map(|m| {
            let ballots = prop::collection::vec(
                (prop::collection::btree_set(0..m, 1..=m), 1..=3u64),
                1..=6,
            );
            (Just(m), ballots, 1..=4usize)
        })
        .prop_map(|(m, ballots, k_raw)| {
            let groups = ballots.into_iter().map(|(b, w)| BallotGroup::new(b, w));
            let profile = Profile::new(m, groups).expect("generated groups are valid");
            let k = k_raw.clamp(1, m - 1);
            ElectionInstance::new(profile, k).expect("k < m by construction")
        })
}

fn all_rules() -> Vec<SequentialRule> {
    vec![
        SequentialRule::seq_av(6),
        SequentialRule::seq_pav(6),
        SequentialRule::seq_ccav(6),
        SequentialRule::Phragmen,
        SequentialRule::PhragmenMoney,
        SequentialRule::mes(),
        SequentialRule::mes_phase_one(),
    ]
}

proptest! {
    /// The plain branching engine and the memoizing/symmetry-reducing
    /// engine must produce identical committee sets on every rule.
    #[test]
    fn both_engine_strategies_agree(instance in arb_instance()) {
        let reference = EngineConfig { quotient: false, ..EngineConfig::default() };
        let reduced = EngineConfig::default();
        for rule in all_rules() {
            let a = enumerate_outcomes(&rule, &instance, &reference).unwrap();
            let b = enumerate_outcomes(&rule, &instance, &reduced).unwrap();
            prop_assert_eq!(&a.committees, &b.committees, "rule {}", rule.name());
            prop_assert_eq!(a.no_buyer, b.no_buyer, "rule {}", rule.name());
        }
    }

    /// Greedy approval voting with full tie branching elects exactly the
    /// committees of maximal total approval score.
    #[test]
    fn sequential_av_matches_exhaustive_av(instance in arb_instance()) {
        let seq = enumerate_outcomes(&SequentialRule::seq_av(6), &instance, &EngineConfig::default())
            .unwrap();
        // Thiele queries are total (zero-gain candidates still tie), so the
        // brute-force no-buyer fallback never fires.
        prop_assert!(!seq.no_buyer);
        let direct = elect_scoring(&instance, &ScoringFunction::av(6), DEFAULT_SUBSET_CAP).unwrap();
        prop_assert_eq!(seq.outcome().unwrap(), direct);
    }

    /// The load recurrence and the money formulation of Phragmén's
    /// method present identical tie sets at every node of the branch
    /// tree (and hence identical outcomes).
    #[test]
    fn phragmen_formulations_walk_in_lockstep(instance in arb_instance()) {
        let load = SequentialRule::Phragmen;
        let money = SequentialRule::PhragmenMoney;
        let profile = &instance.profile;
        let mut stack: Vec<(SeqState, SeqState)> = vec![(
            load.initial_state(profile, instance.k),
            money.initial_state(profile, instance.k),
        )];
        while let Some((ls, ms)) = stack.pop() {
            if ls.sequence.len() == instance.k {
                prop_assert_eq!(&ls.sequence, &ms.sequence);
                continue;
            }
            let lr = load.step(profile, &ls).unwrap();
            let mr = money.step(profile, &ms).unwrap();
            match (lr, mr) {
                (StepResult::Tie(a), StepResult::Tie(b)) => {
                    prop_assert_eq!(&a.tied, &b.tied, "prefix {:?}", ls.sequence);
                    for &c in &a.tied {
                        stack.push((
                            load.apply(profile, &ls, c).unwrap(),
                            money.apply(profile, &ms, c).unwrap(),
                        ));
                    }
                }
                (StepResult::NoBuyer { unchosen: a }, StepResult::NoBuyer { unchosen: b }) => {
                    prop_assert_eq!(a, b, "prefix {:?}", ls.sequence);
                }
                (lr, mr) => prop_assert!(
                    false,
                    "formulations disagree at {:?}: {lr:?} vs {mr:?}",
                    ls.sequence
                ),
            }
        }
    }

    /// Phase-1-only committees are never larger than full committees,
    /// and every full committee extends some Phase-1 committee.
    #[test]
    fn phase_one_prefixes_full_mes(instance in arb_instance()) {
        let config = EngineConfig::default();
        let phase1 = enumerate_outcomes(&SequentialRule::mes_phase_one(), &instance, &config)
            .unwrap();
        let full = enumerate_outcomes(&SequentialRule::mes(), &instance, &config).unwrap();
        for w in &full.committees {
            prop_assert_eq!(w.members().len(), instance.k);
            prop_assert!(full.no_buyer || phase1
                .committees
                .iter()
                .any(|p| p.members().is_subset(w.members())));
        }
    }

    /// Generated laminar profiles really are laminar, and decomposing
    /// and rebuilding any of them is lossless.
    #[test]
    fn laminar_generation_round_trips(seed in 0u64..500, m in 2usize..=10, depth in 1usize..=3, branching in 1usize..=3) {
        let profile = random_laminar(m, depth, branching, (1, 3), seed);
        prop_assert!(is_laminar(&profile));
        let forest = laminar_forest(&profile).unwrap();
        prop_assert_eq!(forest.to_profile().unwrap(), profile);
    }

    /// Comparing an outcome set against itself is never strict, and a
    /// strict preference one way forbids even weak preference the other
    /// way.
    #[test]
    fn outcome_comparison_is_asymmetric(
        xs in prop::collection::btree_set(prop::collection::btree_set(0usize..5, 2), 1..4),
        ys in prop::collection::btree_set(prop::collection::btree_set(0usize..5, 2), 1..4),
        ballot in prop::collection::btree_set(0usize..5, 1..=3),
    ) {
        let outcome = |sets: &BTreeSet<BTreeSet<usize>>| {
            Outcome::new(sets.iter().map(|s| Committee::new(s.iter().copied()))).unwrap()
        };
        let (x, y) = (outcome(&xs), outcome(&ys));
        prop_assert_ne!(kelly_compare(&x, &x, &ballot), KellyComparison::Strict);
        if kelly_compare(&x, &y, &ballot) == KellyComparison::Strict {
            prop_assert_eq!(kelly_compare(&y, &x, &ballot), KellyComparison::None);
        }
    }
}
