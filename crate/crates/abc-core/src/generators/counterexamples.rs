//! Hand-sized constructed instances: the pair profile separating
//! concurring from non-concurring query rules, the election where a
//! voter unrepresented under MES still benefits by abstaining, and the
//! two-sided family on which every standard, concurring, continuous
//! sequential rule rewards abstention.

use std::collections::BTreeMap;

use super::{expect_score, expect_total, GeneratorError, ReducedInstance, Role};
use crate::model::{Committee, ElectionInstance, Outcome, Profile};
use crate::sequential::{enumerate_outcomes, EngineConfig, EngineError, SequentialRule};

/// Default cap used when sweeping the scaling factor of
/// [`noshow_family`].
pub const NOSHOW_MAX_LAMBDA: u64 = 200;

/// The four-voter profile `1×{a,b} 1×{b,c} 1×{a} 1×{c}` with `k = 2`
/// (candidates a, b, c are ids 0, 1, 2). All approval scores are equal,
/// yet after electing `c` a concurring query function must prefer `a`
/// over `b`: the profile separates rules that respect pairwise ballot
/// dominance from those that do not.
pub fn concurrence_instance() -> ElectionInstance {
    let profile = Profile::from_raw(
        3,
        vec![(vec![0, 1], 1), (vec![1, 2], 1), (vec![0], 1), (vec![2], 1)],
    )
    .expect("fixed profile is valid");
    ElectionInstance::new(profile, 2).expect("k = 2 < m = 3")
}

/// The 51-voter election `20×{x1,x2,x3} 10×{y1,y2} 10×{y1,y2,z}
/// 9×{z,c} 2×{c}` with `k = 5` (ids x1,x2,x3 = 0,1,2; y1,y2 = 3,4;
/// z = 5; c = 6). Under MES, no winning committee contains `c` — the
/// `{c}` voters are unrepresented — yet when one of them abstains,
/// every winning committee contains `c`.
pub fn mes_unrepresented_instance() -> ReducedInstance {
    let profile = Profile::from_raw(
        7,
        vec![
            (vec![0, 1, 2], 20),
            (vec![3, 4], 10),
            (vec![3, 4, 5], 10),
            (vec![5, 6], 9),
            (vec![6], 2),
        ],
    )
    .expect("fixed profile is valid");
    let instance = ElectionInstance::new(profile, 5).expect("k = 5 < m = 7");
    let abstainer_group = instance
        .profile
        .group_index(&[6].into_iter().collect())
        .expect("the {c} ballot forms its own group");
    ReducedInstance {
        instance,
        abstainer_group,
        roles: vec![
            Role::Named("x1"),
            Role::Named("x2"),
            Role::Named("x3"),
            Role::Named("y1"),
            Role::Named("y2"),
            Role::Named("z"),
            Role::Named("c"),
        ],
    }
}

/// The two-sided abstention family for committee size `k ≥ 3`, scaled
/// by `lambda ≥ 1`.
///
/// The base profile `A` lives on candidates `a1..ar` (ids `0..r`) and
/// `b1..br` (ids `r..2r`) with `r = k − 1`: one voter per two-element
/// subset except `{a1,b1}` and `{ar,br}`, two extra voters per
/// `{ai,b1}` for `i ≥ 2` and per `{bj,ar}` for `2 ≤ j ≤ r−1`, one extra
/// voter each on `{b1,br}` and `{a1,ar}`, and for `k = 3` an additional
/// candidate `d` (id `2r`) sharing three ballots with every other
/// candidate. Singleton top-ups then equalize every approval score at a
/// level `T` chosen so that additionally `k·T ≤ n` — the premise a
/// concurring query function needs.
///
/// The returned instance is `λA + A'`, where `A'` adds one voter each
/// on `{a1..ar}`, `{b1..br}`, `{a1}`, and `{br}`. The designated
/// abstainer is the `A'` voter approving `{a1..ar}`; for large enough
/// `λ` she ends up with one approved winner when voting and `k − 1`
/// when abstaining (see [`noshow_lambda_search`]).
pub fn noshow_family(k: usize, lambda: u64) -> Result<ReducedInstance, GeneratorError> {
    if k < 3 {
        return Err(GeneratorError::BadK { k });
    }
    if lambda == 0 {
        return Err(GeneratorError::Infeasible("lambda must be at least 1".into()));
    }
    let r = k - 1;
    let a = |i: usize| i - 1;
    let b = |j: usize| r + j - 1;
    let d = 2 * r;
    let m = if k == 3 { 2 * r + 1 } else { 2 * r };

    let mut pairs: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut bump = |x: usize, y: usize, w: u64| {
        *pairs.entry((x.min(y), x.max(y))).or_insert(0) += w;
    };
    for x in 0..2 * r {
        for y in x + 1..2 * r {
            if (x, y) == (a(1), b(1)) || (x, y) == (a(r), b(r)) {
                continue;
            }
            bump(x, y, 1);
        }
    }
    for i in 2..=r {
        bump(a(i), b(1), 2);
    }
    for j in 2..r {
        bump(b(j), a(r), 2);
    }
    bump(b(1), b(r), 1);
    bump(a(1), a(r), 1);
    if k == 3 {
        for x in 0..2 * r {
            bump(x, d, 3);
        }
    }

    let mut scores = vec![0u64; m];
    let mut pair_total = 0u64;
    for (&(x, y), &w) in &pairs {
        scores[x] += w;
        scores[y] += w;
        pair_total += w;
    }
    // Equalizing at level T puts n = pair_total + (m·T − 2·pair_total),
    // so k·T ≤ n reduces to (m − k)·T ≥ pair_total.
    let equal_score = (*scores.iter().max().expect("m > 0"))
        .max(pair_total.div_ceil((m - k) as u64));

    let mut groups: Vec<(Vec<usize>, u64)> = pairs
        .iter()
        .map(|(&(x, y), &w)| (vec![x, y], w))
        .collect();
    for x in 0..m {
        if scores[x] < equal_score {
            groups.push((vec![x], equal_score - scores[x]));
        }
    }
    let base = Profile::from_raw(m, groups)?;
    let base_n = m as u64 * equal_score - pair_total;
    if k as u64 * equal_score > base_n {
        return Err(GeneratorError::AuditMismatch(format!(
            "equalized score {equal_score} exceeds one k-th of the {base_n} voters"
        )));
    }

    let perturbation = Profile::from_raw(
        m,
        vec![
            ((1..=r).map(a).collect(), 1),
            ((1..=r).map(b).collect(), 1),
            (vec![a(1)], 1),
            (vec![b(r)], 1),
        ],
    )?;
    let star = base.scale(lambda)?.add(&perturbation)?;
    let instance = ElectionInstance::new(star, k)?;

    expect_total(&instance, lambda * base_n + 4)?;
    for x in 0..m {
        let extra = if x == a(1) || x == b(r) {
            2
        } else if x == d && k == 3 {
            0
        } else {
            1
        };
        expect_score(&instance, x, lambda * equal_score + extra, "a family candidate")?;
    }

    let abstainer_ballot = (1..=r).map(a).collect();
    let abstainer_group = instance
        .profile
        .group_index(&abstainer_ballot)
        .expect("the left-side ballot exists by construction");

    let mut roles = Vec::with_capacity(m);
    roles.extend((1..=r).map(Role::Left));
    roles.extend((1..=r).map(Role::Right));
    if k == 3 {
        roles.push(Role::Extra);
    }

    Ok(ReducedInstance {
        instance,
        abstainer_group,
        roles,
    })
}

/// Sweeps `lambda = 1..=max_lambda` until [`noshow_family`] produces
/// the analyzed outcome pattern under `rule`: electing on the full
/// profile yields exactly `{a1,b1..br}` and `{a1..ar,br}`, and electing
/// after the designated voter abstains yields exactly `{a1..ar,br}` —
/// at which point abstaining has raised her guaranteed winners from one
/// to `k − 1`. Returns the first such `lambda` with its instance, or
/// `None` if the cap is reached. Scaling factors whose runs exceed the
/// engine's branching or closure caps are skipped.
pub fn noshow_lambda_search(
    rule: &SequentialRule,
    k: usize,
    max_lambda: u64,
    config: &EngineConfig,
) -> Result<Option<(u64, ReducedInstance)>, GeneratorError> {
    if k < 3 {
        return Err(GeneratorError::BadK { k });
    }
    let r = k - 1;
    let both_sides = Outcome::new([
        Committee::new(std::iter::once(0).chain(r..2 * r)),
        Committee::new((0..r).chain(std::iter::once(2 * r - 1))),
    ])?;
    let left_side = Outcome::new([Committee::new((0..r).chain(std::iter::once(2 * r - 1)))])?;

    for lambda in 1..=max_lambda {
        let reduced = noshow_family(k, lambda)?;
        let voting = match enumerate_outcomes(rule, &reduced.instance, config) {
            Ok(run) => run,
            Err(EngineError::BranchExplosion { .. } | EngineError::ClosureExplosion { .. }) => {
                continue
            }
            Err(e) => return Err(e.into()),
        };
        if voting.outcome()? != both_sides {
            continue;
        }
        let abstained = reduced
            .instance
            .profile
            .abstain(reduced.abstainer_group, 1)?;
        let abstained = ElectionInstance::new(abstained, k)?;
        let run = match enumerate_outcomes(rule, &abstained, config) {
            Ok(run) => run,
            Err(EngineError::BranchExplosion { .. } | EngineError::ClosureExplosion { .. }) => {
                continue
            }
            Err(e) => return Err(e.into()),
        };
        if run.outcome()? == left_side {
            return Ok(Some((lambda, reduced)));
        }
    }
    Ok(None)
}
