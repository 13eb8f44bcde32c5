//! Reduction from independent set on cubic graphs to abstention
//! analysis for concave sequential Thiele rules.

use num_traits::Signed;

use super::{expect_score, expect_total, CubicGraph, GeneratorError, ReducedInstance, Role};
use crate::model::{ElectionInstance, Profile};
use crate::rational::{rat, Rational};
use crate::scoring::ScoringFunction;

/// Maps `(graph, t)` to a weighted election in which a designated voter
/// benefits by abstaining under the sequential rule built from `scoring`
/// exactly when the graph has an independent set of `t` vertices.
///
/// Candidates: gadgets `g1..g4` (ids 0..4), a filler `b` (id 4), and one
/// candidate per vertex (ids `5..5+n`); the committee size is `n + 4`.
/// `scoring` must be a Thiele function whose increments satisfy
/// `δ(1) − δ(2) > δ(2) − δ(3)`; the multiplier `α` is the smallest
/// positive integer such that `(α/4)·(δ(1)−δ(2))/δ(1)` is an integer and
/// `α(δ(1)−δ(2)) ≥ δ(1)`, which makes every voter weight integral on
/// cubic graphs. The built profile is audited against the closed-form
/// voter and approval-score counts before being returned.
pub fn independent_set_reduction(
    graph: &CubicGraph,
    t: usize,
    scoring: &ScoringFunction,
) -> Result<ReducedInstance, GeneratorError> {
    let n = graph.n();
    if n < 2 {
        return Err(GeneratorError::Infeasible(format!(
            "need at least two vertices, got {n}"
        )));
    }
    if graph.edge_count() < 3 * t {
        return Err(GeneratorError::Infeasible(format!(
            "need |E| >= 3t: graph has {} edges, t = {t}",
            graph.edge_count()
        )));
    }

    let bad = |reason: &str| GeneratorError::BadScoring {
        name: scoring.name().to_string(),
        reason: reason.to_string(),
    };
    if !scoring.is_thiele() {
        return Err(bad("only Thiele functions have the increments this construction uses"));
    }
    let delta = |x: usize| scoring.delta(x).map_err(|_| bad("needs increments up to δ(3)"));
    let (d1, d2, d3) = (delta(1)?, delta(2)?, delta(3)?);
    if &d1 - &d2 <= &d2 - &d3 {
        return Err(bad("increments must satisfy δ(1) − δ(2) > δ(2) − δ(3)"));
    }
    if d1 <= d2 {
        return Err(bad("increments must satisfy δ(1) > δ(2)"));
    }
    // With δ(1) > δ(2) an α always exists; the cap is defensive.
    let ratio = (&d1 - &d2) / &d1;
    let alpha = (1u64..=1_000_000)
        .find(|&a| {
            ((rat(a as i64, 4)) * &ratio).is_integer() && rat(a as i64, 1) * (&d1 - &d2) >= d1
        })
        .ok_or_else(|| bad("no usable multiplier α below 10^6"))?;

    let nr = rat(n as i64, 1);
    let filler: Rational = rat(alpha as i64, 2)
        * (nr.pow(4) - (rat(t as i64, 1) - rat(1, 2)) * nr.pow(3) * &ratio);
    if !filler.is_integer() || !filler.is_positive() {
        return Err(GeneratorError::Infeasible(format!(
            "the gadget-pair weight came out as {filler}, not a positive integer"
        )));
    }
    let filler: u64 = filler
        .to_integer()
        .try_into()
        .map_err(|_| GeneratorError::Infeasible("gadget-pair weight overflows u64".into()))?;

    let nw = n as u64;
    let three_t = 3 * t as u64;
    let edges = graph.edge_count() as u64;
    let n3 = alpha * nw.pow(3);

    // Candidate ids.
    let g = |i: usize| i - 1; // g1..g4 -> 0..4
    let b = 4;
    let c_vertex = |v: usize| 5 + v;
    let m = n + 5;
    let k = n + 4;

    let mut groups: Vec<(Vec<usize>, u64)> = Vec::new();
    for v in 0..n {
        groups.push((vec![c_vertex(v)], n3));
    }
    for v in 0..n {
        for w in v + 1..n {
            groups.push((vec![c_vertex(v), c_vertex(w)], n3));
        }
    }
    for &(v, w) in graph.edges() {
        groups.push((vec![c_vertex(v), c_vertex(w), g(1)], 1));
    }
    groups.push((vec![b], alpha * nw.pow(5)));
    if three_t > 0 {
        groups.push((vec![b, g(2)], three_t));
    }
    groups.push((vec![g(1), g(2)], filler));
    groups.push((vec![g(1), g(3)], filler));
    groups.push((vec![g(2), g(4)], filler));
    groups.push((vec![g(3), g(4)], filler));
    if edges > three_t {
        groups.push((vec![g(2)], edges - three_t));
    }
    groups.push((vec![g(1)], 1));

    let profile = Profile::from_raw(m, groups)?;
    let instance = ElectionInstance::new(profile, k)?;

    let pairs = nw * (nw - 1) / 2;
    expect_total(
        &instance,
        n3 * nw + n3 * pairs + alpha * nw.pow(5) + 2 * edges + 4 * filler + 1,
    )?;
    expect_score(&instance, b, alpha * nw.pow(5) + three_t, "b")?;
    expect_score(&instance, g(1), 2 * filler + edges + 1, "g1")?;
    expect_score(&instance, g(2), 2 * filler + edges, "g2")?;
    expect_score(&instance, g(3), 2 * filler, "g3")?;
    expect_score(&instance, g(4), 2 * filler, "g4")?;
    for v in 0..n {
        expect_score(&instance, c_vertex(v), alpha * nw.pow(4) + 3, "a vertex candidate")?;
    }

    let abstainer_ballot = [g(1), g(3)].into_iter().collect();
    let abstainer_group = instance
        .profile
        .group_index(&abstainer_ballot)
        .expect("the {g1,g3} ballot forms its own group");

    let mut roles = Vec::with_capacity(m);
    roles.extend((1..=4).map(|i| Role::Gadget(i)));
    roles.push(Role::Dummy(0));
    roles.extend((0..n).map(Role::Vertex));

    Ok(ReducedInstance {
        instance,
        abstainer_group,
        roles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::ScoringFunction;

    #[test]
    fn pav_multiplier_is_eight_and_ccav_four() {
        let pav = independent_set_reduction(&CubicGraph::k4(), 2, &ScoringFunction::pav(8)).unwrap();
        // α = 8, n = 4: the {b} block has weight 8·4⁵ and score 8·4⁵ + 6.
        assert_eq!(pav.instance.profile.approval_score(4), 8 * 4u64.pow(5) + 6);
        let ccav =
            independent_set_reduction(&CubicGraph::k4(), 2, &ScoringFunction::ccav(8)).unwrap();
        assert_eq!(ccav.instance.profile.approval_score(4), 4 * 4u64.pow(5) + 6);
    }

    #[test]
    fn k4_dimensions_match_the_closed_forms() {
        let reduced =
            independent_set_reduction(&CubicGraph::k4(), 2, &ScoringFunction::pav(8)).unwrap();
        assert_eq!(reduced.instance.profile.m(), 9);
        assert_eq!(reduced.instance.k, 8);
        // α/2 · (n⁴ − (t − ½)n³·(δ1−δ2)/δ1) = 4·(256 − 1.5·64·½) = 832.
        let ballot = [0usize, 2].into_iter().collect();
        let idx = reduced.instance.profile.group_index(&ballot).unwrap();
        assert_eq!(reduced.instance.profile.groups()[idx].weight, 832);
        assert_eq!(reduced.abstainer_group, idx);
    }

    #[test]
    fn linear_and_flat_scorings_are_rejected() {
        let av = ScoringFunction::av(8);
        assert!(matches!(
            independent_set_reduction(&CubicGraph::k4(), 2, &av),
            Err(GeneratorError::BadScoring { .. })
        ));
        let sav = ScoringFunction::sav(8);
        assert!(matches!(
            independent_set_reduction(&CubicGraph::k4(), 2, &sav),
            Err(GeneratorError::BadScoring { .. })
        ));
    }

    #[test]
    fn too_many_required_vertices_are_rejected() {
        assert!(matches!(
            independent_set_reduction(&CubicGraph::k4(), 3, &ScoringFunction::pav(8)),
            Err(GeneratorError::Infeasible(_))
        ));
    }

    #[test]
    fn roles_name_gadgets_filler_and_vertices() {
        let reduced =
            independent_set_reduction(&CubicGraph::k33(), 2, &ScoringFunction::pav(8)).unwrap();
        assert_eq!(reduced.role_of(0).to_string(), "g1");
        assert_eq!(reduced.role_of(4).to_string(), "b");
        assert_eq!(reduced.role_of(5).to_string(), "v0");
        assert_eq!(reduced.roles.len(), 11);
    }
}
