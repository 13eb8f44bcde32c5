//! Exhaustive tie-branching for sequential rules.
//!
//! Two interchangeable strategies compute the same committee set:
//!
//! * a plain depth-first search over every tied candidate (the reference
//!   implementation, and the only one that can record per-branch traces);
//! * a quotient search that memoizes subtrees on the exact dynamic state
//!   (chosen set + rule data) and, at each node, branches on one
//!   representative per orbit of the tie set under verified candidate
//!   symmetries, closing the collected committees under those symmetries
//!   afterwards ([`crate::sequential::symmetry`]).
//!
//! The quotient strategy is the default; equality of the two is enforced
//! by randomized tests. Both respect a global node cap so that runs on
//! adversarial instances fail loudly instead of running forever.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use crate::bitset::BitSet;
use crate::model::{CandidateId, Committee, ElectionInstance, ModelError, Outcome, Profile};
use crate::rational::Rational;
use crate::scoring::ScoringError;
use crate::sequential::symmetry::{Perm, SymmetryCache};
use crate::sequential::{RuleData, SeqState, SequentialRule, StepKind, StepResult};

#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Cap on explored nodes; exceeding it aborts with
    /// [`EngineError::BranchExplosion`].
    pub max_nodes: u64,
    /// Use the memoizing/symmetry-reducing strategy. Ignored (treated as
    /// `false`) when traces are requested.
    pub quotient: bool,
    /// Record one trace per explored leaf (reference strategy only).
    pub collect_traces: bool,
    /// Cap on the committee set produced by symmetry closure at one node.
    pub closure_cap: usize,
    /// Per-node budget for symmetry searches (number of refinement runs).
    pub search_budget: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_nodes: 1_000_000,
            quotient: true,
            collect_traces: false,
            closure_cap: 200_000,
            search_budget: 2_000,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("explored {explored} nodes, exceeding the branching cap of {cap}")]
    BranchExplosion { explored: u64, cap: u64 },
    #[error("committee orbit closure exceeded {cap} committees")]
    ClosureExplosion { cap: usize },
    #[error("forced walk undefined: candidate {candidate} cannot be purchased at this state")]
    ForcedStepUndefined { candidate: CandidateId },
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One step of a recorded branch. `key`/`kind` are `None` for no-buyer
/// filler steps, where the rule's own dynamics offered no candidate.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub chosen: CandidateId,
    pub tied: Vec<CandidateId>,
    pub key: Option<Rational>,
    pub kind: Option<StepKind>,
}

/// The full result of branching a sequential rule.
#[derive(Debug)]
pub struct SeqRun {
    pub committees: BTreeSet<Committee>,
    /// Some branch ran out of candidates with approvers and was filled by
    /// brute enumeration.
    pub no_buyer: bool,
    /// Nodes explored (a memoized subtree counts once).
    pub nodes: u64,
    pub traces: Vec<Vec<TraceStep>>,
}

impl SeqRun {
    pub fn outcome(&self) -> Result<Outcome, ModelError> {
        Outcome::new(self.committees.iter().cloned())
    }
}

/// Runs `rule` on `instance`, following every tie, and returns all
/// reachable committees.
pub fn enumerate_outcomes(
    rule: &SequentialRule,
    instance: &ElectionInstance,
    config: &EngineConfig,
) -> Result<SeqRun, EngineError> {
    let state = rule.initial_state(&instance.profile, instance.k);
    if config.quotient && !config.collect_traces {
        let mut engine = Quotient {
            rule,
            profile: &instance.profile,
            k: instance.k,
            config,
            memo: HashMap::new(),
            cache: SymmetryCache::new(),
            nodes: 0,
        };
        let root = engine.explore(&state)?;
        Ok(SeqRun {
            committees: root.committees.clone(),
            no_buyer: root.no_buyer,
            nodes: engine.nodes,
            traces: Vec::new(),
        })
    } else {
        let mut engine = Naive {
            rule,
            profile: &instance.profile,
            k: instance.k,
            config,
            run: SeqRun {
                committees: BTreeSet::new(),
                no_buyer: false,
                nodes: 0,
                traces: Vec::new(),
            },
            stack: Vec::new(),
        };
        engine.explore(&state)?;
        Ok(engine.run)
    }
}

struct Naive<'a> {
    rule: &'a SequentialRule,
    profile: &'a Profile,
    k: usize,
    config: &'a EngineConfig,
    run: SeqRun,
    stack: Vec<TraceStep>,
}

impl<'a> Naive<'a> {
    fn leaf(&mut self, state: &SeqState) {
        self.run
            .committees
            .insert(Committee::new(state.sequence.iter().copied()));
        if self.config.collect_traces {
            self.run.traces.push(self.stack.clone());
        }
    }

    fn explore(&mut self, state: &SeqState) -> Result<(), EngineError> {
        self.run.nodes += 1;
        if self.run.nodes > self.config.max_nodes {
            return Err(EngineError::BranchExplosion {
                explored: self.run.nodes,
                cap: self.config.max_nodes,
            });
        }
        if state.sequence.len() == self.k {
            self.leaf(state);
            return Ok(());
        }
        match self.rule.step(self.profile, state)? {
            StepResult::PhaseOneComplete => {
                if self.rule.phase_one_only() {
                    self.leaf(state);
                } else {
                    self.explore(&state.enter_phase_two())?;
                }
            }
            StepResult::Tie(step) => {
                for &c in &step.tied {
                    let child = self
                        .rule
                        .apply(self.profile, state, c)
                        .expect("tied candidates are purchasable");
                    if self.config.collect_traces {
                        self.stack.push(TraceStep {
                            chosen: c,
                            tied: step.tied.clone(),
                            key: Some(step.key.clone()),
                            kind: Some(step.kind),
                        });
                    }
                    self.explore(&child)?;
                    if self.config.collect_traces {
                        self.stack.pop();
                    }
                }
            }
            StepResult::NoBuyer { unchosen } => {
                self.run.no_buyer = true;
                for &c in &unchosen {
                    let child = state.with_choice_only(c);
                    if self.config.collect_traces {
                        self.stack.push(TraceStep {
                            chosen: c,
                            tied: unchosen.clone(),
                            key: None,
                            kind: None,
                        });
                    }
                    self.explore(&child)?;
                    if self.config.collect_traces {
                        self.stack.pop();
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(PartialEq, Eq, Hash)]
struct MemoKey {
    chosen: BitSet,
    data: RuleData,
}

/// Entry cap for the subtree memo. Orbit branching keeps healthy runs far
/// below it; on adversarial instances whose states carry long rule data,
/// the cap keeps the memo from holding gigabytes while the node cap winds
/// down. A full memo stops admitting entries but keeps serving hits.
const MEMO_CAP: usize = 50_000;

struct SubResult {
    committees: BTreeSet<Committee>,
    no_buyer: bool,
}

struct Quotient<'a> {
    rule: &'a SequentialRule,
    profile: &'a Profile,
    k: usize,
    config: &'a EngineConfig,
    memo: HashMap<MemoKey, Rc<SubResult>>,
    cache: SymmetryCache,
    nodes: u64,
}

impl<'a> Quotient<'a> {
    fn explore(&mut self, state: &SeqState) -> Result<Rc<SubResult>, EngineError> {
        let key = MemoKey {
            chosen: state.chosen.clone(),
            data: state.data.clone(),
        };
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        self.nodes += 1;
        if self.nodes > self.config.max_nodes {
            return Err(EngineError::BranchExplosion {
                explored: self.nodes,
                cap: self.config.max_nodes,
            });
        }
        let result = if state.sequence.len() == self.k {
            Rc::new(SubResult {
                committees: [Committee::new(state.sequence.iter().copied())].into(),
                no_buyer: false,
            })
        } else {
            match self.rule.step(self.profile, state)? {
                StepResult::PhaseOneComplete => {
                    if self.rule.phase_one_only() {
                        Rc::new(SubResult {
                            committees: [Committee::new(state.sequence.iter().copied())].into(),
                            no_buyer: false,
                        })
                    } else {
                        self.explore(&state.enter_phase_two())?
                    }
                }
                StepResult::Tie(step) => self.branch(state, &step.tied, false)?,
                StepResult::NoBuyer { unchosen } => self.branch(state, &unchosen, true)?,
            }
        };
        if self.memo.len() < MEMO_CAP {
            self.memo.insert(key, result.clone());
        }
        Ok(result)
    }

    fn branch(
        &mut self,
        state: &SeqState,
        tied: &[CandidateId],
        no_buyer: bool,
    ) -> Result<Rc<SubResult>, EngineError> {
        let sym = self
            .cache
            .node_symmetry(self.profile, state, tied, self.config.search_budget);
        let mut committees: BTreeSet<Committee> = BTreeSet::new();
        let mut saw_no_buyer = no_buyer;
        for &rep in &sym.reps {
            let child = if no_buyer {
                state.with_choice_only(rep)
            } else {
                self.rule
                    .apply(self.profile, state, rep)
                    .expect("tied candidates are purchasable")
            };
            let sub = self.explore(&child)?;
            saw_no_buyer |= sub.no_buyer;
            committees.extend(sub.committees.iter().cloned());
        }
        close_under(&mut committees, &sym.gens, self.config.closure_cap)?;
        Ok(Rc::new(SubResult {
            committees,
            no_buyer: saw_no_buyer,
        }))
    }
}

/// Extends `committees` to its closure under the group generated by `gens`.
fn close_under(
    committees: &mut BTreeSet<Committee>,
    gens: &[Rc<Perm>],
    cap: usize,
) -> Result<(), EngineError> {
    if gens.is_empty() {
        return Ok(());
    }
    let mut queue: Vec<Committee> = committees.iter().cloned().collect();
    while let Some(committee) = queue.pop() {
        for perm in gens {
            let image = Committee::new(perm.apply_set(committee.members()).into_iter());
            if !committees.contains(&image) {
                if committees.len() >= cap {
                    return Err(EngineError::ClosureExplosion { cap });
                }
                committees.insert(image.clone());
                queue.push(image);
            }
        }
    }
    Ok(())
}
