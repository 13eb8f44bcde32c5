//! Exact-arithmetic engine for approval-based committee (ABC) elections.
//!
//! Everything in this crate computes with arbitrary-precision rationals — no
//! floating point is used anywhere, because all rules here are *set-valued*:
//! an election may have tied committees, and deciding whether two scores,
//! loads, prices, or purchase times are equal has to be exact for the tie
//! sets to come out right.
//!
//! The crate is organised in layers:
//!
//! * [`model`] — profiles of weighted approval ballots, election instances,
//!   committees and outcomes, plus the text/JSON file formats.
//! * [`scoring`] — ABC scoring functions (AV, PAV, CCAV, SAV, custom tables)
//!   and exhaustive winner determination.
//! * [`sequential`] — sequential committee rules (sequential Thiele rules,
//!   Phragmén's sequential method, the Method of Equal Shares) with full
//!   tie-branch enumeration, an optional symmetry-quotient engine, and
//!   axiom checks (standardness, concurrence, continuity probes).
//! * [`participation`] — Kelly-extension comparisons of outcome sets and
//!   abstention analysis: can a voter (or group) gain by staying home?
//! * [`laminar`] — detection and decomposition of laminar profiles, where
//!   supporter sets are pairwise nested or disjoint.
//! * [`generators`] — counterexample profiles and hardness-instance
//!   generators (independent-set and exact-cover reductions), together with
//!   brute-force oracles for the source problems.
//!
//! Voters are modelled as *weighted ballot groups*: every voter of a group
//! casts the same ballot, and all rules implemented here depend on ballots
//! only through multiplicities, so per-group state is lossless. Abstention
//! by a single voter decrements a group weight.

pub mod generators;
pub mod laminar;
pub mod model;
pub mod participation;
pub mod rational;
pub mod rule;
pub mod scoring;
pub mod sequential;

pub(crate) mod bitset;

pub use model::{
    BallotGroup, CandidateId, Committee, ElectionInstance, ModelError, Outcome, ParseError,
    Profile,
};
pub use rational::{rat, Rational};
pub use rule::{ElectionRule, RunConfig};
pub use scoring::{committee_score, elect_scoring, marginal_scores, ScoringError, ScoringFunction};
pub use sequential::{enumerate_outcomes, EngineConfig, EngineError, SeqRun, SequentialRule};
