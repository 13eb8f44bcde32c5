//! Constructed election instances: small counterexample profiles, two
//! families of hardness-reduction instances (from independent set on
//! cubic graphs and from restricted exact cover), and brute-force oracles
//! for the source problems so that every generated instance can be
//! labelled Yes/No independently of the election machinery.

mod counterexamples;
mod graphs;
mod indset;
mod rx3c;

pub use counterexamples::{
    concurrence_instance, mes_unrepresented_instance, noshow_family, noshow_lambda_search,
    NOSHOW_MAX_LAMBDA,
};
pub use graphs::{independent_set_oracle, CubicGraph};
pub use indset::independent_set_reduction;
pub use rx3c::{exact_cover, exact_cover_oracle, planted_rx3c, rx3c_reduction, Rx3cInstance};

use std::fmt;

use crate::model::{CandidateId, ElectionInstance, ModelError};
use crate::scoring::ScoringError;
use crate::sequential::EngineError;

#[derive(Debug, thiserror::Error)]
pub enum GeneratorError {
    #[error("committee size parameter must be at least 3 (got {k})")]
    BadK { k: usize },
    #[error("graph is not cubic: vertex {vertex} has degree {degree}")]
    NotCubic { vertex: usize, degree: usize },
    #[error("graph is not simple: {0}")]
    NotSimple(String),
    #[error("scoring function '{name}' unusable here: {reason}")]
    BadScoring { name: String, reason: String },
    #[error("t = {t} is too small: t³ must be at least 90t² + 120t + 60")]
    TBoundViolated { t: u64 },
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("not a restricted exact-cover instance: {0}")]
    NotRegular(String),
    #[error("graph too large for the exhaustive oracle: {vertices} vertices (max {max})")]
    TooLarge { vertices: usize, max: usize },
    #[error("search exceeded its node budget of {budget}")]
    BudgetExceeded { budget: u64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("structural audit failed: {0}")]
    AuditMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// What a candidate of a generated instance stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Numbered gadget candidate g1, g2, ….
    Gadget(u8),
    /// Candidate representing a graph vertex.
    Vertex(usize),
    /// Candidate representing one set of a cover instance.
    SetCopy(usize),
    /// Per-index auxiliary candidate a_i.
    Aux(usize),
    /// Budget-sink candidate; `Dummy(0)` is the unnumbered one.
    Dummy(u8),
    /// Left-side candidate a_i of the two-sided abstention family.
    Left(usize),
    /// Right-side candidate b_i of the two-sided abstention family.
    Right(usize),
    /// The extra candidate of the k=3 variant of that family.
    Extra,
    /// Fixed-instance candidate with a bespoke name.
    Named(&'static str),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Gadget(i) => write!(f, "g{i}"),
            Role::Vertex(v) => write!(f, "v{v}"),
            Role::SetCopy(i) => write!(f, "s{i}"),
            Role::Aux(i) => write!(f, "a{i}"),
            Role::Dummy(0) => write!(f, "b"),
            Role::Dummy(i) => write!(f, "b{i}"),
            Role::Left(i) => write!(f, "a{i}"),
            Role::Right(i) => write!(f, "b{i}"),
            Role::Extra => write!(f, "d"),
            Role::Named(s) => write!(f, "{s}"),
        }
    }
}

/// A generated instance together with the designated abstaining voter and
/// a human-readable meaning for every candidate id. Constructors audit
/// the built profile against the closed-form count and score tables of
/// their construction before returning.
#[derive(Debug, Clone)]
pub struct ReducedInstance {
    pub instance: ElectionInstance,
    /// Group index (in the normalized profile) of the designated
    /// abstainer; the analyses abstain a single voter from this group.
    pub abstainer_group: usize,
    /// Candidate id → role, indexed 0..m.
    pub roles: Vec<Role>,
}

impl ReducedInstance {
    pub fn role_of(&self, c: CandidateId) -> Role {
        self.roles[c]
    }

    /// One line per candidate: "id role".
    pub fn role_table(&self) -> String {
        self.roles
            .iter()
            .enumerate()
            .map(|(c, r)| format!("{c} {r}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Audit helper: checks one approval score against its closed form.
pub(crate) fn expect_score(
    instance: &ElectionInstance,
    c: CandidateId,
    expected: u64,
    label: &str,
) -> Result<(), GeneratorError> {
    let got = instance.profile.approval_score(c);
    if got != expected {
        return Err(GeneratorError::AuditMismatch(format!(
            "approval score of {label} (candidate {c}) is {got}, expected {expected}"
        )));
    }
    Ok(())
}

/// Audit helper: checks the total voter count against its closed form.
pub(crate) fn expect_total(
    instance: &ElectionInstance,
    expected: u64,
) -> Result<(), GeneratorError> {
    let got = instance.profile.n();
    if got != expected {
        return Err(GeneratorError::AuditMismatch(format!(
            "total voter weight is {got}, expected {expected}"
        )));
    }
    Ok(())
}
