use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("self-loop on `{0}`")]
    SelfLoop(String),

    #[error("directed cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("query sets are not pairwise disjoint (`{0}` appears twice)")]
    NotDisjoint(String),

    #[error("inadmissible partition, cluster cycle: {}", .0.join(" -> "))]
    Inadmissible(Vec<String>),

    #[error("partition mismatch: {0}")]
    PartitionMismatch(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("empty intervention set; use plain marginalization for P(y)")]
    EmptyIntervention,

    #[error("`{0}` is not a c-component")]
    NotCComponent(String),

    #[error("effect is identifiable; no hedge exists")]
    Identifiable,

    #[error("invalid hedge: {0}")]
    InvalidHedge(String),

    #[error("conditioning event has zero probability in {0}")]
    ZeroConditioningMass(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid cardinality for `{0}`")]
    InvalidCardinality(String),

    #[error("state space of {needed} entries exceeds cap {cap}")]
    StateSpaceCap { needed: u128, cap: u128 },

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("model is not deterministic; counterfactuals need deterministic mechanisms")]
    NotDeterministic,

    #[error("invalid expansion spec: {0}")]
    InvalidSpec(String),

    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("invalid formula: {0}")]
    Formula(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
