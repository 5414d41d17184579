use thiserror::Error;

use crate::model::{Allocation, AgentId, GoodId};

/// Problems with instances, allocations, profiles and their documents.
///
/// Indices carried by the variants are 0-based.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("instance must have at least one agent")]
    NoAgents,
    #[error("instance must have at least one good")]
    NoGoods,
    #[error("dimension mismatch: expected {expected} valuation rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("dimension mismatch: row for agent {agent} has {found} entries, expected {expected}")]
    RowLength {
        agent: AgentId,
        expected: usize,
        found: usize,
    },
    #[error("negative valuation for agent {agent}, good {good}")]
    NegativeEntry { agent: AgentId, good: GoodId },
    #[error("good {good} is not allocated")]
    Unallocated { good: GoodId },
    #[error("good {good} is allocated more than once")]
    DoublyAllocated { good: GoodId },
    #[error("bundle and owner views disagree on good {good}")]
    ViewMismatch { good: GoodId },
    #[error("good index {good} out of range")]
    GoodOutOfRange { good: GoodId },
    #[error("good {good} assigned to nonexistent agent {agent}")]
    AgentOutOfRange { good: GoodId, agent: AgentId },
    #[error("allocation has {found} bundles, expected {expected}")]
    BundleCount { expected: usize, found: usize },
    #[error("allocation covers {found} goods, expected {expected}")]
    OwnerLength { expected: usize, found: usize },
    #[error("invalid utility table for agent {agent}: {reason}")]
    InvalidProfile { agent: AgentId, reason: String },
    #[error("utility table for agent {agent} has {found} entries, expected {expected}")]
    ProfileShape {
        agent: AgentId,
        expected: usize,
        found: usize,
    },
    #[error("profile has {agents} tables of {entries} entries; instance needs {n} tables of {} entries", .m + 1)]
    ProfileMismatch {
        agents: usize,
        entries: usize,
        n: usize,
        m: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("agent counts differ: {left} vs {right}")]
pub struct AgentCountMismatch {
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("instance is not identical")]
    NotIdentical,
    #[error("instance is not binary")]
    NotBinary,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no allocation gives every agent a valued good; unsatisfiable agents: {agents:?}")]
    Infeasible { agents: Vec<AgentId> },
    #[error("iteration cap {cap} reached while an improving swap chain still exists")]
    CapExhausted {
        cap: usize,
        allocation: Box<Allocation>,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("agent {to} is not reachable from agent {from}")]
    NotReachable { from: AgentId, to: AgentId },
    #[error("stale chain: good {good} is not held by agent {agent}")]
    Stale { good: GoodId, agent: AgentId },
    #[error("malformed chain: {0}")]
    Malformed(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration needs {required} assignments, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}
