//! Moat-growing duals for the bidirected cut relaxation (BCR) of Steiner tree.
//!
//! The crate implements, with exact rational arithmetic throughout:
//!
//! * Steiner tree instances with metric, terminal-MST, drop and exact
//!   Steiner-cost utilities ([`instance`]),
//! * merge plans (time-indexed nested partitions of the terminal set) and
//!   their values, constructions and γ-goodness checks ([`mergeplan`]),
//! * the event-driven moat-growing simulator on the bidirected graph that
//!   turns a merge plan into a dual solution ([`growth`]),
//! * continuous growth and well-subdivision of instances ([`subdivide`]),
//! * the relative-greedy pipeline producing γ-good merge plans and the
//!   integrality-gap integral ([`goodplan`]),
//! * lower-bound gadget instances ([`gadgets`]),
//! * exact small-instance LP oracles for BCR, the hypergraphic relaxation
//!   and optimal Steiner trees ([`oracles`]),
//! * reproducible experiment suites ([`experiments`]).

pub mod experiments;
pub mod gadgets;
pub mod goodplan;
pub mod growth;
pub mod heap;
pub mod instance;
pub mod io;
pub mod lp;
pub mod mergeplan;
pub mod oracles;
pub mod rat;
pub mod subdivide;
pub mod svg;



pub use rat::Rat;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("instance has no terminals")]
    NoTerminals,
    #[error("edge {u}-{v} has non-positive cost {cost}")]
    NonPositiveCost { u: String, v: String, cost: Rat },
    #[error("disconnected: no path between {0} and {1}")]
    Disconnected(String, String),
    #[error("terminals are not in one connected component ({0} unreachable from {1})")]
    TerminalsDisconnected(String, String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("{0:?} is not a terminal")]
    NotATerminal(String),
    #[error("empty terminal subset")]
    EmptySubset,
    #[error("instance too large for exact oracle: {what} ({size} > cap {cap})")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("merge plan terminals do not match instance terminals: {0}")]
    PlanMismatch(String),
    #[error("merge times violate the ultrametric condition on ({0}, {1}, {2})")]
    NotUltrametric(String, String, String),
    #[error("invalid merge plan: {0}")]
    InvalidPlan(String),
    #[error("path is not tight for the given set: {0}")]
    NotTight(String),
    #[error("vertex {0} is not reachable from the given set in this trace")]
    Unreached(String),
    #[error("linear program is malformed: {0}")]
    MalformedLp(String),
    #[error("gamma must lie in [0, 1/5], got {0}")]
    GammaRange(Rat),
    #[error("well-subdivision verification failed: {0} (this indicates a simulator bug)")]
    SubdivisionVerification(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
