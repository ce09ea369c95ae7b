//! Discrete-time swarm simulator for subset-based collective decision-making.
//!
//! A swarm of simple robots must decide which of two tile colors dominates
//! the arena floor. Robots run a voter-model decision loop (explore, estimate
//! quality, disseminate, adopt) while a construction mechanism recruits only a
//! subset of the swarm into the decision: either hop-count recruitment around
//! a leader, or per-robot probabilistic self-selection with relay forwarding.
//!
//! Everything is driven by a synchronous 10 Hz tick loop and per-robot seeded
//! RNG substreams, so a run is a pure function of `(SimConfig, seed)`.

pub mod batch;
pub mod comms;
pub mod config;
pub mod distributed;
pub mod dmvd;
pub mod engine;
pub mod environment;
pub mod leader;
pub mod metrics;
pub mod motion;
pub mod roles;
pub mod rng;
pub mod stats;
pub mod trace;

/// Robot identifier; also the index into the simulation's robot arrays.
pub type RobotId = u32;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration field failed validation.
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },
    /// A spatial query left the arena.
    #[error("query error: {0}")]
    Query(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub use config::{SimConfig, Strategy};
pub use engine::run_one;
pub use environment::{Color, TileGrid};
pub use metrics::RunSummary;
