use thiserror::Error;

use crate::model::Schedule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("channel vector has {got} entries, network has {expected} nodes")]
    ChannelLength { expected: usize, got: usize },

    #[error("schedule {schedule} is infeasible under channel {channel}")]
    Infeasible { schedule: Schedule, channel: String },

    #[error("arrival count {count} at node {node} exceeds a_max = {a_max}")]
    ArrivalBound { node: usize, count: u32, a_max: u32 },

    #[error("activation probability {0} is degenerate (chain is not irreducible)")]
    DegenerateProbability(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("stationary solve did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
