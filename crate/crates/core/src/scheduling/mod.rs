//! Queue-and-channel weights and the four per-slot schedulers.

mod mws;
mod qcsma;
mod rqcsma;
mod ub;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{ChannelStateVector, NetworkParams, QueueState, Schedule};

pub use mws::mws_step;
pub use qcsma::qcsma_step;
pub use rqcsma::rqcsma_step;
pub use ub::ub_step;

/// Shape of the per-queue weight `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightFn {
    /// `log(1 + βx)`.
    #[default]
    Log1p,
    /// `βx`.
    Linear,
}

impl WeightFn {
    pub fn eval(self, x: f64, beta: f64) -> f64 {
        match self {
            WeightFn::Log1p => weight_f(x, beta),
            WeightFn::Linear => beta * x,
        }
    }
}

impl fmt::Display for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFn::Log1p => f.write_str("log1p"),
            WeightFn::Linear => f.write_str("linear"),
        }
    }
}

impl FromStr for WeightFn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "log1p" => Ok(WeightFn::Log1p),
            "linear" => Ok(WeightFn::Linear),
            other => Err(format!("unknown weight function `{other}` (log1p|linear)")),
        }
    }
}

/// `log(1 + βx)`: non-negative, non-decreasing, unbounded.
pub fn weight_f(x: f64, beta: f64) -> f64 {
    (beta * x).ln_1p()
}

/// Largest backlog difference between the source and any relay's relayed
/// queue, floored at zero.
pub fn differential_backlog(queues: &QueueState) -> u64 {
    queues
        .q0i
        .iter()
        .map(|&b| queues.q0.saturating_sub(b))
        .max()
        .unwrap_or(0)
}

/// Per-node weights for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub omega: Vec<f64>,
}

fn f(params: &NetworkParams, x: u64) -> f64 {
    params.weight_fn.eval(x as f64, params.beta)
}

/// Weight of the action node `node` would take under `channel`.
///
/// Node 0 is weighted by its own backlog when it can reach the destination and
/// by the differential backlog when it would relay. A relay's weight is the
/// larger of its two queues, and zero when its link is OFF.
pub fn node_weight(
    node: usize,
    queues: &QueueState,
    channel: &ChannelStateVector,
    params: &NetworkParams,
) -> f64 {
    if node == 0 {
        if channel.is_on(0) {
            f(params, queues.q0)
        } else {
            f(params, differential_backlog(queues))
        }
    } else if channel.is_on(node) {
        relay_weight(node, queues, params)
    } else {
        0.0
    }
}

fn relay_weight(node: usize, queues: &QueueState, params: &NetworkParams) -> f64 {
    f(params, queues.q[node - 1]).max(f(params, queues.q0i[node - 1]))
}

pub fn compute_weights(
    queues: &QueueState,
    channel: &ChannelStateVector,
    params: &NetworkParams,
) -> WeightVector {
    WeightVector {
        omega: (0..params.n_nodes())
            .map(|i| node_weight(i, queues, channel, params))
            .collect(),
    }
}

/// Channel-blind weight used by the Q-CSMA baseline.
pub fn blind_weight(node: usize, queues: &QueueState, params: &NetworkParams) -> f64 {
    if node == 0 {
        f(params, queues.q0)
    } else {
        relay_weight(node, queues, params)
    }
}

/// `e^ω / (1 + e^ω)`.
pub fn activation_probability(omega: f64) -> f64 {
    if omega >= 0.0 {
        1.0 / (1.0 + (-omega).exp())
    } else {
        let e = omega.exp();
        e / (1.0 + e)
    }
}

/// Last transmission schedule used under each channel realization. Unseen
/// realizations read as Idle.
#[derive(Debug, Clone, Default)]
pub struct ScheduleMemory {
    table: HashMap<ChannelStateVector, Schedule>,
}

impl ScheduleMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, channel: &ChannelStateVector) -> Schedule {
        self.table.get(channel).copied().unwrap_or(Schedule::Idle)
    }

    pub fn set(&mut self, channel: &ChannelStateVector, schedule: Schedule) {
        if let Some(slot) = self.table.get_mut(channel) {
            *slot = schedule;
        } else {
            self.table.insert(channel.clone(), schedule);
        }
    }

    /// Number of realizations seen so far.
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ChannelStateVector, &Schedule)> {
        self.table.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    Mws,
    Rqcsma,
    Qcsma,
    Ub,
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchedulerKind::Mws => "mws",
            SchedulerKind::Rqcsma => "rqcsma",
            SchedulerKind::Qcsma => "qcsma",
            SchedulerKind::Ub => "ub",
        })
    }
}

impl FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mws" => Ok(SchedulerKind::Mws),
            "rqcsma" => Ok(SchedulerKind::Rqcsma),
            "qcsma" => Ok(SchedulerKind::Qcsma),
            "ub" => Ok(SchedulerKind::Ub),
            other => Err(format!("unknown scheduler `{other}` (mws|rqcsma|qcsma|ub)")),
        }
    }
}
