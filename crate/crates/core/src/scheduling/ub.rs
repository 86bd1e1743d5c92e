use rand::Rng;

use crate::contention::{backoff, Backoff};
use crate::model::{NetworkParams, QueueState, Schedule};

/// Uniform backoff: every node with a non-empty queue draws `T ~ U{1..W}`;
/// a unique minimum transmits, a tie is a collision. No channel knowledge.
pub fn ub_step<R: Rng>(queues: &QueueState, params: &NetworkParams, rng: &mut R) -> (Schedule, Backoff) {
    let contenders: Vec<usize> = (0..params.n_nodes()).filter(|&i| queues.has_backlog(i)).collect();
    let out = backoff(&contenders, 1, params.contention_window, rng);
    (out.winner.map_or(Schedule::Idle, Schedule::Node), out)
}
