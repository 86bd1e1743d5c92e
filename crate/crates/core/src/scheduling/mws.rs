use crate::model::{ChannelStateVector, NetworkParams, QueueState, Schedule};

use super::node_weight;

/// Centralized max-weight choice among feasible nodes. Idle when every
/// feasible weight is zero; lowest index wins ties.
pub fn mws_step(queues: &QueueState, channel: &ChannelStateVector, params: &NetworkParams) -> Schedule {
    let mut best = Schedule::Idle;
    let mut best_weight = 0.0;
    for node in 0..params.n_nodes() {
        if node > 0 && !channel.is_on(node) {
            continue;
        }
        let w = node_weight(node, queues, channel, params);
        if w > best_weight {
            best = Schedule::Node(node);
            best_weight = w;
        }
    }
    best
}
