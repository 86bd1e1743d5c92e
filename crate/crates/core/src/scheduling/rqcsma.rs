use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{is_feasible, ChannelStateVector, NetworkParams, QueueState, Schedule};

use super::{activation_probability, node_weight, ScheduleMemory};

/// One RQ-CSMA data-slot decision.
///
/// Carrier sense is against the schedule last used under the same channel
/// realization, not against the previous slot:
///
/// * decision `{i}` while another node holds the realization: `i` stays silent
///   and the holder keeps transmitting;
/// * decision `{i}` while the realization is idle or held by `i`: `i`
///   transmits with its activation probability, otherwise the slot is idle;
/// * decision Idle (collision): everyone keeps their state.
///
/// Only the entry for `channel` is updated.
pub fn rqcsma_step<R: Rng>(
    queues: &QueueState,
    channel: &ChannelStateVector,
    memory: &mut ScheduleMemory,
    decision: Schedule,
    params: &NetworkParams,
    rng: &mut R,
) -> Result<Schedule> {
    if !is_feasible(decision, channel) || decision.node().is_some_and(|i| i > params.n_relays) {
        return Err(Error::Infeasible {
            schedule: decision,
            channel: channel.to_string(),
        });
    }
    let held = memory.get(channel);
    let x = match decision {
        Schedule::Idle => held,
        Schedule::Node(_) if held != Schedule::Idle && held != decision => held,
        Schedule::Node(i) => {
            let p = activation_probability(node_weight(i, queues, channel, params));
            if rng.gen::<f64>() < p {
                decision
            } else {
                Schedule::Idle
            }
        }
    };
    memory.set(channel, x);
    Ok(x)
}
