use rand::Rng;

use crate::model::{NetworkParams, QueueState, Schedule};

use super::{activation_probability, blind_weight};

/// Q-CSMA baseline: carrier sense against the previous slot's schedule and
/// channel-blind weights.
///
/// Returns the schedule `x(t)` that the next slot senses. A relay scheduled
/// while its link is OFF still holds the slot but sends nothing; the harness
/// maps that to an idle data slot.
pub fn qcsma_step<R: Rng>(
    queues: &QueueState,
    previous_x: Schedule,
    decision: Schedule,
    params: &NetworkParams,
    rng: &mut R,
) -> Schedule {
    match decision {
        Schedule::Idle => previous_x,
        Schedule::Node(_) if previous_x != Schedule::Idle && previous_x != decision => previous_x,
        Schedule::Node(i) => {
            let p = activation_probability(blind_weight(i, queues, params));
            if rng.gen::<f64>() < p {
                decision
            } else {
                Schedule::Idle
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{apply_slot, ChannelStateVector, ServedQueue};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> NetworkParams {
        NetworkParams::new(vec![0.5, 0.5], vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn carrier_sense_on_previous_slot() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = QueueState::empty(1);
        assert_eq!(
            qcsma_step(&q, Schedule::Node(1), Schedule::Node(0), &params(), &mut rng),
            Schedule::Node(1)
        );
        assert_eq!(
            qcsma_step(&q, Schedule::Idle, Schedule::Idle, &params(), &mut rng),
            Schedule::Idle
        );
    }

    #[test]
    fn off_relay_wastes_the_slot() {
        // Relay 1 has a large queue, so it activates with near certainty.
        let q = QueueState { q0: 0, q: vec![5000], q0i: vec![0] };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = qcsma_step(&q, Schedule::Idle, Schedule::Node(1), &params(), &mut rng);
        assert_eq!(x, Schedule::Node(1));
        let off = ChannelStateVector::from_bits(&[1, 0]);
        let data = crate::harness::data_plane(x, &off);
        assert_eq!(data, Schedule::Idle);
        let (after, tag) = apply_slot(&params(), &q, data, &off, &[0, 0]).unwrap();
        assert_eq!(after, q);
        assert_eq!(tag, ServedQueue::None);
    }

    #[test]
    fn weights_ignore_channel() {
        // With s_0 = 0 and Q_0 = Q_01 the CSI-aware weight would be zero; the
        // baseline still uses f(Q_0).
        let q = QueueState { q0: 20, q: vec![0], q0i: vec![20] };
        let p = params();
        let w = blind_weight(0, &q, &p);
        assert!((w - 3f64.ln()).abs() < 1e-15);
    }
}
