//! The contention slot: destination probe, per-node channel broadcast in the
//! first `N+1` mini-slots, then randomized INTENT backoff over the next `W+1`
//! mini-slot positions `[N+1, N+1+W]`.
//!
//! Detection is perfect and every node hears every other node, so all nodes
//! infer the same channel vector and the earliest unique INTENT wins.

use rand::Rng;

use crate::model::{ChannelStateVector, NetworkParams, Schedule};

/// Result of a backoff round among a set of contenders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Backoff {
    pub winner: Option<usize>,
    /// Smallest draw, reported only when a unique winner exists.
    pub winner_slot: Option<u32>,
    pub collision: bool,
}

/// Each contender draws uniformly on `lo..=hi`; a unique minimum wins, a tie
/// at the minimum is a collision. Draws are made in contender order.
pub fn backoff<R: Rng>(contenders: &[usize], lo: u32, hi: u32, rng: &mut R) -> Backoff {
    let draws: Vec<(usize, u32)> = contenders
        .iter()
        .map(|&node| (node, rng.gen_range(lo..=hi)))
        .collect();
    resolve_backoff(&draws)
}

/// Resolve explicit `(node, draw)` pairs.
pub fn resolve_backoff(draws: &[(usize, u32)]) -> Backoff {
    let Some(&min) = draws.iter().map(|(_, d)| d).min() else {
        return Backoff {
            winner: None,
            winner_slot: None,
            collision: false,
        };
    };
    let mut at_min = draws.iter().filter(|(_, d)| *d == min);
    let (first, _) = *at_min.next().expect("minimum exists");
    if at_min.next().is_some() {
        Backoff {
            winner: None,
            winner_slot: None,
            collision: true,
        }
    } else {
        Backoff {
            winner: Some(first),
            winner_slot: Some(min),
            collision: false,
        }
    }
}

/// Outcome of one contention slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentionOutcome {
    // Every listener decodes the same broadcasts, so one vector serves all nodes.
    heard: ChannelStateVector,
    pub decision: Schedule,
    pub winner_minislot: Option<u32>,
    pub collision: bool,
}

impl ContentionOutcome {
    /// Channel vector as reconstructed by `node` from the probing mini-slots.
    pub fn inferred_by(&self, node: usize) -> &ChannelStateVector {
        debug_assert!(node < self.heard.len());
        &self.heard
    }
}

/// Run the probing phase and the INTENT backoff.
///
/// Node 0 always contends (its links to the relays never fade); relay `i`
/// contends only when its probe was detected. Nodes contend regardless of
/// backlog.
pub fn run_contention<R: Rng>(
    true_channels: &ChannelStateVector,
    params: &NetworkParams,
    rng: &mut R,
) -> ContentionOutcome {
    let n_nodes = true_channels.len();
    debug_assert_eq!(n_nodes, params.n_nodes());

    // Mini-slot i: node i broadcasts iff it detected the destination probe.
    let heard = ChannelStateVector::new((0..n_nodes).map(|i| true_channels.is_on(i)).collect());

    let contenders: Vec<usize> = (0..n_nodes).filter(|&i| i == 0 || heard.is_on(i)).collect();
    let first = n_nodes as u32;
    let result = backoff(&contenders, first, first + params.contention_window, rng);
    ContentionOutcome {
        heard,
        decision: result.winner.map_or(Schedule::Idle, Schedule::Node),
        winner_minislot: result.winner_slot,
        collision: result.collision,
    }
}

/// Probability that a given contender wins a backoff among `contenders`
/// draws on `values` equally likely positions.
pub fn win_probability(contenders: usize, values: u32) -> f64 {
    if contenders == 0 {
        return 0.0;
    }
    let k = f64::from(values);
    // The winner sits at position j and the other m-1 draws are strictly later.
    (1..=values)
        .map(|j| (k - f64::from(j)) / k)
        .map(|later| later.powi(contenders as i32 - 1) / k)
        .sum()
}

/// Exact law of [`run_contention`]'s decision, aligned with
/// [`crate::model::feasible_schedules`] (Idle first).
pub fn decision_distribution(
    params: &NetworkParams,
    channel: &ChannelStateVector,
) -> Vec<(Schedule, f64)> {
    let feasible = crate::model::feasible_schedules(params, channel);
    let m = feasible.len() - 1;
    let win = win_probability(m, params.contention_window + 1);
    let idle = (1.0 - m as f64 * win).max(0.0);
    feasible
        .into_iter()
        .map(|s| (s, if s.is_idle() { idle } else { win }))
        .collect()
}
