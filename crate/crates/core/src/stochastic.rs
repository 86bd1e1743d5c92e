//! Counter-keyed random streams.
//!
//! Every draw in a run comes from a ChaCha8 block keyed by `(seed, stream,
//! slot)`, so a slot's randomness never depends on how much randomness other
//! slots or other streams consumed. Two runs with the same seed and
//! parameters see identical channels and arrivals regardless of scheduler.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{ChannelStateVector, NetworkParams};

/// Independent substreams of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamId {
    Channels,
    Arrivals,
    Contention,
    Scheduler,
}

impl StreamId {
    fn index(self) -> u64 {
        match self {
            StreamId::Channels => 0,
            StreamId::Arrivals => 1,
            StreamId::Contention => 2,
            StreamId::Scheduler => 3,
        }
    }
}

// Words reserved per slot inside one ChaCha stream (2^24 u32 words).
const SLOT_STRIDE_WORDS: u128 = 1 << 24;

/// A `(seed, stream)` pair. `at(t)` yields the generator for slot `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: StreamId,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: StreamId) -> Self {
        RngStream { seed, stream_id }
    }

    /// Generator positioned at the start of slot `t`'s block range.
    pub fn at(&self, t: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id.index());
        rng.set_word_pos(u128::from(t) * SLOT_STRIDE_WORDS);
        rng
    }
}

/// Per-run bundle of the four substreams.
#[derive(Debug, Clone, Copy)]
pub struct RunStreams {
    pub channels: RngStream,
    pub arrivals: RngStream,
    pub contention: RngStream,
    pub scheduler: RngStream,
}

impl RunStreams {
    pub fn new(seed: u64) -> Self {
        RunStreams {
            channels: RngStream::new(seed, StreamId::Channels),
            arrivals: RngStream::new(seed, StreamId::Arrivals),
            contention: RngStream::new(seed, StreamId::Contention),
            scheduler: RngStream::new(seed, StreamId::Scheduler),
        }
    }
}

/// Draw `s(t)`: bit `i` is ON with probability `rho[i]`, independently.
pub fn sample_channels(params: &NetworkParams, stream: &RngStream, t: u64) -> ChannelStateVector {
    let mut rng = stream.at(t);
    ChannelStateVector::new(params.rho.iter().map(|&r| bernoulli(&mut rng, r)).collect())
}

/// Draw `A(t)`: Bernoulli(λ) when `a_max = 1`, otherwise Binomial(a_max, λ/a_max).
pub fn sample_arrivals(params: &NetworkParams, stream: &RngStream, t: u64) -> Vec<u32> {
    let mut rng = stream.at(t);
    let trials = params.a_max;
    params
        .lambda
        .iter()
        .map(|&l| {
            let p = l / f64::from(trials);
            (0..trials).filter(|_| bernoulli(&mut rng, p)).count() as u32
        })
        .collect()
}

fn bernoulli<R: Rng>(rng: &mut R, p: f64) -> bool {
    // p = 1 must always succeed and p = 0 never; gen::<f64>() is in [0, 1).
    rng.gen::<f64>() < p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(rho: Vec<f64>, lambda: Vec<f64>) -> NetworkParams {
        NetworkParams::new(rho, lambda).unwrap()
    }

    #[test]
    fn degenerate_channels() {
        let p = params(vec![1.0, 1.0], vec![0.0, 0.0]);
        let s = RngStream::new(7, StreamId::Channels);
        for t in 0..100 {
            assert_eq!(sample_channels(&p, &s, t).bits(), &[true, true]);
        }
        let p = params(vec![0.0; 4], vec![0.0; 4]);
        for t in 0..100 {
            assert_eq!(sample_channels(&p, &s, t).bits(), &[false; 4]);
        }
    }

    #[test]
    fn degenerate_arrivals() {
        let p = params(vec![0.5, 0.5], vec![0.0, 0.0]);
        let s = RngStream::new(1, StreamId::Arrivals);
        assert!((0..100).all(|t| sample_arrivals(&p, &s, t) == vec![0, 0]));
        let p = params(vec![0.5, 0.5], vec![1.0, 0.0]);
        assert!((0..100).all(|t| sample_arrivals(&p, &s, t) == vec![1, 0]));
    }

    #[test]
    fn streams_replay_and_separate() {
        let p = params(vec![0.5; 5], vec![0.5; 5]);
        let a = RngStream::new(42, StreamId::Channels);
        let b = RngStream::new(42, StreamId::Channels);
        let c = RngStream::new(42, StreamId::Arrivals);
        let seq = |s: &RngStream| (0..200).map(|t| sample_channels(&p, s, t)).collect::<Vec<_>>();
        assert_eq!(seq(&a), seq(&b));
        assert_ne!(seq(&a), seq(&c));
        // Slot order does not matter.
        let back: Vec<_> = (0..200).rev().map(|t| sample_channels(&p, &a, t)).collect();
        assert_eq!(back.into_iter().rev().collect::<Vec<_>>(), seq(&a));
    }

    #[test]
    fn binomial_arrivals_respect_bound() {
        let mut p = params(vec![0.5, 0.5], vec![0.0, 0.2]);
        p.a_max = 3;
        p.lambda[0] = 1.5;
        p.validate().unwrap();
        let s = RngStream::new(9, StreamId::Arrivals);
        let n = 20_000;
        let mut sum = 0u64;
        for t in 0..n {
            let a = sample_arrivals(&p, &s, t);
            assert!(a.iter().all(|&x| x <= 3));
            sum += u64::from(a[0]);
        }
        let mean = sum as f64 / n as f64;
        // Var = 3 * 0.5 * 0.5 = 0.75, 4 sigma on the mean.
        assert!((mean - 1.5).abs() < 4.0 * (0.75f64 / n as f64).sqrt(), "{mean}");
    }
}
