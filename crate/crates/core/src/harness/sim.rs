use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contention::{backoff, run_contention};
use crate::error::{Error, Result};
use crate::model::{
    apply_slot_in_place, feasible_schedules, ChannelStateVector, QueueState, Schedule, ServedQueue, SlotRecord,
};
use crate::scheduling::{mws_step, qcsma_step, rqcsma_step, ub_step, ScheduleMemory, SchedulerKind};
use crate::stochastic::{sample_arrivals, sample_channels, RunStreams};

use super::config::{DecisionMode, ExperimentConfig};
use super::stats::{classify_stability, Trajectory};

/// What the data slot actually carries: a relay holding the slot with its
/// link OFF sends nothing.
pub fn data_plane(x: Schedule, channel: &ChannelStateVector) -> Schedule {
    match x {
        Schedule::Node(i) if i > 0 && !channel.is_on(i) => Schedule::Idle,
        other => other,
    }
}

/// Everything that happened in one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotStep {
    pub t: u64,
    pub channel: ChannelStateVector,
    pub decision: Schedule,
    /// Schedule holding the slot (the carrier-sense state).
    pub scheduled: Schedule,
    pub transmission: Schedule,
    pub served: ServedQueue,
    pub arrivals: Vec<u32>,
    pub winner_minislot: Option<u32>,
    pub collision: bool,
}

struct Decision {
    schedule: Schedule,
    winner_minislot: Option<u32>,
    collision: bool,
}

/// One simulation run. Owns its queues and scheduler state.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: ExperimentConfig,
    streams: RunStreams,
    queues: QueueState,
    memory: ScheduleMemory,
    previous_x: Schedule,
    t: u64,
}

impl Simulator {
    pub fn new(config: &ExperimentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Simulator {
            config: config.clone(),
            streams: RunStreams::new(seed),
            queues: QueueState::empty(config.params.n_relays),
            memory: ScheduleMemory::new(),
            previous_x: Schedule::Idle,
            t: 0,
        })
    }

    pub fn queues(&self) -> &QueueState {
        &self.queues
    }

    pub fn memory(&self) -> &ScheduleMemory {
        &self.memory
    }

    pub fn slot(&self) -> u64 {
        self.t
    }

    fn decide(&self, channel: &ChannelStateVector, csi: bool, rng: &mut impl Rng) -> Decision {
        let params = &self.config.params;
        match (self.config.decision_mode, csi) {
            (DecisionMode::Contention, true) => {
                let out = run_contention(channel, params, rng);
                Decision {
                    schedule: out.decision,
                    winner_minislot: out.winner_minislot,
                    collision: out.collision,
                }
            }
            (DecisionMode::Contention, false) => {
                // Without channel knowledge every node contends.
                let nodes: Vec<usize> = (0..params.n_nodes()).collect();
                let first = params.n_nodes() as u32;
                let b = backoff(&nodes, first, first + params.contention_window, rng);
                Decision {
                    schedule: b.winner.map_or(Schedule::Idle, Schedule::Node),
                    winner_minislot: b.winner_slot,
                    collision: b.collision,
                }
            }
            (DecisionMode::UniformSampler, _) => {
                let options = if csi {
                    feasible_schedules(params, channel)
                } else {
                    std::iter::once(Schedule::Idle)
                        .chain((0..params.n_nodes()).map(Schedule::Node))
                        .collect()
                };
                Decision {
                    schedule: *options.choose(rng).expect("Idle is always a candidate"),
                    winner_minislot: None,
                    collision: false,
                }
            }
        }
    }

    /// Advance one slot.
    pub fn step(&mut self) -> Result<SlotStep> {
        let t = self.t;
        let params = &self.config.params;
        let channel = sample_channels(params, &self.streams.channels, t);
        let mut contention_rng = self.streams.contention.at(t);
        let mut scheduler_rng = self.streams.scheduler.at(t);

        let (decision, scheduled) = match self.config.scheduler {
            SchedulerKind::Mws => {
                let x = mws_step(&self.queues, &channel, params);
                (Decision { schedule: x, winner_minislot: None, collision: false }, x)
            }
            SchedulerKind::Rqcsma => {
                let d = self.decide(&channel, true, &mut contention_rng);
                let params = &self.config.params;
                let x = rqcsma_step(&self.queues, &channel, &mut self.memory, d.schedule, params, &mut scheduler_rng)?;
                (d, x)
            }
            SchedulerKind::Qcsma => {
                let d = self.decide(&channel, false, &mut contention_rng);
                let x = qcsma_step(&self.queues, self.previous_x, d.schedule, params, &mut scheduler_rng);
                self.previous_x = x;
                (d, x)
            }
            SchedulerKind::Ub => {
                let (x, b) = ub_step(&self.queues, params, &mut contention_rng);
                (
                    Decision { schedule: x, winner_minislot: b.winner_slot, collision: b.collision },
                    x,
                )
            }
        };

        let params = &self.config.params;
        let transmission = data_plane(scheduled, &channel);
        let arrivals = sample_arrivals(params, &self.streams.arrivals, t);
        let served = apply_slot_in_place(params, &mut self.queues, transmission, &channel, &arrivals)?;
        self.t += 1;
        Ok(SlotStep {
            t,
            channel,
            decision: decision.schedule,
            scheduled,
            transmission,
            served,
            arrivals,
            winner_minislot: decision.winner_minislot,
            collision: decision.collision,
        })
    }

    /// Trace record of a step that has just been taken.
    pub fn record(&self, step: SlotStep) -> SlotRecord {
        SlotRecord {
            t: step.t,
            channel: step.channel,
            decision: step.decision,
            transmission: step.transmission,
            served_queue: step.served,
            arrivals: step.arrivals,
            queues_after: self.queues.clone(),
            winner_minislot: step.winner_minislot,
            collision: step.collision,
        }
    }
}

/// Outcome of one seeded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub horizon: u64,
    /// Time average of total backlog.
    pub q_avg: f64,
    pub final_backlog: u64,
    /// `None` when the horizon is too short to classify.
    pub stable: Option<bool>,
    pub slope: Option<f64>,
    pub trajectory: Trajectory,
}

pub fn run_once(config: &ExperimentConfig, seed: u64) -> Result<RunResult> {
    run_traced(config, seed, None)
}

/// [`run_once`] that also writes one JSON object per slot to `trace`.
pub fn run_traced(config: &ExperimentConfig, seed: u64, mut trace: Option<&mut dyn Write>) -> Result<RunResult> {
    let mut sim = Simulator::new(config, seed)?;
    let stride = Trajectory::stride_for(config.horizon);
    let mut values = Vec::with_capacity((config.horizon / stride) as usize);
    let mut sum = 0.0;
    for _ in 0..config.horizon {
        let step = sim.step()?;
        let total = sim.queues().total();
        sum += total as f64;
        if (step.t + 1) % stride == 0 {
            values.push(total as f64);
        }
        if let Some(w) = trace.as_deref_mut() {
            let line = serde_json::to_string(&sim.record(step)).expect("records serialize");
            writeln!(w, "{line}").map_err(|e| Error::Config(format!("writing trace: {e}")))?;
        }
    }
    let trajectory = Trajectory { stride, values };
    let lambda_sum: f64 = config.params.lambda.iter().sum();
    let stability = classify_stability(&trajectory, lambda_sum).ok();
    Ok(RunResult {
        seed,
        horizon: config.horizon,
        q_avg: sum / config.horizon as f64,
        final_backlog: sim.queues().total(),
        stable: stability.map(|s| s.stable),
        slope: stability.map(|s| s.slope),
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NetworkParams;

    fn config(kind: SchedulerKind, lambda: Vec<f64>) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(NetworkParams::new(vec![0.4, 0.7], lambda).unwrap(), kind);
        c.horizon = 2_000;
        c
    }

    #[test]
    fn data_plane_idles_off_relays() {
        let ch = ChannelStateVector::from_bits(&[0, 0, 1]);
        assert_eq!(data_plane(Schedule::Node(1), &ch), Schedule::Idle);
        assert_eq!(data_plane(Schedule::Node(2), &ch), Schedule::Node(2));
        assert_eq!(data_plane(Schedule::Node(0), &ch), Schedule::Node(0));
    }

    #[test]
    fn empty_system_stays_empty() {
        for kind in [SchedulerKind::Mws, SchedulerKind::Rqcsma, SchedulerKind::Qcsma, SchedulerKind::Ub] {
            let r = run_once(&config(kind, vec![0.0, 0.0]), 3).unwrap();
            assert_eq!(r.q_avg, 0.0);
            assert_eq!(r.stable, Some(true));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let c = config(SchedulerKind::Rqcsma, vec![0.3, 0.1]);
        assert_eq!(run_once(&c, 11).unwrap(), run_once(&c, 11).unwrap());
        assert_ne!(run_once(&c, 11).unwrap().q_avg, run_once(&c, 12).unwrap().q_avg);
    }

    #[test]
    fn rqcsma_transmissions_are_feasible() {
        let c = config(SchedulerKind::Rqcsma, vec![0.3, 0.2]);
        let mut sim = Simulator::new(&c, 5).unwrap();
        for _ in 0..2_000 {
            let s = sim.step().unwrap();
            assert!(crate::model::is_feasible(s.transmission, &s.channel));
            assert_eq!(s.transmission, s.scheduled);
        }
        assert!(sim.memory().len() <= 4);
    }

    #[test]
    fn short_horizon_is_unclassified() {
        let mut c = config(SchedulerKind::Mws, vec![0.1, 0.1]);
        c.horizon = 10;
        let r = run_once(&c, 1).unwrap();
        assert_eq!(r.stable, None);
        assert_eq!(r.trajectory.values.len(), 10);
    }

    #[test]
    fn trace_has_one_line_per_slot() {
        let mut c = config(SchedulerKind::Ub, vec![0.2, 0.1]);
        c.horizon = 50;
        let mut buf = Vec::new();
        let r = run_traced(&c, 2, Some(&mut buf)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 50);
        let last: SlotRecord = serde_json::from_str(lines[49]).unwrap();
        assert_eq!(last.queues_after.total(), r.final_backlog);
    }
}
