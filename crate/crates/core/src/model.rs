//! Network description, per-slot state, and the queue-update engine shared by
//! every scheduler.
//!
//! Node 0 is the source; nodes `1..=N` are relays. Each relay keeps two
//! queues: its own traffic (`q[i-1]`) and packets it forwards for the source
//! (`q0i[i-1]`). Links between the source and the relays are always ON; only
//! the links to the destination fade.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheduling::WeightFn;

/// Arrival law used by [`crate::stochastic::sample_arrivals`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalLaw {
    /// One packet with probability `lambda` (requires `a_max = 1`).
    Bernoulli,
    /// `Binomial(a_max, lambda / a_max)`.
    Binomial,
}

impl fmt::Display for ArrivalLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrivalLaw::Bernoulli => f.write_str("bernoulli"),
            ArrivalLaw::Binomial => f.write_str("binomial"),
        }
    }
}

/// Static description of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub n_relays: usize,
    /// ON probability of each node's link to the destination; `rho[0]` is the source.
    pub rho: Vec<f64>,
    /// Mean arrivals per slot at each node.
    pub lambda: Vec<f64>,
    #[serde(default = "default_a_max")]
    pub a_max: u32,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Extra backoff mini-slots after the N+1 probing mini-slots.
    #[serde(default = "default_window")]
    pub contention_window: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub weight_fn: WeightFn,
}

fn default_a_max() -> u32 {
    1
}

fn default_beta() -> f64 {
    0.1
}

fn default_window() -> u32 {
    32
}

impl NetworkParams {
    /// Parameters with the library defaults (`a_max = 1`, `beta = 0.1`, `W = 32`).
    pub fn new(rho: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        let n_relays = rho.len().saturating_sub(1);
        let params = NetworkParams {
            n_relays,
            rho,
            lambda,
            a_max: default_a_max(),
            beta: default_beta(),
            contention_window: default_window(),
            seed: 0,
            weight_fn: WeightFn::default(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_relays + 1
    }

    pub fn arrival_law(&self) -> ArrivalLaw {
        if self.a_max == 1 {
            ArrivalLaw::Bernoulli
        } else {
            ArrivalLaw::Binomial
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |name, reason: String| Err(Error::InvalidParam { name, reason });
        if self.n_relays < 1 {
            return invalid("n_relays", "at least one relay is required".into());
        }
        if self.rho.len() != self.n_nodes() {
            return invalid(
                "rho",
                format!("expected {} entries, got {}", self.n_nodes(), self.rho.len()),
            );
        }
        if self.lambda.len() != self.n_nodes() {
            return invalid(
                "lambda",
                format!("expected {} entries, got {}", self.n_nodes(), self.lambda.len()),
            );
        }
        if let Some(r) = self.rho.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return invalid("rho", format!("{r} is not a probability"));
        }
        if self.a_max < 1 {
            return invalid("a_max", "must be at least 1".into());
        }
        for &l in &self.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return invalid("lambda", format!("{l} is not a non-negative rate"));
            }
            if l > f64::from(self.a_max) {
                return invalid("lambda", format!("{l} exceeds a_max = {}", self.a_max));
            }
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return invalid("beta", format!("{} must be positive", self.beta));
        }
        if self.contention_window < 1 {
            return invalid("contention_window", "must be at least 1".into());
        }
        Ok(())
    }
}

/// Realization of the per-node link states to the destination.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChannelStateVector {
    bits: Vec<bool>,
}

impl ChannelStateVector {
    pub fn new(bits: Vec<bool>) -> Self {
        ChannelStateVector { bits }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        ChannelStateVector {
            bits: bits.iter().map(|&b| b != 0).collect(),
        }
    }

    pub fn all_on(n_nodes: usize) -> Self {
        ChannelStateVector {
            bits: vec![true; n_nodes],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_on(&self, node: usize) -> bool {
        self.bits[node]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn check_len(&self, params: &NetworkParams) -> Result<()> {
        if self.len() != params.n_nodes() {
            return Err(Error::ChannelLength {
                expected: params.n_nodes(),
                got: self.len(),
            });
        }
        Ok(())
    }

    /// Every realization of an `n_nodes`-bit vector, in binary counting order.
    pub fn enumerate(n_nodes: usize) -> impl Iterator<Item = ChannelStateVector> {
        (0..1u64 << n_nodes).map(move |code| ChannelStateVector {
            bits: (0..n_nodes).map(|i| code >> i & 1 == 1).collect(),
        })
    }
}

impl fmt::Display for ChannelStateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, b) in self.bits.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(if *b { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

impl Serialize for ChannelStateVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.bits.iter().map(|&b| u8::from(b)))
    }
}

impl<'de> Deserialize<'de> for ChannelStateVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<u8>::deserialize(d)?;
        if let Some(bad) = raw.iter().find(|&&b| b > 1) {
            return Err(de::Error::custom(format!("channel bit {bad} is not 0 or 1")));
        }
        Ok(ChannelStateVector::from_bits(&raw))
    }
}

/// A single-transmitter schedule: nobody, or one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Schedule {
    #[default]
    Idle,
    Node(usize),
}

impl Schedule {
    pub fn node(self) -> Option<usize> {
        match self {
            Schedule::Idle => None,
            Schedule::Node(i) => Some(i),
        }
    }

    pub fn is_idle(self) -> bool {
        self == Schedule::Idle
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Idle => f.write_str("idle"),
            Schedule::Node(i) => write!(f, "{i}"),
        }
    }
}

impl Serialize for Schedule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Schedule::Idle => s.serialize_str("idle"),
            Schedule::Node(i) => s.serialize_u64(*i as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Schedule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ScheduleVisitor;

        impl Visitor<'_> for ScheduleVisitor {
            type Value = Schedule;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("\"idle\" or a node index")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Schedule, E> {
                Ok(Schedule::Node(v as usize))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Schedule, E> {
                usize::try_from(v)
                    .map(Schedule::Node)
                    .map_err(|_| E::custom("negative node index"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Schedule, E> {
                match v {
                    "idle" => Ok(Schedule::Idle),
                    other => Err(E::custom(format!("unknown schedule `{other}`"))),
                }
            }
        }

        d.deserialize_any(ScheduleVisitor)
    }
}

/// Queue backlogs at a slot boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueState {
    /// Source backlog.
    pub q0: u64,
    /// Each relay's own traffic.
    pub q: Vec<u64>,
    /// Packets each relay holds on behalf of the source.
    pub q0i: Vec<u64>,
}

impl QueueState {
    pub fn empty(n_relays: usize) -> Self {
        QueueState {
            q0: 0,
            q: vec![0; n_relays],
            q0i: vec![0; n_relays],
        }
    }

    pub fn n_relays(&self) -> usize {
        self.q.len()
    }

    pub fn total(&self) -> u64 {
        self.q0 + self.q.iter().sum::<u64>() + self.q0i.iter().sum::<u64>()
    }

    /// Whether node `node` has anything queued (either queue for a relay).
    pub fn has_backlog(&self, node: usize) -> bool {
        if node == 0 {
            self.q0 > 0
        } else {
            self.q[node - 1] > 0 || self.q0i[node - 1] > 0
        }
    }
}

/// Which physical queue a slot decremented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ServedQueue {
    None,
    SourceDirect,
    SourceRelayedTo(usize),
    RelayOwn(usize),
    RelayForwarding(usize),
}

impl fmt::Display for ServedQueue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ServedQueue::None => f.write_str("none"),
            ServedQueue::SourceDirect => f.write_str("source-direct"),
            ServedQueue::SourceRelayedTo(i) => write!(f, "source-relayed-to-{i}"),
            ServedQueue::RelayOwn(i) => write!(f, "relay-{i}-own"),
            ServedQueue::RelayForwarding(i) => write!(f, "relay-{i}-forwarding"),
        }
    }
}

impl Serialize for ServedQueue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ServedQueue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        parse_served(&raw).ok_or_else(|| de::Error::custom(format!("unknown served tag `{raw}`")))
    }
}

fn parse_served(raw: &str) -> Option<ServedQueue> {
    match raw {
        "none" => return Some(ServedQueue::None),
        "source-direct" => return Some(ServedQueue::SourceDirect),
        _ => {}
    }
    if let Some(i) = raw.strip_prefix("source-relayed-to-") {
        return i.parse().ok().map(ServedQueue::SourceRelayedTo);
    }
    let rest = raw.strip_prefix("relay-")?;
    if let Some(i) = rest.strip_suffix("-own") {
        return i.parse().ok().map(ServedQueue::RelayOwn);
    }
    rest.strip_suffix("-forwarding")?
        .parse()
        .ok()
        .map(ServedQueue::RelayForwarding)
}

/// One row of a simulation trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub t: u64,
    pub channel: ChannelStateVector,
    pub decision: Schedule,
    pub transmission: Schedule,
    pub served_queue: ServedQueue,
    pub arrivals: Vec<u32>,
    pub queues_after: QueueState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winner_minislot: Option<u32>,
    #[serde(default)]
    pub collision: bool,
}

/// `{Idle, 0} ∪ {i ≥ 1 : s_i = 1}`, in ascending order with Idle first.
pub fn feasible_schedules(params: &NetworkParams, channel: &ChannelStateVector) -> Vec<Schedule> {
    debug_assert_eq!(channel.len(), params.n_nodes());
    let mut out = Vec::with_capacity(channel.len() + 1);
    out.push(Schedule::Idle);
    out.push(Schedule::Node(0));
    out.extend(
        (1..channel.len())
            .filter(|&i| channel.is_on(i))
            .map(Schedule::Node),
    );
    out
}

pub fn is_feasible(schedule: Schedule, channel: &ChannelStateVector) -> bool {
    match schedule {
        Schedule::Idle | Schedule::Node(0) => true,
        Schedule::Node(i) => i < channel.len() && channel.is_on(i),
    }
}

/// Relay that node 0 forwards to: the one with the smallest relayed backlog,
/// lowest index on ties. Returned index is 1-based.
pub fn relay_target(queues: &QueueState) -> usize {
    let (idx, _) = queues
        .q0i
        .iter()
        .enumerate()
        .min_by_key(|&(j, &b)| (b, j))
        .expect("network has at least one relay");
    idx + 1
}

/// Advance the queues by one slot. Pure: the input state is not modified.
pub fn apply_slot(
    params: &NetworkParams,
    queues: &QueueState,
    transmission: Schedule,
    channel: &ChannelStateVector,
    arrivals: &[u32],
) -> Result<(QueueState, ServedQueue)> {
    let mut next = queues.clone();
    let served = apply_slot_in_place(params, &mut next, transmission, channel, arrivals)?;
    Ok((next, served))
}

/// In-place variant of [`apply_slot`] used by the simulation loop.
pub fn apply_slot_in_place(
    params: &NetworkParams,
    queues: &mut QueueState,
    transmission: Schedule,
    channel: &ChannelStateVector,
    arrivals: &[u32],
) -> Result<ServedQueue> {
    channel.check_len(params)?;
    if arrivals.len() != params.n_nodes() {
        return Err(Error::Dimension(format!(
            "{} arrival counts for {} nodes",
            arrivals.len(),
            params.n_nodes()
        )));
    }
    if let Some((node, &count)) = arrivals.iter().enumerate().find(|(_, &a)| a > params.a_max) {
        return Err(Error::ArrivalBound {
            node,
            count,
            a_max: params.a_max,
        });
    }

    let served = match transmission {
        Schedule::Idle => ServedQueue::None,
        Schedule::Node(0) => {
            if queues.q0 == 0 {
                ServedQueue::None
            } else if channel.is_on(0) {
                queues.q0 -= 1;
                ServedQueue::SourceDirect
            } else {
                let target = relay_target(queues);
                queues.q0 -= 1;
                queues.q0i[target - 1] += 1;
                ServedQueue::SourceRelayedTo(target)
            }
        }
        Schedule::Node(i) => {
            if i > params.n_relays || !channel.is_on(i) {
                return Err(Error::Infeasible {
                    schedule: transmission,
                    channel: channel.to_string(),
                });
            }
            let own = &mut queues.q[i - 1];
            let relayed = &mut queues.q0i[i - 1];
            if *own >= *relayed {
                if *own == 0 {
                    ServedQueue::None
                } else {
                    *own -= 1;
                    ServedQueue::RelayOwn(i)
                }
            } else {
                *relayed -= 1;
                ServedQueue::RelayForwarding(i)
            }
        }
    };

    queues.q0 += u64::from(arrivals[0]);
    for (q, &a) in queues.q.iter_mut().zip(&arrivals[1..]) {
        *q += u64::from(a);
    }
    Ok(served)
}
