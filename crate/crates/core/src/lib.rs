//! Simulation and analysis of channel-aware random-access scheduling in a
//! two-hop relay network with ON-OFF links.
//!
//! A source (node 0) and `N` relays share one channel to a destination. Each
//! slot the source either sends directly (link ON) or hands a packet to the
//! relay with the shortest forwarding queue (link OFF). Relays send their own
//! traffic and forwarded packets when their link is ON.

pub mod analysis;
pub mod contention;
pub mod error;
pub mod harness;
pub mod model;
pub mod scheduling;
pub mod stochastic;

pub use error::{Error, Result};
