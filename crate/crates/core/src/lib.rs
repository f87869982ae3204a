//! Deterministic AODV routing and MANET simulation core.
//!
//! Everything here is `no_std` with `alloc`: the wire codec, the per-node
//! routing state machine (baseline hop-count preference and a Euclidean
//! distance-cost variant), geometry and cost helpers, the discrete-event
//! simulator and the metric accumulator. File formats, configuration and the
//! command line live in the companion `aodv-sim` crate.

#![no_std]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

pub mod geometry;
pub mod metrics;
pub mod routing;
pub mod sim;
pub mod time;
pub mod wire;

pub use geometry::{euclidean_distance, transfer_cost, CostWeights, Position};
pub use metrics::{DropReason, MetricsCollector, MetricsReport, TransferReport};
pub use routing::{NodeState, PolicyKind, RouteEntry, RoutingParams, SeqNum};
pub use sim::{SimConfig, World};
pub use time::SimTime;
pub use wire::{Addr, Message};
