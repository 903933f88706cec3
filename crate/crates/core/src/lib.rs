//! Hop-by-hop QoS path discovery and resource reservation, simulated over a
//! deterministic event loop, with a link-state source-routing baseline.

pub mod baseline;
pub mod metrics;
pub mod model;
pub mod pathselect;
pub mod protocol;
pub mod simcore;
pub mod tables;

pub use model::{
    ConnectionId, LinkId, LinkMetrics, Message, MessageKind, ModelError, PathRecord, QosRequest,
    RouterId,
};
pub use protocol::{Discovery, ProtocolConfig, RouterState, TriggerMode};
pub use tables::{ClassPolicy, LinkChoice};
pub use simcore::{Scenario, SimConfig, SimOutcome, Simulator, Topology};
