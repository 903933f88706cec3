//! Discrete-event simulation: topology and scenario input, the event loop
//! and its trace.

pub mod engine;
pub mod scenario;
pub mod topology;
pub mod trace;

pub use engine::{run, SimConfig, SimError, SimOutcome, Simulator};
pub use scenario::{cbr_schedule, CbrPlan, ConnectionSpec, Scenario, ScenarioError};
pub use topology::{generate, GenParams, Topology, TopologyError, TopologyLink};
pub use trace::{trace_hash, TraceEvent, TraceRecord};
