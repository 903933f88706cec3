//! Destination-side ranking of the paths recorded by arriving probes.

use std::cmp::Ordering;

use crate::model::{ConnectionId, PathRecord, QosRequest};

/// Paths collected for one connection while its window is open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    pub conn: ConnectionId,
    pub qos: QosRequest,
    pub candidates: Vec<PathRecord>,
    pub window_deadline_us: u64,
}

impl CandidateSet {
    pub fn new(conn: ConnectionId, qos: QosRequest, window_deadline_us: u64) -> Self {
        Self {
            conn,
            qos,
            candidates: Vec::new(),
            window_deadline_us,
        }
    }
}

pub fn is_feasible(path: &PathRecord, qos: &QosRequest) -> bool {
    path.bottleneck_kbps.is_none_or(|b| qos.bandwidth_fits(b)) && qos.delay_fits(path.total_delay_ms)
}

/// Lower delay first, then wider bottleneck, then lexicographic hops.
pub fn path_order(a: &PathRecord, b: &PathRecord) -> Ordering {
    a.total_delay_ms
        .cmp(&b.total_delay_ms)
        .then_with(|| b.bottleneck_kbps.cmp(&a.bottleneck_kbps))
        .then_with(|| a.hops.cmp(&b.hops))
}

/// Feasible candidates, best first.
pub fn rank_paths(set: &CandidateSet) -> Vec<PathRecord> {
    let mut out: Vec<PathRecord> = set
        .candidates
        .iter()
        .filter(|p| is_feasible(p, &set.qos))
        .cloned()
        .collect();
    out.sort_by(path_order);
    out
}

pub fn select_best(set: &CandidateSet) -> Option<PathRecord> {
    rank_paths(set).into_iter().next()
}
