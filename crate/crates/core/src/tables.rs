//! Neighbor table (one hop) and second-neighbor table (two hops), the
//! class-based update trigger, and the eligibility / best-fit queries the
//! forwarding logic runs against them.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{LinkId, LinkMetrics, Message, QosRequest, RouterId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("neighbor table is empty")]
    EmptyTable,
    #[error("router {0} is not a direct neighbor")]
    UnknownNeighbor(RouterId),
    #[error("no candidate link")]
    NoCandidate,
    #[error("expected an update message")]
    NotAnUpdate,
    #[error("class width must be at least 1 kbps")]
    ZeroClassWidth,
}

/// A point-to-point link as configured on one of its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interface {
    pub link: LinkId,
    pub peer: RouterId,
    pub metrics: LinkMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NtEntry {
    pub link: LinkId,
    pub neighbor: RouterId,
    pub metrics: LinkMetrics,
}

/// Directly connected routers, keyed by link.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NeighborTable {
    entries: BTreeMap<LinkId, NtEntry>,
}

impl NeighborTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns true when the entry is new.
    pub fn insert(&mut self, entry: NtEntry) -> bool {
        self.entries.insert(entry.link, entry).is_none()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &NtEntry> {
        self.entries.values()
    }

    pub fn get(&self, link: LinkId) -> Option<&NtEntry> {
        self.entries.get(&link)
    }

    pub fn to_neighbor(&self, neighbor: RouterId) -> Option<&NtEntry> {
        self.entries.values().find(|e| e.neighbor == neighbor)
    }

    pub fn contains_neighbor(&self, neighbor: RouterId) -> bool {
        self.to_neighbor(neighbor).is_some()
    }

    /// Overwrites the metrics of `link`; returns the previous value.
    pub fn set_metrics(&mut self, link: LinkId, metrics: LinkMetrics) -> Option<LinkMetrics> {
        let entry = self.entries.get_mut(&link)?;
        Some(std::mem::replace(&mut entry.metrics, metrics))
    }
}

/// Two-hop reachability with the aggregate (sum delay, min residual) of both
/// links. `advertised` keeps the second link's metrics as the neighbor last
/// reported them so the aggregate can be refreshed when the first link moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SntEntry {
    pub first_link: LinkId,
    pub neighbor: RouterId,
    pub second_neighbor: RouterId,
    pub agg_delay_ms: u64,
    pub agg_bottleneck_kbps: u64,
    pub advertised: LinkMetrics,
}

impl SntEntry {
    fn aggregate(
        first_link: LinkId,
        neighbor: RouterId,
        second_neighbor: RouterId,
        via: &LinkMetrics,
        advertised: LinkMetrics,
    ) -> Self {
        Self {
            first_link,
            neighbor,
            second_neighbor,
            agg_delay_ms: via.delay_ms + advertised.delay_ms,
            agg_bottleneck_kbps: via.residual_kbps().min(advertised.residual_kbps()),
            advertised,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SecondNeighborTable {
    entries: BTreeMap<(RouterId, RouterId), SntEntry>,
}

impl SecondNeighborTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SntEntry> {
        self.entries.values()
    }

    pub fn get(&self, neighbor: RouterId, second: RouterId) -> Option<&SntEntry> {
        self.entries.get(&(neighbor, second))
    }

    pub fn contains_second(&self, second: RouterId) -> bool {
        self.entries.values().any(|e| e.second_neighbor == second)
    }

    pub fn via(&self, neighbor: RouterId) -> impl Iterator<Item = &SntEntry> {
        self.entries
            .range((neighbor, RouterId(0))..=(neighbor, RouterId(u32::MAX)))
            .map(|(_, e)| e)
    }

    /// Recomputes the aggregates of every entry reached over `link` after its
    /// local metrics changed.
    pub fn refresh_via(&mut self, link: LinkId, via: &LinkMetrics) {
        for entry in self.entries.values_mut().filter(|e| e.first_link == link) {
            *entry = SntEntry::aggregate(
                link,
                entry.neighbor,
                entry.second_neighbor,
                via,
                entry.advertised,
            );
        }
    }
}

/// Width of the adjacent bandwidth classes `[0, B)`, `[B, 2B)`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassPolicy {
    class_width_kbps: u64,
}

impl ClassPolicy {
    pub fn new(class_width_kbps: u64) -> Result<Self, TableError> {
        if class_width_kbps == 0 {
            return Err(TableError::ZeroClassWidth);
        }
        Ok(Self { class_width_kbps })
    }

    pub fn class_width_kbps(&self) -> u64 {
        self.class_width_kbps
    }
}

impl Default for ClassPolicy {
    fn default() -> Self {
        Self {
            class_width_kbps: 100,
        }
    }
}

/// Class index of a residual; a value exactly on `k·B` belongs to class `k`.
pub fn class_of(residual_kbps: u64, policy: ClassPolicy) -> u64 {
    residual_kbps / policy.class_width_kbps
}

pub fn should_trigger(old_kbps: u64, new_kbps: u64, policy: ClassPolicy) -> bool {
    class_of(old_kbps, policy) != class_of(new_kbps, policy)
}

/// Hello messages for every interface not yet in `announced`, addressed to
/// the peer at the other end.
pub fn build_hello(
    owner: RouterId,
    interfaces: &[Interface],
    announced: &BTreeSet<LinkId>,
) -> Vec<(RouterId, Message)> {
    interfaces
        .iter()
        .filter(|i| !announced.contains(&i.link))
        .map(|i| (i.peer, Message::Hello { from: owner }))
        .collect()
}

/// Full snapshot of the neighbor table.
pub fn build_update(owner: RouterId, nt: &NeighborTable) -> Result<Message, TableError> {
    if nt.is_empty() {
        return Err(TableError::EmptyTable);
    }
    Ok(Message::Update {
        from: owner,
        advertised: nt.iter().map(|e| (e.neighbor, e.metrics)).collect(),
    })
}

/// Merge an update from neighbor `from`. The update replaces everything
/// previously learned through `from`; entries naming `owner` are skipped.
pub fn apply_update(
    snt: &mut SecondNeighborTable,
    nt: &NeighborTable,
    owner: RouterId,
    from: RouterId,
    update: &Message,
) -> Result<(), TableError> {
    let Message::Update { advertised, .. } = update else {
        return Err(TableError::NotAnUpdate);
    };
    let via = *nt.to_neighbor(from).ok_or(TableError::UnknownNeighbor(from))?;

    snt.entries.retain(|(n, _), _| *n != from);
    for (second, metrics) in advertised {
        if *second == owner {
            continue;
        }
        snt.entries.insert(
            (from, *second),
            SntEntry::aggregate(via.link, from, *second, &via.metrics, *metrics),
        );
    }
    Ok(())
}

/// Anything a router can pick between when forwarding: a direct link or a
/// two-hop route. Metrics are the aggregate ones for the latter.
pub trait LinkCandidate {
    fn residual_kbps(&self) -> u64;
    fn delay_ms(&self) -> u64;
    fn neighbor(&self) -> RouterId;
}

impl LinkCandidate for NtEntry {
    fn residual_kbps(&self) -> u64 {
        self.metrics.residual_kbps()
    }
    fn delay_ms(&self) -> u64 {
        self.metrics.delay_ms
    }
    fn neighbor(&self) -> RouterId {
        self.neighbor
    }
}

impl LinkCandidate for SntEntry {
    fn residual_kbps(&self) -> u64 {
        self.agg_bottleneck_kbps
    }
    fn delay_ms(&self) -> u64 {
        self.agg_delay_ms
    }
    fn neighbor(&self) -> RouterId {
        self.neighbor
    }
}

fn fit_order<C: LinkCandidate>(a: &C, b: &C, policy: ClassPolicy) -> std::cmp::Ordering {
    class_of(a.residual_kbps(), policy)
        .cmp(&class_of(b.residual_kbps(), policy))
        .then(a.delay_ms().cmp(&b.delay_ms()))
        .then(a.neighbor().cmp(&b.neighbor()))
}

fn eligible<C: LinkCandidate>(c: &C, qos: &QosRequest, accumulated_delay_ms: u64) -> bool {
    qos.bandwidth_fits(c.residual_kbps()) && qos.delay_fits(accumulated_delay_ms + c.delay_ms())
}

/// Links that can carry `qos` given the delay already spent, tightest class
/// first.
pub fn eligible_first_hops(
    nt: &NeighborTable,
    qos: &QosRequest,
    accumulated_delay_ms: u64,
    policy: ClassPolicy,
) -> Vec<NtEntry> {
    let mut out: Vec<NtEntry> = nt
        .iter()
        .filter(|e| eligible(*e, qos, accumulated_delay_ms))
        .copied()
        .collect();
    out.sort_by(|a, b| fit_order(a, b, policy));
    out
}

/// Two-hop routes to `destination` whose aggregate metrics carry `qos`.
pub fn eligible_two_hop(
    snt: &SecondNeighborTable,
    destination: RouterId,
    qos: &QosRequest,
    accumulated_delay_ms: u64,
    policy: ClassPolicy,
) -> Vec<SntEntry> {
    let mut out: Vec<SntEntry> = snt
        .iter()
        .filter(|e| e.second_neighbor == destination && eligible(*e, qos, accumulated_delay_ms))
        .copied()
        .collect();
    out.sort_by(|a, b| fit_order(a, b, policy));
    out
}

/// Tightest-class candidate; ties go to lower delay, then lower neighbor id.
pub fn best_fit_link<C: LinkCandidate + Clone>(
    candidates: &[C],
    policy: ClassPolicy,
) -> Result<C, TableError> {
    candidates
        .iter()
        .min_by(|a, b| fit_order(*a, *b, policy))
        .cloned()
        .ok_or(TableError::NoCandidate)
}

/// How a router picks one link out of several eligible ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinkChoice {
    /// Lowest bandwidth class that still fits the request.
    #[default]
    BestFit,
    /// Largest residual. Kept as a comparator for the best-fit rule.
    GreedyWidest,
}

impl LinkChoice {
    pub fn choose<C: LinkCandidate + Clone>(
        self,
        candidates: &[C],
        policy: ClassPolicy,
    ) -> Result<C, TableError> {
        match self {
            LinkChoice::BestFit => best_fit_link(candidates, policy),
            LinkChoice::GreedyWidest => candidates
                .iter()
                .min_by(|a, b| {
                    b.residual_kbps()
                        .cmp(&a.residual_kbps())
                        .then(a.delay_ms().cmp(&b.delay_ms()))
                        .then(a.neighbor().cmp(&b.neighbor()))
                })
                .cloned()
                .ok_or(TableError::NoCandidate),
        }
    }
}
