//! Shared vocabulary: identifiers, QoS requests, link metrics, recorded paths
//! and the message taxonomy exchanged between routers.
//!
//! All metrics are integers (kbps and ms) so that a run is bit-reproducible
//! on every platform.

use std::fmt;

use thiserror::Error;

/// Router identifier. The total order is used for every deterministic
/// tie-break in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RouterId(pub u32);

impl fmt::Display for RouterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Connection identifier, assigned by the scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConnectionId(pub u32);

impl fmt::Display for ConnectionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Link identifier. Links are numbered in topology-file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub u32);

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("router {0} already on the recorded path")]
    LoopDetected(RouterId),
    #[error("requested bandwidth must be at least 1 kbps")]
    ZeroBandwidth,
    #[error("delay bound must be at least 1 ms")]
    ZeroDelayBound,
    #[error("reserved {reserved} kbps exceeds capacity {capacity} kbps")]
    OverReserved { reserved: u64, capacity: u64 },
}

/// Bandwidth and end-to-end delay demanded by a connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QosRequest {
    bandwidth_kbps: u64,
    max_delay_ms: Option<u64>,
}

impl QosRequest {
    pub fn new(bandwidth_kbps: u64, max_delay_ms: Option<u64>) -> Result<Self, ModelError> {
        if bandwidth_kbps == 0 {
            return Err(ModelError::ZeroBandwidth);
        }
        if max_delay_ms == Some(0) {
            return Err(ModelError::ZeroDelayBound);
        }
        Ok(Self {
            bandwidth_kbps,
            max_delay_ms,
        })
    }

    /// A request with no delay bound.
    pub fn bandwidth_only(bandwidth_kbps: u64) -> Result<Self, ModelError> {
        Self::new(bandwidth_kbps, None)
    }

    pub fn bandwidth_kbps(&self) -> u64 {
        self.bandwidth_kbps
    }

    pub fn max_delay_ms(&self) -> Option<u64> {
        self.max_delay_ms
    }

    /// True when a path of `delay_ms` total latency stays within the bound.
    pub fn delay_fits(&self, delay_ms: u64) -> bool {
        self.max_delay_ms.is_none_or(|bound| delay_ms <= bound)
    }

    /// True when `residual_kbps` can carry the requested bandwidth.
    pub fn bandwidth_fits(&self, residual_kbps: u64) -> bool {
        residual_kbps >= self.bandwidth_kbps
    }
}

/// Per-link state. Delay is static; the reserved share moves with admission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinkMetrics {
    pub delay_ms: u64,
    pub capacity_kbps: u64,
    pub reserved_kbps: u64,
}

impl LinkMetrics {
    pub fn new(delay_ms: u64, capacity_kbps: u64) -> Self {
        Self {
            delay_ms,
            capacity_kbps,
            reserved_kbps: 0,
        }
    }

    /// Link with `residual_kbps` left over a capacity of the same value.
    pub fn with_residual(delay_ms: u64, residual_kbps: u64) -> Self {
        Self::new(delay_ms, residual_kbps)
    }

    pub fn residual_kbps(&self) -> u64 {
        self.capacity_kbps - self.reserved_kbps
    }

    pub fn reserve(&mut self, kbps: u64) -> Result<(), ModelError> {
        let reserved = self.reserved_kbps + kbps;
        if reserved > self.capacity_kbps {
            return Err(ModelError::OverReserved {
                reserved,
                capacity: self.capacity_kbps,
            });
        }
        self.reserved_kbps = reserved;
        Ok(())
    }

    /// Returns false (leaving the link untouched) when more is released than
    /// is currently reserved.
    pub fn release(&mut self, kbps: u64) -> bool {
        match self.reserved_kbps.checked_sub(kbps) {
            Some(left) => {
                self.reserved_kbps = left;
                true
            }
            None => false,
        }
    }
}

/// Router sequence recorded by a probe, with additive delay and bottleneck
/// residual bandwidth of the traversed links.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PathRecord {
    pub hops: Vec<RouterId>,
    pub total_delay_ms: u64,
    /// `None` until at least one link has been traversed.
    pub bottleneck_kbps: Option<u64>,
}

impl PathRecord {
    /// Path holding only the originating router.
    pub fn origin(router: RouterId) -> Self {
        Self {
            hops: vec![router],
            total_delay_ms: 0,
            bottleneck_kbps: None,
        }
    }

    pub fn contains(&self, router: RouterId) -> bool {
        self.hops.contains(&router)
    }

    pub fn source(&self) -> Option<RouterId> {
        self.hops.first().copied()
    }

    pub fn last(&self) -> Option<RouterId> {
        self.hops.last().copied()
    }

    pub fn position(&self, router: RouterId) -> Option<usize> {
        self.hops.iter().position(|&h| h == router)
    }

    /// Hop immediately before `router`, i.e. its upstream on this path.
    pub fn upstream_of(&self, router: RouterId) -> Option<RouterId> {
        match self.position(router)? {
            0 => None,
            i => Some(self.hops[i - 1]),
        }
    }

    /// Hop immediately after `router`, i.e. its downstream on this path.
    pub fn downstream_of(&self, router: RouterId) -> Option<RouterId> {
        let i = self.position(router)?;
        self.hops.get(i + 1).copied()
    }

    /// Hops joined by `-`, the form used in CSV output.
    pub fn render(&self) -> String {
        self.hops
            .iter()
            .map(|h| h.0.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// Append `next` reached over `link`. Delay adds up, bandwidth takes the
/// minimum residual seen so far.
pub fn extend_path(
    record: &PathRecord,
    link: &LinkMetrics,
    next: RouterId,
) -> Result<PathRecord, ModelError> {
    if record.contains(next) {
        return Err(ModelError::LoopDetected(next));
    }
    let residual = link.residual_kbps();
    let mut hops = record.hops.clone();
    hops.push(next);
    Ok(PathRecord {
        hops,
        total_delay_ms: record.total_delay_ms + link.delay_ms,
        bottleneck_kbps: Some(record.bottleneck_kbps.map_or(residual, |b| b.min(residual))),
    })
}

/// Which stage of connection setup produced a NACK.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NackPhase {
    /// A probe branch died; other branches may still succeed.
    Probe,
    /// Reservation failed while walking the ACK back; the call is lost.
    Ack,
}

/// Connection request flooded (or source-routed) towards the destination.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Probe {
    pub conn: ConnectionId,
    pub source: RouterId,
    pub destination: RouterId,
    pub qos: QosRequest,
    /// Routers visited so far, ending with the router the probe is sent to.
    pub path: PathRecord,
    /// Explicit route computed by a source-routing origin.
    pub route: Option<Vec<RouterId>>,
}

/// One link as carried in a link-state advertisement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AdvertisedLink {
    pub link: LinkId,
    pub a: RouterId,
    pub b: RouterId,
    pub metrics: LinkMetrics,
}

/// Link-state advertisement used only by the source-routing comparator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinkStateAdvert {
    pub origin: RouterId,
    pub seq: u64,
    pub links: Vec<AdvertisedLink>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Message {
    Hello {
        from: RouterId,
    },
    Update {
        from: RouterId,
        advertised: Vec<(RouterId, LinkMetrics)>,
    },
    Probe(Probe),
    Ack {
        conn: ConnectionId,
        qos: QosRequest,
        path: PathRecord,
    },
    Nack {
        conn: ConnectionId,
        phase: NackPhase,
        path: PathRecord,
    },
    Failure {
        conn: ConnectionId,
        path: PathRecord,
    },
    /// The dummy packet that releases a connection's reservations.
    Teardown {
        conn: ConnectionId,
    },
    Data {
        conn: ConnectionId,
        payload_bytes: u64,
    },
    LinkState(LinkStateAdvert),
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::Hello { .. } => MessageKind::Hello,
            Message::Update { .. } => MessageKind::Update,
            Message::Probe(_) => MessageKind::Probe,
            Message::Ack { .. } => MessageKind::Ack,
            Message::Nack { .. } => MessageKind::Nack,
            Message::Failure { .. } => MessageKind::Failure,
            Message::Teardown { .. } => MessageKind::Teardown,
            Message::Data { .. } => MessageKind::Data,
            Message::LinkState(_) => MessageKind::LinkState,
        }
    }

    pub fn conn(&self) -> Option<ConnectionId> {
        match self {
            Message::Probe(p) => Some(p.conn),
            Message::Ack { conn, .. }
            | Message::Nack { conn, .. }
            | Message::Failure { conn, .. }
            | Message::Teardown { conn }
            | Message::Data { conn, .. } => Some(*conn),
            Message::Hello { .. } | Message::Update { .. } | Message::LinkState(_) => None,
        }
    }

    pub fn path(&self) -> Option<&PathRecord> {
        match self {
            Message::Probe(p) => Some(&p.path),
            Message::Ack { path, .. } | Message::Nack { path, .. } | Message::Failure { path, .. } => {
                Some(path)
            }
            _ => None,
        }
    }

    /// Nominal on-the-wire size used for overhead accounting. The figures
    /// are fixed conventions; only relative comparisons are meaningful.
    pub fn nominal_bytes(&self) -> u64 {
        match self {
            Message::Hello { .. } | Message::Teardown { .. } => 16,
            Message::Update { advertised, .. } => 16 + 12 * advertised.len() as u64,
            Message::LinkState(lsa) => 16 + 12 * lsa.links.len() as u64,
            Message::Probe(p) => 32 + 4 * p.path.hops.len() as u64,
            Message::Ack { path, .. } | Message::Nack { path, .. } | Message::Failure { path, .. } => {
                32 + 4 * path.hops.len() as u64
            }
            Message::Data { payload_bytes, .. } => *payload_bytes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageKind {
    Hello,
    Update,
    Probe,
    Ack,
    Nack,
    Failure,
    Teardown,
    Data,
    LinkState,
}

impl MessageKind {
    pub const ALL: [MessageKind; 9] = [
        MessageKind::Hello,
        MessageKind::Update,
        MessageKind::Probe,
        MessageKind::Ack,
        MessageKind::Nack,
        MessageKind::Failure,
        MessageKind::Teardown,
        MessageKind::Data,
        MessageKind::LinkState,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MessageKind::Hello => "hello",
            MessageKind::Update => "update",
            MessageKind::Probe => "probe",
            MessageKind::Ack => "ack",
            MessageKind::Nack => "nack",
            MessageKind::Failure => "failure",
            MessageKind::Teardown => "teardown",
            MessageKind::Data => "data",
            MessageKind::LinkState => "linkstate",
        }
    }

    /// Control traffic, i.e. everything but Data.
    pub fn is_control(self) -> bool {
        self != MessageKind::Data
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
