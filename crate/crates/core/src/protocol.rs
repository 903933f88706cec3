//! Per-router connection-setup state machine.
//!
//! A probe arriving at a router is handled by the first rule that applies:
//!
//! 1. the router is the destination: the recorded path becomes a candidate;
//! 2. the destination is a direct neighbor: forward over that link if it can
//!    carry the request, otherwise NACK upstream;
//! 3. the destination is a second neighbor: forward over the chosen eligible
//!    two-hop route, otherwise NACK upstream;
//! 4. otherwise flood over every eligible link whose neighbor leads on to at
//!    least one eligible second neighbor.
//!
//! Once the destination's collection window closes it ACKs the best
//! candidate back along the recorded path; every hop re-checks its downstream
//! link, reserves, and passes the ACK on. A hop that can no longer reserve
//! sends a Failure downstream (releasing what was reserved) and a NACK to the
//! source.
//!
//! Handlers never touch links or clocks. They return [`Action`]s that the
//! engine applies, and the engine reports local link changes back through
//! [`RouterState::link_changed`].

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::baseline::{self, LinkStateDb};
use crate::model::{
    extend_path, AdvertisedLink, ConnectionId, LinkId, LinkMetrics, Message, NackPhase,
    PathRecord, Probe, QosRequest, RouterId,
};
use crate::pathselect::{select_best, CandidateSet};
use crate::tables::{
    apply_update, build_hello, build_update, eligible_first_hops, eligible_two_hop,
    should_trigger, ClassPolicy, Interface, LinkChoice, NeighborTable, NtEntry,
    SecondNeighborTable,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("router {router}: path of connection {conn} does not place {from} downstream")]
    PathMismatch {
        router: RouterId,
        conn: ConnectionId,
        from: RouterId,
    },
    #[error("connection {0} already started at this router")]
    AlreadyActive(ConnectionId),
    #[error("router {router} already holds a reservation for connection {conn}")]
    DuplicateReservation { router: RouterId, conn: ConnectionId },
}

/// When a router re-advertises its neighbor table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TriggerMode {
    /// Only when a residual crosses a class boundary.
    #[default]
    ClassBased,
    /// On every residual change. Instrumentation baseline.
    EveryChange,
}

/// How routes are discovered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Discovery {
    /// Bounded selective flooding over NT/SNT state.
    #[default]
    Qosip,
    /// Source computes the route over a flooded link-state database.
    SourceRouting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolConfig {
    pub policy: ClassPolicy,
    pub suppress_duplicates: bool,
    pub probe_timeout_ms: u64,
    pub collect_window_ms: u64,
    pub link_choice: LinkChoice,
    pub trigger: TriggerMode,
    pub discovery: Discovery,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            policy: ClassPolicy::default(),
            suppress_duplicates: true,
            probe_timeout_ms: 1000,
            collect_window_ms: 100,
            link_choice: LinkChoice::BestFit,
            trigger: TriggerMode::ClassBased,
            discovery: Discovery::Qosip,
        }
    }
}

/// Either a neighboring router or this router itself (source upstream,
/// destination downstream).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Peer {
    Router(RouterId),
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReservationPhase {
    Active,
    Released,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReservationEntry {
    pub upstream: Peer,
    pub downstream: Peer,
    pub link_to_downstream: Option<LinkId>,
    pub reserved_kbps: u64,
    pub phase: ReservationPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Timer {
    ProbeTimeout(ConnectionId),
    CollectWindow(ConnectionId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockCause {
    /// No ACK arrived before the probe timeout.
    ProbeTimeout,
    /// The source had no feasible route to start with.
    NoRoute,
    /// A hop could not reserve during the ACK walk.
    ReservationFailed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Send { to: RouterId, msg: Message },
    Deliver { conn: ConnectionId, bytes: u64 },
    Reserve { link: LinkId, kbps: u64, conn: ConnectionId },
    Release { link: LinkId, kbps: u64, conn: ConnectionId },
    BlockCall { conn: ConnectionId, cause: BlockCause },
    AcceptCall { conn: ConnectionId, path: PathRecord },
    StartTimer { after_ms: u64, timer: Timer },
    DropData { conn: ConnectionId, bytes: u64 },
}

/// Setup progress as seen by the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallStatus {
    Probing,
    Accepted,
    Blocked,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RouterStats {
    /// Candidate rankings, source route computations and table recomputations.
    pub path_computations: u64,
    /// Edges relaxed by shortest-path runs.
    pub edges_relaxed: u64,
    /// Advertisement rounds originated (triggered updates or link-state floods).
    pub floods_initiated: u64,
    pub probe_nacks_at_source: u64,
}

#[derive(Debug, Clone)]
pub struct RouterState {
    pub id: RouterId,
    pub config: ProtocolConfig,
    interfaces: Vec<Interface>,
    announced: BTreeSet<LinkId>,
    pub nt: NeighborTable,
    pub snt: SecondNeighborTable,
    pub lsdb: LinkStateDb,
    pub reservations: BTreeMap<ConnectionId, ReservationEntry>,
    pub probe_cache: BTreeSet<ConnectionId>,
    calls: BTreeMap<ConnectionId, CallStatus>,
    collecting: BTreeMap<ConnectionId, CandidateSet>,
    closed: BTreeSet<ConnectionId>,
    pub stats: RouterStats,
}

impl RouterState {
    pub fn new(id: RouterId, interfaces: Vec<Interface>, config: ProtocolConfig) -> Self {
        Self {
            id,
            config,
            interfaces,
            announced: BTreeSet::new(),
            nt: NeighborTable::new(),
            snt: SecondNeighborTable::new(),
            lsdb: LinkStateDb::new(),
            reservations: BTreeMap::new(),
            probe_cache: BTreeSet::new(),
            calls: BTreeMap::new(),
            collecting: BTreeMap::new(),
            closed: BTreeSet::new(),
            stats: RouterStats::default(),
        }
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    pub fn call_status(&self, conn: ConnectionId) -> Option<CallStatus> {
        self.calls.get(&conn).copied()
    }

    /// Candidate paths currently held for `conn` at this destination.
    pub fn candidates(&self, conn: ConnectionId) -> Option<&CandidateSet> {
        self.collecting.get(&conn)
    }

    fn neighbors(&self) -> Vec<RouterId> {
        self.nt.iter().map(|e| e.neighbor).collect()
    }

    /// Hellos on every interface not announced yet.
    pub fn boot(&mut self) -> Vec<Action> {
        let out = build_hello(self.id, &self.interfaces, &self.announced);
        self.announced
            .extend(self.interfaces.iter().map(|i| i.link));
        out.into_iter()
            .map(|(to, msg)| Action::Send { to, msg })
            .collect()
    }

    /// Adds an interface at run time; the next [`boot`](Self::boot) greets
    /// only the new peer.
    pub fn attach(&mut self, interface: Interface) {
        self.interfaces.push(interface);
    }

    /// Dispatches a message. `from` is `None` for locally originated traffic
    /// (Data and Teardown injected at the source).
    pub fn handle(
        &mut self,
        now_us: u64,
        from: Option<RouterId>,
        msg: Message,
    ) -> Result<Vec<Action>, ProtocolError> {
        let actions = match msg {
            Message::Hello { from: peer } => self.handle_hello(peer),
            Message::Update { from: peer, .. } => {
                // Updates from routers not yet in the NT are dropped.
                let _ = apply_update(&mut self.snt, &self.nt, self.id, peer, &msg);
                vec![]
            }
            Message::LinkState(lsa) => self.handle_link_state(&lsa),
            Message::Probe(probe) => self.handle_probe(now_us, probe),
            Message::Ack { conn, qos, path } => {
                let from = from.unwrap_or(self.id);
                self.handle_ack(conn, qos, path, from)?
            }
            Message::Nack { conn, phase, path } => self.handle_nack(conn, phase, path),
            Message::Failure { conn, path } => self.handle_failure(conn, path),
            Message::Teardown { conn } => self.handle_teardown(conn),
            Message::Data {
                conn,
                payload_bytes,
            } => self.handle_data(conn, payload_bytes),
        };
        Ok(actions)
    }

    fn handle_hello(&mut self, peer: RouterId) -> Vec<Action> {
        let Some(iface) = self.interfaces.iter().find(|i| i.peer == peer).copied() else {
            return vec![];
        };
        let fresh = self.nt.insert(NtEntry {
            link: iface.link,
            neighbor: peer,
            metrics: iface.metrics,
        });
        let complete = self.nt.len() == self.interfaces.len();
        if !(fresh && complete) {
            return vec![];
        }
        match self.config.discovery {
            Discovery::Qosip => self.send_update(),
            Discovery::SourceRouting => self.originate_link_state(),
        }
    }

    fn send_update(&mut self) -> Vec<Action> {
        let Ok(update) = build_update(self.id, &self.nt) else {
            return vec![];
        };
        self.stats.floods_initiated += 1;
        self.neighbors()
            .into_iter()
            .map(|to| Action::Send {
                to,
                msg: update.clone(),
            })
            .collect()
    }

    fn originate_link_state(&mut self) -> Vec<Action> {
        let own: Vec<AdvertisedLink> = self
            .nt
            .iter()
            .map(|e| {
                let (a, b) = if self.id < e.neighbor {
                    (self.id, e.neighbor)
                } else {
                    (e.neighbor, self.id)
                };
                AdvertisedLink {
                    link: e.link,
                    a,
                    b,
                    metrics: e.metrics,
                }
            })
            .collect();
        let neighbors = self.neighbors();
        self.stats.floods_initiated += 1;
        self.recompute();
        baseline::ls_flood(&mut self.lsdb, self.id, &neighbors, own)
            .into_iter()
            .map(|(to, msg)| Action::Send { to, msg })
            .collect()
    }

    fn recompute(&mut self) {
        self.stats.path_computations += 1;
        self.stats.edges_relaxed += baseline::recompute_cost(&self.lsdb, self.id);
    }

    fn handle_link_state(&mut self, lsa: &crate::model::LinkStateAdvert) -> Vec<Action> {
        let neighbors = self.neighbors();
        match baseline::handle_advert(&mut self.lsdb, &neighbors, lsa) {
            Some(sends) => {
                self.recompute();
                sends
                    .into_iter()
                    .map(|(to, msg)| Action::Send { to, msg })
                    .collect()
            }
            None => vec![],
        }
    }

    /// The engine reports a changed attached link. `originated_here` is true
    /// on the endpoint whose action caused the change.
    pub fn link_changed(
        &mut self,
        link: LinkId,
        metrics: LinkMetrics,
        originated_here: bool,
    ) -> Vec<Action> {
        if let Some(iface) = self.interfaces.iter_mut().find(|i| i.link == link) {
            iface.metrics = metrics;
        }
        let Some(old) = self.nt.set_metrics(link, metrics) else {
            return vec![];
        };
        self.snt.refresh_via(link, &metrics);
        match self.config.discovery {
            Discovery::Qosip => {
                let (before, after) = (old.residual_kbps(), metrics.residual_kbps());
                let fire = match self.config.trigger {
                    TriggerMode::ClassBased => should_trigger(before, after, self.config.policy),
                    TriggerMode::EveryChange => before != after,
                };
                if fire {
                    self.send_update()
                } else {
                    vec![]
                }
            }
            Discovery::SourceRouting if originated_here => self.originate_link_state(),
            Discovery::SourceRouting => vec![],
        }
    }

    /// Begins setup of `conn` towards `destination`.
    pub fn start_connection(
        &mut self,
        conn: ConnectionId,
        destination: RouterId,
        qos: QosRequest,
    ) -> Result<Vec<Action>, ProtocolError> {
        if self.calls.contains_key(&conn) || self.reservations.contains_key(&conn) {
            return Err(ProtocolError::AlreadyActive(conn));
        }
        if destination == self.id {
            self.calls.insert(conn, CallStatus::Accepted);
            self.reservations.insert(
                conn,
                ReservationEntry {
                    upstream: Peer::Local,
                    downstream: Peer::Local,
                    link_to_downstream: None,
                    reserved_kbps: 0,
                    phase: ReservationPhase::Active,
                },
            );
            return Ok(vec![Action::AcceptCall {
                conn,
                path: PathRecord::origin(self.id),
            }]);
        }

        let mut probe = Probe {
            conn,
            source: self.id,
            destination,
            qos,
            path: PathRecord::origin(self.id),
            route: None,
        };
        if self.config.discovery == Discovery::SourceRouting {
            self.stats.path_computations += 1;
            match baseline::dijkstra_feasible(&self.lsdb, self.id, destination, &qos) {
                Some(route) => probe.route = Some(route.hops),
                None => {
                    self.calls.insert(conn, CallStatus::Blocked);
                    return Ok(vec![Action::BlockCall {
                        conn,
                        cause: BlockCause::NoRoute,
                    }]);
                }
            }
        }

        self.calls.insert(conn, CallStatus::Probing);
        if self.config.suppress_duplicates {
            self.probe_cache.insert(conn);
        }
        let mut actions = vec![Action::StartTimer {
            after_ms: self.config.probe_timeout_ms,
            timer: Timer::ProbeTimeout(conn),
        }];
        actions.extend(self.forward_probe(&probe));
        Ok(actions)
    }

    fn handle_probe(&mut self, now_us: u64, probe: Probe) -> Vec<Action> {
        if probe.destination == self.id {
            return self.record_candidate(now_us, probe);
        }
        if self.config.suppress_duplicates && !self.probe_cache.insert(probe.conn) {
            return vec![];
        }
        self.forward_probe(&probe)
    }

    fn record_candidate(&mut self, now_us: u64, probe: Probe) -> Vec<Action> {
        if self.closed.contains(&probe.conn) {
            return vec![];
        }
        if probe.route.is_some() {
            // Source-routed setups carry exactly one route; no window needed.
            let mut set = CandidateSet::new(probe.conn, probe.qos, now_us);
            set.candidates.push(probe.path);
            self.collecting.insert(probe.conn, set);
            return self.collect_and_ack(probe.conn);
        }
        let mut actions = vec![];
        let window_ms = self.config.collect_window_ms;
        let set = self.collecting.entry(probe.conn).or_insert_with(|| {
            actions.push(Action::StartTimer {
                after_ms: window_ms,
                timer: Timer::CollectWindow(probe.conn),
            });
            CandidateSet::new(probe.conn, probe.qos, now_us + window_ms * 1000)
        });
        set.candidates.push(probe.path);
        actions
    }

    fn probe_nack(&mut self, probe: &Probe) -> Vec<Action> {
        match probe.path.upstream_of(self.id) {
            Some(up) => vec![Action::Send {
                to: up,
                msg: Message::Nack {
                    conn: probe.conn,
                    phase: NackPhase::Probe,
                    path: probe.path.clone(),
                },
            }],
            None => {
                self.stats.probe_nacks_at_source += 1;
                vec![]
            }
        }
    }

    fn send_probe(&self, probe: &Probe, entry: &NtEntry) -> Option<Action> {
        let path = extend_path(&probe.path, &entry.metrics, entry.neighbor).ok()?;
        Some(Action::Send {
            to: entry.neighbor,
            msg: Message::Probe(Probe {
                path,
                ..probe.clone()
            }),
        })
    }

    fn link_eligible(&self, entry: &NtEntry, qos: &QosRequest, accumulated_ms: u64) -> bool {
        qos.bandwidth_fits(entry.metrics.residual_kbps())
            && qos.delay_fits(accumulated_ms + entry.metrics.delay_ms)
    }

    /// Forwarding decision for a probe whose path already ends at this router.
    fn forward_probe(&mut self, probe: &Probe) -> Vec<Action> {
        let qos = probe.qos;
        let dst = probe.destination;
        let acc = probe.path.total_delay_ms;
        let policy = self.config.policy;

        if let Some(route) = &probe.route {
            let next = route
                .iter()
                .position(|&h| h == self.id)
                .and_then(|i| route.get(i + 1))
                .copied();
            let hop = next.and_then(|n| self.nt.to_neighbor(n)).copied();
            return match hop {
                Some(e) if self.link_eligible(&e, &qos, acc) => {
                    self.send_probe(probe, &e).into_iter().collect()
                }
                _ => self.probe_nack(probe),
            };
        }

        if let Some(direct) = self.nt.to_neighbor(dst).copied() {
            if self.link_eligible(&direct, &qos, acc) {
                if let Some(send) = self.send_probe(probe, &direct) {
                    return vec![send];
                }
            }
            return self.probe_nack(probe);
        }

        if self.snt.contains_second(dst) {
            let routes: Vec<_> = eligible_two_hop(&self.snt, dst, &qos, acc, policy)
                .into_iter()
                .filter(|r| !probe.path.contains(r.neighbor))
                .filter(|r| {
                    self.nt
                        .get(r.first_link)
                        .is_some_and(|e| self.link_eligible(e, &qos, acc))
                })
                .collect();
            let Ok(chosen) = self.config.link_choice.choose(&routes, policy) else {
                return self.probe_nack(probe);
            };
            let entry = *self.nt.get(chosen.first_link).expect("checked above");
            return self.send_probe(probe, &entry).into_iter().collect();
        }

        let sends: Vec<Action> = eligible_first_hops(&self.nt, &qos, acc, policy)
            .iter()
            .filter(|e| !probe.path.contains(e.neighbor))
            .filter(|e| {
                self.snt.via(e.neighbor).any(|s| {
                    qos.bandwidth_fits(s.agg_bottleneck_kbps) && qos.delay_fits(acc + s.agg_delay_ms)
                })
            })
            .filter_map(|e| self.send_probe(probe, e))
            .collect();
        if sends.is_empty() {
            return self.probe_nack(probe);
        }
        sends
    }

    /// Fires a timer previously requested with [`Action::StartTimer`].
    pub fn on_timer(&mut self, timer: Timer) -> Vec<Action> {
        match timer {
            Timer::CollectWindow(conn) => self.collect_and_ack(conn),
            Timer::ProbeTimeout(conn) => {
                if self.calls.get(&conn) != Some(&CallStatus::Probing) {
                    return vec![];
                }
                self.calls.insert(conn, CallStatus::Blocked);
                vec![Action::BlockCall {
                    conn,
                    cause: BlockCause::ProbeTimeout,
                }]
            }
        }
    }

    /// Ranks the collected candidates and ACKs the best one upstream.
    pub fn collect_and_ack(&mut self, conn: ConnectionId) -> Vec<Action> {
        self.closed.insert(conn);
        let Some(set) = self.collecting.remove(&conn) else {
            return vec![];
        };
        self.stats.path_computations += 1;
        let Some(path) = select_best(&set) else {
            return vec![];
        };
        let Some(up) = path.upstream_of(self.id) else {
            return vec![];
        };
        self.reservations.insert(
            conn,
            ReservationEntry {
                upstream: Peer::Router(up),
                downstream: Peer::Local,
                link_to_downstream: None,
                reserved_kbps: 0,
                phase: ReservationPhase::Active,
            },
        );
        vec![Action::Send {
            to: up,
            msg: Message::Ack {
                conn,
                qos: set.qos,
                path,
            },
        }]
    }

    fn handle_ack(
        &mut self,
        conn: ConnectionId,
        qos: QosRequest,
        path: PathRecord,
        from: RouterId,
    ) -> Result<Vec<Action>, ProtocolError> {
        let mismatch = ProtocolError::PathMismatch {
            router: self.id,
            conn,
            from,
        };
        if path.downstream_of(self.id) != Some(from) {
            return Err(mismatch);
        }
        let link = *self.nt.to_neighbor(from).ok_or(mismatch)?;
        if self.reservations.contains_key(&conn) {
            return Err(ProtocolError::DuplicateReservation {
                router: self.id,
                conn,
            });
        }
        let upstream = path.upstream_of(self.id);
        let at_source = upstream.is_none();

        if at_source && self.calls.get(&conn) != Some(&CallStatus::Probing) {
            // Too late: the call was already given up. Unwind what was reserved.
            return Ok(vec![Action::Send {
                to: from,
                msg: Message::Failure { conn, path },
            }]);
        }

        if !qos.bandwidth_fits(link.metrics.residual_kbps()) {
            let mut actions = vec![Action::Send {
                to: from,
                msg: Message::Failure {
                    conn,
                    path: path.clone(),
                },
            }];
            match upstream {
                Some(up) => actions.push(Action::Send {
                    to: up,
                    msg: Message::Nack {
                        conn,
                        phase: NackPhase::Ack,
                        path,
                    },
                }),
                None => {
                    self.calls.insert(conn, CallStatus::Failed);
                    actions.push(Action::BlockCall {
                        conn,
                        cause: BlockCause::ReservationFailed,
                    });
                }
            }
            return Ok(actions);
        }

        let kbps = qos.bandwidth_kbps();
        self.reservations.insert(
            conn,
            ReservationEntry {
                upstream: upstream.map_or(Peer::Local, Peer::Router),
                downstream: Peer::Router(from),
                link_to_downstream: Some(link.link),
                reserved_kbps: kbps,
                phase: ReservationPhase::Active,
            },
        );
        let mut actions = vec![Action::Reserve {
            link: link.link,
            kbps,
            conn,
        }];
        match upstream {
            Some(up) => actions.push(Action::Send {
                to: up,
                msg: Message::Ack { conn, qos, path },
            }),
            None => {
                self.calls.insert(conn, CallStatus::Accepted);
                actions.push(Action::AcceptCall { conn, path });
            }
        }
        Ok(actions)
    }

    fn handle_nack(&mut self, conn: ConnectionId, phase: NackPhase, path: PathRecord) -> Vec<Action> {
        if let Some(up) = path.upstream_of(self.id) {
            return vec![Action::Send {
                to: up,
                msg: Message::Nack { conn, phase, path },
            }];
        }
        match phase {
            NackPhase::Probe => {
                self.stats.probe_nacks_at_source += 1;
                vec![]
            }
            NackPhase::Ack => {
                if self.calls.get(&conn) != Some(&CallStatus::Probing) {
                    return vec![];
                }
                self.calls.insert(conn, CallStatus::Failed);
                vec![Action::BlockCall {
                    conn,
                    cause: BlockCause::ReservationFailed,
                }]
            }
        }
    }

    /// Releases this hop's reservation and returns where the release should
    /// travel next, if anywhere.
    fn release_entry(&mut self, conn: ConnectionId) -> Option<(Vec<Action>, Peer)> {
        let entry = self.reservations.get_mut(&conn)?;
        if entry.phase != ReservationPhase::Active {
            return None;
        }
        entry.phase = ReservationPhase::Released;
        let mut actions = vec![];
        if let Some(link) = entry.link_to_downstream {
            actions.push(Action::Release {
                link,
                kbps: entry.reserved_kbps,
                conn,
            });
        }
        Some((actions, entry.downstream))
    }

    fn handle_failure(&mut self, conn: ConnectionId, path: PathRecord) -> Vec<Action> {
        let Some((mut actions, downstream)) = self.release_entry(conn) else {
            return vec![];
        };
        if let Peer::Router(next) = downstream {
            actions.push(Action::Send {
                to: next,
                msg: Message::Failure { conn, path },
            });
        }
        actions
    }

    fn handle_teardown(&mut self, conn: ConnectionId) -> Vec<Action> {
        let Some((mut actions, downstream)) = self.release_entry(conn) else {
            return vec![];
        };
        if let Peer::Router(next) = downstream {
            actions.push(Action::Send {
                to: next,
                msg: Message::Teardown { conn },
            });
        }
        actions
    }

    fn handle_data(&mut self, conn: ConnectionId, bytes: u64) -> Vec<Action> {
        match self.reservations.get(&conn) {
            Some(e) if e.phase == ReservationPhase::Active => match e.downstream {
                Peer::Router(next) => vec![Action::Send {
                    to: next,
                    msg: Message::Data {
                        conn,
                        payload_bytes: bytes,
                    },
                }],
                Peer::Local => vec![Action::Deliver { conn, bytes }],
            },
            _ => vec![Action::DropData { conn, bytes }],
        }
    }
}
