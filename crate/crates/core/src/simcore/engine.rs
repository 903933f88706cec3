//! Single-threaded event loop. Events run in `(time_us, seq)` order where
//! `seq` is assigned when the event is scheduled, so equal inputs always
//! produce the same trace.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use thiserror::Error;

use crate::metrics::{ConnectionReport, Counters, Outcome, ThroughputSeries};
use crate::model::{ConnectionId, LinkId, LinkMetrics, Message, RouterId};
use crate::protocol::{Action, BlockCause, ProtocolConfig, ProtocolError, RouterState, Timer};
use crate::simcore::scenario::{cbr_schedule, CbrPlan, ConnectionSpec, Scenario, ScenarioError};
use crate::simcore::topology::Topology;
use crate::simcore::trace::{trace_hash, TraceEvent, TraceRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("invariant violated at {time_us} us: {message}")]
    Invariant { time_us: u64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub protocol: ProtocolConfig,
    pub max_time_s: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            protocol: ProtocolConfig::default(),
            max_time_s: 600,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Payload {
    Deliver {
        from: RouterId,
        to: RouterId,
        msg: Message,
    },
    Local {
        router: RouterId,
        msg: Message,
    },
    Timer {
        router: RouterId,
        timer: Timer,
    },
    Start(ConnectionId),
    CbrTick {
        conn: ConnectionId,
        index: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Scheduled {
    time_us: u64,
    seq: u64,
    payload: Payload,
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time_us, self.seq).cmp(&(other.time_us, other.seq))
    }
}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LinkState {
    a: RouterId,
    b: RouterId,
    metrics: LinkMetrics,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub trace: Vec<TraceRecord>,
    pub counters: Counters,
    pub series: ThroughputSeries,
    pub boot_end_us: u64,
    pub end_us: u64,
    /// Reserved bandwidth per link when the run stopped.
    pub final_reserved: BTreeMap<LinkId, u64>,
    /// True when the queue drained before the time limit.
    pub drained: bool,
}

impl SimOutcome {
    pub fn trace_hash(&self) -> String {
        trace_hash(&self.trace)
    }
}

pub struct Simulator {
    topology: Topology,
    config: SimConfig,
    links: BTreeMap<LinkId, LinkState>,
    routers: BTreeMap<RouterId, RouterState>,
    queue: BinaryHeap<Reverse<Scheduled>>,
    seq: u64,
    now_us: u64,
    booted: bool,
    boot_end_us: u64,
    specs: BTreeMap<ConnectionId, ConnectionSpec>,
    cbr: BTreeMap<ConnectionId, CbrPlan>,
    trace: Vec<TraceRecord>,
    counters: Counters,
    series: ThroughputSeries,
}

impl Simulator {
    pub fn new(topology: Topology, config: SimConfig) -> Self {
        let links = topology
            .links()
            .iter()
            .map(|l| {
                (
                    l.id,
                    LinkState {
                        a: l.a,
                        b: l.b,
                        metrics: l.metrics,
                    },
                )
            })
            .collect();
        let routers = topology
            .routers()
            .map(|r| (r, RouterState::new(r, topology.interfaces(r), config.protocol)))
            .collect();
        Self {
            topology,
            config,
            links,
            routers,
            queue: BinaryHeap::new(),
            seq: 0,
            now_us: 0,
            booted: false,
            boot_end_us: 0,
            specs: BTreeMap::new(),
            cbr: BTreeMap::new(),
            trace: vec![],
            counters: Counters::default(),
            series: ThroughputSeries::default(),
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn router(&self, id: RouterId) -> Option<&RouterState> {
        self.routers.get(&id)
    }

    pub fn routers(&self) -> impl Iterator<Item = &RouterState> {
        self.routers.values()
    }

    pub fn link_metrics(&self, id: LinkId) -> Option<LinkMetrics> {
        self.links.get(&id).map(|l| l.metrics)
    }

    pub fn now_us(&self) -> u64 {
        self.now_us
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    fn schedule(&mut self, time_us: u64, payload: Payload) {
        self.seq += 1;
        self.queue.push(Reverse(Scheduled {
            time_us,
            seq: self.seq,
            payload,
        }));
    }

    fn log(&mut self, event: TraceEvent) {
        self.trace.push(TraceRecord {
            time_us: self.now_us,
            event,
        });
    }

    fn breach(&self, message: String) -> SimError {
        SimError::Invariant {
            time_us: self.now_us,
            message,
        }
    }

    /// Hello/Update exchange from an empty state until nothing is left in
    /// flight. Returns the time at which boot went quiet.
    pub fn boot(&mut self) -> Result<u64, SimError> {
        if self.booted {
            return Ok(self.boot_end_us);
        }
        let ids: Vec<RouterId> = self.routers.keys().copied().collect();
        for id in ids {
            let actions = self.routers.get_mut(&id).expect("router exists").boot();
            self.apply(id, actions)?;
        }
        while let Some(Reverse(ev)) = self.queue.pop() {
            self.now_us = ev.time_us;
            self.dispatch(ev.payload)?;
        }
        self.booted = true;
        self.boot_end_us = self.now_us;
        Ok(self.boot_end_us)
    }

    /// Runs `scenario` to completion (or to the time limit). Connection start
    /// times are offsets from the end of boot.
    pub fn run(mut self, scenario: &Scenario) -> Result<SimOutcome, SimError> {
        self.simulate(scenario)
    }

    /// Like [`run`](Self::run) but keeps the simulator (and its router
    /// tables) around for inspection. The returned outcome takes the trace
    /// and counters with it.
    pub fn simulate(&mut self, scenario: &Scenario) -> Result<SimOutcome, SimError> {
        scenario.validate(&self.topology)?;
        self.boot()?;
        let origin = self.boot_end_us;
        for spec in &scenario.connections {
            self.specs.insert(spec.conn, *spec);
            self.schedule(origin + spec.start_s * 1_000_000, Payload::Start(spec.conn));
        }
        let limit = self.config.max_time_s * 1_000_000;
        let mut drained = true;
        while let Some(Reverse(ev)) = self.queue.pop() {
            if ev.time_us > limit {
                drained = false;
                break;
            }
            self.now_us = ev.time_us;
            self.dispatch(ev.payload)?;
        }
        Ok(self.finish(drained))
    }

    fn finish(&mut self, drained: bool) -> SimOutcome {
        for r in self.routers.values() {
            let c = self.counters.router_mut(r.id);
            c.computations = r.stats.path_computations;
            c.edges_relaxed = r.stats.edges_relaxed;
            c.floods_initiated = r.stats.floods_initiated;
        }
        let final_reserved = self
            .links
            .iter()
            .map(|(&id, l)| (id, l.metrics.reserved_kbps))
            .collect();
        SimOutcome {
            trace: std::mem::take(&mut self.trace),
            counters: std::mem::take(&mut self.counters),
            series: std::mem::take(&mut self.series),
            boot_end_us: self.boot_end_us,
            end_us: self.now_us,
            final_reserved,
            drained,
        }
    }

    fn dispatch(&mut self, payload: Payload) -> Result<(), SimError> {
        let now = self.now_us;
        match payload {
            Payload::Deliver { from, to, msg } => {
                self.counters.router_mut(to).events += 1;
                let router = self.routers.get_mut(&to).expect("send targets exist");
                let actions = router.handle(now, Some(from), msg)?;
                self.apply(to, actions)
            }
            Payload::Local { router: id, msg } => {
                self.counters.router_mut(id).events += 1;
                let router = self.routers.get_mut(&id).expect("local targets exist");
                let actions = router.handle(now, None, msg)?;
                self.apply(id, actions)
            }
            Payload::Timer { router: id, timer } => {
                self.counters.router_mut(id).events += 1;
                self.log(TraceEvent::Timer { router: id, timer });
                let actions = self.routers.get_mut(&id).expect("timer owner exists").on_timer(timer);
                self.apply(id, actions)
            }
            Payload::Start(conn) => {
                let spec = self.specs[&conn];
                self.counters.connections.insert(
                    conn,
                    ConnectionReport {
                        conn,
                        src: spec.src,
                        dst: spec.dst,
                        outcome: None,
                        path: None,
                        start_us: now,
                        accept_us: None,
                    },
                );
                self.log(TraceEvent::Start {
                    conn,
                    router: spec.src,
                });
                self.counters.router_mut(spec.src).events += 1;
                let actions = self
                    .routers
                    .get_mut(&spec.src)
                    .expect("validated source")
                    .start_connection(conn, spec.dst, spec.qos)?;
                self.apply(spec.src, actions)
            }
            Payload::CbrTick { conn, index } => {
                let plan = self.cbr[&conn];
                let src = self.specs[&conn].src;
                if index < plan.packets {
                    self.counters.data_offered_bytes += plan.pkt_bytes;
                    self.schedule(
                        now,
                        Payload::Local {
                            router: src,
                            msg: Message::Data {
                                conn,
                                payload_bytes: plan.pkt_bytes,
                            },
                        },
                    );
                    self.schedule(
                        plan.packet_time_us(index + 1),
                        Payload::CbrTick {
                            conn,
                            index: index + 1,
                        },
                    );
                } else {
                    self.schedule(
                        now,
                        Payload::Local {
                            router: src,
                            msg: Message::Teardown { conn },
                        },
                    );
                }
                Ok(())
            }
        }
    }

    /// Applies handler output. Link changes are reported back to both
    /// endpoints and whatever they emit is applied in the same instant.
    fn apply(&mut self, origin: RouterId, actions: Vec<Action>) -> Result<(), SimError> {
        let mut work: VecDeque<(RouterId, Action)> =
            actions.into_iter().map(|a| (origin, a)).collect();
        while let Some((at, action)) = work.pop_front() {
            match action {
                Action::Send { to, msg } => {
                    let link = *self
                        .topology
                        .link_between(at, to)
                        .ok_or_else(|| self.breach(format!("router {at} sent to non-neighbor {to}")))?;
                    let delay = self.links[&link.id].metrics.delay_ms;
                    let arrive_us = self.now_us + delay * 1000;
                    self.counters.record_send(&msg, self.booted);
                    self.log(TraceEvent::Send {
                        from: at,
                        to,
                        link: link.id,
                        arrive_us,
                        msg: msg.clone(),
                    });
                    self.schedule(arrive_us, Payload::Deliver { from: at, to, msg });
                }
                Action::Deliver { conn, bytes } => {
                    self.series.record(at, self.now_us, bytes);
                    self.log(TraceEvent::Deliver {
                        router: at,
                        conn,
                        bytes,
                    });
                }
                Action::DropData { conn, bytes } => {
                    self.counters.data_dropped_packets += 1;
                    self.counters.data_dropped_bytes += bytes;
                    self.log(TraceEvent::Drop {
                        router: at,
                        conn,
                        bytes,
                    });
                }
                Action::Reserve { link, kbps, conn } => {
                    let state = self.links.get_mut(&link).expect("reserved link exists");
                    if let Err(e) = state.metrics.reserve(kbps) {
                        return Err(self.breach(format!("{link}: {e}")));
                    }
                    let metrics = state.metrics;
                    self.log(TraceEvent::Reserve {
                        router: at,
                        link,
                        conn,
                        kbps,
                        reserved_after: metrics.reserved_kbps,
                        capacity: metrics.capacity_kbps,
                    });
                    self.notify_link(at, link, &mut work);
                }
                Action::Release { link, kbps, conn } => {
                    let state = self.links.get_mut(&link).expect("released link exists");
                    if !state.metrics.release(kbps) {
                        let held = state.metrics.reserved_kbps;
                        return Err(self.breach(format!(
                            "{link}: releasing {kbps} kbps with only {held} reserved"
                        )));
                    }
                    let reserved_after = state.metrics.reserved_kbps;
                    self.log(TraceEvent::Release {
                        router: at,
                        link,
                        conn,
                        kbps,
                        reserved_after,
                    });
                    self.notify_link(at, link, &mut work);
                }
                Action::AcceptCall { conn, path } => {
                    self.log(TraceEvent::Accept {
                        conn,
                        path: path.clone(),
                    });
                    let now = self.now_us;
                    if let Some(report) = self.counters.connections.get_mut(&conn) {
                        report.outcome = Some(Outcome::Accepted);
                        report.path = Some(path);
                        report.accept_us = Some(now);
                    }
                    let plan = cbr_schedule(&self.specs[&conn], now);
                    self.cbr.insert(conn, plan);
                    self.schedule(now, Payload::CbrTick { conn, index: 0 });
                }
                Action::BlockCall { conn, cause } => {
                    self.log(TraceEvent::Block { conn, cause });
                    if let Some(report) = self.counters.connections.get_mut(&conn) {
                        report.outcome = Some(match cause {
                            BlockCause::ReservationFailed => Outcome::Failed,
                            BlockCause::ProbeTimeout | BlockCause::NoRoute => Outcome::Blocked,
                        });
                    }
                }
                Action::StartTimer { after_ms, timer } => {
                    self.schedule(
                        self.now_us + after_ms * 1000,
                        Payload::Timer { router: at, timer },
                    );
                }
            }
        }
        Ok(())
    }

    fn notify_link(
        &mut self,
        actor: RouterId,
        link: LinkId,
        work: &mut VecDeque<(RouterId, Action)>,
    ) {
        let state = self.links[&link];
        for end in [state.a, state.b] {
            let router = self.routers.get_mut(&end).expect("endpoint exists");
            for a in router.link_changed(link, state.metrics, end == actor) {
                work.push_back((end, a));
            }
        }
    }
}

/// Boots `topology` and runs `scenario` under `config`.
pub fn run(topology: Topology, scenario: &Scenario, config: SimConfig) -> Result<SimOutcome, SimError> {
    Simulator::new(topology, config).run(scenario)
}
