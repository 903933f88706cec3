//! Implementation results checked against independent graph computations.

mod common;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use proptest::prelude::*;
use qosip_core::baseline::{dijkstra_feasible, handle_advert, ls_flood, LinkStateDb};
use qosip_core::metrics::Outcome;
use qosip_core::model::{
    AdvertisedLink, ConnectionId, Message, MessageKind, PathRecord, QosRequest, RouterId,
};
use qosip_core::pathselect::{select_best, CandidateSet};
use qosip_core::protocol::Discovery;
use qosip_core::simcore::{
    generate, ConnectionSpec, GenParams, Scenario, SimConfig, SimOutcome, Topology, TraceEvent,
};

use common::{eligible_graph, load, run, simple_paths};

fn single_call(src: u32, dst: u32, kbps: u64) -> Scenario {
    Scenario::new(vec![ConnectionSpec {
        conn: ConnectionId(1),
        src: RouterId(src),
        dst: RouterId(dst),
        qos: QosRequest::bandwidth_only(kbps).unwrap(),
        start_s: 0,
        duration_s: 1,
        cbr_kbps: kbps,
        pkt_bytes: 1000,
    }])
}

/// Paths of every probe that reached `dst`.
fn arrived(out: &SimOutcome, dst: RouterId) -> BTreeSet<Vec<RouterId>> {
    out.trace
        .iter()
        .filter_map(|r| match &r.event {
            TraceEvent::Send {
                to,
                msg: Message::Probe(p),
                ..
            } if *to == dst => Some(p.path.hops.clone()),
            _ => None,
        })
        .collect()
}

/// Walks the forwarding rules over a static graph. Every branch is followed,
/// i.e. no duplicate suppression. Links carry `(capacity, delay)`.
struct RuleWalk {
    adj: BTreeMap<RouterId, BTreeMap<RouterId, (u64, u64)>>,
    kbps: u64,
    class_width: u64,
}

impl RuleWalk {
    fn new(t: &Topology, kbps: u64) -> Self {
        let mut adj: BTreeMap<RouterId, BTreeMap<RouterId, (u64, u64)>> = BTreeMap::new();
        for l in t.links() {
            let m = (l.metrics.capacity_kbps, l.metrics.delay_ms);
            adj.entry(l.a).or_default().insert(l.b, m);
            adj.entry(l.b).or_default().insert(l.a, m);
        }
        Self {
            adj,
            kbps,
            class_width: 100,
        }
    }

    fn nbrs(&self, r: RouterId) -> impl Iterator<Item = (RouterId, (u64, u64))> + '_ {
        self.adj.get(&r).into_iter().flatten().map(|(&n, &m)| (n, m))
    }

    fn paths(&self, src: RouterId, dst: RouterId) -> BTreeSet<Vec<RouterId>> {
        let mut out = BTreeSet::new();
        self.walk(vec![src], dst, &mut out);
        out
    }

    fn walk(&self, path: Vec<RouterId>, dst: RouterId, out: &mut BTreeSet<Vec<RouterId>>) {
        let here = *path.last().unwrap();
        if here == dst {
            out.insert(path);
            return;
        }
        let go = |next: RouterId, out: &mut BTreeSet<Vec<RouterId>>| {
            let mut p = path.clone();
            p.push(next);
            self.walk(p, dst, out);
        };
        if let Some(&(cap, _)) = self.adj[&here].get(&dst) {
            if cap >= self.kbps {
                go(dst, out);
            }
            return;
        }
        // (class, delay, neighbor) of every two-hop route to dst
        let mut two_hop: Vec<(u64, u64, RouterId, bool)> = vec![];
        for (n, (c1, d1)) in self.nbrs(here) {
            if let Some(&(c2, d2)) = self.adj[&n].get(&dst) {
                let bottleneck = c1.min(c2);
                two_hop.push((bottleneck / self.class_width, d1 + d2, n, bottleneck >= self.kbps));
            }
        }
        if !two_hop.is_empty() {
            two_hop.retain(|&(_, _, n, ok)| ok && !path.contains(&n));
            two_hop.sort();
            if let Some(&(_, _, n, _)) = two_hop.first() {
                go(n, out);
            }
            return;
        }
        for (n, (c1, _)) in self.nbrs(here) {
            if c1 < self.kbps || path.contains(&n) {
                continue;
            }
            let leads_on = self
                .nbrs(n)
                .any(|(s, (c2, _))| s != here && c1.min(c2) >= self.kbps);
            if leads_on {
                go(n, out);
            }
        }
    }
}

fn oracle_config() -> SimConfig {
    let mut config = SimConfig::default();
    config.protocol.suppress_duplicates = false;
    config.protocol.collect_window_ms = 60_000;
    config.protocol.probe_timeout_ms = 120_000;
    config
}

fn random_instance(seed: u64) -> (Topology, u32, u32, u64) {
    let nodes = 3 + (seed % 6) as u32;
    let t = generate(&GenParams {
        nodes,
        degree: 2 + (seed % 3) as u32,
        capacity_kbps: (50, 500),
        delay_ms: (1, 20),
        seed,
    })
    .unwrap();
    let src = (seed / 7 % nodes as u64) as u32;
    let dst = (src + 1 + (seed / 11 % (nodes as u64 - 1)) as u32) % nodes;
    let kbps = 50 + seed / 13 % 300;
    (t, src, dst, kbps)
}

#[test]
fn candidates_match_rule_walk() {
    for seed in 0..250 {
        let (t, src, dst, kbps) = random_instance(seed);
        let out = run(&t, &single_call(src, dst, kbps), oracle_config());
        let expected = RuleWalk::new(&t, kbps).paths(RouterId(src), RouterId(dst));
        assert_eq!(arrived(&out, RouterId(dst)), expected, "seed {seed}");
    }
}

#[test]
fn rule_walk_paths_are_eligible_simple_paths() {
    for seed in 0..250 {
        let (t, src, dst, kbps) = random_instance(seed);
        let all = simple_paths(&eligible_graph(&t, kbps), RouterId(src), RouterId(dst));
        let walked = RuleWalk::new(&t, kbps).paths(RouterId(src), RouterId(dst));
        assert!(walked.is_subset(&all), "seed {seed}");
    }
}

#[test]
fn reached_destination_implies_eligible_connectivity() {
    for seed in 0..250 {
        let (t, src, dst, kbps) = random_instance(seed);
        let out = run(&t, &single_call(src, dst, kbps), SimConfig::default());
        let reached = !arrived(&out, RouterId(dst)).is_empty();
        let connected =
            !simple_paths(&eligible_graph(&t, kbps), RouterId(src), RouterId(dst)).is_empty();
        assert!(!reached || connected, "seed {seed}");
        let accepted = out.counters.connections[&ConnectionId(1)].outcome == Some(Outcome::Accepted);
        assert_eq!(accepted, reached, "seed {seed}");
    }
}

#[test]
fn narrow_direct_link_hides_a_wide_detour() {
    // 0-2 cannot carry the call but 0-1-2 can; the direct-neighbor rule
    // answers with a NACK instead of detouring.
    let t = Topology::from_edges(3, &[(0, 1, 500, 5), (1, 2, 500, 5), (0, 2, 50, 5)]).unwrap();
    assert!(!simple_paths(&eligible_graph(&t, 100), RouterId(0), RouterId(2)).is_empty());
    let out = run(&t, &single_call(0, 2, 100), SimConfig::default());
    assert!(arrived(&out, RouterId(2)).is_empty());
    assert_eq!(
        out.counters.connections[&ConnectionId(1)].outcome,
        Some(Outcome::Blocked)
    );
}

/// Textbook O(n²) Dijkstra on min delay.
fn min_delay(edges: &[(RouterId, RouterId, u64)], src: RouterId, dst: RouterId) -> Option<u64> {
    let mut dist: BTreeMap<RouterId, u64> = BTreeMap::from([(src, 0)]);
    let mut done = BTreeSet::new();
    loop {
        let (&u, &du) = dist.iter().filter(|(v, _)| !done.contains(*v)).min_by_key(|(_, &d)| d)?;
        if u == dst {
            return Some(du);
        }
        done.insert(u);
        for &(a, b, d) in edges {
            let v = if a == u {
                b
            } else if b == u {
                a
            } else {
                continue;
            };
            let nd = du + d;
            if dist.get(&v).is_none_or(|&old| nd < old) {
                dist.insert(v, nd);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// When every simple path is a candidate, the best candidate has the
    /// shortest-path delay over their links.
    #[test]
    fn best_candidate_is_shortest_over_complete_sets(seed in any::<u64>(), nodes in 2u32..7) {
        let t = generate(&GenParams { nodes, degree: 3, seed, ..GenParams::default() }).unwrap();
        let (src, dst) = (RouterId(0), RouterId(nodes - 1));
        let mut set = CandidateSet::new(ConnectionId(1), QosRequest::bandwidth_only(1).unwrap(), 0);
        for hops in simple_paths(&eligible_graph(&t, 0), src, dst) {
            let mut p = PathRecord::origin(src);
            for w in hops.windows(2) {
                p = qosip_core::model::extend_path(&p, &t.link_between(w[0], w[1]).unwrap().metrics, w[1]).unwrap();
            }
            set.candidates.push(p);
        }
        let edges: Vec<_> = t.links().iter().map(|l| (l.a, l.b, l.metrics.delay_ms)).collect();
        let best = select_best(&set).map(|p| p.total_delay_ms);
        prop_assert_eq!(best, min_delay(&edges, src, dst));
    }

    /// Shortest path over the links of the collected candidates never beats
    /// the chosen candidate from above.
    #[test]
    fn chosen_path_is_no_shorter_than_candidate_union(seed in 0u64..10_000) {
        let (t, src, dst, kbps) = random_instance(seed);
        let out = run(&t, &single_call(src, dst, kbps), oracle_config());
        let cands = arrived(&out, RouterId(dst));
        let accepted = out.counters.connections[&ConnectionId(1)].path.clone();
        prop_assert_eq!(cands.is_empty(), accepted.is_none());
        if let Some(path) = accepted {
            let mut edges = BTreeSet::new();
            for hops in &cands {
                for w in hops.windows(2) {
                    let l = t.link_between(w[0], w[1]).unwrap();
                    edges.insert((l.a, l.b, l.metrics.delay_ms));
                }
            }
            let edges: Vec<_> = edges.into_iter().collect();
            let lower = min_delay(&edges, RouterId(src), RouterId(dst)).unwrap();
            prop_assert!(lower <= path.total_delay_ms);
            let cand_min = cands
                .iter()
                .map(|h| h.windows(2).map(|w| t.link_between(w[0], w[1]).unwrap().metrics.delay_ms).sum::<u64>())
                .min()
                .unwrap();
            prop_assert_eq!(cand_min, path.total_delay_ms);
        }
    }

    /// Global link state finds a path at least as short as the accepted one.
    #[test]
    fn global_route_is_no_longer(seed in 0u64..10_000) {
        let (t, src, dst, kbps) = random_instance(seed);
        let out = run(&t, &single_call(src, dst, kbps), SimConfig::default());
        if let Some(path) = &out.counters.connections[&ConnectionId(1)].path {
            let db = LinkStateDb::from_links(t.links().iter().map(|l| AdvertisedLink {
                link: l.id,
                a: l.a,
                b: l.b,
                metrics: l.metrics,
            }));
            let qos = QosRequest::bandwidth_only(kbps).unwrap();
            let global = dijkstra_feasible(&db, RouterId(src), RouterId(dst), &qos).unwrap();
            prop_assert!(global.total_delay_ms <= path.total_delay_ms);
        }
    }
}

/// Drives one flood through per-router databases and counts messages.
fn flood_messages(t: &Topology, origin: RouterId) -> usize {
    let mut dbs: BTreeMap<RouterId, LinkStateDb> = t.routers().map(|r| (r, LinkStateDb::new())).collect();
    let own: Vec<AdvertisedLink> = t
        .interfaces(origin)
        .iter()
        .map(|i| AdvertisedLink {
            link: i.link,
            a: origin.min(i.peer),
            b: origin.max(i.peer),
            metrics: i.metrics,
        })
        .collect();
    let first = ls_flood(dbs.get_mut(&origin).unwrap(), origin, &t.neighbors(origin), own);
    let mut queue: VecDeque<_> = first.into_iter().collect();
    let mut sent = 0;
    while let Some((to, msg)) = queue.pop_front() {
        sent += 1;
        let Message::LinkState(lsa) = msg else {
            unreachable!()
        };
        if let Some(more) = handle_advert(dbs.get_mut(&to).unwrap(), &t.neighbors(to), &lsa) {
            queue.extend(more);
        }
    }
    sent
}

#[test]
fn one_flood_over_the_fifteen_router_net() {
    let dir = common::scenario_dir();
    let t = Topology::parse(&std::fs::read_to_string(dir.join("paper_fig4.topo")).unwrap()).unwrap();
    assert_eq!((t.router_count(), t.links().len()), (15, 20));
    for origin in t.routers() {
        let sent = flood_messages(&t, origin);
        assert!(sent >= 2 * 20 - t.degree(origin));
        // every router relays once to all of its neighbors
        assert_eq!(sent, 2 * 20);
    }
}

#[test]
fn isolated_origin_floods_nothing() {
    let t = Topology::from_edges(3, &[(1, 2, 100, 1)]).unwrap();
    assert_eq!(flood_messages(&t, RouterId(0)), 0);
}

#[test]
fn link_state_traffic_matches_reservation_changes() {
    // each reserve or release makes its endpoint flood once
    let (t, s) = load("paper_fig4.topo", "paper.scn");
    let mut config = SimConfig::default();
    config.protocol.discovery = Discovery::SourceRouting;
    let out = run(&t, &s, config);
    let changes = out
        .trace
        .iter()
        .filter(|r| matches!(r.event, TraceEvent::Reserve { .. } | TraceEvent::Release { .. }))
        .count() as u64;
    assert_eq!(changes, 8);
    assert_eq!(
        out.counters.sent_after_boot(MessageKind::LinkState),
        changes * 2 * t.links().len() as u64
    );
}

#[test]
fn data_arrives_after_the_path_delay() {
    let t = Topology::from_edges(4, &[(0, 1, 500, 3), (1, 2, 500, 7), (2, 3, 500, 11)]).unwrap();
    let out = run(&t, &single_call(0, 3, 100), SimConfig::default());
    let first_send = out
        .trace
        .iter()
        .find(|r| {
            matches!(&r.event, TraceEvent::Send { from: RouterId(0), msg: Message::Data { .. }, .. })
        })
        .unwrap()
        .time_us;
    let first_delivery = out
        .trace
        .iter()
        .find(|r| matches!(r.event, TraceEvent::Deliver { bytes: 1000, .. }))
        .unwrap();
    assert_eq!(first_delivery.time_us - first_send, 21_000);
    assert_eq!(first_delivery.event, TraceEvent::Deliver { router: RouterId(3), conn: ConnectionId(1), bytes: 1000 });
}
