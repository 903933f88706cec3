#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use qosip_core::model::{Message, RouterId};
use qosip_core::simcore::{Scenario, SimConfig, SimOutcome, Simulator, Topology, TraceEvent};

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn load(topo: &str, scn: &str) -> (Topology, Scenario) {
    let dir = scenario_dir();
    let t = Topology::parse(&std::fs::read_to_string(dir.join(topo)).unwrap()).unwrap();
    let s = Scenario::parse(&std::fs::read_to_string(dir.join(scn)).unwrap(), &t).unwrap();
    (t, s)
}

pub fn run(topology: &Topology, scenario: &Scenario, config: SimConfig) -> SimOutcome {
    Simulator::new(topology.clone(), config).run(scenario).unwrap()
}

/// Replays Reserve/Release records and returns the maximum reserved value
/// observed per link, checking it never exceeds capacity.
pub fn check_conservation(topology: &Topology, out: &SimOutcome) -> Result<(), String> {
    let mut reserved: BTreeMap<_, u64> = BTreeMap::new();
    for rec in &out.trace {
        match &rec.event {
            TraceEvent::Reserve { link, kbps, .. } => {
                let r = reserved.entry(*link).or_default();
                *r += kbps;
                let cap = topology.link(*link).unwrap().metrics.capacity_kbps;
                if *r > cap {
                    return Err(format!("{link} at {} us: {r} > {cap}", rec.time_us));
                }
            }
            TraceEvent::Release { link, kbps, .. } => {
                let r = reserved.entry(*link).or_default();
                *r = r
                    .checked_sub(*kbps)
                    .ok_or_else(|| format!("{link} released below zero at {} us", rec.time_us))?;
            }
            _ => {}
        }
    }
    if let Some((l, r)) = reserved.iter().find(|(_, &r)| r != 0) {
        return Err(format!("{l} still holds {r} kbps after replay"));
    }
    if let Some((l, r)) = out.final_reserved.iter().find(|(_, &r)| r != 0) {
        return Err(format!("{l} still holds {r} kbps at the end"));
    }
    Ok(())
}

/// Probes seen in the trace, with their recorded paths.
pub fn probe_paths(out: &SimOutcome) -> Vec<Vec<RouterId>> {
    out.trace
        .iter()
        .filter_map(|r| match &r.event {
            TraceEvent::Send {
                msg: Message::Probe(p),
                ..
            } => Some(p.path.hops.clone()),
            _ => None,
        })
        .collect()
}

/// All simple paths from `src` to `dst` over `edges`, by depth-first search.
pub fn simple_paths(
    edges: &BTreeMap<RouterId, BTreeSet<RouterId>>,
    src: RouterId,
    dst: RouterId,
) -> BTreeSet<Vec<RouterId>> {
    fn walk(
        edges: &BTreeMap<RouterId, BTreeSet<RouterId>>,
        dst: RouterId,
        stack: &mut Vec<RouterId>,
        out: &mut BTreeSet<Vec<RouterId>>,
    ) {
        let here = *stack.last().unwrap();
        if here == dst {
            out.insert(stack.clone());
            return;
        }
        for &n in edges.get(&here).into_iter().flatten() {
            if !stack.contains(&n) {
                stack.push(n);
                walk(edges, dst, stack, out);
                stack.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(edges, dst, &mut vec![src], &mut out);
    out
}

/// Adjacency restricted to links whose residual fits `kbps`.
pub fn eligible_graph(topology: &Topology, kbps: u64) -> BTreeMap<RouterId, BTreeSet<RouterId>> {
    let mut adj: BTreeMap<RouterId, BTreeSet<RouterId>> = BTreeMap::new();
    for l in topology.links() {
        if l.metrics.residual_kbps() >= kbps {
            adj.entry(l.a).or_default().insert(l.b);
            adj.entry(l.b).or_default().insert(l.a);
        }
    }
    adj
}

pub mod corpus {
    use proptest::prelude::*;
    use qosip_core::model::{ConnectionId, QosRequest, RouterId};
    use qosip_core::protocol::{Discovery, TriggerMode};
    use qosip_core::simcore::{generate, ConnectionSpec, GenParams, Scenario, SimConfig, Topology};
    use qosip_core::tables::LinkChoice;

    #[derive(Debug, Clone)]
    pub struct Case {
        pub topology: Topology,
        pub scenario: Scenario,
        pub config: SimConfig,
    }

    fn connection() -> impl Strategy<Value = (u32, u32, u64, Option<u64>, u64, u64, u64)> {
        (
            any::<u32>(),
            any::<u32>(),
            20u64..=200,
            prop::option::of(15u64..150),
            0u64..3,
            1u64..3,
            prop::sample::select(vec![250u64, 500, 1000]),
        )
    }

    /// Small random networks with narrow links and overlapping calls, so
    /// that admission races are common.
    pub fn case() -> impl Strategy<Value = Case> {
        (
            any::<u64>(),
            2u32..9,
            2u32..5,
            prop::collection::vec(connection(), 1..8),
            any::<bool>(),
            any::<bool>(),
            any::<bool>(),
            any::<bool>(),
        )
            .prop_map(|(seed, nodes, degree, conns, suppress, sr, greedy, eager)| {
                let topology = generate(&GenParams {
                    nodes,
                    degree,
                    capacity_kbps: (60, 400),
                    delay_ms: (1, 15),
                    seed,
                })
                .unwrap();
                let connections = conns
                    .into_iter()
                    .enumerate()
                    .map(|(i, (s, d, bw, bound, start, dur, pkt))| ConnectionSpec {
                        conn: ConnectionId(i as u32 + 1),
                        src: RouterId(s % nodes),
                        dst: RouterId(d % nodes),
                        qos: QosRequest::new(bw, bound).unwrap(),
                        start_s: start,
                        duration_s: dur,
                        cbr_kbps: bw,
                        pkt_bytes: pkt,
                    })
                    .collect();
                let mut config = SimConfig::default();
                config.protocol.suppress_duplicates = suppress;
                if sr {
                    config.protocol.discovery = Discovery::SourceRouting;
                }
                if greedy {
                    config.protocol.link_choice = LinkChoice::GreedyWidest;
                }
                if eager {
                    config.protocol.trigger = TriggerMode::EveryChange;
                }
                Case {
                    topology,
                    scenario: Scenario::new(connections),
                    config,
                }
            })
    }
}
