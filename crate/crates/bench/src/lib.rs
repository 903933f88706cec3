//! Workloads shared by the benchmarks.

use qosip_core::model::{ConnectionId, QosRequest, RouterId};
use qosip_core::simcore::{generate, ConnectionSpec, GenParams, Scenario, Topology};

/// Random topology with `nodes` routers and mean degree 4.
pub fn topology(nodes: u32, seed: u64) -> Topology {
    generate(&GenParams {
        nodes,
        degree: 4,
        capacity_kbps: (200, 2000),
        delay_ms: (1, 20),
        seed,
    })
    .expect("valid generator parameters")
}

/// `count` short connections between spread-out router pairs.
pub fn scenario(topology: &Topology, count: u32) -> Scenario {
    let n = topology.router_count() as u32;
    let connections = (0..count)
        .map(|i| ConnectionSpec {
            conn: ConnectionId(i + 1),
            src: RouterId(i % n),
            dst: RouterId((i * 7 + n / 2) % n),
            qos: QosRequest::bandwidth_only(100 + u64::from(i % 5) * 40).expect("positive"),
            start_s: u64::from(i / 4),
            duration_s: 2,
            cbr_kbps: 100,
            pkt_bytes: 1000,
        })
        .filter(|c| c.src != c.dst)
        .collect();
    Scenario::new(connections)
}
