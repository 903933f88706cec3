//! Router/link layout and its line-oriented file format:
//!
//! ```text
//! # comment
//! node <id>
//! link <id_a> <id_b> <capacity_kbps> <delay_ms>
//! ```
//!
//! Links are full duplex with symmetric metrics and are numbered in file
//! order starting at 0.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{LinkId, LinkMetrics, RouterId};
use crate::tables::Interface;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("link {link} references unknown router {router}")]
    DanglingEndpoint { link: LinkId, router: RouterId },
    #[error("duplicate link id {0}")]
    DuplicateLinkId(LinkId),
    #[error("router {0} declared twice")]
    DuplicateRouter(RouterId),
    #[error("link {0} connects a router to itself")]
    SelfLoop(LinkId),
    #[error("link {link} duplicates an existing link between {a} and {b}")]
    ParallelLink { link: LinkId, a: RouterId, b: RouterId },
    #[error("link {0} has zero capacity")]
    ZeroCapacity(LinkId),
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopologyLink {
    pub id: LinkId,
    pub a: RouterId,
    pub b: RouterId,
    pub metrics: LinkMetrics,
}

impl TopologyLink {
    pub fn other(&self, end: RouterId) -> Option<RouterId> {
        if end == self.a {
            Some(self.b)
        } else if end == self.b {
            Some(self.a)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Topology {
    routers: BTreeSet<RouterId>,
    links: Vec<TopologyLink>,
}

impl Topology {
    pub fn new(
        routers: impl IntoIterator<Item = RouterId>,
        links: Vec<TopologyLink>,
    ) -> Result<Self, TopologyError> {
        let mut set = BTreeSet::new();
        for r in routers {
            if !set.insert(r) {
                return Err(TopologyError::DuplicateRouter(r));
            }
        }
        let mut ids = BTreeSet::new();
        let mut pairs = BTreeSet::new();
        for l in &links {
            if !ids.insert(l.id) {
                return Err(TopologyError::DuplicateLinkId(l.id));
            }
            for end in [l.a, l.b] {
                if !set.contains(&end) {
                    return Err(TopologyError::DanglingEndpoint {
                        link: l.id,
                        router: end,
                    });
                }
            }
            if l.a == l.b {
                return Err(TopologyError::SelfLoop(l.id));
            }
            if l.metrics.capacity_kbps == 0 {
                return Err(TopologyError::ZeroCapacity(l.id));
            }
            if !pairs.insert((l.a.min(l.b), l.a.max(l.b))) {
                return Err(TopologyError::ParallelLink {
                    link: l.id,
                    a: l.a,
                    b: l.b,
                });
            }
        }
        Ok(Self { routers: set, links })
    }

    /// Builds a topology from `(a, b, capacity_kbps, delay_ms)` tuples over
    /// routers `0..n`.
    pub fn from_edges(n: u32, edges: &[(u32, u32, u64, u64)]) -> Result<Self, TopologyError> {
        let links = edges
            .iter()
            .enumerate()
            .map(|(i, &(a, b, cap, delay))| TopologyLink {
                id: LinkId(i as u32),
                a: RouterId(a),
                b: RouterId(b),
                metrics: LinkMetrics::new(delay, cap),
            })
            .collect();
        Self::new((0..n).map(RouterId), links)
    }

    pub fn parse(text: &str) -> Result<Self, TopologyError> {
        let mut routers = vec![];
        let mut links = vec![];
        let mut declared = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let err = |message: String| TopologyError::Parse { line, message };
            let num = |s: &str, what: &str| -> Result<u64, TopologyError> {
                s.parse::<u64>()
                    .map_err(|_| err(format!("{what} must be a non-negative integer, got `{s}`")))
            };
            match fields[0] {
                "node" => {
                    if fields.len() != 2 {
                        return Err(err("expected `node <id>`".into()));
                    }
                    let id = RouterId(num(fields[1], "node id")? as u32);
                    if !declared.insert(id) {
                        return Err(err(format!("router {id} declared twice")));
                    }
                    routers.push(id);
                }
                "link" => {
                    if fields.len() != 5 {
                        return Err(err(
                            "expected `link <id_a> <id_b> <capacity_kbps> <delay_ms>`".into(),
                        ));
                    }
                    let a = RouterId(num(fields[1], "endpoint")? as u32);
                    let b = RouterId(num(fields[2], "endpoint")? as u32);
                    for end in [a, b] {
                        if !declared.contains(&end) {
                            return Err(err(format!("unknown router {end}")));
                        }
                    }
                    let capacity = num(fields[3], "capacity")?;
                    if capacity == 0 {
                        return Err(err("capacity must be positive".into()));
                    }
                    let delay = num(fields[4], "delay")?;
                    let id = LinkId(links.len() as u32);
                    links.push(TopologyLink {
                        id,
                        a,
                        b,
                        metrics: LinkMetrics::new(delay, capacity),
                    });
                    Self::new(routers.iter().copied(), links.clone())
                        .map_err(|e| err(e.to_string()))?;
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        Self::new(routers, links)
    }

    /// Renders the topology in the file format accepted by [`parse`](Self::parse).
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for r in &self.routers {
            writeln!(out, "node {}", r.0).unwrap();
        }
        for l in &self.links {
            writeln!(
                out,
                "link {} {} {} {}",
                l.a.0, l.b.0, l.metrics.capacity_kbps, l.metrics.delay_ms
            )
            .unwrap();
        }
        out
    }

    pub fn routers(&self) -> impl Iterator<Item = RouterId> + '_ {
        self.routers.iter().copied()
    }

    pub fn router_count(&self) -> usize {
        self.routers.len()
    }

    pub fn contains(&self, r: RouterId) -> bool {
        self.routers.contains(&r)
    }

    pub fn links(&self) -> &[TopologyLink] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> Option<&TopologyLink> {
        self.links.iter().find(|l| l.id == id)
    }

    pub fn link_between(&self, a: RouterId, b: RouterId) -> Option<&TopologyLink> {
        self.links
            .iter()
            .find(|l| (l.a == a && l.b == b) || (l.a == b && l.b == a))
    }

    /// Interfaces of `router` in link order.
    pub fn interfaces(&self, router: RouterId) -> Vec<Interface> {
        self.links
            .iter()
            .filter_map(|l| {
                l.other(router).map(|peer| Interface {
                    link: l.id,
                    peer,
                    metrics: l.metrics,
                })
            })
            .collect()
    }

    pub fn neighbors(&self, router: RouterId) -> Vec<RouterId> {
        let mut n: Vec<_> = self.links.iter().filter_map(|l| l.other(router)).collect();
        n.sort();
        n
    }

    pub fn degree(&self, router: RouterId) -> usize {
        self.links.iter().filter(|l| l.other(router).is_some()).count()
    }

    /// Routers reachable from `from`, including itself.
    pub fn reachable_from(&self, from: RouterId) -> BTreeSet<RouterId> {
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

/// Parameters for random connected topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub nodes: u32,
    /// Target mean degree; the spanning tree alone gives just under 2.
    pub degree: u32,
    pub capacity_kbps: (u64, u64),
    pub delay_ms: (u64, u64),
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            nodes: 8,
            degree: 3,
            capacity_kbps: (100, 1000),
            delay_ms: (1, 20),
            seed: 0,
        }
    }
}

/// Random connected topology: a random spanning tree plus extra links up to
/// the target mean degree. Same parameters, same topology.
pub fn generate(params: &GenParams) -> Result<Topology, TopologyError> {
    let GenParams {
        nodes,
        degree,
        capacity_kbps: (cap_lo, cap_hi),
        delay_ms: (d_lo, d_hi),
        seed,
    } = *params;
    if nodes == 0 {
        return Err(TopologyError::InvalidParams("node count must be at least 1".into()));
    }
    if cap_lo == 0 || cap_lo > cap_hi {
        return Err(TopologyError::InvalidParams("bad capacity range".into()));
    }
    if d_lo > d_hi {
        return Err(TopologyError::InvalidParams("bad delay range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = nodes as u64;
    let max_edges = n * (n - 1) / 2;
    let target = (n * degree as u64 / 2).clamp(n - 1, max_edges);

    let mut pairs: BTreeMap<(u32, u32), ()> = BTreeMap::new();
    let mut edges = vec![];
    for v in 1..nodes {
        let u = rng.gen_range(0..v);
        pairs.insert((u, v), ());
        edges.push((u, v));
    }
    while (edges.len() as u64) < target {
        let a = rng.gen_range(0..nodes);
        let b = rng.gen_range(0..nodes);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if pairs.insert(key, ()).is_none() {
            edges.push(key);
        }
    }
    let tuples: Vec<(u32, u32, u64, u64)> = edges
        .into_iter()
        .map(|(a, b)| (a, b, rng.gen_range(cap_lo..=cap_hi), rng.gen_range(d_lo..=d_hi)))
        .collect();
    Topology::from_edges(nodes, &tuples)
}
