//! Source-routing comparator: every router keeps a link-state database of the
//! whole network, refreshed by network-wide floods on every residual change,
//! and sources compute feasible routes with Dijkstra over it.
//!
//! The recomputation counter (SPF runs and edges relaxed) stands in for the
//! routing-table maintenance cost a link-state router pays per advertisement.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::model::{
    extend_path, AdvertisedLink, LinkId, LinkMetrics, LinkStateAdvert, Message, PathRecord,
    QosRequest, RouterId,
};

/// One router's copy of the network-wide link state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkStateDb {
    links: BTreeMap<LinkId, AdvertisedLink>,
    versions: BTreeMap<RouterId, u64>,
}

impl LinkStateDb {
    pub fn new() -> Self {
        Self::default()
    }

    /// Database preloaded with `links`, as if boot flooding had converged.
    pub fn from_links(links: impl IntoIterator<Item = AdvertisedLink>) -> Self {
        Self {
            links: links.into_iter().map(|l| (l.link, l)).collect(),
            versions: BTreeMap::new(),
        }
    }

    pub fn link(&self, id: LinkId) -> Option<&AdvertisedLink> {
        self.links.get(&id)
    }

    pub fn links(&self) -> impl Iterator<Item = &AdvertisedLink> {
        self.links.values()
    }

    pub fn version(&self, origin: RouterId) -> Option<u64> {
        self.versions.get(&origin).copied()
    }

    /// Installs `lsa` if it is newer than what is held for its origin.
    /// Returns false for duplicates and stale copies.
    pub fn apply(&mut self, lsa: &LinkStateAdvert) -> bool {
        if self.versions.get(&lsa.origin).is_some_and(|&v| v >= lsa.seq) {
            return false;
        }
        self.versions.insert(lsa.origin, lsa.seq);
        for l in &lsa.links {
            self.links.insert(l.link, *l);
        }
        true
    }

    fn adjacency(&self, min_residual: u64) -> BTreeMap<RouterId, Vec<(RouterId, LinkMetrics)>> {
        let mut adj: BTreeMap<RouterId, Vec<(RouterId, LinkMetrics)>> = BTreeMap::new();
        for l in self.links.values() {
            if l.metrics.residual_kbps() < min_residual {
                continue;
            }
            adj.entry(l.a).or_default().push((l.b, l.metrics));
            adj.entry(l.b).or_default().push((l.a, l.metrics));
        }
        for v in adj.values_mut() {
            v.sort_by_key(|(n, _)| *n);
        }
        adj
    }
}

struct SpfResult {
    dist: BTreeMap<RouterId, u64>,
    pred: BTreeMap<RouterId, (RouterId, LinkMetrics)>,
    relaxed: u64,
}

fn spf(adj: &BTreeMap<RouterId, Vec<(RouterId, LinkMetrics)>>, root: RouterId) -> SpfResult {
    let mut dist = BTreeMap::from([(root, 0u64)]);
    let mut pred: BTreeMap<RouterId, (RouterId, LinkMetrics)> = BTreeMap::new();
    let mut heap = BinaryHeap::from([Reverse((0u64, root))]);
    let mut relaxed = 0;
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist.get(&u).is_some_and(|&best| d > best) {
            continue;
        }
        for &(v, m) in adj.get(&u).map(Vec::as_slice).unwrap_or_default() {
            relaxed += 1;
            let nd = d + m.delay_ms;
            let better = match dist.get(&v) {
                None => true,
                Some(&cur) => nd < cur || (nd == cur && pred.get(&v).is_some_and(|p| u < p.0)),
            };
            if better && v != root {
                dist.insert(v, nd);
                pred.insert(v, (u, m));
                heap.push(Reverse((nd, v)));
            }
        }
    }
    SpfResult { dist, pred, relaxed }
}

/// Minimum-delay route over links with enough residual bandwidth. Returns
/// `None` when unreachable or when the best delay still exceeds the bound.
pub fn dijkstra_feasible(
    db: &LinkStateDb,
    src: RouterId,
    dst: RouterId,
    qos: &QosRequest,
) -> Option<PathRecord> {
    if src == dst {
        return Some(PathRecord::origin(src));
    }
    let adj = db.adjacency(qos.bandwidth_kbps());
    let result = spf(&adj, src);
    let total = *result.dist.get(&dst)?;
    if !qos.delay_fits(total) {
        return None;
    }
    let mut chain = vec![];
    let mut at = dst;
    while at != src {
        let (prev, m) = result.pred[&at];
        chain.push((at, m));
        at = prev;
    }
    let mut path = PathRecord::origin(src);
    for (hop, m) in chain.into_iter().rev() {
        path = extend_path(&path, &m, hop).expect("shortest path tree is acyclic");
    }
    Some(path)
}

/// Full routing-table recomputation at `root`; returns the number of edges
/// relaxed.
pub fn recompute_cost(db: &LinkStateDb, root: RouterId) -> u64 {
    spf(&db.adjacency(0), root).relaxed
}

/// Handles an advertisement arriving from a neighbor. A new advertisement is
/// installed and re-flooded once to every neighbor; duplicates are dropped.
pub fn handle_advert(
    db: &mut LinkStateDb,
    neighbors: &[RouterId],
    lsa: &LinkStateAdvert,
) -> Option<Vec<(RouterId, Message)>> {
    if !db.apply(lsa) {
        return None;
    }
    Some(
        neighbors
            .iter()
            .map(|&n| (n, Message::LinkState(lsa.clone())))
            .collect(),
    )
}

/// Originates a fresh advertisement for `origin`'s attached links and floods
/// it to every neighbor.
pub fn ls_flood(
    db: &mut LinkStateDb,
    origin: RouterId,
    neighbors: &[RouterId],
    changed: Vec<AdvertisedLink>,
) -> Vec<(RouterId, Message)> {
    let seq = db.version(origin).map_or(1, |v| v + 1);
    let lsa = LinkStateAdvert {
        origin,
        seq,
        links: changed,
    };
    db.apply(&lsa);
    neighbors
        .iter()
        .map(|&n| (n, Message::LinkState(lsa.clone())))
        .collect()
}
