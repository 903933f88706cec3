//! Message/computation counters, per-second throughput, call outcomes and
//! their CSV export.
//!
//! All CSV output is UTF-8 with a header row and LF line endings, in a fixed
//! row order so that runs can be compared byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::model::{ConnectionId, Message, MessageKind, PathRecord, RouterId};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no connections were attempted")]
    NoConnections,
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Accepted,
    Blocked,
    Failed,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Accepted => "Accepted",
            Outcome::Blocked => "Blocked",
            Outcome::Failed => "Failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KindCount {
    pub count: u64,
    pub bytes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RouterCounters {
    pub events: u64,
    pub computations: u64,
    pub edges_relaxed: u64,
    pub floods_initiated: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionReport {
    pub conn: ConnectionId,
    pub src: RouterId,
    pub dst: RouterId,
    /// `None` while setup is still pending.
    pub outcome: Option<Outcome>,
    pub path: Option<PathRecord>,
    pub start_us: u64,
    pub accept_us: Option<u64>,
}

impl ConnectionReport {
    pub fn setup_ms(&self) -> Option<u64> {
        self.accept_us.map(|t| (t - self.start_us) / 1000)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Counters {
    pub messages: BTreeMap<MessageKind, KindCount>,
    /// Same tally restricted to messages sent after boot converged.
    pub messages_after_boot: BTreeMap<MessageKind, KindCount>,
    pub routers: BTreeMap<RouterId, RouterCounters>,
    pub data_offered_bytes: u64,
    pub data_dropped_packets: u64,
    pub data_dropped_bytes: u64,
    pub connections: BTreeMap<ConnectionId, ConnectionReport>,
}

impl Counters {
    pub fn record_send(&mut self, msg: &Message, after_boot: bool) {
        let bytes = msg.nominal_bytes();
        let bump = |map: &mut BTreeMap<MessageKind, KindCount>| {
            let c = map.entry(msg.kind()).or_default();
            c.count += 1;
            c.bytes += bytes;
        };
        bump(&mut self.messages);
        if after_boot {
            bump(&mut self.messages_after_boot);
        }
    }

    pub fn sent(&self, kind: MessageKind) -> u64 {
        self.messages.get(&kind).map_or(0, |c| c.count)
    }

    pub fn sent_after_boot(&self, kind: MessageKind) -> u64 {
        self.messages_after_boot.get(&kind).map_or(0, |c| c.count)
    }

    /// Table-maintenance messages sent after boot: triggered Updates plus
    /// link-state advertisements.
    pub fn advertisements_after_boot(&self) -> u64 {
        self.sent_after_boot(MessageKind::Update) + self.sent_after_boot(MessageKind::LinkState)
    }

    pub fn control_totals(&self) -> KindCount {
        self.messages
            .iter()
            .filter(|(k, _)| k.is_control())
            .fold(KindCount::default(), |acc, (_, c)| KindCount {
                count: acc.count + c.count,
                bytes: acc.bytes + c.bytes,
            })
    }

    pub fn router_mut(&mut self, r: RouterId) -> &mut RouterCounters {
        self.routers.entry(r).or_default()
    }

    pub fn outcome_count(&self, outcome: Outcome) -> usize {
        self.connections
            .values()
            .filter(|c| c.outcome == Some(outcome))
            .count()
    }

    pub fn total_computations(&self) -> u64 {
        self.routers.values().map(|r| r.computations).sum()
    }

    pub fn total_edges_relaxed(&self) -> u64 {
        self.routers.values().map(|r| r.edges_relaxed).sum()
    }
}

/// Bytes delivered per destination router in one-second buckets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ThroughputSeries {
    buckets: BTreeMap<RouterId, BTreeMap<u64, u64>>,
}

impl ThroughputSeries {
    pub fn record(&mut self, node: RouterId, time_us: u64, bytes: u64) {
        *self
            .buckets
            .entry(node)
            .or_default()
            .entry(time_us / 1_000_000)
            .or_default() += bytes;
    }

    /// `(bucket_start_s, bytes)` pairs for `node`, ascending.
    pub fn series(&self, node: RouterId) -> Vec<(u64, u64)> {
        self.buckets
            .get(&node)
            .map(|b| b.iter().map(|(&t, &v)| (t, v)).collect())
            .unwrap_or_default()
    }

    pub fn total(&self, node: RouterId) -> u64 {
        self.buckets.get(&node).map_or(0, |b| b.values().sum())
    }

    pub fn grand_total(&self) -> u64 {
        self.buckets.values().flat_map(|b| b.values()).sum()
    }

    /// Every `(time_s, node, bytes)` row sorted by time then node.
    pub fn rows(&self) -> Vec<(u64, RouterId, u64)> {
        let mut rows: Vec<_> = self
            .buckets
            .iter()
            .flat_map(|(&n, b)| b.iter().map(move |(&t, &v)| (t, n, v)))
            .collect();
        rows.sort();
        rows
    }
}

/// Share of attempted connections that were blocked or failed.
pub fn blocking_rate(counters: &Counters) -> Result<f64, MetricsError> {
    let attempted = counters.connections.len();
    if attempted == 0 {
        return Err(MetricsError::NoConnections);
    }
    let lost = counters.outcome_count(Outcome::Blocked) + counters.outcome_count(Outcome::Failed);
    Ok(lost as f64 / attempted as f64)
}

pub fn throughput_csv(series: &ThroughputSeries) -> String {
    let mut out = String::from("time_s,node,bytes\n");
    for (t, n, b) in series.rows() {
        writeln!(out, "{t},{n},{b}").unwrap();
    }
    out
}

pub fn messages_csv(counters: &Counters) -> String {
    let mut out = String::from("variant,count,bytes\n");
    for kind in MessageKind::ALL {
        if let Some(c) = counters.messages.get(&kind).filter(|c| c.count > 0) {
            writeln!(out, "{},{},{}", kind.name(), c.count, c.bytes).unwrap();
        }
    }
    out
}

pub fn connections_csv(counters: &Counters) -> String {
    let mut out = String::from("conn,src,dst,outcome,path,setup_ms\n");
    for c in counters.connections.values() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            c.conn,
            c.src,
            c.dst,
            c.outcome.map_or("Pending", Outcome::name),
            c.path.as_ref().map(PathRecord::render).unwrap_or_default(),
            c.setup_ms().map(|ms| ms.to_string()).unwrap_or_default(),
        )
        .unwrap();
    }
    out
}

pub fn routers_csv(counters: &Counters) -> String {
    let mut out = String::from("router,events,computations\n");
    for (r, c) in &counters.routers {
        writeln!(out, "{r},{},{}", c.events, c.computations).unwrap();
    }
    out
}

/// Side-by-side counters of a QoSIP run and a source-routing run of the same
/// scenario.
pub fn compare_csv(qosip: &Counters, source_routing: &Counters) -> String {
    let mut out = String::from("metric,qosip,source_routing\n");
    let mut row = |name: &str, a: String, b: String| {
        writeln!(out, "{name},{a},{b}").unwrap();
    };
    for kind in MessageKind::ALL {
        row(
            &format!("messages_{}", kind.name()),
            qosip.sent(kind).to_string(),
            source_routing.sent(kind).to_string(),
        );
    }
    let (qc, sc) = (qosip.control_totals(), source_routing.control_totals());
    row("control_messages", qc.count.to_string(), sc.count.to_string());
    row("control_bytes", qc.bytes.to_string(), sc.bytes.to_string());
    row(
        "advertisements_after_boot",
        qosip.advertisements_after_boot().to_string(),
        source_routing.advertisements_after_boot().to_string(),
    );
    row(
        "path_computations",
        qosip.total_computations().to_string(),
        source_routing.total_computations().to_string(),
    );
    row(
        "edges_relaxed",
        qosip.total_edges_relaxed().to_string(),
        source_routing.total_edges_relaxed().to_string(),
    );
    for outcome in [Outcome::Accepted, Outcome::Blocked, Outcome::Failed] {
        row(
            &outcome.name().to_lowercase(),
            qosip.outcome_count(outcome).to_string(),
            source_routing.outcome_count(outcome).to_string(),
        );
    }
    let rate = |c: &Counters| {
        blocking_rate(c)
            .map(|r| format!("{r:.6}"))
            .unwrap_or_else(|_| "NA".into())
    };
    row("blocking_rate", rate(qosip), rate(source_routing));
    out
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), MetricsError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| MetricsError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes `throughput.csv`, `messages.csv`, `connections.csv` and
/// `routers.csv` into `out_dir`, creating it if needed.
pub fn export_csv(
    counters: &Counters,
    series: &ThroughputSeries,
    out_dir: &Path,
) -> Result<(), MetricsError> {
    fs::create_dir_all(out_dir).map_err(|source| MetricsError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    write_file(out_dir, "throughput.csv", &throughput_csv(series))?;
    write_file(out_dir, "messages.csv", &messages_csv(counters))?;
    write_file(out_dir, "connections.csv", &connections_csv(counters))?;
    write_file(out_dir, "routers.csv", &routers_csv(counters))?;
    Ok(())
}

pub fn export_compare(
    qosip: &Counters,
    source_routing: &Counters,
    out_dir: &Path,
) -> Result<(), MetricsError> {
    fs::create_dir_all(out_dir).map_err(|source| MetricsError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    write_file(out_dir, "compare.csv", &compare_csv(qosip, source_routing))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_outcomes(outcomes: &[Option<Outcome>]) -> Counters {
        let mut c = Counters::default();
        for (i, o) in outcomes.iter().enumerate() {
            c.connections.insert(
                ConnectionId(i as u32),
                ConnectionReport {
                    conn: ConnectionId(i as u32),
                    src: RouterId(0),
                    dst: RouterId(1),
                    outcome: *o,
                    path: None,
                    start_us: 0,
                    accept_us: None,
                },
            );
        }
        c
    }

    #[test]
    fn blocking_rate_arithmetic() {
        let mut v = vec![Some(Outcome::Accepted); 9];
        v.push(Some(Outcome::Blocked));
        assert_eq!(blocking_rate(&with_outcomes(&v)).unwrap(), 0.1);
        assert_eq!(
            blocking_rate(&with_outcomes(&[Some(Outcome::Accepted); 3])).unwrap(),
            0.0
        );
        assert_eq!(
            blocking_rate(&with_outcomes(&[Some(Outcome::Accepted), Some(Outcome::Failed)]))
                .unwrap(),
            0.5
        );
        assert!(matches!(
            blocking_rate(&Counters::default()),
            Err(MetricsError::NoConnections)
        ));
    }

    #[test]
    fn empty_run_writes_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        export_csv(&Counters::default(), &ThroughputSeries::default(), dir.path()).unwrap();
        let read = |n: &str| fs::read_to_string(dir.path().join(n)).unwrap();
        assert_eq!(read("throughput.csv"), "time_s,node,bytes\n");
        assert_eq!(read("messages.csv"), "variant,count,bytes\n");
        assert_eq!(read("connections.csv"), "conn,src,dst,outcome,path,setup_ms\n");
        assert_eq!(read("routers.csv"), "router,events,computations\n");
    }

    #[test]
    fn throughput_rows_sorted_by_time_then_node() {
        let mut s = ThroughputSeries::default();
        s.record(RouterId(9), 1_500_000, 10);
        s.record(RouterId(3), 1_200_000, 5);
        s.record(RouterId(9), 200_000, 7);
        s.record(RouterId(3), 1_900_000, 5);
        assert_eq!(
            throughput_csv(&s),
            "time_s,node,bytes\n0,9,7\n1,3,10\n1,9,10\n"
        );
        assert_eq!(s.grand_total(), 27);
    }

    #[test]
    fn messages_tally() {
        let mut c = Counters::default();
        let hello = Message::Hello { from: RouterId(1) };
        c.record_send(&hello, false);
        c.record_send(&hello, true);
        assert_eq!(messages_csv(&c), "variant,count,bytes\nhello,2,32\n");
        assert_eq!(c.sent_after_boot(MessageKind::Hello), 1);
    }
}
