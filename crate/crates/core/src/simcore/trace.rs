//! Timestamped event log and its canonical text form / digest.

use std::fmt;

use sha2::{Digest, Sha256};

use crate::model::{ConnectionId, LinkId, Message, PathRecord, RouterId};
use crate::protocol::{BlockCause, Timer};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Send {
        from: RouterId,
        to: RouterId,
        link: LinkId,
        arrive_us: u64,
        msg: Message,
    },
    Reserve {
        router: RouterId,
        link: LinkId,
        conn: ConnectionId,
        kbps: u64,
        reserved_after: u64,
        capacity: u64,
    },
    Release {
        router: RouterId,
        link: LinkId,
        conn: ConnectionId,
        kbps: u64,
        reserved_after: u64,
    },
    Start {
        conn: ConnectionId,
        router: RouterId,
    },
    Accept {
        conn: ConnectionId,
        path: PathRecord,
    },
    Block {
        conn: ConnectionId,
        cause: BlockCause,
    },
    Deliver {
        router: RouterId,
        conn: ConnectionId,
        bytes: u64,
    },
    Drop {
        router: RouterId,
        conn: ConnectionId,
        bytes: u64,
    },
    Timer {
        router: RouterId,
        timer: Timer,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub time_us: u64,
    pub event: TraceEvent,
}

struct Path<'a>(&'a PathRecord);

impl fmt::Display for Path<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.render())?;
        write!(f, "/{}ms", self.0.total_delay_ms)?;
        match self.0.bottleneck_kbps {
            Some(b) => write!(f, "/{b}kbps"),
            None => write!(f, "/-"),
        }
    }
}

struct Msg<'a>(&'a Message);

impl fmt::Display for Msg<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Message::Hello { from } => write!(f, "hello {from}"),
            Message::Update { from, advertised } => {
                write!(f, "update {from}")?;
                for (n, m) in advertised {
                    write!(f, " {n}:{}/{}", m.delay_ms, m.residual_kbps())?;
                }
                Ok(())
            }
            Message::LinkState(lsa) => {
                write!(f, "linkstate {}#{}", lsa.origin, lsa.seq)?;
                for l in &lsa.links {
                    write!(f, " {}:{}", l.link, l.metrics.residual_kbps())?;
                }
                Ok(())
            }
            Message::Probe(p) => {
                write!(f, "probe c{} {}->{} {}", p.conn, p.source, p.destination, Path(&p.path))?;
                if p.route.is_some() {
                    write!(f, " routed")?;
                }
                Ok(())
            }
            Message::Ack { conn, path, .. } => write!(f, "ack c{conn} {}", Path(path)),
            Message::Nack { conn, phase, path } => {
                write!(f, "nack c{conn} {phase:?} {}", Path(path))
            }
            Message::Failure { conn, path } => write!(f, "failure c{conn} {}", Path(path)),
            Message::Teardown { conn } => write!(f, "teardown c{conn}"),
            Message::Data {
                conn,
                payload_bytes,
            } => write!(f, "data c{conn} {payload_bytes}B"),
        }
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>12} ", self.time_us)?;
        match &self.event {
            TraceEvent::Send {
                from,
                to,
                link,
                arrive_us,
                msg,
            } => write!(f, "send {from}->{to} {link} @{arrive_us} {}", Msg(msg)),
            TraceEvent::Reserve {
                router,
                link,
                conn,
                kbps,
                reserved_after,
                capacity,
            } => write!(
                f,
                "reserve r{router} {link} c{conn} +{kbps} = {reserved_after}/{capacity}"
            ),
            TraceEvent::Release {
                router,
                link,
                conn,
                kbps,
                reserved_after,
            } => write!(f, "release r{router} {link} c{conn} -{kbps} = {reserved_after}"),
            TraceEvent::Start { conn, router } => write!(f, "start c{conn} at r{router}"),
            TraceEvent::Accept { conn, path } => write!(f, "accept c{conn} {}", Path(path)),
            TraceEvent::Block { conn, cause } => write!(f, "block c{conn} {cause:?}"),
            TraceEvent::Deliver { router, conn, bytes } => {
                write!(f, "deliver r{router} c{conn} {bytes}B")
            }
            TraceEvent::Drop { router, conn, bytes } => write!(f, "drop r{router} c{conn} {bytes}B"),
            TraceEvent::Timer { router, timer } => write!(f, "timer r{router} {timer:?}"),
        }
    }
}

/// SHA-256 over the canonical text form, one record per line, as lowercase
/// hex.
pub fn trace_hash(trace: &[TraceRecord]) -> String {
    let mut hasher = Sha256::new();
    for record in trace {
        hasher.update(record.to_string().as_bytes());
        hasher.update(b"\n");
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
