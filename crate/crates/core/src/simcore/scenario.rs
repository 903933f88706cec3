//! Connection scenarios. One directive per line:
//!
//! ```text
//! conn <id> <src> <dst> <bw_kbps> <max_delay_ms|-> <start_s> <duration_s> <cbr_kbps> <pkt_bytes>
//! ```
//!
//! `-` leaves the delay unbounded.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{ConnectionId, QosRequest, RouterId};
use crate::simcore::topology::Topology;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown router {router}")]
    UnknownRouter { line: usize, router: RouterId },
    #[error("line {line}: connection id {conn} used twice")]
    DuplicateConnection { line: usize, conn: ConnectionId },
    #[error("connection {conn}: {message}")]
    Invalid { conn: ConnectionId, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConnectionSpec {
    pub conn: ConnectionId,
    pub src: RouterId,
    pub dst: RouterId,
    pub qos: QosRequest,
    pub start_s: u64,
    pub duration_s: u64,
    pub cbr_kbps: u64,
    pub pkt_bytes: u64,
}

impl ConnectionSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |message: &str| ScenarioError::Invalid {
            conn: self.conn,
            message: message.into(),
        };
        if self.duration_s == 0 {
            return Err(invalid("duration must be positive"));
        }
        if self.cbr_kbps == 0 {
            return Err(invalid("CBR rate must be positive"));
        }
        if self.pkt_bytes == 0 {
            return Err(invalid("packet size must be positive"));
        }
        if self.cbr_kbps > self.qos.bandwidth_kbps() {
            return Err(invalid("CBR rate exceeds the reserved bandwidth"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    pub connections: Vec<ConnectionSpec>,
}

impl Scenario {
    pub fn new(connections: Vec<ConnectionSpec>) -> Self {
        Self { connections }
    }

    /// Parses and checks every connection against `topology`.
    pub fn parse(text: &str, topology: &Topology) -> Result<Self, ScenarioError> {
        let mut connections = vec![];
        let mut ids = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let f: Vec<&str> = content.split_whitespace().collect();
            let err = |message: String| ScenarioError::Parse { line, message };
            if f[0] != "conn" {
                return Err(err(format!("unknown directive `{}`", f[0])));
            }
            if f.len() != 10 {
                return Err(err(
                    "expected `conn <id> <src> <dst> <bw_kbps> <max_delay_ms|-> <start_s> <duration_s> <cbr_kbps> <pkt_bytes>`"
                        .into(),
                ));
            }
            let num = |s: &str, what: &str| -> Result<u64, ScenarioError> {
                s.parse::<u64>()
                    .map_err(|_| err(format!("{what} must be a non-negative integer, got `{s}`")))
            };
            let conn = ConnectionId(num(f[1], "connection id")? as u32);
            let src = RouterId(num(f[2], "source")? as u32);
            let dst = RouterId(num(f[3], "destination")? as u32);
            let bw = num(f[4], "bandwidth")?;
            let max_delay = match f[5] {
                "-" => None,
                s => Some(num(s, "delay bound")?),
            };
            let qos = QosRequest::new(bw, max_delay).map_err(|e| err(e.to_string()))?;
            for r in [src, dst] {
                if !topology.contains(r) {
                    return Err(ScenarioError::UnknownRouter { line, router: r });
                }
            }
            if !ids.insert(conn) {
                return Err(ScenarioError::DuplicateConnection { line, conn });
            }
            let spec = ConnectionSpec {
                conn,
                src,
                dst,
                qos,
                start_s: num(f[6], "start")?,
                duration_s: num(f[7], "duration")?,
                cbr_kbps: num(f[8], "CBR rate")?,
                pkt_bytes: num(f[9], "packet size")?,
            };
            spec.validate().map_err(|e| err(e.to_string()))?;
            connections.push(spec);
        }
        Ok(Self { connections })
    }

    /// Checks a programmatically built scenario.
    pub fn validate(&self, topology: &Topology) -> Result<(), ScenarioError> {
        let mut ids = BTreeSet::new();
        for (i, c) in self.connections.iter().enumerate() {
            for r in [c.src, c.dst] {
                if !topology.contains(r) {
                    return Err(ScenarioError::UnknownRouter { line: i + 1, router: r });
                }
            }
            if !ids.insert(c.conn) {
                return Err(ScenarioError::DuplicateConnection {
                    line: i + 1,
                    conn: c.conn,
                });
            }
            c.validate()?;
        }
        Ok(())
    }
}

/// Data and teardown timing of an accepted CBR flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CbrPlan {
    pub first_us: u64,
    /// Whole microseconds, rounded down.
    pub interval_us: u64,
    pub packets: u64,
    pub pkt_bytes: u64,
}

impl CbrPlan {
    pub fn packet_time_us(&self, index: u64) -> u64 {
        self.first_us + index * self.interval_us
    }

    /// The teardown follows one interval after the last packet.
    pub fn teardown_us(&self) -> u64 {
        self.packet_time_us(self.packets)
    }

    pub fn times(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.packets).map(|k| self.packet_time_us(k))
    }
}

/// Packets go out every `pkt_bytes·8 / cbr_kbps` from acceptance until the
/// connection's duration has elapsed.
pub fn cbr_schedule(spec: &ConnectionSpec, accept_us: u64) -> CbrPlan {
    let interval_us = (spec.pkt_bytes * 8000 / spec.cbr_kbps).max(1);
    let duration_us = spec.duration_s * 1_000_000;
    CbrPlan {
        first_us: accept_us,
        interval_us,
        packets: duration_us.div_ceil(interval_us),
        pkt_bytes: spec.pkt_bytes,
    }
}
