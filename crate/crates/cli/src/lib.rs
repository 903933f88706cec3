//! Subcommand implementations behind the `qosip` binary.
//!
//! Exit codes: 0 on success, 2 for configuration or input errors, 3 when the
//! simulator detects a broken invariant.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use qosip_core::metrics::{self, blocking_rate, Counters, MetricsError};
use qosip_core::protocol::{Discovery, ProtocolConfig};
use qosip_core::simcore::{
    generate, GenParams, Scenario, ScenarioError, SimConfig, SimError, SimOutcome, Simulator,
    Topology, TopologyError,
};
use qosip_core::tables::ClassPolicy;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Topology {
        path: PathBuf,
        source: TopologyError,
    },
    #[error("{path}: {source}")]
    Scenario {
        path: PathBuf,
        source: ScenarioError,
    },
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("compare needs a baseline; pass --baseline source-routing")]
    NoBaseline,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("simulation aborted: {0}")]
    Invariant(SimError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invariant(_) => EXIT_INVARIANT,
            _ => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Baseline {
    #[default]
    None,
    SourceRouting,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::None => "none",
            Baseline::SourceRouting => "source-routing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub topology_path: PathBuf,
    pub scenario_path: PathBuf,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub class_width_kbps: u64,
    pub suppress_duplicates: bool,
    pub probe_timeout_ms: u64,
    pub collect_window_ms: u64,
    pub max_time_s: u64,
    pub baseline: Baseline,
}

impl RunConfig {
    pub fn new(topology: impl Into<PathBuf>, scenario: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        let proto = ProtocolConfig::default();
        Self {
            topology_path: topology.into(),
            scenario_path: scenario.into(),
            seed: 0,
            out_dir: out_dir.into(),
            class_width_kbps: proto.policy.class_width_kbps(),
            suppress_duplicates: proto.suppress_duplicates,
            probe_timeout_ms: proto.probe_timeout_ms,
            collect_window_ms: proto.collect_window_ms,
            max_time_s: SimConfig::default().max_time_s,
            baseline: Baseline::None,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [
            ("--class-width", self.class_width_kbps),
            ("--probe-timeout-ms", self.probe_timeout_ms),
            ("--collect-window-ms", self.collect_window_ms),
            ("--max-time-s", self.max_time_s),
        ] {
            if v == 0 {
                return Err(CliError::InvalidOption(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn sim_config(&self, discovery: Discovery) -> Result<SimConfig, CliError> {
        self.validate()?;
        let policy = ClassPolicy::new(self.class_width_kbps)
            .map_err(|e| CliError::InvalidOption(e.to_string()))?;
        Ok(SimConfig {
            protocol: ProtocolConfig {
                policy,
                suppress_duplicates: self.suppress_duplicates,
                probe_timeout_ms: self.probe_timeout_ms,
                collect_window_ms: self.collect_window_ms,
                discovery,
                ..ProtocolConfig::default()
            },
            max_time_s: self.max_time_s,
        })
    }

    /// `key=value` lines echoing every effective setting.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let on_off = |b: bool| if b { "on" } else { "off" };
        writeln!(out, "topology={}", self.topology_path.display()).unwrap();
        writeln!(out, "scenario={}", self.scenario_path.display()).unwrap();
        writeln!(out, "seed={}", self.seed).unwrap();
        writeln!(out, "class_width_kbps={}", self.class_width_kbps).unwrap();
        writeln!(out, "suppress_duplicates={}", on_off(self.suppress_duplicates)).unwrap();
        writeln!(out, "probe_timeout_ms={}", self.probe_timeout_ms).unwrap();
        writeln!(out, "collect_window_ms={}", self.collect_window_ms).unwrap();
        writeln!(out, "max_time_s={}", self.max_time_s).unwrap();
        writeln!(out, "baseline={}", self.baseline.name()).unwrap();
        out
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads and validates both input files.
pub fn load_inputs(config: &RunConfig) -> Result<(Topology, Scenario), CliError> {
    let topology = Topology::parse(&read(&config.topology_path)?).map_err(|source| {
        CliError::Topology {
            path: config.topology_path.clone(),
            source,
        }
    })?;
    let scenario = Scenario::parse(&read(&config.scenario_path)?, &topology).map_err(|source| {
        CliError::Scenario {
            path: config.scenario_path.clone(),
            source,
        }
    })?;
    Ok((topology, scenario))
}

fn simulate(
    run: &RunConfig,
    topology: &Topology,
    scenario: &Scenario,
    config: SimConfig,
) -> Result<SimOutcome, CliError> {
    Simulator::new(topology.clone(), config)
        .run(scenario)
        .map_err(|e| match e {
            SimError::Scenario(source) => CliError::Scenario {
                path: run.scenario_path.clone(),
                source,
            },
            other => CliError::Invariant(other),
        })
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub trace_hash: String,
    pub outcome: SimOutcome,
}

/// Runs one simulation and writes the CSV set plus `run_config.txt`.
pub fn cmd_run(config: &RunConfig) -> Result<RunReport, CliError> {
    let discovery = match config.baseline {
        Baseline::None => Discovery::Qosip,
        Baseline::SourceRouting => Discovery::SourceRouting,
    };
    let sim = config.sim_config(discovery)?;
    let (topology, scenario) = load_inputs(config)?;
    let outcome = simulate(config, &topology, &scenario, sim)?;
    metrics::export_csv(&outcome.counters, &outcome.series, &config.out_dir)?;
    write_run_config(config)?;
    Ok(RunReport {
        trace_hash: outcome.trace_hash(),
        outcome,
    })
}

fn write_run_config(config: &RunConfig) -> Result<(), CliError> {
    let path = config.out_dir.join("run_config.txt");
    fs::write(&path, config.render()).map_err(|source| CliError::Io { path, source })
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub qosip: Counters,
    pub source_routing: Counters,
}

/// Runs the scenario under both discovery schemes and writes `compare.csv`.
pub fn cmd_compare(config: &RunConfig) -> Result<CompareReport, CliError> {
    if config.baseline == Baseline::None {
        return Err(CliError::NoBaseline);
    }
    let q_cfg = config.sim_config(Discovery::Qosip)?;
    let sr_cfg = config.sim_config(Discovery::SourceRouting)?;
    let (topology, scenario) = load_inputs(config)?;
    let qosip = simulate(config, &topology, &scenario, q_cfg)?.counters;
    let source_routing = simulate(config, &topology, &scenario, sr_cfg)?.counters;
    metrics::export_compare(&qosip, &source_routing, &config.out_dir)?;
    write_run_config(config)?;
    Ok(CompareReport {
        qosip,
        source_routing,
    })
}

/// Generates a topology file; writes it to `out` when given and returns the
/// text either way.
pub fn cmd_gen(params: &GenParams, out: Option<&Path>) -> Result<String, CliError> {
    let topology = generate(params).map_err(|e| CliError::InvalidOption(e.to_string()))?;
    let text = topology.to_file_string();
    if let Some(path) = out {
        fs::write(path, &text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    Ok(text)
}

/// One-line human summary of a finished run.
pub fn summarize(counters: &Counters) -> String {
    let total = counters.connections.len();
    let rate = blocking_rate(counters)
        .map(|r| format!("{r:.3}"))
        .unwrap_or_else(|_| "n/a".into());
    format!(
        "connections={total} accepted={} blocked={} failed={} blocking_rate={rate}",
        counters.outcome_count(metrics::Outcome::Accepted),
        counters.outcome_count(metrics::Outcome::Blocked),
        counters.outcome_count(metrics::Outcome::Failed),
    )
}
