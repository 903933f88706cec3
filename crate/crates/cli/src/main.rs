use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qosip_cli::{cmd_compare, cmd_gen, cmd_run, summarize, Baseline, CliError, RunConfig};
use qosip_core::simcore::GenParams;

#[derive(Parser)]
#[command(name = "qosip", version, about = "QoS-aware path setup simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write CSV reports.
    Run(RunArgs),
    /// Run a scenario under QoSIP and the source-routing baseline.
    Compare(RunArgs),
    /// Generate a random connected topology.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    None,
    SourceRouting,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    class_width: u64,
    #[arg(long, value_enum, default_value = "on")]
    suppress_duplicates: Toggle,
    #[arg(long, default_value_t = 1000)]
    probe_timeout_ms: u64,
    #[arg(long, default_value_t = 100)]
    collect_window_ms: u64,
    #[arg(long, default_value_t = 600)]
    max_time_s: u64,
    #[arg(long, value_enum, default_value = "none")]
    baseline: BaselineArg,
}

impl RunArgs {
    fn into_config(self) -> RunConfig {
        RunConfig {
            topology_path: self.topology,
            scenario_path: self.scenario,
            seed: self.seed,
            out_dir: self.out,
            class_width_kbps: self.class_width,
            suppress_duplicates: matches!(self.suppress_duplicates, Toggle::On),
            probe_timeout_ms: self.probe_timeout_ms,
            collect_window_ms: self.collect_window_ms,
            max_time_s: self.max_time_s,
            baseline: match self.baseline {
                BaselineArg::None => Baseline::None,
                BaselineArg::SourceRouting => Baseline::SourceRouting,
            },
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, short = 'n', default_value_t = 8)]
    nodes: u32,
    #[arg(long, default_value_t = 3)]
    degree: u32,
    #[arg(long, default_value_t = 100)]
    capacity_min: u64,
    #[arg(long, default_value_t = 1000)]
    capacity_max: u64,
    #[arg(long, default_value_t = 1)]
    delay_min: u64,
    #[arg(long, default_value_t = 20)]
    delay_max: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(args) => {
            let config = args.into_config();
            let report = cmd_run(&config)?;
            println!("{}", summarize(&report.outcome.counters));
            println!("trace_hash={}", report.trace_hash);
        }
        Command::Compare(args) => {
            let config = args.into_config();
            let report = cmd_compare(&config)?;
            println!("qosip: {}", summarize(&report.qosip));
            println!("source-routing: {}", summarize(&report.source_routing));
            println!(
                "advertisements after boot: qosip={} source-routing={}",
                report.qosip.advertisements_after_boot(),
                report.source_routing.advertisements_after_boot()
            );
        }
        Command::Gen(args) => {
            let params = GenParams {
                nodes: args.nodes,
                degree: args.degree,
                capacity_kbps: (args.capacity_min, args.capacity_max),
                delay_ms: (args.delay_min, args.delay_max),
                seed: args.seed,
            };
            let text = cmd_gen(&params, args.out.as_deref())?;
            if args.out.is_none() {
                print!("{text}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
