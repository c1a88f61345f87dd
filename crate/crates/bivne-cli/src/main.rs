//! Command-line front end for the embedding experiments.
//!
//! Verbs: `run` a configured sweep, `validate` a solution dump against a
//! topology and request batch, `topo gen` a random substrate document, and
//! `plotdata` to turn report JSON into per-metric plot series.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 constraint
//! violation, 3 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bivne::harness::validate::{validate, SolutionDump};
use bivne::harness::{
    self, export, load_config, plotdata, run_experiment, Algorithm, ExperimentReport, ExportFormat,
    HarnessError,
};
use bivne::substrate::{load_topology, RandomTopologyParams, SubstrateNetwork};
use bivne::vnr::load_batch;

#[derive(Parser)]
#[command(name = "bivne", version, about = "Virtual network embedding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment sweep and write the report.
    Run(RunArgs),
    /// Check a solution dump against the full constraint set.
    Validate(ValidateArgs),
    /// Topology utilities.
    #[command(subcommand)]
    Topo(TopoCommand),
    /// Merge report files into per-metric csv series.
    Plotdata(PlotdataArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (json).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's algorithm.
    #[arg(long)]
    algorithm: Option<Algorithm>,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory for the report file.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Report format: csv or json.
    #[arg(long, default_value = "csv")]
    format: ExportFormat,
}

#[derive(Args)]
struct ValidateArgs {
    /// Topology document (json).
    #[arg(long)]
    topology: PathBuf,
    /// Request batch (json).
    #[arg(long)]
    vnrs: PathBuf,
    /// Solution dump (json).
    #[arg(long)]
    solution: PathBuf,
}

#[derive(Subcommand)]
enum TopoCommand {
    /// Draw a random connected topology and write it as json.
    Gen(TopoGenArgs),
}

#[derive(Args)]
struct TopoGenArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long)]
    links: usize,
    #[arg(long)]
    seed: u64,
    /// Computing capacity range, e.g. 50:100.
    #[arg(long, value_parser = parse_range, default_value = "50:100")]
    comp: (u32, u32),
    /// Channel capacity range.
    #[arg(long, value_parser = parse_range, default_value = "50:100")]
    chan: (u32, u32),
    /// Frequency-slot count range.
    #[arg(long, value_parser = parse_range, default_value = "100:100")]
    slots: (u32, u32),
    /// Side length of the coordinate square.
    #[arg(long, default_value_t = 1000.0)]
    side: f64,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotdataArgs {
    /// Report json files (repeatable).
    #[arg(long = "report", required = true)]
    reports: Vec<PathBuf>,
    /// Output directory for the series files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let lo = lo.trim().parse::<u32>().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi = hi.trim().parse::<u32>().map_err(|e| format!("bad upper bound: {e}"))?;
    if lo > hi {
        return Err(format!("range {lo}:{hi} is reversed"));
    }
    Ok((lo, hi))
}

fn io_err(path: &Path, source: std::io::Error) -> HarnessError {
    HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn cmd_run(args: RunArgs) -> Result<(), HarnessError> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(algorithm) = args.algorithm {
        config.algorithm = algorithm;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
        config.validate()?;
    }
    let report = run_experiment(&config)?;
    let path = export(&report, args.format, &args.out)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Returns true when the dump is sound; prints one line per violation.
fn cmd_validate(args: ValidateArgs) -> Result<bool, HarnessError> {
    let net = load_topology(&args.topology)?;
    let vnrs = load_batch(&args.vnrs)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", args.vnrs.display())))?;
    let text = std::fs::read_to_string(&args.solution).map_err(|e| io_err(&args.solution, e))?;
    let dump: SolutionDump = serde_json::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", args.solution.display())))?;
    let vnr = vnrs
        .iter()
        .find(|v| v.id == dump.vnr_id)
        .ok_or_else(|| {
            HarnessError::Config(format!("request {} not present in the batch", dump.vnr_id))
        })?;
    let violations = validate(&net, vnr, &dump);
    if violations.is_empty() {
        println!("ok: request {} satisfies all constraints", vnr.id);
        return Ok(true);
    }
    for v in &violations {
        println!("{v}");
    }
    Ok(false)
}

fn cmd_topo_gen(args: TopoGenArgs) -> Result<(), HarnessError> {
    let params = RandomTopologyParams {
        nodes: args.nodes,
        links: args.links,
        comp_cap: args.comp,
        chan_cap: args.chan,
        slots: args.slots,
        side: args.side,
    };
    let mut rng = harness::trial_rng(args.seed, 0, 0);
    let net = SubstrateNetwork::generate_random(&params, &mut rng)?;
    let body = serde_json::to_string_pretty(&net.to_doc()).expect("topology serializes");
    std::fs::write(&args.out, body).map_err(|e| io_err(&args.out, e))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_plotdata(args: PlotdataArgs) -> Result<(), HarnessError> {
    let mut reports: Vec<ExperimentReport> = Vec::with_capacity(args.reports.len());
    for path in &args.reports {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let report = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        reports.push(report);
    }
    for (name, body) in plotdata(&reports) {
        let path = args.out.join(name);
        std::fs::write(&path, body).map_err(|e| io_err(&path, e))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    // Clap's own exit code for usage errors collides with the validator's;
    // fold usage problems into the configuration-error code instead.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args).map(|()| ExitCode::SUCCESS),
        Command::Validate(args) => cmd_validate(args).map(|sound| {
            if sound {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }),
        Command::Topo(TopoCommand::Gen(args)) => cmd_topo_gen(args).map(|()| ExitCode::SUCCESS),
        Command::Plotdata(args) => cmd_plotdata(args).map(|()| ExitCode::SUCCESS),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(e.exit_code() as u8)
    })
}
