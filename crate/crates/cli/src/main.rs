use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use leap_cli::{run, verify, RunConfig};
use leap_core::SearchMode;

/// Topology-aware synthesis of short-depth circuits from target unitaries.
#[derive(Parser)]
#[command(name = "synth", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Re-check an emitted QASM file against its target unitary.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Benchmark name (toffoli, fredkin, peres, or, cnot, qftN,
    /// identityN, tfimN) or a unitary JSON file.
    #[arg(long)]
    target: Option<String>,

    /// Qubit connectivity: "linear", "all", or a topology JSON file.
    #[arg(long, default_value = "linear")]
    topology: String,

    /// Comma-separated two-qubit gates: cnot, iswap, sqcnot, sqisw.
    #[arg(long, default_value = "cnot")]
    gateset: String,

    /// Convergence threshold on the distance to the target.
    #[arg(long, default_value_t = 1e-10)]
    epsilon: f64,

    /// Maximum entangler depth explored (default scales with qubits).
    #[arg(long)]
    delta: Option<usize>,

    /// Search mode: prefix-forming "leap" or pure best-first "qsearch".
    #[arg(long, default_value = "leap", value_parser = parse_mode)]
    mode: SearchMode,

    /// Weight of the distance score in the search priority.
    #[arg(long, default_value_t = 10.0)]
    heuristic_weight: f64,

    /// Starting points for the multistart optimizer tier.
    #[arg(long, default_value_t = 12)]
    num_starts: usize,

    /// Skip the re-synthesis pass.
    #[arg(long)]
    no_resynth: bool,

    /// Re-synthesis window in entanglers (default 7 up to 4 qubits, 5 beyond).
    #[arg(long)]
    window: Option<usize>,

    /// Skip the U3-deletion pass.
    #[arg(long)]
    no_reduce: bool,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Worker threads for candidate evaluation.
    #[arg(long, env = "SYNTH_WORKERS", default_value_t = 1)]
    workers: usize,

    /// Include the multistart run log in the report.
    #[arg(long)]
    verbose: bool,

    /// Write the final circuit as OpenQASM 2.0.
    #[arg(long)]
    qasm_out: Option<PathBuf>,

    /// Write the JSON run report.
    #[arg(long)]
    report_out: Option<PathBuf>,

    /// Write the final circuit as a JSON dump.
    #[arg(long)]
    circuit_out: Option<PathBuf>,

    /// Write a JSON-lines search event log.
    #[arg(long)]
    trace: Option<PathBuf>,

    /// TFIM coupling strength J.
    #[arg(long, default_value_t = 1.0)]
    tfim_j: f64,

    /// TFIM transverse field h.
    #[arg(long, default_value_t = 1.0)]
    tfim_h: f64,

    /// TFIM evolution time t.
    #[arg(long, default_value_t = 1.0)]
    tfim_t: f64,

    /// Trotter steps for the TFIM target (exact evolution when absent).
    #[arg(long)]
    tfim_steps: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// QASM file produced by this tool.
    #[arg(long)]
    qasm: PathBuf,

    /// The target the circuit was synthesized for (name or unitary file).
    #[arg(long)]
    target: String,

    #[arg(long, default_value_t = 1e-10)]
    epsilon: f64,

    #[arg(long, default_value_t = 1.0)]
    tfim_j: f64,
    #[arg(long, default_value_t = 1.0)]
    tfim_h: f64,
    #[arg(long, default_value_t = 1.0)]
    tfim_t: f64,
    #[arg(long)]
    tfim_steps: Option<usize>,
}

fn parse_mode(s: &str) -> Result<SearchMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "leap" => Ok(SearchMode::Leap),
        "qsearch" => Ok(SearchMode::QSearch),
        other => Err(format!("unknown mode '{other}' (expected leap or qsearch)")),
    }
}

fn init_workers(workers: usize) {
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build_global();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Some(Command::Verify(args)) => {
            let cfg = RunConfig {
                target: args.target,
                epsilon: args.epsilon,
                tfim_j: args.tfim_j,
                tfim_h: args.tfim_h,
                tfim_t: args.tfim_t,
                tfim_steps: args.tfim_steps,
                ..RunConfig::default()
            };
            match verify(&args.qasm, &cfg) {
                Ok((dist, ok)) => {
                    println!(
                        "distance {dist:.3e} {} epsilon {:.3e}",
                        if ok { "<=" } else { ">" },
                        cfg.epsilon
                    );
                    ExitCode::from(if ok { 0 } else { 1 })
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        None => {
            let args = cli.run;
            let Some(target) = args.target else {
                eprintln!("error: --target is required (or use the verify subcommand)");
                return ExitCode::from(1);
            };
            init_workers(args.workers);
            let cfg = RunConfig {
                target,
                topology: args.topology,
                gateset: args.gateset,
                epsilon: args.epsilon,
                delta: args.delta,
                mode: args.mode,
                heuristic_weight: args.heuristic_weight,
                num_starts: args.num_starts,
                resynth: !args.no_resynth,
                window: args.window,
                reduce: !args.no_reduce,
                seed: args.seed,
                workers: args.workers,
                verbose: args.verbose,
                tfim_j: args.tfim_j,
                tfim_h: args.tfim_h,
                tfim_t: args.tfim_t,
                tfim_steps: args.tfim_steps,
                qasm_out: args.qasm_out,
                report_out: args.report_out,
                circuit_out: args.circuit_out,
                trace_out: args.trace,
            };
            match run(&cfg) {
                Ok(outcome) => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&outcome.report)
                            .expect("report serializes")
                    );
                    if outcome.exit_code != 0 {
                        eprintln!(
                            "warning: depth limit reached; best-effort circuit written (distance {:.3e})",
                            outcome.report.distance
                        );
                    }
                    ExitCode::from(outcome.exit_code as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
