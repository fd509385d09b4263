//! Pipeline driver behind the `synth` binary: target/topology resolution,
//! the synthesize -> resynthesize -> reduce pipeline, JSON reporting, and
//! verification of emitted QASM.

use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

use leap_core::benchmarks::{self, BenchmarkSpec};
use leap_core::circuit::{parse_qasm, to_qasm};
use leap_core::matrix::{distance, read_unitary_file};
use leap_core::optimize::RunRecord;
use leap_core::postprocess::{
    reduce_dimensionality, resynthesize, seam_boundaries, ResynthConfig,
};
use leap_core::search::{leap_synthesize_traced, LeapConfig, SearchEvent};
use leap_core::{
    CouplingGraph, EntanglerSet, Error, MultistartConfig, PlacedCircuit, Result, SearchMode,
    UnitaryMatrix,
};

/// Everything one synthesis run needs; echoed verbatim into the report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    /// Benchmark name (e.g. "toffoli", "qft3", "tfim3") or a unitary
    /// JSON file path.
    pub target: String,
    /// "linear", "all", or a topology JSON file path.
    pub topology: String,
    /// Comma-separated entangler kinds, e.g. "cnot" or "cnot,iswap".
    pub gateset: String,
    pub epsilon: f64,
    pub delta: Option<usize>,
    pub mode: SearchMode,
    pub heuristic_weight: f64,
    /// Multistart starting points for the expensive optimizer tier.
    pub num_starts: usize,
    pub resynth: bool,
    /// Re-synthesis window in entanglers; None picks 7 (<=4 qubits) or 5.
    pub window: Option<usize>,
    pub reduce: bool,
    pub seed: u64,
    pub workers: usize,
    pub verbose: bool,
    /// TFIM benchmark parameters.
    pub tfim_j: f64,
    pub tfim_h: f64,
    pub tfim_t: f64,
    pub tfim_steps: Option<usize>,
    #[serde(skip)]
    pub qasm_out: Option<PathBuf>,
    #[serde(skip)]
    pub report_out: Option<PathBuf>,
    #[serde(skip)]
    pub circuit_out: Option<PathBuf>,
    #[serde(skip)]
    pub trace_out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            target: String::new(),
            topology: "linear".into(),
            gateset: "cnot".into(),
            epsilon: 1e-10,
            delta: None,
            mode: SearchMode::Leap,
            heuristic_weight: 10.0,
            num_starts: 12,
            resynth: true,
            window: None,
            reduce: true,
            seed: 1,
            workers: 1,
            verbose: false,
            tfim_j: 1.0,
            tfim_h: 1.0,
            tfim_t: 1.0,
            tfim_steps: None,
            qasm_out: None,
            report_out: None,
            circuit_out: None,
            trace_out: None,
        }
    }
}

/// The machine-readable run report (see docs/report-schema.json).
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub target: String,
    pub cnot_count: usize,
    pub u3_count: usize,
    pub depth: usize,
    pub parallelism: f64,
    pub distance: f64,
    pub wall_time_s: f64,
    pub nodes_evaluated: u64,
    pub nodes_expanded: u64,
    pub prefix_boundaries: Vec<usize>,
    /// Circuit stage (0 = initial layer, k = after the k-th entangler) of
    /// each deleted U3, in deletion order.
    pub deleted_u3_positions: Vec<usize>,
    pub seed: u64,
    /// Whether the final circuit is within epsilon of the target.
    pub succeeded: bool,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multistart_runs: Option<Vec<RunRecord>>,
}

/// Outcome of `run`: report plus the final circuit, with the process
/// exit status (0 success, 2 depth-limit failure).
pub struct RunOutcome {
    pub report: Report,
    pub circuit: PlacedCircuit,
    pub exit_code: i32,
}

pub fn resolve_target(cfg: &RunConfig) -> Result<UnitaryMatrix> {
    let path = Path::new(&cfg.target);
    if path.exists() && path.is_file() {
        return read_unitary_file(path);
    }
    if cfg.target.ends_with(".json") {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("target file '{}' not found", cfg.target),
        )));
    }
    let mut spec = BenchmarkSpec::parse(&cfg.target)?;
    if spec.name == "tfim" {
        spec = spec
            .with_parameter("j", cfg.tfim_j)
            .with_parameter("h", cfg.tfim_h)
            .with_parameter("t", cfg.tfim_t);
        if let Some(steps) = cfg.tfim_steps {
            spec = spec.with_parameter("steps", steps as f64);
        }
    }
    benchmarks::generate(&spec)
}

pub fn resolve_topology(topology: &str, num_qubits: usize) -> Result<CouplingGraph> {
    let graph = match topology {
        "linear" => CouplingGraph::linear(num_qubits)?,
        "all" => CouplingGraph::all_to_all(num_qubits)?,
        path => CouplingGraph::from_file(Path::new(path))?,
    };
    if graph.num_qubits() != num_qubits {
        return Err(Error::Validation(format!(
            "topology has {} qubits but the target needs {}",
            graph.num_qubits(),
            num_qubits
        )));
    }
    Ok(graph)
}

fn leap_config(cfg: &RunConfig) -> LeapConfig {
    LeapConfig {
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        heuristic_weight: cfg.heuristic_weight,
        mode: cfg.mode,
        rng_seed: cfg.seed,
        ..LeapConfig::default()
    }
}

/// Execute the full pipeline. Best-effort outputs are written even on a
/// depth-limit failure (exit code 2).
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let started = std::time::Instant::now();
    let target = resolve_target(cfg)?;
    let graph = resolve_topology(&cfg.topology, target.num_qubits())?;
    let entanglers = EntanglerSet::parse(&cfg.gateset)?;
    let search_cfg = leap_config(cfg);
    let multistart = MultistartConfig {
        rng_seed: cfg.seed,
        ..MultistartConfig::with_starts(cfg.num_starts)
    };

    let mut trace_file = match &cfg.trace_out {
        Some(path) => Some(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => None,
    };
    let mut sink = |event: &SearchEvent| {
        if let Some(f) = trace_file.as_mut() {
            let line = serde_json::to_string(event).expect("events serialize");
            let _ = writeln!(f, "{line}");
        }
    };

    let search_result =
        leap_synthesize_traced(&target, &graph, &entanglers, &search_cfg, &mut sink);
    drop(sink);
    if let Some(f) = trace_file.as_mut() {
        let _ = f.flush();
    }

    let (mut circuit, prefix_boundaries, nodes_evaluated, nodes_expanded, solved) =
        match search_result {
            Ok(report) => (
                report.circuit.clone(),
                report.prefix_boundaries.clone(),
                report.nodes_evaluated,
                report.nodes_expanded,
                true,
            ),
            Err(Error::DepthLimit { report, .. }) => (
                report.circuit.clone(),
                report.prefix_boundaries.clone(),
                report.nodes_evaluated,
                report.nodes_expanded,
                false,
            ),
            Err(e) => return Err(e),
        };

    let mut deleted_positions = Vec::new();
    let mut multistart_runs = Vec::new();
    if solved {
        if cfg.resynth {
            let mut rcfg = ResynthConfig::for_qubits(target.num_qubits());
            if let Some(w) = cfg.window {
                rcfg.window_cnots = w;
            }
            let seams =
                seam_boundaries(&prefix_boundaries, circuit.structure.cnot_count());
            circuit = resynthesize(
                &circuit,
                &seams,
                &target,
                &graph,
                &entanglers,
                &rcfg,
                &search_cfg,
                &multistart,
                cfg.epsilon,
            )?;
        }
        if cfg.reduce {
            let reduction = reduce_dimensionality(&circuit, &target, cfg.epsilon, &multistart)?;
            deleted_positions = reduction.deleted.iter().map(|d| d.stage).collect();
            multistart_runs = reduction.multistart_runs;
            circuit = reduction.circuit;
        }
    }

    let succeeded = circuit.achieved_distance <= cfg.epsilon;
    let report = Report {
        target: cfg.target.clone(),
        cnot_count: circuit.structure.cnot_count(),
        u3_count: circuit.structure.u3_count(),
        depth: circuit.structure.critical_path_depth(),
        parallelism: circuit.structure.parallelism(),
        distance: circuit.achieved_distance,
        wall_time_s: started.elapsed().as_secs_f64(),
        nodes_evaluated,
        nodes_expanded,
        prefix_boundaries,
        deleted_u3_positions: deleted_positions,
        seed: cfg.seed,
        succeeded,
        config: cfg.clone(),
        multistart_runs: if cfg.verbose {
            Some(multistart_runs)
        } else {
            None
        },
    };

    if let Some(path) = &cfg.qasm_out {
        std::fs::write(path, to_qasm(&circuit))?;
    }
    if let Some(path) = &cfg.report_out {
        std::fs::write(path, serde_json::to_string_pretty(&report).expect("report serializes"))?;
    }
    if let Some(path) = &cfg.circuit_out {
        std::fs::write(path, circuit.to_json())?;
    }

    Ok(RunOutcome {
        exit_code: if succeeded { 0 } else { 2 },
        report,
        circuit,
    })
}

/// Re-parse emitted QASM, re-instantiate it, and compare against the
/// target. Returns the recomputed distance and whether it meets epsilon.
pub fn verify(qasm_path: &Path, cfg: &RunConfig) -> Result<(f64, bool)> {
    let text = std::fs::read_to_string(qasm_path)?;
    let (structure, params) = parse_qasm(&text)?;
    let target = resolve_target(cfg)?;
    let built = leap_core::circuit::instantiate(&structure, &params)?;
    let d = distance(&target, &built)?;
    Ok((d, d <= cfg.epsilon))
}
