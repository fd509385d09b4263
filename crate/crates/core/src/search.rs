//! Synthesis search core: best-first search over circuit structures
//! (qsearch mode) and prefix-forming search (leap mode).
//!
//! Nodes are expanded by appending one entangler layer per coupling edge
//! and gate kind; each candidate is instantiated by the cheap optimizer
//! tier (a warm start from the parent's parameters, with random restarts
//! only if the warm run makes no progress toward the target).
//!
//! In leap mode the search tracks the best score seen at each new depth
//! and fits a regression line through those points. A candidate that
//! beats the line's prediction — after enough evaluations have
//! accumulated — becomes a prefix: its structure is frozen as the root of
//! a fresh search with all parameters still free.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BinaryHeap;
use std::f64::consts::TAU;
use std::time::Instant;

use crate::circuit::{CircuitStructure, PlacedCircuit};
use crate::error::{Error, Result};
use crate::gates::EntanglerSet;
use crate::matrix::UnitaryMatrix;
use crate::optimize::{
    minimize_cost, multistart_cost, CircuitCost, LocalOptions, MultistartConfig, OptimizerResult,
};
use crate::topology::CouplingGraph;

/// Linear heuristic h(d) = d * a. The search feeds it the node's distance
/// score, so a estimates how many further entanglers a unit of distance
/// costs; the A* priority is h(score) + cnot_count.
pub fn heuristic(d: f64, a: f64) -> f64 {
    d * a
}

/// One evaluated candidate.
#[derive(Clone, Debug)]
pub struct SearchNode {
    pub structure: CircuitStructure,
    pub best_params: Vec<f64>,
    /// Achieved distance s_i.
    pub score: f64,
    /// CNOT count d_i.
    pub depth: usize,
    /// heuristic(score) + depth.
    pub priority: f64,
}

/// Best-score-at-new-depth points, the regression input.
#[derive(Clone, Debug, Default)]
pub struct ProgressHistory {
    points: Vec<(usize, f64)>,
}

impl ProgressHistory {
    pub fn points(&self) -> &[(usize, f64)] {
        &self.points
    }

    fn last_depth(&self) -> Option<usize> {
        self.points.last().map(|&(d, _)| d)
    }

    /// Append only when both monotonicity invariants hold: depths
    /// strictly increase and scores strictly decrease.
    fn push(&mut self, depth: usize, score: f64) -> bool {
        if let Some(&(last_d, last_s)) = self.points.last() {
            if depth <= last_d || score >= last_s {
                return false;
            }
        }
        self.points.push((depth, score));
        true
    }
}

/// Ordinary least squares over the history, evaluated at depth `d`.
/// Returns None until the history holds `min_points` entries.
pub fn predict_score(history: &ProgressHistory, min_points: usize, d: usize) -> Option<f64> {
    let pts = history.points();
    if pts.len() < min_points.max(2) {
        return None;
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|&(x, _)| x as f64).sum::<f64>() / n;
    let mean_y = pts.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in pts {
        let dx = x as f64 - mean_x;
        sxx += dx * dx;
        sxy += dx * (y - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(mean_y + slope * (d as f64 - mean_x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// Pure best-first search; prefixes never form.
    QSearch,
    /// Prefix-forming search.
    Leap,
}

/// How candidate structures are instantiated during search.
///
/// Prefix synthesis uses the cheap tier (one warm-started run, restarts
/// only on failure); re-synthesis switches to the slower multistart
/// solver, which is far more likely to find true minima.
#[derive(Clone, Debug, Serialize)]
pub enum InstantiationTier {
    Cheap,
    Multistart(MultistartConfig),
}

#[derive(Clone, Debug, Serialize)]
pub struct LeapConfig {
    /// Convergence threshold on the distance.
    pub epsilon: f64,
    /// Max CNOT depth explored; None picks 3*4^n/8 (rounded).
    pub delta: Option<usize>,
    /// Heuristic weight a.
    pub heuristic_weight: f64,
    /// History points required before predictions (and prefixes) start.
    pub min_history_points: usize,
    /// Node evaluations required in an inner search before a prefix may
    /// form (the work heuristic).
    pub min_nodes_since_prefix: usize,
    pub mode: SearchMode,
    pub rng_seed: u64,
    /// Random restarts per node when the warm start fails to progress.
    pub cheap_restarts: usize,
    pub tier: InstantiationTier,
}

impl Default for LeapConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-10,
            delta: None,
            heuristic_weight: 10.0,
            min_history_points: 5,
            min_nodes_since_prefix: 10,
            mode: SearchMode::Leap,
            rng_seed: 0,
            cheap_restarts: 4,
            tier: InstantiationTier::Cheap,
        }
    }
}

impl LeapConfig {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if self.delta == Some(0) {
            return Err(Error::Config("delta must be at least 1".into()));
        }
        if self.min_history_points < 2 {
            return Err(Error::Config("min_history_points must be at least 2".into()));
        }
        Ok(())
    }

    pub fn delta_for(&self, num_qubits: usize) -> usize {
        self.delta
            .unwrap_or(((3usize << (2 * num_qubits)) + 4) / 8)
    }
}

/// Search outcome: the solution circuit plus run statistics.
#[derive(Clone, Debug, Serialize)]
pub struct SynthesisReport {
    pub circuit: PlacedCircuit,
    /// CNOT depths at which prefixes were frozen.
    pub prefix_boundaries: Vec<usize>,
    pub nodes_expanded: u64,
    pub nodes_evaluated: u64,
    pub wall_time: f64,
}

/// Structured trace of search decisions, consumed by tests and --trace.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SearchEvent {
    NodeEvaluated { depth: usize, score: f64, priority: f64 },
    NodePushed { depth: usize, score: f64, priority: f64 },
    NodePopped { depth: usize, score: f64, priority: f64 },
    HistoryPoint { depth: usize, score: f64 },
    PrefixFormed { depth: usize, score: f64, nodes_evaluated: u64 },
    Solved { depth: usize, score: f64 },
}

pub type EventSink<'a> = &'a mut dyn FnMut(&SearchEvent);

/// Heap entry: min priority, then min score, then insertion order.
struct HeapEntry {
    priority: f64,
    score: f64,
    seq: u64,
    node: SearchNode,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // BinaryHeap is a max-heap; reverse for min-first ordering.
        other
            .priority
            .total_cmp(&self.priority)
            .then(other.score.total_cmp(&self.score))
            .then(other.seq.cmp(&self.seq))
    }
}

enum InnerResult {
    Solved(SearchNode),
    Prefix(SearchNode),
    Exhausted(SearchNode),
}

struct SearchCtx<'a> {
    target: &'a UnitaryMatrix,
    graph: &'a CouplingGraph,
    entanglers: &'a EntanglerSet,
    cfg: &'a LeapConfig,
    delta: usize,
    nodes_evaluated: u64,
    nodes_expanded: u64,
}

/// Cheap-tier node instantiation: one warm-start run, then up to
/// `restarts` random restarts taken only while the node has not improved
/// on its parent's score (optimizer failure) and has not reached tol.
fn instantiate_node(
    structure: &CircuitStructure,
    target: &UnitaryMatrix,
    warm: &[f64],
    parent_score: Option<f64>,
    tol: f64,
    restarts: usize,
    rng_seed: u64,
) -> Result<OptimizerResult> {
    let mut cost = CircuitCost::new(structure, target)?;
    let opts = LocalOptions::with_tol(tol);
    let mut best = minimize_cost(&mut cost, warm, &opts)?;
    let mut evaluations = best.evaluations;
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    for _ in 0..restarts {
        let progressed = parent_score.map_or(false, |p| best.value < p);
        if best.value < tol || progressed {
            break;
        }
        let x0: Vec<f64> = (0..warm.len()).map(|_| rng.gen_range(0.0..TAU)).collect();
        let run = minimize_cost(&mut cost, &x0, &opts)?;
        evaluations += run.evaluations;
        if run.value < best.value {
            best = run;
        }
    }
    best.evaluations = evaluations;
    Ok(best)
}

/// Derive the per-candidate RNG stream from the run seed and structure.
fn candidate_seed(rng_seed: u64, structure: &CircuitStructure) -> u64 {
    rng_seed
        .wrapping_mul(0x9e3779b97f4a7c15)
        .wrapping_add(structure.content_hash())
}

impl<'a> SearchCtx<'a> {
    fn evaluate(
        &self,
        structure: CircuitStructure,
        warm: &[f64],
        parent_score: Option<f64>,
    ) -> Result<SearchNode> {
        let seed = candidate_seed(self.cfg.rng_seed, &structure);
        let result = match &self.cfg.tier {
            InstantiationTier::Cheap => instantiate_node(
                &structure,
                self.target,
                warm,
                parent_score,
                self.cfg.epsilon,
                self.cfg.cheap_restarts,
                seed,
            )?,
            InstantiationTier::Multistart(ms) => {
                // Warm start still comes first; multistart takes over only
                // when it does not already reach tolerance.
                let mut cost = CircuitCost::new(&structure, self.target)?;
                let opts = LocalOptions::with_tol(self.cfg.epsilon);
                let mut best = minimize_cost(&mut cost, warm, &opts)?;
                let mut evaluations = best.evaluations;
                if best.value >= self.cfg.epsilon {
                    let cfg = MultistartConfig {
                        rng_seed: seed,
                        ..ms.clone()
                    };
                    let (run, _) = multistart_cost(&mut cost, &cfg, self.cfg.epsilon)?;
                    evaluations += run.evaluations;
                    if run.value < best.value {
                        best = run;
                    }
                }
                best.evaluations = evaluations;
                best
            }
        };
        let depth = structure.cnot_count();
        let priority = heuristic(result.value, self.cfg.heuristic_weight) + depth as f64;
        Ok(SearchNode {
            structure,
            best_params: result.params,
            score: result.value,
            depth,
            priority,
        })
    }

    fn run_inner(
        &mut self,
        root: &CircuitStructure,
        warm: Option<&[f64]>,
        sink: EventSink<'_>,
    ) -> Result<InnerResult> {
        let zeros;
        let warm = match warm {
            Some(w) => w,
            None => {
                zeros = vec![0.0; root.param_count()];
                &zeros
            }
        };
        let root_node = self.evaluate(root.clone(), warm, None)?;
        self.nodes_evaluated += 1;
        let mut evals_inner: u64 = 1;
        sink(&SearchEvent::NodeEvaluated {
            depth: root_node.depth,
            score: root_node.score,
            priority: root_node.priority,
        });
        if root_node.score < self.cfg.epsilon {
            sink(&SearchEvent::Solved {
                depth: root_node.depth,
                score: root_node.score,
            });
            return Ok(InnerResult::Solved(root_node));
        }

        let mut history = ProgressHistory::default();
        history.push(root_node.depth, root_node.score);
        sink(&SearchEvent::HistoryPoint {
            depth: root_node.depth,
            score: root_node.score,
        });
        let mut best_global = root_node.score;
        let mut best_node = root_node.clone();

        let mut queue: BinaryHeap<HeapEntry> = BinaryHeap::new();
        let mut seq: u64 = 0;
        sink(&SearchEvent::NodePushed {
            depth: root_node.depth,
            score: root_node.score,
            priority: root_node.priority,
        });
        queue.push(HeapEntry {
            priority: root_node.priority,
            score: root_node.score,
            seq,
            node: root_node,
        });

        while let Some(entry) = queue.pop() {
            let parent = entry.node;
            sink(&SearchEvent::NodePopped {
                depth: parent.depth,
                score: parent.score,
                priority: parent.priority,
            });
            let children = parent.structure.successors(self.graph, self.entanglers)?;
            self.nodes_expanded += 1;

            // Independent instantiations; per-candidate RNG streams keep
            // the outcome identical for any worker count.
            let mut warm_child = parent.best_params.clone();
            warm_child.extend_from_slice(&[0.0; 6]);
            let evaluated: Result<Vec<SearchNode>> = children
                .into_par_iter()
                .map(|child| self.evaluate(child, &warm_child, Some(parent.score)))
                .collect();

            for node in evaluated? {
                self.nodes_evaluated += 1;
                evals_inner += 1;
                sink(&SearchEvent::NodeEvaluated {
                    depth: node.depth,
                    score: node.score,
                    priority: node.priority,
                });
                if node.score < best_node.score {
                    best_node = node.clone();
                }
                if node.score < self.cfg.epsilon {
                    sink(&SearchEvent::Solved {
                        depth: node.depth,
                        score: node.score,
                    });
                    return Ok(InnerResult::Solved(node));
                }
                if self.cfg.mode == SearchMode::Leap
                    && evals_inner >= self.cfg.min_nodes_since_prefix as u64
                {
                    if let Some(predicted) =
                        predict_score(&history, self.cfg.min_history_points, node.depth)
                    {
                        if node.score < predicted {
                            sink(&SearchEvent::PrefixFormed {
                                depth: node.depth,
                                score: node.score,
                                nodes_evaluated: evals_inner,
                            });
                            return Ok(InnerResult::Prefix(node));
                        }
                    }
                }
                if node.score < best_global {
                    best_global = node.score;
                    if history.last_depth().is_none_or(|d| node.depth > d)
                        && history.push(node.depth, node.score)
                    {
                        sink(&SearchEvent::HistoryPoint {
                            depth: node.depth,
                            score: node.score,
                        });
                    }
                }
                if node.depth < self.delta {
                    seq += 1;
                    sink(&SearchEvent::NodePushed {
                        depth: node.depth,
                        score: node.score,
                        priority: node.priority,
                    });
                    queue.push(HeapEntry {
                        priority: node.priority,
                        score: node.score,
                        seq,
                        node,
                    });
                }
            }
        }
        Ok(InnerResult::Exhausted(best_node))
    }
}

/// One inner search pass: best-first from `root` until a solution
/// (`true`) or a prefix (`false`) is found. A depth-limit failure carries
/// the best node found as a best-effort report.
pub fn inner_synthesize(
    target: &UnitaryMatrix,
    root: &CircuitStructure,
    warm: Option<&[f64]>,
    graph: &CouplingGraph,
    entanglers: &EntanglerSet,
    cfg: &LeapConfig,
) -> Result<(SearchNode, bool)> {
    cfg.validate()?;
    let mut ctx = SearchCtx {
        target,
        graph,
        entanglers,
        cfg,
        delta: cfg.delta_for(target.num_qubits()),
        nodes_evaluated: 0,
        nodes_expanded: 0,
    };
    let mut sink = |_: &SearchEvent| {};
    match ctx.run_inner(root, warm, &mut sink)? {
        InnerResult::Solved(node) => Ok((node, true)),
        InnerResult::Prefix(node) => Ok((node, false)),
        InnerResult::Exhausted(node) => Err(depth_limit_error(node, &ctx, target, &[])?),
    }
}

fn depth_limit_error(
    best: SearchNode,
    ctx: &SearchCtx<'_>,
    target: &UnitaryMatrix,
    boundaries: &[usize],
) -> Result<Error> {
    let circuit = PlacedCircuit::new(best.structure.clone(), best.best_params.clone(), target)?;
    Ok(Error::DepthLimit {
        best: best.score,
        report: Box::new(SynthesisReport {
            circuit,
            prefix_boundaries: boundaries.to_vec(),
            nodes_expanded: ctx.nodes_expanded,
            nodes_evaluated: ctx.nodes_evaluated,
            wall_time: 0.0,
        }),
    })
}

/// Full synthesis: repeat inner searches, re-rooting at each prefix
/// (structure frozen, parameters free), until the target is reached
/// within epsilon. In qsearch mode this is a single pure best-first
/// search.
pub fn leap_synthesize(
    target: &UnitaryMatrix,
    graph: &CouplingGraph,
    entanglers: &EntanglerSet,
    cfg: &LeapConfig,
) -> Result<SynthesisReport> {
    let mut sink = |_: &SearchEvent| {};
    leap_synthesize_traced(target, graph, entanglers, cfg, &mut sink)
}

pub fn leap_synthesize_traced(
    target: &UnitaryMatrix,
    graph: &CouplingGraph,
    entanglers: &EntanglerSet,
    cfg: &LeapConfig,
    sink: EventSink<'_>,
) -> Result<SynthesisReport> {
    cfg.validate()?;
    if graph.num_qubits() != target.num_qubits() {
        return Err(Error::Size(format!(
            "target has {} qubits but topology has {}",
            target.num_qubits(),
            graph.num_qubits()
        )));
    }
    let start = Instant::now();
    let mut ctx = SearchCtx {
        target,
        graph,
        entanglers,
        cfg,
        delta: cfg.delta_for(target.num_qubits()),
        nodes_evaluated: 0,
        nodes_expanded: 0,
    };
    let mut root = CircuitStructure::initial(target.num_qubits())?;
    let mut warm: Option<Vec<f64>> = None;
    let mut boundaries: Vec<usize> = Vec::new();

    loop {
        match ctx.run_inner(&root, warm.as_deref(), sink)? {
            InnerResult::Solved(node) => {
                let circuit =
                    PlacedCircuit::new(node.structure, node.best_params, target)?;
                debug_assert!(circuit.achieved_distance <= cfg.epsilon);
                return Ok(SynthesisReport {
                    circuit,
                    prefix_boundaries: boundaries,
                    nodes_expanded: ctx.nodes_expanded,
                    nodes_evaluated: ctx.nodes_evaluated,
                    wall_time: start.elapsed().as_secs_f64(),
                });
            }
            InnerResult::Prefix(node) => {
                boundaries.push(node.depth);
                root = node.structure;
                warm = Some(node.best_params);
            }
            InnerResult::Exhausted(best) => {
                let mut err = depth_limit_error(best, &ctx, target, &boundaries)?;
                if let Error::DepthLimit { report, .. } = &mut err {
                    report.wall_time = start.elapsed().as_secs_f64();
                }
                return Err(err);
            }
        }
    }
}
