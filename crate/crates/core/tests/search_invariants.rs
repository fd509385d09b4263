//! Search-engine invariants asserted through the event log and reports.

use leap_core::benchmarks;
use leap_core::search::{
    leap_synthesize, leap_synthesize_traced, LeapConfig, SearchEvent, SearchMode,
};
use leap_core::{CouplingGraph, EntanglerSet};

fn cfg(mode: SearchMode, seed: u64) -> LeapConfig {
    LeapConfig {
        mode,
        rng_seed: seed,
        heuristic_weight: 5.0,
        ..LeapConfig::default()
    }
}

#[test]
fn prefix_work_gates_respected() {
    let target = benchmarks::toffoli();
    let graph = CouplingGraph::linear(3).unwrap();
    let set = EntanglerSet::default();
    let config = cfg(SearchMode::Leap, 1);

    let mut events: Vec<SearchEvent> = Vec::new();
    let mut sink = |e: &SearchEvent| events.push(e.clone());
    let report =
        leap_synthesize_traced(&target, &graph, &set, &config, &mut sink).unwrap();

    // Between (re)starts of inner searches, count history points and
    // evaluations preceding each prefix formation.
    let mut history_points = 0usize;
    let mut evaluated = 0u64;
    let mut prefixes_seen = 0usize;
    for event in &events {
        match event {
            SearchEvent::NodeEvaluated { .. } => evaluated += 1,
            SearchEvent::HistoryPoint { .. } => history_points += 1,
            SearchEvent::PrefixFormed {
                nodes_evaluated, ..
            } => {
                prefixes_seen += 1;
                assert!(
                    history_points >= config.min_history_points,
                    "prefix before {history_points} history points"
                );
                assert!(
                    *nodes_evaluated >= config.min_nodes_since_prefix as u64,
                    "prefix after only {nodes_evaluated} evaluations"
                );
                history_points = 0;
                evaluated = 0;
            }
            _ => {}
        }
    }
    assert_eq!(prefixes_seen, report.prefix_boundaries.len());
    assert!(evaluated > 0);

    // Boundaries strictly increase and never exceed the final count.
    let mut prev = 0;
    for &b in &report.prefix_boundaries {
        assert!(b > prev, "boundaries not strictly increasing");
        prev = b;
    }
    assert!(prev <= report.circuit.structure.cnot_count());
}

#[test]
fn qsearch_never_forms_prefixes() {
    let target = benchmarks::toffoli();
    let graph = CouplingGraph::linear(3).unwrap();
    let set = EntanglerSet::default();
    let mut prefix_events = 0;
    let mut sink = |e: &SearchEvent| {
        if matches!(e, SearchEvent::PrefixFormed { .. }) {
            prefix_events += 1;
        }
    };
    let report = leap_synthesize_traced(
        &target,
        &graph,
        &set,
        &cfg(SearchMode::QSearch, 1),
        &mut sink,
    )
    .unwrap();
    assert_eq!(prefix_events, 0);
    assert!(report.prefix_boundaries.is_empty());
}

#[test]
fn leap_explores_no_more_nodes_than_qsearch() {
    let target = benchmarks::toffoli();
    let graph = CouplingGraph::linear(3).unwrap();
    let set = EntanglerSet::default();
    let leap = leap_synthesize(&target, &graph, &set, &cfg(SearchMode::Leap, 1)).unwrap();
    let qsearch =
        leap_synthesize(&target, &graph, &set, &cfg(SearchMode::QSearch, 1)).unwrap();
    assert!(
        leap.nodes_evaluated <= qsearch.nodes_evaluated,
        "leap {} vs qsearch {}",
        leap.nodes_evaluated,
        qsearch.nodes_evaluated
    );
    // Both deliver circuits within tolerance.
    assert!(leap.circuit.achieved_distance < 1e-10);
    assert!(qsearch.circuit.achieved_distance < 1e-10);
}

#[test]
fn searches_are_reproducible_for_fixed_seed() {
    let target = benchmarks::qft(3).unwrap();
    let graph = CouplingGraph::linear(3).unwrap();
    let set = EntanglerSet::default();
    let a = leap_synthesize(&target, &graph, &set, &cfg(SearchMode::Leap, 11)).unwrap();
    let b = leap_synthesize(&target, &graph, &set, &cfg(SearchMode::Leap, 11)).unwrap();
    assert_eq!(a.nodes_evaluated, b.nodes_evaluated);
    assert_eq!(a.nodes_expanded, b.nodes_expanded);
    assert_eq!(a.prefix_boundaries, b.prefix_boundaries);
    assert_eq!(a.circuit.structure, b.circuit.structure);
    assert_eq!(a.circuit.params, b.circuit.params);
    assert_eq!(
        a.circuit.achieved_distance.to_bits(),
        b.circuit.achieved_distance.to_bits()
    );
}

#[test]
fn every_return_is_within_epsilon_or_depth_limited() {
    let graph = CouplingGraph::linear(2).unwrap();
    let set = EntanglerSet::default();
    for seed in 0..5 {
        let target = benchmarks::qft(2).unwrap();
        match leap_synthesize(&target, &graph, &set, &cfg(SearchMode::Leap, seed)) {
            Ok(report) => assert!(report.circuit.achieved_distance <= 1e-10),
            Err(leap_core::Error::DepthLimit { report, .. }) => {
                assert!(report.circuit.achieved_distance > 1e-10)
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
