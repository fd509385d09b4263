//! CLI pipeline tests: reports, file outputs, schema conformance,
//! reproducibility, and exit statuses.

use std::path::PathBuf;

use leap_cli::{run, verify, Report, RunConfig};
use leap_core::SearchMode;

fn base_cfg(target: &str) -> RunConfig {
    RunConfig {
        target: target.into(),
        heuristic_weight: 5.0,
        ..RunConfig::default()
    }
}

#[test]
fn identity_target_is_trivial() {
    let outcome = run(&base_cfg("identity3")).unwrap();
    assert_eq!(outcome.exit_code, 0);
    assert_eq!(outcome.report.cnot_count, 0);
    assert!(outcome.report.distance < 1e-10);
}

#[test]
fn toffoli_pipeline_outputs_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let qasm_path = dir.path().join("out.qasm");
    let report_path = dir.path().join("report.json");
    let circuit_path = dir.path().join("circuit.json");
    let trace_path = dir.path().join("trace.jsonl");
    let cfg = RunConfig {
        qasm_out: Some(qasm_path.clone()),
        report_out: Some(report_path.clone()),
        circuit_out: Some(circuit_path.clone()),
        trace_out: Some(trace_path.clone()),
        ..base_cfg("toffoli")
    };
    let outcome = run(&cfg).unwrap();
    assert_eq!(outcome.exit_code, 0);
    assert!(outcome.report.succeeded);
    assert_eq!(outcome.report.cnot_count, 8);

    // Entangler lines in the QASM match the reported count.
    let qasm = std::fs::read_to_string(&qasm_path).unwrap();
    let cx_lines = qasm
        .lines()
        .filter(|l| {
            ["cx ", "iswap ", "sqcnot ", "sqisw "]
                .iter()
                .any(|g| l.starts_with(g))
        })
        .count();
    assert_eq!(cx_lines, outcome.report.cnot_count);

    // The report on disk parses and matches the returned one.
    let text = std::fs::read_to_string(&report_path).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(
        parsed["cnot_count"].as_u64().unwrap() as usize,
        outcome.report.cnot_count
    );

    // Circuit dump parses back into a placed circuit.
    let circuit_text = std::fs::read_to_string(&circuit_path).unwrap();
    let circuit: leap_core::PlacedCircuit = serde_json::from_str(&circuit_text).unwrap();
    assert_eq!(circuit.structure.cnot_count(), outcome.report.cnot_count);

    // The trace is JSON lines with known event tags.
    let trace = std::fs::read_to_string(&trace_path).unwrap();
    assert!(!trace.is_empty());
    for line in trace.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let tag = v["event"].as_str().unwrap();
        assert!(
            [
                "node_evaluated",
                "node_pushed",
                "node_popped",
                "history_point",
                "prefix_formed",
                "solved"
            ]
            .contains(&tag),
            "unknown event {tag}"
        );
    }

    // And the emitted QASM verifies against the target.
    let (dist, ok) = verify(&qasm_path, &base_cfg("toffoli")).unwrap();
    assert!(ok, "distance {dist}");
}

/// Minimal JSON-schema conformance check against the published schema:
/// required fields exist and primitive types line up.
#[test]
fn report_validates_against_published_schema() {
    let schema_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/report-schema.json");
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let outcome = run(&base_cfg("qft2")).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&serde_json::to_string(&outcome.report).unwrap()).unwrap();

    fn check(value: &serde_json::Value, schema: &serde_json::Value, path: &str) {
        if let Some(required) = schema["required"].as_array() {
            for key in required {
                let key = key.as_str().unwrap();
                assert!(
                    !value[key].is_null(),
                    "missing required field {path}.{key}"
                );
            }
        }
        let props = match schema["properties"].as_object() {
            Some(p) => p,
            None => return,
        };
        for (key, subschema) in props {
            let field = &value[key];
            if field.is_null() {
                continue;
            }
            let path = format!("{path}.{key}");
            let type_ok = |ty: &str| match ty {
                "string" => field.is_string(),
                "integer" => field.is_u64() || field.is_i64(),
                "number" => field.is_number(),
                "boolean" => field.is_boolean(),
                "array" => field.is_array(),
                "object" => field.is_object(),
                "null" => true,
                _ => true,
            };
            match &subschema["type"] {
                serde_json::Value::String(ty) => {
                    assert!(type_ok(ty), "{path} is not a {ty}");
                }
                serde_json::Value::Array(types) => {
                    assert!(
                        types.iter().any(|t| type_ok(t.as_str().unwrap())),
                        "{path} matches none of {types:?}"
                    );
                }
                _ => {}
            }
            if subschema["type"] == "object" {
                check(field, subschema, &path);
            }
        }
    }
    check(&report, &schema, "report");
}

#[test]
fn fixed_seed_reports_are_bit_identical() {
    let cfg = RunConfig {
        seed: 42,
        workers: 1,
        ..base_cfg("qft3")
    };
    let a = run(&cfg).unwrap().report;
    let b = run(&cfg).unwrap().report;
    let strip = |r: &Report| {
        let mut v: serde_json::Value =
            serde_json::from_str(&serde_json::to_string(r).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_s");
        v
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn depth_limit_exits_2_with_best_effort_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let qasm_path = dir.path().join("partial.qasm");
    let cfg = RunConfig {
        delta: Some(2),
        qasm_out: Some(qasm_path.clone()),
        resynth: false,
        reduce: false,
        ..base_cfg("toffoli")
    };
    let outcome = run(&cfg).unwrap();
    assert_eq!(outcome.exit_code, 2);
    assert!(!outcome.report.succeeded);
    assert!(outcome.report.distance > 1e-10);
    assert!(qasm_path.exists());
}

#[test]
fn bad_inputs_are_errors() {
    assert!(run(&base_cfg("not_a_benchmark")).is_err());
    let cfg = RunConfig {
        topology: "/nonexistent/topology.json".into(),
        ..base_cfg("toffoli")
    };
    assert!(run(&cfg).is_err());
    let cfg = RunConfig {
        gateset: "u3".into(),
        ..base_cfg("toffoli")
    };
    assert!(run(&cfg).is_err());
}

#[test]
fn unitary_file_targets_work() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("target.json");
    let u = leap_core::benchmarks::qft(2).unwrap();
    leap_core::matrix::write_unitary_file(&path, &u).unwrap();
    let cfg = RunConfig {
        target: path.to_string_lossy().into_owned(),
        topology: "all".into(),
        ..base_cfg("")
    };
    let outcome = run(&cfg).unwrap();
    assert_eq!(outcome.exit_code, 0);
    assert!(outcome.report.cnot_count <= 3);
}

#[test]
fn mode_flag_switches_search() {
    let leap = run(&base_cfg("qft3")).unwrap().report;
    let qsearch = run(&RunConfig {
        mode: SearchMode::QSearch,
        ..base_cfg("qft3")
    })
    .unwrap()
    .report;
    assert!(leap.nodes_evaluated <= qsearch.nodes_evaluated);
    assert!((leap.cnot_count as i64 - qsearch.cnot_count as i64).abs() <= 1);
}

/// The default configuration reproduces the documented toffoli run:
/// `synth --target toffoli --topology linear --epsilon 1e-10` -> 8 CNOTs.
#[test]
fn default_config_toffoli_hits_eight_cnots() {
    let cfg = RunConfig {
        target: "toffoli".into(),
        ..RunConfig::default()
    };
    let outcome = run(&cfg).unwrap();
    assert_eq!(outcome.report.cnot_count, 8);
    assert!(outcome.report.distance < 1e-10);
}
