//! OpenQASM 2.0 emission, plus a reader for this tool's own output so
//! emitted circuits can be re-checked independently.

use super::{CircuitStructure, PlacedCircuit};
use crate::error::{Error, Result};
use crate::gates::GateKind;
use crate::matrix::MAX_QUBITS;

fn qasm_gate_name(kind: GateKind) -> &'static str {
    match kind {
        GateKind::Cnot => "cx",
        GateKind::Iswap => "iswap",
        GateKind::Sqcnot => "sqcnot",
        GateKind::Sqisw => "sqisw",
        GateKind::U3 => "u3",
        GateKind::Identity1 => "id",
    }
}

fn opaque_definition(kind: GateKind) -> Option<&'static str> {
    match kind {
        GateKind::Iswap => Some(
            "// iswap matrix: [[1,0,0,0],[0,0,i,0],[0,i,0,0],[0,0,0,1]]\nopaque iswap a,b;",
        ),
        GateKind::Sqcnot => Some(
            "// sqcnot = principal square root of cx:\n// [[1,0,0,0],[0,1,0,0],[0,0,.5+.5i,.5-.5i],[0,0,.5-.5i,.5+.5i]]\nopaque sqcnot a,b;",
        ),
        GateKind::Sqisw => Some(
            "// sqisw = principal square root of iswap:\n// [[1,0,0,0],[0,s,si,0],[0,si,s,0],[0,0,0,1]] with s = 1/sqrt(2)\nopaque sqisw a,b;",
        ),
        _ => None,
    }
}

/// Serialize to OpenQASM 2.0. Gate parameters are printed with 17
/// significant digits so they survive a parse round trip exactly.
pub fn to_qasm(circuit: &PlacedCircuit) -> String {
    let s = &circuit.structure;
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    let mut declared = Vec::new();
    for layer in s.layers() {
        if !declared.contains(&layer.entangler) {
            if let Some(def) = opaque_definition(layer.entangler) {
                out.push_str(def);
                out.push('\n');
            }
            declared.push(layer.entangler);
        }
    }
    out.push_str(&format!("qreg q[{}];\n", s.num_qubits()));

    let mut offset = 0;
    let mut emit_u3 = |out: &mut String, q: usize, params: &[f64]| {
        out.push_str(&format!(
            "u3({:.16e},{:.16e},{:.16e}) q[{}];\n",
            params[offset],
            params[offset + 1],
            params[offset + 2],
            q
        ));
        offset += 3;
    };
    for (q, &present) in s.initial_present().iter().enumerate() {
        if present {
            emit_u3(&mut out, q, &circuit.params);
        }
    }
    for layer in s.layers() {
        out.push_str(&format!(
            "{} q[{}],q[{}];\n",
            qasm_gate_name(layer.entangler),
            layer.link.0,
            layer.link.1
        ));
        for side in 0..2 {
            if layer.u3_present[side] {
                let q = if side == 0 { layer.link.0 } else { layer.link.1 };
                emit_u3(&mut out, q, &circuit.params);
            }
        }
    }
    out
}

/// Parse QASM produced by `to_qasm` back into a structure and its packed
/// parameter vector. This reader only accepts the canonical shape this
/// tool emits (initial U3 run, then entangler lines each followed by its
/// layer's U3 lines).
pub fn parse_qasm(text: &str) -> Result<(CircuitStructure, Vec<f64>)> {
    let mut num_qubits: Option<usize> = None;
    // (qubit, params) for initial gates; layers as (link, kind, u3 slots).
    let mut initial: Vec<(usize, [f64; 3])> = Vec::new();
    #[allow(clippy::type_complexity)]
    let mut layers: Vec<((usize, usize), GateKind, [Option<[f64; 3]>; 2])> = Vec::new();
    let mut seen_entangler = false;

    for raw in text.lines() {
        let line = match raw.find("//") {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let stmt = line
            .strip_suffix(';')
            .ok_or_else(|| Error::Parse(format!("missing ';' in '{line}'")))?
            .trim();
        if stmt.starts_with("OPENQASM") || stmt.starts_with("include") || stmt.starts_with("opaque")
        {
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("qreg") {
            let n = parse_register(rest.trim())?;
            if n == 0 || n > MAX_QUBITS {
                return Err(Error::Parse(format!("qreg size {n} out of range")));
            }
            num_qubits = Some(n);
            continue;
        }
        let n = num_qubits.ok_or_else(|| Error::Parse("gate before qreg".into()))?;
        if let Some(rest) = stmt.strip_prefix("u3") {
            let (params, qubit) = parse_u3(rest, n)?;
            if !seen_entangler {
                if initial.iter().any(|&(q, _)| q >= qubit) {
                    return Err(Error::Parse(
                        "initial-layer u3 lines must be on ascending qubits".into(),
                    ));
                }
                initial.push((qubit, params));
            } else {
                let (link, _, slots) = layers.last_mut().expect("entangler seen");
                let side = if qubit == link.0 && slots[0].is_none() && slots[1].is_none() {
                    0
                } else if qubit == link.1 && slots[1].is_none() {
                    1
                } else {
                    return Err(Error::Parse(format!(
                        "u3 on q[{qubit}] does not fit layer on ({},{})",
                        link.0, link.1
                    )));
                };
                slots[side] = Some(params);
            }
            continue;
        }
        // Two-qubit gate line: NAME q[a],q[b]
        let (name, rest) = stmt
            .split_once(' ')
            .ok_or_else(|| Error::Parse(format!("unrecognized statement '{stmt}'")))?;
        let kind = GateKind::from_name(name)?;
        if kind.num_qubits() != 2 {
            return Err(Error::Parse(format!("unexpected gate '{name}'")));
        }
        let (a, b) = parse_qubit_pair(rest.trim(), n)?;
        if a >= b {
            return Err(Error::Parse(format!(
                "entangler links must be emitted low,high; got q[{a}],q[{b}]"
            )));
        }
        layers.push(((a, b), kind, [None, None]));
        seen_entangler = true;
    }

    let n = num_qubits.ok_or_else(|| Error::Parse("no qreg declaration".into()))?;
    let mut structure = CircuitStructure::initial(n)?;
    structure.initial_present = vec![false; n];
    let mut params = Vec::new();
    for (q, p) in initial {
        structure.initial_present[q] = true;
        params.extend_from_slice(&p);
    }
    for (link, kind, slots) in layers {
        structure = structure.with_layer(link, kind);
        let layer = structure.layers.last_mut().expect("just pushed");
        for side in 0..2 {
            match slots[side] {
                Some(p) => params.extend_from_slice(&p),
                None => layer.u3_present[side] = false,
            }
        }
    }
    Ok((structure, params))
}

fn parse_register(text: &str) -> Result<usize> {
    // q[N]
    let inner = text
        .strip_prefix("q[")
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("bad register '{text}'")))?;
    inner
        .parse()
        .map_err(|e| Error::Parse(format!("bad register size: {e}")))
}

fn parse_qubit(text: &str, num_qubits: usize) -> Result<usize> {
    let q = parse_register(text)?;
    if q >= num_qubits {
        return Err(Error::Parse(format!("qubit q[{q}] out of range")));
    }
    Ok(q)
}

fn parse_qubit_pair(text: &str, num_qubits: usize) -> Result<(usize, usize)> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("bad qubit pair '{text}'")))?;
    Ok((
        parse_qubit(a.trim(), num_qubits)?,
        parse_qubit(b.trim(), num_qubits)?,
    ))
}

fn parse_u3(rest: &str, num_qubits: usize) -> Result<([f64; 3], usize)> {
    // (e1,e2,e3) q[i]
    let rest = rest.trim();
    let close = rest
        .find(')')
        .ok_or_else(|| Error::Parse(format!("bad u3 line '{rest}'")))?;
    let args = rest
        .strip_prefix('(')
        .map(|r| &r[..close - 1])
        .ok_or_else(|| Error::Parse(format!("bad u3 line '{rest}'")))?;
    let mut params = [0.0; 3];
    let mut count = 0;
    for (i, piece) in args.split(',').enumerate() {
        if i >= 3 {
            return Err(Error::Parse("u3 takes 3 parameters".into()));
        }
        params[i] = piece
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad u3 parameter '{piece}': {e}")))?;
        count += 1;
    }
    if count != 3 {
        return Err(Error::Parse("u3 takes 3 parameters".into()));
    }
    let qubit = parse_qubit(rest[close + 1..].trim(), num_qubits)?;
    Ok((params, qubit))
}
