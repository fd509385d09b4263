//! Circuit structures: the search-tree node payload. A structure is an
//! initial layer of U3 gates (one per qubit) followed by two-qubit
//! expansion layers, each contributing one entangler and two U3 gates.
//! U3 slots can be switched off individually, which is how the
//! dimensionality-reduction pass deletes gates.

mod eval;
mod qasm;

pub use eval::{instantiate, objective_and_gradient, CircuitEvaluator};
pub use qasm::{parse_qasm, to_qasm};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{EntanglerSet, GateKind};
use crate::matrix::{UnitaryMatrix, MAX_QUBITS};
use crate::topology::CouplingGraph;

/// One two-qubit expansion step: an entangler on `link` followed by a U3
/// on each link qubit. `link` is stored (low, high); for CNOT-family
/// gates the low qubit is the control.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionLayer {
    pub link: (usize, usize),
    pub entangler: GateKind,
    /// Whether the U3 on the low / high link qubit is still present.
    pub u3_present: [bool; 2],
}

impl ExpansionLayer {
    fn new(link: (usize, usize), entangler: GateKind) -> Self {
        Self {
            link,
            entangler,
            u3_present: [true, true],
        }
    }
}

/// Placement skeleton of a circuit, before parameters are chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitStructure {
    num_qubits: usize,
    /// Which initial-layer U3 gates are present, per qubit.
    initial_present: Vec<bool>,
    layers: Vec<ExpansionLayer>,
}

/// Identifies a single U3 position within a structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum U3Slot {
    Initial { qubit: usize },
    /// `side` 0 is the low link qubit, 1 the high one.
    Layer { index: usize, side: usize },
}

impl CircuitStructure {
    /// The search root: one U3 per qubit, no expansion layers.
    pub fn initial(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Size(format!(
                "qubit count {num_qubits} out of range 1..={MAX_QUBITS}"
            )));
        }
        Ok(Self {
            num_qubits,
            initial_present: vec![true; num_qubits],
            layers: Vec::new(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn layers(&self) -> &[ExpansionLayer] {
        &self.layers
    }

    /// Number of two-qubit gates (one per expansion layer).
    pub fn cnot_count(&self) -> usize {
        self.layers.len()
    }

    /// Number of live U3 gates.
    pub fn u3_count(&self) -> usize {
        self.initial_present.iter().filter(|&&p| p).count()
            + self
                .layers
                .iter()
                .map(|l| l.u3_present.iter().filter(|&&p| p).count())
                .sum::<usize>()
    }

    /// Three parameters per live U3.
    pub fn param_count(&self) -> usize {
        3 * self.u3_count()
    }

    pub fn with_layer(&self, link: (usize, usize), entangler: GateKind) -> Self {
        let mut child = self.clone();
        child
            .layers
            .push(ExpansionLayer::new((link.0.min(link.1), link.0.max(link.1)), entangler));
        child
    }

    /// One child per (coupling edge x entangler kind), in that order.
    pub fn successors(
        &self,
        graph: &CouplingGraph,
        entanglers: &EntanglerSet,
    ) -> Result<Vec<CircuitStructure>> {
        if graph.num_qubits() != self.num_qubits {
            return Err(Error::Size(format!(
                "structure has {} qubits but coupling graph has {}",
                self.num_qubits,
                graph.num_qubits()
            )));
        }
        if graph.edges().is_empty() {
            return Err(Error::Config(
                "coupling graph has no edges; cannot expand".into(),
            ));
        }
        let mut out = Vec::with_capacity(graph.edges().len() * entanglers.kinds().len());
        for &edge in graph.edges() {
            for &kind in entanglers.kinds() {
                out.push(self.with_layer(edge, kind));
            }
        }
        Ok(out)
    }

    /// Live U3 positions in sweep order: initial layer (qubit ascending),
    /// then per expansion layer (low qubit, high qubit).
    pub fn u3_slots(&self) -> Vec<U3Slot> {
        let mut slots = Vec::with_capacity(self.u3_count());
        for (q, &present) in self.initial_present.iter().enumerate() {
            if present {
                slots.push(U3Slot::Initial { qubit: q });
            }
        }
        for (i, layer) in self.layers.iter().enumerate() {
            for side in 0..2 {
                if layer.u3_present[side] {
                    slots.push(U3Slot::Layer { index: i, side });
                }
            }
        }
        slots
    }

    /// Circuit stage of a slot for deletion reporting: 0 for the initial
    /// layer, k+1 for expansion layer k.
    pub fn stage_of(slot: U3Slot) -> usize {
        match slot {
            U3Slot::Initial { .. } => 0,
            U3Slot::Layer { index, .. } => index + 1,
        }
    }

    /// Offset of the slot's three parameters in the packed vector.
    pub fn param_offset_of(&self, slot: U3Slot) -> Option<usize> {
        let mut offset = 0;
        for s in self.u3_slots() {
            if s == slot {
                return Some(offset);
            }
            offset += 3;
        }
        None
    }

    /// Copy with one U3 switched off.
    pub fn with_u3_removed(&self, slot: U3Slot) -> Result<Self> {
        let mut out = self.clone();
        match slot {
            U3Slot::Initial { qubit } if qubit < self.num_qubits && out.initial_present[qubit] => {
                out.initial_present[qubit] = false;
            }
            U3Slot::Layer { index, side }
                if index < out.layers.len()
                    && side < 2
                    && out.layers[index].u3_present[side] =>
            {
                out.layers[index].u3_present[side] = false;
            }
            _ => {
                return Err(Error::Validation(format!(
                    "slot {slot:?} is absent or out of range"
                )))
            }
        }
        Ok(out)
    }

    /// Re-enable a U3 slot (used when splicing resynthesized sections).
    pub fn with_u3_restored(&self, slot: U3Slot) -> Result<Self> {
        let mut out = self.clone();
        match slot {
            U3Slot::Initial { qubit } if qubit < self.num_qubits => {
                out.initial_present[qubit] = true;
            }
            U3Slot::Layer { index, side } if index < out.layers.len() && side < 2 => {
                out.layers[index].u3_present[side] = true;
            }
            _ => return Err(Error::Validation(format!("slot {slot:?} out of range"))),
        }
        Ok(out)
    }

    pub fn initial_present(&self) -> &[bool] {
        &self.initial_present
    }

    /// Stable content hash, used to derive per-candidate RNG streams.
    pub fn content_hash(&self) -> u64 {
        let mut h = Fnv::new();
        h.byte(self.num_qubits as u8);
        for &p in &self.initial_present {
            h.byte(p as u8);
        }
        for layer in &self.layers {
            h.byte(layer.link.0 as u8);
            h.byte(layer.link.1 as u8);
            h.byte(match layer.entangler {
                GateKind::U3 => 0,
                GateKind::Cnot => 1,
                GateKind::Iswap => 2,
                GateKind::Sqcnot => 3,
                GateKind::Sqisw => 4,
                GateKind::Identity1 => 5,
            });
            h.byte(layer.u3_present[0] as u8);
            h.byte(layer.u3_present[1] as u8);
        }
        h.finish()
    }

    /// ASAP critical-path depth over live gates.
    pub fn critical_path_depth(&self) -> usize {
        let mut tick = vec![0usize; self.num_qubits];
        for gate in self.placed_gates() {
            match gate.slot {
                Slot::One(q) => tick[q] += 1,
                Slot::Two(a, b) => {
                    let t = tick[a].max(tick[b]) + 1;
                    tick[a] = t;
                    tick[b] = t;
                }
            }
        }
        tick.into_iter().max().unwrap_or(0)
    }

    /// Total live gates divided by critical-path depth.
    pub fn parallelism(&self) -> f64 {
        let depth = self.critical_path_depth();
        if depth == 0 {
            return 0.0;
        }
        (self.u3_count() + self.cnot_count()) as f64 / depth as f64
    }

    /// Flatten to placed gates in time order. Parameter offsets follow the
    /// packing convention: initial layer qubit-major, then per layer the
    /// low-qubit U3 before the high-qubit U3.
    pub(crate) fn placed_gates(&self) -> Vec<PlacedGate> {
        let mut gates = Vec::new();
        let mut offset = 0;
        for (q, &present) in self.initial_present.iter().enumerate() {
            if present {
                gates.push(PlacedGate {
                    slot: Slot::One(q),
                    kind: GateKind::U3,
                    param_offset: offset,
                });
                offset += 3;
            }
        }
        for layer in &self.layers {
            gates.push(PlacedGate {
                slot: Slot::Two(layer.link.0, layer.link.1),
                kind: layer.entangler,
                param_offset: offset,
            });
            for side in 0..2 {
                if layer.u3_present[side] {
                    let q = if side == 0 { layer.link.0 } else { layer.link.1 };
                    gates.push(PlacedGate {
                        slot: Slot::One(q),
                        kind: GateKind::U3,
                        param_offset: offset,
                    });
                    offset += 3;
                }
            }
        }
        gates
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Slot {
    One(usize),
    Two(usize, usize),
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct PlacedGate {
    pub slot: Slot,
    pub kind: GateKind,
    pub param_offset: usize,
}

/// FNV-1a, kept local so hashes are stable across toolchains.
struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf29ce484222325)
    }
    fn byte(&mut self, b: u8) {
        self.0 ^= b as u64;
        self.0 = self.0.wrapping_mul(0x100000001b3);
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

/// A structure with a concrete parameter vector and the distance it
/// achieves against the target it was synthesized for.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlacedCircuit {
    pub structure: CircuitStructure,
    pub params: Vec<f64>,
    pub achieved_distance: f64,
}

impl PlacedCircuit {
    /// Bind parameters to a structure, recording the achieved distance by
    /// evaluating against `target`.
    pub fn new(structure: CircuitStructure, params: Vec<f64>, target: &UnitaryMatrix) -> Result<Self> {
        if params.len() != structure.param_count() {
            return Err(Error::Arity(format!(
                "structure takes {} parameters, got {}",
                structure.param_count(),
                params.len()
            )));
        }
        let achieved_distance = crate::matrix::distance(target, &instantiate(&structure, &params)?)?;
        Ok(Self {
            structure,
            params,
            achieved_distance,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialization cannot fail")
    }
}
