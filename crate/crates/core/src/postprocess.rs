//! Solution-improvement passes: window re-synthesis at prefix seams and
//! dimensionality reduction by U3 deletion.

use serde::Serialize;

use crate::circuit::{instantiate, CircuitStructure, PlacedCircuit, U3Slot};
use crate::error::{Error, Result};
use crate::gates::EntanglerSet;
use crate::matrix::UnitaryMatrix;
use crate::optimize::{local_minimize, multistart_cost, CircuitCost, MultistartConfig, RunRecord};
use crate::search::{leap_synthesize, InstantiationTier, LeapConfig, SearchMode};
use crate::topology::CouplingGraph;

/// Re-synthesis window configuration. The window is measured in
/// entanglers; the default follows circuit size (7 up to 4 qubits, 5
/// beyond).
#[derive(Clone, Debug, Serialize)]
pub struct ResynthConfig {
    pub window_cnots: usize,
    pub passes: usize,
}

impl ResynthConfig {
    pub fn for_qubits(num_qubits: usize) -> Self {
        Self {
            window_cnots: if num_qubits <= 4 { 7 } else { 5 },
            passes: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.window_cnots == 0 {
            return Err(Error::Config("re-synthesis window must be >= 1".into()));
        }
        Ok(())
    }
}

/// A deleted U3, reported by circuit stage (0 = initial layer, k = after
/// the k-th entangler).
#[derive(Clone, Debug, Serialize)]
pub struct DeletionRecord {
    pub stage: usize,
    pub slot: U3Slot,
}

/// Block-end seams for re-synthesis: the recorded prefix boundaries plus
/// the circuit end (the final block's end is a partition division too).
pub fn seam_boundaries(prefix_boundaries: &[usize], cnot_count: usize) -> Vec<usize> {
    let mut seams = prefix_boundaries.to_vec();
    if cnot_count > 0 && seams.last() != Some(&cnot_count) {
        seams.push(cnot_count);
    }
    seams
}

fn check_boundary(boundary: usize, cnots: usize) -> Result<()> {
    if boundary > cnots {
        return Err(Error::Validation(format!(
            "prefix boundary {boundary} exceeds circuit depth {cnots}"
        )));
    }
    Ok(())
}

/// Extract the slab of `window` consecutive expansion layers centered on
/// `boundary` (ceil(w/2) before, floor(w/2) after, clamped to the ends).
fn slab_range(boundary: usize, window: usize, cnots: usize) -> (usize, usize) {
    let before = window.div_ceil(2);
    let lo = boundary.saturating_sub(before);
    let hi = (lo + window).min(cnots);
    let lo = hi.saturating_sub(window);
    (lo, hi)
}

/// Split a placed circuit at expansion-layer range [lo, hi): returns the
/// slab as a standalone structure (no initial layer) with its parameter
/// slice, plus the remainder circuit with the slab layers removed.
struct SlabSplit {
    slab_unitary: UnitaryMatrix,
    slab_cnots: usize,
}

fn lift_slab(circuit: &PlacedCircuit, lo: usize, hi: usize) -> Result<SlabSplit> {
    let s = &circuit.structure;
    // Build a structure holding only the slab layers, initial layer off.
    let mut slab = CircuitStructure::initial(s.num_qubits())?;
    for q in 0..s.num_qubits() {
        slab = slab.with_u3_removed(U3Slot::Initial { qubit: q })?;
    }
    let mut params = Vec::new();
    for (i, layer) in s.layers().iter().enumerate().take(hi).skip(lo) {
        slab = slab.with_layer(layer.link, layer.entangler);
        let idx = slab.cnot_count() - 1;
        for side in 0..2 {
            if layer.u3_present[side] {
                let offset = s
                    .param_offset_of(U3Slot::Layer { index: i, side })
                    .expect("present slot has an offset");
                params.extend_from_slice(&circuit.params[offset..offset + 3]);
            } else {
                slab = slab.with_u3_removed(U3Slot::Layer { index: idx, side })?;
            }
        }
    }
    let slab_unitary = instantiate(&slab, &params)?;
    Ok(SlabSplit {
        slab_unitary,
        slab_cnots: hi - lo,
    })
}

/// Splice `replacement` (a full synthesis result: initial layer plus
/// expansion layers) into `circuit` in place of layers [lo, hi). The
/// replacement's initial U3 layer is absorbed into the last U3 slot
/// touching each qubit before the splice point, composing rotations where
/// a gate is already present (a global phase may be dropped, which the
/// distance metric ignores).
fn splice(
    circuit: &PlacedCircuit,
    lo: usize,
    hi: usize,
    replacement: &PlacedCircuit,
) -> Result<(CircuitStructure, Vec<f64>)> {
    let s = &circuit.structure;
    let n = s.num_qubits();

    // Start from the prefix part: initial layer + layers [0, lo).
    let mut out = CircuitStructure::initial(n)?;
    for q in 0..n {
        if !s.initial_present()[q] {
            out = out.with_u3_removed(U3Slot::Initial { qubit: q })?;
        }
    }
    // Per-qubit U3 angles, indexed by the slot in `out`.
    let mut slot_params: Vec<(U3Slot, [f64; 3])> = Vec::new();
    let fetch = |slot: U3Slot| -> [f64; 3] {
        let offset = s.param_offset_of(slot).expect("present slot");
        [
            circuit.params[offset],
            circuit.params[offset + 1],
            circuit.params[offset + 2],
        ]
    };
    for q in 0..n {
        if s.initial_present()[q] {
            slot_params.push((U3Slot::Initial { qubit: q }, fetch(U3Slot::Initial { qubit: q })));
        }
    }
    for (i, layer) in s.layers().iter().enumerate().take(lo) {
        out = out.with_layer(layer.link, layer.entangler);
        let idx = out.cnot_count() - 1;
        for side in 0..2 {
            let slot = U3Slot::Layer { index: i, side };
            if layer.u3_present[side] {
                slot_params.push((U3Slot::Layer { index: idx, side }, fetch(slot)));
            } else {
                out = out.with_u3_removed(U3Slot::Layer { index: idx, side })?;
            }
        }
    }

    // Absorb the replacement's initial layer: compose onto the last slot
    // touching each qubit (re-enabling it if it was deleted).
    let rs = &replacement.structure;
    for q in 0..n {
        if !rs.initial_present()[q] {
            continue;
        }
        let offset = rs
            .param_offset_of(U3Slot::Initial { qubit: q })
            .expect("present slot");
        let angles = [
            replacement.params[offset],
            replacement.params[offset + 1],
            replacement.params[offset + 2],
        ];
        // Find the last slot on qubit q at or after the final gate
        // touching q in the prefix part.
        let mut target_slot = U3Slot::Initial { qubit: q };
        for (idx, layer) in out.layers().iter().enumerate() {
            if layer.link.0 == q {
                target_slot = U3Slot::Layer { index: idx, side: 0 };
            } else if layer.link.1 == q {
                target_slot = U3Slot::Layer { index: idx, side: 1 };
            }
        }
        let existing = slot_params.iter_mut().find(|(s, _)| *s == target_slot);
        match existing {
            Some((_, p)) => *p = compose_u3(&angles, p),
            None => {
                out = out.with_u3_restored(target_slot)?;
                slot_params.push((target_slot, angles));
            }
        }
    }

    // Replacement expansion layers.
    for (i, layer) in rs.layers().iter().enumerate() {
        out = out.with_layer(layer.link, layer.entangler);
        let idx = out.cnot_count() - 1;
        for side in 0..2 {
            if layer.u3_present[side] {
                let offset = rs
                    .param_offset_of(U3Slot::Layer { index: i, side })
                    .expect("present slot");
                slot_params.push((
                    U3Slot::Layer { index: idx, side },
                    [
                        replacement.params[offset],
                        replacement.params[offset + 1],
                        replacement.params[offset + 2],
                    ],
                ));
            } else {
                out = out.with_u3_removed(U3Slot::Layer { index: idx, side })?;
            }
        }
    }

    // Suffix layers [hi, ..).
    for (i, layer) in s.layers().iter().enumerate().skip(hi) {
        out = out.with_layer(layer.link, layer.entangler);
        let idx = out.cnot_count() - 1;
        for side in 0..2 {
            let slot = U3Slot::Layer { index: i, side };
            if layer.u3_present[side] {
                slot_params.push((U3Slot::Layer { index: idx, side }, fetch(slot)));
            } else {
                out = out.with_u3_removed(U3Slot::Layer { index: idx, side })?;
            }
        }
    }

    // Pack parameters in the canonical slot order.
    let mut params = Vec::with_capacity(out.param_count());
    for slot in out.u3_slots() {
        let (_, p) = slot_params
            .iter()
            .find(|(s, _)| *s == slot)
            .expect("every live slot was assigned parameters");
        params.extend_from_slice(p);
    }
    Ok((out, params))
}

/// Angles of the single U3 equal (up to global phase) to
/// U3(second) * U3(first) in time order (first applied first).
fn compose_u3(second: &[f64; 3], first: &[f64; 3]) -> [f64; 3] {
    let a = crate::gates::gate_matrix(crate::gates::GateKind::U3, second).expect("arity 3");
    let b = crate::gates::gate_matrix(crate::gates::GateKind::U3, first).expect("arity 3");
    let m = a.matmul(&b).expect("2x2 product");
    // m = e^{i phase} U3(theta, phi, lambda): |m00| = cos(theta/2).
    let m00 = m[(0, 0)];
    let m01 = m[(0, 1)];
    let m10 = m[(1, 0)];
    let ct = m00.norm().min(1.0);
    let st = (1.0 - ct * ct).sqrt().min(1.0);
    let theta = 2.0 * st.atan2(ct);
    // Remove the global phase so entry (0,0) is real non-negative.
    let phase = if m00.norm() > 1e-12 {
        m00 / m00.norm()
    } else {
        // theta = pi: fix the phase from m10 so phi = arg(m10) stays 0.
        m10 / m10.norm()
    };
    let phi = if st > 1e-12 {
        (m10 / phase).arg()
    } else {
        0.0
    };
    let lambda = if st > 1e-12 {
        (-m01 / phase).arg()
    } else if m00.norm() > 1e-12 {
        ((m.entries()[3] / phase).arg() - phi + std::f64::consts::TAU) % std::f64::consts::TAU
    } else {
        0.0
    };
    [theta, phi, lambda]
}

/// Re-synthesize a window around each prefix boundary exactly once per
/// pass. The slab is lifted to a unitary in isolation and re-synthesized
/// with the expensive optimizer tier; the replacement is spliced in only
/// if it uses strictly fewer entanglers and the reassembled circuit still
/// meets epsilon against the global target.
pub fn resynthesize(
    circuit: &PlacedCircuit,
    boundaries: &[usize],
    target: &UnitaryMatrix,
    graph: &CouplingGraph,
    entanglers: &EntanglerSet,
    cfg: &ResynthConfig,
    search_cfg: &LeapConfig,
    multistart: &MultistartConfig,
    epsilon: f64,
) -> Result<PlacedCircuit> {
    cfg.validate()?;
    let mut current = circuit.clone();
    for boundary in boundaries {
        check_boundary(*boundary, circuit.structure.cnot_count())?;
    }
    for _pass in 0..cfg.passes {
        for &boundary in boundaries {
            let cnots = current.structure.cnot_count();
            let boundary = boundary.min(cnots);
            let (lo, hi) = slab_range(boundary, cfg.window_cnots, cnots);
            if hi <= lo {
                continue;
            }
            let slab = lift_slab(&current, lo, hi)?;
            if slab.slab_cnots <= 1 {
                continue;
            }
            // The replacement is only useful below the slab's own count,
            // and the window search runs on the expensive multistart tier.
            let inner_cfg = LeapConfig {
                delta: Some(slab.slab_cnots - 1),
                mode: SearchMode::Leap,
                tier: InstantiationTier::Multistart(MultistartConfig {
                    rng_seed: search_cfg.rng_seed,
                    ..multistart.clone()
                }),
                ..search_cfg.clone()
            };
            let replacement = match leap_synthesize(&slab.slab_unitary, graph, entanglers, &inner_cfg)
            {
                Ok(r) => r.circuit,
                Err(Error::DepthLimit { .. }) => continue, // no shorter slab exists
                Err(e) => return Err(e),
            };
            if replacement.structure.cnot_count() >= slab.slab_cnots {
                continue;
            }
            let (spliced, params) = splice(&current, lo, hi, &replacement)?;
            let mut candidate = PlacedCircuit::new(spliced, params, target)?;
            if candidate.achieved_distance > epsilon {
                // Polish all parameters from the spliced warm start.
                let polished = local_minimize(
                    &candidate.structure,
                    target,
                    &candidate.params,
                    epsilon,
                )?;
                candidate =
                    PlacedCircuit::new(candidate.structure, polished.params, target)?;
            }
            if candidate.achieved_distance <= epsilon {
                current = candidate;
            }
        }
    }
    debug_assert!(current.structure.cnot_count() <= circuit.structure.cnot_count());
    Ok(current)
}

/// Outcome of the U3-deletion sweep.
#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub circuit: PlacedCircuit,
    pub deleted: Vec<DeletionRecord>,
    /// Log of the multistart local runs spent on deletion attempts.
    pub multistart_runs: Vec<RunRecord>,
}

/// Delete U3 gates one at a time in a sweep from the circuit start,
/// re-instantiating the remaining parameters after each tentative
/// removal; a removal is kept only when the circuit still meets epsilon.
/// Entangler count is never touched.
pub fn reduce_dimensionality(
    circuit: &PlacedCircuit,
    target: &UnitaryMatrix,
    epsilon: f64,
    multistart: &MultistartConfig,
) -> Result<ReductionReport> {
    if circuit.achieved_distance > epsilon {
        return Err(Error::Validation(format!(
            "input circuit distance {:.3e} exceeds epsilon {epsilon:.3e}",
            circuit.achieved_distance
        )));
    }
    let mut current = circuit.clone();
    let mut deleted = Vec::new();
    let mut multistart_runs = Vec::new();
    let mut position = 0;
    loop {
        let slots = current.structure.u3_slots();
        if position >= slots.len() {
            break;
        }
        let slot = slots[position];
        let structure = current.structure.with_u3_removed(slot)?;
        let offset = current
            .structure
            .param_offset_of(slot)
            .expect("slot is present");
        let mut warm = current.params.clone();
        warm.drain(offset..offset + 3);

        // Warm-start polish first; multistart only when it fails.
        let mut best = local_minimize(&structure, target, &warm, epsilon)?;
        if best.value > epsilon {
            let ms = MultistartConfig {
                rng_seed: multistart
                    .rng_seed
                    .wrapping_add(structure.content_hash()),
                ..multistart.clone()
            };
            let mut cost = CircuitCost::new(&structure, target)?;
            let (retry, runs) = multistart_cost(&mut cost, &ms, epsilon)?;
            multistart_runs.extend(runs);
            if retry.value < best.value {
                best = retry;
            }
        }
        if best.value <= epsilon {
            deleted.push(DeletionRecord {
                stage: CircuitStructure::stage_of(slot),
                slot,
            });
            current = PlacedCircuit::new(structure, best.params, target)?;
            // Same position now holds the next slot.
        } else {
            position += 1;
        }
    }
    debug_assert!(current.achieved_distance <= epsilon);
    debug_assert_eq!(
        current.structure.cnot_count(),
        circuit.structure.cnot_count()
    );
    Ok(ReductionReport {
        circuit: current,
        deleted,
        multistart_runs,
    })
}
