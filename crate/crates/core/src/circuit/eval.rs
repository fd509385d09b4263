//! Circuit evaluation: building the full-width unitary and computing the
//! distance objective with its analytic gradient.
//!
//! Gates are applied to an accumulator matrix through structured row
//! updates (cost per gate O(dim^2) instead of a dim^3 product). The
//! gradient pass reuses cached prefix products and a running suffix, so
//! the whole gradient costs O(G) structured sweeps for G placed gates.

use num_complex::Complex64;

use super::{CircuitStructure, PlacedGate, Slot};
use crate::error::{Error, Result};
use crate::gates::{gate_matrix, u3_entries, u3_grad_entries, GateKind};
use crate::matrix::{distance_from_trace, hs_overlap_raw, ComplexMatrix, UnitaryMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One placed gate with its workspace matrices.
struct GateWs {
    slot: Slot,
    kind: GateKind,
    param_offset: usize,
    mask_a: usize,
    mask_b: usize,
    /// 2x2 entries for single-qubit gates, refreshed per evaluation.
    mat2: [Complex64; 4],
    /// 4x4 entries for entanglers, fixed at construction.
    mat4: [Complex64; 16],
    /// U3 entrywise derivatives, refreshed when gradients are needed.
    grads: [[Complex64; 4]; 3],
}

/// A structure lowered to placed gates with reusable buffers.
pub(crate) struct LoweredCircuit {
    dim: usize,
    param_count: usize,
    gates: Vec<GateWs>,
}

impl LoweredCircuit {
    pub(crate) fn lower(structure: &CircuitStructure) -> Result<Self> {
        let n = structure.num_qubits();
        let dim = 1usize << n;
        let mask = |q: usize| 1usize << (n - 1 - q);
        let mut gates = Vec::new();
        for PlacedGate {
            slot,
            kind,
            param_offset,
        } in structure.placed_gates()
        {
            let (mask_a, mask_b) = match slot {
                Slot::One(q) => (mask(q), 0),
                Slot::Two(a, b) => (mask(a), mask(b)),
            };
            let mut ws = GateWs {
                slot,
                kind,
                param_offset,
                mask_a,
                mask_b,
                mat2: [ZERO; 4],
                mat4: [ZERO; 16],
                grads: [[ZERO; 4]; 3],
            };
            match slot {
                Slot::One(_) if kind == GateKind::Identity1 => {
                    ws.mat2 = [Complex64::new(1.0, 0.0), ZERO, ZERO, Complex64::new(1.0, 0.0)];
                }
                Slot::One(_) => {} // U3, filled per evaluation
                Slot::Two(..) => {
                    let m = gate_matrix(kind, &[])?;
                    ws.mat4.copy_from_slice(m.entries());
                }
            }
            gates.push(ws);
        }
        Ok(Self {
            dim,
            param_count: structure.param_count(),
            gates,
        })
    }

    pub(crate) fn param_count(&self) -> usize {
        self.param_count
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count {
            return Err(Error::Arity(format!(
                "structure takes {} parameters, got {}",
                self.param_count,
                params.len()
            )));
        }
        Ok(())
    }

    /// Refresh the parameterized gate matrices.
    fn fill(&mut self, params: &[f64], with_grads: bool) {
        for g in &mut self.gates {
            if g.kind == GateKind::U3 {
                let p = &params[g.param_offset..g.param_offset + 3];
                g.mat2 = u3_entries(p[0], p[1], p[2]);
                if with_grads {
                    g.grads = u3_grad_entries(p[0], p[1], p[2]);
                }
            }
        }
    }

    /// Left-multiply the accumulator by every gate in time order,
    /// optionally snapshotting the prefix product before each gate.
    fn product_into(&self, acc: &mut [Complex64], mut prefix: Option<&mut [Vec<Complex64>]>) {
        set_identity(acc, self.dim);
        for (idx, g) in self.gates.iter().enumerate() {
            if let Some(store) = prefix.as_deref_mut() {
                store[idx].copy_from_slice(acc);
            }
            apply_gate_left(acc, self.dim, g, false);
        }
    }
}

fn set_identity(buf: &mut [Complex64], dim: usize) {
    buf.fill(ZERO);
    for i in 0..dim {
        buf[i * dim + i] = Complex64::new(1.0, 0.0);
    }
}

fn apply_gate_left(buf: &mut [Complex64], dim: usize, g: &GateWs, transposed: bool) {
    match g.slot {
        Slot::One(_) => {
            let m = if transposed {
                [g.mat2[0], g.mat2[2], g.mat2[1], g.mat2[3]]
            } else {
                g.mat2
            };
            apply_left_1q(buf, dim, g.mask_a, &m);
        }
        Slot::Two(..) => {
            let mut m = g.mat4;
            if transposed {
                for i in 0..4 {
                    for j in (i + 1)..4 {
                        m.swap(i * 4 + j, j * 4 + i);
                    }
                }
            }
            apply_left_2q(buf, dim, g.mask_a, g.mask_b, &m);
        }
    }
}

/// buf <- embed(g on the masked qubit) * buf, mixing row pairs.
fn apply_left_1q(buf: &mut [Complex64], dim: usize, mask: usize, g: &[Complex64; 4]) {
    for base in 0..dim {
        if base & mask != 0 {
            continue;
        }
        let r0 = base * dim;
        let r1 = (base | mask) * dim;
        for col in 0..dim {
            let x0 = buf[r0 + col];
            let x1 = buf[r1 + col];
            buf[r0 + col] = g[0] * x0 + g[1] * x1;
            buf[r1 + col] = g[2] * x0 + g[3] * x1;
        }
    }
}

/// buf <- embed(g on the masked qubit pair) * buf. The first link qubit
/// (mask_a) is the high bit of the 4x4 block index.
fn apply_left_2q(
    buf: &mut [Complex64],
    dim: usize,
    mask_a: usize,
    mask_b: usize,
    g: &[Complex64; 16],
) {
    let both = mask_a | mask_b;
    for base in 0..dim {
        if base & both != 0 {
            continue;
        }
        let rows = [
            base * dim,
            (base | mask_b) * dim,
            (base | mask_a) * dim,
            (base | both) * dim,
        ];
        for col in 0..dim {
            let x = [
                buf[rows[0] + col],
                buf[rows[1] + col],
                buf[rows[2] + col],
                buf[rows[3] + col],
            ];
            for (k, &row) in rows.iter().enumerate() {
                buf[row + col] =
                    g[4 * k] * x[0] + g[4 * k + 1] * x[1] + g[4 * k + 2] * x[2] + g[4 * k + 3] * x[3];
            }
        }
    }
}

/// Evaluate a structure's unitary at the given parameters.
pub fn instantiate(structure: &CircuitStructure, params: &[f64]) -> Result<UnitaryMatrix> {
    let mut lowered = LoweredCircuit::lower(structure)?;
    lowered.check_params(params)?;
    lowered.fill(params, false);
    let mut acc = vec![ZERO; lowered.dim * lowered.dim];
    lowered.product_into(&mut acc, None);
    UnitaryMatrix::new(ComplexMatrix::new(lowered.dim, acc)?)
}

/// Reusable objective evaluator for one (structure, target) pair.
///
/// `value` runs the forward product only; `value_and_grad` additionally
/// computes the analytic gradient of the distance with respect to every
/// parameter. Both share the forward code path with `instantiate`, so the
/// objective value is bit-identical to `distance(instantiate(..), target)`.
pub struct CircuitEvaluator {
    lowered: LoweredCircuit,
    target: Vec<Complex64>,
    acc: Vec<Complex64>,
    rt: Vec<Complex64>,
    prefix: Vec<Vec<Complex64>>,
    evaluations: u64,
}

impl CircuitEvaluator {
    pub fn new(structure: &CircuitStructure, target: &UnitaryMatrix) -> Result<Self> {
        if structure.num_qubits() != target.num_qubits() {
            return Err(Error::Size(format!(
                "structure has {} qubits but target has {}",
                structure.num_qubits(),
                target.num_qubits()
            )));
        }
        let lowered = LoweredCircuit::lower(structure)?;
        let len = lowered.dim * lowered.dim;
        let prefix = (0..lowered.gates.len()).map(|_| vec![ZERO; len]).collect();
        Ok(Self {
            lowered,
            target: target.matrix().entries().to_vec(),
            acc: vec![ZERO; len],
            rt: vec![ZERO; len],
            prefix,
            evaluations: 0,
        })
    }

    pub fn param_count(&self) -> usize {
        self.lowered.param_count()
    }

    pub fn dim(&self) -> usize {
        self.lowered.dim
    }

    /// Objective evaluations performed so far (value or value+gradient).
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn value(&mut self, params: &[f64]) -> Result<f64> {
        self.lowered.check_params(params)?;
        self.evaluations += 1;
        self.lowered.fill(params, false);
        self.lowered.product_into(&mut self.acc, None);
        let trace = hs_overlap_raw(&self.target, &self.acc);
        Ok(distance_from_trace(trace, self.lowered.dim))
    }

    /// Distance and gradient. `grad` must have param_count entries.
    pub fn value_and_grad(&mut self, params: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.lowered.check_params(params)?;
        assert_eq!(grad.len(), self.lowered.param_count());
        self.evaluations += 1;
        self.lowered.fill(params, true);
        self.lowered.product_into(&mut self.acc, Some(&mut self.prefix));
        let dim = self.lowered.dim;
        let trace = hs_overlap_raw(&self.target, &self.acc);
        let value = distance_from_trace(trace, dim);

        // d distance / dp = -Re(conj(T) dT/dp) / (dim |T|).
        let tnorm = trace.norm();
        if tnorm < 1e-300 {
            grad.fill(0.0);
            return Ok(value);
        }
        let coeff = -1.0 / (dim as f64 * tnorm);

        // rt holds transpose(U^dag B_g), updated right-to-left; for gate g,
        // dT/dp = Tr(Mred grad_p) with Mred the slot reduction of A_g U^dag B_g.
        for (z, u) in self.rt.iter_mut().zip(self.target.iter()) {
            *z = u.conj();
        }
        for idx in (0..self.lowered.gates.len()).rev() {
            let g = &self.lowered.gates[idx];
            if g.kind == GateKind::U3 {
                let mred = reduce_1q(&self.prefix[idx], &self.rt, dim, g.mask_a);
                for (k, dg) in g.grads.iter().enumerate() {
                    // Tr(Mred dG) = sum_uv Mred[u,v] dG[v,u]
                    let dt = mred[0] * dg[0]
                        + mred[1] * dg[2]
                        + mred[2] * dg[1]
                        + mred[3] * dg[3];
                    grad[g.param_offset + k] = coeff * (trace.conj() * dt).re;
                }
            }
            apply_gate_left(&mut self.rt, dim, g, true);
        }
        Ok(value)
    }
}

/// Row-major 2x2 reduction Mred[i,j] = sum_r <A[(r,i),:], RT[(r,j),:]>.
fn reduce_1q(a: &[Complex64], rt: &[Complex64], dim: usize, mask: usize) -> [Complex64; 4] {
    let mut m = [ZERO; 4];
    for base in 0..dim {
        if base & mask != 0 {
            continue;
        }
        let a0 = &a[base * dim..base * dim + dim];
        let a1 = &a[(base | mask) * dim..(base | mask) * dim + dim];
        let r0 = &rt[base * dim..base * dim + dim];
        let r1 = &rt[(base | mask) * dim..(base | mask) * dim + dim];
        for z in 0..dim {
            m[0] += a0[z] * r0[z];
            m[1] += a0[z] * r1[z];
            m[2] += a1[z] * r0[z];
            m[3] += a1[z] * r1[z];
        }
    }
    m
}

/// Distance objective and its gradient for a parameter vector.
pub fn objective_and_gradient(
    structure: &CircuitStructure,
    params: &[f64],
    target: &UnitaryMatrix,
) -> Result<(f64, Vec<f64>)> {
    let mut eval = CircuitEvaluator::new(structure, target)?;
    let mut grad = vec![0.0; structure.param_count()];
    let value = eval.value_and_grad(params, &mut grad)?;
    Ok((value, grad))
}
