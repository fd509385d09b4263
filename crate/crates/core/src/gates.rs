//! Gate definitions: the parameterized U3 single-qubit gate and the fixed
//! two-qubit entangler family, with analytic parameter derivatives.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    /// General single-qubit rotation with angles (theta, phi, lambda).
    U3,
    Cnot,
    Iswap,
    /// Principal square root of CNOT.
    Sqcnot,
    /// Principal square root of iSWAP.
    Sqisw,
    Identity1,
}

impl GateKind {
    pub fn param_count(self) -> usize {
        match self {
            GateKind::U3 => 3,
            _ => 0,
        }
    }

    pub fn num_qubits(self) -> usize {
        match self {
            GateKind::U3 | GateKind::Identity1 => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::U3 => "u3",
            GateKind::Cnot => "cnot",
            GateKind::Iswap => "iswap",
            GateKind::Sqcnot => "sqcnot",
            GateKind::Sqisw => "sqisw",
            GateKind::Identity1 => "id",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "u3" => Ok(GateKind::U3),
            "cnot" | "cx" => Ok(GateKind::Cnot),
            "iswap" => Ok(GateKind::Iswap),
            "sqcnot" | "csx" => Ok(GateKind::Sqcnot),
            "sqisw" | "sqiswap" => Ok(GateKind::Sqisw),
            "id" | "identity1" => Ok(GateKind::Identity1),
            other => Err(Error::Parse(format!("unknown gate kind '{other}'"))),
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Row-major 2x2 entries of U3(theta, phi, lambda).
pub(crate) fn u3_entries(theta: f64, phi: f64, lambda: f64) -> [Complex64; 4] {
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e_l = Complex64::from_polar(1.0, lambda);
    let e_p = Complex64::from_polar(1.0, phi);
    [c(ct, 0.0), -e_l * st, e_p * st, e_l * e_p * ct]
}

/// Entrywise derivatives of u3_entries, per parameter.
pub(crate) fn u3_grad_entries(theta: f64, phi: f64, lambda: f64) -> [[Complex64; 4]; 3] {
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e_l = Complex64::from_polar(1.0, lambda);
    let e_p = Complex64::from_polar(1.0, phi);
    let i = c(0.0, 1.0);
    let zero = c(0.0, 0.0);
    [
        [
            c(-st / 2.0, 0.0),
            -e_l * (ct / 2.0),
            e_p * (ct / 2.0),
            -e_l * e_p * (st / 2.0),
        ],
        [zero, zero, i * e_p * st, i * e_l * e_p * ct],
        [zero, -i * e_l * st, zero, i * e_l * e_p * ct],
    ]
}

fn matrix_from_entries(dim: usize, entries: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::new(dim, entries.to_vec()).expect("static gate entries are valid")
}

fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> ComplexMatrix {
    matrix_from_entries(2, &u3_entries(theta, phi, lambda))
}

fn u3_gradient(theta: f64, phi: f64, lambda: f64) -> Vec<ComplexMatrix> {
    u3_grad_entries(theta, phi, lambda)
        .iter()
        .map(|g| matrix_from_entries(2, g))
        .collect()
}

fn cnot_matrix() -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(4);
    m[(2, 2)] = c(0., 0.);
    m[(3, 3)] = c(0., 0.);
    m[(2, 3)] = c(1., 0.);
    m[(3, 2)] = c(1., 0.);
    m
}

fn iswap_matrix() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4);
    m[(0, 0)] = c(1., 0.);
    m[(1, 2)] = c(0., 1.);
    m[(2, 1)] = c(0., 1.);
    m[(3, 3)] = c(1., 0.);
    m
}

// Principal square roots in closed form: CNOT's lower block is X with
// sqrt(X) = [[1+i, 1-i], [1-i, 1+i]]/2, and iSWAP's central block is iX
// with sqrt(iX) = [[1, i], [i, 1]]/sqrt(2).
fn sqcnot_matrix() -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(4);
    m[(2, 2)] = c(0.5, 0.5);
    m[(2, 3)] = c(0.5, -0.5);
    m[(3, 2)] = c(0.5, -0.5);
    m[(3, 3)] = c(0.5, 0.5);
    m
}

fn sqisw_matrix() -> ComplexMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = ComplexMatrix::zeros(4);
    m[(0, 0)] = c(1., 0.);
    m[(1, 1)] = c(r, 0.);
    m[(1, 2)] = c(0., r);
    m[(2, 1)] = c(0., r);
    m[(2, 2)] = c(r, 0.);
    m[(3, 3)] = c(1., 0.);
    m
}

/// The gate's matrix: 2x2 for single-qubit kinds, 4x4 for entanglers.
/// For two-qubit blocks the first qubit of the link is the high-order
/// bit of the block index (and the control for CNOT-family gates).
pub fn gate_matrix(kind: GateKind, params: &[f64]) -> Result<ComplexMatrix> {
    check_arity(kind, params)?;
    Ok(match kind {
        GateKind::U3 => u3_matrix(params[0], params[1], params[2]),
        GateKind::Cnot => cnot_matrix(),
        GateKind::Iswap => iswap_matrix(),
        GateKind::Sqcnot => sqcnot_matrix(),
        GateKind::Sqisw => sqisw_matrix(),
        GateKind::Identity1 => ComplexMatrix::identity(2),
    })
}

/// Partial derivative matrices, one per parameter; empty for fixed gates.
pub fn gate_gradient(kind: GateKind, params: &[f64]) -> Result<Vec<ComplexMatrix>> {
    check_arity(kind, params)?;
    Ok(match kind {
        GateKind::U3 => u3_gradient(params[0], params[1], params[2]),
        _ => Vec::new(),
    })
}

fn check_arity(kind: GateKind, params: &[f64]) -> Result<()> {
    if params.len() != kind.param_count() {
        return Err(Error::Arity(format!(
            "{} takes {} parameters, got {}",
            kind.name(),
            kind.param_count(),
            params.len()
        )));
    }
    Ok(())
}

/// The two-qubit gate kinds the search may place, in placement order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntanglerSet {
    kinds: Vec<GateKind>,
}

impl EntanglerSet {
    pub fn new(kinds: Vec<GateKind>) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::Config("entangler set must be non-empty".into()));
        }
        for (i, k) in kinds.iter().enumerate() {
            if k.num_qubits() != 2 {
                return Err(Error::Config(format!(
                    "{} is not a two-qubit gate",
                    k.name()
                )));
            }
            if kinds[..i].contains(k) {
                return Err(Error::Config(format!(
                    "duplicate entangler '{}'",
                    k.name()
                )));
            }
        }
        Ok(Self { kinds })
    }

    /// Parse a comma-separated list such as "cnot" or "cnot,iswap".
    pub fn parse(text: &str) -> Result<Self> {
        let kinds = text
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(GateKind::from_name)
            .collect::<Result<Vec<_>>>()?;
        Self::new(kinds)
    }

    pub fn kinds(&self) -> &[GateKind] {
        &self.kinds
    }
}

impl Default for EntanglerSet {
    fn default() -> Self {
        Self {
            kinds: vec![GateKind::Cnot],
        }
    }
}
