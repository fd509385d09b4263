//! Built-in target-unitary generators, so synthesis runs are
//! self-contained: QFT, the classic reversible gates, and transverse-field
//! Ising time evolution.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matrix::{matrix_exp_hermitian, ComplexMatrix, UnitaryMatrix, MAX_QUBITS};

/// A named target with optional numeric parameters (e.g. TFIM J, h, t).
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkSpec {
    pub name: String,
    pub num_qubits: usize,
    pub parameters: BTreeMap<String, f64>,
}

impl BenchmarkSpec {
    /// Parse CLI-style names: `toffoli`, `fredkin`, `peres`, `or`,
    /// `cnot`, `qft3`, `identity4`, `tfim3`.
    pub fn parse(text: &str) -> Result<Self> {
        let name = text.trim().to_ascii_lowercase();
        let fixed = |name: &str, n: usize| BenchmarkSpec {
            name: name.to_string(),
            num_qubits: n,
            parameters: BTreeMap::new(),
        };
        let sized = |prefix: &str, rest: &str| -> Result<usize> {
            let n: usize = rest
                .parse()
                .map_err(|_| Error::UnknownBenchmark(format!("{prefix}{rest}")))?;
            if n == 0 || n > MAX_QUBITS {
                return Err(Error::Size(format!(
                    "{prefix} size {n} out of range 1..={MAX_QUBITS}"
                )));
            }
            Ok(n)
        };
        match name.as_str() {
            "toffoli" => Ok(fixed("toffoli", 3)),
            "fredkin" => Ok(fixed("fredkin", 3)),
            "peres" => Ok(fixed("peres", 3)),
            "or" | "logical_or" => Ok(fixed("logical_or", 3)),
            "cnot" => Ok(fixed("cnot", 2)),
            _ => {
                if let Some(rest) = name.strip_prefix("qft") {
                    Ok(fixed("qft", sized("qft", rest)?))
                } else if let Some(rest) = name.strip_prefix("identity") {
                    Ok(fixed("identity", sized("identity", rest)?))
                } else if let Some(rest) = name.strip_prefix("tfim") {
                    let mut spec = fixed("tfim", sized("tfim", rest)?);
                    spec.parameters.insert("j".into(), 1.0);
                    spec.parameters.insert("h".into(), 1.0);
                    spec.parameters.insert("t".into(), 1.0);
                    Ok(spec)
                } else {
                    Err(Error::UnknownBenchmark(name))
                }
            }
        }
    }

    pub fn with_parameter(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }
}

/// Produce the target unitary for a benchmark spec.
pub fn generate(spec: &BenchmarkSpec) -> Result<UnitaryMatrix> {
    match spec.name.as_str() {
        "qft" => qft(spec.num_qubits),
        "identity" => UnitaryMatrix::identity(spec.num_qubits),
        "toffoli" => Ok(toffoli()),
        "fredkin" => Ok(fredkin()),
        "peres" => Ok(peres()),
        "logical_or" => Ok(logical_or()),
        "cnot" => {
            let m = crate::gates::gate_matrix(crate::gates::GateKind::Cnot, &[])?;
            UnitaryMatrix::new(m)
        }
        "tfim" => {
            let get = |key: &str, default: f64| spec.parameters.get(key).copied().unwrap_or(default);
            let steps = spec.parameters.get("steps").map(|&s| s as usize);
            tfim(
                spec.num_qubits,
                get("j", 1.0),
                get("h", 1.0),
                get("t", 1.0),
                steps,
            )
        }
        other => Err(Error::UnknownBenchmark(other.to_string())),
    }
}

/// The DFT matrix with entries omega^{jk} / sqrt(2^n).
pub fn qft(num_qubits: usize) -> Result<UnitaryMatrix> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::Size(format!(
            "qft size {num_qubits} out of range 1..={MAX_QUBITS}"
        )));
    }
    let dim = 1usize << num_qubits;
    let norm = 1.0 / (dim as f64).sqrt();
    let mut m = ComplexMatrix::zeros(dim);
    for j in 0..dim {
        for k in 0..dim {
            let angle = 2.0 * PI * ((j * k) % dim) as f64 / dim as f64;
            m[(j, k)] = Complex64::from_polar(norm, angle);
        }
    }
    UnitaryMatrix::new(m)
}

/// Permutation unitary from a basis-state map. Qubit 0 is the most
/// significant bit of the basis index.
fn permutation(num_qubits: usize, map: impl Fn(usize) -> usize) -> UnitaryMatrix {
    let dim = 1usize << num_qubits;
    let mut m = ComplexMatrix::zeros(dim);
    for x in 0..dim {
        m[(map(x), x)] = Complex64::new(1.0, 0.0);
    }
    UnitaryMatrix::new(m).expect("permutation matrices are unitary")
}

/// Flips the target (qubit 2) when both controls (qubits 0, 1) are set.
pub fn toffoli() -> UnitaryMatrix {
    permutation(3, |x| if x & 0b110 == 0b110 { x ^ 1 } else { x })
}

/// Swaps qubits 1 and 2 when the control (qubit 0) is set.
pub fn fredkin() -> UnitaryMatrix {
    permutation(3, |x| {
        if x & 0b100 != 0 {
            let (b, c) = ((x >> 1) & 1, x & 1);
            (x & 0b100) | (c << 1) | b
        } else {
            x
        }
    })
}

/// (a, b, c) -> (a, a xor b, ab xor c).
pub fn peres() -> UnitaryMatrix {
    permutation(3, |x| {
        let (a, b, c) = ((x >> 2) & 1, (x >> 1) & 1, x & 1);
        (a << 2) | ((a ^ b) << 1) | ((a & b) ^ c)
    })
}

/// (a, b, c) -> (a, b, c xor (a or b)).
pub fn logical_or() -> UnitaryMatrix {
    permutation(3, |x| {
        let (a, b) = ((x >> 2) & 1, (x >> 1) & 1);
        x ^ (a | b)
    })
}

/// Transverse-field Ising Hamiltonian on a chain:
/// H = -J sum Z_i Z_{i+1} - h sum X_i.
pub fn tfim_hamiltonian(num_qubits: usize, j: f64, h: f64) -> ComplexMatrix {
    let dim = 1usize << num_qubits;
    let mut ham = ComplexMatrix::zeros(dim);
    let sign = |x: usize, q: usize| -> f64 {
        if x >> (num_qubits - 1 - q) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    for x in 0..dim {
        let mut zz = 0.0;
        for q in 0..num_qubits.saturating_sub(1) {
            zz += sign(x, q) * sign(x, q + 1);
        }
        ham[(x, x)] = Complex64::new(-j * zz, 0.0);
        for q in 0..num_qubits {
            let y = x ^ (1 << (num_qubits - 1 - q));
            ham[(y, x)] += Complex64::new(-h, 0.0);
        }
    }
    ham
}

/// Time evolution exp(-i H t) of the transverse-field Ising chain.
/// With `steps`, returns the second-order Trotter product instead of the
/// exact exponential.
pub fn tfim(num_qubits: usize, j: f64, h: f64, t: f64, steps: Option<usize>) -> Result<UnitaryMatrix> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::Size(format!(
            "tfim size {num_qubits} out of range 1..={MAX_QUBITS}"
        )));
    }
    match steps {
        None | Some(0) => matrix_exp_hermitian(&tfim_hamiltonian(num_qubits, j, h), t),
        Some(steps) => {
            let dt = t / steps as f64;
            let zz = matrix_exp_hermitian(&tfim_hamiltonian(num_qubits, j, 0.0), dt / 2.0)?;
            let xs = matrix_exp_hermitian(&tfim_hamiltonian(num_qubits, 0.0, h), dt)?;
            let step = zz.matrix().matmul(xs.matrix())?.matmul(zz.matrix())?;
            let mut acc = ComplexMatrix::identity(1 << num_qubits);
            for _ in 0..steps {
                acc = step.matmul(&acc)?;
            }
            UnitaryMatrix::new(acc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qft2_closed_form() {
        let u = qft(2).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let expect = [
            [one, one, one, one],
            [one, i, -one, -i],
            [one, -one, one, -one],
            [one, -i, -one, i],
        ];
        for r in 0..4 {
            for c in 0..4 {
                assert!((u.matrix()[(r, c)] - expect[r][c] * 0.5).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn toffoli_truth_table() {
        let u = toffoli();
        for x in 0..8usize {
            let want = if x >= 6 { x ^ 1 } else { x };
            for y in 0..8 {
                let expect = if y == want { 1.0 } else { 0.0 };
                assert_eq!(u.matrix()[(y, x)], Complex64::new(expect, 0.0));
            }
        }
    }

    /// Truth-table simulator oracle over all basis states.
    fn check_permutation(u: &UnitaryMatrix, f: impl Fn(usize, usize, usize) -> (usize, usize, usize)) {
        for x in 0..8usize {
            let (a, b, c) = ((x >> 2) & 1, (x >> 1) & 1, x & 1);
            let (a2, b2, c2) = f(a, b, c);
            let want = (a2 << 2) | (b2 << 1) | c2;
            for y in 0..8 {
                let expect = if y == want { 1.0 } else { 0.0 };
                assert_eq!(u.matrix()[(y, x)], Complex64::new(expect, 0.0), "x={x} y={y}");
            }
        }
    }

    #[test]
    fn permutation_gates_match_truth_tables() {
        check_permutation(&toffoli(), |a, b, c| (a, b, (a & b) ^ c));
        check_permutation(&fredkin(), |a, b, c| if a == 1 { (a, c, b) } else { (a, b, c) });
        check_permutation(&peres(), |a, b, c| (a, a ^ b, (a & b) ^ c));
        check_permutation(&logical_or(), |a, b, c| (a, b, c ^ (a | b)));
    }

    #[test]
    fn tfim_exact_is_unitary() {
        for t in [0.3, 1.0, 2.7] {
            let u = tfim(3, 1.0, 1.0, t, None).unwrap();
            assert!(u.matrix().unitarity_defect() < 1e-9);
        }
    }

    /// Second-order Trotter oracle built from closed forms only: the ZZ
    /// part is diagonal phases, the X part is a tensor product of
    /// single-site rotations cos(h dt) I + i sin(h dt) X.
    fn trotter_oracle(n: usize, j: f64, h: f64, t: f64, steps: usize) -> ComplexMatrix {
        let dim = 1usize << n;
        let dt = t / steps as f64;
        let sign = |x: usize, q: usize| if x >> (n - 1 - q) & 1 == 0 { 1.0 } else { -1.0 };
        let mut zz_half = ComplexMatrix::zeros(dim);
        for x in 0..dim {
            let mut e = 0.0;
            for q in 0..n - 1 {
                e += -j * sign(x, q) * sign(x, q + 1);
            }
            zz_half[(x, x)] = Complex64::from_polar(1.0, -e * dt / 2.0);
        }
        let site = ComplexMatrix::new(
            2,
            vec![
                Complex64::new((h * dt).cos(), 0.0),
                Complex64::new(0.0, (h * dt).sin()),
                Complex64::new(0.0, (h * dt).sin()),
                Complex64::new((h * dt).cos(), 0.0),
            ],
        )
        .unwrap();
        let mut xs = site.clone();
        for _ in 1..n {
            xs = xs.kron(&site).unwrap();
        }
        let step = zz_half.matmul(&xs).unwrap().matmul(&zz_half).unwrap();
        let mut acc = ComplexMatrix::identity(dim);
        for _ in 0..steps {
            acc = step.matmul(&acc).unwrap();
        }
        acc
    }

    #[test]
    fn tfim_matches_trotter_oracle() {
        let exact = tfim(3, 1.0, 1.0, 0.9, None).unwrap();
        let approx = trotter_oracle(3, 1.0, 1.0, 0.9, 1000);
        assert!(exact.matrix().max_abs_diff(&approx) < 1e-4);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(BenchmarkSpec::parse("qft3").unwrap().num_qubits, 3);
        assert_eq!(BenchmarkSpec::parse("Toffoli").unwrap().name, "toffoli");
        assert_eq!(BenchmarkSpec::parse("identity4").unwrap().num_qubits, 4);
        let tf = BenchmarkSpec::parse("tfim3").unwrap();
        assert_eq!(tf.parameters["t"], 1.0);
        assert!(matches!(
            BenchmarkSpec::parse("grover3"),
            Err(Error::UnknownBenchmark(_))
        ));
        assert!(BenchmarkSpec::parse("qft9").is_err());
    }

    #[test]
    fn generate_dispatches() {
        let u = generate(&BenchmarkSpec::parse("identity3").unwrap()).unwrap();
        assert_eq!(u.num_qubits(), 3);
        let u = generate(&BenchmarkSpec::parse("cnot").unwrap()).unwrap();
        assert_eq!(u.num_qubits(), 2);
        let spec = BenchmarkSpec::parse("tfim2").unwrap().with_parameter("t", 2.0);
        assert!(generate(&spec).is_ok());
    }
}
