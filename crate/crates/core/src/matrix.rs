//! Dense complex matrices sized for few-qubit unitaries (dim <= 128),
//! plus the Hilbert-Schmidt overlap and the phase-invariant distance
//! used as the synthesis objective everywhere in this crate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// Largest supported register.
pub const MAX_QUBITS: usize = 7;
/// Largest supported matrix dimension (2^MAX_QUBITS).
pub const MAX_DIM: usize = 1 << MAX_QUBITS;

/// Tolerance for the unitarity check on construction.
pub const UNITARY_TOL: f64 = 1e-10;

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    /// Build from row-major entries. Checks the length and that every
    /// entry is finite.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Size("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::Size(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                dim * dim,
                dim,
                dim,
                entries.len()
            )));
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Validation("matrix entry is NaN or infinite".into()));
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    /// Tensor product. Errors once the result would exceed the supported
    /// dimension cap.
    pub fn kron(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        let dim = self
            .dim
            .checked_mul(other.dim)
            .filter(|&d| d <= MAX_DIM)
            .ok_or_else(|| {
                Error::Size(format!(
                    "tensor product dimension {}x{} exceeds the {} cap",
                    self.dim, other.dim, MAX_DIM
                ))
            })?;
        let mut out = ComplexMatrix::zeros(dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self[(i, j)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..other.dim {
                    let ro = (i * other.dim + k) * dim + j * other.dim;
                    let bo = k * other.dim;
                    for l in 0..other.dim {
                        out.entries[ro + l] = a * other.entries[bo + l];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix product of two equal-size square matrices.
    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.dim != other.dim {
            return Err(Error::Size(format!(
                "cannot multiply {}x{} by {}x{}",
                self.dim, self.dim, other.dim, other.dim
            )));
        }
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        // ikj loop order keeps the inner walk contiguous in both operands.
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let brow = &other.entries[k * n..(k + 1) * n];
                let orow = &mut out.entries[i * n..(i + 1) * n];
                for j in 0..n {
                    orow[j] += a * brow[j];
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        out
    }

    /// Largest elementwise absolute difference.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff on mismatched dims");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-norm of U^dag U - I.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.entries[k * n + i].conj() * self.entries[k * n + j];
                }
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Max-norm of A - A^dag.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = self.entries[i * n + j] - self.entries[j * n + i].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

/// A validated unitary on a whole-number of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
    num_qubits: usize,
}

impl UnitaryMatrix {
    /// Wrap a matrix, checking that its dimension is a power of two within
    /// the qubit cap and that it is unitary to `UNITARY_TOL`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dim = matrix.dim();
        let num_qubits = (dim.trailing_zeros()) as usize;
        if dim == 0 || dim != (1usize << num_qubits) || num_qubits == 0 && dim != 2 {
            return Err(Error::Size(format!(
                "unitary dimension {dim} is not a power of two"
            )));
        }
        if num_qubits > MAX_QUBITS {
            return Err(Error::Size(format!(
                "{num_qubits} qubits exceeds the supported maximum of {MAX_QUBITS}"
            )));
        }
        let defect = matrix.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::Validation(format!(
                "matrix is not unitary (defect {defect:.3e} > {UNITARY_TOL:.0e})"
            )));
        }
        Ok(Self { matrix, num_qubits })
    }

    pub fn identity(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Size(format!(
                "qubit count {num_qubits} out of range 1..={MAX_QUBITS}"
            )));
        }
        Ok(Self {
            matrix: ComplexMatrix::identity(1 << num_qubits),
            num_qubits,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// Hilbert-Schmidt overlap Tr(U^dag V), accumulated entrywise without
/// forming the product matrix.
pub fn hs_overlap(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<Complex64> {
    if u.num_qubits() != v.num_qubits() {
        return Err(Error::Size(format!(
            "overlap of {}-qubit and {}-qubit unitaries",
            u.num_qubits(),
            v.num_qubits()
        )));
    }
    Ok(hs_overlap_raw(
        u.matrix().entries(),
        v.matrix().entries(),
    ))
}

/// Tr(U^dag V) = sum_ij conj(U[j,i]) V[j,i] on raw equal-length buffers.
pub(crate) fn hs_overlap_raw(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in u.iter().zip(v.iter()) {
        acc += a.conj() * b;
    }
    acc
}

/// Phase-invariant distance 1 - |Tr(U^dag V)| / 2^n, in [0, 1].
///
/// Zero exactly when V equals U up to a global phase; this is the single
/// objective and convergence metric used by the whole pipeline.
pub fn distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    let tr = hs_overlap(u, v)?;
    Ok(distance_from_trace(tr, u.dim()))
}

pub(crate) fn distance_from_trace(trace: Complex64, dim: usize) -> f64 {
    (1.0 - trace.norm() / dim as f64).clamp(0.0, 1.0)
}

/// exp(-i t H) for Hermitian H, via a Jacobi eigendecomposition.
pub fn matrix_exp_hermitian(h: &ComplexMatrix, t: f64) -> Result<UnitaryMatrix> {
    let defect = h.hermiticity_defect();
    if defect > 1e-10 {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (defect {defect:.3e})"
        )));
    }
    let (eigvals, eigvecs) = jacobi_hermitian_eig(h);
    let n = h.dim();
    // V diag(exp(-i t lambda)) V^dag
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                let phase = Complex64::from_polar(1.0, -t * eigvals[k]);
                acc += eigvecs[(i, k)] * phase * eigvecs[(j, k)].conj();
            }
            out[(i, j)] = acc;
        }
    }
    UnitaryMatrix::new(out)
}

/// Cyclic Jacobi sweeps for a complex Hermitian matrix. Returns
/// (eigenvalues, eigenvector columns). Plenty for dim <= 128.
fn jacobi_hermitian_eig(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = h.dim();
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale: f64 = a
        .entries()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1.0);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b <= 1e-300 {
                    continue;
                }
                // Phase that makes the pivot real, then a real rotation.
                let phase = apq / b;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * b);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Column rotation: J has J[p,p]=c, J[q,q]=c,
                // J[p,q]=s*phase, J[q,p]=-s*conj(phase).
                let jpq = phase * s;
                let jqp = -phase.conj() * s;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * jqp.conj();
                    a[(q, k)] = apk * jpq.conj() + aqk * c;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * c;
                }
            }
        }
    }
    let eig = (0..n).map(|i| a[(i, i)].re).collect();
    (eig, v)
}

#[derive(Serialize, Deserialize)]
struct UnitaryFile {
    num_qubits: usize,
    real: Vec<Vec<f64>>,
    imag: Vec<Vec<f64>>,
}

/// Parse the JSON target-unitary format:
/// `{ "num_qubits": n, "real": [[...]], "imag": [[...]] }`.
pub fn unitary_from_json(text: &str) -> Result<UnitaryMatrix> {
    let file: UnitaryFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("unitary JSON: {e}")))?;
    if file.num_qubits == 0 || file.num_qubits > MAX_QUBITS {
        return Err(Error::Size(format!(
            "num_qubits {} out of range 1..={MAX_QUBITS}",
            file.num_qubits
        )));
    }
    let dim = 1usize << file.num_qubits;
    let check_shape = |name: &str, rows: &Vec<Vec<f64>>| -> Result<()> {
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Parse(format!(
                "'{name}' must be a {dim}x{dim} nested array"
            )));
        }
        Ok(())
    };
    check_shape("real", &file.real)?;
    check_shape("imag", &file.imag)?;
    let mut entries = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            entries.push(Complex64::new(file.real[i][j], file.imag[i][j]));
        }
    }
    UnitaryMatrix::new(ComplexMatrix::new(dim, entries)?)
}

pub fn unitary_to_json(u: &UnitaryMatrix) -> String {
    let dim = u.dim();
    let mut real = vec![vec![0.0; dim]; dim];
    let mut imag = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            let z = u.matrix()[(i, j)];
            real[i][j] = z.re;
            imag[i][j] = z.im;
        }
    }
    serde_json::to_string_pretty(&UnitaryFile {
        num_qubits: u.num_qubits(),
        real,
        imag,
    })
    .expect("unitary serialization cannot fail")
}

pub fn read_unitary_file(path: &Path) -> Result<UnitaryMatrix> {
    let text = std::fs::read_to_string(path)?;
    unitary_from_json(&text)
}

pub fn write_unitary_file(path: &Path, u: &UnitaryMatrix) -> Result<()> {
    std::fs::write(path, unitary_to_json(u))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::new(2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap()
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::new(2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]).unwrap()
    }

    fn random_matrix(dim: usize, seed: u64) -> ComplexMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let entries = (0..dim * dim)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::new(dim, entries).unwrap()
    }

    /// Textbook triple-loop product, kept independent of matmul's loop order.
    fn naive_matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        let n = a.dim();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = c(0., 0.);
                for k in 0..n {
                    acc += a[(i, k)] * b[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        let i4 = ComplexMatrix::identity(4);
        assert_eq!(i2.kron(&i2).unwrap(), i4);
    }

    #[test]
    fn kron_permutation_structure() {
        let x = pauli_x();
        let i2 = ComplexMatrix::identity(2);
        let m = x.kron(&i2).unwrap();
        for (i, j) in [(0, 2), (1, 3), (2, 0), (3, 1)] {
            assert_eq!(m[(i, j)], c(1., 0.));
        }
        assert_eq!(
            m.entries().iter().filter(|z| z.norm() > 0.0).count(),
            4
        );
    }

    #[test]
    fn kron_mixed_product_rule() {
        for seed in 0..5 {
            let a = random_matrix(2, seed);
            let b = random_matrix(2, seed + 100);
            let cm = random_matrix(2, seed + 200);
            let d = random_matrix(2, seed + 300);
            let lhs = a.kron(&b).unwrap().matmul(&cm.kron(&d).unwrap()).unwrap();
            let rhs = a.matmul(&cm).unwrap().kron(&b.matmul(&d).unwrap()).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn kron_overflow_is_size_error() {
        let big = ComplexMatrix::identity(64);
        let err = big.kron(&ComplexMatrix::identity(4)).unwrap_err();
        assert!(matches!(err, Error::Size(_)));
    }

    #[test]
    fn matmul_identity_and_involution() {
        let x = pauli_x();
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.matmul(&x).unwrap(), x);
        assert!(x.matmul(&x).unwrap().max_abs_diff(&i2) == 0.0);
    }

    #[test]
    fn matmul_matches_naive_oracle() {
        for seed in 0..5 {
            let a = random_matrix(4, seed);
            let b = random_matrix(4, seed + 1000);
            let got = a.matmul(&b).unwrap();
            let want = naive_matmul(&a, &b);
            assert!(got.max_abs_diff(&want) < 1e-12);
        }
    }

    #[test]
    fn matmul_dim_mismatch() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(4);
        assert!(matches!(a.matmul(&b), Err(Error::Size(_))));
    }

    #[test]
    fn dagger_involution_and_conjugation() {
        let a = random_matrix(4, 7);
        assert_eq!(a.dagger().dagger(), a);
        assert_eq!(ComplexMatrix::identity(3).dagger(), ComplexMatrix::identity(3));
        let a = random_matrix(3, 8);
        assert_eq!(a.dagger()[(0, 2)], a[(2, 0)].conj());
    }

    #[test]
    fn cnot_is_unitary() {
        let cnot = crate::gates::gate_matrix(crate::gates::GateKind::Cnot, &[]).unwrap();
        let prod = cnot.dagger().matmul(&cnot).unwrap();
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn overlap_trivial_values() {
        let i1 = UnitaryMatrix::identity(1).unwrap();
        assert_eq!(hs_overlap(&i1, &i1).unwrap(), c(2., 0.));
        let x = UnitaryMatrix::new(pauli_x()).unwrap();
        assert_eq!(hs_overlap(&i1, &x).unwrap(), c(0., 0.));
    }

    #[test]
    fn overlap_of_unitary_with_itself_is_dim() {
        let u = matrix_exp_hermitian(&random_hermitian(8, 3), 0.7).unwrap();
        let tr = hs_overlap(&u, &u).unwrap();
        assert!((tr - c(8., 0.)).norm() < 1e-9);
    }

    #[test]
    fn overlap_matches_product_trace() {
        let u = matrix_exp_hermitian(&random_hermitian(4, 11), 1.3).unwrap();
        let v = matrix_exp_hermitian(&random_hermitian(4, 12), 0.4).unwrap();
        let prod = u.matrix().dagger().matmul(v.matrix()).unwrap();
        let mut tr = c(0., 0.);
        for i in 0..4 {
            tr += prod[(i, i)];
        }
        assert!((hs_overlap(&u, &v).unwrap() - tr).norm() < 1e-12);
    }

    fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
        let a = random_matrix(dim, seed);
        let mut h = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                h[(i, j)] = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            }
        }
        h
    }

    #[test]
    fn distance_properties() {
        let u = matrix_exp_hermitian(&random_hermitian(8, 21), 0.9).unwrap();
        assert_eq!(distance(&u, &u).unwrap(), 0.0);
        // Global phase invariance.
        let phase = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let mut rotated = u.matrix().clone();
        for z in rotated.entries_mut() {
            *z *= phase;
        }
        let v = UnitaryMatrix::new(rotated).unwrap();
        assert!(distance(&u, &v).unwrap() < 1e-12);

        let i1 = UnitaryMatrix::identity(1).unwrap();
        let x = UnitaryMatrix::new(pauli_x()).unwrap();
        assert_eq!(distance(&i1, &x).unwrap(), 1.0);
    }

    #[test]
    fn distance_symmetry() {
        let u = matrix_exp_hermitian(&random_hermitian(4, 31), 0.8).unwrap();
        let v = matrix_exp_hermitian(&random_hermitian(4, 32), 1.1).unwrap();
        let duv = distance(&u, &v).unwrap();
        let dvu = distance(&v, &u).unwrap();
        assert!((duv - dvu).abs() < 1e-15);
        assert!((0.0..=1.0).contains(&duv));
    }

    #[test]
    fn exp_hermitian_at_zero_is_identity() {
        let h = random_hermitian(8, 41);
        let u = matrix_exp_hermitian(&h, 0.0).unwrap();
        assert!(u.matrix().max_abs_diff(&ComplexMatrix::identity(8)) < 1e-12);
    }

    #[test]
    fn exp_of_pauli_z_closed_form() {
        // exp(-i pi Z) = diag(e^{-i pi}, e^{i pi}) = -I.
        let u = matrix_exp_hermitian(&pauli_z(), std::f64::consts::PI).unwrap();
        let mut minus_i2 = ComplexMatrix::identity(2);
        for z in minus_i2.entries_mut() {
            *z = -*z;
        }
        assert!(u.matrix().max_abs_diff(&minus_i2) < 1e-12);
    }

    #[test]
    fn exp_hermitian_is_unitary_and_additive() {
        let h = random_hermitian(8, 51);
        let u = matrix_exp_hermitian(&h, 0.6).unwrap();
        assert!(u.matrix().unitarity_defect() < 1e-9);
        let v = matrix_exp_hermitian(&h, 0.9).unwrap();
        let w = matrix_exp_hermitian(&h, 1.5).unwrap();
        let prod = u.matrix().matmul(v.matrix()).unwrap();
        assert!(prod.max_abs_diff(w.matrix()) < 1e-9);
    }

    #[test]
    fn exp_rejects_non_hermitian() {
        let a = random_matrix(4, 61);
        assert!(matches!(
            matrix_exp_hermitian(&a, 1.0),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn unitary_file_round_trip() {
        let u = matrix_exp_hermitian(&random_hermitian(8, 71), 1.7).unwrap();
        let text = unitary_to_json(&u);
        let back = unitary_from_json(&text).unwrap();
        assert_eq!(back.num_qubits(), 3);
        assert!(back.matrix().max_abs_diff(u.matrix()) < 1e-15);
    }

    #[test]
    fn unitary_rejects_non_unitary_input() {
        let a = random_matrix(4, 81);
        assert!(UnitaryMatrix::new(a).is_err());
    }
}
