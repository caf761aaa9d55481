//! Dense complex matrices, norms and the matrix JSON format.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Returns the dimension of a square matrix with finite entries.
pub fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

pub fn check_same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<usize> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(a.nrows())
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn real_diag(values: &[f64]) -> ComplexMatrix {
    let d = values.len();
    ComplexMatrix::from_fn(d, d, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO })
}

/// Builds a complex matrix from real entries given row by row.
pub fn from_real_rows(d: usize, rows: &[f64]) -> ComplexMatrix {
    assert_eq!(rows.len(), d * d, "expected {} entries", d * d);
    ComplexMatrix::from_fn(d, d, |i, j| C64::new(rows[i * d + j], 0.0))
}

pub fn basis_vector(d: usize, i: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(d);
    v[i] = ONE;
    v
}

/// The rank-one operator v v*.
pub fn outer(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

pub fn trace_re(m: &ComplexMatrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// Entrywise complex conjugate in the canonical basis.
pub fn entrywise_conj(m: &ComplexMatrix) -> ComplexMatrix {
    m.map(|z| z.conj())
}

/// Hilbert–Schmidt inner product ⟨X, Y⟩ = tr X Y*.
pub fn hs_inner(x: &ComplexMatrix, y: &ComplexMatrix) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum()
}

pub fn hs_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Largest |M_ij − conj(M_ji)|.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    let d = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub hs: f64,
    pub op: f64,
}

pub fn norms(m: &ComplexMatrix) -> Norms {
    Norms {
        hs: hs_norm(m),
        op: op_norm(m),
    }
}

/// On-disk matrix representation: `{"dim": d, "entries": [[re, im], ...]}`,
/// entries row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let d = m.nrows();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixJson { dim: d, entries }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::MatrixFormat("dim must be positive".into()));
        }
        if self.entries.len() != d * d {
            return Err(Error::MatrixFormat(format!(
                "expected {} entries for dim {}, found {}",
                d * d,
                d,
                self.entries.len()
            )));
        }
        if self.entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::MatrixFormat("non-finite entry".into()));
        }
        Ok(ComplexMatrix::from_fn(d, d, |i, j| {
            let [re, im] = self.entries[i * d + j];
            C64::new(re, im)
        }))
    }
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let parsed: MatrixJson =
        serde_json::from_str(text).map_err(|e| Error::MatrixFormat(e.to_string()))?;
    parsed.to_matrix()
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixJson::from_matrix(m)).expect("matrix JSON serialization")
}

/// Serde adapter so report structs can embed matrices in the JSON format.
pub mod serde_matrix {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ComplexMatrix, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        raw.to_matrix().map_err(serde::de::Error::custom)
    }
}
