//! Small dense floating-point helpers; matrices are row-major `d×d` slices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::IntMatrix;

pub(crate) fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

pub(crate) fn mat_mul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = 0.0;
            for k in 0..d {
                acc += a[i * d + k] * b[k * d + j];
            }
            out[i * d + j] = acc;
        }
    }
    out
}

pub(crate) fn mat_vec(a: &[f64], x: &[f64], out: &mut [f64]) {
    let d = x.len();
    for i in 0..d {
        let mut acc = 0.0;
        for j in 0..d {
            acc += a[i * d + j] * x[j];
        }
        out[i] = acc;
    }
}

/// Induced max-row-sum norm.
pub(crate) fn inf_norm(a: &[f64], d: usize) -> f64 {
    a.chunks(d)
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Gauss-Jordan inverse with partial pivoting.
pub(crate) fn inverse(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = identity(d);
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&x, &y| m[x * d + col].abs().total_cmp(&m[y * d + col].abs()))
            .unwrap();
        if m[piv * d + col].abs() < 1e-300 {
            return Err(Error::Singular);
        }
        for c in 0..d {
            m.swap(col * d + c, piv * d + c);
            inv.swap(col * d + c, piv * d + c);
        }
        let p = m[col * d + col];
        for c in 0..d {
            m[col * d + c] /= p;
            inv[col * d + c] /= p;
        }
        for r in 0..d {
            if r != col {
                let f = m[r * d + col];
                if f != 0.0 {
                    for c in 0..d {
                        m[r * d + c] -= f * m[col * d + c];
                        inv[r * d + c] -= f * inv[col * d + c];
                    }
                }
            }
        }
    }
    Ok(inv)
}

/// Determinant by partial-pivot elimination.
pub(crate) fn det(a: &[f64], d: usize) -> f64 {
    let mut m = a.to_vec();
    let mut det = 1.0;
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&x, &y| m[x * d + col].abs().total_cmp(&m[y * d + col].abs()))
            .unwrap();
        if m[piv * d + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..d {
                m.swap(col * d + c, piv * d + c);
            }
            det = -det;
        }
        let p = m[col * d + col];
        det *= p;
        for r in col + 1..d {
            let f = m[r * d + col] / p;
            for c in col..d {
                m[r * d + c] -= f * m[col * d + c];
            }
        }
    }
    det
}

/// Square real matrix for general (non-integer) attractors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct RealMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for RealMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        RealMatrix::new(rows)
    }
}

impl From<RealMatrix> for Vec<Vec<f64>> {
    fn from(m: RealMatrix) -> Self {
        m.entries.chunks(m.dim).map(<[f64]>::to_vec).collect()
    }
}

impl From<&IntMatrix> for RealMatrix {
    fn from(m: &IntMatrix) -> Self {
        RealMatrix {
            dim: m.dim(),
            entries: m.to_f64(),
        }
    }
}

impl RealMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Empty("matrix"));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    row,
                    len: r.len(),
                });
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument("non-finite matrix entry".into()));
            }
            entries.extend_from_slice(r);
        }
        Ok(RealMatrix { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Integer matrix when every entry is integral.
    pub fn to_int(&self) -> Option<IntMatrix> {
        let ints: Option<Vec<i64>> = self
            .entries
            .iter()
            .map(|&x| (x.fract() == 0.0 && x.abs() < 9.0e15).then_some(x as i64))
            .collect();
        IntMatrix::from_flat(self.dim, ints?).ok()
    }

    /// Spectral radius of the inverse is below one, certified by a power with norm at most 1/2.
    pub fn is_expanding(&self) -> bool {
        let Ok(inv) = inverse(&self.entries, self.dim) else {
            return false;
        };
        contraction_exponent(&inv, self.dim).is_some()
    }
}

/// Smallest `J` with `‖A^J‖∞ ≤ 1/2`, if one exists within a fixed search budget.
pub(crate) fn contraction_exponent(a: &[f64], d: usize) -> Option<usize> {
    let mut p = a.to_vec();
    for j in 1..=4096 {
        let n = inf_norm(&p, d);
        if n <= 0.5 {
            return Some(j);
        }
        if !n.is_finite() || n > 1e150 {
            return None;
        }
        p = mat_mul(&p, a, d);
    }
    None
}
