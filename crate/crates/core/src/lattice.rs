//! Exact integer linear algebra for dilation matrices and digit sets.

use std::collections::HashSet;
use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for deciding that an eigenvalue lies strictly outside the unit circle.
pub const EPS_EIG: f64 = 1e-9;

/// Square integer matrix stored row-major.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<i64>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

impl TryFrom<Vec<Vec<i64>>> for IntMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        IntMatrix::new(rows)
    }
}

impl From<IntMatrix> for Vec<Vec<i64>> {
    fn from(m: IntMatrix) -> Self {
        m.rows()
    }
}

impl IntMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
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
            entries.extend_from_slice(r);
        }
        Ok(IntMatrix { dim, entries })
    }

    pub fn from_flat(dim: usize, entries: Vec<i64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("matrix"));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(IntMatrix { dim, entries })
    }

    pub fn scalar(v: i64) -> Self {
        IntMatrix {
            dim: 1,
            entries: vec![v],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1; dim])
    }

    pub fn diag(values: &[i64]) -> Self {
        let dim = values.len();
        let mut entries = vec![0; dim * dim];
        for (i, &v) in values.iter().enumerate() {
            entries[i * dim + i] = v;
        }
        IntMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.dim).map(<[i64]>::to_vec).collect()
    }

    pub fn mul_vec(&self, v: &[i64]) -> Result<Vec<i64>> {
        self.check_len(v.len())?;
        let mut out = Vec::with_capacity(self.dim);
        for row in self.entries.chunks(self.dim) {
            let mut acc: i64 = 0;
            for (a, b) in row.iter().zip(v) {
                acc = a
                    .checked_mul(*b)
                    .and_then(|p| acc.checked_add(p))
                    .ok_or(Error::Overflow("matrix-vector product"))?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        self.check_len(other.dim)?;
        let d = self.dim;
        let mut entries = vec![0i64; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc: i64 = 0;
                for k in 0..d {
                    acc = self
                        .get(i, k)
                        .checked_mul(other.get(k, j))
                        .and_then(|p| acc.checked_add(p))
                        .ok_or(Error::Overflow("matrix product"))?;
                }
                entries[i * d + j] = acc;
            }
        }
        Ok(IntMatrix { dim: d, entries })
    }

    pub fn pow(&self, k: u32) -> Result<IntMatrix> {
        let mut out = IntMatrix::identity(self.dim);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    pub fn block_diag(&self, other: &IntMatrix) -> IntMatrix {
        let d = self.dim + other.dim;
        let mut entries = vec![0; d * d];
        for i in 0..self.dim {
            for j in 0..self.dim {
                entries[i * d + j] = self.get(i, j);
            }
        }
        for i in 0..other.dim {
            for j in 0..other.dim {
                entries[(self.dim + i) * d + self.dim + j] = other.get(i, j);
            }
        }
        IntMatrix { dim: d, entries }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(|&x| x as f64).collect()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: len,
            });
        }
        Ok(())
    }

    fn wide(&self) -> Vec<i128> {
        self.entries.iter().map(|&x| x as i128).collect()
    }

    /// Adjugate and determinant, exact: `adj · M = det · I`.
    pub(crate) fn adjugate(&self) -> Result<(Vec<i128>, i128)> {
        let d = self.dim;
        let a = self.wide();
        let det = bareiss_det(&a, d)?;
        if d == 1 {
            return Ok((vec![1], det));
        }
        let mut adj = vec![0i128; d * d];
        let mut minor = Vec::with_capacity((d - 1) * (d - 1));
        for i in 0..d {
            for j in 0..d {
                minor.clear();
                for r in (0..d).filter(|&r| r != j) {
                    for c in (0..d).filter(|&c| c != i) {
                        minor.push(a[r * d + c]);
                    }
                }
                let cof = bareiss_det(&minor, d - 1)?;
                adj[i * d + j] = if (i + j) % 2 == 0 { cof } else { -cof };
            }
        }
        Ok((adj, det))
    }

    /// Exact inverse as a rational matrix, row-major.
    pub fn inverse_rational(&self) -> Result<Vec<Ratio<i128>>> {
        let (adj, det) = self.adjugate()?;
        if det == 0 {
            return Err(Error::Singular);
        }
        Ok(adj.into_iter().map(|a| Ratio::new(a, det)).collect())
    }

    /// Inverse in floating point, each entry the correctly rounded value of the exact rational.
    pub fn inverse_f64(&self) -> Result<Vec<f64>> {
        let (adj, det) = self.adjugate()?;
        if det == 0 {
            return Err(Error::Singular);
        }
        Ok(adj.into_iter().map(|a| ratio_to_f64(a, det)).collect())
    }
}

pub(crate) fn ratio_to_f64(num: i128, den: i128) -> f64 {
    // Both operands are exact in f64 for the magnitudes met here; one rounding.
    num as f64 / den as f64
}

/// Fraction-free Gaussian elimination.
fn bareiss_det(a: &[i128], d: usize) -> Result<i128> {
    let mut m = a.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..d.saturating_sub(1) {
        if m[k * d + k] == 0 {
            let Some(p) = (k + 1..d).find(|&r| m[r * d + k] != 0) else {
                return Ok(0);
            };
            for c in 0..d {
                m.swap(k * d + c, p * d + c);
            }
            sign = -sign;
        }
        for i in k + 1..d {
            for j in k + 1..d {
                let v = m[i * d + j]
                    .checked_mul(m[k * d + k])
                    .zip(m[i * d + k].checked_mul(m[k * d + j]))
                    .and_then(|(x, y)| x.checked_sub(y))
                    .ok_or(Error::Overflow("determinant"))?;
                m[i * d + j] = v / prev;
            }
        }
        prev = m[k * d + k];
    }
    Ok(sign * m[d * d - 1])
}

/// Exact determinant.
pub fn det(m: &IntMatrix) -> Result<i64> {
    let v = bareiss_det(&m.wide(), m.dim)?;
    i64::try_from(v).map_err(|_| Error::Overflow("determinant"))
}

/// Characteristic polynomial coefficients, lowest degree first, monic.
pub(crate) fn char_poly(m: &IntMatrix) -> Result<Vec<i128>> {
    // Faddeev-LeVerrier; every division is exact over the integers.
    let d = m.dim;
    let a = m.wide();
    let mut coeffs = vec![0i128; d + 1];
    coeffs[d] = 1;
    let mut mk = vec![0i128; d * d];
    for k in 1..=d {
        // mk <- a * mk + c_{d-k+1} I
        let mut next = vec![0i128; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0i128;
                for t in 0..d {
                    acc = a[i * d + t]
                        .checked_mul(mk[t * d + j])
                        .and_then(|p| acc.checked_add(p))
                        .ok_or(Error::Overflow("characteristic polynomial"))?;
                }
                next[i * d + j] = acc;
            }
            next[i * d + i] += coeffs[d - k + 1];
        }
        mk = next;
        let mut tr = 0i128;
        for i in 0..d {
            for t in 0..d {
                tr = a[i * d + t]
                    .checked_mul(mk[t * d + i])
                    .and_then(|p| tr.checked_add(p))
                    .ok_or(Error::Overflow("characteristic polynomial"))?;
            }
        }
        coeffs[d - k] = -tr / k as i128;
    }
    Ok(coeffs)
}

type Q = Ratio<i128>;

fn poly_trim(p: &mut Vec<Q>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_rem(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = a.to_vec();
    let lead = *b.last().expect("nonempty divisor");
    while r.len() >= b.len() && !(r.len() == 1 && r[0].is_zero()) {
        let shift = r.len() - b.len();
        let f = *r.last().unwrap() / lead;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= f * c;
        }
        r.pop();
        if r.is_empty() {
            r.push(Q::zero());
        }
        poly_trim(&mut r);
    }
    r
}

fn poly_div(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = a.to_vec();
    let lead = *b.last().unwrap();
    let mut q = vec![Q::zero(); a.len() + 1 - b.len()];
    for shift in (0..q.len()).rev() {
        let f = r[shift + b.len() - 1] / lead;
        q[shift] = f;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= f * c;
        }
    }
    q
}

/// Square-free part of an integer polynomial, as floats, lowest degree first.
fn squarefree(p: &[i128]) -> Vec<f64> {
    let p: Vec<Q> = p.iter().map(|&c| Q::from_integer(c)).collect();
    let dp: Vec<Q> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * Q::from_integer(i as i128))
        .collect();
    let mut g = if dp.is_empty() { vec![Q::from_integer(1)] } else { p.clone() };
    let mut h = dp;
    if !h.is_empty() {
        poly_trim(&mut h);
        while !(h.len() == 1 && h[0].is_zero()) {
            let r = poly_rem(&g, &h);
            g = h;
            h = r;
        }
    }
    let sf = poly_div(&p, &g);
    let lead = *sf.last().unwrap();
    sf.iter()
        .map(|c| {
            let v = c / lead;
            *v.numer() as f64 / *v.denom() as f64
        })
        .collect()
}

/// Roots of a monic polynomial (lowest degree first) by Durand-Kerner iteration.
fn poly_roots(p: &[f64]) -> Vec<(f64, f64)> {
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let eval = |re: f64, im: f64| {
        let (mut vr, mut vi) = (0.0, 0.0);
        for &c in p.iter().rev() {
            let nr = vr * re - vi * im + c;
            vi = vr * im + vi * re;
            vr = nr;
        }
        (vr, vi)
    };
    let bound = 1.0 + p[..n].iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let mut z: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let t = 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            (bound * 0.5 * t.cos(), bound * 0.5 * t.sin())
        })
        .collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let (fr, fi) = eval(z[i].0, z[i].1);
            let (mut dr, mut di) = (1.0, 0.0);
            for j in 0..n {
                if i != j {
                    let (ar, ai) = (z[i].0 - z[j].0, z[i].1 - z[j].1);
                    let nr = dr * ar - di * ai;
                    di = dr * ai + di * ar;
                    dr = nr;
                }
            }
            let den = dr * dr + di * di;
            if den == 0.0 {
                continue;
            }
            let qr = (fr * dr + fi * di) / den;
            let qi = (fi * dr - fr * di) / den;
            z[i].0 -= qr;
            z[i].1 -= qi;
            delta = delta.max(qr.hypot(qi));
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Eigenvalue moduli of an integer matrix, ascending.
pub fn eigenvalue_moduli(m: &IntMatrix) -> Result<Vec<f64>> {
    let cp = char_poly(m)?;
    let sf = squarefree(&cp);
    let mut mods: Vec<f64> = poly_roots(&sf).iter().map(|(r, i)| r.hypot(*i)).collect();
    mods.sort_by(f64::total_cmp);
    Ok(mods)
}

/// True iff every eigenvalue of `m` has modulus greater than `1 + EPS_EIG`.
pub fn is_expanding(m: &IntMatrix) -> bool {
    match det(m) {
        Ok(d) if d.abs() >= 2 => {}
        _ => return false,
    }
    match eigenvalue_moduli(m) {
        Ok(mods) => mods.first().is_some_and(|&x| x > 1.0 + EPS_EIG),
        Err(_) => false,
    }
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

/// Canonical representative of `v` modulo `M·Z^d`, lying in `M·[0,1)^d`.
pub fn residue_of(m: &IntMatrix, v: &[i64]) -> Result<Vec<i64>> {
    m.check_len(v.len())?;
    let (adj, det) = m.adjugate()?;
    if det == 0 {
        return Err(Error::Singular);
    }
    residue_with(m, &adj, det, v)
}

pub(crate) fn residue_with(m: &IntMatrix, adj: &[i128], det: i128, v: &[i64]) -> Result<Vec<i64>> {
    let d = m.dim;
    let z: Vec<i128> = (0..d)
        .map(|i| {
            let mut acc = 0i128;
            for j in 0..d {
                acc += adj[i * d + j] * v[j] as i128;
            }
            floor_div(acc, det)
        })
        .collect();
    (0..d)
        .map(|i| {
            let mut acc = v[i] as i128;
            for j in 0..d {
                acc -= m.get(i, j) as i128 * z[j];
            }
            i64::try_from(acc).map_err(|_| Error::Overflow("residue"))
        })
        .collect()
}

/// Integer digit vectors; `0 ∈ D` and the residue conditions are checked by [`validate_digits`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DigitSet {
    digits: Vec<Vec<i64>>,
}

impl DigitSet {
    pub fn new(digits: Vec<Vec<i64>>) -> Result<Self> {
        let Some(first) = digits.first() else {
            return Err(Error::Empty("digit set"));
        };
        let d = first.len();
        if d == 0 {
            return Err(Error::Empty("digit vector"));
        }
        if let Some(bad) = digits.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.len(),
            });
        }
        Ok(DigitSet { digits })
    }

    /// One-dimensional digits from plain integers.
    pub fn scalars(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| vec![v]).collect())
    }

    pub fn digits(&self) -> &[Vec<i64>] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.digits[0].len()
    }
}

/// Arbitrary real shift vectors of a general attractor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShiftSet {
    shifts: Vec<Vec<f64>>,
}

impl ShiftSet {
    pub fn new(shifts: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = shifts.first() else {
            return Err(Error::Empty("shift set"));
        };
        let d = first.len();
        if d == 0 {
            return Err(Error::Empty("shift vector"));
        }
        for s in &shifts {
            if s.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: s.len(),
                });
            }
            if s.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument("non-finite shift".into()));
            }
        }
        Ok(ShiftSet { shifts })
    }

    pub fn shifts(&self) -> &[Vec<f64>] {
        &self.shifts
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.shifts[0].len()
    }
}

impl From<&DigitSet> for ShiftSet {
    fn from(d: &DigitSet) -> Self {
        ShiftSet {
            shifts: d
                .digits
                .iter()
                .map(|v| v.iter().map(|&x| x as f64).collect())
                .collect(),
        }
    }
}

/// Lower-triangular basis of the lattice spanned by `gens` (as columns).
///
/// Returns the basis columns; pivots are positive and entries left of a pivot
/// are reduced into `[0, pivot)`. Full rank iff `result.len() == d`.
pub(crate) fn hnf_columns(gens: &[Vec<i64>], d: usize) -> Result<Vec<Vec<i128>>> {
    let mut cols: Vec<Vec<i128>> = gens
        .iter()
        .filter(|g| g.iter().any(|&x| x != 0))
        .map(|g| g.iter().map(|&x| x as i128).collect())
        .collect();
    let mut basis: Vec<Vec<i128>> = Vec::new();
    let mut pivot_rows = Vec::new();
    for row in 0..d {
        if cols.is_empty() {
            break;
        }
        // Fold every column's entry in this row into column 0 by extended gcd.
        for j in 1..cols.len() {
            let (a, b) = (cols[0][row], cols[j][row]);
            if b == 0 {
                continue;
            }
            let (g, x, y) = ext_gcd(a, b);
            let (ag, bg) = (a / g, b / g);
            let mut c0 = vec![0i128; d];
            let mut cj = vec![0i128; d];
            for r in 0..d {
                c0[r] = x
                    .checked_mul(cols[0][r])
                    .zip(y.checked_mul(cols[j][r]))
                    .and_then(|(p, q)| p.checked_add(q))
                    .ok_or(Error::Overflow("lattice basis"))?;
                cj[r] = ag
                    .checked_mul(cols[j][r])
                    .zip(bg.checked_mul(cols[0][r]))
                    .and_then(|(p, q)| p.checked_sub(q))
                    .ok_or(Error::Overflow("lattice basis"))?;
            }
            cols[0] = c0;
            cols[j] = cj;
        }
        if cols[0][row] == 0 {
            continue;
        }
        let mut p = cols.swap_remove(0);
        if p[row] < 0 {
            p.iter_mut().for_each(|x| *x = -*x);
        }
        cols.retain(|c| c.iter().any(|&x| x != 0));
        basis.push(p);
        pivot_rows.push(row);
    }
    // Reduce entries left of each pivot.
    for k in 0..basis.len() {
        let pr = pivot_rows[k];
        for q in 0..k {
            let f = floor_div(basis[q][pr], basis[k][pr]);
            if f != 0 {
                for r in 0..d {
                    basis[q][r] -= f * basis[k][r];
                }
            }
        }
    }
    Ok(basis)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// The `|det M|` lattice points of `M·[0,1)^d`, sorted lexicographically.
pub fn residue_system(m: &IntMatrix) -> Result<DigitSet> {
    let d = m.dim;
    let (adj, det) = m.adjugate()?;
    if det == 0 {
        return Err(Error::Singular);
    }
    let cols: Vec<Vec<i64>> = (0..d).map(|j| (0..d).map(|i| m.get(i, j)).collect()).collect();
    let h = hnf_columns(&cols, d)?;
    let diag: Vec<i64> = (0..d).map(|i| h[i][i] as i64).collect();
    let count: i64 = diag.iter().product();
    let mut out = Vec::with_capacity(count as usize);
    let mut idx = vec![0i64; d];
    loop {
        out.push(residue_with(m, &adj, det, &idx)?);
        let mut k = 0;
        loop {
            if k == d {
                out.sort();
                return DigitSet::new(out);
            }
            idx[k] += 1;
            if idx[k] < diag[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// True iff `|D| = |det M|`, `0 ∈ D`, and digits are pairwise inequivalent modulo `M·Z^d`.
pub fn validate_digits(m: &IntMatrix, digits: &DigitSet) -> bool {
    if digits.dim() != m.dim {
        return false;
    }
    let Ok(dt) = det(m) else { return false };
    if dt == 0 || digits.len() as i64 != dt.abs() {
        return false;
    }
    if !digits.digits.iter().any(|v| v.iter().all(|&x| x == 0)) {
        return false;
    }
    let Ok((adj, dd)) = m.adjugate() else {
        return false;
    };
    let mut seen = HashSet::with_capacity(digits.len());
    for v in &digits.digits {
        match residue_with(m, &adj, dd, v) {
            Ok(r) => {
                if !seen.insert(r) {
                    return false;
                }
            }
            Err(_) => return false,
        }
    }
    true
}

pub(crate) fn ratio_f64(q: &Ratio<i128>) -> f64 {
    if q.is_negative() {
        -ratio_to_f64(-*q.numer(), *q.denom())
    } else {
        ratio_to_f64(*q.numer(), *q.denom())
    }
}
