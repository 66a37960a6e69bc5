//! Box tiles: cyclic normal forms, their digit sets, tensor products,
//! monomial cycle structure and a numeric parallelepiped detector.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attractor::{bounding_box, measure_upper, AttractorApprox};
use crate::error::{Error, Result};
use crate::hull::convex_hull;
use crate::lattice::{det, is_expanding, DigitSet, IntMatrix, ShiftSet};
use crate::linalg::{self, RealMatrix};

/// Cyclic normal form: superdiagonal `p_1..p_{n-1}` and corner `sign · p_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxForm {
    pub p: Vec<i64>,
    pub sign: i8,
}

impl BoxForm {
    pub fn new(p: Vec<i64>, sign: i8) -> Result<Self> {
        let form = BoxForm { p, sign };
        form.validate()?;
        Ok(form)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.is_empty() {
            return Err(Error::Empty("box form"));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::InvalidArgument(format!("sign must be ±1, got {}", self.sign)));
        }
        if let Some(bad) = self.p.iter().find(|&&x| x < 1) {
            return Err(Error::InvalidArgument(format!("p entries must be positive, got {bad}")));
        }
        if self.p.iter().all(|&x| x == 1) {
            return Err(Error::InvalidArgument("not all p_i may equal 1".into()));
        }
        self.product()?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn product(&self) -> Result<i64> {
        self.p
            .iter()
            .try_fold(1i64, |a, &b| a.checked_mul(b))
            .ok_or(Error::Overflow("box form product"))
    }
}

pub fn build_cyclic_matrix(form: &BoxForm) -> Result<IntMatrix> {
    form.validate()?;
    let n = form.dim();
    let mut e = vec![0i64; n * n];
    for i in 0..n - 1 {
        e[i * n + i + 1] = form.p[i];
    }
    e[(n - 1) * n] = form.sign as i64 * form.p[n - 1];
    let m = IntMatrix::from_flat(n, e)?;
    if !is_expanding(&m) {
        return Err(Error::NotExpanding);
    }
    Ok(m)
}

/// `{(k_1, …, k_{n-1}, sign·k_n) : 0 ≤ k_i < p_i}`, sorted.
pub fn box_digits(form: &BoxForm) -> Result<DigitSet> {
    form.validate()?;
    let n = form.dim();
    let mut out = Vec::with_capacity(form.product()? as usize);
    let mut k = vec![0i64; n];
    'digits: loop {
        let mut v = k.clone();
        v[n - 1] *= form.sign as i64;
        out.push(v);
        for i in (0..n).rev() {
            k[i] += 1;
            if k[i] < form.p[i] {
                continue 'digits;
            }
            k[i] = 0;
        }
        break;
    }
    out.sort();
    DigitSet::new(out)
}

/// Block-diagonal matrix with product shifts `(s1, s2)`; `S2` varies slowest.
pub fn tensor_product(
    m1: &IntMatrix,
    s1: &DigitSet,
    m2: &IntMatrix,
    s2: &DigitSet,
) -> Result<(IntMatrix, DigitSet)> {
    check_dims(m1.dim(), s1.dim())?;
    check_dims(m2.dim(), s2.dim())?;
    let mut shifts = Vec::with_capacity(s1.len() * s2.len());
    for b in s2.digits() {
        for a in s1.digits() {
            shifts.push(a.iter().chain(b).copied().collect());
        }
    }
    Ok((m1.block_diag(m2), DigitSet::new(shifts)?))
}

pub fn tensor_product_real(
    m1: &RealMatrix,
    s1: &ShiftSet,
    m2: &RealMatrix,
    s2: &ShiftSet,
) -> Result<(RealMatrix, ShiftSet)> {
    check_dims(m1.dim(), s1.dim())?;
    check_dims(m2.dim(), s2.dim())?;
    let (d1, d2) = (m1.dim(), m2.dim());
    let d = d1 + d2;
    let mut rows = vec![vec![0.0; d]; d];
    for i in 0..d1 {
        rows[i][..d1].copy_from_slice(&m1.entries()[i * d1..(i + 1) * d1]);
    }
    for i in 0..d2 {
        rows[d1 + i][d1..].copy_from_slice(&m2.entries()[i * d2..(i + 1) * d2]);
    }
    let mut shifts = Vec::with_capacity(s1.len() * s2.len());
    for b in s2.shifts() {
        for a in s1.shifts() {
            shifts.push(a.iter().chain(b).copied().collect());
        }
    }
    Ok((RealMatrix::new(rows)?, ShiftSet::new(shifts)?))
}

fn check_dims(m: usize, s: usize) -> Result<()> {
    if m != s {
        return Err(Error::DimensionMismatch { expected: m, found: s });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("matrix is not monomial: column {column} has {nonzeros} nonzero entries")]
pub struct NotMonomial {
    pub column: usize,
    pub nonzeros: usize,
}

/// `M e_j = multipliers[j] · e_{permutation[j]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonomialStructure {
    pub permutation: Vec<usize>,
    pub multipliers: Vec<i64>,
    pub cycles: Vec<Vec<usize>>,
}

impl MonomialStructure {
    pub fn is_single_cycle(&self) -> bool {
        self.cycles.len() == 1
    }

    /// Cyclic normal form reached by reordering and re-signing the basis.
    pub fn box_form(&self) -> Option<BoxForm> {
        if !self.is_single_cycle() {
            return None;
        }
        let n = self.permutation.len();
        let mut p = vec![0i64; n];
        let mut j = 0;
        for slot in (0..n).rev() {
            p[slot] = self.multipliers[j].abs();
            j = self.permutation[j];
        }
        let negatives = self.multipliers.iter().filter(|&&m| m < 0).count();
        let sign = if negatives % 2 == 0 { 1 } else { -1 };
        BoxForm::new(p, sign).ok()
    }
}

pub fn monomial_structure(m: &IntMatrix) -> std::result::Result<MonomialStructure, NotMonomial> {
    let d = m.dim();
    let mut permutation = Vec::with_capacity(d);
    let mut multipliers = Vec::with_capacity(d);
    for j in 0..d {
        let nz: Vec<usize> = (0..d).filter(|&i| m.get(i, j) != 0).collect();
        if nz.len() != 1 {
            return Err(NotMonomial {
                column: j,
                nonzeros: nz.len(),
            });
        }
        permutation.push(nz[0]);
        multipliers.push(m.get(nz[0], j));
    }
    let mut hit = vec![false; d];
    for &r in &permutation {
        if std::mem::replace(&mut hit[r], true) {
            // Two columns share a row: the matrix is singular.
            let column = permutation.iter().rposition(|&x| x == r).unwrap_or(0);
            return Err(NotMonomial { column, nonzeros: 1 });
        }
    }
    let mut seen = vec![false; d];
    let mut cycles = Vec::new();
    for s in 0..d {
        if seen[s] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut j = s;
        while !seen[j] {
            seen[j] = true;
            cycle.push(j);
            j = permutation[j];
        }
        cycles.push(cycle);
    }
    Ok(MonomialStructure {
        permutation,
        multipliers,
        cycles,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ParallelepipedReport {
    pub is_box: bool,
    /// Columns of the fitted parallelepiped; empty when `is_box` is false.
    pub edge_vectors: Vec<Vec<f64>>,
    pub hull_volume: f64,
    pub fit_volume: f64,
    pub measure_estimate: f64,
    pub depth: u32,
}

/// Facet directions kept for the parallelepiped fit, by total area.
const FIT_DIRECTIONS: usize = 8;

/// Compares the outer convex hull of the depth-K cells with the tightest
/// parallelepiped whose faces are parallel to hull facets, and with the
/// certified measure bound.
pub fn is_parallelepiped(a: &AttractorApprox, tol: f64) -> Result<ParallelepipedReport> {
    if a.is_empty() {
        return Err(Error::Empty("approximation"));
    }
    let d = a.dim();
    let m = a.matrix();
    let bbox = bounding_box(m, a.shifts())?;
    let corners = bbox.corners();
    let minv = m.pow(a.depth())?.inverse_f64()?;
    let mut pts = Vec::new();
    let mut x = vec![0.0; d];
    let ext = extreme_cells(a);
    // Hull vertices of the cells alone, when the cells are full-dimensional.
    let ext_f: Vec<Vec<f64>> = ext.iter().map(|z| z.iter().map(|&v| v as f64).collect()).collect();
    let base: Vec<Vec<f64>> = match convex_hull(&ext_f) {
        Ok(h) => h.vertex_indices().into_iter().map(|i| ext_f[i].clone()).collect(),
        Err(_) => ext_f,
    };
    for z in &base {
        for c in &corners {
            let v: Vec<f64> = z.iter().zip(c).map(|(zi, ci)| zi + ci).collect();
            linalg::mat_vec(&minv, &v, &mut x);
            pts.push(x.clone());
        }
    }
    let hull = convex_hull(&pts)?;
    let verts: Vec<&Vec<f64>> = hull.vertex_indices().into_iter().map(|i| &hull.points[i]).collect();
    // Facet normals up to sign, weighted by area.
    let mut dirs: Vec<(Vec<f64>, f64)> = Vec::new();
    for f in &hull.facets {
        match dirs
            .iter_mut()
            .find(|(n, _)| n.iter().zip(&f.normal).map(|(a, b)| a * b).sum::<f64>().abs() > 1.0 - 1e-9)
        {
            Some(entry) => entry.1 += f.area,
            None => dirs.push((f.normal.clone(), f.area)),
        }
    }
    dirs.sort_by(|a, b| b.1.total_cmp(&a.1));
    dirs.truncate(FIT_DIRECTIONS.max(d));
    let widths: Vec<f64> = dirs
        .iter()
        .map(|(n, _)| {
            let (lo, hi) = verts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                let t: f64 = n.iter().zip(p.iter()).map(|(a, b)| a * b).sum();
                (lo.min(t), hi.max(t))
            });
            hi - lo
        })
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for subset in subsets(dirs.len(), d) {
        let u: Vec<f64> = subset.iter().flat_map(|&i| dirs[i].0.clone()).collect();
        let du = linalg::det(&u, d).abs();
        if du < 1e-9 {
            continue;
        }
        let vol = subset.iter().map(|&i| widths[i]).product::<f64>() / du;
        if best.as_ref().map_or(true, |(b, _)| vol < *b) {
            best = Some((vol, subset));
        }
    }
    let (fit_volume, subset) =
        best.ok_or_else(|| Error::Degenerate("no independent facet directions".into()))?;
    let measure_estimate = measure_upper(m, a.shifts(), a.depth())?;
    let hull_volume = hull.volume;
    let is_box = hull_volume >= (1.0 - tol) * fit_volume
        && (measure_estimate - hull_volume).abs() <= tol * hull_volume;
    let edge_vectors = if is_box {
        let u: Vec<f64> = subset.iter().flat_map(|&i| dirs[i].0.clone()).collect();
        let uinv = linalg::inverse(&u, d)?;
        (0..d)
            .map(|j| (0..d).map(|i| uinv[i * d + j] * widths[subset[j]]).collect())
            .collect()
    } else {
        Vec::new()
    };
    Ok(ParallelepipedReport {
        is_box,
        edge_vectors,
        hull_volume,
        fit_volume,
        measure_estimate,
        depth: a.depth(),
    })
}

/// Cells that are first or last along some axis-parallel line; contains every hull vertex.
fn extreme_cells(a: &AttractorApprox) -> Vec<Vec<i64>> {
    let d = a.dim();
    let mut keep = vec![false; a.len()];
    for axis in 0..d {
        let mut ends: HashMap<Vec<i64>, (i64, usize, i64, usize)> = HashMap::new();
        for (i, z) in a.cells().enumerate() {
            let key: Vec<i64> = z
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != axis)
                .map(|(_, &v)| v)
                .collect();
            let v = z[axis];
            let e = ends.entry(key).or_insert((v, i, v, i));
            if v < e.0 {
                e.0 = v;
                e.1 = i;
            }
            if v > e.2 {
                e.2 = v;
                e.3 = i;
            }
        }
        for (_, lo, _, hi) in ends.values() {
            keep[*lo] = true;
            keep[*hi] = true;
        }
    }
    (0..a.len())
        .filter(|&i| keep[i])
        .map(|i| a.cell(i).to_vec())
        .collect()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Cells budget used when checking a box form.
pub const BOX_CHECK_CELLS: u64 = 4096;

/// Depth used for round-trip checks: 8, lowered so that `m^K` stays within [`BOX_CHECK_CELLS`].
pub fn box_check_depth(m: &IntMatrix) -> Result<u32> {
    let mdet = det(m)?.unsigned_abs().max(2);
    let mut k = 1u32;
    while k < 8 && mdet.saturating_pow(k + 1) <= BOX_CHECK_CELLS {
        k += 1;
    }
    Ok(k)
}

/// All forms with `n ≤ max_n` and `Π p_i ≤ max_product`, both signs.
pub fn enumerate_box_forms(max_n: usize, max_product: i64) -> Vec<BoxForm> {
    fn rec(n: usize, budget: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for p in 1..=budget {
            cur.push(p);
            rec(n, budget / p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for n in 1..=max_n {
        let mut tuples = Vec::new();
        rec(n, max_product, &mut Vec::new(), &mut tuples);
        for p in tuples {
            for sign in [1i8, -1] {
                if let Ok(f) = BoxForm::new(p.clone(), sign) {
                    out.push(f);
                }
            }
        }
    }
    out
}
