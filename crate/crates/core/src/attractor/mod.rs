//! Depth-K approximations of attractors `G = {Σ_{k≥1} M^{-k} s_k}` and the tile test.

mod contact;
mod geometry;
mod measure;
mod raster;

pub use contact::{tile_check_exact, ContactMatrix, TileReport, TileVerdict, EPS_GAP};
pub use geometry::{bounding_box, centroid, real_bounding_box, BoundingBox};
pub use measure::{measure_upper, measure_upper_profile, measure_upper_profile_capped};
pub use raster::{
    label_raster, rasterize, self_similarity_residual, shift_cover_layers, Approximation,
    CellModel, LabelRaster, LayerReport, Raster, MAX_PIXELS,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{is_expanding, DigitSet, IntMatrix, ShiftSet};
use crate::linalg::{self, RealMatrix};

/// Default cap on the number of cell expansions per level.
pub const DEFAULT_MAX_CELLS: u64 = 1 << 22;

/// Integer attractor approximated at depth `K` by the cells `z = Σ_{k=1..K} M^{K-k} s_k`.
///
/// Cell `z` stands for the region `M^{-K}(z + G)`. Cells are sorted
/// lexicographically and carry the index of their leading shift `s_1`.
#[derive(Clone, Debug)]
pub struct AttractorApprox {
    matrix: IntMatrix,
    shifts: DigitSet,
    depth: u32,
    cells: Vec<i64>,
    labels: Vec<u32>,
}

impl Serialize for AttractorApprox {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let cells: Vec<&[i64]> = self.cells().collect();
        let mut st = s.serialize_struct("AttractorApprox", 5)?;
        st.serialize_field("matrix", &self.matrix)?;
        st.serialize_field("shifts", &self.shifts)?;
        st.serialize_field("depth", &self.depth)?;
        st.serialize_field("cells", &cells)?;
        st.serialize_field("labels", &self.labels)?;
        st.end()
    }
}

impl AttractorApprox {
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn shifts(&self) -> &DigitSet {
        &self.shifts
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cell(&self, i: usize) -> &[i64] {
        let d = self.dim();
        &self.cells[i * d..(i + 1) * d]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[i64]> {
        self.cells.chunks_exact(self.dim())
    }

    /// Index into `shifts` of the leading digit of cell `i`.
    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }
}

/// Cells of one level, flat, with leading-digit labels.
pub(crate) struct Level {
    pub cells: Vec<i64>,
    pub labels: Vec<u32>,
}

fn sort_dedup(cells: Vec<i64>, labels: Vec<u32>, d: usize) -> Level {
    let n = labels.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.par_sort_unstable_by(|&a, &b| {
        cells[a * d..(a + 1) * d]
            .cmp(&cells[b * d..(b + 1) * d])
            .then(labels[a].cmp(&labels[b]))
    });
    let mut out_cells = Vec::with_capacity(cells.len());
    let mut out_labels = Vec::with_capacity(n);
    for (pos, &i) in idx.iter().enumerate() {
        let c = &cells[i * d..(i + 1) * d];
        if pos > 0 {
            let p = idx[pos - 1];
            if &cells[p * d..(p + 1) * d] == c {
                continue;
            }
        }
        out_cells.extend_from_slice(c);
        out_labels.push(labels[i]);
    }
    Level {
        cells: out_cells,
        labels: out_labels,
    }
}

/// Level-by-level expansion `Z_{t+1} = M·Z_t + S`; calls `visit` after each level.
pub(crate) fn for_each_level(
    m: &IntMatrix,
    shifts: &DigitSet,
    depth: u32,
    max_cells: u64,
    mut visit: impl FnMut(u32, &Level) -> Result<()>,
) -> Result<Level> {
    let d = m.dim();
    if shifts.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: shifts.dim(),
        });
    }
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    if !is_expanding(m) {
        return Err(Error::NotExpanding);
    }
    let s = shifts.digits();
    let mut level = sort_dedup(
        s.iter().flatten().copied().collect(),
        (0..s.len() as u32).collect(),
        d,
    );
    visit(1, &level)?;
    for t in 2..=depth {
        let needed = level.labels.len() as u64 * s.len() as u64;
        if needed > max_cells {
            return Err(Error::ResourceCap {
                what: "attractor cells",
                needed,
                cap: max_cells,
            });
        }
        let expanded: Result<Vec<(Vec<i64>, Vec<u32>)>> = level
            .cells
            .par_chunks_exact(d)
            .zip(level.labels.par_iter())
            .map(|(z, &lab)| {
                let mz = m.mul_vec(z)?;
                let mut out = Vec::with_capacity(s.len() * d);
                for sv in s {
                    for (a, b) in mz.iter().zip(sv) {
                        out.push(a.checked_add(*b).ok_or(Error::Overflow("cell expansion"))?);
                    }
                }
                Ok((out, vec![lab; s.len()]))
            })
            .collect();
        let (cells, labels): (Vec<Vec<i64>>, Vec<Vec<u32>>) = expanded?.into_iter().unzip();
        level = sort_dedup(cells.concat(), labels.concat(), d);
        visit(t, &level)?;
    }
    Ok(level)
}

/// All distinct truncated digit sums of length `K`, using [`DEFAULT_MAX_CELLS`].
pub fn approximate(m: &IntMatrix, shifts: &DigitSet, depth: u32) -> Result<AttractorApprox> {
    approximate_capped(m, shifts, depth, DEFAULT_MAX_CELLS)
}

pub fn approximate_capped(
    m: &IntMatrix,
    shifts: &DigitSet,
    depth: u32,
    max_cells: u64,
) -> Result<AttractorApprox> {
    let level = for_each_level(m, shifts, depth, max_cells, |_, _| Ok(()))?;
    Ok(AttractorApprox {
        matrix: m.clone(),
        shifts: shifts.clone(),
        depth,
        cells: level.cells,
        labels: level.labels,
    })
}

/// Depth-K approximation of a general attractor with real matrix and shifts.
#[derive(Clone, Debug)]
pub struct RealApprox {
    matrix: RealMatrix,
    shifts: ShiftSet,
    depth: u32,
    points: Vec<f64>,
}

impl RealApprox {
    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    pub fn shifts(&self) -> &ShiftSet {
        &self.shifts
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Unscaled sums `Σ_{k=1..K} M^{K-k} s_k`.
    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim())
    }
}

pub fn approximate_real(m: &RealMatrix, shifts: &ShiftSet, depth: u32) -> Result<RealApprox> {
    approximate_real_capped(m, shifts, depth, DEFAULT_MAX_CELLS)
}

pub fn approximate_real_capped(
    m: &RealMatrix,
    shifts: &ShiftSet,
    depth: u32,
    max_cells: u64,
) -> Result<RealApprox> {
    let d = m.dim();
    if shifts.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: shifts.dim(),
        });
    }
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    if !m.is_expanding() {
        return Err(Error::NotExpanding);
    }
    let s = shifts.shifts();
    let mut points: Vec<f64> = s.iter().flatten().copied().collect();
    let mut buf = vec![0.0; d];
    for _ in 2..=depth {
        let n = points.len() / d;
        let needed = n as u64 * s.len() as u64;
        if needed > max_cells {
            return Err(Error::ResourceCap {
                what: "attractor cells",
                needed,
                cap: max_cells,
            });
        }
        let mut next = Vec::with_capacity(n * s.len() * d);
        for z in points.chunks_exact(d) {
            linalg::mat_vec(m.entries(), z, &mut buf);
            for sv in s {
                next.extend(buf.iter().zip(sv).map(|(a, b)| a + b));
            }
        }
        points = next;
    }
    Ok(RealApprox {
        matrix: m.clone(),
        shifts: shifts.clone(),
        depth,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_expansions() {
        let a = approximate(&IntMatrix::scalar(2), &DigitSet::scalars(&[0, 1]).unwrap(), 3).unwrap();
        let cells: Vec<i64> = a.cells().map(|c| c[0]).collect();
        assert_eq!(cells, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn overlapping_digits() {
        let a = approximate(&IntMatrix::scalar(2), &DigitSet::scalars(&[0, 3]).unwrap(), 2).unwrap();
        let cells: Vec<i64> = a.cells().map(|c| c[0]).collect();
        assert_eq!(cells, vec![0, 3, 6, 9]);
        // leading digit of 3 = 2·0 + 3 is the zero digit
        assert_eq!(a.label(1), 0);
        assert_eq!(a.label(2), 1);
    }

    #[test]
    fn dragon_level_two() {
        let m = IntMatrix::new(vec![vec![1, 1], vec![-1, 1]]).unwrap();
        let a = approximate(&m, &DigitSet::new(vec![vec![0, 0], vec![1, 0]]).unwrap(), 2).unwrap();
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn resource_cap() {
        let err = approximate_capped(&IntMatrix::scalar(2), &DigitSet::scalars(&[0, 1]).unwrap(), 10, 100)
            .unwrap_err();
        assert_eq!(err.code(), "resource_cap");
    }

    #[test]
    fn rejects_non_expanding() {
        let m = IntMatrix::diag(&[1, 2]);
        let d = DigitSet::new(vec![vec![0, 0], vec![0, 1]]).unwrap();
        assert_eq!(approximate(&m, &d, 2).unwrap_err(), Error::NotExpanding);
    }

    #[test]
    fn real_cantor_points() {
        let m = RealMatrix::new(vec![vec![3.0]]).unwrap();
        let s = ShiftSet::new(vec![vec![0.0], vec![2.0]]).unwrap();
        let a = approximate_real(&m, &s, 2).unwrap();
        let pts: Vec<f64> = a.points().map(|p| p[0]).collect();
        assert_eq!(pts, vec![0.0, 2.0, 6.0, 8.0]);
    }
}
