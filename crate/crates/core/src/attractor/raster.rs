use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::contact::{contact_verdict, TileVerdict};
use super::geometry::{centroid, real_centroid, reduce};
use super::{approximate, approximate_real, AttractorApprox, RealApprox};
use crate::error::{Error, Result};
use crate::lattice::{ratio_f64, validate_digits};
use crate::linalg;

/// Occupancy counts on the grid of cubes `[p/R, (p+1)/R)`, `p` an integer multi-index.
///
/// Axis 0 varies fastest in `occupancy`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Raster {
    pub resolution: u32,
    pub origin_index: Vec<i64>,
    pub extent: Vec<usize>,
    pub occupancy: Vec<u32>,
}

impl Raster {
    pub fn empty(resolution: u32, origin_index: Vec<i64>, extent: Vec<usize>) -> Self {
        let n = extent.iter().product();
        Raster {
            resolution,
            origin_index,
            extent,
            occupancy: vec![0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.extent.len()
    }

    pub fn cell_size(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn origin(&self) -> Vec<f64> {
        self.origin_index
            .iter()
            .map(|&o| o as f64 / self.resolution as f64)
            .collect()
    }

    pub fn linear(&self, idx: &[i64]) -> Option<usize> {
        let mut lin = 0usize;
        let mut stride = 1usize;
        for i in 0..self.dim() {
            let r = idx[i] - self.origin_index[i];
            if r < 0 || r >= self.extent[i] as i64 {
                return None;
            }
            lin += r as usize * stride;
            stride *= self.extent[i];
        }
        Some(lin)
    }

    pub fn index_of(&self, mut lin: usize) -> Vec<i64> {
        (0..self.dim())
            .map(|i| {
                let r = lin % self.extent[i];
                lin /= self.extent[i];
                self.origin_index[i] + r as i64
            })
            .collect()
    }

    pub fn get(&self, idx: &[i64]) -> u32 {
        self.linear(idx).map_or(0, |l| self.occupancy[l])
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&c| c > 0).count()
    }

    /// Occupied volume: occupied cells times `R^{-d}`.
    pub fn area(&self) -> f64 {
        self.occupied_count() as f64 / (self.resolution as f64).powi(self.dim() as i32)
    }

    pub fn occupied_indices(&self) -> Vec<Vec<i64>> {
        self.occupancy
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(l, _)| self.index_of(l))
            .collect()
    }

    /// The same raster moved by an integer vector.
    pub fn translated(&self, k: &[i64]) -> Raster {
        let r = self.resolution as i64;
        Raster {
            origin_index: self.origin_index.iter().zip(k).map(|(o, k)| o + k * r).collect(),
            ..self.clone()
        }
    }
}

/// Raster where every occupied cell also records the leading-digit label.
#[derive(Clone, Debug)]
pub struct LabelRaster {
    pub raster: Raster,
    /// `u32::MAX` marks empty cells.
    pub labels: Vec<u32>,
}

/// How approximation cells are turned into point sets.
///
/// When the integer system is certified to tile by its digit lattice `L`, the
/// cells are disjoint translates of one fundamental domain of `L`, so every
/// point is assigned to exactly one cell. Otherwise each cell is a point mass
/// at its barycentre.
#[derive(Clone, Debug)]
pub struct CellModel {
    dim: usize,
    kind: ModelKind,
}

#[derive(Clone, Debug)]
enum ModelKind {
    Domain {
        /// `x ↦ B^{-1} M^K x - offset`; rounding gives the cell in lattice coordinates.
        map: Vec<f64>,
        offset: Vec<f64>,
        cells: HashMap<Vec<i64>, u32>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Points {
        points: Vec<f64>,
        labels: Vec<u32>,
    },
}

impl CellModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True for the fundamental-domain model.
    pub fn is_partition(&self) -> bool {
        matches!(self.kind, ModelKind::Domain { .. })
    }

    /// Label of the cell containing `x` (partition model only).
    pub fn locate(&self, x: &[f64]) -> Option<u32> {
        let mut key = vec![0i64; self.dim];
        self.locate_with(x, &mut key)
    }

    fn locate_with(&self, x: &[f64], key: &mut [i64]) -> Option<u32> {
        match &self.kind {
            ModelKind::Domain {
                map, offset, cells, ..
            } => {
                let d = self.dim;
                for i in 0..d {
                    let mut acc = 0.0;
                    for j in 0..d {
                        acc += map[i * d + j] * x[j];
                    }
                    key[i] = (acc - offset[i] + 0.5).floor() as i64;
                }
                cells.get(&key[..]).copied()
            }
            ModelKind::Points { .. } => None,
        }
    }

    /// Axis box containing every modelled point.
    pub fn extent(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            ModelKind::Domain { lo, hi, .. } => (lo.clone(), hi.clone()),
            ModelKind::Points { points, .. } => {
                let d = self.dim;
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for p in points.chunks_exact(d) {
                    for i in 0..d {
                        lo[i] = lo[i].min(p[i]);
                        hi[i] = hi[i].max(p[i]);
                    }
                }
                (lo, hi)
            }
        }
    }

    fn frame(&self, resolution: u32) -> Result<(Vec<i64>, Vec<usize>)> {
        let (lo, hi) = self.extent();
        let r = resolution as f64;
        let origin: Vec<i64> = lo.iter().map(|x| (x * r).floor() as i64).collect();
        let mut extent = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let top = ((hi[i] * r).floor() as i64 + 1).max(origin[i] + 1);
            extent.push((top - origin[i]) as usize);
        }
        let total: u128 = extent.iter().map(|&e| e as u128).product();
        if total > MAX_PIXELS as u128 {
            return Err(Error::ResourceCap {
                what: "raster cells",
                needed: total.min(u64::MAX as u128) as u64,
                cap: MAX_PIXELS,
            });
        }
        Ok((origin, extent))
    }

    fn render(&self, resolution: u32, with_labels: bool) -> Result<(Raster, Vec<u32>)> {
        if resolution == 0 {
            return Err(Error::InvalidArgument("resolution must be positive".into()));
        }
        let (origin, extent) = self.frame(resolution)?;
        let mut raster = Raster::empty(resolution, origin, extent);
        let n = raster.occupancy.len();
        let mut labels = if with_labels { vec![u32::MAX; n] } else { Vec::new() };
        let r = resolution as f64;
        let d = self.dim;
        match &self.kind {
            ModelKind::Domain { .. } => {
                let row = raster.extent[0];
                let frame = &raster;
                let rows: Vec<(Vec<u32>, Vec<u32>)> = (0..n / row)
                    .into_par_iter()
                    .map(|q| {
                        let mut idx = frame.index_of(q * row);
                        let mut x = vec![0.0; d];
                        let mut key = vec![0i64; d];
                        let mut occ = vec![0u32; row];
                        let mut lab = vec![u32::MAX; if with_labels { row } else { 0 }];
                        for t in 0..row {
                            for i in 0..d {
                                x[i] = (idx[i] as f64 + 0.5) / r;
                            }
                            if let Some(l) = self.locate_with(&x, &mut key) {
                                occ[t] = 1;
                                if with_labels {
                                    lab[t] = l;
                                }
                            }
                            idx[0] += 1;
                        }
                        (occ, lab)
                    })
                    .collect();
                for (q, (occ, lab)) in rows.into_iter().enumerate() {
                    raster.occupancy[q * row..(q + 1) * row].copy_from_slice(&occ);
                    if with_labels {
                        labels[q * row..(q + 1) * row].copy_from_slice(&lab);
                    }
                }
            }
            ModelKind::Points { points, labels: pl } => {
                let mut idx = vec![0i64; d];
                for (p, &l) in points.chunks_exact(d).zip(pl) {
                    for i in 0..d {
                        idx[i] = (p[i] * r).floor() as i64;
                    }
                    if let Some(lin) = raster.linear(&idx) {
                        raster.occupancy[lin] += 1;
                        if with_labels {
                            labels[lin] = labels[lin].min(l);
                        }
                    }
                }
            }
        }
        Ok((raster, labels))
    }
}

/// Cap on raster cells per image.
pub const MAX_PIXELS: u64 = 1 << 26;

/// Finite approximations that can be rasterized.
pub trait Approximation: Sized {
    fn dim(&self) -> usize;
    fn depth(&self) -> u32;
    fn matrix_f64(&self) -> Vec<f64>;
    fn shift_vectors(&self) -> Vec<Vec<f64>>;
    fn model(&self) -> Result<CellModel>;
    /// The same system approximated at another depth.
    fn at_depth(&self, depth: u32) -> Result<Self>;
}

fn q_to_f64(v: &[Ratio<i128>]) -> Vec<f64> {
    v.iter().map(ratio_f64).collect()
}

impl AttractorApprox {
    /// `M^{-K}` as exact rationals.
    fn inverse_power(&self) -> Result<Vec<Ratio<i128>>> {
        self.matrix.pow(self.depth)?.inverse_rational()
    }

    fn domain_model(&self) -> Result<Option<CellModel>> {
        let m = &self.matrix;
        let digits = &self.shifts;
        if !validate_digits(m, digits) {
            return Ok(None);
        }
        let Some(red) = reduce(m, digits)? else {
            return Ok(None);
        };
        if contact_verdict(&red.matrix, &red.digits)?.verdict != TileVerdict::Tile {
            return Ok(None);
        }
        let d = m.dim();
        let mk = m.pow(self.depth)?;
        let b_inv = red.basis.inverse_rational()?;
        let mut map_q = vec![Ratio::<i128>::zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                map_q[i * d + j] = (0..d).fold(Ratio::zero(), |acc, k| {
                    acc + b_inv[i * d + k] * Ratio::from_integer(mk.get(k, j) as i128)
                });
            }
        }
        let c = centroid(m, digits)?;
        let offset_q: Vec<Ratio<i128>> = (0..d)
            .map(|i| (0..d).fold(Ratio::zero(), |acc, k| acc + b_inv[i * d + k] * c[k]))
            .collect();
        let mut cells = HashMap::with_capacity(self.len());
        for (i, z) in self.cells().enumerate() {
            cells.insert(red.coords(z)?, self.labels[i]);
        }
        // Cell z covers M^{-K}(z + c) + T[-1/2, 1/2]^d with T = M^{-K} B.
        let minv = self.inverse_power()?;
        let minv_f = q_to_f64(&minv);
        let b_f: Vec<f64> = red.basis.to_f64();
        let t = linalg::mat_mul(&minv_f, &b_f, d);
        let half: Vec<f64> = (0..d)
            .map(|i| 0.5 * (0..d).map(|j| t[i * d + j].abs()).sum::<f64>())
            .collect();
        let c_f = q_to_f64(&c);
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        let mut zc = vec![0.0; d];
        let mut x = vec![0.0; d];
        for z in self.cells() {
            for i in 0..d {
                zc[i] = z[i] as f64 + c_f[i];
            }
            linalg::mat_vec(&minv_f, &zc, &mut x);
            for i in 0..d {
                lo[i] = lo[i].min(x[i] - half[i]);
                hi[i] = hi[i].max(x[i] + half[i]);
            }
        }
        Ok(Some(CellModel {
            dim: d,
            kind: ModelKind::Domain {
                map: q_to_f64(&map_q),
                offset: q_to_f64(&offset_q),
                cells,
                lo,
                hi,
            },
        }))
    }
}

impl Approximation for AttractorApprox {
    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn depth(&self) -> u32 {
        self.depth
    }

    fn matrix_f64(&self) -> Vec<f64> {
        self.matrix.to_f64()
    }

    fn shift_vectors(&self) -> Vec<Vec<f64>> {
        crate::lattice::ShiftSet::from(&self.shifts).shifts().to_vec()
    }

    fn model(&self) -> Result<CellModel> {
        if let Some(model) = self.domain_model()? {
            return Ok(model);
        }
        let d = self.dim();
        let minv = q_to_f64(&self.inverse_power()?);
        let c = q_to_f64(&centroid(&self.matrix, &self.shifts)?);
        let mut points = Vec::with_capacity(self.cells.len());
        let mut zc = vec![0.0; d];
        let mut x = vec![0.0; d];
        for z in self.cells() {
            for i in 0..d {
                zc[i] = z[i] as f64 + c[i];
            }
            linalg::mat_vec(&minv, &zc, &mut x);
            points.extend_from_slice(&x);
        }
        Ok(CellModel {
            dim: d,
            kind: ModelKind::Points {
                points,
                labels: self.labels.clone(),
            },
        })
    }

    fn at_depth(&self, depth: u32) -> Result<Self> {
        approximate(&self.matrix, &self.shifts, depth)
    }
}

impl Approximation for RealApprox {
    fn dim(&self) -> usize {
        self.matrix().dim()
    }

    fn depth(&self) -> u32 {
        self.depth()
    }

    fn matrix_f64(&self) -> Vec<f64> {
        self.matrix().entries().to_vec()
    }

    fn shift_vectors(&self) -> Vec<Vec<f64>> {
        self.shifts().shifts().to_vec()
    }

    fn model(&self) -> Result<CellModel> {
        let d = self.dim();
        let m = self.matrix().entries();
        let mut mk = linalg::identity(d);
        for _ in 0..self.depth() {
            mk = linalg::mat_mul(&mk, m, d);
        }
        let minv = linalg::inverse(&mk, d)?;
        let c = real_centroid(m, self.shifts().shifts())?;
        let n = self.len();
        let s = self.shifts().len() as u64;
        let lead = s.pow(self.depth().saturating_sub(1));
        let mut points = Vec::with_capacity(n * d);
        let mut labels = Vec::with_capacity(n);
        let mut zc = vec![0.0; d];
        let mut x = vec![0.0; d];
        for (i, p) in self.points().enumerate() {
            for j in 0..d {
                zc[j] = p[j] + c[j];
            }
            linalg::mat_vec(&minv, &zc, &mut x);
            points.extend_from_slice(&x);
            labels.push((i as u64 / lead) as u32);
        }
        Ok(CellModel {
            dim: d,
            kind: ModelKind::Points { points, labels },
        })
    }

    fn at_depth(&self, depth: u32) -> Result<Self> {
        approximate_real(self.matrix(), self.shifts(), depth)
    }
}

/// Occupancy of the approximation at `resolution` cells per unit length.
pub fn rasterize<A: Approximation>(a: &A, resolution: u32) -> Result<Raster> {
    Ok(a.model()?.render(resolution, false)?.0)
}

/// Raster with leading-digit labels; needs the partition model.
pub fn label_raster(a: &AttractorApprox, resolution: u32) -> Result<LabelRaster> {
    let model = a.model()?;
    if !model.is_partition() {
        return Err(Error::InvalidArgument(
            "labelled rasters need a system that tiles by its digit lattice".into(),
        ));
    }
    let (raster, labels) = model.render(resolution, true)?;
    Ok(LabelRaster { raster, labels })
}

/// Fraction of cells in the symmetric difference of `G_K` and `∪_s M^{-1}(G_{K-1} + s)`.
///
/// The union is evaluated at the centre `x` of every raster cell by looking
/// up the depth `K-1` raster at `M x - s`.
pub fn self_similarity_residual<A: Approximation>(a: &A, resolution: u32) -> Result<f64> {
    if a.depth() < 2 {
        return Err(Error::InvalidArgument("self-similarity needs depth at least 2".into()));
    }
    let fine = rasterize(a, resolution)?;
    let coarse = rasterize(&a.at_depth(a.depth() - 1)?, resolution)?;
    let d = a.dim();
    let m = a.matrix_f64();
    let minv = linalg::inverse(&m, d)?;
    let shifts = a.shift_vectors();
    let r = resolution as f64;
    // Frame covering both the fine raster and every mapped copy of the coarse one.
    let mut lo: Vec<f64> = fine.origin();
    let mut hi: Vec<f64> = (0..d)
        .map(|i| (fine.origin_index[i] + fine.extent[i] as i64) as f64 / r)
        .collect();
    let c_lo = coarse.origin();
    let c_hi: Vec<f64> = (0..d)
        .map(|i| (coarse.origin_index[i] + coarse.extent[i] as i64) as f64 / r)
        .collect();
    let corners = crate::attractor::BoundingBox { lo: c_lo, hi: c_hi }.corners();
    let mut y = vec![0.0; d];
    for s in &shifts {
        for c in &corners {
            let v: Vec<f64> = c.iter().zip(s).map(|(a, b)| a + b).collect();
            linalg::mat_vec(&minv, &v, &mut y);
            for i in 0..d {
                lo[i] = lo[i].min(y[i]);
                hi[i] = hi[i].max(y[i]);
            }
        }
    }
    let origin: Vec<i64> = lo.iter().map(|x| (x * r).floor() as i64).collect();
    let extent: Vec<usize> = (0..d)
        .map(|i| ((hi[i] * r).ceil() as i64 - origin[i]).max(1) as usize)
        .collect();
    let frame = Raster::empty(resolution, origin, extent);
    let n = frame.occupancy.len();
    if n as u64 > MAX_PIXELS {
        return Err(Error::ResourceCap {
            what: "raster cells",
            needed: n as u64,
            cap: MAX_PIXELS,
        });
    }
    let (diff, union) = (0..n)
        .into_par_iter()
        .map(|lin| {
            let idx = frame.index_of(lin);
            let x: Vec<f64> = idx.iter().map(|&p| (p as f64 + 0.5) / r).collect();
            let in_fine = fine.get(&idx) > 0;
            let mut mx = vec![0.0; d];
            linalg::mat_vec(&m, &x, &mut mx);
            let in_union = shifts.iter().any(|s| {
                let q: Vec<i64> = (0..d).map(|i| ((mx[i] - s[i]) * r).floor() as i64).collect();
                coarse.get(&q) > 0
            });
            ((in_fine != in_union) as u64, (in_fine || in_union) as u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(if union == 0 { 0.0 } else { diff as f64 / union as f64 })
}

/// Layer counts of the integer translates of an approximation over a window.
#[derive(Clone, Debug, Serialize)]
pub struct LayerReport {
    pub histogram: BTreeMap<u32, u64>,
    pub dominant: u32,
    pub boundary_fraction: f64,
    pub interior_cells: u64,
    pub window_cells: u64,
}

/// Counts, for raster cells of the integer box `window`, how many integer
/// translates `G + k` contain them.
///
/// Only interior cells (all `3^d` neighbours carry the same count) enter the
/// histogram.
pub fn shift_cover_layers<A: Approximation>(
    a: &A,
    window: &[(i64, i64)],
    resolution: u32,
) -> Result<LayerReport> {
    let d = a.dim();
    if window.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: window.len(),
        });
    }
    if window.iter().any(|(l, h)| h - l < 1) {
        return Err(Error::InvalidArgument("window sides must be at least 1".into()));
    }
    let base = rasterize(a, resolution)?;
    let r = resolution as i64;
    let origin: Vec<i64> = window.iter().map(|(l, _)| l * r).collect();
    let extent: Vec<usize> = window.iter().map(|(l, h)| ((h - l) * r) as usize).collect();
    let mut counts = Raster::empty(resolution, origin, extent);
    if counts.occupancy.len() as u64 > MAX_PIXELS {
        return Err(Error::ResourceCap {
            what: "raster cells",
            needed: counts.occupancy.len() as u64,
            cap: MAX_PIXELS,
        });
    }
    // Translates k whose raster meets the window.
    let ranges: Vec<(i64, i64)> = (0..d)
        .map(|i| {
            let lo = counts.origin_index[i] - (base.origin_index[i] + base.extent[i] as i64 - 1);
            let hi = counts.origin_index[i] + counts.extent[i] as i64 - 1 - base.origin_index[i];
            (lo.div_euclid(r), hi.div_euclid(r))
        })
        .collect();
    let occupied: Vec<Vec<i64>> = base.occupied_indices();
    let mut k: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    'translates: loop {
        for p in &occupied {
            let q: Vec<i64> = p.iter().zip(&k).map(|(p, k)| p + k * r).collect();
            if let Some(l) = counts.linear(&q) {
                counts.occupancy[l] += 1;
            }
        }
        for i in 0..d {
            k[i] += 1;
            if k[i] <= ranges[i].1 {
                continue 'translates;
            }
            k[i] = ranges[i].0;
        }
        break;
    }
    let mut histogram = BTreeMap::new();
    let n = counts.occupancy.len();
    let mut interior = 0u64;
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut t| {
            (0..d)
                .map(|_| {
                    let v = (t % 3) as i64 - 1;
                    t /= 3;
                    v
                })
                .collect()
        })
        .collect();
    for lin in 0..n {
        let idx = counts.index_of(lin);
        let c = counts.occupancy[lin];
        let same = offsets.iter().all(|o| {
            let q: Vec<i64> = idx.iter().zip(o).map(|(a, b)| a + b).collect();
            counts.linear(&q).is_some_and(|l| counts.occupancy[l] == c)
        });
        if same {
            interior += 1;
            *histogram.entry(c).or_insert(0u64) += 1;
        }
    }
    let dominant = histogram
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map_or(0, |(&c, _)| c);
    Ok(LayerReport {
        histogram,
        dominant,
        boundary_fraction: 1.0 - interior as f64 / n as f64,
        interior_cells: interior,
        window_cells: n as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{DigitSet, IntMatrix};

    fn interval(digits: &[i64], k: u32) -> AttractorApprox {
        approximate(&IntMatrix::scalar(2), &DigitSet::scalars(digits).unwrap(), k).unwrap()
    }

    #[test]
    fn unit_interval_raster() {
        let r = rasterize(&interval(&[0, 1], 6), 8).unwrap();
        assert_eq!(r.occupied_count(), 8);
        assert_eq!(r.occupied_indices(), (0..8).map(|i| vec![i]).collect::<Vec<_>>());
    }

    #[test]
    fn stretched_interval_raster() {
        let r = rasterize(&interval(&[0, 3], 6), 4).unwrap();
        assert_eq!(r.occupied_count(), 12);
    }

    #[test]
    fn dyadic_self_similarity() {
        assert_eq!(self_similarity_residual(&interval(&[0, 1], 8), 64).unwrap(), 0.0);
        assert_eq!(self_similarity_residual(&interval(&[0, 3], 8), 16).unwrap(), 0.0);
        assert!(self_similarity_residual(&interval(&[0, 1], 1), 8).is_err());
    }

    #[test]
    fn interval_layers() {
        let rep = shift_cover_layers(&interval(&[0, 1], 5), &[(-2, 2)], 8).unwrap();
        assert_eq!(rep.dominant, 1);
        assert_eq!(rep.histogram.keys().copied().collect::<Vec<_>>(), vec![1]);
        let rep = shift_cover_layers(&interval(&[0, 3], 5), &[(-4, 4)], 8).unwrap();
        assert_eq!(rep.dominant, 3);
    }

    #[test]
    fn zero_resolution_rejected() {
        assert!(rasterize(&interval(&[0, 1], 3), 0).is_err());
    }
}
