use std::collections::HashMap;

use super::geometry::bounding_box;
use super::{for_each_level, Level, DEFAULT_MAX_CELLS};
use crate::error::{Error, Result};
use crate::lattice::{det, DigitSet, IntMatrix};

const MAX_DIM: usize = 5;
type Key = [i64; MAX_DIM];
type Bits = [u64; 4];

/// Exact volume of `∪_z (z + B)` where `B` is a fixed axis box.
///
/// Each unit cell is split by the fractional parts of the box faces into at
/// most three slabs per axis; every translate covers whole atoms of that grid.
struct UnionVolume {
    d: usize,
    /// Per combination of unit-cell offsets: (offset, atom mask).
    stamps: Vec<(Key, Bits)>,
    atom_volume: Vec<f64>,
}

impl UnionVolume {
    fn new(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let d = lo.len();
        if d > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "union volume supports dimension at most {MAX_DIM}"
            )));
        }
        let mut axis_atoms: Vec<Vec<(f64, f64)>> = Vec::with_capacity(d);
        let mut axis_offsets: Vec<Vec<(i64, u8)>> = Vec::with_capacity(d);
        for i in 0..d {
            let mut cuts = vec![0.0, 1.0, lo[i] - lo[i].floor(), hi[i] - hi[i].floor()];
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
            let atoms: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();
            let mut offs = Vec::new();
            for o in lo[i].floor() as i64..hi[i].ceil() as i64 {
                let (a, b) = (lo[i] - o as f64, hi[i] - o as f64);
                let mut mask = 0u8;
                for (t, (x, y)) in atoms.iter().enumerate() {
                    let mid = 0.5 * (x + y);
                    if mid > a && mid < b {
                        mask |= 1 << t;
                    }
                }
                if mask != 0 {
                    offs.push((o, mask));
                }
            }
            axis_atoms.push(atoms);
            axis_offsets.push(offs);
        }
        let counts: Vec<usize> = axis_atoms.iter().map(Vec::len).collect();
        let n_atoms: usize = counts.iter().product();
        let mut atom_volume = vec![1.0; n_atoms];
        for (a, vol) in atom_volume.iter_mut().enumerate() {
            let mut rest = a;
            for i in 0..d {
                let (x, y) = axis_atoms[i][rest % counts[i]];
                rest /= counts[i];
                *vol *= y - x;
            }
        }
        let mut stamps = Vec::new();
        let mut choice = vec![0usize; d];
        'combos: loop {
            let mut key = [0i64; MAX_DIM];
            for i in 0..d {
                key[i] = axis_offsets[i][choice[i]].0;
            }
            let mut bits: Bits = [0; 4];
            for (a, _) in atom_volume.iter().enumerate() {
                let mut rest = a;
                let mut inside = true;
                for i in 0..d {
                    let t = rest % counts[i];
                    rest /= counts[i];
                    if axis_offsets[i][choice[i]].1 >> t & 1 == 0 {
                        inside = false;
                        break;
                    }
                }
                if inside {
                    bits[a / 64] |= 1 << (a % 64);
                }
            }
            stamps.push((key, bits));
            for i in 0..d {
                choice[i] += 1;
                if choice[i] < axis_offsets[i].len() {
                    continue 'combos;
                }
                choice[i] = 0;
            }
            break;
        }
        Ok(UnionVolume {
            d,
            stamps,
            atom_volume,
        })
    }

    fn volume(&self, level: &Level) -> f64 {
        let d = self.d;
        let mut grid: HashMap<Key, Bits> = HashMap::with_capacity(level.labels.len() * 2);
        for z in level.cells.chunks_exact(d) {
            for (off, bits) in &self.stamps {
                let mut key = [0i64; MAX_DIM];
                for i in 0..d {
                    key[i] = z[i] + off[i];
                }
                let e = grid.entry(key).or_insert([0; 4]);
                for w in 0..4 {
                    e[w] |= bits[w];
                }
            }
        }
        // Count atoms first so the float sum does not depend on hash order.
        let mut counts = vec![0u64; self.atom_volume.len()];
        for bits in grid.values() {
            for (w, &word) in bits.iter().enumerate() {
                let mut b = word;
                while b != 0 {
                    counts[w * 64 + b.trailing_zeros() as usize] += 1;
                    b &= b - 1;
                }
            }
        }
        counts
            .iter()
            .zip(&self.atom_volume)
            .map(|(&c, v)| c as f64 * v)
            .sum()
    }
}

/// `vol(Z_k + B) / |det M|^k` for `k = 1..=K`, where `B` is the certified box of `G`.
///
/// Each value bounds `μ(G)` from above because `M^k G = ∪_z (z + G)`.
pub fn measure_upper_profile(m: &IntMatrix, digits: &DigitSet, depth: u32) -> Result<Vec<f64>> {
    measure_upper_profile_capped(m, digits, depth, DEFAULT_MAX_CELLS)
}

/// [`measure_upper_profile`] with an explicit cap on cell expansions per level.
pub fn measure_upper_profile_capped(
    m: &IntMatrix,
    digits: &DigitSet,
    depth: u32,
    max_cells: u64,
) -> Result<Vec<f64>> {
    let bbox = bounding_box(m, digits)?;
    let uv = UnionVolume::new(&bbox.lo, &bbox.hi)?;
    let mdet = det(m)?.unsigned_abs() as f64;
    let mut out = Vec::with_capacity(depth as usize);
    for_each_level(m, digits, depth, max_cells, |k, level| {
        out.push(uv.volume(level) / mdet.powi(k as i32));
        Ok(())
    })?;
    Ok(out)
}

/// Best certified upper bound on `μ(G)` from depths `1..=K`; non-increasing in `K`.
pub fn measure_upper(m: &IntMatrix, digits: &DigitSet, depth: u32) -> Result<f64> {
    Ok(measure_upper_profile(m, digits, depth)?
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}
