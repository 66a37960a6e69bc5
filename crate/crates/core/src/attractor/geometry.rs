use num_rational::Ratio;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{hnf_columns, DigitSet, IntMatrix};
use crate::linalg::{self, contraction_exponent, inf_norm, mat_mul};

/// Axis-aligned box `Π [lo_i, hi_i]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).collect()
    }

    pub fn volume(&self) -> f64 {
        self.widths().iter().product()
    }

    pub fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] })
                    .collect()
            })
            .collect()
    }
}

/// Below this the geometric tail of the support series is dropped into the box margin.
const TAIL_TOL: f64 = 1e-13;
const MAX_TERMS: usize = 200_000;

/// Tight axis box of the attractor of `x ↦ M^{-1}(x + s)`, given `M^{-1}`.
///
/// Each face is the support value `Σ_j max_s ⟨M^{-j}s, ±e_i⟩` summed until the
/// certified geometric tail is negligible; the tail bound is added outward.
pub fn real_bounding_box(m_inv: &[f64], shifts: &[Vec<f64>]) -> Result<BoundingBox> {
    let d = shifts.first().map(Vec::len).ok_or(Error::Empty("shift set"))?;
    if m_inv.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: m_inv.len(),
        });
    }
    let j = contraction_exponent(m_inv, d).ok_or(Error::NotExpanding)?;
    let cmax = shifts
        .iter()
        .flat_map(|s| s.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    // ahead[r] = M^{-(n+1+r)} for r < j, with its norm
    let mut ahead: std::collections::VecDeque<(Vec<f64>, f64)> = std::collections::VecDeque::new();
    let mut p = m_inv.to_vec();
    let mut last = p.clone();
    for _ in 0..j {
        let n = inf_norm(&last, d);
        ahead.push_back((last.clone(), n));
        last = mat_mul(&last, m_inv, d);
    }
    let mut v = vec![0.0; d];
    let mut tail = f64::INFINITY;
    for _ in 0..MAX_TERMS {
        let (cur, _) = ahead.pop_front().expect("window nonempty");
        p.clone_from(&cur);
        for i in 0..d {
            let (mut mx, mut mn) = (f64::NEG_INFINITY, f64::INFINITY);
            for s in shifts {
                linalg::mat_vec(&p, s, &mut v);
                mx = mx.max(v[i]);
                mn = mn.min(v[i]);
            }
            hi[i] += mx;
            lo[i] += mn;
        }
        let n = inf_norm(&last, d);
        ahead.push_back((last.clone(), n));
        last = mat_mul(&last, m_inv, d);
        tail = 2.0 * cmax * ahead.iter().map(|(_, n)| n).sum::<f64>();
        if tail <= TAIL_TOL * cmax.max(1.0) {
            break;
        }
    }
    Ok(BoundingBox {
        lo: lo.iter().map(|x| x - tail).collect(),
        hi: hi.iter().map(|x| x + tail).collect(),
    })
}

pub fn bounding_box(m: &IntMatrix, shifts: &DigitSet) -> Result<BoundingBox> {
    let inv = m.inverse_f64()?;
    let s: Vec<Vec<f64>> = shifts
        .digits()
        .iter()
        .map(|v| v.iter().map(|&x| x as f64).collect())
        .collect();
    real_bounding_box(&inv, &s)
}

/// Barycentre of the self-affine measure, `(M - I)^{-1} · mean(S)`, exactly.
///
/// For a tile this is the centroid of `G` itself.
pub fn centroid(m: &IntMatrix, shifts: &DigitSet) -> Result<Vec<Ratio<i128>>> {
    let d = m.dim();
    let mut shifted = m.entries().to_vec();
    for i in 0..d {
        shifted[i * d + i] -= 1;
    }
    let inv = IntMatrix::from_flat(d, shifted)?.inverse_rational()?;
    let n = shifts.len() as i128;
    let mean: Vec<Ratio<i128>> = (0..d)
        .map(|i| Ratio::new(shifts.digits().iter().map(|s| s[i] as i128).sum(), n))
        .collect();
    Ok((0..d)
        .map(|i| {
            (0..d).fold(Ratio::zero(), |acc, j| acc + inv[i * d + j] * mean[j])
        })
        .collect())
}

pub(crate) fn real_centroid(m: &[f64], shifts: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = shifts[0].len();
    let mut a = m.to_vec();
    for i in 0..d {
        a[i * d + i] -= 1.0;
    }
    let inv = linalg::inverse(&a, d)?;
    let mean: Vec<f64> = (0..d)
        .map(|i| shifts.iter().map(|s| s[i]).sum::<f64>() / shifts.len() as f64)
        .collect();
    let mut out = vec![0.0; d];
    linalg::mat_vec(&inv, &mean, &mut out);
    Ok(out)
}

/// The system rewritten in a basis of the smallest `M`-invariant lattice `L ⊇ D`.
///
/// In those coordinates the attractor is `B^{-1}G` for the reduced data
/// `(B^{-1} M B, B^{-1} D)`, and its measure scales by `index = |det B|`.
#[derive(Clone, Debug)]
pub(crate) struct Reduction {
    /// Columns form the basis `B` of `L`.
    pub basis: IntMatrix,
    pub index: i64,
    pub matrix: IntMatrix,
    pub digits: DigitSet,
    adj: Vec<i128>,
    det: i128,
}

impl Reduction {
    /// `B^{-1} v` for `v ∈ L`.
    pub fn coords(&self, v: &[i64]) -> Result<Vec<i64>> {
        let d = self.basis.dim();
        (0..d)
            .map(|i| {
                let mut acc = 0i128;
                for j in 0..d {
                    acc += self.adj[i * d + j] * v[j] as i128;
                }
                if acc % self.det != 0 {
                    return Err(Error::InvalidArgument("vector outside the digit lattice".into()));
                }
                i64::try_from(acc / self.det).map_err(|_| Error::Overflow("lattice coordinates"))
            })
            .collect()
    }
}

/// `None` when the digits span a lower-dimensional lattice.
pub(crate) fn reduce(m: &IntMatrix, digits: &DigitSet) -> Result<Option<Reduction>> {
    let d = m.dim();
    let mut gens = Vec::with_capacity(digits.len() * d);
    for s in digits.digits() {
        let mut v = s.clone();
        for _ in 0..d {
            gens.push(v.clone());
            v = m.mul_vec(&v)?;
        }
    }
    let cols = hnf_columns(&gens, d)?;
    if cols.len() < d {
        return Ok(None);
    }
    let mut b = vec![0i64; d * d];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..d {
            b[i * d + j] = i64::try_from(c[i]).map_err(|_| Error::Overflow("lattice basis"))?;
        }
    }
    let basis = IntMatrix::from_flat(d, b)?;
    let (adj, det) = basis.adjugate()?;
    let mb = m.mul(&basis)?;
    let mut red = vec![0i64; d * d];
    let mut partial = Reduction {
        basis: basis.clone(),
        index: i64::try_from(det.abs()).map_err(|_| Error::Overflow("lattice index"))?,
        matrix: IntMatrix::identity(d),
        digits: digits.clone(),
        adj,
        det,
    };
    for j in 0..d {
        let col: Vec<i64> = (0..d).map(|i| mb.get(i, j)).collect();
        let c = partial.coords(&col)?;
        for i in 0..d {
            red[i * d + j] = c[i];
        }
    }
    partial.matrix = IntMatrix::from_flat(d, red)?;
    partial.digits = DigitSet::new(
        digits
            .digits()
            .iter()
            .map(|v| partial.coords(v))
            .collect::<Result<_>>()?,
    )?;
    Ok(Some(partial))
}
