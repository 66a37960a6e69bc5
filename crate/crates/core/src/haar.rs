//! Haar wavelets generated by a tile: `ψ_s = √m Σ_k (e_s)_k χ_{M^{-1}(G + d_k)}`.

use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::attractor::{
    approximate, label_raster, rasterize, tile_check_exact, Approximation, CellModel, LabelRaster,
    TileVerdict,
};
use crate::boxtile::{box_check_depth, is_parallelepiped};
use crate::error::{Error, Result};
use crate::lattice::{det, validate_digits, DigitSet, IntMatrix};

/// Orthonormal basis of `{x ∈ R^m : Σ x_i = 0}`.
///
/// Vector `s` (1-based) is `(1, …, 1, -s, 0, …, 0) / √(s(s+1))` with `s` ones.
#[derive(Clone, Debug, Serialize)]
pub struct HyperplaneBasis {
    pub m: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl HyperplaneBasis {
    /// Integer direction of vector `s` (0-based).
    pub fn direction(&self, s: usize) -> Vec<i64> {
        helmert_direction(self.m, s + 1)
    }

    /// `s(s+1)`, the squared length of [`Self::direction`].
    pub fn norm_squared(&self, s: usize) -> i64 {
        let s = s as i64 + 1;
        s * (s + 1)
    }
}

fn helmert_direction(m: usize, s: usize) -> Vec<i64> {
    let mut u = vec![0i64; m];
    u[..s].fill(1);
    u[s] = -(s as i64);
    u
}

pub fn hyperplane_basis(m: usize) -> Result<HyperplaneBasis> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("basis needs m ≥ 2, got {m}")));
    }
    let vectors = (1..m)
        .map(|s| {
            let scale = ((s * (s + 1)) as f64).sqrt();
            helmert_direction(m, s).into_iter().map(|u| u as f64 / scale).collect()
        })
        .collect();
    Ok(HyperplaneBasis { m, vectors })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaarFunction {
    /// `χ_G`.
    Scaling,
    /// `ψ_s`, 0-based.
    Wavelet(usize),
}

/// Wavelet generators of a tile system.
#[derive(Clone, Debug, Serialize)]
pub struct HaarSystem {
    pub matrix: IntMatrix,
    pub digits: DigitSet,
    pub basis: HyperplaneBasis,
    /// Per wavelet: `(digit index k, √m·(e_s)_k)`.
    pub pieces: Vec<Vec<(usize, f64)>>,
    /// Exact volume of each piece `M^{-1}(G + d_k)` when `G` is a certified box.
    #[serde(serialize_with = "ser_opt_ratio")]
    pub box_piece_volume: Option<Ratio<i128>>,
}

fn ser_opt_ratio<S: Serializer>(v: &Option<Ratio<i128>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_some(&r.to_string()),
        None => s.serialize_none(),
    }
}

/// Tolerance used to certify a box before taking the exact path.
const BOX_TOL: f64 = 1e-9;

pub fn build_wavelets(m: &IntMatrix, digits: &DigitSet, basis: &HyperplaneBasis) -> Result<HaarSystem> {
    if m.dim() != digits.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: digits.dim(),
        });
    }
    if basis.m != digits.len() {
        return Err(Error::DimensionMismatch {
            expected: digits.len(),
            found: basis.m,
        });
    }
    if !validate_digits(m, digits) {
        return Err(Error::InvalidDigits(
            "digits must contain 0 and form a complete residue system".into(),
        ));
    }
    let root_m = (basis.m as f64).sqrt();
    let pieces = basis
        .vectors
        .iter()
        .map(|e| e.iter().enumerate().map(|(k, &c)| (k, root_m * c)).collect())
        .collect();
    Ok(HaarSystem {
        matrix: m.clone(),
        digits: digits.clone(),
        basis: basis.clone(),
        pieces,
        box_piece_volume: certified_box_piece_volume(m, digits)?,
    })
}

fn certified_box_piece_volume(m: &IntMatrix, digits: &DigitSet) -> Result<Option<Ratio<i128>>> {
    let report = tile_check_exact(m, digits)?;
    let measure = match (report.verdict, report.measure) {
        (TileVerdict::Tile, _) => 1,
        (TileVerdict::NotTile, Some(q)) if q > 0 => q,
        _ => return Ok(None),
    };
    let a = approximate(m, digits, box_check_depth(m)?)?;
    if !is_parallelepiped(&a, BOX_TOL)?.is_box {
        return Ok(None);
    }
    let mdet = det(m)?.unsigned_abs() as i128;
    Ok(Some(Ratio::new(measure as i128, mdet)))
}

impl HaarSystem {
    pub fn m(&self) -> usize {
        self.basis.m
    }

    pub fn wavelet_count(&self) -> usize {
        self.pieces.len()
    }

    /// Coefficient of `f` on piece `k`.
    pub fn coefficient(&self, f: HaarFunction, k: usize) -> f64 {
        match f {
            HaarFunction::Scaling => 1.0,
            HaarFunction::Wavelet(s) => self.pieces[s][k].1,
        }
    }

    /// `χ_G` followed by every `ψ_s`.
    pub fn functions(&self) -> Vec<HaarFunction> {
        std::iter::once(HaarFunction::Scaling)
            .chain((0..self.wavelet_count()).map(HaarFunction::Wavelet))
            .collect()
    }

    /// `f = c · Σ_k a_k χ_k` with integer `a` and exact `c`.
    fn exact_form(&self, f: HaarFunction) -> (Surd, Vec<i64>) {
        match f {
            HaarFunction::Scaling => (Surd::one(), vec![1; self.m()]),
            HaarFunction::Wavelet(s) => {
                let n = self.basis.norm_squared(s) as i128;
                // √m / √n = √(m n) / n
                let c = Surd::sqrt(self.m() as i128 * n).scale(Ratio::new(1, n));
                (c, self.basis.direction(s))
            }
        }
    }

    /// `∫ f`, exact; needs a certified box.
    pub fn integral_exact(&self, f: HaarFunction) -> Result<Surd> {
        let vol = self.require_box()?;
        let (c, a) = self.exact_form(f);
        let sum: i128 = a.iter().map(|&x| x as i128).sum();
        Ok(c.scale(vol * Ratio::from_integer(sum)))
    }

    pub fn inner_product_exact(&self, f: HaarFunction, g: HaarFunction) -> Result<Surd> {
        let vol = self.require_box()?;
        let (cf, af) = self.exact_form(f);
        let (cg, ag) = self.exact_form(g);
        let dot: i128 = af.iter().zip(&ag).map(|(&x, &y)| x as i128 * y as i128).sum();
        Ok((cf * cg).scale(vol * Ratio::from_integer(dot)))
    }

    /// Gram matrix over [`Self::functions`], exact.
    pub fn gram_exact(&self) -> Result<Vec<Vec<Surd>>> {
        let fs = self.functions();
        fs.iter()
            .map(|&f| fs.iter().map(|&g| self.inner_product_exact(f, g)).collect())
            .collect()
    }

    fn require_box(&self) -> Result<Ratio<i128>> {
        self.box_piece_volume.ok_or_else(|| {
            Error::InvalidArgument("exact inner products need a certified box tile".into())
        })
    }

    /// Pointwise evaluator backed by the depth-`K` partition of `G`.
    pub fn evaluator(&self, depth: u32) -> Result<Evaluator<'_>> {
        let a = approximate(&self.matrix, &self.digits, depth)?;
        let model = a.model()?;
        if !model.is_partition() {
            return Err(Error::InvalidArgument(
                "pointwise evaluation needs a system that tiles by its digit lattice".into(),
            ));
        }
        Ok(Evaluator { system: self, model })
    }
}

pub struct Evaluator<'a> {
    system: &'a HaarSystem,
    model: CellModel,
}

impl Evaluator<'_> {
    pub fn eval(&self, f: HaarFunction, x: &[f64]) -> f64 {
        match self.model.locate(x) {
            Some(k) => self.system.coefficient(f, k as usize),
            None => 0.0,
        }
    }

    pub fn extent(&self) -> (Vec<f64>, Vec<f64>) {
        self.model.extent()
    }
}

/// Raster quadrature result.
#[derive(Clone, Debug, Serialize)]
pub struct RasterGram {
    pub functions: usize,
    pub gram: Vec<Vec<f64>>,
    /// `max |gram − I|`.
    pub deviation: f64,
    /// Occupied cells with a differently labelled neighbour, as a fraction of occupied cells.
    pub boundary_fraction: f64,
    /// Bound on any entry's quadrature error: boundary volume times the largest coefficient product.
    pub error_bound: f64,
    pub depth: u32,
    pub resolution: u32,
}

/// Gram matrix over [`HaarSystem::functions`] by pixel-centre quadrature.
pub fn gram_raster(sys: &HaarSystem, depth: u32, resolution: u32) -> Result<RasterGram> {
    let a = approximate(&sys.matrix, &sys.digits, depth)?;
    let lr = label_raster(&a, resolution)?;
    let fs = sys.functions();
    let m = sys.m();
    // Pixel counts per piece give every inner product.
    let mut count = vec![0u64; m];
    for &l in &lr.labels {
        if l != u32::MAX {
            count[l as usize] += 1;
        }
    }
    let px = (resolution as f64).powi(sys.matrix.dim() as i32);
    let gram: Vec<Vec<f64>> = fs
        .iter()
        .map(|&f| {
            fs.iter()
                .map(|&g| {
                    (0..m)
                        .map(|k| sys.coefficient(f, k) * sys.coefficient(g, k) * count[k] as f64)
                        .sum::<f64>()
                        / px
                })
                .collect()
        })
        .collect();
    let deviation = gram
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (v - (i == j) as u8 as f64).abs()))
        .fold(0.0, f64::max);
    let boundary = boundary_cells(&lr);
    let occupied: u64 = count.iter().sum();
    let cmax = (0..m)
        .flat_map(|k| fs.iter().map(move |&f| (f, k)))
        .map(|(f, k)| sys.coefficient(f, k).abs())
        .fold(0.0, f64::max);
    Ok(RasterGram {
        functions: fs.len(),
        gram,
        deviation,
        boundary_fraction: if occupied == 0 { 0.0 } else { boundary as f64 / occupied as f64 },
        error_bound: cmax * cmax * boundary as f64 / px,
        depth,
        resolution,
    })
}

fn boundary_cells(lr: &LabelRaster) -> u64 {
    let r = &lr.raster;
    let d = r.dim();
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
    (0..lr.labels.len())
        .into_par_iter()
        .filter(|&lin| {
            let l = lr.labels[lin];
            if l == u32::MAX {
                return false;
            }
            let idx = r.index_of(lin);
            offsets.iter().any(|o| {
                let q: Vec<i64> = idx.iter().zip(o).map(|(a, b)| a + b).collect();
                r.linear(&q).map_or(true, |n| lr.labels[n] != l)
            })
        })
        .count() as u64
}

/// `max_k |⟨χ_G, χ_G(· + k)⟩ − δ_{k0}|` over integer `k` in the window, by raster overlap.
pub fn shift_orthonormality(
    m: &IntMatrix,
    digits: &DigitSet,
    window: &[(i64, i64)],
    depth: u32,
    resolution: u32,
) -> Result<f64> {
    let d = m.dim();
    if window.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: window.len(),
        });
    }
    let a = approximate(m, digits, depth)?;
    let r = rasterize(&a, resolution)?;
    let px = (resolution as f64).powi(d as i32);
    let occupied = r.occupied_indices();
    let res = resolution as i64;
    let mut k: Vec<i64> = window.iter().map(|w| w.0).collect();
    if window.iter().any(|(lo, hi)| lo > hi) {
        return Err(Error::InvalidArgument("empty window".into()));
    }
    let mut worst = 0.0f64;
    'shifts: loop {
        let hits = occupied
            .iter()
            .filter(|p| {
                let q: Vec<i64> = p.iter().zip(&k).map(|(p, k)| p + k * res).collect();
                r.get(&q) > 0
            })
            .count();
        let target = k.iter().all(|&x| x == 0) as u8 as f64;
        worst = worst.max((hits as f64 / px - target).abs());
        for i in 0..d {
            k[i] += 1;
            if k[i] <= window[i].1 {
                continue 'shifts;
            }
            k[i] = window[i].0;
        }
        break;
    }
    Ok(worst)
}

/// `‖m^{j/2} f(M^j ·)‖₂²` by pixel-centre quadrature over `M^{-j}` of the support frame.
pub fn scaled_norm_squared(
    sys: &HaarSystem,
    f: HaarFunction,
    j: u32,
    depth: u32,
    resolution: u32,
) -> Result<f64> {
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let ev = sys.evaluator(depth)?;
    let d = sys.matrix.dim();
    let mj = sys.matrix.pow(j)?;
    let mj_f = mj.to_f64();
    let mj_inv = mj.inverse_f64()?;
    let (lo, hi) = ev.extent();
    // Axis box around M^{-j} of the support box.
    let mut flo = vec![f64::INFINITY; d];
    let mut fhi = vec![f64::NEG_INFINITY; d];
    for c in (crate::attractor::BoundingBox { lo, hi }).corners() {
        for i in 0..d {
            let y: f64 = (0..d).map(|t| mj_inv[i * d + t] * c[t]).sum();
            flo[i] = flo[i].min(y);
            fhi[i] = fhi[i].max(y);
        }
    }
    let r = resolution as f64;
    let origin: Vec<i64> = flo.iter().map(|x| (x * r).floor() as i64).collect();
    let extent: Vec<usize> = (0..d)
        .map(|i| ((fhi[i] * r).ceil() as i64 - origin[i]).max(1) as usize)
        .collect();
    let total: u128 = extent.iter().map(|&e| e as u128).product();
    if total > crate::attractor::MAX_PIXELS as u128 {
        return Err(Error::ResourceCap {
            what: "raster cells",
            needed: total.min(u64::MAX as u128) as u64,
            cap: crate::attractor::MAX_PIXELS,
        });
    }
    let frame = crate::attractor::Raster::empty(resolution, origin, extent);
    let m = sys.m();
    // Integer counts per piece keep the result independent of the thread count.
    let counts = (0..total as usize)
        .into_par_iter()
        .fold(
            || vec![0u64; m],
            |mut acc, lin| {
                let idx = frame.index_of(lin);
                let x: Vec<f64> = idx.iter().map(|&p| (p as f64 + 0.5) / r).collect();
                let y: Vec<f64> = (0..d)
                    .map(|i| (0..d).map(|t| mj_f[i * d + t] * x[t]).sum())
                    .collect();
                if let Some(k) = ev.model.locate(&y) {
                    acc[k as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; m],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let sum: f64 = (0..m)
        .map(|k| {
            let c = sys.coefficient(f, k);
            c * c * counts[k] as f64
        })
        .sum();
    let mdet = det(&sys.matrix)?.unsigned_abs() as f64;
    Ok(mdet.powi(j as i32) * sum / r.powi(d as i32))
}

/// Exact number `rational · √radicand` with square-free `radicand ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Surd {
    pub rational: Ratio<i128>,
    pub radicand: i128,
}

impl Surd {
    pub fn one() -> Self {
        Surd {
            rational: Ratio::one(),
            radicand: 1,
        }
    }

    pub fn rational(r: Ratio<i128>) -> Self {
        Surd {
            rational: r,
            radicand: 1,
        }
    }

    /// `√n` for `n ≥ 1`.
    pub fn sqrt(n: i128) -> Self {
        let (outer, inner) = split_square(n);
        Surd {
            rational: Ratio::from_integer(outer),
            radicand: inner,
        }
    }

    pub fn scale(self, r: Ratio<i128>) -> Self {
        let rational = self.rational * r;
        Surd {
            rational,
            radicand: if rational.is_zero() { 1 } else { self.radicand },
        }
    }

    fn with_radicand(self, radicand: i128) -> Self {
        Surd {
            radicand: if self.rational.is_zero() { 1 } else { radicand },
            ..self
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        crate::lattice::ratio_f64(&self.rational) * (self.radicand as f64).sqrt()
    }
}

impl std::ops::Mul for Surd {
    type Output = Surd;

    fn mul(self, other: Surd) -> Surd {
        let (outer, inner) = split_square(self.radicand * other.radicand);
        Surd::rational(self.rational * other.rational * Ratio::from_integer(outer)).with_radicand(inner)
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radicand == 1 {
            write!(f, "{}", self.rational)
        } else if self.rational.abs().is_one() {
            let sign = if self.rational.is_negative() { "-" } else { "" };
            write!(f, "{sign}√{}", self.radicand)
        } else {
            write!(f, "{}·√{}", self.rational, self.radicand)
        }
    }
}

impl Serialize for Surd {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `n = outer² · inner` with `inner` square-free.
fn split_square(n: i128) -> (i128, i128) {
    let mut inner = n;
    let mut outer = 1;
    let mut p = 2;
    while p * p <= inner {
        while inner % (p * p) == 0 {
            inner /= p * p;
            outer *= p;
        }
        p += 1;
    }
    (outer, inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxtile::{box_digits, build_cyclic_matrix, BoxForm};
    use approx::assert_abs_diff_eq;

    #[test]
    fn helmert_vectors() {
        let b = hyperplane_basis(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(b.vectors.len(), 1);
        assert_abs_diff_eq!(b.vectors[0][0], h, epsilon = 1e-15);
        assert_abs_diff_eq!(b.vectors[0][1], -h, epsilon = 1e-15);
        let b = hyperplane_basis(3).unwrap();
        let s6 = 6f64.sqrt();
        assert_abs_diff_eq!(b.vectors[1][0], 1.0 / s6, epsilon = 1e-15);
        assert_abs_diff_eq!(b.vectors[1][2], -2.0 / s6, epsilon = 1e-15);
        assert!(hyperplane_basis(1).is_err());
    }

    #[test]
    fn classic_haar_pieces() {
        let m = IntMatrix::scalar(2);
        let d = DigitSet::scalars(&[0, 1]).unwrap();
        let sys = build_wavelets(&m, &d, &hyperplane_basis(2).unwrap()).unwrap();
        assert_abs_diff_eq!(sys.pieces[0][0].1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sys.pieces[0][1].1, -1.0, epsilon = 1e-12);
        let ev = sys.evaluator(6).unwrap();
        let psi = HaarFunction::Wavelet(0);
        assert_eq!(ev.eval(psi, &[0.2]), sys.pieces[0][0].1);
        assert_eq!(ev.eval(psi, &[0.7]), sys.pieces[0][1].1);
        assert_eq!(ev.eval(psi, &[1.3]), 0.0);
        let g = sys.gram_exact().unwrap();
        assert_eq!(g[0][0], Surd::one());
        assert_eq!(g[1][1], Surd::one());
        assert!(g[0][1].is_zero());
    }

    #[test]
    fn box_tile_gram_is_identity() {
        let f = BoxForm::new(vec![3, 2, 2], 1).unwrap();
        let m = build_cyclic_matrix(&f).unwrap();
        let d = box_digits(&f).unwrap();
        let sys = build_wavelets(&m, &d, &hyperplane_basis(12).unwrap()).unwrap();
        assert_eq!(sys.wavelet_count(), 11);
        assert!(sys.pieces.iter().all(|p| p.len() == 12));
        let g = sys.gram_exact().unwrap();
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { Surd::one() } else { Surd::rational(Ratio::zero()) };
                assert_eq!(*v, want, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn exact_path_needs_box() {
        let m = IntMatrix::new(vec![vec![1, 1], vec![-1, 1]]).unwrap();
        let d = DigitSet::new(vec![vec![0, 0], vec![1, 0]]).unwrap();
        let sys = build_wavelets(&m, &d, &hyperplane_basis(2).unwrap()).unwrap();
        assert!(sys.box_piece_volume.is_none());
        assert!(sys.gram_exact().is_err());
    }

    #[test]
    fn haar_shift_orthonormality() {
        let m = IntMatrix::scalar(2);
        let v = shift_orthonormality(&m, &DigitSet::scalars(&[0, 1]).unwrap(), &[(-2, 2)], 6, 16).unwrap();
        assert_eq!(v, 0.0);
        let v = shift_orthonormality(&m, &DigitSet::scalars(&[0, 3]).unwrap(), &[(1, 1)], 8, 16).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn surd_arithmetic() {
        assert_eq!(split_square(72), (6, 2));
        let a = Surd::sqrt(6) * Surd::sqrt(6);
        assert_eq!(a, Surd::rational(Ratio::from_integer(6)));
        assert_eq!(Surd::sqrt(8).to_string(), "2·√2");
    }
}
