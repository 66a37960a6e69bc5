//! One-dimensional integer attractors: direct sums, segment tilings,
//! l-sets and the decomposition into arithmetic progressions.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{DigitSet, IntMatrix};

/// Strictly increasing nonnegative integers starting at 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct IntSet1D(Vec<i64>);

impl IntSet1D {
    /// Sorts the input; rejects duplicates, negatives and a missing 0.
    pub fn new(mut elements: Vec<i64>) -> Result<Self> {
        elements.sort_unstable();
        if elements.is_empty() {
            return Err(Error::Empty("integer set"));
        }
        if elements[0] != 0 {
            return Err(Error::InvalidArgument(format!(
                "integer set must start at 0, smallest element is {}",
                elements[0]
            )));
        }
        if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("duplicate element {}", w[0])));
        }
        Ok(IntSet1D(elements))
    }

    /// `{0, 1, …, n-1}`.
    pub fn segment(n: i64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument(format!("segment length must be positive, got {n}")));
        }
        Ok(IntSet1D((0..n).collect()))
    }

    pub fn zero() -> Self {
        IntSet1D(vec![0])
    }

    pub fn elements(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max(&self) -> i64 {
        *self.0.last().expect("nonempty")
    }

    pub fn contains(&self, x: i64) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    /// Smallest difference of consecutive elements; `None` for `{0}`.
    pub fn min_gap(&self) -> Option<i64> {
        self.0.windows(2).map(|w| w[1] - w[0]).min()
    }

    pub fn to_digits(&self) -> DigitSet {
        DigitSet::scalars(&self.0).expect("nonempty")
    }
}

impl TryFrom<Vec<i64>> for IntSet1D {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        IntSet1D::new(v)
    }
}

impl From<IntSet1D> for Vec<i64> {
    fn from(s: IntSet1D) -> Self {
        s.0
    }
}

impl fmt::Display for IntSet1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// `{0, a, 2a, …, a(d-1)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Progression {
    pub a: i64,
    pub d: i64,
}

impl Progression {
    pub fn new(a: i64, d: i64) -> Result<Self> {
        if a < 1 || d < 2 {
            return Err(Error::InvalidArgument(format!(
                "progression needs step ≥ 1 and length ≥ 2, got ({a}, {d})"
            )));
        }
        a.checked_mul(d).ok_or(Error::Overflow("progression"))?;
        Ok(Progression { a, d })
    }

    pub fn to_set(&self) -> IntSet1D {
        IntSet1D((0..self.d).map(|k| k * self.a).collect())
    }
}

/// `A ⊕ B`, defined when all pairwise sums differ.
pub fn direct_sum(a: &IntSet1D, b: &IntSet1D) -> Result<IntSet1D> {
    let mut seen: HashMap<i64, (i64, i64)> = HashMap::with_capacity(a.len() * b.len());
    for &x in a.elements() {
        for &y in b.elements() {
            let s = x.checked_add(y).ok_or(Error::Overflow("direct sum"))?;
            if let Some(&(x0, y0)) = seen.get(&s) {
                return Err(Error::Collision {
                    a1: x0,
                    b1: y0,
                    a2: x,
                    b2: y,
                });
            }
            seen.insert(s, (x, y));
        }
    }
    let mut out: Vec<i64> = seen.into_keys().collect();
    out.sort_unstable();
    Ok(IntSet1D(out))
}

/// The unique `B` with `A ⊕ B = sum`, by repeatedly removing `A + min`.
pub fn cancel(a: &IntSet1D, sum: &IntSet1D) -> Result<IntSet1D> {
    let mut rest: BTreeSet<i64> = sum.elements().iter().copied().collect();
    let mut b = Vec::new();
    while let Some(&low) = rest.first() {
        for &x in a.elements() {
            if !rest.remove(&(low + x)) {
                return Err(Error::NoCancellation);
            }
        }
        b.push(low);
    }
    Ok(IntSet1D(b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NotTilingReason {
    /// The forced translate at the leftmost hole overlaps earlier ones.
    Overlap,
    /// The filling pattern repeats, so the leftmost hole never closes.
    Cycle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TilingVerdict {
    /// `Y ⊕ shifts = {0, …, n-1}`.
    Tiling { n: i64, shifts: IntSet1D },
    /// Proof that no segment is tiled.
    NotTiling { reason: NotTilingReason, hole: i64 },
    /// No tiling of a segment of length at most `n_max`; larger ones not ruled out.
    Bounded { n_max: i64 },
}

/// `|Y| · 2^{max(Y) − |Y| + 1}`, capped at 10⁶.
pub fn default_n_max(y: &IntSet1D) -> i64 {
    const CAP: i64 = 1_000_000;
    let e = y.max() - y.len() as i64 + 1;
    if e >= 40 {
        return CAP;
    }
    (y.len() as i64).saturating_mul(1i64 << e.max(0)).clamp(y.max() + 1, CAP.max(y.max() + 1))
}

/// Tiles `{0, …, N-1}` by translates of `Y`, always covering the leftmost hole.
///
/// A translate covering the leftmost hole must start there, so the search has
/// no choices: it either closes a segment, overlaps, or revisits a filling
/// pattern.
pub fn tiling_oracle(y: &IntSet1D, n_max: Option<i64>) -> Result<TilingVerdict> {
    let top = y.max();
    let n_max = n_max.unwrap_or_else(|| default_n_max(y));
    if n_max < top + 1 {
        return Err(Error::InvalidArgument(format!(
            "n_max must be at least max(Y) + 1 = {}, got {n_max}",
            top + 1
        )));
    }
    let width = top as usize + 1;
    let mut shape = Bits::new(width);
    for &x in y.elements() {
        shape.set(x as usize);
    }
    let mut state = Bits::new(width);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut hole = 0i64;
    let mut shifts = Vec::new();
    loop {
        if state.intersects(&shape) {
            return Ok(TilingVerdict::NotTiling {
                reason: NotTilingReason::Overlap,
                hole,
            });
        }
        if !state.is_zero() && !seen.insert(state.words.clone()) {
            return Ok(TilingVerdict::NotTiling {
                reason: NotTilingReason::Cycle,
                hole,
            });
        }
        if hole + top + 1 > n_max {
            return Ok(TilingVerdict::Bounded { n_max });
        }
        state.or_assign(&shape);
        shifts.push(hole);
        let t = state.trailing_ones();
        state.shift_down(t);
        hole += t as i64;
        if state.is_zero() {
            return Ok(TilingVerdict::Tiling {
                n: hole,
                shifts: IntSet1D(shifts),
            });
        }
    }
}

/// Fixed-width bit set.
struct Bits {
    width: usize,
    words: Vec<u64>,
}

impl Bits {
    fn new(width: usize) -> Self {
        Bits {
            width,
            words: vec![0; width.div_ceil(64)],
        }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn intersects(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    fn or_assign(&mut self, other: &Bits) {
        self.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a |= b);
    }

    fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn trailing_ones(&self) -> usize {
        let mut n = 0;
        for &w in &self.words {
            let t = w.trailing_ones() as usize;
            n += t;
            if t < 64 {
                break;
            }
        }
        n.min(self.width)
    }

    fn shift_down(&mut self, t: usize) {
        let (wq, bq) = (t / 64, t % 64);
        let n = self.words.len();
        for i in 0..n {
            let lo = self.words.get(i + wq).copied().unwrap_or(0);
            let hi = self.words.get(i + wq + 1).copied().unwrap_or(0);
            self.words[i] = if bq == 0 { lo } else { (lo >> bq) | (hi << (64 - bq)) };
        }
    }
}

/// True when `L` is a union of blocks `{jl, …, jl + l − 1}`.
pub fn is_l_set(set: &IntSet1D, l: i64) -> Result<bool> {
    if l <= 0 {
        return Err(Error::InvalidArgument(format!("l must be positive, got {l}")));
    }
    Ok(set.elements().iter().all(|&x| {
        let start = x.div_euclid(l) * l;
        (start..start + l).all(|y| set.contains(y))
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Classification {
    /// `Y` is the direct sum of these progressions, steps increasing.
    Simple { progressions: Vec<Progression> },
    /// Peeling stopped; `rest` is what remained after the listed progressions.
    NotSimple {
        progressions: Vec<Progression>,
        rest: IntSet1D,
        reason: String,
    },
}

impl Classification {
    pub fn is_simple(&self) -> bool {
        matches!(self, Classification::Simple { .. })
    }

    pub fn progressions(&self) -> &[Progression] {
        match self {
            Classification::Simple { progressions } | Classification::NotSimple { progressions, .. } => {
                progressions
            }
        }
    }
}

/// Canonical decomposition into progressions `(a_k, d_k)` with `a_k d_k | a_{k+1}`.
///
/// Each step takes `a` = smallest nonzero element and the longest run
/// `0, a, …, a(d−1)` that splits off as a direct summand.
pub fn classify(y: &IntSet1D) -> Classification {
    let mut rest = y.clone();
    let mut progressions: Vec<Progression> = Vec::new();
    while rest.len() > 1 {
        let a = rest.elements()[1];
        let run = 1 + (1..).take_while(|&k| rest.contains(k * a)).count() as i64;
        let peeled = (2..=run).rev().find_map(|d| {
            let p = Progression { a, d };
            cancel(&p.to_set(), &rest).ok().map(|b| (p, b))
        });
        let Some((p, b)) = peeled else {
            return Classification::NotSimple {
                progressions,
                rest,
                reason: format!("no progression with step {a} splits off"),
            };
        };
        if let Some(span) = progressions.last().map(|q| q.a * q.d) {
            if a % span != 0 {
                progressions.push(p);
                return Classification::NotSimple {
                    progressions,
                    rest: b,
                    reason: format!("step {a} is not a multiple of {span}"),
                };
            }
        }
        progressions.push(p);
        rest = b;
    }
    Classification::Simple { progressions }
}

/// Coefficients of `Σ_{a∈A} z^a`, lowest degree first.
pub fn poly_of_set(a: &IntSet1D) -> Vec<i64> {
    let mut p = vec![0; a.max() as usize + 1];
    for &x in a.elements() {
        p[x as usize] = 1;
    }
    p
}

pub fn poly_mul(p: &[i64], q: &[i64]) -> Vec<i64> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0i64; p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Equality ignoring trailing zero coefficients.
pub fn poly_eq(p: &[i64], q: &[i64]) -> bool {
    fn trim(p: &[i64]) -> &[i64] {
        let n = p.iter().rposition(|&c| c != 0).map_or(0, |i| i + 1);
        &p[..n]
    }
    trim(p) == trim(q)
}

/// `P_d(z^a) = 1 + z^a + … + z^{a(d-1)}`.
pub fn segment_poly(d: i64, a: i64) -> Vec<i64> {
    let mut p = vec![0; (a * (d - 1)) as usize + 1];
    for k in 0..d {
        p[(k * a) as usize] = 1;
    }
    p
}

/// `(a_k, d_k)` with `a_k = d_1 ⋯ d_{k-1}`.
pub fn progression_family(ds: &[i64]) -> Result<Vec<Progression>> {
    let mut a = 1i64;
    let mut out = Vec::with_capacity(ds.len());
    for &d in ds {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("factors must be at least 2, got {d}")));
        }
        out.push(Progression::new(a, d)?);
        a = a.checked_mul(d).ok_or(Error::Overflow("progression family"))?;
    }
    Ok(out)
}

pub fn sum_progressions(ps: &[Progression]) -> Result<IntSet1D> {
    ps.iter()
        .try_fold(IntSet1D::zero(), |acc, p| direct_sum(&acc, &p.to_set()))
}

/// Ordered factorizations of `n` into factors ≥ 2; `n = 1` has only the empty one.
pub fn ordered_factorizations(n: i64) -> Vec<Vec<i64>> {
    fn rec(n: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if n == 1 {
            out.push(cur.clone());
            return;
        }
        for f in 2..=n {
            if n % f == 0 {
                cur.push(f);
                rec(n / f, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    if n >= 1 {
        rec(n, &mut Vec::new(), &mut out);
    }
    out
}

/// All direct sums of subsets of `progression_family(f)` over ordered factorizations `f` of `n`,
/// sorted by size then elements.
pub fn enumerate_simple(n: i64) -> Result<Vec<IntSet1D>> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("N must be positive, got {n}")));
    }
    let mut found = BTreeSet::new();
    for f in ordered_factorizations(n) {
        let family = progression_family(&f)?;
        for mask in 0u64..1 << family.len() {
            let chosen: Vec<Progression> = (0..family.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| family[i])
                .collect();
            let set = sum_progressions(&chosen)?;
            found.insert((set.len(), set));
        }
    }
    Ok(found.into_iter().map(|(_, s)| s).collect())
}

/// Attractor `W = ∪_{y∈Y} [y, y+1]` as the system `(N, L ⊕ N·Y)` where `Y ⊕ L = {0..N-1}`.
pub fn attractor_system(y: &IntSet1D) -> Result<(IntMatrix, DigitSet)> {
    let TilingVerdict::Tiling { n, shifts } = tiling_oracle(y, None)? else {
        return Err(Error::InvalidArgument(format!("{y} does not tile a segment")));
    };
    let scaled = IntSet1D(y.elements().iter().map(|&v| v * n).collect());
    let digits = direct_sum(&shifts, &scaled)?;
    Ok((IntMatrix::scalar(n), digits.to_digits()))
}

/// Disjoint, non-adjacent segments `[start, start + length]`, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSet {
    segments: Vec<(i64, i64)>,
}

impl SegmentSet {
    pub fn new(segments: Vec<(i64, i64)>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Empty("segment set"));
        }
        if let Some(&(s, l)) = segments.iter().find(|(_, l)| *l <= 0) {
            return Err(Error::InvalidSegments(format!("segment at {s} has length {l}")));
        }
        for w in segments.windows(2) {
            if w[1].0 <= w[0].0 + w[0].1 {
                return Err(Error::InvalidSegments(format!(
                    "segments at {} and {} overlap, touch or are unsorted",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(SegmentSet { segments })
    }

    /// From closed intervals `[start, end]`.
    pub fn from_intervals(intervals: &[(i64, i64)]) -> Result<Self> {
        SegmentSet::new(intervals.iter().map(|&(s, e)| (s, e - s)).collect())
    }

    pub fn segments(&self) -> &[(i64, i64)] {
        &self.segments
    }

    /// Common length `h` and the set scaled by `1/h` and moved to start at 0.
    pub fn rescaled(&self) -> Result<(SegmentSet, i64)> {
        let h = self.common_length()?;
        let s0 = self.segments[0].0;
        let segments = self
            .segments
            .iter()
            .map(|&(s, _)| ((s - s0) / h, 1))
            .collect();
        Ok((SegmentSet { segments }, h))
    }

    /// The length shared by all segments, with every start offset a multiple of it.
    fn common_length(&self) -> Result<i64> {
        let h = self.segments[0].1;
        if let Some(&(_, other)) = self.segments.iter().find(|(_, l)| *l != h) {
            return Err(Error::SegmentLengthMismatch { first: h, other });
        }
        let s0 = self.segments[0].0;
        if let Some(&(s, _)) = self.segments.iter().find(|(s, _)| (s - s0) % h != 0) {
            return Err(Error::InvalidSegments(format!(
                "segment at {s} is not a multiple of the length {h} away from the first"
            )));
        }
        Ok(h)
    }
}

/// `Y = {z − s_0 : [z, z+1] ⊂ W}`; rejects sets that cannot be attractors by the segment-length rule.
pub fn segments_to_intset(w: &SegmentSet) -> Result<IntSet1D> {
    w.common_length()?;
    let s0 = w.segments[0].0;
    let elements = w
        .segments
        .iter()
        .flat_map(|&(s, l)| (s - s0)..(s - s0 + l))
        .collect();
    Ok(IntSet1D(elements))
}

/// `W = ∪_{y∈Y} [y, y+1]` with touching unit segments merged.
pub fn intset_to_segments(y: &IntSet1D) -> SegmentSet {
    let mut segments: Vec<(i64, i64)> = Vec::new();
    for &x in y.elements() {
        match segments.last_mut() {
            Some((s, l)) if *s + *l == x => *l += 1,
            _ => segments.push((x, 1)),
        }
    }
    SegmentSet { segments }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[i64]) -> IntSet1D {
        IntSet1D::new(v.to_vec()).unwrap()
    }

    #[test]
    fn direct_sums() {
        assert_eq!(direct_sum(&set(&[0, 1, 2]), &set(&[0, 3, 6])).unwrap(), IntSet1D::segment(9).unwrap());
        assert_eq!(
            direct_sum(&set(&[0, 3, 6]), &set(&[0, 18])).unwrap(),
            set(&[0, 3, 6, 18, 21, 24])
        );
        assert_eq!(direct_sum(&set(&[0, 1]), &set(&[0, 1])).unwrap_err().code(), "collision");
    }

    #[test]
    fn cancellation() {
        assert_eq!(cancel(&set(&[0, 1, 2]), &IntSet1D::segment(9).unwrap()).unwrap(), set(&[0, 3, 6]));
        let x = set(&[0, 5, 7]);
        assert_eq!(cancel(&IntSet1D::zero(), &x).unwrap(), x);
        assert_eq!(cancel(&set(&[0, 2]), &set(&[0, 1, 2, 3])).unwrap(), set(&[0, 1]));
        assert!(cancel(&set(&[0, 1]), &set(&[0, 2])).is_err());
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            tiling_oracle(&set(&[0, 3, 6, 18, 21, 24]), None).unwrap(),
            TilingVerdict::Tiling {
                n: 36,
                shifts: set(&[0, 1, 2, 9, 10, 11])
            }
        );
        assert_eq!(
            tiling_oracle(&IntSet1D::zero(), None).unwrap(),
            TilingVerdict::Tiling {
                n: 1,
                shifts: IntSet1D::zero()
            }
        );
        assert!(matches!(
            tiling_oracle(&set(&[0, 1, 3]), Some(64)).unwrap(),
            TilingVerdict::NotTiling { .. }
        ));
        assert!(tiling_oracle(&set(&[0, 5]), Some(3)).is_err());
    }

    #[test]
    fn oracle_cycle_and_bound() {
        let v = tiling_oracle(&set(&[0, 2, 3]), Some(1000)).unwrap();
        assert_eq!(
            v,
            TilingVerdict::NotTiling {
                reason: NotTilingReason::Overlap,
                hole: 1
            }
        );
        let v = tiling_oracle(&set(&[0, 3, 6, 18, 21, 24]), Some(30)).unwrap();
        assert_eq!(v, TilingVerdict::Bounded { n_max: 30 });
    }

    #[test]
    fn wide_sets_use_several_words() {
        let y = set(&[0, 100, 200]);
        let v = tiling_oracle(&y, Some(1000)).unwrap();
        assert_eq!(
            v,
            TilingVerdict::Tiling {
                n: 300,
                shifts: IntSet1D::segment(100).unwrap()
            }
        );
    }

    #[test]
    fn l_sets() {
        assert!(is_l_set(&set(&[0, 1, 2, 9, 10, 11]), 3).unwrap());
        assert!(!is_l_set(&set(&[0, 1, 3]), 2).unwrap());
        assert!(is_l_set(&IntSet1D::segment(6).unwrap(), 3).unwrap());
        assert!(is_l_set(&set(&[0]), 0).is_err());
    }

    #[test]
    fn classification() {
        let p = |a, d| Progression { a, d };
        assert_eq!(
            classify(&set(&[0, 3, 6, 18, 21, 24])).progressions(),
            &[p(3, 3), p(18, 2)]
        );
        assert_eq!(classify(&IntSet1D::segment(4).unwrap()).progressions(), &[p(1, 4)]);
        assert_eq!(classify(&set(&[0, 1, 4, 5])).progressions(), &[p(1, 2), p(4, 2)]);
        assert!(!classify(&set(&[0, 1, 2, 4, 5, 6])).is_simple());
        assert!(!classify(&set(&[0, 1, 3])).is_simple());
        assert_eq!(classify(&IntSet1D::zero()), Classification::Simple { progressions: vec![] });
    }

    #[test]
    fn polynomials() {
        assert_eq!(poly_of_set(&set(&[0, 3, 6])), vec![1, 0, 0, 1, 0, 0, 1]);
        assert!(poly_eq(&poly_mul(&segment_poly(2, 1), &segment_poly(2, 2)), &segment_poly(4, 1)));
        let sq = poly_mul(&poly_of_set(&set(&[0, 1])), &poly_of_set(&set(&[0, 1])));
        assert_eq!(sq, vec![1, 2, 1]);
        assert!(poly_eq(&[1, 2, 0, 0], &[1, 2]));
    }

    #[test]
    fn families() {
        let p = |a, d| Progression { a, d };
        assert_eq!(
            progression_family(&[3, 3, 2, 2]).unwrap(),
            vec![p(1, 3), p(3, 3), p(9, 2), p(18, 2)]
        );
        let fam = progression_family(&[2, 2]).unwrap();
        assert_eq!(sum_progressions(&fam).unwrap(), IntSet1D::segment(4).unwrap());
        assert_eq!(progression_family(&[6]).unwrap(), vec![p(1, 6)]);
        assert!(progression_family(&[1]).is_err());
    }

    #[test]
    fn enumeration() {
        assert_eq!(
            enumerate_simple(4).unwrap(),
            vec![set(&[0]), set(&[0, 1]), set(&[0, 2]), set(&[0, 1, 2, 3])]
        );
        let six = enumerate_simple(6).unwrap();
        assert_eq!(six.len(), 6);
        for s in [&[0][..], &[0, 1], &[0, 2, 4], &[0, 1, 2], &[0, 3], &[0, 1, 2, 3, 4, 5]] {
            assert!(six.contains(&set(s)));
        }
        assert_eq!(enumerate_simple(1).unwrap(), vec![set(&[0])]);
    }

    #[test]
    fn segments() {
        let w = SegmentSet::from_intervals(&[(0, 1), (3, 4)]).unwrap();
        assert_eq!(segments_to_intset(&w).unwrap(), set(&[0, 3]));
        let w = SegmentSet::from_intervals(&[(0, 1), (2, 4)]).unwrap();
        assert_eq!(segments_to_intset(&w).unwrap_err().code(), "segment_length_mismatch");
        let y = set(&[0, 3, 6, 18, 21, 24]);
        assert_eq!(segments_to_intset(&intset_to_segments(&y)).unwrap(), y);
        let w = SegmentSet::from_intervals(&[(4, 6), (10, 12)]).unwrap();
        let (r, h) = w.rescaled().unwrap();
        assert_eq!(h, 2);
        assert_eq!(segments_to_intset(&r).unwrap(), set(&[0, 3]));
        assert!(SegmentSet::from_intervals(&[(0, 2), (2, 4)]).is_err());
    }

    #[test]
    fn attractor_of_integer_set() {
        let (m, d) = attractor_system(&set(&[0, 2])).unwrap();
        assert_eq!(m, IntMatrix::scalar(4));
        assert_eq!(d.digits(), &[vec![0], vec![1], vec![8], vec![9]]);
    }
}
