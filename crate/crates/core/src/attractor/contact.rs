use std::collections::HashMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use super::geometry::{bounding_box, reduce};
use crate::error::{Error, Result};
use crate::lattice::{det, is_expanding, validate_digits, DigitSet, IntMatrix};

/// Gap below `m` that certifies a tile.
pub const EPS_GAP: f64 = 1e-6;
const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 100_000;
const MAX_STATES: usize = 200_000;

/// Transition counts between candidate overlap translations `k ↦ M k + b - a`.
#[derive(Clone, Debug, Serialize)]
pub struct ContactMatrix {
    pub states: Vec<Vec<i64>>,
    /// Sparse rows: `(target state index, multiplicity)`.
    pub transitions: Vec<Vec<(usize, u32)>>,
}

impl ContactMatrix {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn count(&self, from: usize, to: usize) -> u32 {
        self.transitions[from]
            .iter()
            .find(|(t, _)| *t == to)
            .map_or(0, |(_, c)| *c)
    }

    pub fn dense(&self) -> Vec<Vec<u32>> {
        let n = self.len();
        let mut out = vec![vec![0; n]; n];
        for (i, row) in self.transitions.iter().enumerate() {
            for &(j, c) in row {
                out[i][j] = c;
            }
        }
        out
    }

    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        self.states.iter().position(|s| s == k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TileVerdict {
    Tile,
    NotTile,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct TileReport {
    pub verdict: TileVerdict,
    pub is_tile: bool,
    /// Perron root estimate of the contact matrix.
    pub spectral_radius: f64,
    /// Collatz-Wielandt upper bound on the Perron root.
    pub spectral_upper: f64,
    /// `‖C x - ρ x‖∞ / ‖x‖∞` for the dominant component.
    pub residual: f64,
    pub m: u64,
    /// Lebesgue measure of `G` when it can be decided.
    pub measure: Option<u64>,
    /// Perron vector of the dominant component, indexed like `states.states`.
    pub perron_vector: Vec<f64>,
    pub states: ContactMatrix,
}

/// Exact tile test for a residue digit set via the contact matrix.
pub fn tile_check_exact(m: &IntMatrix, digits: &DigitSet) -> Result<TileReport> {
    if !validate_digits(m, digits) {
        return Err(Error::InvalidDigits(
            "digits must contain 0 and form a complete residue system".into(),
        ));
    }
    if !is_expanding(m) {
        return Err(Error::NotExpanding);
    }
    let mut report = contact_verdict(m, digits)?;
    report.measure = match report.verdict {
        TileVerdict::Tile => Some(1),
        TileVerdict::Indeterminate => None,
        TileVerdict::NotTile => match reduce(m, digits)? {
            None => Some(0),
            Some(r) if r.index > 1 => {
                let inner = contact_verdict(&r.matrix, &r.digits)?;
                (inner.verdict == TileVerdict::Tile).then_some(r.index as u64)
            }
            Some(_) => None,
        },
    };
    Ok(report)
}

pub(crate) fn contact_verdict(m: &IntMatrix, digits: &DigitSet) -> Result<TileReport> {
    let d = m.dim();
    let mdet = det(m)?.unsigned_abs();
    let bbox = bounding_box(m, digits)?;
    // G - G lies in [-w, w] with w the box widths.
    let radius: Vec<i64> = bbox
        .widths()
        .iter()
        .map(|w| (w + 1e-9).floor() as i64)
        .collect();
    let total: u128 = radius.iter().map(|&r| (2 * r + 1) as u128).product();
    if total > MAX_STATES as u128 {
        return Err(Error::ResourceCap {
            what: "contact states",
            needed: total.min(u64::MAX as u128) as u64,
            cap: MAX_STATES as u64,
        });
    }
    let mut states: Vec<Vec<i64>> = Vec::new();
    let mut k: Vec<i64> = radius.iter().map(|r| -r).collect();
    'enumerate: loop {
        if k.iter().any(|&x| x != 0) {
            states.push(k.clone());
        }
        for i in (0..d).rev() {
            k[i] += 1;
            if k[i] <= radius[i] {
                continue 'enumerate;
            }
            k[i] = -radius[i];
        }
        break;
    }
    let index: HashMap<Vec<i64>, usize> =
        states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let ds = digits.digits();
    let mut diffs: HashMap<Vec<i64>, u32> = HashMap::new();
    for a in ds {
        for b in ds {
            let v: Vec<i64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
            *diffs.entry(v).or_default() += 1;
        }
    }
    let mut diffs: Vec<(Vec<i64>, u32)> = diffs.into_iter().collect();
    diffs.sort();
    let mut transitions: Vec<Vec<(usize, u32)>> = Vec::with_capacity(states.len());
    for s in &states {
        let mk = m.mul_vec(s)?;
        let mut row = Vec::new();
        for (v, c) in &diffs {
            let t: Vec<i64> = mk.iter().zip(v).map(|(x, y)| x + y).collect();
            if let Some(&j) = index.get(&t) {
                row.push((j, *c));
            }
        }
        row.sort_unstable();
        transitions.push(row);
    }
    let contact = prune(ContactMatrix { states, transitions });
    let (rho, upper, residual, vector) = perron(&contact);
    let mf = mdet as f64;
    let verdict = if contact.is_empty() || upper < mf - EPS_GAP {
        TileVerdict::Tile
    } else if (rho - mf).abs() < EPS_GAP && residual < EPS_GAP {
        TileVerdict::NotTile
    } else {
        TileVerdict::Indeterminate
    };
    Ok(TileReport {
        verdict,
        is_tile: verdict == TileVerdict::Tile,
        spectral_radius: rho,
        spectral_upper: upper,
        residual,
        m: mdet,
        measure: None,
        perron_vector: vector,
        states: contact,
    })
}

/// Keep only states that start an infinite path.
fn prune(c: ContactMatrix) -> ContactMatrix {
    let n = c.len();
    let mut alive = vec![true; n];
    let mut out_deg: Vec<usize> = c.transitions.iter().map(Vec::len).collect();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, row) in c.transitions.iter().enumerate() {
        for &(j, _) in row {
            preds[j].push(i);
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&i| out_deg[i] == 0).collect();
    while let Some(i) = stack.pop() {
        if !alive[i] {
            continue;
        }
        alive[i] = false;
        for &p in &preds[i] {
            out_deg[p] -= 1;
            if out_deg[p] == 0 && alive[p] {
                stack.push(p);
            }
        }
    }
    let mut remap = vec![usize::MAX; n];
    let mut states = Vec::new();
    for i in 0..n {
        if alive[i] {
            remap[i] = states.len();
            states.push(c.states[i].clone());
        }
    }
    let transitions = (0..n)
        .filter(|&i| alive[i])
        .map(|i| {
            c.transitions[i]
                .iter()
                .filter(|(j, _)| alive[*j])
                .map(|&(j, w)| (remap[j], w))
                .collect()
        })
        .collect();
    ContactMatrix { states, transitions }
}

/// Perron root per strongly connected component by power iteration on `C + I`.
///
/// Returns `(rho, upper bound, residual, vector)` for the dominant component.
fn perron(c: &ContactMatrix) -> (f64, f64, f64, Vec<f64>) {
    let n = c.len();
    if n == 0 {
        return (0.0, 0.0, 0.0, Vec::new());
    }
    let mut g: DiGraph<(), u32> = DiGraph::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for (i, row) in c.transitions.iter().enumerate() {
        for &(j, w) in row {
            g.add_edge(nodes[i], nodes[j], w);
        }
    }
    let mut best = (0.0, 0.0, 0.0, vec![0.0; n]);
    let mut upper_all: f64 = 0.0;
    for comp in tarjan_scc(&g) {
        let members: Vec<usize> = comp.iter().map(|v| v.index()).collect();
        let mut local = vec![usize::MAX; n];
        for (k, &i) in members.iter().enumerate() {
            local[i] = k;
        }
        let rows: Vec<Vec<(usize, f64)>> = members
            .iter()
            .map(|&i| {
                c.transitions[i]
                    .iter()
                    .filter(|(j, _)| local[*j] != usize::MAX)
                    .map(|&(j, w)| (local[j], w as f64))
                    .collect()
            })
            .collect();
        if rows.iter().all(Vec::is_empty) {
            continue;
        }
        let (rho, upper, residual, x) = power_iteration(&rows);
        upper_all = upper_all.max(upper);
        if rho > best.0 {
            let mut full = vec![0.0; n];
            for (k, &i) in members.iter().enumerate() {
                full[i] = x[k];
            }
            best = (rho, upper, residual, full);
        }
    }
    best.1 = upper_all;
    best
}

fn power_iteration(rows: &[Vec<(usize, f64)>]) -> (f64, f64, f64, Vec<f64>) {
    let n = rows.len();
    let apply = |x: &[f64], y: &mut [f64]| {
        for (i, row) in rows.iter().enumerate() {
            y[i] = row.iter().map(|&(j, w)| w * x[j]).sum();
        }
    };
    let mut x = vec![1.0; n];
    let mut cx = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITER {
        apply(&x, &mut cx);
        let y: Vec<f64> = cx.iter().zip(&x).map(|(a, b)| a + b).collect();
        let norm = y.iter().fold(0.0, |a: f64, &b| a.max(b));
        let next: Vec<f64> = y.iter().map(|v| v / norm).collect();
        let delta = next
            .iter()
            .zip(&x)
            .fold(0.0, |a: f64, (p, q)| a.max((p - q).abs()));
        let new_lambda = norm - 1.0;
        let settled = delta < POWER_TOL && (new_lambda - lambda).abs() < POWER_TOL;
        x = next;
        lambda = new_lambda;
        if settled {
            break;
        }
    }
    apply(&x, &mut cx);
    let upper = cx
        .iter()
        .zip(&x)
        .map(|(a, b)| if *b > 0.0 { a / b } else if *a > 0.0 { f64::INFINITY } else { 0.0 })
        .fold(0.0, f64::max);
    let xmax = x.iter().fold(0.0, |a: f64, &b| a.max(b));
    let residual = cx
        .iter()
        .zip(&x)
        .fold(0.0, |a: f64, (p, q)| a.max((p - lambda * q).abs()))
        / xmax;
    (lambda, upper, residual, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_is_tile() {
        let r = tile_check_exact(&IntMatrix::scalar(2), &DigitSet::scalars(&[0, 1]).unwrap()).unwrap();
        assert_eq!(r.verdict, TileVerdict::Tile);
        assert_eq!(r.measure, Some(1));
    }

    #[test]
    fn stretched_interval_contact_matrix() {
        let r = tile_check_exact(&IntMatrix::scalar(2), &DigitSet::scalars(&[0, 3]).unwrap()).unwrap();
        assert_eq!(r.verdict, TileVerdict::NotTile);
        assert!((r.spectral_radius - 2.0).abs() < 1e-9);
        assert_eq!(r.measure, Some(3));
        let c = &r.states;
        assert_eq!(c.len(), 6);
        let at = |k: i64| c.index_of(&[k]).unwrap();
        assert_eq!(c.count(at(1), at(2)), 2);
        assert_eq!(c.count(at(1), at(-1)), 1);
        assert_eq!(c.count(at(2), at(1)), 1);
        assert_eq!(c.count(at(3), at(3)), 1);
        // Perron vector is proportional to the overlap lengths |[0,3] ∩ [k,k+3]|
        let v = &r.perron_vector;
        assert!((v[at(1)] / v[at(2)] - 2.0).abs() < 1e-8);
        assert!((v[at(-1)] / v[at(-2)] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_non_residue_digits() {
        let e = tile_check_exact(&IntMatrix::scalar(2), &DigitSet::scalars(&[0, 2]).unwrap()).unwrap_err();
        assert_eq!(e.code(), "invalid_digits");
    }
}
