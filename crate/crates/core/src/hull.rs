//! Convex hulls in any dimension by incremental beneath-beyond insertion.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

/// A simplicial facet: `normal · x = offset`, with the hull on the side `normal · x ≤ offset`.
#[derive(Clone, Debug, Serialize)]
pub struct Facet {
    pub vertices: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
    /// `(d-1)`-dimensional area.
    pub area: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Hull {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub facets: Vec<Facet>,
    pub volume: f64,
}

impl Hull {
    /// Indices of points that are vertices of some facet.
    pub fn vertex_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.facets.iter().flat_map(|f| f.vertices.clone()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unit normal of the hyperplane through `d` points (generalized cross product).
fn hyperplane(pts: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let d = pts[0].len();
    let rows: Vec<Vec<f64>> = pts[1..].iter().map(|p| sub(p, pts[0])).collect();
    let mut n = vec![0.0; d];
    let mut minor = Vec::with_capacity((d - 1) * (d - 1));
    for (i, ni) in n.iter_mut().enumerate() {
        minor.clear();
        for r in &rows {
            for (j, &x) in r.iter().enumerate() {
                if j != i {
                    minor.push(x);
                }
            }
        }
        let m = linalg::det(&minor, d - 1);
        *ni = if i % 2 == 0 { m } else { -m };
    }
    let len = dot(&n, &n).sqrt();
    if len == 0.0 || !len.is_finite() {
        return None;
    }
    n.iter_mut().for_each(|x| *x /= len);
    let off = dot(&n, pts[0]);
    Some((n, off))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

struct Builder<'a> {
    d: usize,
    pts: &'a [Vec<f64>],
    interior: Vec<f64>,
    eps: f64,
    facets: Vec<Option<Facet>>,
}

impl Builder<'_> {
    fn make_facet(&self, mut verts: Vec<usize>) -> Option<Facet> {
        verts.sort_unstable();
        let refs: Vec<&[f64]> = verts.iter().map(|&i| self.pts[i].as_slice()).collect();
        let (mut n, mut off) = hyperplane(&refs)?;
        if dot(&n, &self.interior) > off {
            n.iter_mut().for_each(|x| *x = -*x);
            off = -off;
        }
        let height = off - dot(&n, &self.interior);
        if height <= 0.0 {
            return None;
        }
        // Pyramid over the facet with apex at the interior point.
        let mut m = Vec::with_capacity(self.d * self.d);
        for &i in &verts {
            m.extend(sub(&self.pts[i], &self.interior));
        }
        let pyramid = linalg::det(&m, self.d).abs() / factorial(self.d);
        Some(Facet {
            vertices: verts,
            normal: n,
            offset: off,
            area: self.d as f64 * pyramid / height,
        })
    }

    fn insert(&mut self, p: usize) {
        let x = &self.pts[p];
        let visible: Vec<usize> = self
            .facets
            .iter()
            .enumerate()
            .filter_map(|(i, f)| {
                let f = f.as_ref()?;
                (dot(&f.normal, x) - f.offset > self.eps).then_some(i)
            })
            .collect();
        if visible.is_empty() {
            return;
        }
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for &fi in &visible {
            let verts = &self.facets[fi].as_ref().unwrap().vertices;
            for skip in 0..verts.len() {
                let ridge: Vec<usize> = verts
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, &v)| v)
                    .collect();
                *ridges.entry(ridge).or_default() += 1;
            }
        }
        for &fi in &visible {
            self.facets[fi] = None;
        }
        let mut horizon: Vec<Vec<usize>> = ridges
            .into_iter()
            .filter(|(_, c)| *c == 1)
            .map(|(r, _)| r)
            .collect();
        horizon.sort();
        for mut ridge in horizon {
            ridge.push(p);
            if let Some(f) = self.make_facet(ridge) {
                self.facets.push(Some(f));
            }
        }
    }
}

/// Convex hull of a full-dimensional point set.
pub fn convex_hull(points: &[Vec<f64>]) -> Result<Hull> {
    let d = points.first().map(Vec::len).ok_or(Error::Empty("point set"))?;
    if d == 0 {
        return Err(Error::Empty("point dimension"));
    }
    let scale = points
        .iter()
        .flat_map(|p| p.iter().map(|x| x.abs()))
        .fold(1.0, f64::max);
    let eps = 1e-10 * scale;
    if d == 1 {
        let (lo, hi) = points.iter().enumerate().fold((0, 0), |(l, h), (i, p)| {
            (
                if p[0] < points[l][0] { i } else { l },
                if p[0] > points[h][0] { i } else { h },
            )
        });
        let width = points[hi][0] - points[lo][0];
        if width <= eps {
            return Err(Error::Degenerate("points do not span a segment".into()));
        }
        return Ok(Hull {
            dim: 1,
            points: points.to_vec(),
            facets: vec![
                Facet {
                    vertices: vec![lo],
                    normal: vec![-1.0],
                    offset: -points[lo][0],
                    area: 1.0,
                },
                Facet {
                    vertices: vec![hi],
                    normal: vec![1.0],
                    offset: points[hi][0],
                    area: 1.0,
                },
            ],
            volume: width,
        });
    }
    // Initial simplex: greedily maximise the distance to the current affine span.
    let start = (0..points.len())
        .min_by(|&a, &b| points[a].partial_cmp(&points[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    let mut simplex = vec![start];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while simplex.len() < d + 1 {
        let origin = &points[start];
        let mut best = (0.0, usize::MAX);
        for (i, p) in points.iter().enumerate() {
            let mut r = sub(p, origin);
            for b in &basis {
                let c = dot(&r, b);
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let dist = dot(&r, &r).sqrt();
            if dist > best.0 {
                best = (dist, i);
            }
        }
        if best.0 <= eps {
            return Err(Error::Degenerate(format!(
                "points span only {} dimensions",
                simplex.len() - 1
            )));
        }
        let mut r = sub(&points[best.1], origin);
        for b in &basis {
            let c = dot(&r, b);
            r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let len = dot(&r, &r).sqrt();
        basis.push(r.iter().map(|x| x / len).collect());
        simplex.push(best.1);
    }
    let interior: Vec<f64> = (0..d)
        .map(|i| simplex.iter().map(|&s| points[s][i]).sum::<f64>() / (d + 1) as f64)
        .collect();
    let mut b = Builder {
        d,
        pts: points,
        interior,
        eps,
        facets: Vec::new(),
    };
    for skip in 0..=d {
        let verts: Vec<usize> = simplex
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != skip)
            .map(|(_, &v)| v)
            .collect();
        let f = b
            .make_facet(verts)
            .ok_or_else(|| Error::Degenerate("flat initial simplex".into()))?;
        b.facets.push(Some(f));
    }
    // Far points first: most later points then fall inside an already large hull.
    let mut order: Vec<(f64, usize)> = (0..points.len())
        .filter(|p| !simplex.contains(p))
        .map(|p| {
            let r = sub(&points[p], &b.interior);
            (dot(&r, &r), p)
        })
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    for (_, p) in order {
        b.insert(p);
    }
    let facets: Vec<Facet> = b.facets.into_iter().flatten().collect();
    let volume = facets
        .iter()
        .map(|f| f.area * (f.offset - dot(&f.normal, &b.interior)) / d as f64)
        .sum();
    Ok(Hull {
        dim: d,
        points: points.to_vec(),
        facets,
        volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn square_with_interior_points() {
        let mut pts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![2.0, 1.0], vec![0.0, 1.0]];
        pts.push(vec![1.0, 0.5]);
        pts.push(vec![1.0, 0.0]);
        let h = convex_hull(&pts).unwrap();
        assert_abs_diff_eq!(h.volume, 2.0, epsilon = 1e-12);
        assert_eq!(h.vertex_indices(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn cube_and_simplex_volumes() {
        let cube: Vec<Vec<f64>> = (0..8)
            .map(|m| (0..3).map(|i| ((m >> i) & 1) as f64).collect())
            .collect();
        assert_abs_diff_eq!(convex_hull(&cube).unwrap().volume, 1.0, epsilon = 1e-12);
        let simplex = vec![
            vec![0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ];
        assert_abs_diff_eq!(convex_hull(&simplex).unwrap().volume, 1.0 / 24.0, epsilon = 1e-12);
    }

    #[test]
    fn tesseract_facet_areas() {
        let pts: Vec<Vec<f64>> = (0..16)
            .map(|m| (0..4).map(|i| ((m >> i) & 1) as f64).collect())
            .collect();
        let h = convex_hull(&pts).unwrap();
        assert_abs_diff_eq!(h.volume, 1.0, epsilon = 1e-12);
        let area: f64 = h.facets.iter().map(|f| f.area).sum();
        assert_abs_diff_eq!(area, 8.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_input() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert_eq!(convex_hull(&pts).unwrap_err().code(), "degenerate");
    }
}
