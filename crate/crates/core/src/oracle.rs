//! Independent reference implementations.
//!
//! Nothing here shares code with the matrix pipeline beyond the data types;
//! these routines exist to cross-check it and are deliberately naive.

use crate::curve::BSplineCurve;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::poly::Poly;
use crate::segment::{BezierSegment, Interval};

/// All basis values `N_{i,p}(t)` by the Cox–de Boor recursion, half-open
/// spans with the last nonzero span closed on the right.
pub fn basis_values(knots: &[f64], degree: usize, n_ctrl: usize, t: f64) -> Vec<f64> {
    let m = knots.len();
    let end = knots[n_ctrl];
    let mut n: Vec<f64> = (0..m - 1)
        .map(|i| {
            let (a, b) = (knots[i], knots[i + 1]);
            if a < b && ((a <= t && t < b) || (t == end && b == end)) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for k in 1..=degree {
        for i in 0..m - 1 - k {
            let mut v = 0.0;
            let d1 = knots[i + k] - knots[i];
            if d1 > 0.0 {
                v += (t - knots[i]) / d1 * n[i];
            }
            let d2 = knots[i + k + 1] - knots[i + 1];
            if d2 > 0.0 {
                v += (knots[i + k + 1] - t) / d2 * n[i + 1];
            }
            n[i] = v;
        }
    }
    n.truncate(n_ctrl);
    n
}

/// Evaluate the curve at `t` as `Σ N_{i,p}(t) P_i`.
pub fn eval_de_boor<const D: usize>(curve: &BSplineCurve<D>, t: f64) -> Result<Point<D>> {
    let (a, b) = curve.domain();
    if !(a..=b).contains(&t) {
        return Err(Error::DomainError(format!("t = {t} outside [{a}, {b}]")));
    }
    let pts = curve.control_points();
    let n = basis_values(curve.knots().as_slice(), curve.degree(), pts.len(), t);
    let mut acc = Point::zero();
    for (w, p) in n.iter().zip(pts) {
        if *w != 0.0 {
            acc += *p * *w;
        }
    }
    Ok(acc)
}

/// Insert `u` once (Boehm). Returns the refined knots and control points.
fn insert_knot<const D: usize>(
    knots: &[f64],
    pts: &[Point<D>],
    p: usize,
    u: f64,
) -> (Vec<f64>, Vec<Point<D>>) {
    // last k with knots[k] <= u, restricted to the valid span range
    let k = (p..pts.len())
        .rev()
        .find(|&k| knots[k] <= u)
        .expect("knot outside domain");
    let mut new_pts = Vec::with_capacity(pts.len() + 1);
    for i in 0..=pts.len() {
        let q = if i + p <= k {
            pts[i]
        } else if i > k {
            pts[i - 1]
        } else {
            let alpha = (u - knots[i]) / (knots[i + p] - knots[i]);
            pts[i] * alpha + pts[i - 1] * (1.0 - alpha)
        };
        new_pts.push(q);
    }
    let mut new_knots = knots.to_vec();
    new_knots.insert(k + 1, u);
    (new_knots, new_pts)
}

/// Bézier segments by repeated knot insertion until every interior knot has
/// multiplicity at least `p`.
pub fn decompose_by_knot_insertion<const D: usize>(
    curve: &BSplineCurve<D>,
) -> Result<Vec<BezierSegment<D>>> {
    let p = curve.degree();
    let mut knots = curve.knots().as_slice().to_vec();
    let mut pts = curve.control_points().to_vec();
    let (a, b) = curve.domain();
    let interior: Vec<(f64, usize)> = curve
        .knots()
        .runs()
        .into_iter()
        .filter(|&(v, _)| v > a && v < b)
        .collect();
    for (value, mult) in interior {
        for _ in mult..p {
            let (k2, p2) = insert_knot(&knots, &pts, p, value);
            knots = k2;
            pts = p2;
        }
    }
    let mut out = Vec::new();
    for q in p..pts.len() {
        if knots[q] < knots[q + 1] {
            out.push(BezierSegment::new(
                pts[q - p..=q].to_vec(),
                Interval::new(knots[q], knots[q + 1])?,
            ));
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyDomain);
    }
    Ok(out)
}

/// Result of the brute-force projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleProjection {
    pub t: f64,
    pub distance: f64,
    /// Upper bound on how far the grid stage can overestimate the minimum
    /// distance: half the longest chord between neighbouring samples.
    pub resolution: f64,
}

/// Default grid density for [`oracle_project`].
pub const DEFAULT_GRID: usize = 4096;

/// Curve samples reused across queries.
#[derive(Debug, Clone)]
pub struct DenseSampler<'a, const D: usize> {
    curve: &'a BSplineCurve<D>,
    params: Vec<f64>,
    points: Vec<Point<D>>,
    resolution: f64,
}

impl<'a, const D: usize> DenseSampler<'a, D> {
    pub fn new(curve: &'a BSplineCurve<D>, grid: usize) -> Self {
        let grid = grid.max(2);
        let (a, b) = curve.domain();
        let params: Vec<f64> = (0..grid)
            .map(|i| {
                if i == grid - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (grid - 1) as f64
                }
            })
            .collect();
        let points: Vec<Point<D>> = params
            .iter()
            .map(|&t| eval_de_boor(curve, t).expect("grid inside domain"))
            .collect();
        let resolution = points
            .windows(2)
            .map(|w| w[0].distance(&w[1]))
            .fold(0.0, f64::max)
            * 0.5;
        Self {
            curve,
            params,
            points,
            resolution,
        }
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Grid minimum refined by ternary search on the bracketing cells.
    pub fn project(&self, q: &Point<D>) -> OracleProjection {
        let (best, _) = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.distance(q)))
            .fold(
                (0, f64::INFINITY),
                |acc, (i, d)| if d < acc.1 { (i, d) } else { acc },
            );
        let lo_i = best.saturating_sub(1);
        let hi_i = (best + 1).min(self.params.len() - 1);
        let (mut lo, mut hi) = (self.params[lo_i], self.params[hi_i]);
        let dist = |t: f64| eval_de_boor(self.curve, t).unwrap().distance(q);
        while hi - lo > 1e-10 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if dist(m1) <= dist(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let mut t = 0.5 * (lo + hi);
        let mut d = dist(t);
        // the grid sample itself may beat the refined point at a boundary
        let grid_d = self.points[best].distance(q);
        if grid_d < d {
            t = self.params[best];
            d = grid_d;
        }
        OracleProjection {
            t,
            distance: d,
            resolution: self.resolution,
        }
    }
}

/// Brute-force nearest point: `grid` uniform samples then ternary refinement.
pub fn oracle_project<const D: usize>(
    curve: &BSplineCurve<D>,
    q: &Point<D>,
    grid: usize,
) -> OracleProjection {
    DenseSampler::new(curve, grid).project(q)
}

/// Real roots of `poly` in `[lo, hi]` by sign-change bisection between the
/// critical points, which are found recursively the same way.
pub fn bisection_roots(poly: &Poly, lo: f64, hi: f64, resolution: f64) -> Vec<f64> {
    let deg = match poly.effective_degree(0.0) {
        None | Some(0) => return Vec::new(),
        Some(d) => d,
    };
    let p = Poly::new(poly.coeffs[..=deg].to_vec());
    let mut knots = vec![lo];
    if deg > 1 {
        knots.extend(
            bisection_roots(&p.derivative(), lo, hi, resolution)
                .into_iter()
                .filter(|&r| r > lo && r < hi),
        );
    }
    knots.push(hi);
    let mut roots: Vec<f64> = Vec::new();
    for w in knots.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (p.eval(a), p.eval(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fb == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        let sa = fa.signum();
        while b - a > resolution {
            let m = 0.5 * (a + b);
            let fm = p.eval(m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fm.signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    if p.eval(hi) == 0.0 {
        roots.push(hi);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= resolution);
    roots
}
