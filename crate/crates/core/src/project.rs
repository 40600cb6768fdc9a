//! Batched point projection and inversion.
//!
//! Per query, every cubic approximant is split into pieces on which the
//! distance derivative `E` is monotone. Pieces whose end values show no
//! local minimum are dropped; the rest are rebased to non-parametric Bézier
//! form and clipped against the axis to find the single root. Candidates
//! are then reduced to one result per query.
//!
//! The batch runs in three phases: split and eliminate (parallel over
//! queries), clip (parallel over a flat list of query × piece units), and a
//! per-query reduction whose outcome does not depend on arrival order.

use crate::basis::power_to_bernstein_quintic;
use crate::curve::BSplineCurve;
use crate::decompose::decompose_to_bezier;
use crate::distance::{distance_coeffs, split_cubic, split_params};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::poly::Poly;
use crate::reduce::{approximate_error_controlled, ApproxConfig};
use crate::segment::{BezierSegment, CubicApproxSegment};

pub use crate::engine::{plan_work, WorkPlan};

/// Hull edges handled per clipping unit when chunking work.
pub const HULL_EDGES: usize = 6;
/// Clip until the root interval is this narrow.
pub const CLIP_TOL: f64 = 1e-6;
pub const MAX_CLIP_ITERATIONS: usize = 8;
/// Distances closer than this are ties, resolved by the smaller parameter.
pub const TIE_DISTANCE: f64 = 1e-12;
/// Queries processed per pass of the batch phases; bounds the memory held
/// by intermediate work units.
pub const QUERY_CHUNK: usize = 4096;

/// Degree-5 scalar Bézier with abscissae `i/5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonParametricBezier {
    pub ordinates: [f64; 6],
}

impl NonParametricBezier {
    pub fn eval(&self, u: f64) -> f64 {
        let mut b = self.ordinates;
        for r in 1..6 {
            for i in 0..6 - r {
                b[i] = b[i] + (b[i + 1] - b[i]) * u;
            }
        }
        b[0]
    }

    /// `S_L(z)·b` and `S_R(z)·b` by de Casteljau.
    pub fn split(&self, z: f64) -> (Self, Self) {
        let mut tri = self.ordinates;
        let mut left = [0.0; 6];
        let mut right = [0.0; 6];
        left[0] = tri[0];
        right[5] = tri[5];
        for r in 1..6 {
            for i in 0..6 - r {
                tri[i] = tri[i] + (tri[i + 1] - tri[i]) * z;
            }
            left[r] = tri[0];
            right[5 - r] = tri[5 - r];
        }
        (Self { ordinates: left }, Self { ordinates: right })
    }
}

/// `b = T·a` for ascending power coefficients `a` of degree ≤ 5.
pub fn rebase(e: &Poly) -> NonParametricBezier {
    let mut a = [0.0; 6];
    for (dst, src) in a.iter_mut().zip(&e.coeffs) {
        *dst = *src;
    }
    rebase_coeffs(&a)
}

fn rebase_coeffs(a: &[f64; 6]) -> NonParametricBezier {
    let t = power_to_bernstein_quintic();
    let mut b = [0.0; 6];
    for (i, bi) in b.iter_mut().enumerate() {
        for (j, aj) in a.iter().enumerate().take(i + 1) {
            *bi += t[(i, j)] * aj;
        }
    }
    NonParametricBezier { ordinates: b }
}

/// [`rebase`] over a contiguous block of coefficient rows.
pub fn rebase_batch(coeffs: &[[f64; 6]]) -> Vec<NonParametricBezier> {
    coeffs.iter().map(rebase_coeffs).collect()
}

#[inline]
fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

type Chain = Vec<(f64, f64)>;

/// Lower and upper hull chains of the control points (already sorted by x).
fn hull_chains(pts: &[(f64, f64); 6]) -> (Chain, Chain) {
    let mut lower: Vec<(f64, f64)> = Vec::with_capacity(6);
    for &p in pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::with_capacity(6);
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    (lower, upper)
}

/// Where the convex hull of `(i/5, b_i)` meets `y = 0`, as `[z1, z2]`.
pub fn hull_x_intersections(bez: &NonParametricBezier) -> Option<(f64, f64)> {
    let b = &bez.ordinates;
    if b.iter().all(|&v| v > 0.0) || b.iter().all(|&v| v < 0.0) {
        return None;
    }
    let pts: [(f64, f64); 6] = std::array::from_fn(|i| (i as f64 / 5.0, b[i]));
    let (lower, upper) = hull_chains(&pts);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut hit = |x: f64| {
        lo = lo.min(x);
        hi = hi.max(x);
    };
    for chain in [&lower, &upper] {
        for w in chain.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if y0 == 0.0 {
                hit(x0);
            }
            if y1 == 0.0 {
                hit(x1);
            }
            if (y0 < 0.0 && y1 > 0.0) || (y0 > 0.0 && y1 < 0.0) {
                hit(x0 + (x1 - x0) * (y0 / (y0 - y1)));
            }
        }
    }
    if lo > hi {
        return None;
    }
    Some((lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0)))
}

/// Restriction of `bez` to `[z1, z2]`, reparameterised to `[0, 1]`:
/// `S_L((z2 − z1)/(1 − z1)) · S_R(z1) · b`.
pub fn clip(bez: &NonParametricBezier, z1: f64, z2: f64) -> NonParametricBezier {
    if z1 >= 1.0 {
        return NonParametricBezier {
            ordinates: [bez.ordinates[5]; 6],
        };
    }
    let (_, right) = bez.split(z1);
    let (left, _) = right.split(((z2 - z1) / (1.0 - z1)).clamp(0.0, 1.0));
    left
}

/// Outcome of clipping one piece.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipTrace {
    /// Root in the piece's local parameter.
    pub u: f64,
    pub iterations: usize,
    /// Enclosing interval width after each iteration.
    pub widths: Vec<f64>,
}

impl ClipTrace {
    /// Width after `k` iterations (the final width if it stopped earlier).
    pub fn width_after(&self, k: usize) -> f64 {
        if k == 0 || self.widths.is_empty() {
            1.0
        } else {
            self.widths[k.min(self.widths.len()) - 1]
        }
    }
}

/// Bézier clipping without subdivision for a monotone `E`.
pub fn clip_root(bez: &NonParametricBezier, tol: f64) -> Result<f64> {
    clip_root_traced(bez, tol).map(|t| t.u)
}

pub fn clip_root_traced(bez: &NonParametricBezier, tol: f64) -> Result<ClipTrace> {
    let mut cur = *bez;
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut widths = Vec::with_capacity(MAX_CLIP_ITERATIONS);
    for _ in 0..MAX_CLIP_ITERATIONS {
        let (z1, z2) = hull_x_intersections(&cur).ok_or(Error::NoRoot)?;
        let w = hi - lo;
        let (nlo, nhi) = (lo + z1 * w, lo + z2 * w);
        lo = nlo;
        hi = nhi.max(nlo);
        widths.push(hi - lo);
        if hi - lo <= tol {
            break;
        }
        cur = clip(&cur, z1, z2);
    }
    Ok(ClipTrace {
        u: 0.5 * (lo + hi),
        iterations: widths.len(),
        widths,
    })
}

/// One projection candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<const D: usize> {
    pub t: f64,
    pub foot: Point<D>,
    pub distance: f64,
}

/// Closest point of a curve to one query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionResult<const D: usize> {
    pub query_index: usize,
    /// Parameter in the original curve domain.
    pub t_star: f64,
    pub foot: Point<D>,
    pub distance: f64,
}

/// Minimum distance; ties within [`TIE_DISTANCE`] go to the smallest `t`.
/// Independent of candidate order.
pub fn reduce_min<const D: usize>(candidates: &[Candidate<D>]) -> Option<Candidate<D>> {
    let dmin = candidates
        .iter()
        .map(|c| c.distance)
        .fold(f64::INFINITY, f64::min);
    candidates
        .iter()
        .filter(|c| c.distance <= dmin + TIE_DISTANCE)
        .min_by(|a, b| {
            a.t.total_cmp(&b.t)
                .then(a.distance.total_cmp(&b.distance))
                .then_with(|| {
                    a.foot
                        .0
                        .iter()
                        .zip(&b.foot.0)
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
        })
        .copied()
}

/// Result of elimination for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet<const D: usize> {
    /// Curve endpoints and seam points, already evaluated.
    pub points: Vec<Candidate<D>>,
    /// Monotone pieces with `E(0) < 0` and `E(0)·E(1) ≤ 0`.
    pub pieces: Vec<Surviving<D>>,
}

/// A monotone piece kept for clipping.
#[derive(Debug, Clone, PartialEq)]
pub struct Surviving<const D: usize> {
    pub piece: CubicApproxSegment<D>,
    pub e: [f64; 6],
}

/// A monotone piece with its `E` end values.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonePiece<const D: usize> {
    pub piece: CubicApproxSegment<D>,
    pub e: [f64; 6],
    pub e0: f64,
    pub e1: f64,
}

/// Property test on one piece: can it hold an interior distance minimum?
#[inline]
pub fn keeps(e0: f64, e1: f64) -> bool {
    e0 < 0.0 && e0 * e1 <= 0.0
}

/// Drop pieces without a local minimum; always add both curve endpoints.
pub fn eliminate<const D: usize>(
    pieces: Vec<MonotonePiece<D>>,
    start: Candidate<D>,
    end: Candidate<D>,
) -> CandidateSet<D> {
    CandidateSet {
        points: vec![start, end],
        pieces: pieces
            .into_iter()
            .filter(|p| keeps(p.e0, p.e1))
            .map(|p| Surviving {
                piece: p.piece,
                e: p.e,
            })
            .collect(),
    }
}

/// Per-query diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryTrace<const D: usize> {
    /// Every monotone piece with whether it survived elimination.
    pub pieces: Vec<(CubicApproxSegment<D>, bool)>,
    pub clips: Vec<ClipTrace>,
    /// Smallest distance from the query to the approximant over all
    /// candidates.
    pub best_approx_distance: f64,
}

/// A curve prepared for repeated projection: decomposed and approximated
/// once.
#[derive(Debug, Clone)]
pub struct Projector<const D: usize> {
    curve: BSplineCurve<D>,
    segments: Vec<BezierSegment<D>>,
    cubics: Vec<CubicApproxSegment<D>>,
    alpha: f64,
}

struct Unit<const D: usize> {
    query: usize,
    piece: CubicApproxSegment<D>,
    e: [f64; 6],
}

impl<const D: usize> Projector<D> {
    pub fn new(curve: &BSplineCurve<D>, alpha: f64, engine: &Engine) -> Result<Self> {
        Self::with_config(curve, &ApproxConfig::with_alpha(alpha), engine)
    }

    pub fn with_config(
        curve: &BSplineCurve<D>,
        cfg: &ApproxConfig,
        engine: &Engine,
    ) -> Result<Self> {
        let segments = decompose_to_bezier(curve)?;
        let cubics = approximate_error_controlled(&segments, cfg, engine)?;
        Ok(Self::from_parts(curve, segments, cubics, cfg.alpha))
    }

    /// Assemble from a decomposition and its approximation, e.g. when the
    /// stages are timed separately.
    pub fn from_parts(
        curve: &BSplineCurve<D>,
        segments: Vec<BezierSegment<D>>,
        cubics: Vec<CubicApproxSegment<D>>,
        alpha: f64,
    ) -> Self {
        Self {
            curve: curve.clone(),
            segments,
            cubics,
            alpha,
        }
    }

    pub fn curve(&self) -> &BSplineCurve<D> {
        &self.curve
    }

    pub fn segments(&self) -> &[BezierSegment<D>] {
        &self.segments
    }

    pub fn cubics(&self) -> &[CubicApproxSegment<D>] {
        &self.cubics
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Point of the original curve at global `t` inside cubic `c`.
    fn original_at(&self, c: &CubicApproxSegment<D>, t: f64) -> Point<D> {
        self.segments[c.source_segment].eval_global(t)
    }

    fn endpoints(&self, q: &Point<D>) -> (Candidate<D>, Candidate<D>) {
        let (a, b) = self.curve.domain();
        let cp = self.curve.control_points();
        let (p0, p1) = (cp[0], cp[cp.len() - 1]);
        (
            Candidate {
                t: a,
                foot: p0,
                distance: q.distance(&p0),
            },
            Candidate {
                t: b,
                foot: p1,
                distance: q.distance(&p1),
            },
        )
    }

    /// Phase one for one query: monotone split, end values, elimination,
    /// seam candidates.
    fn gather(
        &self,
        qi: usize,
        q: &Point<D>,
        mut trace: Option<&mut QueryTrace<D>>,
    ) -> (Vec<Candidate<D>>, Vec<Unit<D>>) {
        let (start, end) = self.endpoints(q);
        let mut points = vec![start, end];
        let mut units = Vec::new();
        // E at the end of the previous cubic, for seam tests
        let mut prev: Option<(f64, Point<D>)> = None;
        for c in &self.cubics {
            let (_, ep) = distance_coeffs(&c.control_points, q);
            let params = split_params(&ep);
            let pieces = if params.is_empty() {
                vec![c.clone()]
            } else {
                split_cubic(c, params.as_slice())
            };
            let mut first_e0 = None;
            let mut last_e1 = 0.0;
            for piece in pieces {
                let (e, _) = distance_coeffs(&piece.control_points, q);
                let e0 = e[0];
                let e1: f64 = e.iter().sum();
                first_e0.get_or_insert(e0);
                last_e1 = e1;
                let kept = keeps(e0, e1);
                if let Some(tr) = trace.as_deref_mut() {
                    tr.pieces.push((piece.clone(), kept));
                }
                if kept {
                    units.push(Unit {
                        query: qi,
                        piece,
                        e,
                    });
                }
            }
            let e0 = first_e0.unwrap_or(0.0);
            let head = c.control_points[0];
            if let Some((pe1, tail)) = prev {
                let t = c.source_interval.t_a;
                if tail == head {
                    // a kink can hold a minimum that no piece brackets
                    if pe1 < 0.0 && e0 >= 0.0 {
                        let foot = self.original_at(c, t);
                        points.push(Candidate {
                            t,
                            foot,
                            distance: q.distance(&foot),
                        });
                    }
                } else {
                    if pe1 < 0.0 {
                        points.push(Candidate {
                            t,
                            foot: tail,
                            distance: q.distance(&tail),
                        });
                    }
                    if e0 > 0.0 {
                        points.push(Candidate {
                            t,
                            foot: head,
                            distance: q.distance(&head),
                        });
                    }
                }
            }
            prev = Some((last_e1, c.control_points[3]));
        }
        (points, units)
    }

    /// Phase two for one unit.
    fn solve(&self, u: &Unit<D>, q: &Point<D>) -> Result<(Candidate<D>, f64, ClipTrace)> {
        let bez = rebase_coeffs(&u.e);
        let tr = clip_root_traced(&bez, CLIP_TOL)?;
        let t = u.piece.source_interval.to_global(tr.u);
        let foot = self.original_at(&u.piece, t);
        let approx = q.distance(&u.piece.eval(tr.u));
        Ok((
            Candidate {
                t,
                foot,
                distance: q.distance(&foot),
            },
            approx,
            tr,
        ))
    }

    fn finish(qi: usize, points: &[Candidate<D>]) -> ProjectionResult<D> {
        let best = reduce_min(points).expect("endpoint candidates always exist");
        ProjectionResult {
            query_index: qi,
            t_star: best.t,
            foot: best.foot,
            distance: best.distance,
        }
    }

    /// Project one query, keeping diagnostics.
    pub fn project_traced(
        &self,
        qi: usize,
        q: &Point<D>,
    ) -> Result<(ProjectionResult<D>, QueryTrace<D>)> {
        let mut trace = QueryTrace {
            pieces: Vec::new(),
            clips: Vec::new(),
            best_approx_distance: f64::INFINITY,
        };
        let (mut points, units) = self.gather(qi, q, Some(&mut trace));
        // endpoints and seams lie on the approximant as well
        let mut best_approx = points
            .iter()
            .map(|c| c.distance)
            .fold(f64::INFINITY, f64::min);
        for u in &units {
            let (c, approx, tr) = self.solve(u, q)?;
            best_approx = best_approx.min(approx);
            trace.clips.push(tr);
            points.push(c);
        }
        trace.best_approx_distance = best_approx;
        Ok((Self::finish(qi, &points), trace))
    }

    pub fn project(&self, q: &Point<D>) -> Result<ProjectionResult<D>> {
        self.project_traced(0, q).map(|(r, _)| r)
    }

    /// Batched projection; one result per query in input order.
    pub fn project_points(
        &self,
        queries: &[Point<D>],
        engine: &Engine,
    ) -> Vec<Result<ProjectionResult<D>>> {
        let mut out = Vec::with_capacity(queries.len());
        for (c, chunk) in queries.chunks(QUERY_CHUNK).enumerate() {
            self.project_chunk(c * QUERY_CHUNK, chunk, engine, &mut out);
        }
        out
    }

    /// The three batch phases for queries `base..base + queries.len()`.
    fn project_chunk(
        &self,
        base: usize,
        queries: &[Point<D>],
        engine: &Engine,
        out: &mut Vec<Result<ProjectionResult<D>>>,
    ) {
        let idx: Vec<usize> = (0..queries.len()).collect();
        let gathered = engine.map(&idx, self.cubics.len().max(1), |&i| {
            self.gather(i, &queries[i], None)
        });
        let mut points = Vec::with_capacity(queries.len());
        let mut units = Vec::new();
        let mut offsets = Vec::with_capacity(queries.len() + 1);
        offsets.push(0);
        for (p, u) in gathered {
            points.push(p);
            units.extend(u);
            offsets.push(units.len());
        }
        let solved = engine.map(&units, HULL_EDGES, |u| {
            self.solve(u, &queries[u.query]).map(|(c, _, _)| c)
        });
        let mut solved = solved.into_iter();
        for (qi, mut pts) in points.into_iter().enumerate() {
            let n = offsets[qi + 1] - offsets[qi];
            let mut err = None;
            for r in solved.by_ref().take(n) {
                match r {
                    Ok(c) => pts.push(c),
                    Err(e) => err = err.or(Some(e)),
                }
            }
            out.push(match err {
                Some(e) => Err(e),
                None => Ok(Self::finish(base + qi, &pts)),
            });
        }
    }

    fn check_on_curve(&self, r: ProjectionResult<D>) -> Result<ProjectionResult<D>> {
        let limit = 10.0 * self.alpha;
        if r.distance > limit {
            return Err(Error::PointNotOnCurve {
                distance: r.distance,
                limit,
            });
        }
        Ok(r)
    }

    /// Parameter of a point on the curve.
    pub fn invert_point(&self, q: &Point<D>) -> Result<f64> {
        self.check_on_curve(self.project(q)?).map(|r| r.t_star)
    }

    /// Batched inversion; points farther than `10·alpha` from the curve fail
    /// with [`Error::PointNotOnCurve`].
    pub fn invert_points(
        &self,
        queries: &[Point<D>],
        engine: &Engine,
    ) -> Vec<Result<ProjectionResult<D>>> {
        self.project_points(queries, engine)
            .into_iter()
            .map(|r| r.and_then(|r| self.check_on_curve(r)))
            .collect()
    }
}

/// Project `queries` onto `curve` with approximation tolerance `alpha`.
pub fn project_points<const D: usize>(
    curve: &BSplineCurve<D>,
    queries: &[Point<D>],
    alpha: f64,
    engine: &Engine,
) -> Result<Vec<Result<ProjectionResult<D>>>> {
    Ok(Projector::new(curve, alpha, engine)?.project_points(queries, engine))
}

/// Parameter of a point known to lie on `curve`.
pub fn invert_point<const D: usize>(
    curve: &BSplineCurve<D>,
    q: &Point<D>,
    alpha: f64,
    engine: &Engine,
) -> Result<f64> {
    Projector::new(curve, alpha, engine)?.invert_point(q)
}
