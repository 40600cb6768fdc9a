//! Cubic approximation of high-degree Bézier segments.
//!
//! Each segment of degree `p ≥ 4` is first reduced to the cubic that keeps
//! the end points and end tangent directions (G1) and minimises the L2
//! distance to the original. Cubics that still deviate by more than the
//! tolerance are split where the deviation peaks, the split point is pulled
//! back onto the original curve, and the children are checked again. The
//! loop runs level by level over a subdivision tree whose next-level slots
//! come from a prefix sum over child counts.

use crate::basis::{bernstein_matrix, gram_matrix, subdivision_matrices};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::point::{bbox_diagonal, Point};
use crate::segment::{BezierSegment, CubicApproxSegment, Interval};

/// Optimal G1 cubic for one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionSolution<const D: usize> {
    pub delta0: f64,
    pub delta1: f64,
    pub cubic: [Point<D>; 4],
    /// `∫₀¹ ‖Q(t) − R(t)‖² dt`
    pub l2_error: f64,
}

fn g1_cubic<const D: usize>(q: &[Point<D>], delta0: f64, delta1: f64) -> [Point<D>; 4] {
    let p = q.len() - 1;
    let c = p as f64 / 3.0;
    let d0 = q[1] - q[0];
    let d1 = q[p] - q[p - 1];
    [
        q[0],
        q[0] + d0 * (c * delta0),
        q[p] - d1 * (c * delta1),
        q[p],
    ]
}

/// `∫₀¹ ‖Q(t) − R(t)‖² dt` evaluated exactly through Gram matrices.
pub fn l2_error<const D: usize>(q: &[Point<D>], r: &[Point<D>; 4]) -> f64 {
    let p = q.len() - 1;
    let gpp = gram_matrix(p, p);
    let g3p = gram_matrix(3, p);
    let g33 = gram_matrix(3, 3);
    let mut qq = 0.0;
    for i in 0..=p {
        for j in 0..=p {
            qq += gpp[(i, j)] * q[i].dot(&q[j]);
        }
    }
    let mut rq = 0.0;
    for i in 0..4 {
        for j in 0..=p {
            rq += g3p[(i, j)] * r[i].dot(&q[j]);
        }
    }
    let mut rr = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            rr += g33[(i, j)] * r[i].dot(&r[j]);
        }
    }
    (qq - 2.0 * rq + rr).max(0.0)
}

/// Relative threshold for degenerate tangents and singular systems.
const DEGENERACY: f64 = 1e-12;

/// G1-constrained, L2-optimal cubic for a segment of degree `p ≥ 4`.
///
/// Solves the 2×2 normal equations for the tangent magnitudes by Cramer's
/// rule. Fails with [`Error::DegenerateTangent`] or
/// [`Error::SingularSystem`] when the end tangents vanish or the system
/// has no unique solution.
pub fn reduce_to_cubic_g1<const D: usize>(
    segment: &BezierSegment<D>,
) -> Result<ReductionSolution<D>> {
    let q = &segment.control_points;
    let p = segment.degree();
    if p < 4 {
        return Err(Error::DomainError(format!(
            "degree reduction needs degree >= 4, got {p}"
        )));
    }
    let scale = bbox_diagonal(q);
    let dq0 = q[1] - q[0];
    let dq1 = q[p] - q[p - 1];
    if dq0.norm() <= DEGENERACY * scale || dq1.norm() <= DEGENERACY * scale || scale == 0.0 {
        return Err(Error::DegenerateTangent);
    }
    let g3p = gram_matrix(3, p);
    let g33 = gram_matrix(3, 3);
    let c = p as f64 / 3.0;
    let e0 = dq0 * c;
    let e1 = dq1 * -c;

    let row_v = |r: usize| {
        let mut v = Point::zero();
        for (j, qj) in q.iter().enumerate() {
            v += *qj * g3p[(r, j)];
        }
        v - (q[0] * (g33[(r, 0)] + g33[(r, 1)]) + q[p] * (g33[(r, 2)] + g33[(r, 3)]))
    };
    let v1 = row_v(1);
    let v2 = row_v(2);
    let a0 = e0 * g33[(1, 1)];
    let a1 = e1 * g33[(1, 2)];
    let b0 = e0 * g33[(2, 1)];
    let b1 = e1 * g33[(2, 2)];

    let a11 = a0.dot(&dq0);
    let a12 = a1.dot(&dq0);
    let b_1 = v1.dot(&dq0);
    let a21 = b0.dot(&dq1);
    let a22 = b1.dot(&dq1);
    let b_2 = v2.dot(&dq1);

    let det = a11 * a22 - a12 * a21;
    let mag = (a11 * a22).abs() + (a12 * a21).abs();
    if !(det.abs() > DEGENERACY * mag) {
        return Err(Error::SingularSystem(det));
    }
    let delta0 = (b_1 * a22 - a12 * b_2) / det;
    let delta1 = (a11 * b_2 - b_1 * a21) / det;
    let cubic = g1_cubic(q, delta0, delta1);
    Ok(ReductionSolution {
        delta0,
        delta1,
        l2_error: l2_error(q, &cubic),
        cubic,
    })
}

/// Cubic with unit tangent magnitudes; used when the optimal system is
/// degenerate. The subdivision loop brings it within tolerance.
pub fn fallback_cubic<const D: usize>(segment: &BezierSegment<D>) -> [Point<D>; 4] {
    g1_cubic(&segment.control_points, 1.0, 1.0)
}

/// Exact degree elevation to `target`.
pub fn elevate_degree<const D: usize>(
    segment: &BezierSegment<D>,
    target: usize,
) -> Result<BezierSegment<D>> {
    let mut pts = segment.control_points.clone();
    if target < segment.degree() {
        return Err(Error::DomainError(format!(
            "cannot elevate degree {} to {target}",
            segment.degree()
        )));
    }
    while pts.len() - 1 < target {
        let n1 = pts.len() as f64; // new degree
        let mut next = Vec::with_capacity(pts.len() + 1);
        next.push(pts[0]);
        for i in 1..pts.len() {
            let a = i as f64 / n1;
            next.push(pts[i - 1] * a + pts[i] * (1.0 - a));
        }
        next.push(*pts.last().unwrap());
        pts = next;
    }
    Ok(BezierSegment::new(pts, segment.source_interval))
}

/// Peak deviation between a cubic and the original it approximates.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMeasure {
    pub max_error: f64,
    /// Every sampled local parameter within `1e-12` of the maximum.
    pub argmax_params: Vec<f64>,
}

const TIE: f64 = 1e-12;

/// Largest distance between `approx(u)` and the original at the same
/// global parameter, over `samples` uniform values of `u`.
pub fn measure_l1_error<const D: usize>(
    approx: &CubicApproxSegment<D>,
    original: &BezierSegment<D>,
    samples: usize,
) -> ErrorMeasure {
    let samples = samples.max(2);
    let iv = approx.source_interval;
    let oi = original.source_interval;
    let errs: Vec<(f64, f64)> = (0..samples)
        .map(|k| {
            let u = k as f64 / (samples - 1) as f64;
            let t = iv.to_global(u);
            let e = approx
                .eval(u)
                .distance(&original.eval(oi.global_to_local(t)));
            (u, e)
        })
        .collect();
    let max_error = errs.iter().fold(0.0, |m, &(_, e)| f64::max(m, e));
    let argmax_params = errs
        .iter()
        .filter(|&&(_, e)| e >= max_error - TIE)
        .map(|&(u, _)| u)
        .collect();
    ErrorMeasure {
        max_error,
        argmax_params,
    }
}

/// Split `approx` at `z` and move the shared split point onto the original
/// curve at the corresponding parameter, carrying its two polygon
/// neighbours along by the same offset.
pub fn subdivide_and_modify<const D: usize>(
    approx: &CubicApproxSegment<D>,
    original: &BezierSegment<D>,
    z: f64,
) -> (CubicApproxSegment<D>, CubicApproxSegment<D>) {
    let (sl, sr) = subdivision_matrices(3, z);
    let l = sl.apply_points(&approx.control_points);
    let r = sr.apply_points(&approx.control_points);
    let (li, ri) = approx.source_interval.split(z);
    let joint = original.eval_global(li.t_b);
    // the polygon legs at the split move with the split point, which keeps
    // the joint tangent and confines the change to the neighbourhood of z
    let shift = joint - l[3];
    let (mut l, mut r) = (l, r);
    l[2] += shift;
    r[1] += shift;
    let mk = |pts: &[Point<D>], iv: Interval, first: Option<Point<D>>, last: Option<Point<D>>| {
        let mut cp = [pts[0], pts[1], pts[2], pts[3]];
        if let Some(f) = first {
            cp[0] = f;
        }
        if let Some(l) = last {
            cp[3] = l;
        }
        CubicApproxSegment {
            control_points: cp,
            source_interval: iv,
            measured_error: f64::INFINITY,
            source_segment: approx.source_segment,
        }
    };
    (
        mk(&l, li, Some(approx.control_points[0]), Some(joint)),
        mk(&r, ri, Some(joint), Some(approx.control_points[3])),
    )
}

/// Split at every parameter of `params` (sorted, strictly inside `(0,1)`).
fn split_at_all<const D: usize>(
    approx: &CubicApproxSegment<D>,
    original: &BezierSegment<D>,
    params: &[f64],
) -> Vec<CubicApproxSegment<D>> {
    let mut out = Vec::with_capacity(params.len() + 1);
    let mut rest = approx.clone();
    let mut done = 0.0;
    for &u in params {
        let z = (u - done) / (1.0 - done);
        let (l, r) = subdivide_and_modify(&rest, original, z);
        out.push(l);
        rest = r;
        done = u;
    }
    out.push(rest);
    out
}

/// One level of the subdivision tree.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdivisionLevel<const D: usize> {
    pub segments: Vec<CubicApproxSegment<D>>,
    /// Exclusive scan of child counts over failing segments, plus the total:
    /// child `k` of the `j`-th failing segment goes to slot
    /// `child_prefix_sum[j] + k` of the next level.
    pub child_prefix_sum: Vec<usize>,
    /// Indices into `segments` of the segments that fail the tolerance.
    pub compaction_keys: Vec<usize>,
}

impl<const D: usize> SubdivisionLevel<D> {
    /// Build from per-segment child counts (`0` for passing segments).
    pub fn new(segments: Vec<CubicApproxSegment<D>>, child_counts: &[usize]) -> Self {
        assert_eq!(segments.len(), child_counts.len());
        let compaction_keys: Vec<usize> = child_counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i)
            .collect();
        let mut child_prefix_sum = Vec::with_capacity(compaction_keys.len() + 1);
        let mut acc = 0;
        child_prefix_sum.push(0);
        for &k in &compaction_keys {
            acc += child_counts[k];
            child_prefix_sum.push(acc);
        }
        Self {
            segments,
            child_prefix_sum,
            compaction_keys,
        }
    }

    pub fn total_children(&self) -> usize {
        *self.child_prefix_sum.last().unwrap()
    }
}

/// Knobs for [`approximate_error_controlled`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxConfig {
    /// Tolerance on the peak deviation.
    pub alpha: f64,
    /// Most subdivisions performed per pass; the rest wait for the next one.
    pub batch_cap: usize,
    /// Samples per segment while iterating.
    pub loop_samples: usize,
    /// Samples used to confirm a segment before accepting it.
    pub verify_samples: usize,
    pub max_depth: u32,
}

pub const DEFAULT_ALPHA: f64 = 1e-4;
pub const DEFAULT_BATCH_CAP: usize = 4096;
pub const LOOP_SAMPLES: usize = 64;
pub const VERIFY_SAMPLES: usize = 1024;
pub const MAX_DEPTH: u32 = 32;

impl Default for ApproxConfig {
    fn default() -> Self {
        Self::with_alpha(DEFAULT_ALPHA)
    }
}

impl ApproxConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            batch_cap: DEFAULT_BATCH_CAP,
            loop_samples: LOOP_SAMPLES,
            verify_samples: VERIFY_SAMPLES,
            max_depth: MAX_DEPTH,
        }
    }
}

/// Work item of the approximation loop.
#[derive(Debug, Clone)]
struct Pending<const D: usize> {
    seg: CubicApproxSegment<D>,
    depth: u32,
    /// Split parameters already found for a deferred segment.
    split: Option<Vec<f64>>,
}

enum Verdict {
    Accept(f64),
    Split(Vec<f64>),
}

fn judge<const D: usize>(
    seg: &CubicApproxSegment<D>,
    original: &BezierSegment<D>,
    cfg: &ApproxConfig,
) -> Verdict {
    let coarse = measure_l1_error(seg, original, cfg.loop_samples);
    let m = if coarse.max_error <= cfg.alpha {
        let fine = measure_l1_error(seg, original, cfg.verify_samples);
        if fine.max_error <= cfg.alpha {
            return Verdict::Accept(fine.max_error);
        }
        fine
    } else {
        coarse
    };
    let mut params: Vec<f64> = m
        .argmax_params
        .into_iter()
        .filter(|&u| u > 0.0 && u < 1.0)
        .collect();
    if params.is_empty() {
        params.push(0.5);
    }
    Verdict::Split(params)
}

/// Starting cubic for one input segment, and whether it is exact already.
fn initial_cubic<const D: usize>(seg: &BezierSegment<D>) -> Result<([Point<D>; 4], bool)> {
    match seg.degree() {
        0 => Err(Error::DomainError("degree-0 segment".into())),
        1..=3 => {
            let e = elevate_degree(seg, 3)?;
            let c = &e.control_points;
            Ok(([c[0], c[1], c[2], c[3]], true))
        }
        _ => match reduce_to_cubic_g1(seg) {
            Ok(sol) => Ok((sol.cubic, false)),
            Err(Error::DegenerateTangent | Error::SingularSystem(_)) => {
                Ok((fallback_cubic(seg), false))
            }
            Err(e) => Err(e),
        },
    }
}

/// Cubic approximants of `segments`, each within `cfg.alpha` of the
/// original, tiling every input interval in order.
pub fn approximate_error_controlled<const D: usize>(
    segments: &[BezierSegment<D>],
    cfg: &ApproxConfig,
    engine: &Engine,
) -> Result<Vec<CubicApproxSegment<D>>> {
    if !(cfg.alpha > 0.0) {
        return Err(Error::DomainError(format!(
            "tolerance must be positive, got {}",
            cfg.alpha
        )));
    }
    let mut accepted: Vec<CubicApproxSegment<D>> = Vec::new();
    let mut queue: Vec<Pending<D>> = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        let (cubic, exact) = initial_cubic(seg)?;
        let c = CubicApproxSegment {
            control_points: cubic,
            source_interval: seg.source_interval,
            measured_error: f64::INFINITY,
            source_segment: i,
        };
        if exact {
            let m = measure_l1_error(&c, seg, cfg.verify_samples);
            accepted.push(CubicApproxSegment {
                measured_error: m.max_error,
                ..c
            });
        } else {
            queue.push(Pending {
                seg: c,
                depth: 0,
                split: None,
            });
        }
    }

    let batch_cap = cfg.batch_cap.max(1);
    while !queue.is_empty() {
        let verdicts: Vec<Verdict> = engine.map(&queue, cfg.loop_samples, |p| match &p.split {
            Some(params) => Verdict::Split(params.clone()),
            None => judge(&p.seg, &segments[p.seg.source_segment], cfg),
        });

        let mut counts = Vec::with_capacity(queue.len());
        let mut splits: Vec<Option<Vec<f64>>> = Vec::with_capacity(queue.len());
        for (p, v) in queue.iter().zip(verdicts) {
            match v {
                Verdict::Accept(err) => {
                    accepted.push(CubicApproxSegment {
                        measured_error: err,
                        ..p.seg.clone()
                    });
                    counts.push(0);
                    splits.push(None);
                }
                Verdict::Split(params) => {
                    counts.push(params.len() + 1);
                    splits.push(Some(params));
                }
            }
        }
        let depths: Vec<u32> = queue.iter().map(|p| p.depth).collect();
        let level = SubdivisionLevel::new(queue.into_iter().map(|p| p.seg).collect(), &counts);

        let active = level.compaction_keys.len().min(batch_cap);
        let now = &level.compaction_keys[..active];
        let later = &level.compaction_keys[active..];

        for &k in now {
            if depths[k] + 1 > cfg.max_depth {
                let iv = level.segments[k].source_interval;
                return Err(Error::DepthExceeded {
                    max_depth: cfg.max_depth,
                    t_a: iv.t_a,
                    t_b: iv.t_b,
                });
            }
        }

        let children: Vec<Vec<CubicApproxSegment<D>>> = engine.map(now, 4, |&k| {
            let seg = &level.segments[k];
            let params = splits[k].as_deref().unwrap();
            split_at_all(seg, &segments[seg.source_segment], params)
        });

        let n_now = level.child_prefix_sum[active];
        let mut slots: Vec<Option<Pending<D>>> = vec![None; n_now];
        for (j, (kids, &k)) in children.into_iter().zip(now).enumerate() {
            let base = level.child_prefix_sum[j];
            debug_assert_eq!(kids.len(), level.child_prefix_sum[j + 1] - base);
            for (c, kid) in kids.into_iter().enumerate() {
                slots[base + c] = Some(Pending {
                    seg: kid,
                    depth: depths[k] + 1,
                    split: None,
                });
            }
        }
        queue = slots.into_iter().map(|s| s.expect("slot filled")).collect();
        for &k in later {
            queue.push(Pending {
                seg: level.segments[k].clone(),
                depth: depths[k],
                split: splits[k].clone(),
            });
        }
    }

    accepted.sort_by(|a, b| {
        a.source_segment
            .cmp(&b.source_segment)
            .then(a.source_interval.t_a.total_cmp(&b.source_interval.t_a))
    });
    Ok(accepted)
}

/// Power-basis coefficients of a Bézier segment, per coordinate.
pub fn power_coefficients<const D: usize>(pts: &[Point<D>]) -> Vec<Point<D>> {
    bernstein_matrix(pts.len() - 1).apply_points(pts)
}
