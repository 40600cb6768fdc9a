//! B-spline to piecewise Bézier conversion as a matrix pipeline.
//!
//! For every nonzero span `[t_q, t_{q+1})` the local control points are
//! mapped by `D_q = M_q · A_q · [P_{q−p} … P_q]` into power coefficients of
//! the local parameter `u`, then one shared `B_p⁻¹` turns every `D_q` into
//! Bézier control points. The `D_q` blocks are laid out span-major in one
//! buffer so the final multiply is a single pass.
//!
//! Only the global-parameter side is reparameterised. Reparameterising the
//! Bernstein side instead would need a fresh inverse of `M·B` per span.

use crate::basis::{basis_coefficient_matrix_at, bernstein_matrix_inverse, reparam_matrix};
use crate::curve::BSplineCurve;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::segment::{BezierSegment, Interval};

/// Exact Bézier segments of `curve`, one per nonzero span, in parameter order.
pub fn decompose_to_bezier<const D: usize>(
    curve: &BSplineCurve<D>,
) -> Result<Vec<BezierSegment<D>>> {
    let p = curve.degree();
    let w = p + 1;
    let spans = curve.nonzero_spans();
    if spans.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let knots = curve.knots().as_slice();
    let ctrl = curve.control_points();

    // D_q blocks, span-major.
    let mut blocks: Vec<Point<D>> = Vec::with_capacity(spans.len() * w);
    for &q in &spans {
        let (tq, tq1) = (knots[q], knots[q + 1]);
        // Coefficients are taken about t_q, so the reparameterisation is
        // the pure scaling t − t_q = u·(t_{q+1} − t_q).
        let a = basis_coefficient_matrix_at(curve, q, tq)?;
        let m = reparam_matrix(0.0, tq1 - tq, p)?;
        blocks.extend(m.mul(&a).apply_points(&ctrl[q - p..=q]));
    }

    let b_inv = bernstein_matrix_inverse(p)?;
    let mut out = Vec::with_capacity(spans.len());
    for (block, &q) in blocks.chunks_exact(w).zip(&spans) {
        let mut cps = b_inv.apply_points(block);
        if q == spans[0] {
            cps[0] = ctrl[0];
        }
        if q == *spans.last().unwrap() {
            cps[p] = ctrl[ctrl.len() - 1];
        }
        out.push(BezierSegment::new(
            cps,
            Interval::new(knots[q], knots[q + 1])?,
        ));
    }
    stitch(&mut out);
    Ok(out)
}

/// Neighbouring segments of a continuous curve share their joint; store one
/// value so the pieces meet exactly.
fn stitch<const D: usize>(segs: &mut [BezierSegment<D>]) {
    for i in 1..segs.len() {
        let prev_end = *segs[i - 1].control_points.last().unwrap();
        let next_start = segs[i].control_points[0];
        let gap = prev_end.distance(&next_start);
        let scale = segs[i - 1]
            .control_points
            .iter()
            .chain(&segs[i].control_points)
            .map(|p| p.norm())
            .fold(1.0, f64::max);
        // only join points that agree up to rounding (C0 joints)
        if gap <= 1e-12 * scale {
            segs[i].control_points[0] = prev_end;
        }
    }
}

/// Per-curve results of [`batched_decompose`], in input order.
pub fn batched_decompose<const D: usize>(
    curves: &[BSplineCurve<D>],
    engine: &Engine,
) -> Vec<Result<Vec<BezierSegment<D>>>> {
    engine.map(curves, 1, decompose_to_bezier)
}
