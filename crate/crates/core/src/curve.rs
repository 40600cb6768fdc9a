//! Knot vectors and clamped B-spline curves.

use crate::error::{Error, Result};
use crate::point::Point;

/// Highest supported degree.
pub const MAX_DEGREE: usize = 31;

/// A nondecreasing sequence of knots.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector(Vec<f64>);

impl KnotVector {
    /// Checks finiteness and monotonicity only; clamping depends on the degree
    /// and is checked when a curve is built.
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::NonFinite("knot vector"));
        }
        for (i, w) in knots.windows(2).enumerate() {
            if w[0] > w[1] {
                return Err(Error::NonMonotoneKnots {
                    index: i,
                    left: w[0],
                    right: w[1],
                });
            }
        }
        Ok(Self(knots))
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of times `value` occurs.
    pub fn multiplicity(&self, value: f64) -> usize {
        self.0.iter().filter(|&&k| k == value).count()
    }

    /// `(value, multiplicity)` runs in order.
    pub fn runs(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &k in &self.0 {
            match out.last_mut() {
                Some((v, m)) if *v == k => *m += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }
}

impl std::ops::Index<usize> for KnotVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A clamped, non-rational B-spline curve of degree `1..=31`.
///
/// Construction validates every invariant, so a value of this type is
/// always a well-formed curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BSplineCurve<const D: usize> {
    degree: usize,
    knots: KnotVector,
    control_points: Vec<Point<D>>,
}

impl<const D: usize> BSplineCurve<D> {
    pub fn new(degree: usize, knots: Vec<f64>, control_points: Vec<Point<D>>) -> Result<Self> {
        validate_curve(degree, knots, control_points)
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    #[inline]
    pub fn control_points(&self) -> &[Point<D>] {
        &self.control_points
    }

    /// `(t_start, t_end)` of the parameter domain.
    pub fn domain(&self) -> (f64, f64) {
        let p = self.degree;
        let n = self.control_points.len();
        (self.knots[p], self.knots[n])
    }

    /// Indices `q` of the nonzero-length spans `[t_q, t_{q+1})`, in parameter order.
    pub fn nonzero_spans(&self) -> Vec<usize> {
        let p = self.degree;
        let n = self.control_points.len();
        (p..n)
            .filter(|&q| self.knots[q] < self.knots[q + 1])
            .collect()
    }

    /// Span index containing `t`; the last nonzero span is closed on the right.
    pub fn find_span(&self, t: f64) -> usize {
        let p = self.degree;
        let n = self.control_points.len();
        let k = self.knots.as_slice();
        if t >= k[n] {
            // last nonzero span
            let mut q = n - 1;
            while q > p && k[q] == k[q + 1] {
                q -= 1;
            }
            return q;
        }
        // largest q in [p, n-1] with k[q] <= t
        let mut lo = p;
        let mut hi = n - 1;
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if k[mid] <= t {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// Diagonal of the control-net bounding box.
    pub fn scale(&self) -> f64 {
        crate::point::bbox_diagonal(&self.control_points)
    }
}

/// Build a curve from raw parts, checking every structural invariant.
pub fn validate_curve<const D: usize>(
    degree: usize,
    knots: Vec<f64>,
    control_points: Vec<Point<D>>,
) -> Result<BSplineCurve<D>> {
    if degree == 0 || degree > MAX_DEGREE {
        return Err(Error::DegreeOutOfRange(degree));
    }
    let knots = KnotVector::new(knots)?;
    if control_points.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("control points"));
    }
    let expected = knots.len().saturating_sub(degree + 1);
    if knots.len() < 2 * (degree + 1) || control_points.len() != expected {
        return Err(Error::CountMismatch {
            knots: knots.len(),
            degree,
            expected,
            actual: control_points.len(),
        });
    }
    let k = knots.as_slice();
    let m = k.len();
    if k[..=degree].iter().any(|&v| v != k[0]) {
        return Err(Error::NotClamped(format!(
            "first {} knots are not equal",
            degree + 1
        )));
    }
    if k[m - degree - 1..].iter().any(|&v| v != k[m - 1]) {
        return Err(Error::NotClamped(format!(
            "last {} knots are not equal",
            degree + 1
        )));
    }
    for (value, multiplicity) in knots.runs() {
        if multiplicity > degree + 1 {
            return Err(Error::KnotMultiplicity {
                value,
                multiplicity,
                limit: degree + 1,
            });
        }
    }
    Ok(BSplineCurve {
        degree,
        knots,
        control_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts<const D: usize>(n: usize) -> Vec<Point<D>> {
        (0..n).map(|i| Point([i as f64; D])).collect()
    }

    #[test]
    fn single_span_cubic_is_valid() {
        let c = BSplineCurve::<2>::new(3, vec![0., 0., 0., 0., 1., 1., 1., 1.], pts(4)).unwrap();
        assert_eq!(c.domain(), (0.0, 1.0));
        assert_eq!(c.nonzero_spans(), vec![3]);
    }

    #[test]
    fn quartic_with_ten_knots_and_five_points() {
        let knots = vec![0., 0., 0., 0., 0., 1., 1., 1., 1., 1.];
        assert_eq!(knots.len(), 10);
        let c = BSplineCurve::<3>::new(4, knots, pts(5)).unwrap();
        assert_eq!(c.nonzero_spans().len(), 1);
    }

    #[test]
    fn decreasing_pair_rejected() {
        let err = BSplineCurve::<2>::new(3, vec![0., 0., 0., 0., 0.5, 0.4, 1., 1., 1., 1.], pts(6))
            .unwrap_err();
        assert!(matches!(err, Error::NonMonotoneKnots { index: 4, .. }));
    }

    #[test]
    fn unclamped_rejected() {
        let err = BSplineCurve::<2>::new(2, vec![0., 1., 2., 3., 4., 5.], pts(3)).unwrap_err();
        assert!(matches!(err, Error::NotClamped(_)));
    }

    #[test]
    fn count_mismatch_rejected() {
        let err =
            BSplineCurve::<2>::new(3, vec![0., 0., 0., 0., 1., 1., 1., 1.], pts(5)).unwrap_err();
        assert!(matches!(
            err,
            Error::CountMismatch {
                expected: 4,
                actual: 5,
                ..
            }
        ));
    }

    #[test]
    fn degree_bounds() {
        assert!(matches!(
            BSplineCurve::<2>::new(0, vec![0., 1.], pts(1)).unwrap_err(),
            Error::DegreeOutOfRange(0)
        ));
        let k: Vec<f64> = [vec![0.0; 33], vec![1.0; 33]].concat();
        assert!(matches!(
            BSplineCurve::<2>::new(32, k, pts(33)).unwrap_err(),
            Error::DegreeOutOfRange(32)
        ));
    }

    #[test]
    fn excessive_interior_multiplicity_rejected() {
        let err =
            BSplineCurve::<2>::new(1, vec![0., 0., 0.5, 0.5, 0.5, 1., 1.], pts(5)).unwrap_err();
        assert!(matches!(
            err,
            Error::KnotMultiplicity {
                multiplicity: 3,
                ..
            }
        ));
    }

    #[test]
    fn zero_length_spans_skipped() {
        let c = BSplineCurve::<2>::new(2, vec![0., 0., 0., 0.5, 0.5, 1., 1., 1.], pts(5)).unwrap();
        assert_eq!(c.nonzero_spans(), vec![2, 4]);
        assert_eq!(c.find_span(0.0), 2);
        assert_eq!(c.find_span(0.5), 4);
        assert_eq!(c.find_span(1.0), 4);
    }
}
