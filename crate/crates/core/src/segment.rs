//! Bézier segments and the affine parameter bookkeeping that ties them back
//! to the source curve domain.

use crate::error::{Error, Result};
use crate::point::Point;

/// A parameter interval `[t_a, t_b]` of the original curve domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub t_a: f64,
    pub t_b: f64,
}

impl Interval {
    pub fn new(t_a: f64, t_b: f64) -> Result<Self> {
        if !(t_a < t_b) {
            return Err(Error::DegenerateSpan(t_a, t_b));
        }
        Ok(Self { t_a, t_b })
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.t_b - self.t_a
    }

    /// Map a local parameter `u ∈ [0,1]` into this interval.
    pub fn local_to_global(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::DomainError(format!(
                "local parameter {u} outside [0,1]"
            )));
        }
        Ok(self.to_global(u))
    }

    /// Unchecked `t_a + u·(t_b − t_a)`; endpoints are returned exactly.
    #[inline]
    pub fn to_global(&self, u: f64) -> f64 {
        if u <= 0.0 {
            self.t_a
        } else if u >= 1.0 {
            self.t_b
        } else {
            self.t_a + u * (self.t_b - self.t_a)
        }
    }

    #[inline]
    pub fn global_to_local(&self, t: f64) -> f64 {
        if t == self.t_a {
            0.0
        } else if t == self.t_b {
            1.0
        } else {
            (t - self.t_a) / (self.t_b - self.t_a)
        }
    }

    /// Split at local `z`; the shared endpoint is stored once.
    pub fn split(&self, z: f64) -> (Interval, Interval) {
        let tm = self.to_global(z);
        (
            Interval {
                t_a: self.t_a,
                t_b: tm,
            },
            Interval {
                t_a: tm,
                t_b: self.t_b,
            },
        )
    }

    /// Sub-interval for the local range `[u0, u1]`.
    pub fn sub(&self, u0: f64, u1: f64) -> Interval {
        Interval {
            t_a: self.to_global(u0),
            t_b: self.to_global(u1),
        }
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.t_a >= self.t_a && other.t_b <= self.t_b
    }
}

/// Evaluate the Bernstein-form polynomial with control values `points` at `u`
/// (de Casteljau).
pub fn de_casteljau<const D: usize>(points: &[Point<D>], u: f64) -> Point<D> {
    let mut buf: smallbuf::Buf<D> = smallbuf::Buf::from_slice(points);
    let work = buf.as_mut_slice();
    let n = work.len();
    for r in 1..n {
        for i in 0..n - r {
            work[i] = work[i].lerp(&work[i + 1], u);
        }
    }
    work[0]
}

mod smallbuf {
    use crate::point::Point;

    /// Stack buffer for up to 32 points, heap otherwise.
    pub enum Buf<const D: usize> {
        Stack([Point<D>; 32], usize),
        Heap(Vec<Point<D>>),
    }

    impl<const D: usize> Buf<D> {
        pub fn from_slice(src: &[Point<D>]) -> Self {
            if src.len() <= 32 {
                let mut a = [Point::zero(); 32];
                a[..src.len()].copy_from_slice(src);
                Buf::Stack(a, src.len())
            } else {
                Buf::Heap(src.to_vec())
            }
        }

        pub fn as_mut_slice(&mut self) -> &mut [Point<D>] {
            match self {
                Buf::Stack(a, n) => &mut a[..*n],
                Buf::Heap(v) => v.as_mut_slice(),
            }
        }
    }
}

/// A single polynomial piece in Bernstein form together with the interval of
/// the original curve domain it represents.
#[derive(Debug, Clone, PartialEq)]
pub struct BezierSegment<const D: usize> {
    pub control_points: Vec<Point<D>>,
    pub source_interval: Interval,
}

impl<const D: usize> BezierSegment<D> {
    pub fn new(control_points: Vec<Point<D>>, source_interval: Interval) -> Self {
        debug_assert!(!control_points.is_empty());
        Self {
            control_points,
            source_interval,
        }
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.control_points.len() - 1
    }

    /// Evaluate at local parameter `u ∈ [0,1]`.
    #[inline]
    pub fn eval(&self, u: f64) -> Point<D> {
        de_casteljau(&self.control_points, u)
    }

    /// Evaluate at global parameter `t` of the source domain.
    #[inline]
    pub fn eval_global(&self, t: f64) -> Point<D> {
        self.eval(self.source_interval.global_to_local(t))
    }
}

/// A cubic approximant of part of a [`BezierSegment`].
#[derive(Debug, Clone, PartialEq)]
pub struct CubicApproxSegment<const D: usize> {
    pub control_points: [Point<D>; 4],
    pub source_interval: Interval,
    /// Maximum deviation from the original at equal parameters, in the
    /// units of the control points.
    pub measured_error: f64,
    /// Index of the Bézier segment this cubic approximates.
    pub source_segment: usize,
}

impl<const D: usize> CubicApproxSegment<D> {
    #[inline]
    pub fn eval(&self, u: f64) -> Point<D> {
        let [p0, p1, p2, p3] = self.control_points;
        let v = 1.0 - u;
        let b0 = v * v * v;
        let b1 = 3.0 * v * v * u;
        let b2 = 3.0 * v * u * u;
        let b3 = u * u * u;
        p0 * b0 + p1 * b1 + p2 * b2 + p3 * b3
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn local_to_global_examples() {
        assert_eq!(
            Interval::new(0.0, 1.0)
                .unwrap()
                .local_to_global(0.25)
                .unwrap(),
            0.25
        );
        assert_eq!(
            Interval::new(2.0, 4.0)
                .unwrap()
                .local_to_global(0.5)
                .unwrap(),
            3.0
        );
        assert_eq!(
            Interval::new(0.2, 0.5)
                .unwrap()
                .local_to_global(1.0)
                .unwrap(),
            0.5
        );
    }

    #[test]
    fn local_outside_unit_is_domain_error() {
        let iv = Interval::new(0.0, 1.0).unwrap();
        assert!(matches!(
            iv.local_to_global(1.5),
            Err(Error::DomainError(_))
        ));
        assert!(matches!(
            iv.local_to_global(-0.1),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn empty_interval_rejected() {
        assert!(Interval::new(1.0, 1.0).is_err());
    }

    #[test]
    fn split_shares_endpoint() {
        let iv = Interval::new(0.1, 0.7).unwrap();
        let (l, r) = iv.split(0.3);
        assert_eq!(l.t_b, r.t_a);
        assert_eq!(l.t_a, iv.t_a);
        assert_eq!(r.t_b, iv.t_b);
    }

    proptest! {
        #[test]
        fn round_trip_global_local(a in -10.0f64..10.0, w in 1e-3f64..10.0, u in 0.0f64..=1.0) {
            let iv = Interval::new(a, a + w).unwrap();
            let t = iv.local_to_global(u).unwrap();
            let back = iv.global_to_local(t);
            prop_assert!((iv.to_global(back) - t).abs() <= 1e-14 * (1.0 + t.abs()));
            prop_assert!((back - u).abs() <= 1e-14 * (1.0 + a.abs() / w + 1.0));
        }
    }

    #[test]
    fn cubic_eval_matches_de_casteljau() {
        let pts = [
            Point([0.0, 0.0]),
            Point([1.0, 2.0]),
            Point([3.0, -1.0]),
            Point([4.0, 0.5]),
        ];
        let c = CubicApproxSegment {
            control_points: pts,
            source_interval: Interval::new(0.0, 1.0).unwrap(),
            measured_error: 0.0,
            source_segment: 0,
        };
        for k in 0..=10 {
            let u = k as f64 / 10.0;
            let a = c.eval(u);
            let b = de_casteljau(&pts, u);
            assert!(a.distance(&b) < 1e-14);
        }
    }
}
