//! Fixed-dimension points and vectors.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

/// A point (or displacement) in `D`-dimensional Euclidean space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<const D: usize>(pub [f64; D]);

pub type Point2 = Point<2>;
pub type Point3 = Point<3>;

impl<const D: usize> Default for Point<D> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const D: usize> Point<D> {
    #[inline]
    pub const fn new(coords: [f64; D]) -> Self {
        Self(coords)
    }

    #[inline]
    pub const fn zero() -> Self {
        Self([0.0; D])
    }

    #[inline]
    pub fn coords(&self) -> &[f64; D] {
        &self.0
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for k in 0..D {
            s += self.0[k] * other.0[k];
        }
        s
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn distance(&self, other: &Self) -> f64 {
        (*self - *other).norm()
    }

    /// `self + (other - self) * t`
    #[inline]
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        let mut out = [0.0; D];
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.0[k] + (other.0[k] - self.0[k]) * t;
        }
        Self(out)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl<const D: usize> From<[f64; D]> for Point<D> {
    fn from(c: [f64; D]) -> Self {
        Self(c)
    }
}

impl<const D: usize> Index<usize> for Point<D> {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl<const D: usize> IndexMut<usize> for Point<D> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl<const D: usize> Add for Point<D> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const D: usize> AddAssign for Point<D> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        for k in 0..D {
            self.0[k] += rhs.0[k];
        }
    }
}

impl<const D: usize> Sub for Point<D> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl<const D: usize> SubAssign for Point<D> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        for k in 0..D {
            self.0[k] -= rhs.0[k];
        }
    }
}

impl<const D: usize> Mul<f64> for Point<D> {
    type Output = Self;
    #[inline]
    fn mul(mut self, rhs: f64) -> Self {
        for c in self.0.iter_mut() {
            *c *= rhs;
        }
        self
    }
}

impl<const D: usize> Neg for Point<D> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self * -1.0
    }
}

/// Diagonal of the axis-aligned bounding box of `points`.
pub fn bbox_diagonal<const D: usize>(points: &[Point<D>]) -> f64 {
    let Some(first) = points.first() else {
        return 0.0;
    };
    let mut lo = *first;
    let mut hi = *first;
    for p in points {
        for k in 0..D {
            lo.0[k] = lo.0[k].min(p.0[k]);
            hi.0[k] = hi.0[k].max(p.0[k]);
        }
    }
    (hi - lo).norm()
}
