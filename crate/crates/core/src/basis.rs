//! Constant and per-span matrices used throughout the pipeline.
//!
//! Conventions: a row vector of monomials `[1 t … t^p]` multiplies a
//! coefficient matrix from the left, and control points are stacked as a
//! column, so `C(t) = [1 t … t^p] · A · P`.

use std::sync::OnceLock;

use crate::curve::{BSplineCurve, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::point::Point;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            entries: rows.iter().flatten().copied().collect(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == 0.0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.entries[r * rhs.cols + c] += a * rhs.entries[k * rhs.cols + c];
                }
            }
        }
        out
    }

    /// `self · v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self · P` where `P` is a column of points.
    pub fn apply_points<const D: usize>(&self, pts: &[Point<D>]) -> Vec<Point<D>> {
        assert_eq!(self.cols, pts.len(), "dimension mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = Point::zero();
                for (a, p) in self.row(r).iter().zip(pts) {
                    if *a != 0.0 {
                        acc += *p * *a;
                    }
                }
                acc
            })
            .collect()
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
                .unwrap();
            if a[(pivot, col)] == 0.0 {
                return Err(Error::Numerical("singular matrix".into()));
            }
            if pivot != col {
                for c in 0..n {
                    a.entries.swap(pivot * n + c, col * n + c);
                    inv.entries.swap(pivot * n + c, col * n + c);
                }
            }
            let d = a[(col, col)];
            for c in 0..n {
                a[(col, c)] /= d;
                inv[(col, c)] /= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == 0.0 {
                    continue;
                }
                for c in 0..n {
                    a[(r, c)] -= f * a[(col, c)];
                    inv[(r, c)] -= f * inv[(col, c)];
                }
            }
        }
        Ok(inv)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.entries[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.entries[r * self.cols + c]
    }
}

const PASCAL_ROWS: usize = 2 * MAX_DEGREE + 2;

fn pascal() -> &'static [[f64; PASCAL_ROWS]; PASCAL_ROWS] {
    static TABLE: OnceLock<Box<[[f64; PASCAL_ROWS]; PASCAL_ROWS]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Box::new([[0.0; PASCAL_ROWS]; PASCAL_ROWS]);
        for n in 0..PASCAL_ROWS {
            t[n][0] = 1.0;
            for k in 1..=n {
                t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0.0 };
            }
        }
        t
    })
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
#[inline]
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        0.0
    } else {
        pascal()[n][k]
    }
}

/// Polynomial coefficients of the basis functions `N_{q−p,p} … N_{q,p}` on
/// the span `[t_q, t_{q+1})`, in powers of the global parameter `t`.
pub fn basis_coefficient_matrix<const D: usize>(
    curve: &BSplineCurve<D>,
    span: usize,
) -> Result<Matrix> {
    basis_coefficient_matrix_at(curve, span, 0.0)
}

/// As [`basis_coefficient_matrix`], in powers of `t − origin`.
///
/// The decomposition uses `origin = t_q` so that coefficients stay on the
/// scale of the span width instead of the absolute knot values.
pub fn basis_coefficient_matrix_at<const D: usize>(
    curve: &BSplineCurve<D>,
    span: usize,
    origin: f64,
) -> Result<Matrix> {
    let p = curve.degree();
    let k = curve.knots().as_slice();
    let q = span;
    if q < p || q + 1 >= k.len() {
        return Err(Error::DomainError(format!(
            "span index {q} outside [{p}, {}]",
            k.len() - 2
        )));
    }
    if !(k[q] < k[q + 1]) {
        return Err(Error::DegenerateSpan(k[q], k[q + 1]));
    }
    let w = p + 1;
    // basis[j] holds N_{q-p+j, level} as coefficients in (t - origin).
    let mut basis = vec![vec![0.0; w]; w + 1];
    basis[p][0] = 1.0;
    for level in 1..=p {
        for j in (p - level)..=p {
            let i = q - p + j;
            let mut next = vec![0.0; w];
            // (t - t_i) / (t_{i+level} - t_i) · N_{i,level-1}
            let d1 = k[i + level] - k[i];
            if d1 > 0.0 && basis[j].iter().any(|&c| c != 0.0) {
                let c0 = (origin - k[i]) / d1;
                let c1 = 1.0 / d1;
                for e in 0..w {
                    let a = basis[j][e];
                    next[e] += a * c0;
                    if e + 1 < w {
                        next[e + 1] += a * c1;
                    }
                }
            }
            // (t_{i+level+1} - t) / (t_{i+level+1} - t_{i+1}) · N_{i+1,level-1}
            let d2 = k[i + level + 1] - k[i + 1];
            if d2 > 0.0 && basis[j + 1].iter().any(|&c| c != 0.0) {
                let c0 = (k[i + level + 1] - origin) / d2;
                let c1 = -1.0 / d2;
                for e in 0..w {
                    let a = basis[j + 1][e];
                    next[e] += a * c0;
                    if e + 1 < w {
                        next[e + 1] += a * c1;
                    }
                }
            }
            basis[j] = next;
        }
    }
    let mut a = Matrix::zeros(w, w);
    for (j, coeffs) in basis.iter().take(w).enumerate() {
        for (e, &c) in coeffs.iter().enumerate() {
            a[(e, j)] = c;
        }
    }
    Ok(a)
}

/// `M` with `[1 t … t^p] = [1 u … u^p] · M` for `t = t_q + u·(t_q1 − t_q)`.
pub fn reparam_matrix(t_q: f64, t_q1: f64, p: usize) -> Result<Matrix> {
    if !(t_q < t_q1) {
        return Err(Error::DegenerateSpan(t_q, t_q1));
    }
    let delta = t_q1 - t_q;
    let mut m = Matrix::zeros(p + 1, p + 1);
    for i in 0..=p {
        for k in 0..=i {
            m[(k, i)] = binomial(i, k) * delta.powi(k as i32) * t_q.powi((i - k) as i32);
        }
    }
    Ok(m)
}

fn build_bernstein(p: usize) -> Matrix {
    let mut b = Matrix::zeros(p + 1, p + 1);
    for k in 0..=p {
        for j in 0..=k {
            let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
            b[(k, j)] = sign * binomial(p, j) * binomial(p - j, k - j);
        }
    }
    b
}

fn check_degree(p: usize) {
    assert!(
        (1..=MAX_DEGREE).contains(&p),
        "degree {p} outside 1..={MAX_DEGREE}"
    );
}

/// `B_p[k][j]` = coefficient of `u^k` in the Bernstein polynomial `B_{j,p}(u)`.
pub fn bernstein_matrix(p: usize) -> &'static Matrix {
    check_degree(p);
    static CACHE: [OnceLock<Matrix>; MAX_DEGREE + 1] = [const { OnceLock::new() }; MAX_DEGREE + 1];
    CACHE[p].get_or_init(|| build_bernstein(p))
}

/// Relative residual of a claimed inverse: `|B·X − I|_{ij}` divided by
/// `Σ_k |B_ik|·|X_kj|`, maximised over entries.
pub fn inverse_residual(b: &Matrix, x: &Matrix) -> f64 {
    let prod = b.mul(x);
    let n = b.rows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            let scale: f64 = (0..n).map(|k| (b[(i, k)] * x[(k, j)]).abs()).sum();
            let r = (prod[(i, j)] - target).abs() / scale.max(1.0);
            worst = worst.max(r);
        }
    }
    worst
}

/// Newton steps `X ← X + X·(I − B·X)` on an elimination inverse.
fn refine_inverse(b: &Matrix, mut x: Matrix) -> Matrix {
    let n = b.rows();
    for _ in 0..3 {
        let mut r = b.mul(&x);
        for e in r.entries.iter_mut() {
            *e = -*e;
        }
        for i in 0..n {
            r[(i, i)] += 1.0;
        }
        let dx = x.mul(&r);
        for (xe, de) in x.entries.iter_mut().zip(&dx.entries) {
            *xe += de;
        }
    }
    x
}

/// Residual above which a computed `B_p⁻¹` is rejected.
pub const INVERSE_RESIDUAL_LIMIT: f64 = 1e-9;

/// `B_p⁻¹`, computed once by pivoted elimination and checked against
/// [`INVERSE_RESIDUAL_LIMIT`].
pub fn bernstein_matrix_inverse(p: usize) -> Result<&'static Matrix> {
    check_degree(p);
    static CACHE: [OnceLock<Result<Matrix>>; MAX_DEGREE + 1] =
        [const { OnceLock::new() }; MAX_DEGREE + 1];
    CACHE[p]
        .get_or_init(|| {
            let b = bernstein_matrix(p);
            let inv = refine_inverse(b, b.inverse()?);
            let r = inverse_residual(b, &inv);
            if r > INVERSE_RESIDUAL_LIMIT {
                return Err(Error::Numerical(format!(
                    "B_{p}·B_{p}^-1 residual {r:e} exceeds {INVERSE_RESIDUAL_LIMIT:e}"
                )));
            }
            Ok(inv)
        })
        .as_ref()
        .map_err(Clone::clone)
}

/// `T` with `b = T·a`: power coefficients to Bernstein ordinates.
pub fn power_to_bernstein_matrix(n: usize) -> Matrix {
    let mut t = Matrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=i {
            t[(i, j)] = binomial(i, j) / binomial(n, j);
        }
    }
    t
}

/// Degree-5 power-to-Bernstein matrix, shared by every rebasement.
pub fn power_to_bernstein_quintic() -> &'static Matrix {
    static T5: OnceLock<Matrix> = OnceLock::new();
    T5.get_or_init(|| power_to_bernstein_matrix(5))
}

/// Left and right subdivision matrices of a degree-`n` Bézier split at `z`.
///
/// `S_L(z)·P` are the control points of the piece on `[0,z]` and `S_R(z)·P`
/// of the piece on `[z,1]`.
pub fn subdivision_matrices(n: usize, z: f64) -> (Matrix, Matrix) {
    let w = 1.0 - z;
    let mut left = Matrix::zeros(n + 1, n + 1);
    let mut right = Matrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=i {
            left[(i, j)] = binomial(i, j) * z.powi(j as i32) * w.powi((i - j) as i32);
        }
        for j in i..=n {
            right[(i, j)] =
                binomial(n - i, j - i) * z.powi((j - i) as i32) * w.powi((n - j) as i32);
        }
    }
    (left, right)
}

/// The stacked 8×4 cubic subdivision matrix `[S_L(z); S_R(z)]`.
pub fn cubic_subdivision_matrix(z: f64) -> Matrix {
    let (l, r) = subdivision_matrices(3, z);
    let mut s = Matrix::zeros(8, 4);
    for i in 0..4 {
        for j in 0..4 {
            s[(i, j)] = l[(i, j)];
            s[(i + 4, j)] = r[(i, j)];
        }
    }
    s
}

/// Gram matrix of Bernstein products, `g_ij = ∫₀¹ B_i^m B_j^n dt`.
pub fn gram_matrix(m: usize, n: usize) -> &'static Matrix {
    check_degree(m);
    check_degree(n);
    const W: usize = MAX_DEGREE + 1;
    static CACHE: OnceLock<Vec<OnceLock<Matrix>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| (0..W * W).map(|_| OnceLock::new()).collect());
    cache[m * W + n].get_or_init(|| {
        let mut g = Matrix::zeros(m + 1, n + 1);
        for i in 0..=m {
            for j in 0..=n {
                g[(i, j)] =
                    binomial(m, i) * binomial(n, j) / ((m + n + 1) as f64 * binomial(m + n, i + j));
            }
        }
        g
    })
}
