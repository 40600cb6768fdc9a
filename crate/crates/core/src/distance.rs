//! Squared-distance derivative polynomials and monotone splitting.
//!
//! For a cubic `C(t)` and a query `q`, `E(t) = 2(C(t) − q)·C'(t)` is the
//! derivative of the squared distance (degree 5) and
//! `E'(t) = 2(C'·C' + (C − q)·C'')` is a quartic. Splitting the cubic at the
//! roots of `E'` leaves pieces on which `E` is monotone, so each piece holds
//! at most one interior stationary point of the distance.

use crate::basis::{bernstein_matrix, subdivision_matrices};
use crate::point::Point;
use crate::poly::Poly;
use crate::segment::CubicApproxSegment;

/// `E` and `E'` for one (cubic, query) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DistancePolys {
    /// Degree ≤ 5.
    pub e: Poly,
    /// Degree ≤ 4.
    pub e_prime: Poly,
}

/// Power coefficients of a cubic, per coordinate.
#[inline]
fn cubic_power<const D: usize>(cp: &[Point<D>; 4]) -> [Point<D>; 4] {
    let b = bernstein_matrix(3);
    let mut a = [Point::zero(); 4];
    for (k, ak) in a.iter_mut().enumerate() {
        for (j, p) in cp.iter().enumerate() {
            let w = b[(k, j)];
            if w != 0.0 {
                *ak += *p * w;
            }
        }
    }
    a
}

/// Coefficients of `E` (ascending) and of `E'` computed from `C'·C' + (C−q)·C''`.
pub(crate) fn distance_coeffs<const D: usize>(
    cp: &[Point<D>; 4],
    q: &Point<D>,
) -> ([f64; 6], [f64; 5]) {
    let mut a = cubic_power(cp);
    a[0] -= *q;
    // C − q = a0 + a1 t + a2 t² + a3 t³
    let d1 = [a[1], a[2] * 2.0, a[3] * 3.0];
    let d2 = [a[2] * 2.0, a[3] * 6.0];
    let mut e = [0.0; 6];
    for i in 0..4 {
        for j in 0..3 {
            e[i + j] += 2.0 * a[i].dot(&d1[j]);
        }
    }
    let mut ep = [0.0; 5];
    for i in 0..3 {
        for j in 0..3 {
            ep[i + j] += 2.0 * d1[i].dot(&d1[j]);
        }
    }
    for i in 0..4 {
        for j in 0..2 {
            ep[i + j] += 2.0 * a[i].dot(&d2[j]);
        }
    }
    (e, ep)
}

pub fn distance_polys<const D: usize>(cp: &[Point<D>; 4], q: &Point<D>) -> DistancePolys {
    let (e, ep) = distance_coeffs(cp, q);
    DistancePolys {
        e: Poly::new(e.to_vec()),
        e_prime: Poly::new(ep.to_vec()),
    }
}

/// Leading coefficients at or below this fraction of the largest one are
/// treated as zero.
pub const LEAD_EPS: f64 = 1e-12;
/// Roots closer than this are merged.
pub const ROOT_DEDUP: f64 = 1e-10;

/// Up to four roots without allocating.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Roots {
    vals: [f64; 4],
    len: usize,
}

impl Roots {
    fn push(&mut self, r: f64) {
        if self.len < 4 {
            self.vals[self.len] = r;
            self.len += 1;
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.vals[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

#[inline]
fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * t + v)
}

#[inline]
fn horner_d(c: &[f64], t: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut d = 0.0;
    for &v in c.iter().rev() {
        d = d * t + p;
        p = p * t + v;
    }
    (p, d)
}

fn solve_linear(c0: f64, c1: f64, out: &mut Roots) {
    out.push(-c0 / c1);
}

fn solve_quadratic(c0: f64, c1: f64, c2: f64, out: &mut Roots) {
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return;
    }
    if disc == 0.0 {
        out.push(-c1 / (2.0 * c2));
        return;
    }
    let s = disc.sqrt();
    // signum(0.0) = 1, so k ≠ 0 whenever disc > 0
    let k = -0.5 * (c1 + c1.signum() * s);
    out.push(k / c2);
    out.push(c0 / k);
}

/// Real roots of the monic cubic `x³ + a x² + b x + c`.
fn solve_monic_cubic(a: f64, b: f64, c: f64, out: &mut Roots) {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    if p == 0.0 && q == 0.0 {
        out.push(-shift);
    } else if disc > 0.0 {
        let s = disc.sqrt();
        let u = (-half_q + s).cbrt();
        let v = (-half_q - s).cbrt();
        out.push(u + v - shift);
    } else {
        // three real roots: trigonometric form (p < 0 here)
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        for k in 0..3 {
            out.push(m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift);
        }
    }
}

/// Largest real root of the monic cubic `x³ + a x² + b x + c`.
fn largest_cubic_root(a: f64, b: f64, c: f64) -> f64 {
    let mut r = Roots::default();
    solve_monic_cubic(a, b, c, &mut r);
    let mut best = r
        .as_slice()
        .iter()
        .fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    // polish: the resolvent is monotone increasing beyond its largest root
    for _ in 0..3 {
        let (f, d) = horner_d(&[c, b, a, 1.0], best);
        if d == 0.0 {
            break;
        }
        let next = best - f / d;
        if !next.is_finite() {
            break;
        }
        best = next;
    }
    best
}

/// Ferrari's method for `x⁴ + a x³ + b x² + c x + d`.
fn solve_monic_quartic(a: f64, b: f64, c: f64, d: f64, out: &mut Roots) {
    let shift = a / 4.0;
    let a2 = a * a;
    let p = b - 3.0 * a2 / 8.0;
    let q = c - a * b / 2.0 + a2 * a / 8.0;
    let r = d - a * c / 4.0 + a2 * b / 16.0 - 3.0 * a2 * a2 / 256.0;
    let scale = 1.0 + p.abs().max(r.abs().sqrt());
    if q.abs() <= 1e-14 * scale * scale * scale {
        // biquadratic y⁴ + p y² + r
        let mut z = Roots::default();
        solve_quadratic(r, p, 1.0, &mut z);
        for &zi in z.as_slice() {
            if zi >= 0.0 {
                let y = zi.sqrt();
                out.push(y - shift);
                out.push(-y - shift);
            }
        }
        return;
    }
    // resolvent 8m³ + 8p m² + (2p² − 8r) m − q² = 0, positive root
    let m = largest_cubic_root(p, (2.0 * p * p - 8.0 * r) / 8.0, -q * q / 8.0);
    if !(m > 0.0) {
        return;
    }
    let s = (2.0 * m).sqrt();
    let t = q / (2.0 * s);
    let base = p / 2.0 + m;
    let mut y = Roots::default();
    solve_quadratic(base + t, -s, 1.0, &mut y);
    solve_quadratic(base - t, s, 1.0, &mut y);
    for &v in y.as_slice() {
        out.push(v - shift);
    }
}

/// All real roots of a polynomial of degree ≤ 4 given by ascending
/// coefficients, with the leading-coefficient cascade applied.
fn real_roots(c: &[f64]) -> Roots {
    let mut out = Roots::default();
    let max = c.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if max == 0.0 || !max.is_finite() {
        return out;
    }
    let mut deg = c.len() - 1;
    while deg > 0 && c[deg].abs() <= LEAD_EPS * max {
        deg -= 1;
    }
    let lead = c[deg];
    match deg {
        0 => {}
        1 => solve_linear(c[0], c[1], &mut out),
        2 => solve_quadratic(c[0], c[1], c[2], &mut out),
        3 => solve_monic_cubic(c[2] / lead, c[1] / lead, c[0] / lead, &mut out),
        _ => solve_monic_quartic(c[3] / lead, c[2] / lead, c[1] / lead, c[0] / lead, &mut out),
    }
    // polish against the full polynomial
    let mut polished = Roots::default();
    for &r0 in out.as_slice() {
        let mut r = r0;
        for _ in 0..4 {
            let (f, d) = horner_d(&c[..=deg], r);
            if d == 0.0 || f == 0.0 {
                break;
            }
            let next = r - f / d;
            if !next.is_finite() || (next - r).abs() > 1e-3 {
                break;
            }
            let better = horner(&c[..=deg], next).abs() <= f.abs();
            if !better {
                break;
            }
            r = next;
        }
        polished.push(r);
    }
    polished
}

/// Keep roots in `[0,1]` (allowing rounding just outside), sort, dedupe.
fn restrict_unit(roots: &Roots) -> Roots {
    let mut v = [0.0; 4];
    let mut n = 0;
    for &r in roots.as_slice() {
        if (-1e-12..=1.0 + 1e-12).contains(&r) {
            v[n] = r.clamp(0.0, 1.0);
            n += 1;
        }
    }
    let s = &mut v[..n];
    s.sort_by(f64::total_cmp);
    let mut out = Roots::default();
    for &r in s.iter() {
        if out.len == 0 || r - out.vals[out.len - 1] > ROOT_DEDUP {
            out.push(r);
        }
    }
    out
}

/// Sorted real roots in `[0,1]` of a polynomial of degree ≤ 4, in closed
/// form (Ferrari, Cardano, quadratic, linear).
pub fn solve_quartic_roots(coeffs: &[f64]) -> Roots {
    assert!(
        coeffs.len() <= 5 && !coeffs.is_empty(),
        "degree must be 0..=4"
    );
    restrict_unit(&real_roots(coeffs))
}

pub fn solve_quartic(p: &Poly) -> Vec<f64> {
    solve_quartic_roots(&p.coeffs).as_slice().to_vec()
}

/// Roots in `[0,1]` by Newton's iteration from evenly spread starts.
/// Reference point for timing the closed form only.
pub fn solve_quartic_newton(coeffs: &[f64]) -> Roots {
    let mut found = Roots::default();
    const STARTS: usize = 8;
    for k in 0..=STARTS {
        let mut t = k as f64 / STARTS as f64;
        for _ in 0..50 {
            let (f, d) = horner_d(coeffs, t);
            if d == 0.0 {
                break;
            }
            let step = f / d;
            t -= step;
            if step.abs() < 1e-14 {
                break;
            }
        }
        let fresh = found.as_slice().iter().all(|&r| (r - t).abs() > ROOT_DEDUP);
        if t.is_finite() && (-1e-12..=1.0 + 1e-12).contains(&t) && fresh {
            found.push(t);
        }
    }
    restrict_unit(&found)
}

/// Interior split parameters: roots of `E'` not within `ROOT_DEDUP` of 0 or 1.
pub(crate) fn split_params(ep: &[f64; 5]) -> Roots {
    let all = solve_quartic_roots(ep);
    let mut out = Roots::default();
    for &r in all.as_slice() {
        if r > ROOT_DEDUP && r < 1.0 - ROOT_DEDUP {
            out.push(r);
        }
    }
    out
}

/// Split a cubic at the given sorted local parameters, exactly.
pub(crate) fn split_cubic<const D: usize>(
    seg: &CubicApproxSegment<D>,
    params: &[f64],
) -> Vec<CubicApproxSegment<D>> {
    let mut out = Vec::with_capacity(params.len() + 1);
    let mut rest = seg.clone();
    let mut done = 0.0;
    for &u in params {
        let z = (u - done) / (1.0 - done);
        let (sl, sr) = subdivision_matrices(3, z);
        let l = sl.apply_points(&rest.control_points);
        let r = sr.apply_points(&rest.control_points);
        let (li, ri) = rest.source_interval.split(z);
        out.push(CubicApproxSegment {
            control_points: [l[0], l[1], l[2], l[3]],
            source_interval: li,
            ..rest.clone()
        });
        rest = CubicApproxSegment {
            control_points: [r[0], r[1], r[2], r[3]],
            source_interval: ri,
            ..rest
        };
        done = u;
    }
    out.push(rest);
    out
}

/// Split `seg` at every interior root of `E'` for query `q`.
pub fn monotonic_split<const D: usize>(
    seg: &CubicApproxSegment<D>,
    q: &Point<D>,
) -> Vec<CubicApproxSegment<D>> {
    let (_, ep) = distance_coeffs(&seg.control_points, q);
    split_cubic(seg, split_params(&ep).as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::bisection_roots;
    use crate::segment::Interval;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seg(cp: [[f64; 2]; 4]) -> CubicApproxSegment<2> {
        CubicApproxSegment {
            control_points: cp.map(Point),
            source_interval: Interval::new(0.0, 1.0).unwrap(),
            measured_error: 0.0,
            source_segment: 0,
        }
    }

    fn random_seg(rng: &mut ChaCha8Rng) -> CubicApproxSegment<2> {
        seg([(); 4].map(|_| [rng.gen(), rng.gen()]))
    }

    #[test]
    fn e_vanishes_at_start_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_seg(&mut rng);
        let d = distance_polys(&s.control_points, &s.control_points[0]);
        assert!(d.e.eval(0.0).abs() < 1e-15);
    }

    #[test]
    fn straight_segment_gives_linear_e() {
        let s = seg([[0., 0.], [1., 1.], [2., 2.], [3., 3.]]);
        let d = distance_polys(&s.control_points, &Point([0.3, -2.0]));
        for c in &d.e.coeffs[2..] {
            assert!(c.abs() < 1e-12);
        }
        assert!(monotonic_split(&s, &Point([0.3, -2.0])).len() == 1);
    }

    #[test]
    fn e_prime_matches_derivative_and_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let s = random_seg(&mut rng);
            let q = Point([rng.gen(), rng.gen()]);
            let d = distance_polys(&s.control_points, &q);
            let formal = d.e.derivative();
            for (a, b) in formal.coeffs.iter().zip(&d.e_prime.coeffs) {
                assert!((a - b).abs() <= 1e-12);
            }
            let h = 1e-5;
            for k in 0..32 {
                let t = 0.05 + 0.9 * k as f64 / 31.0;
                let fd = (d.e.eval(t + h) - d.e.eval(t - h)) / (2.0 * h);
                let ex = d.e_prime.eval(t);
                assert!((fd - ex).abs() <= 1e-6 * ex.abs().max(1.0));
            }
        }
    }

    #[test]
    fn quartic_examples() {
        let p = Poly::from_roots(1.0, &[0.25, 0.5, 0.75, 2.0]);
        let r = solve_quartic(&p);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([0.25, 0.5, 0.75]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(solve_quartic(&Poly::new(vec![1., 0., 0., 0., 1.])).is_empty());
    }

    #[test]
    fn cascade_to_lower_degrees() {
        let cubic = Poly::from_roots(2.0, &[0.1, 0.4, 0.9]);
        let mut c = cubic.coeffs.clone();
        c.push(1e-16);
        let r = solve_quartic(&Poly::new(c));
        assert_eq!(r.len(), 3);
        let quad = Poly::from_roots(-3.0, &[0.2, 0.6]);
        assert_eq!(solve_quartic(&quad).len(), 2);
        let lin = Poly::new(vec![-0.3, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(solve_quartic(&lin), vec![0.3]);
        assert!(solve_quartic(&Poly::new(vec![0.0; 5])).is_empty());
        assert!(solve_quartic(&Poly::constant(1.0)).is_empty());
    }

    #[test]
    fn biquadratic_and_repeated_roots() {
        let p = Poly::from_roots(1.0, &[0.5, -0.5, 0.8, -0.8]);
        let r = solve_quartic(&p);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 0.5).abs() < 1e-12 && (r[1] - 0.8).abs() < 1e-12);
        let double = Poly::from_roots(1.0, &[0.3, 0.3, 0.7, 1.5]);
        let r = solve_quartic(&double);
        assert!(r.iter().any(|&x| (x - 0.7).abs() < 1e-10));
    }

    proptest! {
        #[test]
        fn closed_form_matches_bisection(
            roots in proptest::collection::vec(-0.5f64..1.5, 4),
            lead in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0],
        ) {
            let mut sorted = roots.clone();
            sorted.sort_by(f64::total_cmp);
            // keep roots apart so bisection resolves them
            prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 1e-3));
            prop_assume!(sorted.iter().all(|r| r.abs() > 1e-3 && (r - 1.0).abs() > 1e-3));
            let p = Poly::from_roots(lead, &roots);
            let a = solve_quartic(&p);
            let b = bisection_roots(&p, 0.0, 1.0, 1e-9);
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-8);
            }
            let max = p.max_abs_coeff();
            for x in &a {
                prop_assert!(p.eval(*x).abs() <= 1e-9 * max);
            }
        }
    }

    #[test]
    fn newton_baseline_agrees_on_simple_roots() {
        let p = Poly::from_roots(1.0, &[0.25, 0.5, 0.75, 2.0]);
        let r = solve_quartic_newton(&p.coeffs);
        assert_eq!(r.len(), 3);
    }

    fn assert_monotone(piece: &CubicApproxSegment<2>, q: &Point<2>) {
        let (_, ep) = distance_coeffs(&piece.control_points, q);
        let scale = ep.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let vals: Vec<f64> = (0..64).map(|k| horner(&ep, k as f64 / 63.0)).collect();
        let tol = 1e-10 * scale.max(1.0);
        let pos = vals.iter().any(|&v| v > tol);
        let neg = vals.iter().any(|&v| v < -tol);
        assert!(!(pos && neg), "E' changes sign on a piece: {vals:?}");
    }

    #[test]
    fn pieces_are_monotone_and_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let s = random_seg(&mut rng);
            let q = Point([rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5)]);
            let pieces = monotonic_split(&s, &q);
            assert!(pieces.len() <= 5);
            for p in &pieces {
                assert_monotone(p, &q);
                for k in 0..64 {
                    let u = k as f64 / 63.0;
                    let t = p.source_interval.to_global(u);
                    assert!(p.eval(u).distance(&s.eval(t)) <= 1e-12);
                }
            }
            for w in pieces.windows(2) {
                assert_eq!(w[0].source_interval.t_b, w[1].source_interval.t_a);
            }
        }
    }

    #[test]
    fn symmetric_arc_splits_symmetrically() {
        // an arc symmetric about x = 0; D(t) = D(1 − t) for q on the axis,
        // so E(1/2) = 0 and the roots of E' pair up around 1/2
        let s = seg([[-1., 0.], [-0.6, 1.], [0.6, 1.], [1., 0.]]);
        // below the centre of curvature at the apex, so the apex is a local
        // maximum of the distance
        let q = Point([0.0, -0.5]);
        let d = distance_polys(&s.control_points, &q);
        assert!(d.e.eval(0.5).abs() < 1e-14);
        let pieces = monotonic_split(&s, &q);
        let cuts: Vec<f64> = pieces[1..].iter().map(|p| p.source_interval.t_a).collect();
        assert!(cuts.len() >= 2, "{cuts:?}");
        let n = cuts.len();
        for i in 0..n {
            assert!((cuts[i] + cuts[n - 1 - i] - 1.0).abs() < 1e-9, "{cuts:?}");
        }
    }
}
