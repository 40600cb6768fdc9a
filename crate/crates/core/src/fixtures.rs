//! Seeded random curves and queries shared by tests, benches and the CLI
//! self-test.

use rand::Rng;

use crate::curve::BSplineCurve;
use crate::oracle::eval_de_boor;
use crate::point::Point;
use crate::poly::Poly;

/// Degree and control-point count of the eighteen benchmark models
/// (nine planar, nine spatial).
pub const TABLE_SHAPES_2D: [(usize, usize); 9] = [
    (4, 5),
    (5, 6),
    (6, 7),
    (4, 9),
    (5, 12),
    (6, 15),
    (4, 30),
    (5, 16),
    (6, 50),
];
pub const TABLE_SHAPES_3D: [(usize, usize); 9] = [
    (4, 5),
    (5, 6),
    (6, 7),
    (4, 9),
    (5, 12),
    (6, 15),
    (4, 30),
    (5, 40),
    (6, 50),
];

/// Clamped knot vector on `[0, 1]` with random span widths.
pub fn random_clamped_knots<R: Rng>(rng: &mut R, degree: usize, n_ctrl: usize) -> Vec<f64> {
    let spans = n_ctrl - degree;
    let weights: Vec<f64> = (0..spans).map(|_| rng.gen_range(0.25..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut knots = vec![0.0; degree + 1];
    let mut acc = 0.0;
    for w in &weights[..spans - 1] {
        acc += w / total;
        knots.push(acc);
    }
    knots.extend(std::iter::repeat_n(1.0, degree + 1));
    knots
}

pub fn random_point<R: Rng, const D: usize>(rng: &mut R) -> Point<D> {
    Point(std::array::from_fn(|_| rng.gen::<f64>()))
}

/// Clamped curve with control points in the unit box.
pub fn random_curve<R: Rng, const D: usize>(
    rng: &mut R,
    degree: usize,
    n_ctrl: usize,
) -> BSplineCurve<D> {
    let knots = random_clamped_knots(rng, degree, n_ctrl);
    let pts = (0..n_ctrl).map(|_| random_point(rng)).collect();
    BSplineCurve::new(degree, knots, pts).expect("fixture curve is valid")
}

/// Queries spread over the unit box grown by `margin` on every side.
pub fn random_queries<R: Rng, const D: usize>(rng: &mut R, n: usize, margin: f64) -> Vec<Point<D>> {
    (0..n)
        .map(|_| {
            Point(std::array::from_fn(|_| {
                rng.gen_range(-margin..1.0 + margin)
            }))
        })
        .collect()
}

/// Points `C(t)` at random `t`, with the parameters used.
pub fn on_curve_points<R: Rng, const D: usize>(
    rng: &mut R,
    curve: &BSplineCurve<D>,
    n: usize,
) -> Vec<(f64, Point<D>)> {
    let (a, b) = curve.domain();
    (0..n)
        .map(|_| {
            let t = rng.gen_range(a..=b);
            (t, eval_de_boor(curve, t).expect("t inside the domain"))
        })
        .collect()
}

/// Random quartic: half built from roots around `[0, 1]`, half with
/// uniform coefficients.
pub fn random_quartic<R: Rng>(rng: &mut R) -> Poly {
    if rng.gen() {
        let roots: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.5..1.5)).collect();
        let lead = rng.gen_range(0.1..3.0) * if rng.gen() { 1.0 } else { -1.0 };
        Poly::from_roots(lead, &roots)
    } else {
        Poly::new((0..5).map(|_| rng.gen_range(-1.0..1.0)).collect())
    }
}

/// Quintic whose only root in `[0, 1]` is the simple root `r`; negative at 0.
pub fn single_root_quintic<R: Rng>(rng: &mut R) -> (f64, Poly) {
    let r = rng.gen_range(0.01..0.99);
    let mut roots = vec![r];
    for _ in 0..4 {
        roots.push(if rng.gen() {
            rng.gen_range(1.2..3.0)
        } else {
            rng.gen_range(-3.0..-0.2)
        });
    }
    let p = Poly::from_roots(1.0, &roots);
    (r, if p.eval(0.0) > 0.0 { p.scale(-1.0) } else { p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn knots_are_clamped_and_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (p, n) in TABLE_SHAPES_2D.iter().chain(&TABLE_SHAPES_3D) {
            let k = random_clamped_knots(&mut rng, *p, *n);
            assert_eq!(k.len(), n + p + 1);
            assert!(k.windows(2).all(|w| w[0] <= w[1]));
            assert!(k[p + 1..*n].iter().all(|&v| v > 0.0 && v < 1.0));
            let c: BSplineCurve<3> = random_curve(&mut rng, *p, *n);
            assert_eq!(c.nonzero_spans().len(), n - p);
        }
    }
}
