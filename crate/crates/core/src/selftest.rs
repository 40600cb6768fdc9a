//! Built-in invariant suites run by `splinemat selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{
    basis_coefficient_matrix_at, bernstein_matrix, bernstein_matrix_inverse, inverse_residual,
    Matrix, INVERSE_RESIDUAL_LIMIT,
};
use crate::curve::{BSplineCurve, MAX_DEGREE};
use crate::decompose::decompose_to_bezier;
use crate::distance::solve_quartic;
use crate::fixtures::{random_curve, random_quartic, single_root_quintic};
use crate::oracle::{bisection_roots, decompose_by_knot_insertion, eval_de_boor};
use crate::project::{clip, hull_x_intersections, rebase, CLIP_TOL, MAX_CLIP_ITERATIONS};

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    /// Individual checks performed.
    pub count: usize,
    /// Worst residual seen, in the suite's own units.
    pub max_residual: f64,
    pub limit: f64,
    pub passed: bool,
}

impl SuiteReport {
    fn new(name: &'static str, count: usize, max_residual: f64, limit: f64) -> Self {
        Self {
            name,
            count,
            max_residual,
            limit,
            passed: max_residual <= limit,
        }
    }
}

/// Faults that can be switched on to prove the suites catch them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FaultInjection {
    /// Perturb one entry of every `B_p⁻¹` table before checking it.
    pub corrupt_bernstein_inverse: bool,
}

pub fn run_all(seed: u64, faults: FaultInjection) -> Vec<SuiteReport> {
    vec![
        partition_of_unity(seed),
        bernstein_inverse(faults),
        decomposition_exactness(seed),
        quartic_oracle(seed),
        clipping_enclosure(seed),
    ]
}

fn partition_of_unity(seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for _ in 0..20 {
        let p = rng.gen_range(1..=8);
        let n = rng.gen_range(p + 1..p + 20);
        let c: BSplineCurve<2> = random_curve(&mut rng, p, n);
        let k = c.knots().as_slice();
        for q in c.nonzero_spans() {
            let a = basis_coefficient_matrix_at(&c, q, k[q]).expect("nonzero span");
            for _ in 0..100 {
                let t = rng.gen_range(k[q]..k[q + 1]) - k[q];
                let mut s = 0.0;
                let mut pow = 1.0;
                for r in 0..=p {
                    s += pow * a.row(r).iter().sum::<f64>();
                    pow *= t;
                }
                worst = worst.max((s - 1.0).abs());
                count += 1;
            }
        }
    }
    SuiteReport::new("partition_of_unity", count, worst, 1e-12)
}

fn bernstein_inverse(faults: FaultInjection) -> SuiteReport {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in 1..=MAX_DEGREE {
        let b = bernstein_matrix(p);
        let mut inv: Matrix = match bernstein_matrix_inverse(p) {
            Ok(m) => m.clone(),
            Err(_) => return SuiteReport::new("bernstein_inverse", count, f64::INFINITY, 0.0),
        };
        if faults.corrupt_bernstein_inverse {
            inv[(p, 0)] += 1e-3;
        }
        worst = worst.max(inverse_residual(b, &inv));
        count += 1;
    }
    SuiteReport::new("bernstein_inverse", count, worst, INVERSE_RESIDUAL_LIMIT)
}

fn decomposition_exactness(seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xdec0);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for _ in 0..20 {
        let p = rng.gen_range(2..=8);
        let n = rng.gen_range(p + 1..=50);
        let c: BSplineCurve<3> = random_curve(&mut rng, p, n);
        let segs = decompose_to_bezier(&c).expect("valid fixture");
        let reference = decompose_by_knot_insertion(&c).expect("valid fixture");
        if segs.len() != reference.len() {
            return SuiteReport::new("decomposition_exactness", count, f64::INFINITY, 1e-10);
        }
        for (a, b) in segs.iter().zip(&reference) {
            for (x, y) in a.control_points.iter().zip(&b.control_points) {
                worst = worst.max(x.distance(y));
                count += 1;
            }
        }
        let (lo, hi) = c.domain();
        for k in 0..256 {
            let t = lo + (hi - lo) * k as f64 / 255.0;
            let i = segs
                .partition_point(|s| s.source_interval.t_b <= t)
                .min(segs.len() - 1);
            let d = segs[i]
                .eval_global(t)
                .distance(&eval_de_boor(&c, t).expect("inside domain"));
            worst = worst.max(d);
            count += 1;
        }
    }
    SuiteReport::new("decomposition_exactness", count, worst, 1e-10)
}

fn quartic_oracle(seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4a27);
    let mut worst: f64 = 0.0;
    let n = 2000;
    for _ in 0..n {
        let p = random_quartic(&mut rng);
        let a = solve_quartic(&p);
        let b = bisection_roots(&p, 0.0, 1.0, 1e-9);
        if a.len() != b.len() {
            worst = f64::INFINITY;
            continue;
        }
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs());
        }
    }
    SuiteReport::new("quartic_oracle", n, worst, 1e-8)
}

/// Distance by which the true root falls outside the clipping interval,
/// worst case over random single-root quintics.
fn clipping_enclosure(seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc11b);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for _ in 0..500 {
        let (r, p) = single_root_quintic(&mut rng);
        let mut cur = rebase(&p);
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..MAX_CLIP_ITERATIONS {
            let Some((z1, z2)) = hull_x_intersections(&cur) else {
                worst = f64::INFINITY;
                break;
            };
            let w = hi - lo;
            (lo, hi) = (lo + z1 * w, lo + z2 * w);
            worst = worst.max(lo - r).max(r - hi);
            count += 1;
            if hi - lo <= CLIP_TOL {
                break;
            }
            cur = clip(&cur, z1, z2);
        }
    }
    SuiteReport::new("clipping_enclosure", count, worst, 1e-12)
}
