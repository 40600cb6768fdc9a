//! Subcommand implementations. Each returns the process exit status on
//! success; errors are mapped to exit codes by the caller.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use splinemat_core::distance::{solve_quartic_newton, solve_quartic_roots};
use splinemat_core::fixtures::{random_quartic, random_queries};
use splinemat_core::oracle::{DenseSampler, DEFAULT_GRID};
use splinemat_core::reduce::VERIFY_SAMPLES;
use splinemat_core::selftest::{self, FaultInjection};
use splinemat_core::{
    approximate_error_controlled, decompose_to_bezier, ApproxConfig, BSplineCurve, Engine, Point,
    Projector,
};

use crate::io::{self, AnyCurve, ResultRecord, SegmentRecord};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_FAILED: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "splinemat",
    version,
    about = "B-spline decomposition, cubic approximation and point projection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunOpts {
    /// Approximation tolerance
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// Worker threads (default: machine parallelism)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Check every result against a brute-force reference
    #[arg(long)]
    pub verify: bool,
    /// Output file (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunOpts {
    fn engine(&self) -> Engine {
        self.workers
            .map_or_else(Engine::with_default_workers, Engine::new)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert curves to Bézier segments
    Decompose {
        curve: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Approximate curves by cubic segments within the tolerance
    Approximate {
        curve: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Closest curve point for every query point
    Project {
        curve: PathBuf,
        points: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Parameters of points lying on the curve
    Invert {
        curve: PathBuf,
        points: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Time each pipeline stage on seeded random queries; CSV to stdout
    Bench {
        curve: PathBuf,
        /// Query counts, comma separated
        #[arg(long, value_delimiter = ',', default_value = "10000")]
        points: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant suites
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, hide = true)]
        corrupt_inverse: bool,
    },
}

pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Decompose { curve, out } => decompose(&curve, out.as_deref()),
        Command::Approximate { curve, opts } => approximate(&curve, &opts),
        Command::Project {
            curve,
            points,
            opts,
        } => project(&curve, &points, &opts, false),
        Command::Invert {
            curve,
            points,
            opts,
        } => project(&curve, &points, &opts, true),
        Command::Bench {
            curve,
            points,
            repeats,
            tolerance,
            workers,
            seed,
            out,
        } => {
            let engine = workers.map_or_else(Engine::with_default_workers, Engine::new);
            let cfg = BenchConfig {
                points: &points,
                repeats,
                tolerance,
                seed,
            };
            match io::read_curve(&curve)? {
                AnyCurve::D2(c) => bench(&c, &cfg, &engine, out.as_deref()),
                AnyCurve::D3(c) => bench(&c, &cfg, &engine, out.as_deref()),
            }
        }
        Command::Selftest {
            seed,
            corrupt_inverse,
        } => Ok(run_selftest(seed, corrupt_inverse)),
    }
}

fn decompose(path: &Path, out: Option<&Path>) -> Result<u8> {
    let (curves, batch) = io::read_curves(path)?;
    let sets = curves
        .iter()
        .map(|c| {
            Ok(match c {
                AnyCurve::D2(c) => decompose_to_bezier(c)?
                    .iter()
                    .map(SegmentRecord::from_bezier)
                    .collect(),
                AnyCurve::D3(c) => decompose_to_bezier(c)?
                    .iter()
                    .map(SegmentRecord::from_bezier)
                    .collect(),
            })
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    let mut w = io::open_output(out)?;
    io::write_segments(&mut w, &sets, batch)?;
    w.flush()?;
    Ok(EXIT_OK)
}

/// Cubics of one curve and the worst deviation found by dense sampling.
fn approximate_one<const D: usize>(
    c: &BSplineCurve<D>,
    cfg: &ApproxConfig,
    engine: &Engine,
) -> Result<(Vec<SegmentRecord>, f64)> {
    let segs = decompose_to_bezier(c)?;
    let cubics = approximate_error_controlled(&segs, cfg, engine)?;
    let mut worst = 0.0f64;
    for cu in &cubics {
        let seg = &segs[cu.source_segment];
        for k in 0..VERIFY_SAMPLES {
            let u = k as f64 / (VERIFY_SAMPLES - 1) as f64;
            let t = cu.source_interval.to_global(u);
            worst = worst.max(cu.eval(u).distance(&seg.eval_global(t)));
        }
    }
    Ok((
        cubics.iter().map(SegmentRecord::from_cubic).collect(),
        worst,
    ))
}

fn approximate(path: &Path, opts: &RunOpts) -> Result<u8> {
    let (curves, batch) = io::read_curves(path)?;
    let engine = opts.engine();
    let cfg = ApproxConfig::with_alpha(opts.tolerance);
    let mut sets = Vec::with_capacity(curves.len());
    let mut status = EXIT_OK;
    for (i, c) in curves.iter().enumerate() {
        let (set, worst) = match c {
            AnyCurve::D2(c) => approximate_one(c, &cfg, &engine)?,
            AnyCurve::D3(c) => approximate_one(c, &cfg, &engine)?,
        };
        if opts.verify && (worst.is_nan() || worst > opts.tolerance) {
            eprintln!(
                "curve {i}: sampled error {worst:e} exceeds tolerance {:e}",
                opts.tolerance
            );
            status = EXIT_FAILED;
        }
        sets.push(set);
    }
    let mut w = io::open_output(opts.out.as_deref())?;
    io::write_segments(&mut w, &sets, batch)?;
    w.flush()?;
    Ok(status)
}

fn project(curve: &Path, points: &Path, opts: &RunOpts, invert: bool) -> Result<u8> {
    let c = io::read_curve(curve)?;
    let rows = io::read_points(points)?;
    let engine = opts.engine();
    let records = match &c {
        AnyCurve::D2(c) => project_records(
            c,
            &io::points_of_dim::<2>(&rows, points)?,
            opts,
            invert,
            &engine,
        )?,
        AnyCurve::D3(c) => project_records(
            c,
            &io::points_of_dim::<3>(&rows, points)?,
            opts,
            invert,
            &engine,
        )?,
    };
    let mut w = io::open_output(opts.out.as_deref())?;
    io::write_results(&mut w, &records.0)?;
    w.flush()?;
    Ok(if records.1 { EXIT_OK } else { EXIT_FAILED })
}

/// Result records and whether every query succeeded (and verified).
fn project_records<const D: usize>(
    c: &BSplineCurve<D>,
    queries: &[Point<D>],
    opts: &RunOpts,
    invert: bool,
    engine: &Engine,
) -> Result<(Vec<ResultRecord>, bool)> {
    let proj = Projector::new(c, opts.tolerance, engine)?;
    let results = if invert {
        proj.invert_points(queries, engine)
    } else {
        proj.project_points(queries, engine)
    };
    let sampler = opts.verify.then(|| DenseSampler::new(c, DEFAULT_GRID));
    let mut all_ok = true;
    let records = results
        .iter()
        .enumerate()
        .map(|(i, r)| match r {
            Ok(r) => {
                let mut rec = ResultRecord::ok(r);
                if let Some(s) = &sampler {
                    let o = s.project(&queries[i]);
                    let gap = r.distance - o.distance;
                    rec.oracle_distance = Some(o.distance);
                    rec.disagreement = Some(gap);
                    if gap.abs() > opts.tolerance + o.resolution {
                        all_ok = false;
                    }
                }
                rec
            }
            Err(e) => {
                all_ok = false;
                ResultRecord::failed(i, e.to_string())
            }
        })
        .collect();
    Ok((records, all_ok))
}

struct BenchConfig<'a> {
    points: &'a [usize],
    repeats: usize,
    tolerance: f64,
    seed: u64,
}

fn bench<const D: usize>(
    c: &BSplineCurve<D>,
    cfg: &BenchConfig,
    engine: &Engine,
    out: Option<&Path>,
) -> Result<u8> {
    if cfg.points.contains(&0) {
        return Err(anyhow::anyhow!("--points must be at least 1")
            .context(io::InputError("invalid --points".into())));
    }
    let mut w = csv::Writer::from_writer(io::open_output(out)?);
    w.write_record([
        "stage",
        "total_ms",
        "avg_us_per_point",
        "workers",
        "points",
        "repeat",
    ])?;
    let approx_cfg = ApproxConfig::with_alpha(cfg.tolerance);
    for &n in cfg.points {
        let queries: Vec<Point<D>> = bench_queries(cfg.seed, n);
        for rep in 0..cfg.repeats {
            let t0 = Instant::now();
            let segs = decompose_to_bezier(c)?;
            let t1 = Instant::now();
            let cubics = approximate_error_controlled(&segs, &approx_cfg, engine)?;
            let t2 = Instant::now();
            let proj = Projector::from_parts(c, segs, cubics, cfg.tolerance);
            let results = proj.project_points(&queries, engine);
            let t3 = Instant::now();
            let failed = results.iter().filter(|r| r.is_err()).count();
            if failed > 0 {
                eprintln!("{failed} of {n} queries failed");
            }
            for (stage, d) in [
                ("decompose", t1 - t0),
                ("approximate", t2 - t1),
                ("monotonic+project", t3 - t2),
                ("total", t3 - t0),
            ] {
                let ms = d.as_secs_f64() * 1e3;
                w.write_record([
                    stage.to_string(),
                    format!("{ms:.4}"),
                    format!("{:.4}", ms * 1e3 / n as f64),
                    engine.workers().to_string(),
                    n.to_string(),
                    rep.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    let ratio = quartic_speed_ratio(cfg.seed);
    eprintln!("quartic solver: Newton / closed-form time ratio {ratio:.2}");
    Ok(EXIT_OK)
}

/// Query set used by `bench`: uniform in the unit box grown by 0.25.
pub fn bench_queries<const D: usize>(seed: u64, n: usize) -> Vec<Point<D>> {
    random_queries(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.25)
}

/// Time of the Newton baseline over the closed-form solver on seeded quartics.
pub fn quartic_speed_ratio(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let polys: Vec<_> = (0..10_000).map(|_| random_quartic(&mut rng)).collect();
    let time = |f: &dyn Fn(&[f64]) -> usize| {
        let start = Instant::now();
        let mut n = 0;
        for _ in 0..5 {
            for p in &polys {
                n += f(std::hint::black_box(&p.coeffs));
            }
        }
        std::hint::black_box(n);
        start.elapsed().as_secs_f64()
    };
    let closed = time(&|c| solve_quartic_roots(c).len());
    let newton = time(&|c| solve_quartic_newton(c).len());
    newton / closed
}

fn run_selftest(seed: u64, corrupt_inverse: bool) -> u8 {
    let faults = FaultInjection {
        corrupt_bernstein_inverse: corrupt_inverse,
    };
    let reports = selftest::run_all(seed, faults);
    for r in &reports {
        println!(
            "{} {:<24} count={:<7} max_residual={:.3e} limit={:.1e}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.count,
            r.max_residual,
            r.limit
        );
    }
    if reports.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

/// Parse arguments, run, and map the outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if io::is_input_error(&e) {
                EXIT_INPUT
            } else {
                EXIT_FAILED
            }
        }
    }
}
