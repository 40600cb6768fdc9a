use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use splinemat_cli::io::{
    read_results, read_segments, write_curves, write_points_json, CurveRecord,
};
use splinemat_core::fixtures::{on_curve_points, random_curve, random_queries};
use splinemat_core::BSplineCurve;

fn splinemat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splinemat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_curve_file(dir: &Path, name: &str, curves: &[CurveRecord], batch: bool) -> PathBuf {
    let path = dir.join(name);
    let mut buf = Vec::new();
    write_curves(&mut buf, curves, batch).unwrap();
    fs::write(&path, buf).unwrap();
    path
}

fn write_points_file(dir: &Path, name: &str, rows: &[Vec<f64>]) -> PathBuf {
    let path = dir.join(name);
    let mut buf = Vec::new();
    write_points_json(&mut buf, rows).unwrap();
    fs::write(&path, buf).unwrap();
    path
}

fn single_span_cubic() -> CurveRecord {
    CurveRecord {
        degree: 3,
        knots: vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0],
        control_points: vec![
            vec![0.0, 0.0],
            vec![1.0, 2.0],
            vec![2.0, 2.0],
            vec![3.0, 0.0],
        ],
    }
}

fn random_record(seed: u64) -> (BSplineCurve<2>, CurveRecord) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: BSplineCurve<2> = random_curve(&mut rng, 5, 16);
    let r = CurveRecord::from_curve(&c);
    (c, r)
}

#[test]
fn decompose_single_span_cubic() {
    let dir = tempfile::tempdir().unwrap();
    let curve = write_curve_file(dir.path(), "c.json", &[single_span_cubic()], false);
    let out = dir.path().join("segs.json");
    let o = splinemat(&["decompose", s(&curve), "--out", s(&out)]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let (sets, batch) = read_segments(&out).unwrap();
    assert!(!batch);
    assert_eq!(sets.len(), 1);
    assert_eq!(sets[0].len(), 1);
    assert_eq!(
        sets[0][0].control_points,
        single_span_cubic().control_points
    );
    assert_eq!((sets[0][0].t_a, sets[0][0].t_b), (0.0, 1.0));
}

#[test]
fn decompose_batch_keeps_order() {
    let dir = tempfile::tempdir().unwrap();
    let records: Vec<CurveRecord> = (0..4).map(|i| random_record(i).1).collect();
    let curve = write_curve_file(dir.path(), "batch.json", &records, true);
    let out = dir.path().join("segs.json");
    let o = splinemat(&["decompose", s(&curve), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let (sets, batch) = read_segments(&out).unwrap();
    assert!(batch);
    assert_eq!(sets.len(), 4);
    for (set, rec) in sets.iter().zip(&records) {
        assert_eq!(set.len(), rec.control_points.len() - rec.degree);
        assert_eq!(set[0].control_points[0], rec.control_points[0]);
    }
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"degree\": 3,\n \"knots\": [0, 0,, 1]}").unwrap();
    let o = splinemat(&["decompose", s(&path)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2 column"), "{err}");
    assert!(err.contains("bad.json"), "{err}");
}

#[test]
fn invalid_curve_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut rec = single_span_cubic();
    rec.knots[4] = -1.0;
    let curve = write_curve_file(dir.path(), "c.json", &[rec], false);
    let o = splinemat(&["decompose", s(&curve)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(splinemat(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        splinemat(&["project", "only-one-arg"]).status.code(),
        Some(1)
    );
    assert_eq!(splinemat(&["--help"]).status.code(), Some(0));
}

#[test]
fn project_ten_thousand_points_in_order_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (_, rec) = random_record(11);
    let curve = write_curve_file(dir.path(), "c.json", &[rec], false);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let rows: Vec<Vec<f64>> = random_queries::<_, 2>(&mut rng, 10_000, 0.25)
        .iter()
        .map(|p| p.0.to_vec())
        .collect();
    let points = write_points_file(dir.path(), "p.json", &rows);
    let mut outputs = Vec::new();
    for w in ["1", "8"] {
        let out = dir.path().join(format!("r{w}.jsonl"));
        let o = splinemat(&[
            "project",
            s(&curve),
            s(&points),
            "--workers",
            w,
            "--out",
            s(&out),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let records = read_results(&dir.path().join("r1.jsonl")).unwrap();
    assert_eq!(records.len(), 10_000);
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r.query_index, i);
        assert!(r.distance.unwrap() >= 0.0);
        let t = r.t_star.unwrap();
        assert!((0.0..=1.0).contains(&t));
    }
}

#[test]
fn project_verify_appends_oracle_columns() {
    let dir = tempfile::tempdir().unwrap();
    let (_, rec) = random_record(21);
    let curve = write_curve_file(dir.path(), "c.json", &[rec], false);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let rows: Vec<Vec<f64>> = random_queries::<_, 2>(&mut rng, 50, 0.25)
        .iter()
        .map(|p| p.0.to_vec())
        .collect();
    let points = write_points_file(dir.path(), "p.json", &rows);
    let out = dir.path().join("r.jsonl");
    let o = splinemat(&[
        "project",
        s(&curve),
        s(&points),
        "--verify",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    for r in read_results(&out).unwrap() {
        assert!(r.oracle_distance.is_some());
        assert!(r.disagreement.unwrap().abs() <= 1e-3);
    }
}

#[test]
fn invert_on_curve_point() {
    let dir = tempfile::tempdir().unwrap();
    let (c, rec) = random_record(31);
    let curve = write_curve_file(dir.path(), "c.json", &[rec], false);
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let (t, q) = on_curve_points(&mut rng, &c, 1)[0];
    let points = dir.path().join("p.csv");
    fs::write(&points, format!("x,y\n{},{}\n", q[0], q[1])).unwrap();
    let out = dir.path().join("r.jsonl");
    let o = splinemat(&["invert", s(&curve), s(&points), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let r = &read_results(&out).unwrap()[0];
    assert!((r.t_star.unwrap() - t).abs() <= 5e-4);
}

#[test]
fn invert_off_curve_point_fails_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let curve = write_curve_file(dir.path(), "c.json", &[single_span_cubic()], false);
    let points = write_points_file(dir.path(), "p.json", &[vec![0.0, 0.0], vec![5.0, 5.0]]);
    let out = dir.path().join("r.jsonl");
    let o = splinemat(&["invert", s(&curve), s(&points), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    let r = read_results(&out).unwrap();
    assert_eq!(r[0].t_star, Some(0.0));
    assert!(r[1].error.is_some());
}

#[test]
fn dimension_mismatch_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let curve = write_curve_file(dir.path(), "c.json", &[single_span_cubic()], false);
    let points = write_points_file(dir.path(), "p.json", &[vec![0.0, 0.0, 1.0]]);
    let o = splinemat(&["project", s(&curve), s(&points)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn approximate_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (_, rec) = random_record(41);
    let curve = write_curve_file(dir.path(), "c.json", &[rec], false);
    let out = dir.path().join("cubics.json");
    let o = splinemat(&["approximate", s(&curve), "--verify", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let (sets, _) = read_segments(&out).unwrap();
    assert!(sets[0].iter().all(|c| c.control_points.len() == 4));
    assert!(sets[0].iter().all(|c| c.measured_error.unwrap() <= 1e-4));
    assert!(sets[0].windows(2).all(|w| w[0].t_b == w[1].t_a));
}

#[test]
fn bench_rows_and_seeded_queries() {
    let dir = tempfile::tempdir().unwrap();
    let (_, rec) = random_record(51);
    let curve = write_curve_file(dir.path(), "c.json", &[rec], false);
    let o = splinemat(&[
        "bench",
        s(&curve),
        "--points",
        "200",
        "--repeats",
        "3",
        "--workers",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        [
            "stage",
            "total_ms",
            "avg_us_per_point",
            "workers",
            "points",
            "repeat"
        ]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    for stage in ["decompose", "approximate", "monotonic+project"] {
        assert_eq!(rows.iter().filter(|r| &r[0] == stage).count(), 3);
    }
    assert!(String::from_utf8_lossy(&o.stderr).contains("ratio"));
    assert_eq!(
        splinemat(&["bench", s(&curve), "--points", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn selftest_passes_and_catches_corruption() {
    let o = splinemat(&["selftest"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for suite in [
        "partition_of_unity",
        "bernstein_inverse",
        "decomposition_exactness",
        "quartic_oracle",
        "clipping_enclosure",
    ] {
        let line = text.lines().find(|l| l.contains(suite)).unwrap();
        assert!(line.starts_with("PASS"));
        assert!(line.contains("count=") && line.contains("max_residual="));
    }
    let o = splinemat(&["selftest", "--corrupt-inverse"]);
    assert_eq!(o.status.code(), Some(3));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text
        .lines()
        .any(|l| l.starts_with("FAIL") && l.contains("bernstein_inverse")));
}

#[test]
fn bench_queries_are_seeded() {
    use splinemat_cli::commands::bench_queries;
    let a = bench_queries::<3>(9, 100);
    assert_eq!(a, bench_queries::<3>(9, 100));
    assert_ne!(a, bench_queries::<3>(10, 100));
}
