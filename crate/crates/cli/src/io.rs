//! File formats: curves, point sets, segments and projection records.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use splinemat_core::{BSplineCurve, BezierSegment, CubicApproxSegment, Point, ProjectionResult};

/// Marks an error caused by bad input rather than a failed computation.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn is_input_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| c.is::<InputError>()) || e.downcast_ref::<InputError>().is_some()
}

fn input_err() -> InputError {
    InputError("invalid input".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub degree: usize,
    pub knots: Vec<f64>,
    pub control_points: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CurveFile {
    One(CurveRecord),
    Many(Vec<CurveRecord>),
}

/// A validated curve of dimension 2 or 3.
#[derive(Debug, Clone)]
pub enum AnyCurve {
    D2(BSplineCurve<2>),
    D3(BSplineCurve<3>),
}

fn to_points<const D: usize>(rows: &[Vec<f64>]) -> Vec<Point<D>> {
    rows.iter()
        .map(|r| Point(std::array::from_fn(|k| r[k])))
        .collect()
}

impl CurveRecord {
    pub fn to_curve(&self) -> Result<AnyCurve> {
        let dim = self.control_points.first().map_or(0, Vec::len);
        if let Some(i) = self.control_points.iter().position(|p| p.len() != dim) {
            bail!(
                "control point {i} has {} coordinates, expected {dim}",
                self.control_points[i].len()
            );
        }
        Ok(match dim {
            2 => AnyCurve::D2(BSplineCurve::new(
                self.degree,
                self.knots.clone(),
                to_points(&self.control_points),
            )?),
            3 => AnyCurve::D3(BSplineCurve::new(
                self.degree,
                self.knots.clone(),
                to_points(&self.control_points),
            )?),
            d => bail!("unsupported dimension {d}; expected 2 or 3"),
        })
    }

    pub fn from_curve<const D: usize>(c: &BSplineCurve<D>) -> Self {
        Self {
            degree: c.degree(),
            knots: c.knots().as_slice().to_vec(),
            control_points: c.control_points().iter().map(|p| p.0.to_vec()).collect(),
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .context(input_err())
}

/// Curve records in file order; a single object counts as one curve.
pub fn read_curve_records(path: &Path) -> Result<(Vec<CurveRecord>, bool)> {
    let text = read_file(path)?;
    let parsed: CurveFile = serde_json::from_str(&text)
        .with_context(|| format!("{}: malformed curve JSON", path.display()))
        .context(input_err())?;
    Ok(match parsed {
        CurveFile::One(c) => (vec![c], false),
        CurveFile::Many(v) => (v, true),
    })
}

/// Curves in file order, and whether the file held an array.
pub fn read_curves(path: &Path) -> Result<(Vec<AnyCurve>, bool)> {
    let (records, batch) = read_curve_records(path)?;
    let curves = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.to_curve()
                .with_context(|| format!("{}: curve {i}", path.display()))
                .context(input_err())
        })
        .collect::<Result<_>>()?;
    Ok((curves, batch))
}

/// Exactly one curve.
pub fn read_curve(path: &Path) -> Result<AnyCurve> {
    let (mut curves, _) = read_curves(path)?;
    if curves.len() != 1 {
        return Err(anyhow::anyhow!(
            "{}: expected one curve, found {}",
            path.display(),
            curves.len()
        )
        .context(input_err()));
    }
    Ok(curves.remove(0))
}

pub fn write_curves(out: &mut dyn Write, curves: &[CurveRecord], batch: bool) -> Result<()> {
    if batch {
        serde_json::to_writer(&mut *out, curves)?;
    } else {
        serde_json::to_writer(&mut *out, &curves[0])?;
    }
    writeln!(out)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PointsFile {
    points: Vec<Vec<f64>>,
}

/// Point rows from JSON (`{"points": [...]}`) or headerless CSV; a
/// non-numeric first CSV row is skipped as a header.
pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = read_file(path)?;
    let rows = if text.trim_start().starts_with('{') {
        let f: PointsFile = serde_json::from_str(&text)
            .with_context(|| format!("{}: malformed points JSON", path.display()))
            .context(input_err())?;
        f.points
    } else {
        parse_csv_points(text.as_bytes())
            .with_context(|| format!("{}: malformed points CSV", path.display()))
            .context(input_err())?
    };
    Ok(rows)
}

fn parse_csv_points(data: impl Read) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(data);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if i == 0 => continue,
            Err(e) => bail!("line {line}: {e}"),
        }
    }
    Ok(rows)
}

pub fn points_of_dim<const D: usize>(rows: &[Vec<f64>], path: &Path) -> Result<Vec<Point<D>>> {
    if let Some(i) = rows.iter().position(|r| r.len() != D) {
        return Err(anyhow::anyhow!(
            "{}: point {i} has {} coordinates, curve has {D}",
            path.display(),
            rows[i].len()
        )
        .context(input_err()));
    }
    Ok(to_points(rows))
}

pub fn write_points_json(out: &mut dyn Write, rows: &[Vec<f64>]) -> Result<()> {
    serde_json::to_writer(
        &mut *out,
        &PointsFile {
            points: rows.to_vec(),
        },
    )?;
    writeln!(out)?;
    Ok(())
}

pub fn write_points_csv(out: &mut dyn Write, rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub control_points: Vec<Vec<f64>>,
    pub t_a: f64,
    pub t_b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_segment: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured_error: Option<f64>,
}

impl SegmentRecord {
    pub fn from_bezier<const D: usize>(s: &BezierSegment<D>) -> Self {
        Self {
            control_points: s.control_points.iter().map(|p| p.0.to_vec()).collect(),
            t_a: s.source_interval.t_a,
            t_b: s.source_interval.t_b,
            source_segment: None,
            measured_error: None,
        }
    }

    pub fn from_cubic<const D: usize>(s: &CubicApproxSegment<D>) -> Self {
        Self {
            control_points: s.control_points.iter().map(|p| p.0.to_vec()).collect(),
            t_a: s.source_interval.t_a,
            t_b: s.source_interval.t_b,
            source_segment: Some(s.source_segment),
            measured_error: Some(s.measured_error),
        }
    }
}

/// One segment array per curve.
pub fn write_segments(out: &mut dyn Write, sets: &[Vec<SegmentRecord>], batch: bool) -> Result<()> {
    if batch {
        serde_json::to_writer(&mut *out, sets)?;
    } else {
        serde_json::to_writer(&mut *out, &sets[0])?;
    }
    writeln!(out)?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SegmentFile {
    One(Vec<SegmentRecord>),
    Many(Vec<Vec<SegmentRecord>>),
}

pub fn read_segments(path: &Path) -> Result<(Vec<Vec<SegmentRecord>>, bool)> {
    let text = read_file(path)?;
    let parsed: SegmentFile = serde_json::from_str(&text)
        .with_context(|| format!("{}: malformed segment JSON", path.display()))
        .context(input_err())?;
    Ok(match parsed {
        SegmentFile::One(v) => (vec![v], false),
        SegmentFile::Many(v) => (v, true),
    })
}

/// One line of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub query_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub foot: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disagreement: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResultRecord {
    pub fn ok<const D: usize>(r: &ProjectionResult<D>) -> Self {
        Self {
            query_index: r.query_index,
            t_star: Some(r.t_star),
            foot: Some(r.foot.0.to_vec()),
            distance: Some(r.distance),
            oracle_distance: None,
            disagreement: None,
            error: None,
        }
    }

    pub fn failed(query_index: usize, error: String) -> Self {
        Self {
            query_index,
            t_star: None,
            foot: None,
            distance: None,
            oracle_distance: None,
            disagreement: None,
            error: Some(error),
        }
    }
}

pub fn write_results(out: &mut dyn Write, records: &[ResultRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let file = fs::File::open(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .context(input_err())?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .with_context(|| format!("{}: line {}", path.display(), i + 1))
                .context(input_err())?,
        );
    }
    Ok(out)
}

/// `--out` file, or stdout.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(std::io::BufWriter::new(std::io::stdout().lock())),
    })
}
