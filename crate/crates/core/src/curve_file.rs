//! Curve CSV: `n,mean_pr,variance,instances`, one row per point.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use thiserror::Error;

use crate::influence::CurvePoint;
use crate::numfmt::sig10;

pub const CURVE_HEADER: &str = "n,mean_pr,variance,instances";

#[derive(Debug, Error)]
pub enum CurveFileError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn write_curve<W: Write>(points: &[CurvePoint], mut out: W) -> io::Result<()> {
    writeln!(out, "{CURVE_HEADER}")?;
    for p in points {
        writeln!(out, "{},{},{},{}", p.n, sig10(p.mean), sig10(p.variance), p.instances)?;
    }
    out.flush()
}

pub fn save_curve(points: &[CurvePoint], path: &Path) -> io::Result<()> {
    let mut buf = Vec::new();
    write_curve(points, &mut buf)?;
    fs::write(path, buf)
}

fn parse_row(line: &str, lineno: usize) -> Result<CurvePoint, CurveFileError> {
    let bad = |msg: String| CurveFileError::Parse { line: lineno, msg };
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 4 {
        return Err(bad(format!("expected 4 columns, found {}", fields.len())));
    }
    let n: usize = fields[0].parse().map_err(|_| bad(format!("bad n {:?}", fields[0])))?;
    let mean: f64 = fields[1].parse().map_err(|_| bad(format!("bad mean_pr {:?}", fields[1])))?;
    let variance: f64 = fields[2].parse().map_err(|_| bad(format!("bad variance {:?}", fields[2])))?;
    let instances: u64 = fields[3].parse().map_err(|_| bad(format!("bad instances {:?}", fields[3])))?;
    if n == 0 || instances == 0 {
        return Err(bad("n and instances must be positive".into()));
    }
    if !(0.0..=1.0).contains(&mean) || !(variance >= 0.0 && variance.is_finite()) {
        return Err(bad("mean_pr must lie in [0,1] and variance must be non-negative".into()));
    }
    Ok(CurvePoint { n, mean, variance, instances })
}

pub fn read_curve<R: BufRead>(input: R) -> Result<Vec<CurvePoint>, CurveFileError> {
    let mut lines = input.lines();
    match lines.next().transpose()? {
        Some(h) if h.trim() == CURVE_HEADER => {}
        Some(h) => return Err(CurveFileError::Parse { line: 1, msg: format!("unexpected header {h:?}") }),
        None => return Err(CurveFileError::Parse { line: 1, msg: "missing header".into() }),
    }
    let mut points = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        points.push(parse_row(&line, idx + 2)?);
    }
    Ok(points)
}

pub fn load_curve(path: &Path) -> Result<Vec<CurvePoint>, CurveFileError> {
    read_curve(io::BufReader::new(fs::File::open(path)?))
}
