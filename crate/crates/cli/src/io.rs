//! Point set files.
//!
//! CSV files need a header row. Columns `x1..xd` hold coordinates, an
//! optional `w` column holds masses (default 1) and optional `u1..ud` columns
//! hold unit orientations. JSON files are an array of row objects with the
//! same keys, e.g. `[{"x1": 0.5, "x2": 1.0, "w": 2.0}]`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use kerneldist::reduce::OrientedPointSet;
use kerneldist::WeightedPointSet;

use crate::error::{io_error, CliError, Result};

/// Rows whose orientation norm is within this of 1 are renormalized.
pub const ORIENTATION_TOLERANCE: f64 = 1e-6;

/// A loaded point set, with normals when the file had `u` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSetFile {
    pub points: WeightedPointSet,
    pub normals: Option<Vec<f64>>,
}

impl PointSetFile {
    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn oriented(&self) -> Result<Option<OrientedPointSet>> {
        match &self.normals {
            Some(u) => Ok(Some(OrientedPointSet::new(self.points.clone(), u.clone())?)),
            None => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn of(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    X(usize),
    U(usize),
    W,
}

struct Layout {
    columns: Vec<Column>,
    dim: usize,
    oriented: bool,
}

impl Layout {
    fn from_names<'a>(names: impl Iterator<Item = &'a str>) -> std::result::Result<Self, String> {
        let columns = names
            .map(|raw| {
                let name = raw.trim();
                let index = |rest: &str| {
                    rest.parse::<usize>()
                        .ok()
                        .filter(|&i| i >= 1)
                        .ok_or_else(|| format!("unknown column `{name}`"))
                };
                match name {
                    "w" => Ok(Column::W),
                    _ if name.starts_with('x') => index(&name[1..]).map(|i| Column::X(i - 1)),
                    _ if name.starts_with('u') => index(&name[1..]).map(|i| Column::U(i - 1)),
                    _ => Err(format!("unknown column `{name}`")),
                }
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let count = |f: &dyn Fn(&Column) -> bool| columns.iter().filter(|c| f(c)).count();
        let dim = count(&|c| matches!(c, Column::X(_)));
        let nu = count(&|c| matches!(c, Column::U(_)));
        if dim == 0 {
            return Err("no coordinate columns x1..xd".into());
        }
        if count(&|c| *c == Column::W) > 1 {
            return Err("duplicate column `w`".into());
        }
        for k in 0..dim {
            if count(&|c| *c == Column::X(k)) != 1 {
                return Err(format!("coordinate columns must be x1..x{dim}, each once"));
            }
            if nu > 0 && count(&|c| *c == Column::U(k)) != 1 {
                return Err(format!("orientation columns must be u1..u{dim}, each once"));
            }
        }
        if nu != 0 && nu != dim {
            return Err(format!("orientation columns must be u1..u{dim}, each once"));
        }
        Ok(Layout {
            columns,
            dim,
            oriented: nu > 0,
        })
    }
}

#[derive(Default)]
struct Builder {
    coords: Vec<f64>,
    masses: Vec<f64>,
    normals: Vec<f64>,
}

impl Builder {
    fn push(&mut self, layout: &Layout, values: &[f64]) -> std::result::Result<(), String> {
        if values.len() != layout.columns.len() {
            return Err(format!(
                "expected {} fields, found {}",
                layout.columns.len(),
                values.len()
            ));
        }
        let d = layout.dim;
        let mut x = vec![0.0; d];
        let mut u = vec![0.0; d];
        let mut w = 1.0;
        for (c, &v) in layout.columns.iter().zip(values) {
            if !v.is_finite() {
                return Err(format!("non-finite value {v}"));
            }
            match *c {
                Column::X(k) => x[k] = v,
                Column::U(k) => u[k] = v,
                Column::W => w = v,
            }
        }
        if w <= 0.0 {
            return Err(format!("mass w = {w} must be positive"));
        }
        if layout.oriented {
            let norm = u.iter().map(|a| a * a).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > ORIENTATION_TOLERANCE {
                return Err(format!("orientation has norm {norm}, expected 1"));
            }
            self.normals.extend(u.iter().map(|a| a / norm));
        }
        self.coords.extend(x);
        self.masses.push(w);
        Ok(())
    }

    fn finish(self, layout: &Layout) -> Result<PointSetFile> {
        Ok(PointSetFile {
            points: WeightedPointSet::new(layout.dim, self.coords, self.masses)?,
            normals: layout.oriented.then_some(self.normals),
        })
    }
}

/// Load a point set, choosing the format from the file extension.
pub fn read_point_set(path: &Path) -> Result<PointSetFile> {
    let file = File::open(path).map_err(io_error(path))?;
    match Format::of(path) {
        Format::Csv => read_csv(path, BufReader::new(file)),
        Format::Json => read_json(path, BufReader::new(file)),
    }
}

fn parse_err(path: &Path, line: Option<u64>, msg: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub fn read_csv<R: std::io::Read>(path: &Path, reader: R) -> Result<PointSetFile> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(path, Some(1), e.to_string()))?
        .clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(parse_err(path, Some(1), "missing header row"));
    }
    let layout = Layout::from_names(headers.iter()).map_err(|m| parse_err(path, Some(1), m))?;
    let mut b = Builder::default();
    let mut record = csv::StringRecord::new();
    loop {
        let line = rdr.position().line();
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(line);
                return Err(parse_err(path, Some(line), e.to_string()));
            }
        }
        let line = record.position().map(|p| p.line()).unwrap_or(line);
        let values = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| parse_err(path, Some(line), format!("`{f}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        b.push(&layout, &values)
            .map_err(|m| parse_err(path, Some(line), m))?;
    }
    b.finish(&layout)
}

pub fn read_json<R: std::io::Read>(path: &Path, reader: R) -> Result<PointSetFile> {
    let rows: Vec<BTreeMap<String, f64>> = serde_json::from_reader(reader)
        .map_err(|e| parse_err(path, Some(e.line() as u64), e.to_string()))?;
    let Some(first) = rows.first() else {
        return Err(parse_err(path, None, "no rows; the dimension is unknown"));
    };
    let names: Vec<&str> = first.keys().map(String::as_str).collect();
    let layout = Layout::from_names(names.iter().copied()).map_err(|m| parse_err(path, None, m))?;
    let mut b = Builder::default();
    for (i, row) in rows.iter().enumerate() {
        let values = names
            .iter()
            .map(|k| row.get(*k).copied())
            .collect::<Option<Vec<f64>>>()
            .filter(|_| row.len() == names.len())
            .ok_or_else(|| parse_err(path, None, format!("row {i}: keys differ from row 0")))?;
        b.push(&layout, &values)
            .map_err(|m| parse_err(path, None, format!("row {i}: {m}")))?;
    }
    b.finish(&layout)
}

fn header(d: usize, oriented: bool) -> Vec<String> {
    let mut h: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    h.push("w".into());
    if oriented {
        h.extend((1..=d).map(|k| format!("u{k}")));
    }
    h
}

fn row(set: &PointSetFile, i: usize) -> Vec<f64> {
    let d = set.dim();
    let mut r = set.points.point(i).to_vec();
    r.push(set.points.mass(i));
    if let Some(u) = &set.normals {
        r.extend_from_slice(&u[i * d..(i + 1) * d]);
    }
    r
}

/// Write a point set in the format implied by the extension. Values are
/// written with round-trip precision.
pub fn write_point_set(path: &Path, set: &PointSetFile) -> Result<()> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut out = BufWriter::new(file);
    let names = header(set.dim(), set.normals.is_some());
    match Format::of(path) {
        Format::Csv => {
            writeln!(out, "{}", names.join(",")).map_err(io_error(path))?;
            for i in 0..set.points.len() {
                let fields: Vec<String> = row(set, i).iter().map(f64::to_string).collect();
                writeln!(out, "{}", fields.join(",")).map_err(io_error(path))?;
            }
        }
        Format::Json => {
            let rows: Vec<serde_json::Map<String, serde_json::Value>> = (0..set.points.len())
                .map(|i| {
                    names
                        .iter()
                        .cloned()
                        .zip(row(set, i).into_iter().map(Into::into))
                        .collect()
                })
                .collect();
            serde_json::to_writer_pretty(&mut out, &rows).map_err(|e| io_error(path)(e.into()))?;
            writeln!(out).map_err(io_error(path))?;
        }
    }
    out.flush().map_err(io_error(path))
}

/// Output destination: a file, or standard output when absent.
pub fn write_text(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(io_error(p)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
