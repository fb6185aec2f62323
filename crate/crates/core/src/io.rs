//! Stream ingestion and export.
//!
//! CSV rows are `y,x1[,x2,…]` with `y ∈ {−1, 1}`. The binary format is an
//! 8-byte header (`HSTR`, then the dimension as a little-endian `u32`)
//! followed by records of one signed label byte and `d` little-endian `f64`
//! coordinates.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;
use std::str::FromStr;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{invalid, HskError, Result};
use crate::types::{Label, LabeledPoint};

pub const STREAM_MAGIC: &[u8; 4] = b"HSTR";

/// On-disk stream encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Bin,
}

impl Format {
    /// `.bin` and `.hstr` are binary; everything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("hstr") => Format::Bin,
            _ => Format::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = HskError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "bin" => Ok(Format::Bin),
            _ => Err(invalid("format", format!("unknown format {s:?}; expected csv or bin"))),
        }
    }
}

/// Validation applied while reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestOptions {
    /// Rows with `‖x‖` above this are rejected.
    pub norm_bound: Option<f64>,
    /// Expected dimension; taken from the first row when `None`.
    pub dim: Option<usize>,
    /// Stop at the first bad row instead of collecting errors.
    pub fail_fast: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            norm_bound: Some(1.0),
            dim: None,
            fail_fast: true,
        }
    }
}

/// A rejected row.
#[derive(Debug)]
pub struct RowError {
    /// 1-based line (CSV) or record (binary) number.
    pub line: usize,
    pub error: HskError,
}

/// Accepted points and, without fail-fast, the rejected rows.
#[derive(Debug, Default)]
pub struct Ingested {
    pub points: Vec<LabeledPoint>,
    pub errors: Vec<RowError>,
}

struct Validator {
    opts: IngestOptions,
    dim: Option<usize>,
    out: Ingested,
}

impl Validator {
    fn new(opts: IngestOptions) -> Self {
        Self {
            opts,
            dim: opts.dim,
            out: Ingested::default(),
        }
    }

    fn check(&mut self, p: &LabeledPoint) -> Result<()> {
        match self.dim {
            Some(d) if d != p.dim() => {
                return Err(HskError::DimensionMismatch {
                    expected: d,
                    actual: p.dim(),
                })
            }
            None => self.dim = Some(p.dim()),
            _ => {}
        }
        if let Some(bound) = self.opts.norm_bound {
            p.check_norm(bound)?;
        }
        Ok(())
    }

    fn row(&mut self, line: usize, parsed: Result<LabeledPoint>) -> Result<()> {
        match parsed.and_then(|p| self.check(&p).map(|_| p)) {
            Ok(p) => self.out.points.push(p),
            Err(e) if self.opts.fail_fast => {
                return Err(HskError::Parse {
                    line,
                    message: e.to_string(),
                })
            }
            Err(error) => self.out.errors.push(RowError { line, error }),
        }
        Ok(())
    }
}

fn parse_fields<'a>(mut fields: impl Iterator<Item = &'a str>) -> Result<LabeledPoint> {
    let label = fields.next().map(str::trim).unwrap_or("");
    let y = match label {
        "1" | "+1" | "1.0" => Label::Pos,
        "-1" | "-1.0" => Label::Neg,
        _ => return Err(HskError::BadLabel),
    };
    let x = fields
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| invalid("x", format!("cannot parse {f:?} as a number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    LabeledPoint::new(x, y)
}

/// Reads CSV rows; blank lines and lines starting with `#` are skipped.
pub fn read_csv<R: Read>(reader: R, opts: IngestOptions) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut v = Validator::new(opts);
    let mut rec = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut rec) {
            Ok(false) => break,
            Ok(true) => {
                let line = rec.position().map_or(0, |p| p.line() as usize);
                if rec.len() == 1 && rec[0].is_empty() {
                    continue;
                }
                v.row(line, parse_fields(rec.iter()))?;
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                v.row(line, Err(HskError::Format(e.to_string())))?;
            }
        }
    }
    Ok(v.out)
}

/// Reads the binary format.
pub fn read_bin<R: Read>(reader: R, opts: IngestOptions) -> Result<Ingested> {
    let mut r = BufReader::new(reader);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| HskError::Format("stream shorter than its header".into()))?;
    if &magic != STREAM_MAGIC {
        return Err(HskError::Format("bad stream magic; expected HSTR".into()));
    }
    let d = r.read_u32::<LittleEndian>()? as usize;
    if d == 0 {
        return Err(HskError::Format("stream dimension must be at least 1".into()));
    }
    let mut v = Validator::new(IngestOptions {
        dim: Some(opts.dim.unwrap_or(d)),
        ..opts
    });
    for line in 1.. {
        let label = match r.read_i8() {
            Ok(b) => b,
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        };
        let mut x = vec![0.0; d];
        r.read_f64_into::<LittleEndian>(&mut x).map_err(|_| HskError::Parse {
            line,
            message: "truncated record".into(),
        })?;
        let parsed = Label::from_i64(label as i64).and_then(|y| LabeledPoint::new(x, y));
        v.row(line, parsed)?;
    }
    Ok(v.out)
}

pub fn read_points<R: Read>(reader: R, format: Format, opts: IngestOptions) -> Result<Ingested> {
    match format {
        Format::Csv => read_csv(reader, opts),
        Format::Bin => read_bin(reader, opts),
    }
}

/// Reads a file, or stdin for `-`.
pub fn read_path(path: &Path, format: Option<Format>, opts: IngestOptions) -> Result<Ingested> {
    let format = format.unwrap_or_else(|| Format::from_path(path));
    if path.as_os_str() == "-" {
        return read_points(std::io::stdin().lock(), format, opts);
    }
    read_points(File::open(path)?, format, opts)
}

fn label_str(y: Label) -> &'static str {
    match y {
        Label::Pos => "1",
        Label::Neg => "-1",
    }
}

/// Writes CSV with shortest round-tripping number formatting.
pub fn write_csv<W: Write>(writer: W, points: &[LabeledPoint]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for p in points {
        let mut row = Vec::with_capacity(p.dim() + 1);
        row.push(label_str(p.y).to_string());
        row.extend(p.x.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(|e| HskError::Format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bin<W: Write>(writer: W, points: &[LabeledPoint]) -> Result<()> {
    let d = points.first().map_or(1, LabeledPoint::dim);
    if points.iter().any(|p| p.dim() != d) {
        return Err(invalid("points", "all points must share one dimension"));
    }
    let mut w = BufWriter::new(writer);
    w.write_all(STREAM_MAGIC)?;
    w.write_u32::<LittleEndian>(d as u32)?;
    for p in points {
        w.write_i8(p.y.sign() as i8)?;
        for &v in &p.x {
            w.write_f64::<LittleEndian>(v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_points<W: Write>(writer: W, format: Format, points: &[LabeledPoint]) -> Result<()> {
    match format {
        Format::Csv => write_csv(writer, points),
        Format::Bin => write_bin(writer, points),
    }
}

/// Writes a file, or stdout for `-`.
pub fn write_path(path: &Path, format: Option<Format>, points: &[LabeledPoint]) -> Result<()> {
    let format = format.unwrap_or_else(|| Format::from_path(path));
    if path.as_os_str() == "-" {
        return write_points(std::io::stdout().lock(), format, points);
    }
    write_points(File::create(path)?, format, points)
}
