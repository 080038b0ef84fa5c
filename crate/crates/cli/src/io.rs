//! CSV reading and writing.
//!
//! Reals are written as `{:.16e}` (17 significant digits), which round-trips
//! every `f64` and makes outputs byte-identical across runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use eotmaps::{DataMatrix, DistanceKind};
use nalgebra::DMatrix;

use crate::error::{CliError, Result};

/// How input matrices are laid out.
#[derive(Debug, Clone, Copy)]
pub struct CsvFormat {
    pub delimiter: u8,
    pub header: bool,
}

impl Default for CsvFormat {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header: false,
        }
    }
}

fn reader(path: &Path, format: CsvFormat) -> Result<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(format.header)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|source| CliError::Csv {
            path: path.to_owned(),
            source,
        })
}

fn records(path: &Path, format: CsvFormat) -> Result<Vec<csv::StringRecord>> {
    reader(path, format)?
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|source| CliError::Csv {
            path: path.to_owned(),
            source,
        })
}

fn bad(path: &Path, line: usize, what: String) -> CliError {
    CliError::Input(format!("{}: line {}: {what}", path.display(), line + 1))
}

fn parse_real(path: &Path, line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| bad(path, line, format!("'{field}' is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(path, line, format!("'{field}' is not finite")))
    }
}

fn parse_index(path: &Path, line: usize, field: &str) -> Result<usize> {
    field.parse().map_err(|_| {
        bad(
            path,
            line,
            format!("'{field}' is not a non-negative integer"),
        )
    })
}

/// A rectangular matrix of finite reals.
pub fn read_matrix(path: &Path, format: CsvFormat) -> Result<DMatrix<f64>> {
    let rows = records(path, format)?;
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    let cols = rows[0].len();
    let mut values = Vec::with_capacity(rows.len() * cols);
    for (line, record) in rows.iter().enumerate() {
        for field in record {
            values.push(parse_real(path, line, field)?);
        }
    }
    Ok(DMatrix::from_row_slice(rows.len(), cols, &values))
}

pub fn read_data(path: &Path, format: CsvFormat) -> Result<DataMatrix> {
    Ok(DataMatrix::new(read_matrix(path, format)?)?)
}

/// One non-negative integer label per row.
pub fn read_labels(path: &Path, format: CsvFormat) -> Result<Vec<usize>> {
    let rows = records(path, format)?;
    rows.iter()
        .enumerate()
        .map(|(line, r)| {
            if r.len() != 1 {
                return Err(bad(
                    path,
                    line,
                    format!("expected one label, found {} fields", r.len()),
                ));
            }
            parse_index(path, line, &r[0])
        })
        .collect()
}

/// An embedding file as written by `embed`: a header line, then dataset id,
/// point index and coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub dataset: Vec<usize>,
    pub index: Vec<usize>,
    pub coords: DMatrix<f64>,
}

pub fn read_embedding(path: &Path) -> Result<EmbeddingFile> {
    let rows = records(
        path,
        CsvFormat {
            header: true,
            ..CsvFormat::default()
        },
    )?;
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    let width = rows[0].len();
    if width < 3 {
        return Err(bad(
            path,
            0,
            "expected dataset, index and at least one coordinate".into(),
        ));
    }
    let mut dataset = Vec::with_capacity(rows.len());
    let mut index = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len() * (width - 2));
    for (line, r) in rows.iter().enumerate() {
        let d = parse_index(path, line, &r[0])?;
        if d > 1 {
            return Err(bad(
                path,
                line,
                format!("dataset id must be 0 or 1, got {d}"),
            ));
        }
        dataset.push(d);
        index.push(parse_index(path, line, &r[1])?);
        for field in r.iter().skip(2) {
            values.push(parse_real(path, line, field)?);
        }
    }
    Ok(EmbeddingFile {
        dataset,
        index,
        coords: DMatrix::from_row_slice(rows.len(), width - 2, &values),
    })
}

/// `(kind, i, j)` requests for diffusion distances.
pub fn read_pairs(path: &Path, format: CsvFormat) -> Result<Vec<(DistanceKind, usize, usize)>> {
    let rows = records(path, format)?;
    rows.iter()
        .enumerate()
        .map(|(line, r)| {
            if r.len() != 3 {
                return Err(bad(
                    path,
                    line,
                    format!("expected kind,i,j, found {} fields", r.len()),
                ));
            }
            let kind = r[0]
                .parse()
                .map_err(|e: eotmaps::Error| bad(path, line, e.to_string()))?;
            Ok((
                kind,
                parse_index(path, line, &r[1])?,
                parse_index(path, line, &r[2])?,
            ))
        })
        .collect()
}

/// Buffered output file that reports its path on failure.
pub struct Output {
    path: PathBuf,
    inner: BufWriter<File>,
}

impl Output {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(Self {
            path: path.to_owned(),
            inner: BufWriter::new(file),
        })
    }

    pub fn line(&mut self, fields: &[String]) -> Result<()> {
        writeln!(self.inner, "{}", fields.join(",")).map_err(|source| CliError::Io {
            path: self.path.clone(),
            source,
        })
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|source| CliError::Io {
            path: self.path,
            source,
        })
    }
}

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut out = Output::create(path)?;
    for row in m.row_iter() {
        out.line(&row.iter().map(|v| real(*v)).collect::<Vec<_>>())?;
    }
    out.finish()
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = Output::create(path)?;
    for l in labels {
        out.line(&[l.to_string()])?;
    }
    out.finish()
}

/// `k,s_k` with a header line, `k` starting at 1.
pub fn write_spectrum(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = Output::create(path)?;
    out.line(&["k".into(), "s_k".into()])?;
    for (k, s) in values.iter().enumerate() {
        out.line(&[(k + 1).to_string(), real(*s)])?;
    }
    out.finish()
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [
            0.1,
            -1.0 / 3.0,
            1e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            5e-324,
        ] {
            assert_eq!(real(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(real(1.0), "1.0000000000000000e0");
    }
}
