use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Terminator, WriterBuilder};

use super::IoError;
use crate::data::DataMatrix;
use crate::linalg::DenseMatrix;

/// Shortest text that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

fn parse_field(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok()
}

fn numeric(rec: &StringRecord) -> bool {
    rec.iter().all(|f| parse_field(f).is_some())
}

/// Reads a comma-separated matrix.
///
/// A first row that does not parse as numbers is taken as column names.
/// When every data row starts with a non-numeric field, that column is
/// taken as row names. Errors carry the 1-based line number.
pub fn read_matrix_from<R: Read>(reader: R) -> Result<DataMatrix, IoError> {
    let mut rdr = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IoError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(IoError::Empty);
    }

    let has_header = !numeric(&records[0].1);
    let header = has_header.then(|| records.remove(0).1);
    if records.is_empty() {
        return Err(IoError::Empty);
    }
    let row_named = records
        .iter()
        .all(|(_, r)| r.get(0).is_some_and(|f| parse_field(f).is_none()));
    let skip = usize::from(row_named);

    let width = records[0].1.len() - skip;
    let mut data = Vec::with_capacity(records.len() * width);
    let mut row_names = Vec::new();
    for (line, rec) in &records {
        if rec.len() - skip != width {
            return Err(IoError::Parse {
                line: *line,
                message: format!("expected {} fields, found {}", width + skip, rec.len()),
            });
        }
        if row_named {
            row_names.push(rec[0].to_string());
        }
        for (k, field) in rec.iter().enumerate().skip(skip) {
            match parse_field(field) {
                Some(v) if v.is_finite() => data.push(v),
                _ => {
                    return Err(IoError::Parse {
                        line: *line,
                        message: format!("field {} is not a finite number: {field:?}", k + 1),
                    })
                }
            }
        }
    }
    let values = DenseMatrix::from_vec(records.len(), width, data).map_err(|e| IoError::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    let col_names = match header {
        Some(h) if h.len() == width || h.len() == width + skip => {
            Some(h.iter().skip(h.len() - width).map(str::to_string).collect())
        }
        Some(h) => {
            return Err(IoError::Parse {
                line: h.position().map_or(1, |p| p.line()),
                message: format!("header has {} names for {width} columns", h.len()),
            })
        }
        None => None,
    };
    Ok(DataMatrix {
        values,
        row_names: row_named.then_some(row_names),
        col_names,
    })
}

pub fn read_matrix(path: &Path) -> Result<DataMatrix, IoError> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    read_matrix_from(file)
}

/// Writes LF-terminated CSV with shortest round-trip floats. Names, when
/// present, become a header row and a leading column.
pub fn write_matrix_to<W: Write>(writer: W, m: &DataMatrix) -> Result<(), IoError> {
    let mut w = WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .flexible(true)
        .from_writer(writer);
    let csv_err = |e: csv::Error| IoError::Parse {
        line: 0,
        message: e.to_string(),
    };
    if let Some(cols) = &m.col_names {
        let mut header: Vec<&str> = Vec::with_capacity(cols.len() + 1);
        if m.row_names.is_some() {
            header.push("");
        }
        header.extend(cols.iter().map(String::as_str));
        w.write_record(&header).map_err(csv_err)?;
    }
    for i in 0..m.values.rows() {
        let mut fields: Vec<String> = Vec::with_capacity(m.values.cols() + 1);
        if let Some(names) = &m.row_names {
            fields.push(names[i].clone());
        }
        fields.extend(m.values.row(i).iter().map(|&v| format_float(v)));
        w.write_record(&fields).map_err(csv_err)?;
    }
    w.flush().map_err(|e| IoError::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    Ok(())
}

pub fn write_matrix(path: &Path, m: &DataMatrix) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_matrix_to(&mut out, m)?;
    out.flush().map_err(|e| IoError::io(path, e))
}
