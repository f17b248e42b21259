//! Matrix Market and headerless CSV reading and writing.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use wedderburn::Matrix;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Matrix Market, array or coordinate, real general.
    Mm,
    /// Headerless comma-separated rows.
    Csv,
}

impl Format {
    /// Format implied by the file extension, if any.
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "mtx" | "mm" => Some(Format::Mm),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        file: None,
        line,
        column,
        message: message.into(),
    }
}

/// Reads a matrix; the extension decides the format, then `fallback`, then
/// Matrix Market if the file starts with a `%%MatrixMarket` banner, else CSV.
pub fn read_matrix(path: &Path, fallback: Option<Format>) -> Result<Matrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let format = Format::from_path(path).or(fallback).unwrap_or_else(|| {
        if text.trim_start().starts_with("%%MatrixMarket") {
            Format::Mm
        } else {
            Format::Csv
        }
    });
    let parsed = match format {
        Format::Mm => parse_matrix_market(&text),
        Format::Csv => parse_csv(&text),
    };
    parsed.map_err(|e| e.in_file(path))
}

pub fn write_matrix(m: &Matrix, path: &Path, format: Format) -> Result<(), CliError> {
    let text = match format {
        Format::Mm => to_matrix_market(m),
        Format::Csv => to_csv(m),
    };
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn number(token: &str, line: usize, column: usize) -> Result<f64, CliError> {
    let v: f64 = token
        .parse()
        .map_err(|_| parse_error(line, column, format!("`{token}` is not a number")))?;
    if !v.is_finite() {
        return Err(parse_error(line, column, format!("`{token}` is not finite")));
    }
    Ok(v)
}

fn index(token: &str, bound: usize, what: &str, line: usize, column: usize) -> Result<usize, CliError> {
    let i: usize = token
        .parse()
        .map_err(|_| parse_error(line, column, format!("`{token}` is not a {what} index")))?;
    if i == 0 || i > bound {
        return Err(parse_error(
            line,
            column,
            format!("{what} index {i} outside 1..={bound}"),
        ));
    }
    Ok(i - 1)
}

/// Splits a line into whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

pub fn parse_matrix_market(text: &str) -> Result<Matrix, CliError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines
        .next()
        .ok_or_else(|| parse_error(1, 1, "empty file, expected a %%MatrixMarket header"))?;
    let head = tokens(banner);
    let words: Vec<String> = head.iter().map(|(_, t)| t.to_ascii_lowercase()).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_error(1, 1, "missing %%MatrixMarket header"));
    }
    if words.len() != 5 || words[1] != "matrix" {
        return Err(parse_error(
            1,
            1,
            "header must read `%%MatrixMarket matrix <array|coordinate> real general`",
        ));
    }
    let coordinate = match words[2].as_str() {
        "array" => false,
        "coordinate" => true,
        other => return Err(parse_error(1, head[2].0, format!("unknown storage `{other}`"))),
    };
    if words[3] != "real" {
        return Err(parse_error(
            1,
            head[3].0,
            format!("only real matrices are supported, header declares `{}`", words[3]),
        ));
    }
    if words[4] != "general" {
        return Err(parse_error(
            1,
            head[4].0,
            format!("only general matrices are supported, header declares `{}`", words[4]),
        ));
    }

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim_start();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body
        .next()
        .ok_or_else(|| parse_error(2, 1, "missing size line"))?;
    let size = tokens(size);
    let want = if coordinate { 3 } else { 2 };
    if size.len() != want {
        return Err(parse_error(
            size_line,
            1,
            format!("size line needs {want} integers, found {}", size.len()),
        ));
    }
    let mut dims = [0usize; 3];
    for (d, (col, tok)) in dims.iter_mut().zip(&size) {
        *d = tok
            .parse()
            .map_err(|_| parse_error(size_line, *col, format!("`{tok}` is not a size")))?;
    }
    let (rows, cols) = (dims[0], dims[1]);

    if !coordinate {
        let mut values = Vec::with_capacity(rows * cols);
        for (line, l) in body {
            for (col, tok) in tokens(l) {
                if values.len() == rows * cols {
                    return Err(parse_error(line, col, format!("more than {} entries", rows * cols)));
                }
                values.push(number(tok, line, col)?);
            }
        }
        if values.len() != rows * cols {
            return Err(parse_error(
                text.lines().count().max(1),
                1,
                format!("expected {} entries, found {}", rows * cols, values.len()),
            ));
        }
        return Ok(Matrix::from_column_major(rows, cols, &values)?);
    }

    let nnz = dims[2];
    let mut data = vec![0.0; rows * cols];
    let mut seen = vec![false; rows * cols];
    let mut count = 0;
    for (line, l) in body {
        let t = tokens(l);
        if t.len() != 3 {
            return Err(parse_error(
                line,
                1,
                format!("coordinate entry needs `row col value`, found {} fields", t.len()),
            ));
        }
        if count == nnz {
            return Err(parse_error(line, 1, format!("more than the declared {nnz} entries")));
        }
        let i = index(t[0].1, rows, "row", line, t[0].0)?;
        let j = index(t[1].1, cols, "column", line, t[1].0)?;
        let v = number(t[2].1, line, t[2].0)?;
        if seen[i * cols + j] {
            return Err(parse_error(
                line,
                1,
                format!("duplicate entry ({}, {})", i + 1, j + 1),
            ));
        }
        seen[i * cols + j] = true;
        data[i * cols + j] = v;
        count += 1;
    }
    if count != nnz {
        return Err(parse_error(
            text.lines().count().max(1),
            1,
            format!("declared {nnz} entries, found {count}"),
        ));
    }
    Ok(Matrix::new(rows, cols, data)?)
}

pub fn parse_csv(text: &str) -> Result<Matrix, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(line, 1, e.to_string())
        })?;
        let line = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        for (j, field) in record.iter().enumerate() {
            row.push(number(field, line, j + 1)?);
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_error(
                    line,
                    row.len().min(first.len()) + 1,
                    format!("row has {} fields, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    Ok(Matrix::from_rows(&rows)?)
}

/// Array format, column-major, 17 significant digits.
pub fn to_matrix_market(m: &Matrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for v in m.to_column_major() {
        let _ = writeln!(out, "{v:.16e}");
    }
    out
}

pub fn to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row_vec(i).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
