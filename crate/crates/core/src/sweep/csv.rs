//! CSV persistence: `#` comment header, one column-header line, data rows.

use std::fs;
use std::path::Path;

use super::{parse_sweep_config, SweepResult, SweepRow};
use crate::error::{Error, Result};

const SPEC_BEGIN: &str = "spec begin";
const SPEC_END: &str = "spec end";

/// Renders `x` rounded to 12 significant digits, in the shortest exponent
/// form that parses back to the rounded value.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded:e}")
}

fn parse_number(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// Writes a table with `#`-prefixed `comments` in front. Output depends only
/// on the arguments.
pub fn write_table(path: &Path, comments: &[String], columns: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::new();
    for c in comments {
        if c.is_empty() {
            out.push_str("#\n");
        } else {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let record_err = |e: csv::Error| Error::Parse { path: path.to_path_buf(), line: 0, message: e.to_string() };
    w.write_record(columns).map_err(record_err)?;
    for r in rows {
        w.write_record(r).map_err(record_err)?;
    }
    let body = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    out.push_str(std::str::from_utf8(&body).expect("ASCII output"));
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes a sweep result. The header embeds the resolved spec between
/// `spec begin` / `spec end` markers so the file can be regenerated.
pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let mut comments = vec![
        format!("kerr-vdp {} {} sweep", env!("CARGO_PKG_VERSION"), result.spec.model.name()),
        format!(
            "points: {}; failed: {}; truncation flagged: {}",
            result.rows.len(),
            result.n_failed(),
            result.n_flagged()
        ),
        SPEC_BEGIN.to_string(),
    ];
    comments.extend(result.spec.to_toml().lines().map(String::from));
    comments.push(SPEC_END.to_string());
    let mut columns = result.columns.clone();
    columns.push("status".into());
    let rows: Vec<Vec<String>> = result
        .rows
        .iter()
        .map(|r| r.values.iter().map(|&x| format_number(x)).chain(std::iter::once(r.status.clone())).collect())
        .collect();
    write_table(path, &comments, &columns, &rows)
}

/// A parsed output file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    /// Comment lines without the leading `# `.
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of column `name`.
    pub fn numeric(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        self.rows.iter().map(|r| parse_number(&r[k])).collect()
    }

    /// Text between the spec markers of the header, if any.
    pub fn embedded_spec(&self) -> Option<String> {
        let start = self.comments.iter().position(|c| c == SPEC_BEGIN)?;
        let end = self.comments.iter().position(|c| c == SPEC_END)?;
        (start < end).then(|| self.comments[start + 1..end].join("\n"))
    }

    /// Rebuilds a [`SweepResult`] from a file written by [`write_csv`].
    pub fn into_sweep_result(self, path: &Path) -> Result<SweepResult> {
        let parse_err = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
        let text = self.embedded_spec().ok_or_else(|| parse_err(1, "no embedded spec in header".into()))?;
        let spec = parse_sweep_config(&text)?;
        let mut columns = self.columns;
        if columns.pop().as_deref() != Some("status") {
            return Err(parse_err(self.comments.len() + 1, "last column must be `status`".into()));
        }
        if columns != spec.columns() {
            return Err(parse_err(self.comments.len() + 1, "columns do not match the embedded spec".into()));
        }
        let first_row_line = self.comments.len() + 2;
        let rows = self
            .rows
            .into_iter()
            .enumerate()
            .map(|(i, mut r)| {
                let status = r.pop().unwrap_or_default();
                let values = r
                    .iter()
                    .map(|s| parse_number(s).ok_or_else(|| parse_err(first_row_line + i, format!("bad number `{s}`"))))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(SweepRow { values, status })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepResult { spec, columns, rows, wall_time: 0.0 })
    }
}

/// Reads a file written by [`write_csv`] or [`write_table`].
pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut comments = Vec::new();
    let mut body_start = 0;
    for line in text.split_inclusive('\n') {
        match line.strip_prefix('#') {
            Some(rest) => {
                let rest = rest.trim_end_matches(['\n', '\r']);
                comments.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
                body_start += line.len();
            }
            None => break,
        }
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text[body_start..].as_bytes());
    let err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line() as usize) + comments.len();
        Error::Parse { path: path.to_path_buf(), line, message: e.to_string() }
    };
    let columns: Vec<String> = reader.headers().map_err(err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        rows.push(rec.map_err(err)?.iter().map(String::from).collect());
    }
    Ok(CsvTable { comments, columns, rows })
}
