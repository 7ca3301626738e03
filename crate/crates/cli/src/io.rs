//! CSV layouts for curves.
//!
//! * wide: one curve per row, one column per grid point, univariate only;
//! * long: header `curve_id,t_index,dim_1,..,dim_d`, one row per curve and
//!   grid point. Rows may come in any order but must cover the full
//!   curve × grid lattice exactly once.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use fmuod_core::{FunctionalDataset, Grid, MultivariateFunctionalDataset};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Layout {
    Wide,
    Long,
}

/// Parsed curves with the identifiers used in output files.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub data: MultivariateFunctionalDataset,
    pub curve_ids: Vec<String>,
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> CliError {
    CliError::Parse { path: path.to_path_buf(), line, message: message.into() }
}

fn reader(path: &Path, delimiter: u8, has_headers: bool) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(has_headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn records(path: &Path, rdr: &mut csv::Reader<File>) -> CliResult<Vec<(u64, csv::StringRecord)>> {
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, rec));
    }
    Ok(out)
}

fn number(path: &Path, line: u64, cell: &str) -> CliResult<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(path, line, format!("'{cell}' is not a finite number"))),
    }
}

/// Reads one curve per row. With `has_header` the first row is skipped.
pub fn read_wide(path: &Path, delimiter: u8, has_header: bool) -> CliResult<LoadedData> {
    let mut rdr = reader(path, delimiter, has_header)?;
    let rows = records(path, &mut rdr)?;
    let Some((_, first)) = rows.first() else {
        return Err(parse_err(path, 1, "no curves found"));
    };
    let k = first.len();
    let mut values = Vec::with_capacity(rows.len() * k);
    for (line, rec) in &rows {
        if rec.len() != k {
            return Err(parse_err(path, *line, format!("expected {k} values, found {}", rec.len())));
        }
        for cell in rec {
            values.push(number(path, *line, cell)?);
        }
    }
    let grid = Grid::unit(k).map_err(|e| parse_err(path, rows[0].0, e.to_string()))?;
    let data = FunctionalDataset::from_flat(values, rows.len(), grid)?;
    Ok(LoadedData {
        data: MultivariateFunctionalDataset::from_margins(&[data])?,
        curve_ids: (0..rows.len()).map(|i| i.to_string()).collect(),
    })
}

/// Reads the long layout.
pub fn read_long(path: &Path, delimiter: u8) -> CliResult<LoadedData> {
    let mut rdr = reader(path, delimiter, true)?;
    let header = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    if header.len() < 3 || &header[0] != "curve_id" || &header[1] != "t_index" {
        return Err(parse_err(path, 1, "header must be curve_id,t_index,dim_1[,dim_2,..]"));
    }
    let d = header.len() - 2;
    let dim_names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let rows = records(path, &mut rdr)?;
    if rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }

    let mut curve_ids: Vec<String> = Vec::new();
    let mut curve_pos: HashMap<String, usize> = HashMap::new();
    let mut t_values: Vec<i64> = Vec::new();
    let mut parsed = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        if rec.len() != d + 2 {
            return Err(parse_err(path, *line, format!("expected {} fields, found {}", d + 2, rec.len())));
        }
        let id = rec[0].to_string();
        let c = *curve_pos.entry(id.clone()).or_insert_with(|| {
            curve_ids.push(id);
            curve_ids.len() - 1
        });
        let t: i64 = rec[1]
            .parse()
            .map_err(|_| parse_err(path, *line, format!("t_index '{}' is not an integer", &rec[1])))?;
        t_values.push(t);
        let vals = (0..d).map(|m| number(path, *line, &rec[m + 2])).collect::<CliResult<Vec<f64>>>()?;
        parsed.push((*line, c, t, vals));
    }
    t_values.sort_unstable();
    t_values.dedup();
    let (n, k) = (curve_ids.len(), t_values.len());
    let t_pos: HashMap<i64, usize> = t_values.iter().enumerate().map(|(j, &t)| (t, j)).collect();

    let mut values = vec![0.0; n * k * d];
    let mut seen: Vec<Option<u64>> = vec![None; n * k];
    for (line, c, t, vals) in parsed {
        let j = t_pos[&t];
        if let Some(prev) = seen[c * k + j] {
            return Err(parse_err(
                path,
                line,
                format!("duplicate entry for curve '{}' at t_index {t} (first on line {prev})", curve_ids[c]),
            ));
        }
        seen[c * k + j] = Some(line);
        values[(c * k + j) * d..(c * k + j + 1) * d].copy_from_slice(&vals);
    }
    if let Some(missing) = seen.iter().position(Option::is_none) {
        let (c, j) = (missing / k, missing % k);
        let line = seen[c * k..(c + 1) * k].iter().flatten().min().copied().unwrap_or(1);
        return Err(parse_err(
            path,
            line,
            format!("incomplete lattice: curve '{}' has no row for t_index {}", curve_ids[c], t_values[j]),
        ));
    }
    let grid = Grid::unit(k).map_err(|e| parse_err(path, rows[0].0, e.to_string()))?;
    let data = MultivariateFunctionalDataset::from_flat(values, n, d, grid)?.with_dim_names(dim_names)?;
    Ok(LoadedData { data, curve_ids })
}

pub fn read(path: &Path, layout: Layout, delimiter: u8, has_header: bool) -> CliResult<LoadedData> {
    match layout {
        Layout::Wide => read_wide(path, delimiter, has_header),
        Layout::Long => read_long(path, delimiter),
    }
}

/// CSV writer on `path` that reports failures against that path.
pub struct CsvOut {
    path: PathBuf,
    inner: csv::Writer<File>,
}

impl CsvOut {
    pub fn create(path: &Path) -> CliResult<Self> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self { path: path.to_path_buf(), inner: csv::Writer::from_writer(file) })
    }

    pub fn row<I, T>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.inner.write_record(fields).map_err(|e| self.fail(e))
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.inner.flush().map_err(|e| CliError::io(&self.path, e))
    }

    fn fail(&self, e: csv::Error) -> CliError {
        CliError::io(&self.path, std::io::Error::other(e.to_string()))
    }
}

/// Shortest round-trip decimal form.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Writes a dataset in the long layout.
pub fn write_long(path: &Path, data: &MultivariateFunctionalDataset, curve_ids: &[String]) -> CliResult<()> {
    let mut out = CsvOut::create(path)?;
    let dims: Vec<String> = match data.dim_names() {
        Some(names) => names.to_vec(),
        None => (1..=data.d()).map(|m| format!("dim_{m}")).collect(),
    };
    out.row(["curve_id".to_string(), "t_index".to_string()].into_iter().chain(dims))?;
    for (i, id) in curve_ids.iter().enumerate() {
        for j in 0..data.k() {
            let mut rec = vec![id.clone(), j.to_string()];
            rec.extend(data.point(i, j).iter().map(|&v| fmt_f64(v)));
            out.row(rec)?;
        }
    }
    out.finish()
}

/// Writes pretty JSON followed by a newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::io(path, std::io::Error::other(e.to_string())))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut f = File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn line_of(err: CliError) -> u64 {
        match err {
            CliError::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wide_reads_rows_as_curves() {
        let f = file("1,2,3\n4,5,6\n");
        let got = read_wide(f.path(), b',', false).unwrap();
        assert_eq!(got.data.n(), 2);
        assert_eq!(got.data.d(), 1);
        assert_eq!(got.data.margin(0).row(1), &[4.0, 5.0, 6.0]);
        let with_header = file("t0,t1,t2\n1,2,3\n");
        assert_eq!(read_wide(with_header.path(), b',', true).unwrap().data.n(), 1);
    }

    #[test]
    fn wide_errors_carry_line_numbers() {
        assert_eq!(line_of(read_wide(file("1,2,3\n4,5\n").path(), b',', false).unwrap_err()), 2);
        assert_eq!(line_of(read_wide(file("1,2\n3,x\n").path(), b',', false).unwrap_err()), 2);
        assert!(matches!(read_wide(file("").path(), b',', false), Err(CliError::Parse { .. })));
    }

    #[test]
    fn long_accepts_any_row_order() {
        let f = file("curve_id,t_index,dim_1,dim_2\nb,1,4,40\na,0,1,10\na,1,2,20\nb,0,3,30\n");
        let got = read_long(f.path(), b',').unwrap();
        assert_eq!(got.curve_ids, vec!["b", "a"]);
        assert_eq!(got.data.point(0, 0), &[3.0, 30.0]);
        assert_eq!(got.data.point(1, 1), &[2.0, 20.0]);
    }

    #[test]
    fn long_rejects_holes_and_duplicates() {
        let hole = file("curve_id,t_index,dim_1\na,0,1\na,1,2\nb,0,3\n");
        assert_eq!(line_of(read_long(hole.path(), b',').unwrap_err()), 4);
        let dup = file("curve_id,t_index,dim_1\na,0,1\na,0,2\n");
        assert_eq!(line_of(read_long(dup.path(), b',').unwrap_err()), 3);
        let header = file("id,t,x\n1,0,1\n");
        assert_eq!(line_of(read_long(header.path(), b',').unwrap_err()), 1);
        let ragged = file("curve_id,t_index,dim_1\na,0,1,5\n");
        assert_eq!(line_of(read_long(ragged.path(), b',').unwrap_err()), 2);
    }

    #[test]
    fn long_round_trip_is_exact() {
        let values: Vec<f64> = (0..2 * 3 * 2).map(|i| (i as f64 * 0.1).sin() / 3.0).collect();
        let data = MultivariateFunctionalDataset::from_flat(values, 2, 2, Grid::unit(3).unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_long(&p, &data, &["0".into(), "1".into()]).unwrap();
        let back = read_long(&p, b',').unwrap();
        assert_eq!(back.data.values(), data.values());
    }
}
