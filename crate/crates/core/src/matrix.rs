//! Session x pageview usage matrices: loading, session-length filtering and
//! per-row normalization.
//!
//! Two input formats are understood:
//!
//! * `matrix-csv`: header `session,<label1>,...,<labelk>` followed by rows
//!   `id,v1,...,vk`.
//! * `raw-clickstream`: one session per line, `id: c1,c2,...`, where each
//!   `ci` is a page code from a separately supplied catalog. Entries of the
//!   resulting matrix count how often each page was requested.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{BiclusterError, Result};

/// One page of the site, identified by a 1-based numeric code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    pub code: u32,
    pub label: String,
}

/// Ordered page set. Codes are unique and contiguous from 1; column `j` of a
/// matrix always corresponds to code `j + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageCatalog {
    entries: Vec<Page>,
}

impl PageCatalog {
    /// Builds a catalog coding `labels` as 1, 2, ... in order.
    pub fn from_labels<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let entries = labels
            .into_iter()
            .enumerate()
            .map(|(i, label)| Page {
                code: i as u32 + 1,
                label: label.into(),
            })
            .collect();
        Self::from_entries(entries)
    }

    /// Validates an explicit code/label listing. Entries may arrive in any
    /// order; they are stored sorted by code.
    pub fn from_entries(mut entries: Vec<Page>) -> Result<Self> {
        entries.sort_by_key(|p| p.code);
        let mut labels = HashSet::new();
        for (i, page) in entries.iter().enumerate() {
            if page.code as usize != i + 1 {
                return Err(BiclusterError::InvalidParameter(format!(
                    "page codes must be contiguous from 1, found {} at position {}",
                    page.code,
                    i + 1
                )));
            }
            if page.label.trim().is_empty() {
                return Err(BiclusterError::InvalidParameter(format!(
                    "page {} has an empty label",
                    page.code
                )));
            }
            if !labels.insert(page.label.as_str()) {
                return Err(BiclusterError::InvalidParameter(format!(
                    "duplicate page label `{}`",
                    page.label
                )));
            }
        }
        Ok(Self { entries })
    }

    /// The ten root-page categories of the CTI university site log.
    pub fn cti() -> Self {
        Self::from_labels([
            "Search",
            "Programs",
            "News",
            "Admissions",
            "Advising",
            "Courses",
            "People",
            "Authenticate",
            "CTI",
            "Miscellaneous",
        ])
        .expect("static catalog is valid")
    }

    /// Reads a two-column `code,label` CSV. A leading header line whose first
    /// field is not an integer is skipped.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| BiclusterError::io(path, e))?;
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (code, label) = line
                .split_once(',')
                .ok_or_else(|| BiclusterError::parse(path, lineno, "expected `code,label`"))?;
            let code = match code.trim().parse::<u32>() {
                Ok(c) => c,
                Err(_) if entries.is_empty() && idx == 0 => continue,
                Err(_) => {
                    return Err(BiclusterError::parse(
                        path,
                        lineno,
                        format!("invalid page code `{}`", code.trim()),
                    ))
                }
            };
            entries.push(Page {
                code,
                label: label.trim().to_string(),
            });
        }
        if entries.is_empty() {
            return Err(BiclusterError::EmptyInput(path.display().to_string()));
        }
        Self::from_entries(entries).map_err(|e| BiclusterError::parse(path, 0, e.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Page] {
        &self.entries
    }

    /// Page at column `index`.
    pub fn page(&self, index: usize) -> &Page {
        &self.entries[index]
    }

    /// Column index of a page code, if the code is in the catalog.
    pub fn column_of(&self, code: u32) -> Option<usize> {
        let idx = (code as usize).checked_sub(1)?;
        (idx < self.entries.len()).then_some(idx)
    }
}

/// Input file layouts accepted by [`load_sessions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    RawClickstream,
    MatrixCsv,
}

impl FromStr for InputFormat {
    type Err = BiclusterError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw-clickstream" => Ok(InputFormat::RawClickstream),
            "matrix-csv" => Ok(InputFormat::MatrixCsv),
            other => Err(BiclusterError::InvalidParameter(format!(
                "unknown input format `{other}` (expected raw-clickstream or matrix-csv)"
            ))),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::RawClickstream => "raw-clickstream",
            InputFormat::MatrixCsv => "matrix-csv",
        })
    }
}

/// Dense sessions x pages matrix. Rows are sessions, columns are the pages of
/// `catalog` in code order.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionPageMatrix {
    values: Array2<f64>,
    session_ids: Vec<String>,
    catalog: PageCatalog,
}

impl SessionPageMatrix {
    pub fn new(values: Array2<f64>, session_ids: Vec<String>, catalog: PageCatalog) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows < 2 || cols < 2 {
            return Err(BiclusterError::DegenerateMatrix(format!(
                "{rows}x{cols} matrix, need at least 2x2"
            )));
        }
        if session_ids.len() != rows {
            return Err(BiclusterError::Dimension(format!(
                "{} session ids for {rows} rows",
                session_ids.len()
            )));
        }
        if catalog.len() != cols {
            return Err(BiclusterError::Dimension(format!(
                "catalog has {} pages but matrix has {cols} columns",
                catalog.len()
            )));
        }
        if let Some(((r, c), v)) = values
            .indexed_iter()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(BiclusterError::InvalidParameter(format!(
                "entry ({r}, {c}) = {v} is not a finite non-negative number"
            )));
        }
        Ok(Self {
            values,
            session_ids,
            catalog,
        })
    }

    /// Convenience constructor with generated ids `s1..sn` and labels `p1..pm`.
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        let ids = (1..=rows).map(|i| format!("s{i}")).collect();
        let catalog = PageCatalog::from_labels((1..=cols).map(|j| format!("p{j}")))?;
        Self::new(values, ids, catalog)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn session_ids(&self) -> &[String] {
        &self.session_ids
    }

    pub fn catalog(&self) -> &PageCatalog {
        &self.catalog
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[[row, col]]
    }

    /// Total hits of each session.
    pub fn session_lengths(&self) -> Vec<f64> {
        self.values.sum_axis(Axis(1)).to_vec()
    }

    pub fn is_normalized(&self) -> bool {
        self.values.iter().all(|v| (0.0..=1.0).contains(v))
    }

    /// Writes the matrix in `matrix-csv` layout. Values use the shortest
    /// decimal form that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(false).from_writer(out);
        let mut header = Vec::with_capacity(self.n_cols() + 1);
        header.push("session".to_string());
        header.extend(self.catalog.entries().iter().map(|p| p.label.clone()));
        w.write_record(&header)?;
        for (id, row) in self.session_ids.iter().zip(self.values.rows()) {
            let mut record = Vec::with_capacity(row.len() + 1);
            record.push(id.clone());
            record.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| BiclusterError::Serialization(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| BiclusterError::Serialization(e.to_string()))
    }

    fn select_rows(&self, keep: &[usize]) -> Result<Self> {
        let values = self.values.select(Axis(0), keep);
        let ids = keep.iter().map(|&i| self.session_ids[i].clone()).collect();
        Self::new(values, ids, self.catalog.clone())
    }
}

/// Loads sessions from `path`. `catalog` is required for the raw clickstream
/// format and ignored for `matrix-csv`, whose header carries the page labels.
pub fn load_sessions(
    path: &Path,
    format: InputFormat,
    catalog: Option<&PageCatalog>,
) -> Result<SessionPageMatrix> {
    let text = fs::read_to_string(path).map_err(|e| BiclusterError::io(path, e))?;
    match format {
        InputFormat::MatrixCsv => parse_matrix_csv(path, &text),
        InputFormat::RawClickstream => {
            let catalog = catalog.ok_or_else(|| {
                BiclusterError::InvalidParameter("raw-clickstream input requires a page catalog".into())
            })?;
            parse_clickstream(path, &text, catalog)
        }
    }
}

pub fn parse_matrix_csv(path: &Path, text: &str) -> Result<SessionPageMatrix> {
    if text.trim().is_empty() {
        return Err(BiclusterError::EmptyInput(path.display().to_string()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut header: Option<Vec<String>> = None;
    let mut ids = Vec::new();
    let mut data = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            BiclusterError::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let Some(labels) = &header else {
            if record.len() < 2 {
                return Err(BiclusterError::parse(path, line, "header needs `session` plus page labels"));
            }
            header = Some(record.iter().skip(1).map(|s| s.trim().to_string()).collect());
            continue;
        };
        if record.len() != labels.len() + 1 {
            return Err(BiclusterError::parse(
                path,
                line,
                format!("expected {} fields, found {}", labels.len() + 1, record.len()),
            ));
        }
        ids.push(record[0].trim().to_string());
        for field in record.iter().skip(1) {
            let v: f64 = field.trim().parse().map_err(|_| {
                BiclusterError::parse(path, line, format!("invalid number `{}`", field.trim()))
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(BiclusterError::parse(
                    path,
                    line,
                    format!("value `{}` must be finite and non-negative", field.trim()),
                ));
            }
            data.push(v);
        }
    }
    let labels = header.ok_or_else(|| BiclusterError::EmptyInput(path.display().to_string()))?;
    if ids.is_empty() {
        return Err(BiclusterError::EmptyInput(path.display().to_string()));
    }
    let catalog = PageCatalog::from_labels(labels).map_err(|e| BiclusterError::parse(path, 1, e.to_string()))?;
    let values = Array2::from_shape_vec((ids.len(), catalog.len()), data)
        .map_err(|e| BiclusterError::Dimension(e.to_string()))?;
    SessionPageMatrix::new(values, ids, catalog)
}

pub fn parse_clickstream(path: &Path, text: &str, catalog: &PageCatalog) -> Result<SessionPageMatrix> {
    let mut ids = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (id, codes) = line
            .split_once(':')
            .ok_or_else(|| BiclusterError::parse(path, lineno, "expected `id: code,code,...`"))?;
        let id = id.trim();
        if id.is_empty() {
            return Err(BiclusterError::parse(path, lineno, "empty session id"));
        }
        let mut row = vec![0.0; catalog.len()];
        for code in codes.split(',').map(str::trim).filter(|c| !c.is_empty()) {
            let parsed: u32 = code
                .parse()
                .map_err(|_| BiclusterError::parse(path, lineno, format!("invalid page code `{code}`")))?;
            let col = catalog
                .column_of(parsed)
                .ok_or_else(|| BiclusterError::parse(path, lineno, format!("page code {parsed} not in catalog")))?;
            row[col] += 1.0;
        }
        ids.push(id.to_string());
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(BiclusterError::EmptyInput(path.display().to_string()));
    }
    let n = rows.len();
    let values = Array2::from_shape_vec((n, catalog.len()), rows.into_iter().flatten().collect())
        .map_err(|e| BiclusterError::Dimension(e.to_string()))?;
    SessionPageMatrix::new(values, ids, catalog.clone())
}

/// Keeps the sessions whose total hits lie in `[min_len, max_len]`.
/// Pass `u64::MAX` as `max_len` for no upper bound.
pub fn filter_by_session_length(m: &SessionPageMatrix, min_len: u64, max_len: u64) -> Result<SessionPageMatrix> {
    if min_len < 1 || max_len < min_len {
        return Err(BiclusterError::InvalidParameter(format!(
            "session length bounds [{min_len}, {max_len}] must satisfy 1 <= min <= max"
        )));
    }
    let (lo, hi) = (min_len as f64, max_len as f64);
    let keep: Vec<usize> = m
        .session_lengths()
        .iter()
        .enumerate()
        .filter(|(_, &len)| len >= lo && len <= hi)
        .map(|(i, _)| i)
        .collect();
    if keep.len() < 2 {
        return Err(BiclusterError::DegenerateMatrix(format!(
            "{} session(s) with length in [{min_len}, {max_len}], need at least 2",
            keep.len()
        )));
    }
    m.select_rows(&keep)
}

/// Min-max scales every row to `[0, 1]` independently. Constant rows become
/// all zeros.
pub fn normalize(m: &SessionPageMatrix) -> SessionPageMatrix {
    let mut values = m.values.clone();
    let mut constant = 0usize;
    for mut row in values.rows_mut() {
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = max - min;
        if range > 0.0 {
            row.mapv_inplace(|v| ((v - min) / range).clamp(0.0, 1.0));
        } else {
            constant += 1;
            row.fill(0.0);
        }
    }
    if constant > 0 {
        log::warn!("{constant} constant session row(s) normalized to all zeros");
    }
    SessionPageMatrix {
        values,
        session_ids: m.session_ids.clone(),
        catalog: m.catalog.clone(),
    }
}
