//! Entity-by-year contingency tables and the record-level steps that feed
//! them: exclusion filtering and incidence counting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use crate::record::{normalize_whitespace, BibRecord};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("table has {rows} row labels, {cols} column labels but {cells} cells")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        cells: usize,
    },
    #[error("duplicate {axis} label `{label}`")]
    DuplicateLabel { axis: &'static str, label: String },
    #[error("all counts are zero")]
    EmptyTable,
    #[error("csv: {0}")]
    Csv(String),
}

/// Labelled matrix of nonnegative counts, rows by columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    counts: Vec<u64>,
}

fn check_unique(labels: &[String], axis: &'static str) -> Result<(), TableError> {
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(TableError::DuplicateLabel {
                axis,
                label: l.clone(),
            });
        }
    }
    Ok(())
}

impl ContingencyTable {
    /// Builds a table from row-major counts.
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        counts: Vec<u64>,
    ) -> Result<Self, TableError> {
        if counts.len() != row_labels.len() * col_labels.len() {
            return Err(TableError::ShapeMismatch {
                rows: row_labels.len(),
                cols: col_labels.len(),
                cells: counts.len(),
            });
        }
        check_unique(&row_labels, "row")?;
        check_unique(&col_labels, "column")?;
        Ok(Self {
            row_labels,
            col_labels,
            counts,
        })
    }

    pub fn from_rows(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        rows: &[Vec<u64>],
    ) -> Result<Self, TableError> {
        if rows.len() != row_labels.len() || rows.iter().any(|r| r.len() != col_labels.len()) {
            return Err(TableError::ShapeMismatch {
                rows: row_labels.len(),
                cols: col_labels.len(),
                cells: rows.iter().map(Vec::len).sum(),
            });
        }
        Self::new(row_labels, col_labels, rows.concat())
    }

    pub fn n_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n_cols() + j]
    }

    pub fn row(&self, i: usize) -> &[u64] {
        let j = self.n_cols();
        &self.counts[i * j..(i + 1) * j]
    }

    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.n_rows()).map(|i| self.get(i, j)).collect()
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.row_labels.iter().position(|l| l == label)
    }

    pub fn col_index(&self, label: &str) -> Option<usize> {
        self.col_labels.iter().position(|l| l == label)
    }

    /// Grand total N.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_totals(&self) -> Vec<u64> {
        (0..self.n_rows())
            .map(|i| self.row(i).iter().sum())
            .collect()
    }

    pub fn col_totals(&self) -> Vec<u64> {
        (0..self.n_cols())
            .map(|j| self.col(j).iter().sum())
            .collect()
    }

    /// Relative frequencies f_ij = n_ij / N, row-major.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Row masses f_i.
    pub fn row_masses(&self) -> Vec<f64> {
        let n = self.total() as f64;
        self.row_totals()
            .into_iter()
            .map(|t| t as f64 / n)
            .collect()
    }

    /// Column masses f_j.
    pub fn col_masses(&self) -> Vec<f64> {
        let n = self.total() as f64;
        self.col_totals()
            .into_iter()
            .map(|t| t as f64 / n)
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let counts = (0..self.n_cols())
            .flat_map(|j| (0..self.n_rows()).map(move |i| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        Self {
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            counts,
        }
    }

    /// Every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        Self {
            counts: self.counts.iter().map(|c| c * factor).collect(),
            ..self.clone()
        }
    }

    /// The table without its all-zero rows and columns, plus the labels
    /// removed (rows first).
    pub fn drop_empty(&self) -> (Self, Vec<String>) {
        let (rt, ct) = (self.row_totals(), self.col_totals());
        let rows: Vec<usize> = (0..self.n_rows()).filter(|&i| rt[i] > 0).collect();
        let cols: Vec<usize> = (0..self.n_cols()).filter(|&j| ct[j] > 0).collect();
        let dropped = (0..self.n_rows())
            .filter(|&i| rt[i] == 0)
            .map(|i| self.row_labels[i].clone())
            .chain(
                (0..self.n_cols())
                    .filter(|&j| ct[j] == 0)
                    .map(|j| self.col_labels[j].clone()),
            )
            .collect();
        let table = Self {
            row_labels: rows.iter().map(|&i| self.row_labels[i].clone()).collect(),
            col_labels: cols.iter().map(|&j| self.col_labels[j].clone()).collect(),
            counts: rows
                .iter()
                .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
                .map(|(i, j)| self.get(i, j))
                .collect(),
        };
        (table, dropped)
    }

    /// CSV with a `label` column followed by one column per column label.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once("label")
            .chain(self.col_labels.iter().map(String::as_str))
            .collect();
        w.write_record(&header).expect("in-memory write");
        for (i, label) in self.row_labels.iter().enumerate() {
            let mut rec = vec![label.clone()];
            rec.extend(self.row(i).iter().map(u64::to_string));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    /// Inverse of [`to_csv`](Self::to_csv).
    pub fn from_csv(text: &str) -> Result<Self, TableError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| TableError::Csv(e.to_string()))?
            .clone();
        let col_labels: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let mut row_labels = Vec::new();
        let mut counts = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| TableError::Csv(e.to_string()))?;
            let mut fields = rec.iter();
            row_labels.push(fields.next().unwrap_or_default().to_owned());
            for f in fields {
                let count = f.parse::<u64>().map_err(|_| {
                    TableError::Csv(format!(
                        "row `{}`: bad count `{f}`",
                        row_labels.last().unwrap()
                    ))
                })?;
                counts.push(count);
            }
        }
        Self::new(row_labels, col_labels, counts)
    }

    /// Fixed-width text rendering, columns right-aligned.
    pub fn to_text(&self) -> String {
        let label_w = self.row_labels.iter().map(String::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..self.n_cols())
            .map(|j| {
                let data = self
                    .col(j)
                    .iter()
                    .map(|c| c.to_string().len())
                    .max()
                    .unwrap_or(0);
                data.max(self.col_labels[j].len())
            })
            .collect();
        let mut out = format!("{:label_w$}", "");
        for (j, l) in self.col_labels.iter().enumerate() {
            let _ = write!(out, " {:>w$}", l, w = widths[j]);
        }
        out.push('\n');
        for (i, l) in self.row_labels.iter().enumerate() {
            let _ = write!(out, "{l:label_w$}");
            for (j, c) in self.row(i).iter().enumerate() {
                let _ = write!(out, " {:>w$}", c, w = widths[j]);
            }
            out.push('\n');
        }
        out
    }
}

/// Splits records into those kept and those whose title contains one of
/// the exclusion phrases (case-insensitive, whitespace-collapsed).
pub fn filter_records(
    records: Vec<BibRecord>,
    exclusion_terms: &[String],
) -> (Vec<BibRecord>, Vec<BibRecord>) {
    let phrases: Vec<String> = exclusion_terms
        .iter()
        .map(|t| normalize_whitespace(t).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect();
    records.into_iter().partition(|r| {
        let title = normalize_whitespace(&r.title).to_lowercase();
        !phrases.iter().any(|p| title.contains(p.as_str()))
    })
}

pub const DEFAULT_EXCLUSIONS: &[&str] = &["galaxy cluster"];

/// Incidence counts accumulated over any subset of records. Accumulators
/// over disjoint subsets merge into the accumulator of their union.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableAccumulator {
    row_labels: Vec<String>,
    years: RangeInclusive<u16>,
    row_index: BTreeMap<String, usize>,
    counts: Vec<u64>,
    /// Records without a year, or with a year outside the range.
    pub skipped: usize,
    /// Labels produced by the tagger that are not table rows.
    pub unlisted: usize,
}

impl TableAccumulator {
    pub fn new(row_labels: &[String], years: RangeInclusive<u16>) -> Self {
        let n_years = years.clone().count();
        Self {
            row_index: row_labels
                .iter()
                .enumerate()
                .map(|(i, l)| (l.clone(), i))
                .collect(),
            counts: vec![0; row_labels.len() * n_years],
            row_labels: row_labels.to_vec(),
            years,
            skipped: 0,
            unlisted: 0,
        }
    }

    pub fn add<I>(&mut self, year: Option<u16>, labels: I)
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
    {
        let Some(year) = year.filter(|y| self.years.contains(y)) else {
            self.skipped += 1;
            return;
        };
        let j = usize::from(year - self.years.start());
        let n_years = self.years.clone().count();
        for label in labels {
            match self.row_index.get(label.as_ref()) {
                Some(&i) => self.counts[i * n_years + j] += 1,
                None => self.unlisted += 1,
            }
        }
    }

    pub fn merge(&mut self, other: &TableAccumulator) {
        assert_eq!(
            self.row_labels, other.row_labels,
            "merging different tables"
        );
        assert_eq!(self.years, other.years, "merging different year ranges");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.skipped += other.skipped;
        self.unlisted += other.unlisted;
    }

    pub fn finish(self) -> Result<TableBuild, TableError> {
        if self.counts.iter().all(|&c| c == 0) {
            return Err(TableError::EmptyTable);
        }
        let col_labels = self.years.clone().map(|y| y.to_string()).collect();
        Ok(TableBuild {
            table: ContingencyTable::new(self.row_labels, col_labels, self.counts)?,
            skipped: self.skipped,
            unlisted: self.unlisted,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableBuild {
    pub table: ContingencyTable,
    pub skipped: usize,
    pub unlisted: usize,
}

/// Cross-tabulates records by label and year. A record tagged with k
/// labels contributes k incidences; records outside `years` are counted in
/// [`TableBuild::skipped`].
pub fn build_table<F>(
    records: &[BibRecord],
    tagger: F,
    row_labels: &[String],
    years: RangeInclusive<u16>,
) -> Result<TableBuild, TableError>
where
    F: Fn(&BibRecord) -> BTreeSet<String>,
{
    let mut acc = TableAccumulator::new(row_labels, years);
    for r in records {
        acc.add(r.year, tagger(r));
    }
    acc.finish()
}
