//! Correspondence analysis of a contingency table.
//!
//! With f_ij = n_ij / N and masses f_i, f_j, the table's departure from
//! independence is the matrix of standardized residuals
//!
//! ```text
//! s_ij = (f_ij - f_i f_j) / sqrt(f_i f_j)
//! ```
//!
//! whose singular values are sqrt(λ_k). Rows and columns are placed in
//! principal coordinates on both sides,
//!
//! ```text
//! ψ_ik = u_ik sqrt(λ_k) / sqrt(f_i)      φ_jk = v_jk sqrt(λ_k) / sqrt(f_j)
//! ```
//!
//! so that the transition formulas hold exactly:
//!
//! ```text
//! sqrt(λ_k) ψ_ik = Σ_j (f_ij / f_i) φ_jk      sqrt(λ_k) φ_jk = Σ_i (f_ij / f_j) ψ_ik
//! ```
//!
//! The same formulas place supplementary rows and columns.

use std::fmt::Write as _;

use crate::linalg::{svd, Matrix, SvdError};
use crate::tables::ContingencyTable;

/// Axes with a smaller eigenvalue are numerical noise and are dropped.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CaError {
    #[error("{kind} `{label}` has zero mass")]
    ZeroMass { kind: &'static str, label: String },
    #[error("table is {rows}x{cols}; at least 2x2 is required")]
    TooSmall { rows: usize, cols: usize },
    #[error("supplementary profile sums to zero")]
    EmptyProfile,
    #[error("supplementary profile has {got} entries, the fitted table has {expected}")]
    ColumnMismatch { expected: usize, got: usize },
    #[error("supplementary profile has a negative or non-finite entry")]
    InvalidCount,
    #[error(transparent)]
    Svd(#[from] SvdError),
}

/// Fitted correspondence analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct CaResult {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// λ_k, descending, all above [`EIGENVALUE_FLOOR`].
    pub eigenvalues: Vec<f64>,
    /// ψ, one row of K coordinates per table row.
    pub row_coords: Matrix,
    /// φ, one row of K coordinates per table column.
    pub col_coords: Matrix,
    pub row_masses: Vec<f64>,
    pub col_masses: Vec<f64>,
    /// Σ_ij s_ij², equal to χ²/N.
    pub total_inertia: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisInertia {
    /// 1-based.
    pub axis: usize,
    pub eigenvalue: f64,
    pub percentage: f64,
    pub cumulative: f64,
}

impl CaResult {
    /// Number of retained axes K.
    pub fn dims(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn row_coord(&self, label: &str) -> Option<&[f64]> {
        let i = self.row_labels.iter().position(|l| l == label)?;
        Some(self.row_coords.row(i))
    }

    pub fn col_coord(&self, label: &str) -> Option<&[f64]> {
        let j = self.col_labels.iter().position(|l| l == label)?;
        Some(self.col_coords.row(j))
    }

    /// Share of inertia per axis, in percent, with running totals.
    pub fn inertia_report(&self) -> Vec<AxisInertia> {
        let sum: f64 = self.eigenvalues.iter().sum();
        if sum <= 0.0 {
            return Vec::new();
        }
        let mut cumulative = 0.0;
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &eigenvalue)| {
                let percentage = 100.0 * eigenvalue / sum;
                cumulative += percentage;
                AxisInertia {
                    axis: k + 1,
                    eigenvalue,
                    percentage,
                    cumulative,
                }
            })
            .collect()
    }

    /// Places a supplementary row given its counts over the fitted columns:
    /// ψ_k = Σ_j (n_j / n) φ_jk / sqrt(λ_k).
    pub fn project_supplementary_row(&self, counts: &[f64]) -> Result<Vec<f64>, CaError> {
        project(counts, &self.col_coords, &self.eigenvalues)
    }

    /// Places a supplementary column given its counts over the fitted rows.
    pub fn project_supplementary_col(&self, counts: &[f64]) -> Result<Vec<f64>, CaError> {
        project(counts, &self.row_coords, &self.eigenvalues)
    }

    /// CSV `axis,eigenvalue,percentage,cumulative`.
    pub fn inertia_csv(&self) -> String {
        let mut out = String::from("axis,eigenvalue,percentage,cumulative\n");
        for a in self.inertia_report() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                a.axis, a.eigenvalue, a.percentage, a.cumulative
            );
        }
        out
    }
}

fn project(counts: &[f64], dual: &Matrix, eigenvalues: &[f64]) -> Result<Vec<f64>, CaError> {
    if counts.len() != dual.rows() {
        return Err(CaError::ColumnMismatch {
            expected: dual.rows(),
            got: counts.len(),
        });
    }
    if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(CaError::InvalidCount);
    }
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(CaError::EmptyProfile);
    }
    Ok((0..eigenvalues.len())
        .map(|k| {
            let weighted: f64 = counts
                .iter()
                .enumerate()
                .map(|(j, c)| c / total * dual[(j, k)])
                .sum();
            weighted / eigenvalues[k].sqrt()
        })
        .collect())
}

/// Fits correspondence analysis to a table with no empty row or column.
///
/// Each axis is oriented so that its row coordinate of largest magnitude
/// is negative; magnitudes equal to within 1e-9 go to the alphabetically
/// first label.
pub fn ca_fit(table: &ContingencyTable) -> Result<CaResult, CaError> {
    let (n_rows, n_cols) = (table.n_rows(), table.n_cols());
    if n_rows < 2 || n_cols < 2 {
        return Err(CaError::TooSmall {
            rows: n_rows,
            cols: n_cols,
        });
    }
    for (i, t) in table.row_totals().iter().enumerate() {
        if *t == 0 {
            return Err(CaError::ZeroMass {
                kind: "row",
                label: table.row_labels()[i].clone(),
            });
        }
    }
    for (j, t) in table.col_totals().iter().enumerate() {
        if *t == 0 {
            return Err(CaError::ZeroMass {
                kind: "column",
                label: table.col_labels()[j].clone(),
            });
        }
    }

    let freq = table.frequencies();
    let row_masses = table.row_masses();
    let col_masses = table.col_masses();
    let residuals = Matrix::from_fn(n_rows, n_cols, |i, j| {
        let expected = row_masses[i] * col_masses[j];
        (freq[i * n_cols + j] - expected) / expected.sqrt()
    });
    let total_inertia = residuals.frobenius_sq();

    let decomposition = svd(&residuals)?;
    // The trivial axis is already absent from the residuals: it shows up as
    // a zero singular value, dropped with the rest of the noise.
    let max_dims = n_rows.min(n_cols) - 1;
    let kept: Vec<usize> = decomposition
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| *s * *s >= EIGENVALUE_FLOOR)
        .map(|(k, _)| k)
        .take(max_dims)
        .collect();
    let eigenvalues: Vec<f64> = kept
        .iter()
        .map(|&k| decomposition.singular_values[k].powi(2))
        .collect();

    let mut row_coords = Matrix::from_fn(n_rows, kept.len(), |i, a| {
        let k = kept[a];
        decomposition.u[(i, k)] * decomposition.singular_values[k] / row_masses[i].sqrt()
    });
    let mut col_coords = Matrix::from_fn(n_cols, kept.len(), |j, a| {
        let k = kept[a];
        decomposition.v[(j, k)] * decomposition.singular_values[k] / col_masses[j].sqrt()
    });

    for axis in 0..kept.len() {
        let anchor = orientation_anchor(&row_coords, table.row_labels(), axis);
        if row_coords[(anchor, axis)] > 0.0 {
            for i in 0..n_rows {
                row_coords[(i, axis)] = -row_coords[(i, axis)];
            }
            for j in 0..n_cols {
                col_coords[(j, axis)] = -col_coords[(j, axis)];
            }
        }
    }

    Ok(CaResult {
        row_labels: table.row_labels().to_vec(),
        col_labels: table.col_labels().to_vec(),
        eigenvalues,
        row_coords,
        col_coords,
        row_masses,
        col_masses,
        total_inertia,
    })
}

/// Row with the largest |coordinate| on `axis`; near-ties go to the
/// alphabetically first label.
fn orientation_anchor(coords: &Matrix, labels: &[String], axis: usize) -> usize {
    let max = (0..coords.rows())
        .map(|i| coords[(i, axis)].abs())
        .fold(0.0, f64::max);
    (0..coords.rows())
        .filter(|&i| coords[(i, axis)].abs() >= max - 1e-9 * max.max(1.0))
        .min_by(|&a, &b| labels[a].cmp(&labels[b]).then(a.cmp(&b)))
        .expect("at least one row")
}

/// χ² statistic of the independence model, Σ (n_ij − E_ij)² / E_ij.
#[allow(clippy::needless_range_loop)]
pub fn chi_squared(table: &ContingencyTable) -> f64 {
    let n = table.total() as f64;
    let rt = table.row_totals();
    let ct = table.col_totals();
    let mut chi2 = 0.0;
    for i in 0..table.n_rows() {
        for j in 0..table.n_cols() {
            let expected = rt[i] as f64 * ct[j] as f64 / n;
            if expected > 0.0 {
                let d = table.get(i, j) as f64 - expected;
                chi2 += d * d / expected;
            }
        }
    }
    chi2
}
