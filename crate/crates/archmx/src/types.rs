//! Shared domain types: the observed return series and the exogenous
//! covariate panel, with the validation every downstream module relies on.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Observed return series. Values are validated to be finite on
/// construction; the estimation pipeline squares them internally, so callers
/// always pass raw returns, never squared returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    values: Vec<f64>,
}

impl ReturnSeries {
    /// Minimum length accepted for any estimation or test.
    pub const MIN_LEN: usize = 10;

    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < Self::MIN_LEN {
            return Err(Error::TooShort {
                n: values.len(),
                min: Self::MIN_LEN,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData);
        }
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn squared(&self) -> Vec<f64> {
        self.values.iter().map(|v| v * v).collect()
    }
}

/// An n x d panel of exogenous covariates with unique column names.
/// Every column must be non-constant: rank windows and kernel weights are
/// undefined for zero-variance covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariatePanel {
    data: Vec<f64>, // row-major
    n: usize,
    d: usize,
    names: Vec<String>,
}

impl CovariatePanel {
    pub fn new(rows: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        let n = rows.len();
        let d = names.len();
        if n == 0 || d == 0 {
            return Err(Error::EmptyInput);
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        let mut data = Vec::with_capacity(n * d);
        for row in &rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteData);
            }
            data.extend_from_slice(row);
        }
        let panel = Self { data, n, d, names };
        for j in 0..d {
            let first = panel.data[j];
            if (0..n).all(|i| panel.data[i * d + j] == first) {
                return Err(Error::DegenerateColumn(panel.names[j].clone()));
            }
        }
        Ok(panel)
    }

    pub fn from_columns(columns: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = columns[0].len();
        for c in &columns {
            if c.len() != n {
                return Err(Error::LengthMismatch {
                    series: n,
                    panel: c.len(),
                });
            }
        }
        let rows = (0..n)
            .map(|i| columns.iter().map(|c| c[i]).collect())
            .collect();
        Self::new(rows, names)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    /// Column by 0-based index.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.d + j]).collect()
    }

    /// New panel with the 0-based column `j` removed.
    pub fn drop_column(&self, j: usize) -> Result<Self> {
        if j >= self.d {
            return Err(Error::IndexOutOfRange {
                index: j + 1,
                d: self.d,
            });
        }
        let names = self
            .names
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, s)| s.clone())
            .collect();
        let rows = (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, v)| *v)
                    .collect()
            })
            .collect();
        Self::new(rows, names)
    }
}

/// Check that a series/panel pair is usable with lag order `p`.
pub fn validate_inputs(series: &ReturnSeries, panel: &CovariatePanel, p: usize) -> Result<()> {
    if series.n() != panel.n() {
        return Err(Error::LengthMismatch {
            series: series.n(),
            panel: panel.n(),
        });
    }
    if p < 1 || 10 * p >= series.n() {
        return Err(Error::InvalidOrder { p, n: series.n() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel(n: usize, d: usize) -> CovariatePanel {
        let rows = (0..n)
            .map(|i| (0..d).map(|j| (i * d + j) as f64).collect())
            .collect();
        let names = (1..=d).map(|j| format!("X{j}")).collect();
        CovariatePanel::new(rows, names).unwrap()
    }

    fn series(n: usize) -> ReturnSeries {
        ReturnSeries::new((0..n).map(|i| (i as f64 * 0.7).sin()).collect()).unwrap()
    }

    #[test]
    fn consistent_shapes_ok() {
        assert!(validate_inputs(&series(500), &panel(500, 5), 1).is_ok());
    }

    #[test]
    fn off_by_one_length() {
        let err = validate_inputs(&series(500), &panel(499, 5), 1).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { series: 500, panel: 499 }));
    }

    #[test]
    fn constant_column_rejected() {
        let rows: Vec<Vec<f64>> = (0..500).map(|i| vec![i as f64, 1.0]).collect();
        let err = CovariatePanel::new(rows, vec!["X1".into(), "X2".into()]).unwrap_err();
        assert!(matches!(err, Error::DegenerateColumn(name) if name == "X2"));
    }

    #[test]
    fn invalid_order_rejected() {
        assert!(matches!(
            validate_inputs(&series(100), &panel(100, 2), 10),
            Err(Error::InvalidOrder { .. })
        ));
        assert!(matches!(
            validate_inputs(&series(100), &panel(100, 2), 0),
            Err(Error::InvalidOrder { .. })
        ));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(
            ReturnSeries::new(vec![0.0; 9].into_iter().chain([f64::NAN]).collect()),
            Err(Error::NonFiniteData)
        ));
    }

    #[test]
    fn duplicate_names_rejected() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, -(i as f64)]).collect();
        assert!(matches!(
            CovariatePanel::new(rows, vec!["X1".into(), "X1".into()]),
            Err(Error::DuplicateName(_))
        ));
    }

    #[test]
    fn drop_column_shifts_names() {
        let p = panel(20, 3);
        let q = p.drop_column(1).unwrap();
        assert_eq!(q.d(), 2);
        assert_eq!(q.names(), &["X1".to_string(), "X3".to_string()]);
        assert_eq!(q.row(0), &[p.row(0)[0], p.row(0)[2]]);
    }
}
