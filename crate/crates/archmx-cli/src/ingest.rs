//! CSV ingestion: header-based column lookup, optional log-return
//! transform of price columns, missing-row dropping, and date alignment.

use std::collections::HashSet;
use std::path::Path;

use archmx::CovariatePanel;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("failed to read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("non-numeric cell at row {row}, column '{col}': '{value}'")]
    NonNumericCell {
        row: usize,
        col: String,
        value: String,
    },
    #[error("non-positive price {value} at row {row}, column '{col}' (log return undefined)")]
    NonPositivePrice {
        row: usize,
        col: String,
        value: f64,
    },
    #[error("date column not strictly increasing at row {0}")]
    DatesNotIncreasing(usize),
    #[error("{0}")]
    Model(#[from] archmx::Error),
    #[error("empty table after dropping incomplete rows")]
    Empty,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// Column holding dates; checked strictly increasing if present.
    pub date_column: Option<String>,
    /// Price columns to transform into log returns.
    pub log_return_columns: Vec<String>,
}

/// One parsed CSV table: named numeric columns plus optional dates.
#[derive(Debug, Clone)]
pub struct Table {
    pub dates: Option<Vec<String>>,
    pub names: Vec<String>,
    /// column-major values, aligned with `names`
    pub columns: Vec<Vec<f64>>,
    pub dropped_rows: usize,
    /// true if any column was log-return transformed (length shrank by 1)
    pub transformed: bool,
}

impl Table {
    pub fn n(&self) -> usize {
        self.columns.first().map(|c| c.len()).unwrap_or(0)
    }

    pub fn column(&self, name: &str) -> Result<&[f64], IngestError> {
        let i = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))?;
        Ok(&self.columns[i])
    }

    pub fn to_panel(&self) -> Result<CovariatePanel, IngestError> {
        Ok(CovariatePanel::from_columns(
            self.columns.clone(),
            self.names.clone(),
        )?)
    }
}

pub fn log_returns(prices: &[f64], col: &str) -> Result<Vec<f64>, IngestError> {
    let mut out = Vec::with_capacity(prices.len().saturating_sub(1));
    for (row, w) in prices.windows(2).enumerate() {
        for (k, &p) in w.iter().enumerate() {
            if p <= 0.0 {
                return Err(IngestError::NonPositivePrice {
                    row: row + k,
                    col: col.to_string(),
                    value: p,
                });
            }
        }
        out.push(w[1].ln() - w[0].ln());
    }
    Ok(out)
}

/// Read one CSV file. All non-date columns are parsed as numbers; rows with
/// an empty cell in any used column are dropped (counted); declared price
/// columns become log returns, shrinking every column by one row to keep
/// alignment.
pub fn ingest_csv(path: &Path, opts: &IngestOptions) -> Result<Table, IngestError> {
    if !path.exists() {
        return Err(IngestError::FileNotFound(path.display().to_string()));
    }
    let mut rdr = csv::Reader::from_path(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| IngestError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let date_idx = match &opts.date_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| IngestError::MissingColumn(name.clone()))?,
        ),
        None => None,
    };
    for wanted in &opts.log_return_columns {
        if !headers.iter().any(|h| h == wanted) {
            return Err(IngestError::MissingColumn(wanted.clone()));
        }
    }

    let value_idx: Vec<usize> = (0..headers.len()).filter(|i| Some(*i) != date_idx).collect();
    let mut dates: Vec<String> = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); value_idx.len()];
    let mut dropped = 0usize;

    for (row_no, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| IngestError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        if value_idx
            .iter()
            .any(|&i| rec.get(i).map(|s| s.trim().is_empty()).unwrap_or(true))
        {
            dropped += 1;
            continue;
        }
        let mut parsed = Vec::with_capacity(value_idx.len());
        let mut bad: Option<IngestError> = None;
        for (k, &i) in value_idx.iter().enumerate() {
            let cell = rec.get(i).unwrap().trim();
            match cell.parse::<f64>() {
                Ok(v) => parsed.push(v),
                Err(_) => {
                    bad = Some(IngestError::NonNumericCell {
                        row: row_no,
                        col: headers[value_idx[k]].clone(),
                        value: cell.to_string(),
                    });
                    break;
                }
            }
        }
        if let Some(e) = bad {
            return Err(e);
        }
        for (col, v) in columns.iter_mut().zip(parsed) {
            col.push(v);
        }
        if let Some(di) = date_idx {
            dates.push(rec.get(di).unwrap().trim().to_string());
        }
    }
    if columns.first().map(|c| c.is_empty()).unwrap_or(true) {
        return Err(IngestError::Empty);
    }
    if date_idx.is_some() {
        for i in 1..dates.len() {
            if dates[i] <= dates[i - 1] {
                return Err(IngestError::DatesNotIncreasing(i));
            }
        }
    }

    let names: Vec<String> = value_idx.iter().map(|&i| headers[i].clone()).collect();
    let to_transform: HashSet<&String> = opts.log_return_columns.iter().collect();
    let transformed = !to_transform.is_empty();
    if transformed {
        for (name, col) in names.iter().zip(columns.iter_mut()) {
            if to_transform.contains(name) {
                *col = log_returns(col, name)?;
            } else {
                col.remove(0); // keep alignment with the shrunken returns
            }
        }
        if date_idx.is_some() {
            dates.remove(0);
        }
    }
    Ok(Table {
        dates: date_idx.map(|_| dates),
        names,
        columns,
        dropped_rows: dropped,
        transformed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn log_return_arithmetic() {
        let r = log_returns(&[100.0, 110.0], "p").unwrap();
        assert!((r[0] - 0.09531017980432486).abs() < 1e-15);
        let flat = log_returns(&[5.0, 5.0, 5.0], "p").unwrap();
        assert_eq!(flat, vec![0.0, 0.0]);
        assert!(matches!(
            log_returns(&[1.0, 0.0], "p"),
            Err(IngestError::NonPositivePrice { .. })
        ));
    }

    #[test]
    fn basic_ingest_with_dates_and_transform() {
        let f = write_tmp("date,price,x\n2020-01-01,100,1.0\n2020-01-02,110,2.0\n2020-01-03,121,3.0\n");
        let opts = IngestOptions {
            date_column: Some("date".into()),
            log_return_columns: vec!["price".into()],
        };
        let t = ingest_csv(f.path(), &opts).unwrap();
        assert_eq!(t.n(), 2);
        assert_eq!(t.names, vec!["price", "x"]);
        let p = t.column("price").unwrap();
        assert!((p[0] - (1.1_f64).ln()).abs() < 1e-12);
        // untransformed column dropped its first row to stay aligned
        assert_eq!(t.column("x").unwrap(), &[2.0, 3.0]);
        assert_eq!(t.dates.as_ref().unwrap().len(), 2);
        assert_eq!(t.dropped_rows, 0);
    }

    #[test]
    fn missing_rows_dropped_and_counted() {
        let f = write_tmp("a,b\n1,2\n,3\n4,5\n");
        let t = ingest_csv(f.path(), &IngestOptions::default()).unwrap();
        assert_eq!(t.n(), 2);
        assert_eq!(t.dropped_rows, 1);
    }

    #[test]
    fn errors_reported() {
        let opts = IngestOptions::default();
        assert!(matches!(
            ingest_csv(Path::new("/nonexistent/file.csv"), &opts),
            Err(IngestError::FileNotFound(_))
        ));
        let f = write_tmp("a,b\n1,zebra\n");
        assert!(matches!(
            ingest_csv(f.path(), &opts),
            Err(IngestError::NonNumericCell { .. })
        ));
        let f = write_tmp("a,b\n1,2\n");
        let opts = IngestOptions {
            date_column: None,
            log_return_columns: vec!["missing".into()],
        };
        assert!(matches!(
            ingest_csv(f.path(), &opts),
            Err(IngestError::MissingColumn(_))
        ));
        let f = write_tmp("date,a\n2020-01-02,1\n2020-01-01,2\n");
        let opts = IngestOptions {
            date_column: Some("date".into()),
            log_return_columns: vec![],
        };
        assert!(matches!(
            ingest_csv(f.path(), &opts),
            Err(IngestError::DatesNotIncreasing(_))
        ));
    }
}
