//! JSON report structures. Field order is fixed by the struct definitions
//! so emitted reports diff cleanly.

use std::fs;
use std::path::Path;

use archmx::{SelectionResult, TestResult};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// SHA-256 of a file's raw bytes, hex-encoded.
pub fn file_hash(path: &Path) -> std::io::Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputStamp {
    pub series_file: String,
    pub series_sha256: String,
    pub covariates_file: String,
    pub covariates_sha256: String,
    pub n: usize,
    pub d: usize,
    pub covariate_names: Vec<String>,
    pub dropped_rows: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub input: InputStamp,
    pub p: usize,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidths: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interior_knots: Option<Vec<usize>>,
    pub alpha_hat: Vec<f64>,
    pub n_eff: usize,
    pub residual_mean: f64,
    pub residual_variance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub input: InputStamp,
    pub p: usize,
    pub covariate: usize,
    pub covariate_name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidths: Option<Vec<f64>>,
    pub k_n: usize,
    pub n_eff: usize,
    pub t_n: f64,
    pub mst: f64,
    pub mse: f64,
    pub tau_sq_hat: f64,
    pub z: f64,
    pub p_value: f64,
}

impl TestReport {
    pub fn from_result(input: InputStamp, p: usize, name: &str, bandwidths: Option<Vec<f64>>, r: &TestResult) -> Self {
        Self {
            input,
            p,
            covariate: r.covariate,
            covariate_name: name.to_string(),
            bandwidths,
            k_n: r.k_n,
            n_eff: r.n_eff,
            t_n: r.t_n,
            mst: r.mst,
            mse: r.mse,
            tau_sq_hat: r.tau_sq_hat,
            z: r.z,
            p_value: r.p_value,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovariateTestRow {
    pub covariate: usize,
    pub name: String,
    pub k_n: usize,
    pub tau_sq_hat: f64,
    pub t_n: f64,
    pub z: f64,
    pub p_value: f64,
    pub adjusted_p_value: f64,
    pub selected: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport {
    pub input: InputStamp,
    pub p: usize,
    pub q: f64,
    pub method: String,
    pub n_eff: usize,
    pub cutoffs: Vec<f64>,
    pub order: Vec<usize>,
    pub k: usize,
    pub selected: Vec<usize>,
    pub selected_names: Vec<String>,
    pub covariates: Vec<CovariateTestRow>,
}

impl SelectionReport {
    pub fn build(
        input: InputStamp,
        p: usize,
        names: &[String],
        sel: &SelectionResult,
        tests: &[TestResult],
    ) -> Self {
        let covariates = tests
            .iter()
            .map(|t| CovariateTestRow {
                covariate: t.covariate,
                name: names[t.covariate - 1].clone(),
                k_n: t.k_n,
                tau_sq_hat: t.tau_sq_hat,
                t_n: t.t_n,
                z: t.z,
                p_value: t.p_value,
                adjusted_p_value: sel.adjusted[t.covariate - 1],
                selected: sel.selected.contains(&t.covariate),
            })
            .collect();
        Self {
            input,
            p,
            q: sel.q,
            method: format!("{:?}", sel.method),
            n_eff: tests.first().map(|t| t.n_eff).unwrap_or(0),
            cutoffs: sel.cutoffs.clone(),
            order: sel.order.clone(),
            k: sel.k,
            selected: sel.selected.clone(),
            selected_names: sel.selected.iter().map(|&j| names[j - 1].clone()).collect(),
            covariates,
        }
    }
}
