//! Variable selection: run the covariate significance test on every column
//! and control the false discovery rate with the Benjamini-Yekutieli
//! step-up procedure (or family-wise error with Bonferroni).

use serde::{Deserialize, Serialize};

use crate::anovatest::{test_covariate, TestResult};
use crate::error::{Error, Result};
use crate::estimate::FitMethod;
use crate::types::{validate_inputs, CovariatePanel, ReturnSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    BenjaminiYekutieli,
    Bonferroni,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Raw p-values in covariate order (index j = covariate j+1).
    pub p_values: Vec<f64>,
    /// Covariate indices (1-based) sorted by ascending p-value.
    pub order: Vec<usize>,
    /// Step-up thresholds aligned with `order`.
    pub cutoffs: Vec<f64>,
    /// Number of rejections.
    pub k: usize,
    /// Selected covariates (1-based, ascending).
    pub selected: Vec<usize>,
    /// Adjusted p-values in covariate order.
    pub adjusted: Vec<f64>,
    pub q: f64,
    pub method: SelectionMethod,
}

fn validate_pvalues(p_values: &[f64]) -> Result<()> {
    if p_values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(&p) = p_values
        .iter()
        .find(|&&p| !(0.0..=1.0).contains(&p) || !p.is_finite())
    {
        return Err(Error::InvalidPValue(p));
    }
    Ok(())
}

fn sorted_order(p_values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=p_values.len()).collect();
    order.sort_by(|&a, &b| {
        p_values[a - 1]
            .partial_cmp(&p_values[b - 1])
            .unwrap()
            .then(a.cmp(&b))
    });
    order
}

fn harmonic(d: usize) -> f64 {
    (1..=d).map(|l| 1.0 / l as f64).sum()
}

/// Benjamini-Yekutieli step-up selection at FDR level `q`: reject the
/// hypotheses with the `k` smallest p-values, where `k` is the largest rank
/// whose ordered p-value sits below (rank / d) * q / H_d.
pub fn by_fdr_select(p_values: &[f64], q: f64) -> Result<SelectionResult> {
    validate_pvalues(p_values)?;
    if !(0.0 < q && q < 1.0) {
        return Err(Error::InvalidLevel(q));
    }
    let d = p_values.len();
    let h = harmonic(d);
    let order = sorted_order(p_values);
    let cutoffs: Vec<f64> = (1..=d).map(|l| l as f64 / d as f64 * q / h).collect();
    let mut k = 0;
    for l in (1..=d).rev() {
        if p_values[order[l - 1] - 1] <= cutoffs[l - 1] {
            k = l;
            break;
        }
    }
    let mut selected: Vec<usize> = order[..k].to_vec();
    selected.sort_unstable();
    let adjusted = by_adjusted_pvalues(p_values)?;
    Ok(SelectionResult {
        p_values: p_values.to_vec(),
        order,
        cutoffs,
        k,
        selected,
        adjusted,
        q,
        method: SelectionMethod::BenjaminiYekutieli,
    })
}

/// Benjamini-Yekutieli adjusted p-values: the smallest q at which each
/// hypothesis would be rejected. adj_(l) = min(1, min_{j >= l} (d H_d / j) p_(j)).
pub fn by_adjusted_pvalues(p_values: &[f64]) -> Result<Vec<f64>> {
    validate_pvalues(p_values)?;
    let d = p_values.len();
    let h = harmonic(d);
    let order = sorted_order(p_values);
    let mut adj_sorted = vec![0.0; d];
    let mut running = f64::INFINITY;
    for l in (1..=d).rev() {
        let raw = d as f64 * h / l as f64 * p_values[order[l - 1] - 1];
        running = running.min(raw).min(1.0);
        adj_sorted[l - 1] = running;
    }
    let mut adjusted = vec![0.0; d];
    for (l, &cov) in order.iter().enumerate() {
        adjusted[cov - 1] = adj_sorted[l];
    }
    Ok(adjusted)
}

/// Bonferroni selection at family-wise level `q`: reject p <= q / d.
pub fn bonferroni_select(p_values: &[f64], q: f64) -> Result<SelectionResult> {
    validate_pvalues(p_values)?;
    if !(0.0 < q && q < 1.0) {
        return Err(Error::InvalidLevel(q));
    }
    let d = p_values.len();
    let cut = q / d as f64;
    let order = sorted_order(p_values);
    let cutoffs = vec![cut; d];
    let selected: Vec<usize> = (1..=d).filter(|&j| p_values[j - 1] <= cut).collect();
    let adjusted: Vec<f64> = p_values.iter().map(|&p| (p * d as f64).min(1.0)).collect();
    Ok(SelectionResult {
        k: selected.len(),
        p_values: p_values.to_vec(),
        order,
        cutoffs,
        selected,
        adjusted,
        q,
        method: SelectionMethod::Bonferroni,
    })
}

/// Test every covariate and select at level `q`. Returns the selection
/// summary together with the per-covariate test results.
pub fn select_variables(
    series: &ReturnSeries,
    panel: &CovariatePanel,
    p: usize,
    q: f64,
    method: SelectionMethod,
    fit_method: &FitMethod,
    k_n: Option<usize>,
) -> Result<(SelectionResult, Vec<TestResult>)> {
    validate_inputs(series, panel, p)?;
    let mut tests = Vec::with_capacity(panel.d());
    for j in 1..=panel.d() {
        tests.push(test_covariate(series, panel, j, p, fit_method, k_n)?);
    }
    let p_values: Vec<f64> = tests.iter().map(|t| t.p_value).collect();
    let result = match method {
        SelectionMethod::BenjaminiYekutieli => by_fdr_select(&p_values, q)?,
        SelectionMethod::Bonferroni => bonferroni_select(&p_values, q)?,
    };
    Ok((result, tests))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn by_cutoffs_three_hypotheses() {
        // d = 3, q = 0.05, H_3 = 11/6: cutoffs (l/3) * 0.05 * 6/11
        let r = by_fdr_select(&[0.001, 0.5, 0.04], 0.05).unwrap();
        assert_abs_diff_eq!(r.cutoffs[0], 0.05 / 3.0 * 6.0 / 11.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.cutoffs[0], 0.009091, epsilon = 1e-6);
        assert_abs_diff_eq!(r.cutoffs[1], 0.018182, epsilon = 1e-6);
        assert_abs_diff_eq!(r.cutoffs[2], 0.027273, epsilon = 1e-6);
        assert_eq!(r.order, vec![1, 3, 2]);
        assert_eq!(r.k, 1);
        assert_eq!(r.selected, vec![1]);
    }

    #[test]
    fn by_adjusted_three_hypotheses() {
        // p = (0.001, 0.5, 0.1), d H_d = 5.5:
        // sorted (0.001, 0.1, 0.5) -> raw (0.0055, 0.275, 0.9166..) with the
        // running minimum from the right: (0.0055, 0.275, 0.9166..)
        let adj = by_adjusted_pvalues(&[0.001, 0.5, 0.1]).unwrap();
        assert_abs_diff_eq!(adj[0], 0.0055, epsilon = 1e-12);
        assert_abs_diff_eq!(adj[2], 0.275, epsilon = 1e-12);
        assert_abs_diff_eq!(adj[1], 11.0 / 12.0, epsilon = 1e-12);
    }

    #[test]
    fn adjusted_monotone_in_raw_order() {
        let adj = by_adjusted_pvalues(&[0.3, 0.01, 0.2, 0.8]).unwrap();
        // ordering of adjusted values follows ordering of raw values
        assert!(adj[1] <= adj[2] && adj[2] <= adj[0] && adj[0] <= adj[3]);
        assert!(adj.iter().all(|&a| (0.0..=1.0).contains(&a)));
    }

    #[test]
    fn step_up_takes_largest_crossing() {
        // p_(2) crosses its cutoff even though p_(1) also does; both rejected
        let d = 2;
        let h = 1.5;
        let q = 0.4;
        let cut2 = 2.0 / d as f64 * q / h; // 0.2666
        let r = by_fdr_select(&[0.001, cut2 - 1e-6], q).unwrap();
        assert_eq!(r.k, 2);
        assert_eq!(r.selected, vec![1, 2]);
    }

    #[test]
    fn nothing_selected_when_all_large() {
        let r = by_fdr_select(&[0.9, 0.5, 0.7], 0.05).unwrap();
        assert_eq!(r.k, 0);
        assert!(r.selected.is_empty());
    }

    #[test]
    fn bonferroni_cutoff() {
        let r = bonferroni_select(&[0.004, 0.02, 0.6], 0.05).unwrap();
        assert_eq!(r.selected, vec![1]);
        assert_abs_diff_eq!(r.cutoffs[0], 0.05 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.adjusted[0], 0.012, epsilon = 1e-12);
        assert_abs_diff_eq!(r.adjusted[2], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(matches!(
            by_fdr_select(&[], 0.05),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            by_fdr_select(&[1.2], 0.05),
            Err(Error::InvalidPValue(_))
        ));
        assert!(matches!(
            by_fdr_select(&[0.5], 0.0),
            Err(Error::InvalidLevel(_))
        ));
    }

    #[test]
    fn duality_of_cutoffs_and_adjustment() {
        // selection via cutoffs agrees with thresholding adjusted p-values
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let d = rng.gen_range(1..12);
            let pv: Vec<f64> = (0..d).map(|_| rng.gen::<f64>().powi(2)).collect();
            let q = rng.gen_range(0.01..0.5);
            let r = by_fdr_select(&pv, q).unwrap();
            let via_adj: Vec<usize> = (1..=d)
                .filter(|&j| r.adjusted[j - 1] <= q)
                .collect();
            assert_eq!(r.selected, via_adj, "pv = {pv:?}, q = {q}");
        }
    }
}
