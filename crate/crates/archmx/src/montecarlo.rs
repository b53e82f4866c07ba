//! Monte Carlo harness: seeded, replication-indexed studies of the test's
//! rejection rate and the selector's accuracy. Results are deterministic
//! for a given master seed regardless of thread scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anovatest::test_covariate;
use crate::dgp::{derive_seed, simulate_dataset, Scenario, Shock, SimModel};
use crate::error::{Error, Result};
use crate::estimate::FitMethod;
use crate::select::{select_variables, SelectionMethod};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub scenario: Scenario,
    pub model_id: u8,
    pub n: usize,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_shock")]
    pub shock: Shock,
    #[serde(default)]
    pub standardize_shocks: bool,
    pub replications: usize,
    pub master_seed: u64,
    /// Signal strengths for rejection studies; ignored for selection.
    #[serde(default)]
    pub c_grid: Option<Vec<f64>>,
    /// Nominal test level for rejection studies.
    #[serde(default = "default_level")]
    pub level: f64,
    /// FDR level for selection studies.
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_selection_method")]
    pub selection_method: SelectionMethod,
    #[serde(default)]
    pub fit: FitMethod,
    #[serde(default)]
    pub k_n: Option<usize>,
    #[serde(default = "default_burnin")]
    pub burnin: usize,
}

fn default_rho() -> f64 {
    0.5
}
fn default_shock() -> Shock {
    Shock::Normal
}
fn default_level() -> f64 {
    0.05
}
fn default_q() -> f64 {
    0.05
}
fn default_selection_method() -> SelectionMethod {
    SelectionMethod::BenjaminiYekutieli
}
fn default_burnin() -> usize {
    500
}

impl StudyConfig {
    fn validate(&self) -> Result<()> {
        if self.replications == 0 || self.n == 0 {
            return Err(Error::EmptyInput);
        }
        if !(0.0 < self.level && self.level < 1.0) {
            return Err(Error::InvalidLevel(self.level));
        }
        SimModel::new(self.scenario, self.model_id, 0.0)?;
        Ok(())
    }
}

/// Rejection rate of the covariate test at one signal strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRow {
    pub c: f64,
    pub replications: usize,
    pub rejections: usize,
    /// Replications that failed to simulate or fit; excluded from the rate.
    pub failures: usize,
    pub rate: f64,
    pub std_error: f64,
}

/// Run the covariate test over the signal grid. One replication: simulate,
/// test the designated covariate, compare the p-value to the nominal level.
pub fn run_rejection_study(cfg: &StudyConfig) -> Result<Vec<RejectionRow>> {
    cfg.validate()?;
    if cfg.scenario.is_selection() {
        return Err(Error::ScenarioMismatch(
            "rejection studies require a test scenario",
        ));
    }
    let grid = cfg
        .c_grid
        .clone()
        .unwrap_or_else(|| vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
    let mut out = Vec::with_capacity(grid.len());
    for (ci, &c) in grid.iter().enumerate() {
        let model = SimModel::new(cfg.scenario, cfg.model_id, c)?;
        let results: Vec<Option<bool>> = (0..cfg.replications)
            .into_par_iter()
            .map(|rep| {
                let seed = derive_seed(cfg.master_seed, &[ci as u64, rep as u64]);
                one_rejection(cfg, &model, seed).ok()
            })
            .collect();
        let failures = results.iter().filter(|r| r.is_none()).count();
        let rejections = results.iter().filter(|r| **r == Some(true)).count();
        let done = cfg.replications - failures;
        let rate = if done > 0 {
            rejections as f64 / done as f64
        } else {
            f64::NAN
        };
        let std_error = if done > 0 {
            (rate * (1.0 - rate) / done as f64).sqrt()
        } else {
            f64::NAN
        };
        out.push(RejectionRow {
            c,
            replications: cfg.replications,
            rejections,
            failures,
            rate,
            std_error,
        });
    }
    Ok(out)
}

fn one_rejection(cfg: &StudyConfig, model: &SimModel, seed: u64) -> Result<bool> {
    let (series, panel) = simulate_dataset(
        model,
        cfg.rho,
        cfg.n,
        cfg.burnin,
        cfg.shock,
        cfg.standardize_shocks,
        seed,
    )?;
    let t = test_covariate(
        &series,
        &panel,
        model.tested_covariate(),
        model.p(),
        &cfg.fit,
        cfg.k_n,
    )?;
    Ok(t.p_value <= cfg.level)
}

/// Averaged selection accuracy across replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionMetrics {
    /// Mean number of correctly selected (truly active) covariates.
    pub mean_correct_selected: f64,
    /// Mean number of incorrectly selected (inactive) covariates.
    pub mean_incorrect_selected: f64,
    /// Mean number of correctly excluded inactive covariates.
    pub mean_correct_excluded: f64,
    /// Mean number of incorrectly excluded active covariates.
    pub mean_incorrect_excluded: f64,
    /// Selection frequency per covariate (1-based order).
    pub per_covariate_freq: Vec<f64>,
    pub replications: usize,
    pub failures: usize,
}

/// Counts of (correct selections, incorrect selections, correct exclusions,
/// incorrect exclusions) for one replication.
pub fn selection_metrics(selected: &[usize], active: &[usize], d: usize) -> (usize, usize, usize, usize) {
    let is_active = |j: usize| active.contains(&j);
    let is_sel = |j: usize| selected.contains(&j);
    let mut counts = (0, 0, 0, 0);
    for j in 1..=d {
        match (is_sel(j), is_active(j)) {
            (true, true) => counts.0 += 1,
            (true, false) => counts.1 += 1,
            (false, false) => counts.2 += 1,
            (false, true) => counts.3 += 1,
        }
    }
    counts
}

/// Run the variable-selection study for one of the selection scenarios.
pub fn run_selection_study(cfg: &StudyConfig) -> Result<SelectionMetrics> {
    cfg.validate()?;
    if !cfg.scenario.is_selection() {
        return Err(Error::ScenarioMismatch(
            "selection studies require a selection scenario",
        ));
    }
    let model = SimModel::new(cfg.scenario, cfg.model_id, 0.0)?;
    let active = model.active_set();
    let d = model.d();

    let per_rep: Vec<Option<Vec<usize>>> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let seed = derive_seed(cfg.master_seed, &[0, rep as u64]);
            one_selection(cfg, &model, seed).ok()
        })
        .collect();

    let failures = per_rep.iter().filter(|r| r.is_none()).count();
    let done = (cfg.replications - failures).max(1) as f64;
    let mut sums = (0.0, 0.0, 0.0, 0.0);
    let mut freq = vec![0.0; d];
    for sel in per_rep.iter().flatten() {
        let (cs, is, ce, ie) = selection_metrics(sel, &active, d);
        sums.0 += cs as f64;
        sums.1 += is as f64;
        sums.2 += ce as f64;
        sums.3 += ie as f64;
        for &j in sel {
            freq[j - 1] += 1.0;
        }
    }
    for f in freq.iter_mut() {
        *f /= done;
    }
    Ok(SelectionMetrics {
        mean_correct_selected: sums.0 / done,
        mean_incorrect_selected: sums.1 / done,
        mean_correct_excluded: sums.2 / done,
        mean_incorrect_excluded: sums.3 / done,
        per_covariate_freq: freq,
        replications: cfg.replications,
        failures,
    })
}

fn one_selection(cfg: &StudyConfig, model: &SimModel, seed: u64) -> Result<Vec<usize>> {
    let (series, panel) = simulate_dataset(
        model,
        cfg.rho,
        cfg.n,
        cfg.burnin,
        cfg.shock,
        cfg.standardize_shocks,
        seed,
    )?;
    let (res, _) = select_variables(
        &series,
        &panel,
        model.p(),
        cfg.q,
        cfg.selection_method,
        &cfg.fit,
        cfg.k_n,
    )?;
    Ok(res.selected)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> StudyConfig {
        StudyConfig {
            scenario: Scenario::Test2Cov,
            model_id: 7,
            n: 200,
            rho: 0.5,
            shock: Shock::Normal,
            standardize_shocks: false,
            replications: 8,
            master_seed: 42,
            c_grid: Some(vec![0.0, 1.0]),
            level: 0.05,
            q: 0.05,
            selection_method: SelectionMethod::BenjaminiYekutieli,
            fit: FitMethod::default(),
            k_n: None,
            burnin: 500,
        }
    }

    #[test]
    fn metrics_counting() {
        // selected {1,2,3}, active {1,3,4}, d = 5
        let (cs, is, ce, ie) = selection_metrics(&[1, 2, 3], &[1, 3, 4], 5);
        assert_eq!((cs, is, ce, ie), (2, 1, 1, 1));
        let (cs, is, ce, ie) = selection_metrics(&[], &[1], 3);
        assert_eq!((cs, is, ce, ie), (0, 0, 2, 1));
    }

    #[test]
    fn rejection_study_reproducible() {
        let cfg = small_cfg();
        let a = run_rejection_study(&cfg).unwrap();
        let b = run_rejection_study(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].c, 0.0);
        for row in &a {
            assert!(row.failures + row.rejections <= cfg.replications);
        }
        // strong signal should reject at least as often as none
        assert!(a[1].rate >= a[0].rate);
    }

    #[test]
    fn replication_seeds_distinct() {
        use std::collections::HashSet;
        let mut seen = HashSet::new();
        for master in [42_u64, 43] {
            for ci in 0..2_u64 {
                for rep in 0..50_u64 {
                    assert!(seen.insert(derive_seed(master, &[ci, rep])));
                }
            }
        }
    }

    #[test]
    fn selection_study_runs() {
        let cfg = StudyConfig {
            scenario: Scenario::Select5Cov,
            model_id: 7,
            n: 300,
            replications: 4,
            c_grid: None,
            ..small_cfg()
        };
        let m = run_selection_study(&cfg).unwrap();
        assert_eq!(m.per_covariate_freq.len(), 5);
        assert!(m.failures <= cfg.replications);
        let again = run_selection_study(&cfg).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn scenario_direction_enforced() {
        let cfg = small_cfg();
        assert!(run_selection_study(&cfg).is_err());
        let sel = StudyConfig {
            scenario: Scenario::Select5Cov,
            ..small_cfg()
        };
        assert!(run_rejection_study(&sel).is_err());
    }
}
