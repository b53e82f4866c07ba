//! Significance test for a single covariate: residuals from a fit that
//! omits the covariate are grouped into overlapping windows along its
//! ranks, and a between/within ANOVA contrast is standardized into a
//! one-sided z statistic.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimate::{fit_model, FitMethod};
use crate::types::{validate_inputs, CovariatePanel, ReturnSeries};

/// Smallest effective sample the test accepts.
pub const MIN_TEST_N: usize = 50;

/// Default window width: the odd integer nearest 3 n^{1/5}, clamped to
/// [5, n/10] (the upper bound rounded down to odd).
pub fn choose_kn(n_eff: usize) -> Result<usize> {
    if n_eff < MIN_TEST_N {
        return Err(Error::TooShort {
            n: n_eff,
            min: MIN_TEST_N,
        });
    }
    let target = 3.0 * (n_eff as f64).powf(0.2);
    let lo = {
        let f = target.floor() as usize;
        if f % 2 == 1 {
            f
        } else {
            f.saturating_sub(1)
        }
    };
    let hi = lo + 2;
    let mut k = if (target - lo as f64) <= (hi as f64 - target) {
        lo
    } else {
        hi
    };
    let mut upper = n_eff / 10;
    if upper % 2 == 0 {
        upper -= 1;
    }
    k = k.clamp(5, upper.max(5));
    Ok(k)
}

/// Rank-window layout over `n` observations: `ordering[r]` is the original
/// index of the r-th smallest covariate value, and window r covers rank
/// positions `starts[r] .. starts[r] + k_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSet {
    pub k_n: usize,
    pub n: usize,
    pub ordering: Vec<usize>,
    pub starts: Vec<usize>,
}

/// Build symmetric rank windows along a covariate column. Interior windows
/// are centered; edge windows are clipped to the first / last `k_n` ranks.
/// Ties are broken by original index.
pub fn build_windows(column: &[f64], k_n: usize) -> Result<WindowSet> {
    let n = column.len();
    if k_n % 2 == 0 {
        return Err(Error::EvenWindow(k_n));
    }
    if k_n < 3 {
        return Err(Error::WindowTooSmall(k_n));
    }
    if k_n > n {
        return Err(Error::WindowTooLarge { k_n, n });
    }
    if column.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteData);
    }
    let mut ordering: Vec<usize> = (0..n).collect();
    ordering.sort_by(|&a, &b| {
        column[a]
            .partial_cmp(&column[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let h = (k_n - 1) / 2;
    let starts = (0..n)
        .map(|r| r.saturating_sub(h).min(n - k_n))
        .collect();
    Ok(WindowSet {
        k_n,
        n,
        ordering,
        starts,
    })
}

/// The windowed ANOVA contrast. `v` must already be in rank order (v[r] is
/// the residual of the observation with rank r). Returns (t_n, mst, mse).
pub fn anova_statistic(v: &[f64], ws: &WindowSet) -> Result<(f64, f64, f64)> {
    let n = ws.n;
    let k = ws.k_n;
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    let kf = k as f64;
    let nf = n as f64;

    // window means via a sliding prefix sum over rank order
    let mut prefix = vec![0.0; n + 1];
    for r in 0..n {
        prefix[r + 1] = prefix[r] + v[r];
    }
    let window_sum = |s: usize| prefix[s + k] - prefix[s];

    // grand mean over all n*k window memberships
    let grand: f64 = ws.starts.iter().map(|&s| window_sum(s)).sum::<f64>() / (nf * kf);

    let mut mst = 0.0;
    let mut mse = 0.0;
    for &s in &ws.starts {
        let mean = window_sum(s) / kf;
        mst += (mean - grand) * (mean - grand);
        for r in s..s + k {
            mse += (v[r] - mean) * (v[r] - mean);
        }
    }
    mst *= kf / (nf - 1.0);
    mse /= nf * (kf - 1.0);
    Ok((mst - mse, mst, mse))
}

/// Memory guard for the dense oracle matrix.
pub const ORACLE_NK_CAP: usize = 4000;

/// Independent dense quadratic-form evaluation of the same statistic:
/// stack the window memberships into a vector V of length n*k and compute
/// V' A V with
///   A = c1 * blockdiag(J_k) - c2 * J_{nk} - c3 * I_{nk},
///   c1 = (nk - 1) / (n (n-1) k (k-1)),
///   c2 = 1 / (n (n-1) k),
///   c3 = 1 / (n (k-1)).
/// Intended for cross-checking, not production use.
pub fn quadratic_form_oracle(v: &[f64], ws: &WindowSet) -> Result<f64> {
    let n = ws.n;
    let k = ws.k_n;
    let nk = n * k;
    if nk > ORACLE_NK_CAP {
        return Err(Error::MemoryGuard {
            nk,
            cap: ORACLE_NK_CAP,
        });
    }
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    let nf = n as f64;
    let kf = k as f64;
    let c1 = (nk as f64 - 1.0) / (nf * (nf - 1.0) * kf * (kf - 1.0));
    let c2 = 1.0 / (nf * (nf - 1.0) * kf);
    let c3 = 1.0 / (nf * (kf - 1.0));

    let mut stacked = Vec::with_capacity(nk);
    for &s in &ws.starts {
        stacked.extend_from_slice(&v[s..s + k]);
    }
    let mut a = vec![vec![0.0; nk]; nk];
    for i in 0..nk {
        for j in 0..nk {
            let mut val = -c2;
            if i / k == j / k {
                val += c1;
            }
            if i == j {
                val -= c3;
            }
            a[i][j] = val;
        }
    }
    let mut t = 0.0;
    for i in 0..nk {
        let mut row = 0.0;
        for j in 0..nk {
            row += a[i][j] * stacked[j];
        }
        t += stacked[i] * row;
    }
    Ok(t)
}

/// Rice difference estimator of the residual variance, computed on
/// residuals in time order: (1 / (2 (n-1))) sum (v_t - v_{t-1})^2.
pub fn rice_variance(v_time_order: &[f64]) -> Result<f64> {
    if v_time_order.len() < 2 {
        return Err(Error::TooShort {
            n: v_time_order.len(),
            min: 2,
        });
    }
    let s: f64 = v_time_order
        .windows(2)
        .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
        .sum();
    Ok(s / (2.0 * (v_time_order.len() as f64 - 1.0)))
}

/// Null variance of sqrt(n / k_n) T_n for a fixed window width, as a
/// multiple of tau^4: 2 (2 k_n - 1) / (3 (k_n - 1)). Tends to 4/3 as
/// k_n grows, which is the constant used in the z statistic.
pub fn null_variance_factor(k_n: usize) -> f64 {
    let k = k_n as f64;
    2.0 * (2.0 * k - 1.0) / (3.0 * (k - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// 1-based index of the tested covariate.
    pub covariate: usize,
    pub t_n: f64,
    pub mst: f64,
    pub mse: f64,
    pub k_n: usize,
    /// Rice estimate of the residual variance tau^2.
    pub tau_sq_hat: f64,
    pub z: f64,
    pub p_value: f64,
    pub n_eff: usize,
}

/// Standardize the contrast into a one-sided z statistic and p-value.
pub fn standardize(t_n: f64, n_eff: usize, k_n: usize, tau_sq: f64) -> (f64, f64) {
    if !(tau_sq > 0.0) {
        // perfectly flat residuals carry no evidence either way
        return (0.0, 0.5);
    }
    let z = ((n_eff as f64) / (k_n as f64)).sqrt() * t_n / (4.0 * tau_sq * tau_sq / 3.0).sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (z, 1.0 - normal.cdf(z))
}

/// Test whether covariate `covariate` (1-based) enters the variance
/// function: fit the model without it, then contrast the residuals along
/// its ranks.
pub fn test_covariate(
    series: &ReturnSeries,
    panel: &CovariatePanel,
    covariate: usize,
    p: usize,
    method: &FitMethod,
    k_n: Option<usize>,
) -> Result<TestResult> {
    validate_inputs(series, panel, p)?;
    if covariate == 0 || covariate > panel.d() {
        return Err(Error::IndexOutOfRange {
            index: covariate,
            d: panel.d(),
        });
    }
    let exclude = if panel.d() > 1 { Some(covariate) } else { None };
    let fit = fit_model(series, panel, p, method, exclude)?;
    let n_eff = fit.n_eff;
    let n = series.n();

    // covariate values paired with the residuals: X_{cov, t-1} for t = p..n-1
    let full_col = panel.column(covariate - 1);
    let col: Vec<f64> = (p..n).map(|t| full_col[t - 1]).collect();
    debug_assert_eq!(col.len(), n_eff);

    let k_n = match k_n {
        Some(k) => {
            if k % 2 == 0 {
                return Err(Error::EvenWindow(k));
            }
            if k < 3 {
                return Err(Error::WindowTooSmall(k));
            }
            if k > n_eff {
                return Err(Error::WindowTooLarge { k_n: k, n: n_eff });
            }
            k
        }
        None => choose_kn(n_eff)?,
    };
    let ws = build_windows(&col, k_n)?;
    let ranked: Vec<f64> = ws.ordering.iter().map(|&i| fit.residuals[i]).collect();
    let (t_n, mst, mse) = anova_statistic(&ranked, &ws)?;
    let tau_sq = rice_variance(&fit.residuals)?;
    let (z, p_value) = standardize(t_n, n_eff, k_n, tau_sq);
    Ok(TestResult {
        covariate,
        t_n,
        mst,
        mse,
        k_n,
        tau_sq_hat: tau_sq,
        z,
        p_value,
        n_eff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kn_rule() {
        assert_eq!(choose_kn(999).unwrap(), 11);
        assert_eq!(choose_kn(10_000).unwrap(), 19);
        assert_eq!(choose_kn(50).unwrap(), 5);
        assert!(matches!(choose_kn(49), Err(Error::TooShort { .. })));
    }

    #[test]
    fn window_layout() {
        let col: Vec<f64> = (0..7).map(|i| i as f64).collect();
        let ws = build_windows(&col, 3).unwrap();
        assert_eq!(ws.starts, vec![0, 0, 1, 2, 3, 4, 4]);
        assert_eq!(ws.ordering, vec![0, 1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn window_ordering_breaks_ties_by_index() {
        let col = vec![2.0, 1.0, 2.0, 1.0];
        let ws = build_windows(&col, 3).unwrap();
        assert_eq!(ws.ordering, vec![1, 3, 0, 2]);
    }

    #[test]
    fn window_validation() {
        let col = vec![1.0, 2.0, 3.0, 4.0];
        assert!(matches!(build_windows(&col, 4), Err(Error::EvenWindow(4))));
        assert!(matches!(
            build_windows(&col, 1),
            Err(Error::WindowTooSmall(1))
        ));
        assert!(matches!(
            build_windows(&col, 5),
            Err(Error::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn hand_example() {
        // three observations, full window: MST = 0, MSE = 1, T = -1.
        let col = vec![1.0, 2.0, 3.0];
        let ws = build_windows(&col, 3).unwrap();
        let v = vec![1.0, 0.0, -1.0];
        let (t, mst, mse) = anova_statistic(&v, &ws).unwrap();
        assert_abs_diff_eq!(mst, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mse, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn oracle_matches_hand_example() {
        let col = vec![1.0, 2.0, 3.0];
        let ws = build_windows(&col, 3).unwrap();
        let v = vec![1.0, 0.0, -1.0];
        let t = quadratic_form_oracle(&v, &ws).unwrap();
        assert_abs_diff_eq!(t, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn oracle_memory_guard() {
        let col: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let ws = build_windows(&col, 9).unwrap();
        let v = vec![0.0; 500];
        assert!(matches!(
            quadratic_form_oracle(&v, &ws),
            Err(Error::MemoryGuard { .. })
        ));
    }

    #[test]
    fn rice_examples() {
        assert_abs_diff_eq!(rice_variance(&[0.0, 2.0]).unwrap(), 2.0);
        assert_abs_diff_eq!(rice_variance(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(rice_variance(&[1.0]), Err(Error::TooShort { .. })));
        // i.i.d. N(0, 4): expect ~4
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal as Nd};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let d = Nd::new(0.0, 2.0).unwrap();
        let v: Vec<f64> = (0..200_000).map(|_| d.sample(&mut rng)).collect();
        let t2 = rice_variance(&v).unwrap();
        assert!((t2 - 4.0).abs() < 0.05, "rice = {t2}");
    }

    #[test]
    fn variance_factor_limits() {
        assert_abs_diff_eq!(null_variance_factor(3), 5.0 / 3.0, epsilon = 1e-15);
        assert!((null_variance_factor(1001) - 4.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn standardize_flat_residuals() {
        let (z, p) = standardize(0.5, 100, 5, 0.0);
        assert_eq!(z, 0.0);
        assert_eq!(p, 0.5);
    }

    #[test]
    fn standardize_known_value() {
        // t_n = 1.2, n = 300, k = 5, tau^2 = 1.5:
        // z = sqrt(60) * 1.2 / sqrt(4 * 2.25 / 3) = sqrt(60) * 1.2 / sqrt(3)
        let (z, p) = standardize(1.2, 300, 5, 1.5);
        let expect = (60.0_f64).sqrt() * 1.2 / 3.0_f64.sqrt();
        assert_abs_diff_eq!(z, expect, epsilon = 1e-12);
        assert!(p < 1e-6);
    }

    #[test]
    fn oracle_agrees_on_random_inputs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let n = rng.gen_range(20..80);
            let k = [3, 5, 7][rng.gen_range(0..3)];
            let col: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            let ws = build_windows(&col, k).unwrap();
            let ranked: Vec<f64> = ws.ordering.iter().map(|&i| v[i]).collect();
            let (t, _, _) = anova_statistic(&ranked, &ws).unwrap();
            let oracle = quadratic_form_oracle(&ranked, &ws).unwrap();
            assert_abs_diff_eq!(t, oracle, epsilon = 1e-10);
        }
    }
}
