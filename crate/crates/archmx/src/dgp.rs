//! Data-generating processes for the simulation studies: covariate and shock
//! sampling, the benchmark volatility models, and the ARCH-m(X) recursion.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::types::{CovariatePanel, ReturnSeries};

/// Deterministically mix a master seed with stream identifiers (replication
/// index, grid index, ...) so that parallel runs are scheduler-independent.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut z = splitmix(master ^ 0x9e37_79b9_7f4a_7c15);
    for &p in parts {
        z = splitmix(z ^ splitmix(p.wrapping_add(0x2545_f491_4f6c_dd1d)));
    }
    z
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Multivariate normal covariate law with exponentially decaying
/// correlation: cov[i][j] = rho^|i-j|, unit diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovariateLaw {
    pub d: usize,
    pub mean: f64,
    pub rho: f64,
}

impl CovariateLaw {
    pub fn new(d: usize, mean: f64, rho: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::EmptyInput);
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::InvalidRho(rho));
        }
        Ok(Self { d, mean, rho })
    }

    pub fn covariance(&self) -> Vec<Vec<f64>> {
        (0..self.d)
            .map(|i| {
                (0..self.d)
                    .map(|j| self.rho.powi((i as i32 - j as i32).abs()))
                    .collect()
            })
            .collect()
    }
}

/// Draw `n` i.i.d. rows from the covariate law. Columns are named X1..Xd.
pub fn sample_covariates(law: &CovariateLaw, n: usize, seed: u64) -> Result<CovariatePanel> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let chol = linalg::cholesky(&law.covariance()).ok_or(Error::CholeskyFailure)?;
    let mut rng = rng_for(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let z: Vec<f64> = (0..law.d).map(|_| std_normal.sample(&mut rng)).collect();
        let row = (0..law.d)
            .map(|i| law.mean + (0..=i).map(|k| chol[i][k] * z[k]).sum::<f64>())
            .collect();
        rows.push(row);
    }
    let names = (1..=law.d).map(|j| format!("X{j}")).collect();
    CovariatePanel::new(rows, names)
}

/// Shock distribution for the multiplicative innovation z_t.
///
/// `Laplace` and the t variants are returned as literally parameterized by
/// default; pass `standardize = true` to `sample_shocks` to rescale them to
/// unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum Shock {
    Normal,
    Laplace { scale: f64 },
    StudentT { df: f64 },
    ScaledT { df: f64, scale: f64 },
}

impl Shock {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Shock::Normal => Ok(()),
            Shock::Laplace { scale } => {
                if scale > 0.0 && scale.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidBandwidth(scale))
                }
            }
            Shock::StudentT { df } | Shock::ScaledT { df, .. } => {
                if df > 2.0 && df.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidDf(df))
                }
            }
        }
    }

    /// Population variance of the raw (non-standardized) draw.
    pub fn variance(&self) -> f64 {
        match *self {
            Shock::Normal => 1.0,
            Shock::Laplace { scale } => 2.0 * scale * scale,
            Shock::StudentT { df } => df / (df - 2.0),
            Shock::ScaledT { df, scale } => scale * scale * df / (df - 2.0),
        }
    }
}

/// Draw `n` i.i.d. shocks. Deterministic given the seed.
pub fn sample_shocks(dist: Shock, n: usize, seed: u64, standardize: bool) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    dist.validate()?;
    let mut rng = rng_for(seed);
    let scale_out = if standardize {
        1.0 / dist.variance().sqrt()
    } else {
        1.0
    };
    let draws = match dist {
        Shock::Normal => {
            let d = Normal::new(0.0, 1.0).expect("valid normal");
            (0..n).map(|_| d.sample(&mut rng)).collect::<Vec<_>>()
        }
        Shock::Laplace { scale } => (0..n)
            .map(|_| {
                let u: f64 = rng.gen_range(-0.5..0.5);
                -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            })
            .collect(),
        Shock::StudentT { df } => {
            let d = StudentT::new(df).expect("df validated");
            (0..n).map(|_| d.sample(&mut rng)).collect()
        }
        Shock::ScaledT { df, scale } => {
            let d = StudentT::new(df).expect("df validated");
            (0..n).map(|_| scale * d.sample(&mut rng)).collect()
        }
    };
    Ok(draws.into_iter().map(|z| z * scale_out).collect())
}

/// Simulation scenarios: two families for the significance test and two for
/// variable selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Test2Cov,
    Test5Cov,
    Select5Cov,
    Select10Cov,
}

impl Scenario {
    pub fn d(&self) -> usize {
        match self {
            Scenario::Test2Cov => 2,
            Scenario::Test5Cov | Scenario::Select5Cov => 5,
            Scenario::Select10Cov => 10,
        }
    }

    pub fn is_selection(&self) -> bool {
        matches!(self, Scenario::Select5Cov | Scenario::Select10Cov)
    }
}

/// One of the benchmark data-generating models. `c` is the signal strength
/// of the tested covariate in the test scenarios and is ignored for the
/// selection scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimModel {
    pub scenario: Scenario,
    pub model_id: u8,
    #[serde(default)]
    pub c: f64,
}

impl SimModel {
    pub fn new(scenario: Scenario, model_id: u8, c: f64) -> Result<Self> {
        if !(1..=8).contains(&model_id) {
            return Err(Error::IndexOutOfRange {
                index: model_id as usize,
                d: 8,
            });
        }
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidLevel(c));
        }
        Ok(Self {
            scenario,
            model_id,
            c,
        })
    }

    pub fn d(&self) -> usize {
        self.scenario.d()
    }

    /// ARCH coefficients of the model row.
    pub fn alpha(&self) -> Vec<f64> {
        match self.model_id {
            1 | 2 => vec![0.3],
            3 | 4 => vec![0.3, 0.2],
            _ => vec![0.4],
        }
    }

    pub fn p(&self) -> usize {
        self.alpha().len()
    }

    /// Truly relevant covariate indices (1-based) for selection scenarios;
    /// empty for the test scenarios.
    pub fn active_set(&self) -> Vec<usize> {
        match self.scenario {
            Scenario::Select5Cov => vec![1, 3, 4],
            Scenario::Select10Cov => vec![1, 3, 4, 5, 9],
            _ => Vec::new(),
        }
    }

    /// Covariate under test (1-based) in the test scenarios.
    pub fn tested_covariate(&self) -> usize {
        match self.scenario {
            Scenario::Test2Cov => 2,
            _ => 3,
        }
    }

    /// Evaluate the covariate part m(x) of the conditional variance. The
    /// lagged squared-return terms are governed by `alpha()` and are not
    /// part of m.
    pub fn eval_m(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                got: x.len(),
            });
        }
        let c = self.c;
        let sin2 = |v: f64| {
            let s = (std::f64::consts::PI * v / 2.0).sin();
            s * s
        };
        let m = match (self.scenario, self.model_id) {
            (Scenario::Test2Cov, 1) | (Scenario::Test2Cov, 3) => {
                0.2 + 0.5 * (x[0] - 2.5).powi(2) + 2.0 * c * (x[1] - 2.5).powi(2)
            }
            (Scenario::Test2Cov, 2) | (Scenario::Test2Cov, 4) => {
                0.2 + 0.5 * (x[0] + 2.0 * c * x[1] - 10.0).powi(2)
            }
            (Scenario::Test2Cov, 5) => 0.2 + sin2(x[0]) + 10.0 * c * sin2(x[1]),
            (Scenario::Test2Cov, 6) => {
                let s = (x[0] / 2.0 + std::f64::consts::PI * c * x[1] / 2.0).sin();
                0.2 + 10.0 * c * s * s
            }
            (Scenario::Test2Cov, 7) => 0.2 + 0.25 * x[0] + c * x[1],
            (Scenario::Test2Cov, 8) => 0.2 + c * x[0] * x[1],

            (Scenario::Test5Cov, 1) | (Scenario::Test5Cov, 3) => {
                let others: f64 = [0, 1, 3, 4].iter().map(|&i| (x[i] - 2.5).powi(2)).sum();
                0.2 + 0.5 * others + 5.0 * c * (x[2] - 2.5).powi(2)
            }
            (Scenario::Test5Cov, 2) | (Scenario::Test5Cov, 4) => {
                0.2 + 0.5 * (x[0] + x[1] + 5.0 * c * x[2] + x[3] + x[4] - 25.0).powi(2)
            }
            (Scenario::Test5Cov, 5) => {
                let others: f64 = [0, 1, 3, 4]
                    .iter()
                    .map(|&i| (std::f64::consts::PI * x[i] / 2.0).sin())
                    .sum();
                0.2 + others + 10.0 * c * (std::f64::consts::PI * x[2] / 2.0).sin()
            }
            (Scenario::Test5Cov, 6) => {
                0.2 + sin2(x[0]) * sin2(x[1]) + 10.0 * c * sin2(x[2]) * sin2(x[3]) + sin2(x[4])
            }
            (Scenario::Test5Cov, 7) => {
                let others: f64 = [0, 1, 3, 4].iter().map(|&i| x[i]).sum();
                0.2 + 0.25 * others + 8.0 * c * x[2]
            }
            (Scenario::Test5Cov, 8) => {
                let others: f64 = [0, 1, 3, 4].iter().map(|&i| x[i]).sum();
                0.2 + c * x[2] * others
            }

            (Scenario::Select5Cov, 1) | (Scenario::Select5Cov, 3) => {
                2.0 * (x[0] - 2.5).powi(2)
                    + 2.0 * (x[2] - 2.5).powi(2)
                    + 2.0 * (x[3] - 2.5).powi(2)
            }
            (Scenario::Select5Cov, 2) | (Scenario::Select5Cov, 4) => {
                0.5 * (2.0 * x[0] + 2.0 * x[2] + 2.0 * x[3] - 15.0).powi(2)
            }
            (Scenario::Select5Cov, 5) => 8.0 * (sin2(x[0]) + sin2(x[2]) + sin2(x[3])),
            (Scenario::Select5Cov, 6) => 10.0 * sin2(x[0]) * sin2(x[2]) + 10.0 * sin2(x[3]),
            (Scenario::Select5Cov, 7) => 8.0 * (x[0] + x[2] + x[3]),
            (Scenario::Select5Cov, 8) => x[2] * (x[0] + x[3]),

            (Scenario::Select10Cov, 1) | (Scenario::Select10Cov, 3) => [0, 2, 3, 4, 8]
                .iter()
                .map(|&i| 2.0 * (x[i] - 2.5).powi(2))
                .sum(),
            (Scenario::Select10Cov, 2) => {
                let s: f64 = [0, 2, 3, 4, 8].iter().map(|&i| 2.0 * x[i]).sum();
                0.5 * (s - 25.0).powi(2)
            }
            (Scenario::Select10Cov, 4) => {
                let s: f64 = [0, 2, 3, 4, 8].iter().map(|&i| 2.0 * x[i]).sum();
                0.5 * (s - 15.0).powi(2)
            }
            (Scenario::Select10Cov, 5) => {
                [0, 2, 3, 4, 8].iter().map(|&i| 8.0 * sin2(x[i])).sum()
            }
            (Scenario::Select10Cov, 6) => {
                10.0 * sin2(x[0]) * sin2(x[2])
                    + 10.0 * sin2(x[3]) * sin2(x[4])
                    + 10.0 * sin2(x[8])
            }
            (Scenario::Select10Cov, 7) => [0, 2, 3, 4, 8].iter().map(|&i| 8.0 * x[i]).sum(),
            (Scenario::Select10Cov, 8) => (x[0] + x[3]) * x[2] + x[4] * x[8],

            _ => unreachable!("model_id validated in constructor"),
        };
        Ok(m)
    }
}

/// Volatility function of a covariate vector.
pub type VolFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Full specification of an ARCH(p)-m(X) data-generating process.
#[derive(Clone)]
pub struct ArchMxSpec {
    pub alpha: Vec<f64>,
    pub vol_fn: VolFn,
    pub shock: Shock,
    pub standardize_shocks: bool,
}

impl ArchMxSpec {
    pub fn new(alpha: Vec<f64>, vol_fn: VolFn, shock: Shock) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(&a) = alpha.iter().find(|&&a| !(a >= 0.0) || !a.is_finite()) {
            return Err(Error::NegativeAlpha(a));
        }
        shock.validate()?;
        Ok(Self {
            alpha,
            vol_fn,
            shock,
            standardize_shocks: false,
        })
    }

    pub fn from_model(model: &SimModel, shock: Shock) -> Result<Self> {
        let m = *model;
        Self::new(
            model.alpha(),
            Arc::new(move |x: &[f64]| m.eval_m(x).unwrap_or(f64::NAN)),
            shock,
        )
    }

    pub fn p(&self) -> usize {
        self.alpha.len()
    }
}

const OVERFLOW_LIMIT: f64 = 1e100;

/// Simulate the recursion sigma_t^2 = sum_j alpha_j eps_{t-j}^2 + m(X_{t-1}),
/// eps_t = z_t sigma_t. The returned series is aligned with `panel`: eps_t
/// pairs with the covariate row X_{t-1}. Burn-in covariates are drawn from
/// `law`, and the first `burnin` draws are discarded.
pub fn simulate_arch_mx(
    spec: &ArchMxSpec,
    panel: &CovariatePanel,
    law: &CovariateLaw,
    seed: u64,
    burnin: usize,
) -> Result<ReturnSeries> {
    if burnin < 100 {
        return Err(Error::InvalidBurnin(burnin));
    }
    if law.d != panel.d() {
        return Err(Error::DimensionMismatch {
            expected: panel.d(),
            got: law.d,
        });
    }
    let alpha_sum: f64 = spec.alpha.iter().sum();
    if alpha_sum >= 1.0 {
        log::warn!("sum of ARCH coefficients is {alpha_sum:.3} >= 1; recursion may explode");
    }
    let p = spec.p();
    let n = panel.n();
    let total = burnin + n;

    let burn_panel = sample_covariates(law, burnin, derive_seed(seed, &[1]))?;
    let shocks = sample_shocks(spec.shock, total, derive_seed(seed, &[2]), spec.standardize_shocks)?;

    let mean_vec = vec![law.mean; law.d];
    let m_at_mean = (spec.vol_fn)(&mean_vec);
    // Unconditional approximation for the presample level, floored so that
    // zero-at-the-mean volatility functions still start positive.
    let init_var = if alpha_sum < 0.999 {
        (m_at_mean / (1.0 - alpha_sum)).max(0.1)
    } else {
        m_at_mean.max(0.1)
    };

    let row_at = |t: usize| -> &[f64] {
        if t < burnin {
            burn_panel.row(t)
        } else {
            panel.row(t - burnin)
        }
    };

    let mut eps_sq = vec![init_var; p]; // ring of the last p squared values
    let mut out = Vec::with_capacity(total);
    for t in 0..total {
        let m = if t == 0 {
            m_at_mean.max(init_var)
        } else {
            (spec.vol_fn)(row_at(t - 1))
        };
        if !m.is_finite() {
            return Err(Error::NonPositiveVolatility { t });
        }
        // linear benchmark variance functions can dip slightly below zero in
        // the tails of the covariate law; the variance component is clamped
        let mut sigma2 = m.max(0.0);
        for j in 0..p {
            sigma2 += spec.alpha[j] * eps_sq[(t + p - 1 - j) % p];
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::NonPositiveVolatility { t });
        }
        let eps = shocks[t] * sigma2.sqrt();
        if !eps.is_finite() || eps.abs() > OVERFLOW_LIMIT {
            return Err(Error::Overflow { t });
        }
        eps_sq[t % p] = eps * eps;
        out.push(eps);
    }
    ReturnSeries::new(out.split_off(burnin))
}

/// Convenience wrapper used by the Monte Carlo harness and the CLI:
/// sample covariates for one of the benchmark models, run the recursion,
/// and return the aligned (series, panel) pair of length `n`.
pub fn simulate_dataset(
    model: &SimModel,
    rho: f64,
    n: usize,
    burnin: usize,
    shock: Shock,
    standardize_shocks: bool,
    seed: u64,
) -> Result<(ReturnSeries, CovariatePanel)> {
    let law = CovariateLaw::new(model.d(), 2.5, rho)?;
    let panel = sample_covariates(&law, n, derive_seed(seed, &[10]))?;
    let mut spec = ArchMxSpec::from_model(model, shock)?;
    spec.standardize_shocks = standardize_shocks;
    let series = simulate_arch_mx(&spec, &panel, &law, derive_seed(seed, &[11]), burnin)?;
    Ok((series, panel))
}
