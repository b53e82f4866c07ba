//! B-spline sieve estimator for the covariate part of the variance, fitted
//! jointly with the ARCH coefficients by Gaussian quasi-likelihood.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Configuration of the tensor-product B-spline sieve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineConfig {
    /// Spline order per dimension (order = degree + 1; 4 = cubic).
    pub orders: Vec<usize>,
    /// Number of interior knots per dimension.
    pub interior_knots: Vec<usize>,
    /// Maximum optimizer iterations per start.
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_max_iter() -> usize {
    2000
}

impl Default for SplineConfig {
    fn default() -> Self {
        Self {
            orders: vec![4],
            interior_knots: vec![2],
            max_iter: default_max_iter(),
        }
    }
}

impl SplineConfig {
    pub fn cubic(d: usize, interior: usize) -> Self {
        Self {
            orders: vec![4; d],
            interior_knots: vec![interior; d],
            max_iter: default_max_iter(),
        }
    }
}

pub(crate) const MAX_SPLINE_DIM: usize = 2;
pub(crate) const SIGMA2_FLOOR: f64 = 1e-8;

/// Evaluate all B-spline basis functions of the given order at `x` by the
/// Cox-de Boor recursion. `knots` is the full clamped knot vector; the
/// number of basis functions is `knots.len() - order`.
pub fn bspline_basis(knots: &[f64], order: usize, x: f64) -> Vec<f64> {
    let nb = knots.len() - order;
    let x = x.clamp(knots[0], knots[knots.len() - 1]);
    // order-1 (piecewise constant) initialization
    let mut b = vec![0.0; knots.len() - 1];
    for i in 0..knots.len() - 1 {
        let last = knots[i] < knots[knots.len() - 1] && knots[i + 1] >= knots[knots.len() - 1];
        if (knots[i] <= x && x < knots[i + 1]) || (last && x >= knots[knots.len() - 1]) {
            b[i] = 1.0;
        }
    }
    for k in 2..=order {
        for i in 0..knots.len() - k {
            let left = knots[i + k - 1] - knots[i];
            let right = knots[i + k] - knots[i + 1];
            let mut v = 0.0;
            if left > 0.0 {
                v += (x - knots[i]) / left * b[i];
            }
            if right > 0.0 {
                v += (knots[i + k] - x) / right * b[i + 1];
            }
            b[i] = v;
        }
    }
    b.truncate(nb);
    b
}

/// Clamped knot vector on [0, 1] with interior knots at quantiles of the
/// rescaled sample.
fn build_knots(scaled: &[f64], order: usize, interior: usize) -> Result<Vec<f64>> {
    if order < 2 {
        return Err(Error::InvalidKnots(format!("order {order} < 2")));
    }
    let mut sorted = scaled.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut knots = vec![0.0; order];
    for k in 1..=interior {
        let q = k as f64 / (interior + 1) as f64;
        let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
        knots.push(sorted[idx].clamp(0.0, 1.0));
    }
    knots.extend(std::iter::repeat(1.0).take(order));
    // interior knots must be nondecreasing and strictly inside (0, 1) is not
    // required, but duplicates beyond the multiplicity of the ends are
    // collapsed implicitly by the recursion guards.
    for w in knots.windows(2) {
        if w[1] < w[0] {
            return Err(Error::InvalidKnots("knots not nondecreasing".into()));
        }
    }
    Ok(knots)
}

/// Fitted tensor-product spline representation of the covariate part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineBasis {
    pub knots: Vec<Vec<f64>>,
    pub orders: Vec<usize>,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl SplineBasis {
    /// Build the basis from the covariate rows used in estimation.
    pub fn from_rows(rows: &[Vec<f64>], cfg: &SplineConfig) -> Result<Self> {
        let d = rows.first().map(|r| r.len()).ok_or(Error::EmptyInput)?;
        if d > MAX_SPLINE_DIM {
            return Err(Error::DimensionTooHigh {
                d,
                max: MAX_SPLINE_DIM,
            });
        }
        if cfg.orders.len() != d || cfg.interior_knots.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: cfg.orders.len(),
            });
        }
        let mut mins = vec![f64::INFINITY; d];
        let mut maxs = vec![f64::NEG_INFINITY; d];
        for r in rows {
            for j in 0..d {
                mins[j] = mins[j].min(r[j]);
                maxs[j] = maxs[j].max(r[j]);
            }
        }
        for j in 0..d {
            if !(maxs[j] > mins[j]) {
                return Err(Error::DegenerateColumn(format!("column {}", j + 1)));
            }
        }
        let mut knots = Vec::with_capacity(d);
        for j in 0..d {
            let scaled: Vec<f64> = rows
                .iter()
                .map(|r| (r[j] - mins[j]) / (maxs[j] - mins[j]))
                .collect();
            knots.push(build_knots(&scaled, cfg.orders[j], cfg.interior_knots[j])?);
        }
        let basis = Self {
            knots,
            orders: cfg.orders.clone(),
            mins,
            maxs,
        };
        let k = basis.size();
        if 5 * k >= rows.len() {
            return Err(Error::BasisTooLarge { k, n: rows.len() });
        }
        Ok(basis)
    }

    /// Total number of tensor-product basis functions.
    pub fn size(&self) -> usize {
        (0..self.knots.len())
            .map(|j| self.knots[j].len() - self.orders[j])
            .product()
    }

    /// Tensor-product basis row at a covariate vector (original scale).
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let d = self.knots.len();
        let per_dim: Vec<Vec<f64>> = (0..d)
            .map(|j| {
                let u = (x[j] - self.mins[j]) / (self.maxs[j] - self.mins[j]);
                bspline_basis(&self.knots[j], self.orders[j], u.clamp(0.0, 1.0))
            })
            .collect();
        match d {
            1 => per_dim.into_iter().next().unwrap(),
            2 => {
                let (a, b) = (&per_dim[0], &per_dim[1]);
                let mut out = Vec::with_capacity(a.len() * b.len());
                for ai in a {
                    for bj in b {
                        out.push(ai * bj);
                    }
                }
                out
            }
            _ => unreachable!("dimension checked at construction"),
        }
    }
}

/// Result of the quasi-maximum-likelihood spline fit.
#[derive(Debug, Clone)]
pub struct SplineFit {
    pub alpha: Vec<f64>,
    pub theta: Vec<f64>,
    pub basis: SplineBasis,
    pub objective: f64,
    pub iterations: usize,
}

/// Gaussian quasi-likelihood objective (1/n) sum(y_t / s2_t + ln s2_t) and
/// the predicted variances, given eps^2 lags `lags` (row t = lags 1..p of
/// observation t) and pre-evaluated basis rows.
fn objective(
    y: &[f64],
    lags: &[Vec<f64>],
    basis_rows: &[Vec<f64>],
    alpha: &[f64],
    theta: &[f64],
    s2: &mut [f64],
) -> f64 {
    let n = y.len() as f64;
    let mut obj = 0.0;
    for t in 0..y.len() {
        let mut v: f64 = lags[t].iter().zip(alpha).map(|(l, a)| l * a).sum();
        v += basis_rows[t].iter().zip(theta).map(|(b, th)| b * th).sum::<f64>();
        let s = v.max(SIGMA2_FLOOR);
        s2[t] = s;
        obj += y[t] / s + s.ln();
    }
    obj / n
}

fn gradient(
    y: &[f64],
    lags: &[Vec<f64>],
    basis_rows: &[Vec<f64>],
    alpha: &[f64],
    s2: &[f64],
    g_alpha: &mut [f64],
    g_theta: &mut [f64],
) {
    let n = y.len() as f64;
    g_alpha.iter_mut().for_each(|g| *g = 0.0);
    g_theta.iter_mut().for_each(|g| *g = 0.0);
    for t in 0..y.len() {
        let s = s2[t];
        // at the floor the objective is locally flat in the parameters
        if s <= SIGMA2_FLOOR {
            continue;
        }
        let w = (1.0 / s - y[t] / (s * s)) / n;
        for (g, l) in g_alpha.iter_mut().zip(&lags[t]) {
            *g += w * l;
        }
        for (g, b) in g_theta.iter_mut().zip(&basis_rows[t]) {
            *g += w * b;
        }
    }
    let _ = alpha;
}

fn project(v: &mut [f64]) {
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// Projected-gradient descent with Barzilai-Borwein steps and an Armijo
/// backtracking safeguard, from one starting point.
#[allow(clippy::too_many_arguments)]
fn optimize_from(
    y: &[f64],
    lags: &[Vec<f64>],
    basis_rows: &[Vec<f64>],
    mut alpha: Vec<f64>,
    mut theta: Vec<f64>,
    max_iter: usize,
) -> Option<(Vec<f64>, Vec<f64>, f64, usize)> {
    let p = alpha.len();
    let k = theta.len();
    let mut s2 = vec![0.0; y.len()];
    let mut obj = objective(y, lags, basis_rows, &alpha, &theta, &mut s2);
    if !obj.is_finite() {
        return None;
    }
    let mut ga = vec![0.0; p];
    let mut gt = vec![0.0; k];
    gradient(y, lags, basis_rows, &alpha, &s2, &mut ga, &mut gt);

    let mut step = 1.0;
    let mut prev_a = alpha.clone();
    let mut prev_t = theta.clone();
    let mut prev_ga = ga.clone();
    let mut prev_gt = gt.clone();
    let mut iters = 0;

    for it in 0..max_iter {
        iters = it + 1;
        // candidate with Armijo backtracking on the projected step
        let mut accepted = false;
        let mut trial = step;
        for _ in 0..40 {
            let mut ca: Vec<f64> = alpha.iter().zip(&ga).map(|(a, g)| a - trial * g).collect();
            let mut ct: Vec<f64> = theta.iter().zip(&gt).map(|(t, g)| t - trial * g).collect();
            project(&mut ca);
            let c_obj = {
                let mut tmp = vec![0.0; y.len()];
                let o = objective(y, lags, basis_rows, &ca, &ct, &mut tmp);
                if o.is_finite() {
                    s2.copy_from_slice(&tmp);
                    o
                } else {
                    f64::INFINITY
                }
            };
            let decrease: f64 = alpha
                .iter()
                .zip(&ca)
                .map(|(a, c)| (a - c).powi(2))
                .chain(theta.iter().zip(&ct).map(|(t, c)| (t - c).powi(2)))
                .sum();
            if c_obj <= obj - 1e-4 / trial.max(1e-12) * decrease {
                prev_a.copy_from_slice(&alpha);
                prev_t.copy_from_slice(&theta);
                std::mem::swap(&mut alpha, &mut ca);
                std::mem::swap(&mut theta, &mut ct);
                let improved = obj - c_obj;
                obj = c_obj;
                accepted = true;
                if improved < 1e-12 * (1.0 + obj.abs()) {
                    return Some((alpha, theta, obj, iters));
                }
                break;
            }
            trial *= 0.5;
        }
        if !accepted {
            return Some((alpha, theta, obj, iters));
        }

        prev_ga.copy_from_slice(&ga);
        prev_gt.copy_from_slice(&gt);
        gradient(y, lags, basis_rows, &alpha, &s2, &mut ga, &mut gt);

        // Barzilai-Borwein step length for the next iteration
        let mut sy = 0.0;
        let mut ss = 0.0;
        for i in 0..p {
            let ds = alpha[i] - prev_a[i];
            let dg = ga[i] - prev_ga[i];
            sy += ds * dg;
            ss += ds * ds;
        }
        for i in 0..k {
            let ds = theta[i] - prev_t[i];
            let dg = gt[i] - prev_gt[i];
            sy += ds * dg;
            ss += ds * ds;
        }
        step = if sy > 1e-300 {
            (ss / sy).clamp(1e-8, 1e8)
        } else {
            1.0
        };
    }
    Some((alpha, theta, obj, iters))
}

/// Ridge least-squares starting value for theta given fixed alpha: regress
/// the ARCH-adjusted response on the basis rows.
fn ridge_theta(y: &[f64], lags: &[Vec<f64>], basis_rows: &[Vec<f64>], alpha: &[f64]) -> Option<Vec<f64>> {
    let k = basis_rows[0].len();
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for t in 0..y.len() {
        let r = y[t] - lags[t].iter().zip(alpha).map(|(l, a)| l * a).sum::<f64>();
        for i in 0..k {
            for j in 0..=i {
                xtx[i][j] += basis_rows[t][i] * basis_rows[t][j];
            }
            xty[i] += basis_rows[t][i] * r;
        }
    }
    for i in 0..k {
        for j in 0..i {
            xtx[j][i] = xtx[i][j];
        }
        xtx[i][i] += 1e-6 * (1.0 + xtx[i][i]);
    }
    linalg::solve_spd(&xtx, &xty)
}

/// Fit (alpha, theta) by quasi-maximum likelihood with multiple starting
/// points, keeping the best finite optimum.
pub fn fit_spline_qmle(
    y: &[f64],
    lags: &[Vec<f64>],
    rows: &[Vec<f64>],
    cfg: &SplineConfig,
) -> Result<SplineFit> {
    if y.is_empty() || lags.len() != y.len() || rows.len() != y.len() {
        return Err(Error::EmptyInput);
    }
    let basis = SplineBasis::from_rows(rows, cfg)?;
    let basis_rows: Vec<Vec<f64>> = rows.iter().map(|r| basis.eval(r)).collect();
    let p = lags[0].len();
    let k = basis.size();
    let ybar = y.iter().sum::<f64>() / y.len() as f64;

    let mut best: Option<(Vec<f64>, Vec<f64>, f64, usize)> = None;
    for &a0 in &[0.05_f64, 0.2, 0.4] {
        let alpha0 = vec![a0 / p as f64; p];
        let mut starts: Vec<Vec<f64>> = Vec::new();
        if let Some(th) = ridge_theta(y, lags, &basis_rows, &alpha0) {
            let mut th = th;
            project(&mut th);
            starts.push(th);
        }
        // partition-of-unity fallback: constant theta reproduces a flat m
        starts.push(vec![(ybar * (1.0 - a0)).max(0.01); k]);
        for theta0 in starts {
            if let Some(out) = optimize_from(y, lags, &basis_rows, alpha0.clone(), theta0, cfg.max_iter)
            {
                if out.2.is_finite()
                    && best.as_ref().map(|b| out.2 < b.2).unwrap_or(true)
                {
                    best = Some(out);
                }
            }
        }
    }
    let (alpha, theta, objective, iterations) = best.ok_or(Error::OptimizerDiverged)?;
    Ok(SplineFit {
        alpha,
        theta,
        basis,
        objective,
        iterations,
    })
}
