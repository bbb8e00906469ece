//! Maximum-likelihood fitting of the Weibull and exponential models to
//! record data, and the nonparametric MLE of the survival function.
//!
//! For records `(r_i, k_i)` from `W(alpha, sigma)` the log-likelihood is
//!
//! ```text
//! l = m ln(alpha) - m alpha ln(sigma) + (alpha - 1) sum ln r_i - sigma^-alpha sum k_i r_i^alpha
//! ```
//!
//! Profiling out `sigma` gives `sigma^alpha = (1/m) sum k_i r_i^alpha`, and the
//! shape solves `h(alpha) = (1/m) sum ln r_i` with
//! `h(alpha) = sum k_i r_i^alpha ln r_i / sum k_i r_i^alpha - 1/alpha`.
//! `h` is strictly increasing, so the root is bracketed and bisected.

use serde::{Deserialize, Serialize};

use crate::dist::{ExponentialParams, WeibullParams};
use crate::error::{Error, Result};
use crate::records::RecordSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once `|h(alpha) - target| <= tol`.
    pub tol: f64,
    pub max_iterations: usize,
    pub max_expansions: usize,
    pub initial_bracket: (f64, f64),
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iterations: 200,
            max_expansions: 60,
            initial_bracket: (0.5, 2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullFit {
    pub params: WeibullParams,
    pub loglik: f64,
    /// Bisection steps taken after bracketing.
    pub iterations: usize,
    pub bracket: (f64, f64),
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialFit {
    pub params: ExponentialParams,
    pub loglik: f64,
}

/// Serializable summary of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub alpha: f64,
    pub sigma: f64,
    pub loglik: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl From<&WeibullFit> for FitReport {
    fn from(fit: &WeibullFit) -> Self {
        FitReport {
            model: "weibull".into(),
            alpha: fit.params.alpha,
            sigma: fit.params.sigma,
            loglik: fit.loglik,
            iterations: fit.iterations,
            residual: fit.residual,
        }
    }
}

impl From<&ExponentialFit> for FitReport {
    fn from(fit: &ExponentialFit) -> Self {
        FitReport {
            model: "exponential".into(),
            alpha: 1.0,
            sigma: fit.params.sigma,
            loglik: fit.loglik,
            iterations: 0,
            residual: 0.0,
        }
    }
}

/// Record log-likelihood of `W(alpha, sigma)`.
pub fn weibull_loglik(rs: &RecordSample, p: &WeibullParams) -> f64 {
    let m = rs.m() as f64;
    let ln_sigma = p.sigma.ln();
    let (sum_ln_r, sum_hazard) = rs.records().iter().fold((0.0, 0.0), |(a, b), rec| {
        let ln_r = rec.r.ln();
        (a + ln_r, b + rec.k as f64 * (p.alpha * (ln_r - ln_sigma)).exp())
    });
    m * p.alpha.ln() - m * p.alpha * ln_sigma + (p.alpha - 1.0) * sum_ln_r - sum_hazard
}

/// Record log-likelihood of `Exp(sigma)`.
pub fn exponential_loglik(rs: &RecordSample, p: &ExponentialParams) -> f64 {
    let m = rs.m() as f64;
    let total: f64 = rs.records().iter().map(|rec| rec.k as f64 * rec.r).sum();
    -m * p.sigma.ln() - total / p.sigma
}

/// The exponential MLE `sigma_0 = sum k_i r_i / m`.
pub fn fit_exponential(rs: &RecordSample) -> Result<ExponentialFit> {
    let m = rs.m();
    if m == 0 {
        return Err(Error::InsufficientRecords { needed: 1, got: 0 });
    }
    let total: f64 = rs.records().iter().map(|rec| rec.k as f64 * rec.r).sum();
    let sigma = total / m as f64;
    let params = ExponentialParams::new(sigma)?;
    Ok(ExponentialFit {
        params,
        loglik: -(m as f64) * sigma.ln() - m as f64,
    })
}

/// Precomputed logs for repeated evaluation of the shape equation.
struct ShapeEquation {
    ln_r: Vec<f64>,
    weights: Vec<f64>,
    max_ln_r: f64,
    mean_ln_r: f64,
}

impl ShapeEquation {
    fn new(rs: &RecordSample) -> Self {
        let ln_r: Vec<f64> = rs.values().map(f64::ln).collect();
        let weights = rs.counts().map(|k| k as f64).collect();
        let max_ln_r = ln_r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean_ln_r = ln_r.iter().sum::<f64>() / ln_r.len() as f64;
        Self {
            ln_r,
            weights,
            max_ln_r,
            mean_ln_r,
        }
    }

    /// Weighted mean of `values` under weights `k_i r_i^alpha`. The powers are
    /// scaled by `exp(-alpha max ln r)`, which cancels in the ratio.
    fn tilted_mean(&self, alpha: f64, values: impl Iterator<Item = f64>) -> f64 {
        let (num, den) = self
            .ln_r
            .iter()
            .zip(&self.weights)
            .zip(values)
            .fold((0.0, 0.0), |(num, den), ((&lr, &k), v)| {
                let w = k * (alpha * (lr - self.max_ln_r)).exp();
                (num + w * v, den + w)
            });
        num / den
    }

    fn h(&self, alpha: f64) -> f64 {
        self.tilted_mean(alpha, self.ln_r.iter().copied()) - 1.0 / alpha
    }

    /// `h(alpha) - mean ln r`, evaluated on centred logs.
    fn excess(&self, alpha: f64) -> f64 {
        let centred = self.ln_r.iter().map(|lr| lr - self.mean_ln_r);
        self.tilted_mean(alpha, centred) - 1.0 / alpha
    }

    /// `sigma = {(1/m) sum k_i r_i^alpha}^(1/alpha)`.
    fn scale(&self, alpha: f64) -> f64 {
        let m = self.ln_r.len() as f64;
        let scaled: f64 = self
            .ln_r
            .iter()
            .zip(&self.weights)
            .map(|(&lr, &k)| k * (alpha * (lr - self.max_ln_r)).exp())
            .sum();
        (self.max_ln_r + (scaled / m).ln() / alpha).exp()
    }
}

/// `h(alpha)` for the given records.
pub fn h_alpha(rs: &RecordSample, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "shape must be finite and positive, got {alpha}"
        )));
    }
    let value = ShapeEquation::new(rs).h(alpha);
    if !value.is_finite() {
        return Err(Error::SolverRange {
            lo: alpha,
            hi: alpha,
            expansions: 0,
        });
    }
    Ok(value)
}

pub fn fit_weibull(rs: &RecordSample) -> Result<WeibullFit> {
    fit_weibull_with(rs, &SolverOptions::default())
}

pub fn fit_weibull_with(rs: &RecordSample, opts: &SolverOptions) -> Result<WeibullFit> {
    let m = rs.m();
    if m < 2 {
        return Err(Error::InsufficientRecords { needed: 2, got: m });
    }
    let eq = ShapeEquation::new(rs);
    let g = |alpha: f64| eq.excess(alpha);

    let (mut lo, mut hi) = opts.initial_bracket;
    let (mut g_lo, mut g_hi) = (g(lo), g(hi));
    let mut expansions = 0;
    while !(g_lo <= 0.0 && g_hi >= 0.0) {
        if expansions == opts.max_expansions || !(g_lo.is_finite() && g_hi.is_finite()) {
            return Err(Error::SolverRange { lo, hi, expansions });
        }
        if g_lo > 0.0 {
            hi = lo;
            g_hi = g_lo;
            lo *= 0.5;
            g_lo = g(lo);
        } else {
            lo = hi;
            g_lo = g_hi;
            hi *= 2.0;
            g_hi = g(hi);
        }
        expansions += 1;
    }
    let bracket = (lo, hi);

    let (mut best, mut best_g) = if g_lo.abs() <= g_hi.abs() {
        (lo, g_lo)
    } else {
        (hi, g_hi)
    };
    let mut iterations = 0;
    while best_g.abs() > opts.tol && iterations < opts.max_iterations {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let g_mid = g(mid);
        if g_mid.abs() < best_g.abs() {
            best = mid;
            best_g = g_mid;
        }
        if g_mid < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best_g.is_nan() || best_g.abs() > opts.tol {
        return Err(Error::NonConvergence {
            iterations,
            residual: best_g.abs(),
        });
    }

    let params = WeibullParams::new(best, eq.scale(best))?;
    Ok(WeibullFit {
        params,
        loglik: weibull_loglik(rs, &params),
        iterations,
        bracket,
        residual: best_g.abs(),
    })
}

/// One evaluation of the log-likelihood surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub sigma: f64,
    pub loglik: f64,
}

/// Log-likelihood on a `steps x steps` grid spanning the given ranges
/// (inclusive), alpha varying slowest.
pub fn loglik_grid(
    rs: &RecordSample,
    alpha_range: (f64, f64),
    sigma_range: (f64, f64),
    steps: usize,
) -> Result<Vec<GridPoint>> {
    if steps < 2 {
        return Err(Error::InvalidParameter("grid needs at least 2 steps".into()));
    }
    WeibullParams::new(alpha_range.0, sigma_range.0)?;
    WeibullParams::new(alpha_range.1, sigma_range.1)?;
    let lerp = |(a, b): (f64, f64), i: usize| a + (b - a) * i as f64 / (steps - 1) as f64;
    let mut out = Vec::with_capacity(steps * steps);
    for i in 0..steps {
        let alpha = lerp(alpha_range, i);
        for j in 0..steps {
            let sigma = lerp(sigma_range, j);
            let loglik = weibull_loglik(rs, &WeibullParams { alpha, sigma });
            out.push(GridPoint {
                alpha,
                sigma,
                loglik,
            });
        }
    }
    Ok(out)
}

/// Nonparametric MLE of the survival function from record data: a right
/// continuous step function with jumps at the ordered record values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalStep {
    /// Ordered record values `r_(1) <= ... <= r_(m)`.
    pub jumps: Vec<f64>,
    /// `phi_i = (T_i - 1) / T_i` with `T_i = sum_{j >= i} k_(j)`.
    pub phi: Vec<f64>,
    /// `S_(i) = phi_1 ... phi_i`.
    pub surv: Vec<f64>,
}

impl SurvivalStep {
    fn from_ordered(jumps: Vec<f64>, k_ord: &[u64]) -> Self {
        let mut phi = vec![0.0; k_ord.len()];
        let mut tail = 0u64;
        for (i, &k) in k_ord.iter().enumerate().rev() {
            tail += k;
            phi[i] = (tail - 1) as f64 / tail as f64;
        }
        let surv = phi
            .iter()
            .scan(1.0, |s, &p| {
                *s *= p;
                Some(*s)
            })
            .collect();
        Self { jumps, phi, surv }
    }

    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    /// Survival level on the segment `[r_(i-1), r_(i))` for `i` in
    /// `1..=m+1`, i.e. `S_(i-1)` with `S_(0) = 1`.
    pub fn level_before(&self, i: usize) -> f64 {
        if i <= 1 {
            1.0
        } else {
            self.surv[i - 2]
        }
    }

    /// Evaluates the step function at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let passed = self.jumps.partition_point(|&r| r <= x);
        self.level_before(passed + 1)
    }
}

pub fn npmle(rs: &RecordSample) -> SurvivalStep {
    let view = rs.ordered_view();
    SurvivalStep::from_ordered(view.r_ord, &view.k_ord)
}

/// NPMLE from several independent record samples: all records are pooled,
/// ordered, and carry their own counts into the product.
pub fn npmle_pooled(samples: &[RecordSample]) -> Result<SurvivalStep> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples to pool".into()));
    }
    let mut pooled: Vec<(f64, u64)> = samples
        .iter()
        .flat_map(|rs| rs.records().iter().map(|rec| (rec.r, rec.k)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (jumps, counts): (Vec<f64>, Vec<u64>) = pooled.into_iter().unzip();
    Ok(SurvivalStep::from_ordered(jumps, &counts))
}
