//! Goodness-of-fit statistics for record data and the likelihood-ratio test
//! of exponentiality.
//!
//! The three distances compare the record NPMLE `S` of the survival function
//! with a hypothesized model `F0`:
//!
//! * `D`  - Kolmogorov-Smirnov type supremum distance,
//! * `W2` - Cramer-von Mises type, `n int (S - (1 - F0))^2 dF0`,
//! * `DS` - the same integrand weighted by `1 / F0`, which emphasises the
//!   left tail where records carry most of their information.
//!
//! `S` is constant between ordered records, so all three reduce to finite
//! sums over the `m + 1` segments `[r_(i-1), r_(i))`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::dist::Lifetime;
use crate::error::{Error, Result};
use crate::estimate::{fit_exponential, fit_weibull, npmle, SurvivalStep, WeibullFit};
use crate::mc::CriticalTable;
use crate::quad;
use crate::records::RecordSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Ks,
    Cm,
    Ds,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Statistic::Ks, Statistic::Cm, Statistic::Ds];

    pub fn as_str(&self) -> &'static str {
        match self {
            Statistic::Ks => "ks",
            Statistic::Cm => "cm",
            Statistic::Ds => "ds",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ks" => Ok(Statistic::Ks),
            "cm" => Ok(Statistic::Cm),
            "ds" => Ok(Statistic::Ds),
            other => Err(Error::InvalidParameter(format!("unknown statistic {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofStatistics {
    pub d_n: f64,
    pub w2_n: f64,
    pub ds_n: f64,
    /// Multiplier used for the two integrated statistics.
    pub n: u64,
}

impl GofStatistics {
    pub fn get(&self, statistic: Statistic) -> f64 {
        match statistic {
            Statistic::Ks => self.d_n,
            Statistic::Cm => self.w2_n,
            Statistic::Ds => self.ds_n,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.d_n.is_finite() && self.w2_n.is_finite() && self.ds_n.is_finite()
    }
}

/// `1 - F0(r_(i))` for `i = 0..=m+1`.
fn model_survival_at_bounds<M: Lifetime>(step: &SurvivalStep, model: &M) -> Vec<f64> {
    std::iter::once(1.0)
        .chain(step.jumps.iter().map(|&r| model.survival(r)))
        .chain(std::iter::once(0.0))
        .collect()
}

pub(crate) fn ks_from_step<M: Lifetime>(step: &SurvivalStep, model: &M) -> f64 {
    (1..=step.len())
        .map(|i| {
            let fbar = model.survival(step.jumps[i - 1]);
            (step.level_before(i) - fbar).max(fbar - step.level_before(i + 1))
        })
        .fold(0.0, f64::max)
}

pub(crate) fn cm_from_step<M: Lifetime>(step: &SurvivalStep, model: &M, n: u64) -> f64 {
    let fbar = model_survival_at_bounds(step, model);
    let sum: f64 = (1..=step.len() + 1)
        .map(|i| {
            let s = step.level_before(i);
            (s - fbar[i]).powi(3) - (s - fbar[i - 1]).powi(3)
        })
        .sum();
    n as f64 / 3.0 * sum
}

pub(crate) fn ds_from_step<M: Lifetime>(step: &SurvivalStep, model: &M, n: u64) -> Result<f64> {
    let m = step.len();
    let fbar = model_survival_at_bounds(step, model);
    let ln_cdf = |i: usize| -> f64 {
        match i {
            0 => f64::NEG_INFINITY,
            i if i > m => 0.0,
            i => model.ln_cdf(step.jumps[i - 1]),
        }
    };
    let mut sum = 0.5;
    for i in 1..=m + 1 {
        let a = step.level_before(i) - 1.0;
        if a == 0.0 {
            // Includes the first segment, where 0 * ln F0(0) is taken as 0.
            continue;
        }
        let d_ln = ln_cdf(i) - ln_cdf(i - 1);
        // F0(r_(i)) - F0(r_(i-1)) in survival form.
        let d_cdf = fbar[i - 1] - fbar[i];
        sum += a * a * d_ln + 2.0 * a * d_cdf;
    }
    let value = n as f64 * sum;
    if !value.is_finite() {
        return Err(Error::NonFinite("DS statistic"));
    }
    Ok(value)
}

/// Kolmogorov-Smirnov type distance over `(0, r_(m)]`:
/// `max_i max{S_(i-1) - F0bar(r_(i)), F0bar(r_(i)) - S_(i)}`.
pub fn ks_statistic<M: Lifetime>(rs: &RecordSample, model: &M) -> f64 {
    ks_from_step(&npmle(rs), model)
}

/// Cramer-von Mises type statistic with multiplier `n`.
pub fn cm_statistic<M: Lifetime>(rs: &RecordSample, model: &M, n: u64) -> f64 {
    cm_from_step(&npmle(rs), model, n)
}

/// Left-tail weighted statistic with multiplier `n`.
pub fn ds_statistic<M: Lifetime>(rs: &RecordSample, model: &M, n: u64) -> Result<f64> {
    ds_from_step(&npmle(rs), model, n)
}

/// All three statistics against `model`, with the sample's own `n`.
pub fn gof_statistics<M: Lifetime>(rs: &RecordSample, model: &M) -> Result<GofStatistics> {
    statistics_from_step(&npmle(rs), model, rs.n())
}

pub(crate) fn statistics_from_step<M: Lifetime>(
    step: &SurvivalStep,
    model: &M,
    n: u64,
) -> Result<GofStatistics> {
    Ok(GofStatistics {
        d_n: ks_from_step(step, model),
        w2_n: cm_from_step(step, model, n),
        ds_n: ds_from_step(step, model, n)?,
        n,
    })
}

/// Fits the Weibull model and evaluates the statistics against the fit.
pub fn fitted_gof_statistics(rs: &RecordSample) -> Result<(WeibullFit, GofStatistics)> {
    let fit = fit_weibull(rs)?;
    let stats = gof_statistics(rs, &fit.params)?;
    Ok((fit, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralKind {
    Cm,
    Ds,
}

/// Evaluates the defining integral of `W2` or `DS` numerically, substituting
/// `u = F0(x)` and integrating segment by segment with the NPMLE evaluated
/// at `x = F0^-1(u)`. Absolute tolerance `1e-9` on the final value.
pub fn gof_quadrature_oracle<M: Lifetime>(
    rs: &RecordSample,
    model: &M,
    n: u64,
    kind: IntegralKind,
) -> Result<f64> {
    let step = npmle(rs);
    let mut cuts: Vec<f64> = std::iter::once(0.0)
        .chain(step.jumps.iter().map(|&r| model.cdf(r)))
        .chain(std::iter::once(1.0))
        .collect();
    cuts.dedup();
    let pieces = (cuts.len() - 1) as f64;
    let tol = 1e-9 / (n as f64 * pieces);
    let integrand = |u: f64| {
        let gap = step.eval(model.quantile(u)) - (1.0 - u);
        match kind {
            IntegralKind::Cm => gap * gap,
            IntegralKind::Ds => gap * gap / u,
        }
    };
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += quad::integrate(integrand, w[0], w[1], tol)?;
    }
    Ok(n as f64 * total)
}

/// Upper tail of the chi-square distribution with one degree of freedom.
pub fn chi2_1_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    erfc((0.5 * x).sqrt())
}

/// Quantile of the chi-square distribution with one degree of freedom.
pub fn chi2_1_quantile(p: f64) -> f64 {
    let z = erfc_inv(1.0 - p);
    2.0 * z * z
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlrResult {
    pub lambda: f64,
    pub neg2loglambda: f64,
    pub p_value: f64,
    pub sigma0: f64,
    pub weibull_fit: WeibullFit,
}

impl GlrResult {
    /// `C* = exp{-chi2_(1, 1-gamma) / 2}`.
    pub fn critical_lambda(gamma: f64) -> f64 {
        (-0.5 * chi2_1_quantile(1.0 - gamma)).exp()
    }

    /// Rejects `alpha = 1` at level `gamma` iff `lambda < C*`.
    pub fn rejects(&self, gamma: f64) -> bool {
        self.lambda < Self::critical_lambda(gamma)
    }

    pub fn report(&self, gamma: f64) -> TestReport {
        TestReport {
            statistic: "glr".into(),
            value: self.neg2loglambda,
            gamma,
            critical: chi2_1_quantile(1.0 - gamma),
            reject: self.rejects(gamma),
            p_value: Some(self.p_value),
        }
    }
}

/// Generalized likelihood-ratio test of `alpha = 1` within the Weibull
/// family, computed as a log-likelihood difference.
pub fn glr_test(rs: &RecordSample) -> Result<GlrResult> {
    let weibull_fit = fit_weibull(rs)?;
    let exp_fit = fit_exponential(rs)?;
    let ln_lambda = exp_fit.loglik - weibull_fit.loglik;
    let neg2loglambda = -2.0 * ln_lambda;
    Ok(GlrResult {
        lambda: ln_lambda.exp(),
        neg2loglambda,
        p_value: chi2_1_sf(neg2loglambda),
        sigma0: exp_fit.params.sigma,
        weibull_fit,
    })
}

/// `ln Lambda` from the closed product form
/// `(sum k r^a / sum k r)^m (a^m (prod r)^(a-1))^-1`, evaluated in logs.
pub fn glr_log_lambda_product_form(rs: &RecordSample, alpha_hat: f64) -> f64 {
    let m = rs.m() as f64;
    let ln_r: Vec<f64> = rs.values().map(f64::ln).collect();
    let max_ln_r = ln_r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ln_sum_pow = max_ln_r * alpha_hat
        + rs
            .counts()
            .zip(&ln_r)
            .map(|(k, &lr)| k as f64 * (alpha_hat * (lr - max_ln_r)).exp())
            .sum::<f64>()
            .ln();
    let ln_sum_lin = rs.records().iter().map(|rec| rec.k as f64 * rec.r).sum::<f64>().ln();
    m * (ln_sum_pow - ln_sum_lin) - m * alpha_hat.ln() - (alpha_hat - 1.0) * ln_r.iter().sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub statistic: Statistic,
    pub value: f64,
    pub gamma: f64,
    pub critical_value: f64,
    pub reject: bool,
}

impl GofResult {
    pub fn report(&self) -> TestReport {
        TestReport {
            statistic: self.statistic.as_str().into(),
            value: self.value,
            gamma: self.gamma,
            critical: self.critical_value,
            reject: self.reject,
            p_value: None,
        }
    }
}

/// Serializable test outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: String,
    pub value: f64,
    pub gamma: f64,
    pub critical: f64,
    pub reject: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
}

/// Compares `value` with the tabulated `(1 - gamma)` quantile for `(n,
/// statistic)`. Rejection requires strict exceedance. Without
/// `interpolate_n` the table must contain `n` exactly.
pub fn decide(
    value: f64,
    table: &CriticalTable,
    statistic: Statistic,
    n: u64,
    gamma: f64,
    interpolate_n: bool,
) -> Result<GofResult> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "significance level must lie in (0, 1), got {gamma}"
        )));
    }
    let level = 1.0 - gamma;
    let critical = if interpolate_n {
        table.lookup_interpolated(n, statistic, level)
    } else {
        table.lookup(n, statistic, level)
    };
    let critical_value = critical.ok_or_else(|| Error::MissingTableEntry {
        n,
        statistic: statistic.to_string(),
        level,
    })?;
    Ok(GofResult {
        statistic,
        value,
        gamma,
        critical_value,
        reject: value > critical_value,
    })
}
