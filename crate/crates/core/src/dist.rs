//! Weibull and exponential lifetime distributions.
//!
//! The two-parameter Weibull `W(alpha, sigma)` has
//! `F(x) = 1 - exp{-(x/sigma)^alpha}` for `x >= 0`; `alpha = 1` is the
//! exponential model with mean `sigma`. Tail quantities are evaluated in
//! survival form so that small `x` does not lose precision to `1 - F`.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A continuous lifetime model on `(0, inf)` that the goodness-of-fit
/// statistics can be evaluated against.
///
/// Arguments below zero are treated as lying at the origin.
pub trait Lifetime {
    fn cdf(&self, x: f64) -> f64;

    /// `1 - F(x)`, computed without cancellation.
    fn survival(&self, x: f64) -> f64;

    /// `ln F(x)`; `-inf` at the origin.
    fn ln_cdf(&self, x: f64) -> f64 {
        self.cdf(x).ln()
    }

    /// Inverse of [`Lifetime::cdf`] for `u` in `(0, 1)`.
    fn quantile(&self, u: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    pub alpha: f64,
    pub sigma: f64,
}

impl WeibullParams {
    pub fn new(alpha: f64, sigma: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Weibull shape must be finite and positive, got {alpha}"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Weibull scale must be finite and positive, got {sigma}"
            )));
        }
        Ok(Self { alpha, sigma })
    }

    /// Standard Weibull `W(1, 1)`, i.e. the unit exponential.
    pub fn unit() -> Self {
        Self {
            alpha: 1.0,
            sigma: 1.0,
        }
    }

    /// `ln (x/sigma)^alpha`.
    #[inline]
    fn ln_cumulative_hazard(&self, x: f64) -> f64 {
        self.alpha * (x.ln() - self.sigma.ln())
    }

    /// Cumulative hazard `(x/sigma)^alpha`.
    #[inline]
    pub fn cumulative_hazard(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.ln_cumulative_hazard(x).exp()
    }

    /// Density `alpha x^(alpha-1) sigma^(-alpha) exp{-(x/sigma)^alpha}` for `x > 0`.
    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let ln_z = self.ln_cumulative_hazard(x);
        (self.alpha.ln() - x.ln() + ln_z - ln_z.exp()).exp()
    }

    /// Inverse-transform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.quantile(u)
    }
}

impl Lifetime for WeibullParams {
    fn cdf(&self, x: f64) -> f64 {
        -(-self.cumulative_hazard(x)).exp_m1()
    }

    fn survival(&self, x: f64) -> f64 {
        (-self.cumulative_hazard(x)).exp()
    }

    fn ln_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let ln_z = self.ln_cumulative_hazard(x);
        if ln_z < -20.0 {
            // ln(1 - e^-z) = ln z - z/2 + z^2/24 - ...
            let z = ln_z.exp();
            ln_z - 0.5 * z + z * z / 24.0
        } else {
            (-(-ln_z.exp()).exp_m1()).ln()
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        self.sigma * (-(-u).ln_1p()).powf(1.0 / self.alpha)
    }
}

/// Exponential model `Exp(sigma)` with mean `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialParams {
    pub sigma: f64,
}

impl ExponentialParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "exponential mean must be finite and positive, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn as_weibull(&self) -> WeibullParams {
        WeibullParams {
            alpha: 1.0,
            sigma: self.sigma,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        (-x / self.sigma).exp() / self.sigma
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.quantile(u)
    }
}

impl Lifetime for ExponentialParams {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        -(-x / self.sigma).exp_m1()
    }

    fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        (-x / self.sigma).exp()
    }

    fn ln_cdf(&self, x: f64) -> f64 {
        self.as_weibull().ln_cdf(x)
    }

    fn quantile(&self, u: f64) -> f64 {
        -self.sigma * (-u).ln_1p()
    }
}

/// Parent distribution for simulated samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Parent {
    Weibull(WeibullParams),
    Exponential(ExponentialParams),
}

impl Parent {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Parent::Weibull(p) => WeibullParams::new(p.alpha, p.sigma).map(|_| ()),
            Parent::Exponential(p) => ExponentialParams::new(p.sigma).map(|_| ()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Parent::Weibull(p) => p.sample(rng),
            Parent::Exponential(p) => p.sample(rng),
        }
    }
}

pub fn weibull_cdf(p: &WeibullParams, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "cdf argument must be nonnegative, got {x}"
        )));
    }
    Ok(p.cdf(x))
}

pub fn weibull_pdf(p: &WeibullParams, x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "density argument must be positive, got {x}"
        )));
    }
    Ok(p.pdf(x))
}

pub fn weibull_quantile(p: &WeibullParams, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level must lie in (0, 1), got {u}"
        )));
    }
    Ok(p.quantile(u))
}
