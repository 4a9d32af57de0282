//! Parametric component failure models.
//!
//! All times are in hours. Three families are supported:
//!
//! * constant rate (exponential lifetime): `R(t) = exp(-lambda * t)`
//! * power law (Weibull cumulative hazard): `R(t) = exp(-scale * t^shape)`
//! * Goel-Okumoto NHPP software reliability growth with mean value
//!   `m(t) = a * (1 - exp(-b * t))`, evaluated over the window that starts
//!   after `t_test` hours of accumulated testing.
//!
//! Each model is a counting process with cumulative intensity `H(t)`; the
//! probability of surviving the window `(t, t + x]` is `exp(-(H(t + x) - H(t)))`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated failure model. Variants cannot be built directly outside this
/// crate; use the checked constructors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub enum FailureModel {
    #[non_exhaustive]
    ConstantRate { lambda: f64 },
    #[non_exhaustive]
    PowerLaw { scale: f64, shape: f64 },
    #[non_exhaustive]
    SrgmNhpp { a: f64, b: f64, t_test: f64 },
}

/// Unvalidated wire form of [`FailureModel`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Constant {
        lambda: f64,
    },
    PowerLaw {
        scale: f64,
        shape: f64,
    },
    Srgm {
        a: f64,
        b: f64,
        #[serde(default)]
        t_test: f64,
    },
}

impl TryFrom<ModelSpec> for FailureModel {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        match spec {
            ModelSpec::Constant { lambda } => FailureModel::constant_rate(lambda),
            ModelSpec::PowerLaw { scale, shape } => FailureModel::power_law(scale, shape),
            ModelSpec::Srgm { a, b, t_test } => FailureModel::srgm(a, b, t_test),
        }
    }
}

impl From<FailureModel> for ModelSpec {
    fn from(model: FailureModel) -> Self {
        match model {
            FailureModel::ConstantRate { lambda } => ModelSpec::Constant { lambda },
            FailureModel::PowerLaw { scale, shape } => ModelSpec::PowerLaw { scale, shape },
            FailureModel::SrgmNhpp { a, b, t_test } => ModelSpec::Srgm { a, b, t_test },
        }
    }
}

fn check(name: &str, value: f64, ok: bool, bound: &str) -> Result<()> {
    if value.is_finite() && ok {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be finite and {bound}, got {value}"
        )))
    }
}

fn check_time(name: &str, t: f64) -> Result<()> {
    check(name, t, t >= 0.0, ">= 0")
}

impl FailureModel {
    /// Exponential lifetime with `lambda` failures per hour.
    pub fn constant_rate(lambda: f64) -> Result<Self> {
        check("lambda", lambda, lambda >= 0.0, ">= 0")?;
        Ok(FailureModel::ConstantRate { lambda })
    }

    /// Cumulative hazard `scale * t^shape`.
    pub fn power_law(scale: f64, shape: f64) -> Result<Self> {
        check("scale", scale, scale >= 0.0, ">= 0")?;
        check("shape", shape, shape > 0.0, "> 0")?;
        Ok(FailureModel::PowerLaw { scale, shape })
    }

    pub fn srgm(a: f64, b: f64, t_test: f64) -> Result<Self> {
        check_srgm(a, b)?;
        check_time("t_test", t_test)?;
        Ok(FailureModel::SrgmNhpp { a, b, t_test })
    }

    /// Short family name used in catalogs and reports.
    pub fn family(&self) -> &'static str {
        match self {
            FailureModel::ConstantRate { .. } => "constant",
            FailureModel::PowerLaw { .. } => "powerlaw",
            FailureModel::SrgmNhpp { .. } => "srgm",
        }
    }

    /// Expected number of failures in `(t_start, t_start + x]`.
    fn hazard_increment(&self, t_start: f64, x: f64) -> f64 {
        match *self {
            FailureModel::ConstantRate { lambda } => lambda * x,
            FailureModel::PowerLaw { scale, shape } => {
                scale * ((t_start + x).powf(shape) - t_start.powf(shape))
            }
            FailureModel::SrgmNhpp { a, b, t_test } => {
                // a * (exp(-b*t0) - exp(-b*(t0+x))) without cancellation
                let t0 = t_test + t_start;
                a * (-b * t0).exp() * -(-b * x).exp_m1()
            }
        }
    }

    /// Probability of surviving a mission of `mission` hours from a fresh
    /// start (for SRGM models the window starts at `t_test`).
    pub fn reliability_at(&self, mission: f64) -> Result<f64> {
        check_time("mission", mission)?;
        Ok(survival(self.hazard_increment(0.0, mission)))
    }

    /// Probability of no failure in the window `(t_start, t_start + x]`.
    pub fn windowed_reliability(&self, t_start: f64, x: f64) -> Result<f64> {
        check_time("t_start", t_start)?;
        check_time("window length", x)?;
        Ok(survival(self.hazard_increment(t_start, x)))
    }

    /// MTBF, defined only for constant-rate models.
    pub fn mtbf(&self) -> Option<Mtbf> {
        match *self {
            FailureModel::ConstantRate { lambda } => Some(Mtbf::from_rate(lambda)),
            _ => None,
        }
    }
}

fn survival(hazard: f64) -> f64 {
    (-hazard.max(0.0)).exp().clamp(0.0, 1.0)
}

/// Mean time between failures of a constant-rate component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mtbf {
    Hours(f64),
    /// Zero failure rate.
    Infinite,
}

impl Mtbf {
    pub fn from_rate(lambda: f64) -> Self {
        if lambda > 0.0 {
            Mtbf::Hours(1.0 / lambda)
        } else {
            Mtbf::Infinite
        }
    }

    pub fn hours(self) -> Option<f64> {
        match self {
            Mtbf::Hours(h) => Some(h),
            Mtbf::Infinite => None,
        }
    }
}

impl fmt::Display for Mtbf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mtbf::Hours(h) => write!(f, "{h} h"),
            Mtbf::Infinite => f.write_str("infinite"),
        }
    }
}

/// MTBF of a constant failure rate; a zero rate yields [`Mtbf::Infinite`].
pub fn mtbf(lambda: f64) -> Result<Mtbf> {
    check("lambda", lambda, lambda >= 0.0, ">= 0")?;
    Ok(Mtbf::from_rate(lambda))
}

fn check_srgm(a: f64, b: f64) -> Result<()> {
    check("a", a, a > 0.0, "> 0")?;
    check("b", b, b > 0.0, "> 0")
}

/// Goel-Okumoto mean value function `a * (1 - exp(-b t))`.
pub fn srgm_mean_value(a: f64, b: f64, t: f64) -> Result<f64> {
    check_srgm(a, b)?;
    check_time("t", t)?;
    Ok(-a * (-b * t).exp_m1())
}

/// Failure intensity `a * b * exp(-b t)`, the derivative of the mean value.
pub fn srgm_intensity(a: f64, b: f64, t: f64) -> Result<f64> {
    check_srgm(a, b)?;
    check_time("t", t)?;
    Ok(a * b * (-b * t).exp())
}

/// `P{N(t) = n}` for the NHPP failure count: Poisson with mean `m(t)`.
pub fn srgm_count_pmf(a: f64, b: f64, t: f64, n: i64) -> Result<f64> {
    if n < 0 {
        return Err(Error::domain(format!("count must be >= 0, got {n}")));
    }
    let m = srgm_mean_value(a, b, t)?;
    Ok(poisson_pmf(m, n as u64))
}

pub(crate) fn poisson_pmf(mean: f64, n: u64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    let ln_p = nf * mean.ln() - mean - statrs::function::gamma::ln_gamma(nf + 1.0);
    ln_p.exp()
}

/// Poisson probabilities `P{N(t) = 0..=N}` where `N` is the smallest count
/// past the mean whose upper tail mass is below `tail_tol`.
pub fn srgm_count_distribution(a: f64, b: f64, t: f64, tail_tol: f64) -> Result<Vec<f64>> {
    check(
        "tail tolerance",
        tail_tol,
        tail_tol > 0.0 && tail_tol < 1.0,
        "in (0, 1)",
    )?;
    let m = srgm_mean_value(a, b, t)?;
    let mut pmf = Vec::new();
    let mut cdf = 0.0;
    let mut n = 0u64;
    loop {
        let p = poisson_pmf(m, n);
        pmf.push(p);
        cdf += p;
        // Past the mode the terms shrink geometrically with ratio m/(n+1);
        // bound the remaining tail by p * r / (1 - r).
        let ratio = m / (n as f64 + 2.0);
        if (n as f64) > m && ratio < 1.0 {
            let tail = p * ratio / (1.0 - ratio);
            if tail < tail_tol || cdf >= 1.0 {
                break;
            }
        }
        n += 1;
    }
    Ok(pmf)
}

/// Power-law interaction intensity `scale * shape * t^(shape - 1)`.
pub fn sh_intensity(scale: f64, shape: f64, t: f64) -> Result<f64> {
    check("scale", scale, scale >= 0.0, ">= 0")?;
    check("shape", shape, shape > 0.0, "> 0")?;
    check_time("t", t)?;
    if t == 0.0 && shape < 1.0 {
        return Err(Error::Singularity { shape });
    }
    if shape == 1.0 {
        return Ok(scale);
    }
    Ok(scale * shape * t.powf(shape - 1.0))
}
