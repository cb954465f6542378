//! Quantities of interest: scalar functionals of the observation
//! distribution, evaluated at a parameter point.
//!
//! The four forms cover the estimation targets used across the crate:
//! means of pointwise transforms, exceedance probabilities, quantiles, and
//! the -log10 wrapper that puts small probabilities on a decision-friendly
//! scale.

use crate::dist::DistError;
use crate::model::ParamPoint;
use crate::numeric::adaptive_quadrature;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QoiError {
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("quantile order must lie strictly inside (0, 1), got {0}")]
    Order(f64),
    #[error("-log10 wrapper needs a probability-valued inner quantity, got {0}")]
    NotProbabilityValued(&'static str),
    #[error("log-scale transform undefined at nonpositive value {0}")]
    NonpositiveLog(f64),
}

type Result<T> = std::result::Result<T, QoiError>;

/// Pointwise transform under a mean-type quantity. `Identity` targets the
/// plain mean E[Y]; `Custom` targets E[h(Y)] for an arbitrary h.
#[derive(Clone)]
pub enum MeanMap {
    Identity,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for MeanMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanMap::Identity => f.write_str("Identity"),
            MeanMap::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum QuantitySpec {
    /// E[h(Y)] under the observation distribution.
    Mean(MeanMap),
    /// P[Y > threshold].
    Exceedance { threshold: f64 },
    /// The `order` quantile of the observation distribution.
    Quantile { order: f64 },
    /// -log10 of a probability-valued inner quantity.
    NegLog10(Box<QuantitySpec>),
}

impl QuantitySpec {
    pub fn mean() -> Self {
        QuantitySpec::Mean(MeanMap::Identity)
    }

    /// True when the quantity always lands in [0, 1].
    pub fn is_probability_valued(&self) -> bool {
        matches!(self, QuantitySpec::Exceedance { .. })
    }

    /// Structural validation, including that `NegLog10` only wraps
    /// probability-valued specs and quantile orders are interior.
    pub fn validate(&self) -> Result<()> {
        match self {
            QuantitySpec::Mean(_) => Ok(()),
            QuantitySpec::Exceedance { threshold } => {
                if threshold.is_finite() {
                    Ok(())
                } else {
                    Err(QoiError::NotProbabilityValued("non-finite threshold"))
                }
            }
            QuantitySpec::Quantile { order } => {
                if *order > 0.0 && *order < 1.0 {
                    Ok(())
                } else {
                    Err(QoiError::Order(*order))
                }
            }
            QuantitySpec::NegLog10(inner) => {
                inner.validate()?;
                if inner.is_probability_valued() {
                    Ok(())
                } else {
                    Err(QoiError::NotProbabilityValued(inner.label()))
                }
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            QuantitySpec::Mean(MeanMap::Identity) => "mean",
            QuantitySpec::Mean(MeanMap::Custom(_)) => "mean-of-transform",
            QuantitySpec::Exceedance { .. } => "exceedance",
            QuantitySpec::Quantile { .. } => "quantile",
            QuantitySpec::NegLog10(_) => "neglog10",
        }
    }

    pub fn digest(&self) -> String {
        match self {
            QuantitySpec::Mean(MeanMap::Identity) => "mean".into(),
            QuantitySpec::Mean(MeanMap::Custom(_)) => "mean(h)".into(),
            QuantitySpec::Exceedance { threshold } => format!("exceedance(t={threshold})"),
            QuantitySpec::Quantile { order } => format!("quantile(a={order})"),
            QuantitySpec::NegLog10(inner) => format!("-log10[{}]", inner.digest()),
        }
    }
}

/// Evaluate the quantity at one parameter point.
///
/// Means use the family's closed form under the identity map and adaptive
/// quadrature for custom transforms; exceedances are direct survival-function
/// evaluations (never `1 - cdf`, so deep-tail probabilities do not underflow);
/// quantiles delegate to the observation distribution's own quantile routine
/// so the two can never drift apart.
pub fn qoi_eval(spec: &QuantitySpec, theta: &ParamPoint) -> Result<f64> {
    spec.validate()?;
    let dist = theta.observation_dist();
    match spec {
        QuantitySpec::Mean(MeanMap::Identity) => {
            if let Some(m) = dist.mean() {
                return Ok(m);
            }
            integrate_mean(&dist, &|y| y)
        }
        QuantitySpec::Mean(MeanMap::Custom(h)) => integrate_mean(&dist, h.as_ref()),
        QuantitySpec::Exceedance { threshold } => Ok(dist.survival(*threshold)?),
        QuantitySpec::Quantile { order } => Ok(dist.quantile(*order)?),
        QuantitySpec::NegLog10(inner) => {
            // validation restricts the inner spec to probabilities, so go
            // through the log tail directly: the transform stays finite for
            // probabilities far below the underflow point of the raw value
            let log_v = qoi_eval_log(inner, theta)?;
            if log_v == f64::NEG_INFINITY {
                return Err(QoiError::NonpositiveLog(0.0));
            }
            Ok(-log_v / std::f64::consts::LN_10)
        }
    }
}

/// Natural log of the quantity at one parameter point. Exceedances have a
/// dedicated stable path through the family's log survival function; every
/// other spec takes the log of [`qoi_eval`] and reports nonpositive values
/// as errors. `-inf` (a genuinely zero probability) is returned as is.
pub fn qoi_eval_log(spec: &QuantitySpec, theta: &ParamPoint) -> Result<f64> {
    spec.validate()?;
    match spec {
        QuantitySpec::Exceedance { threshold } => {
            Ok(theta.observation_dist().log_survival(*threshold)?)
        }
        _ => {
            let v = qoi_eval(spec, theta)?;
            if v < 0.0 {
                return Err(QoiError::NonpositiveLog(v));
            }
            Ok(v.ln())
        }
    }
}

fn integrate_mean(dist: &crate::dist::DistFamily, h: &dyn Fn(f64) -> f64) -> Result<f64> {
    // integrate h(y) pdf(y) over the central 1 - 2e-12 mass; tails of the
    // supported families decay fast enough that the truncation is far below
    // the 1e-8 relative tolerance of the quadrature itself
    let lo = dist.quantile(1e-12)?;
    let hi = dist.quantile(1.0 - 1e-12)?;
    if matches!(dist, crate::dist::DistFamily::Bernoulli { .. }) {
        // counting measure: the only discrete family
        let p = dist.mean().expect("bernoulli mean");
        return Ok(h(0.0) * (1.0 - p) + h(1.0) * p);
    }
    let f = |y: f64| h(y) * dist.log_pdf(y).unwrap_or(f64::NEG_INFINITY).exp();
    Ok(adaptive_quadrature(&f, lo, hi, 1e-8))
}
