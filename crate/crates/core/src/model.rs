//! Observation models, their likelihoods, and the dyke transfer function.
//!
//! A [`ParamPoint`] is one point in a model's parameter space; its
//! [`ParamPoint::observation_dist`] is the sampling distribution of a single
//! observation. The dyke section maps river discharge to water level through
//! `Z_c = z_v + a * q^(3/5)` and closes the loop from Weibull discharge
//! parameters to a flood probability.

use crate::dist::{DistError, DistFamily};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("discharge must be >= 0, got {0}")]
    NegativeDischarge(f64),
    #[error("invalid dyke geometry: {0}")]
    Geometry(String),
}

type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Exponential,
    Weibull,
    Bernoulli,
    Normal,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Exponential => "exponential",
            ModelKind::Weibull => "weibull",
            ModelKind::Bernoulli => "bernoulli",
            ModelKind::Normal => "normal",
        }
    }
}

/// One point in a model's parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamPoint {
    /// Mean-parameterized exponential.
    Exponential { mean: f64 },
    Weibull { scale: f64, shape: f64 },
    Bernoulli { prob: f64 },
    Normal { mean: f64, variance: f64 },
}

impl ParamPoint {
    pub fn kind(&self) -> ModelKind {
        match self {
            ParamPoint::Exponential { .. } => ModelKind::Exponential,
            ParamPoint::Weibull { .. } => ModelKind::Weibull,
            ParamPoint::Bernoulli { .. } => ModelKind::Bernoulli,
            ParamPoint::Normal { .. } => ModelKind::Normal,
        }
    }

    /// Sampling distribution of one observation at this parameter value.
    pub fn observation_dist(&self) -> DistFamily {
        match *self {
            ParamPoint::Exponential { mean } => DistFamily::Exponential { mean },
            ParamPoint::Weibull { scale, shape } => DistFamily::Weibull { scale, shape },
            ParamPoint::Bernoulli { prob } => DistFamily::Bernoulli { prob },
            ParamPoint::Normal { mean, variance } => DistFamily::Normal { mean, variance },
        }
    }

    /// Human-readable parameter summary for reports and logs.
    pub fn digest(&self) -> String {
        match *self {
            ParamPoint::Exponential { mean } => format!("exponential(mean={mean})"),
            ParamPoint::Weibull { scale, shape } => {
                format!("weibull(scale={scale}, shape={shape})")
            }
            ParamPoint::Bernoulli { prob } => format!("bernoulli(p={prob})"),
            ParamPoint::Normal { mean, variance } => {
                format!("normal(mean={mean}, var={variance})")
            }
        }
    }

    /// Coordinates in a fixed order, for samplers and diagnostics.
    pub fn coords(&self) -> Vec<f64> {
        match *self {
            ParamPoint::Exponential { mean } => vec![mean],
            ParamPoint::Weibull { scale, shape } => vec![scale, shape],
            ParamPoint::Bernoulli { prob } => vec![prob],
            ParamPoint::Normal { mean, variance } => vec![mean, variance],
        }
    }
}

/// An i.i.d. sample of scalar observations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservationSample {
    values: Vec<f64>,
}

impl ObservationSample {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn empty() -> Self {
        Self { values: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.n() as f64
    }
}

/// Sum of per-observation log densities. An empty sample yields 0 (the log
/// of an empty product); callers that need to distinguish "no data" should
/// check `data.is_empty()` and tag the result accordingly.
pub fn log_likelihood(theta: &ParamPoint, data: &ObservationSample) -> Result<f64> {
    let dist = theta.observation_dist();
    dist.validate()?;
    let mut total = 0.0;
    for &x in data.values() {
        total += dist.log_pdf(x)?;
        if total == f64::NEG_INFINITY {
            break; // an impossible observation sinks the whole product
        }
    }
    Ok(total)
}

/// Rating geometry of a dyke section: water level as a function of
/// discharge is `z_v + a * q^(3/5)`, and `h` is the dyke crest level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DykeGeometry {
    /// River bed level (meters).
    pub z_v: f64,
    /// Rating coefficient in front of `q^(3/5)`; must be > 0.
    pub a: f64,
    /// Dyke crest level (meters); must exceed `z_v`.
    pub h: f64,
}

impl DykeGeometry {
    pub fn new(z_v: f64, a: f64, h: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(ModelError::Geometry(format!("rating coefficient a = {a} must be > 0")));
        }
        if !(z_v.is_finite() && h.is_finite() && h > z_v) {
            return Err(ModelError::Geometry(format!(
                "crest level h = {h} must exceed bed level z_v = {z_v}"
            )));
        }
        Ok(Self { z_v, a, h })
    }

    /// Geometry whose flood probability at Weibull(`scale`, `shape`)
    /// discharges equals `p_target` exactly: solves
    /// `a = (h - z_v) / (scale * ln(1/p)^(1/shape))^(3/5)`.
    pub fn calibrated(z_v: f64, h: f64, scale: f64, shape: f64, p_target: f64) -> Result<Self> {
        if !(p_target > 0.0 && p_target < 1.0) {
            return Err(ModelError::Geometry(format!(
                "target probability {p_target} must lie in (0, 1)"
            )));
        }
        let q_crit = scale * (1.0 / p_target).ln().powf(1.0 / shape);
        let a = (h - z_v) / q_crit.powf(0.6);
        Self::new(z_v, a, h)
    }

    /// Discharge at which the water level reaches the crest.
    pub fn critical_discharge(&self) -> f64 {
        ((self.h - self.z_v) / self.a).powf(5.0 / 3.0)
    }
}

/// Water level reached by a discharge `q >= 0`.
pub fn dyke_output(geom: &DykeGeometry, q: f64) -> Result<f64> {
    if !(q >= 0.0) {
        return Err(ModelError::NegativeDischarge(q));
    }
    Ok(geom.z_v + geom.a * q.powf(0.6))
}

/// Probability that the annual maximal discharge overtops the crest when
/// discharges follow Weibull(`scale`, `shape`): the Weibull survival
/// function at the critical discharge.
pub fn flood_probability(geom: &DykeGeometry, scale: f64, shape: f64) -> Result<f64> {
    DistFamily::Weibull { scale, shape }.validate()?;
    let q_crit = geom.critical_discharge();
    Ok((-(q_crit / scale).powf(shape)).exp())
}
