//! Posterior construction and point estimation.
//!
//! Four routes to a [`WeightedPosterior`] over model parameters:
//! exact conjugate updates ([`conjugate`]), importance sampling from the
//! prior ([`importance`]), a random-walk Metropolis fallback
//! ([`metropolis`]), and large-sample normal approximations
//! ([`asymptotic`]). Maximum-likelihood fitting lives in [`mle`]; the
//! hierarchical flood-frequency prior in [`weibull_prior`].

mod asymptotic;
mod conjugate;
mod importance;
mod metropolis;
mod mle;
mod weibull_prior;

pub use asymptotic::{asymptotic_approx, ApproxKind, NormalApprox};
pub use conjugate::ConjugateSpec;
pub use importance::{sample_posterior_is, sample_posterior_is_from, LogNormalProposal, Proposal};
pub use metropolis::sample_posterior_mh;
pub use mle::{mle_fit, plug_in};
pub use weibull_prior::HierarchicalWeibullPrior;

use crate::dist::DistError;
use crate::model::{log_likelihood, ModelError, ModelKind, ObservationSample, ParamPoint};
use crate::numeric::log_sum_exp;
use crate::qoi::QoiError;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Qoi(#[from] QoiError),
    #[error("cannot fit {model} model: {reason}")]
    UnusableData { model: &'static str, reason: String },
    #[error("shape MLE diverges: all {n} observations equal {value}")]
    DegenerateShape { n: usize, value: f64 },
    #[error("prior-data conflict: zero-likelihood proposal (all {0} candidate draws carry zero posterior mass)")]
    ZeroLikelihood(usize),
    #[error("improper posterior {family}({a}, {b}): {reason}")]
    ImproperPosterior {
        family: &'static str,
        a: f64,
        b: f64,
        reason: String,
    },
    #[error("no Fisher information registered for the {0} model")]
    NoFisherInformation(&'static str),
    #[error("{what} expects the {expected} model, got {got}")]
    ModelMismatch {
        what: &'static str,
        expected: &'static str,
        got: &'static str,
    },
    #[error("invalid sampler setting {name} = {value}: requires {constraint}")]
    InvalidSetting {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("Metropolis chain accepted no proposals in {0} iterations")]
    NoAcceptedProposals(usize),
    #[error("posterior draw container: {0}")]
    BadPosterior(String),
}

type Result<T> = std::result::Result<T, InferenceError>;

/// How a [`WeightedPosterior`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosteriorSource {
    /// Exact draws from a closed-form conjugate posterior.
    ConjugateExact,
    /// Prior (or custom proposal) draws reweighted by the likelihood.
    Importance,
    /// Random-walk Metropolis chain states.
    Metropolis,
    /// No data: the draws represent the prior itself.
    PriorOnly,
}

impl PosteriorSource {
    pub fn name(&self) -> &'static str {
        match self {
            PosteriorSource::ConjugateExact => "conjugate-exact",
            PosteriorSource::Importance => "importance",
            PosteriorSource::Metropolis => "metropolis",
            PosteriorSource::PriorOnly => "prior-only",
        }
    }
}

/// Weighted parameter draws approximating a posterior distribution.
///
/// Weights are kept normalized (sum 1); `ess` is the effective sample size
/// `(sum w)^2 / sum w^2`, which equals the draw count for uniform weights.
/// `diagnostics` carries non-fatal warnings (low ess, empty data, sampler
/// acceptance rates) for surfacing in reports.
#[derive(Debug, Clone)]
pub struct WeightedPosterior {
    points: Vec<ParamPoint>,
    log_weights: Vec<f64>,
    weights: Vec<f64>,
    ess: f64,
    source: PosteriorSource,
    diagnostics: Vec<String>,
}

impl WeightedPosterior {
    /// Builds a posterior from raw (unnormalized) log weights.
    ///
    /// Errors when the containers are empty or mismatched, or when every
    /// weight is zero (no proposal draw had positive likelihood).
    pub fn from_log_weights(
        points: Vec<ParamPoint>,
        log_weights: Vec<f64>,
        source: PosteriorSource,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(InferenceError::BadPosterior("no draws".into()));
        }
        if points.len() != log_weights.len() {
            return Err(InferenceError::BadPosterior(format!(
                "{} draws but {} log weights",
                points.len(),
                log_weights.len()
            )));
        }
        let norm = log_sum_exp(&log_weights);
        if !norm.is_finite() {
            return Err(InferenceError::ZeroLikelihood(points.len()));
        }
        let weights: Vec<f64> = log_weights.iter().map(|lw| (lw - norm).exp()).collect();
        let ess = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        Ok(Self {
            points,
            log_weights,
            weights,
            ess,
            source,
            diagnostics: Vec::new(),
        })
    }

    /// Equal-weight draws (exact posterior samples or chain states).
    pub fn uniform(points: Vec<ParamPoint>, source: PosteriorSource) -> Result<Self> {
        let n = points.len();
        let zeros = vec![0.0; n];
        let mut post = Self::from_log_weights(points, zeros, source)?;
        // avoid 1/sum(1/n^2) roundoff: uniform ess is the count by definition
        post.ess = n as f64;
        Ok(post)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ParamPoint] {
        &self.points
    }

    /// Normalized weights; sum to 1 within accumulation roundoff.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn ess(&self) -> f64 {
        self.ess
    }

    pub fn source(&self) -> PosteriorSource {
        self.source
    }

    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    pub fn push_diagnostic(&mut self, message: String) {
        self.diagnostics.push(message);
    }

    /// Overrides the weight-based ess with a sampler-specific estimate
    /// (e.g. autocorrelation-adjusted for Markov chains).
    pub(crate) fn set_ess(&mut self, ess: f64) {
        self.ess = ess;
    }

    /// Posterior expectation of a pointwise function of the parameter.
    pub fn weighted_mean(&self, f: impl Fn(&ParamPoint) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

/// A proper prior over one model's parameter space: enough structure to
/// drive importance sampling and Metropolis (sampling plus log density).
pub trait ParamPrior: Send + Sync {
    fn model_kind(&self) -> ModelKind;

    /// One draw from the prior.
    fn sample_param(&self, rng: &mut ChaCha8Rng) -> Result<ParamPoint>;

    /// Log prior density at `point`; `-inf` outside the support.
    fn log_prior(&self, point: &ParamPoint) -> Result<f64>;

    /// Short human-readable settings string for reports.
    fn digest(&self) -> String;
}

/// Rebuilds a parameter point from its coordinate vector (the inverse of
/// [`ParamPoint::coords`]). Panics in debug builds on arity mismatch.
fn point_from_coords(kind: ModelKind, c: &[f64]) -> ParamPoint {
    match kind {
        ModelKind::Exponential => ParamPoint::Exponential { mean: c[0] },
        ModelKind::Weibull => ParamPoint::Weibull {
            scale: c[0],
            shape: c[1],
        },
        ModelKind::Bernoulli => ParamPoint::Bernoulli { prob: c[0] },
        ModelKind::Normal => ParamPoint::Normal {
            mean: c[0],
            variance: c[1],
        },
    }
}

/// Log likelihood guarded against model/point kind drift.
fn checked_log_likelihood(
    kind: ModelKind,
    point: &ParamPoint,
    data: &ObservationSample,
) -> Result<f64> {
    if point.kind() != kind {
        return Err(InferenceError::ModelMismatch {
            what: "likelihood evaluation",
            expected: kind.name(),
            got: point.kind().name(),
        });
    }
    Ok(log_likelihood(point, data)?)
}
