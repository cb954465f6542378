//! JSON study configuration: schema types, validation, and conversion into
//! the core model/prior/quantity/loss objects.
//!
//! Top-level keys are fixed: `model`, `prior`, `data`, `quantity`,
//! `losses`, `estimators`, `montecarlo`, `seed`. Unknown top-level keys are
//! rejected so typos fail loudly instead of silently falling back to
//! defaults.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use uq_core::inference::{ConjugateSpec, HierarchicalWeibullPrior, ParamPrior};
use uq_core::loss::LossSpec;
use uq_core::model::{ModelKind, ParamPoint};
use uq_core::qoi::QuantitySpec;

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Exponential,
    Weibull,
    Bernoulli,
    Normal,
}

impl ModelName {
    pub fn kind(self) -> ModelKind {
        match self {
            ModelName::Exponential => ModelKind::Exponential,
            ModelName::Weibull => ModelKind::Weibull,
            ModelName::Bernoulli => ModelKind::Bernoulli,
            ModelName::Normal => ModelKind::Normal,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PriorConfig {
    ExpInverseGamma { n0: f64, s0: f64 },
    BernoulliBeta { a: f64, b: f64 },
    NormalInverseGamma { m0: f64, k0: f64, a0: f64, b0: f64 },
    HierarchicalWeibull {
        #[serde(default = "default_m")]
        m: f64,
        #[serde(default = "default_beta0")]
        beta0: f64,
        #[serde(default = "default_t_e")]
        t_e: f64,
        #[serde(default = "default_beta_l")]
        beta_l: f64,
    },
}

fn default_m() -> f64 {
    1.0
}

fn default_beta0() -> f64 {
    1.5
}

fn default_t_e() -> f64 {
    HierarchicalWeibullPrior::default().t_e()
}

fn default_beta_l() -> f64 {
    1.0
}

/// A built prior: either a conjugate family (closed-form updates available)
/// or the hierarchical Weibull prior (sampling only).
#[derive(Debug, Clone)]
pub enum PriorObject {
    Conjugate(ConjugateSpec),
    Hierarchical(HierarchicalWeibullPrior),
}

impl PriorObject {
    pub fn as_param_prior(&self) -> &dyn ParamPrior {
        match self {
            PriorObject::Conjugate(c) => c,
            PriorObject::Hierarchical(h) => h,
        }
    }

    pub fn conjugate(&self) -> Option<&ConjugateSpec> {
        match self {
            PriorObject::Conjugate(c) => Some(c),
            PriorObject::Hierarchical(_) => None,
        }
    }
}

impl PriorConfig {
    /// Instantiate the prior, checking it pairs with the requested model.
    pub fn build(&self, model: ModelKind) -> Result<PriorObject> {
        let obj = match *self {
            PriorConfig::ExpInverseGamma { n0, s0 } => {
                PriorObject::Conjugate(ConjugateSpec::ExpInvGamma { n0, s0 })
            }
            PriorConfig::BernoulliBeta { a, b } => {
                PriorObject::Conjugate(ConjugateSpec::BernoulliBeta { a, b })
            }
            PriorConfig::NormalInverseGamma { m0, k0, a0, b0 } => {
                PriorObject::Conjugate(ConjugateSpec::NormalNig { m0, k0, a0, b0 })
            }
            PriorConfig::HierarchicalWeibull { m, beta0, t_e, beta_l } => {
                PriorObject::Hierarchical(
                    HierarchicalWeibullPrior::new(m, beta0, t_e, beta_l)
                        .map_err(|e| CliError::config(e.to_string()))?,
                )
            }
        };
        let prior_kind = obj.as_param_prior().model_kind();
        if prior_kind != model {
            return Err(CliError::config(format!(
                "prior family serves the {} model but the config requests {}",
                prior_kind.name(),
                model.name()
            )));
        }
        if let PriorObject::Conjugate(c) = &obj {
            c.validate().map_err(|e| CliError::config(e.to_string()))?;
        }
        Ok(obj)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    /// Values written directly in the config.
    Inline(Vec<f64>),
    /// Path to a one-column CSV (header auto-detected).
    File(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuantityConfig {
    Mean,
    Exceedance { threshold: f64 },
    Quantile { order: f64 },
    NegLog10 { of: Box<QuantityConfig> },
}

impl QuantityConfig {
    pub fn to_spec(&self) -> QuantitySpec {
        match self {
            QuantityConfig::Mean => QuantitySpec::mean(),
            QuantityConfig::Exceedance { threshold } => QuantitySpec::Exceedance {
                threshold: *threshold,
            },
            QuantityConfig::Quantile { order } => QuantitySpec::Quantile { order: *order },
            QuantityConfig::NegLog10 { of } => QuantitySpec::NegLog10(Box::new(of.to_spec())),
        }
    }
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LossConfig {
    Quadratic {
        #[serde(default = "default_scale")]
        scale: f64,
    },
    WeightedAbsolute { under: f64, over: f64 },
    LogQuadratic,
}

impl LossConfig {
    pub fn to_spec(&self) -> LossSpec {
        match *self {
            LossConfig::Quadratic { scale } => LossSpec::Quadratic { scale },
            LossConfig::WeightedAbsolute { under, over } => {
                LossSpec::WeightedAbsolute { under, over }
            }
            LossConfig::LogQuadratic => LossSpec::LogQuadratic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorName {
    Mle,
    Hpe,
    Bayes,
}

impl fmt::Display for EstimatorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EstimatorName::Mle => "mle",
            EstimatorName::Hpe => "hpe",
            EstimatorName::Bayes => "bayes",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerChoice {
    /// Conjugate closed form when the prior supports it, otherwise
    /// importance sampling with a Metropolis fallback on starved weights.
    Auto,
    Conjugate,
    Importance,
    Metropolis,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    #[serde(default = "default_posterior_draws")]
    pub posterior_draws: usize,
    #[serde(default = "default_predictive_draws")]
    pub predictive_draws: usize,
    #[serde(default = "default_sampler")]
    pub sampler: SamplerChoice,
}

fn default_posterior_draws() -> usize {
    100_000
}

fn default_predictive_draws() -> usize {
    100_000
}

fn default_sampler() -> SamplerChoice {
    SamplerChoice::Auto
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            posterior_draws: default_posterior_draws(),
            predictive_draws: default_predictive_draws(),
            sampler: default_sampler(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub model: ModelName,
    pub prior: PriorConfig,
    pub data: DataSource,
    pub quantity: QuantityConfig,
    #[serde(default)]
    pub losses: Vec<LossConfig>,
    pub estimators: Vec<EstimatorName>,
    #[serde(default)]
    pub montecarlo: MonteCarloConfig,
    pub seed: u64,
}

impl StudyConfig {
    pub fn load(path: &Path) -> Result<StudyConfig> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let cfg: StudyConfig = serde_json::from_str(&text).map_err(|e| {
            CliError::config(format!("config {}: {e}", path.display()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.estimators.is_empty() {
            return Err(CliError::config("estimators list is empty"));
        }
        if self.estimators.contains(&EstimatorName::Bayes) && self.losses.is_empty() {
            return Err(CliError::config(
                "the bayes estimator needs at least one loss in `losses`",
            ));
        }
        let mc = &self.montecarlo;
        if mc.posterior_draws < 100 || mc.predictive_draws < 100 {
            return Err(CliError::config(format!(
                "montecarlo draw counts must be at least 100, got posterior_draws = {}, \
                 predictive_draws = {}",
                mc.posterior_draws, mc.predictive_draws
            )));
        }
        let spec = self.quantity.to_spec();
        spec.validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        if self.estimators.contains(&EstimatorName::Hpe)
            && matches!(self.quantity, QuantityConfig::NegLog10 { .. })
        {
            return Err(CliError::config(
                "the hpe estimator applies to expectation-form or quantile quantities; \
                 estimate the underlying exceedance and transform the result instead",
            ));
        }
        for loss in &self.losses {
            let l = loss.to_spec();
            l.validate().map_err(|e| CliError::config(e.to_string()))?;
            if !loss_applies(&l, self.model, &self.quantity) {
                return Err(CliError::config(format!(
                    "loss {} needs a strictly positive quantity, but {} of the {} model \
                     can reach nonpositive values",
                    l.digest(),
                    spec.digest(),
                    self.model.kind().name()
                )));
            }
        }
        Ok(())
    }
}

/// Log-scale losses only make sense when the quantity is positive over the
/// whole parameter space; the other losses apply everywhere.
fn loss_applies(loss: &LossSpec, model: ModelName, quantity: &QuantityConfig) -> bool {
    if !matches!(loss, LossSpec::LogQuadratic) {
        return true;
    }
    match quantity {
        // probabilities are interior almost surely
        QuantityConfig::Exceedance { .. } | QuantityConfig::NegLog10 { .. } => true,
        QuantityConfig::Mean | QuantityConfig::Quantile { .. } => !matches!(
            model,
            ModelName::Normal | ModelName::Bernoulli
        ),
    }
}

/// A fixed parameter point, keyed by the coordinate names of the model it
/// belongs to (`mean`; `scale` and `shape`; `prob`; `mean` and `variance`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob: Option<f64>,
}

impl ThetaConfig {
    pub fn build(&self, model: ModelName) -> Result<ParamPoint> {
        let need = |field: Option<f64>, name: &str| {
            field.ok_or_else(|| {
                CliError::config(format!(
                    "truth for the {} model needs `{name}`",
                    model.kind().name()
                ))
            })
        };
        let point = match model {
            ModelName::Exponential => ParamPoint::Exponential {
                mean: need(self.mean, "mean")?,
            },
            ModelName::Weibull => ParamPoint::Weibull {
                scale: need(self.scale, "scale")?,
                shape: need(self.shape, "shape")?,
            },
            ModelName::Bernoulli => ParamPoint::Bernoulli {
                prob: need(self.prob, "prob")?,
            },
            ModelName::Normal => ParamPoint::Normal {
                mean: need(self.mean, "mean")?,
                variance: need(self.variance, "variance")?,
            },
        };
        point
            .observation_dist()
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        Ok(point)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskConfig {
    pub model: ModelName,
    /// Fixed truth for frequentist risk; leave out to average over the
    /// prior (Bayes risk) instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<ThetaConfig>,
    /// Required whenever `hpe` or `bayes` estimators run, and for Bayes
    /// risk; optional for a pure frequentist MLE benchmark.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorConfig>,
    pub quantity: QuantityConfig,
    pub loss: LossConfig,
    pub estimators: Vec<EstimatorName>,
    pub sample_size: usize,
    pub replicates: usize,
    #[serde(default)]
    pub montecarlo: MonteCarloConfig,
    pub seed: u64,
}

impl RiskConfig {
    pub fn load(path: &Path) -> Result<RiskConfig> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let cfg: RiskConfig = serde_json::from_str(&text).map_err(|e| {
            CliError::config(format!("config {}: {e}", path.display()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.estimators.is_empty() {
            return Err(CliError::config("estimators list is empty"));
        }
        if self.truth.is_none() && self.prior.is_none() {
            return Err(CliError::config(
                "risk benchmarks need `truth` (frequentist) or `prior` (Bayes risk)",
            ));
        }
        let needs_prior = self
            .estimators
            .iter()
            .any(|e| matches!(e, EstimatorName::Hpe | EstimatorName::Bayes));
        if needs_prior && self.prior.is_none() {
            return Err(CliError::config(
                "hpe and bayes estimators need a `prior` to build posteriors from",
            ));
        }
        if self.sample_size == 0 {
            return Err(CliError::config("sample_size must be at least 1"));
        }
        if self.replicates < 2 {
            return Err(CliError::config("replicates must be at least 2"));
        }
        let spec = self.quantity.to_spec();
        spec.validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        let l = self.loss.to_spec();
        l.validate().map_err(|e| CliError::config(e.to_string()))?;
        if !loss_applies(&l, self.model, &self.quantity) {
            return Err(CliError::config(format!(
                "loss {} needs a strictly positive quantity, but {} of the {} model \
                 can reach nonpositive values",
                l.digest(),
                spec.digest(),
                self.model.kind().name()
            )));
        }
        Ok(())
    }
}
