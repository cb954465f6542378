//! Config-driven risk benchmarks: build the requested estimators as
//! procedures over replicate datasets, run frequentist or prior-averaged
//! risk for each, and emit the comparison as JSON.

use std::sync::Arc;

use serde::Serialize;
use uq_core::estimators::{bayes_estimate, hpe_expectation, hpe_quantile, DecisionProblem};
use uq_core::inference::{mle_fit, plug_in, sample_posterior_is, ParamPrior, WeightedPosterior};
use uq_core::loss::LossSpec;
use uq_core::model::{ModelKind, ObservationSample};
use uq_core::qoi::QuantitySpec;
use uq_core::risk::{bayes_risk, frequentist_risk, EstimatorHandle, RiskReport};
use uq_core::rng::RngStream;

use crate::config::{EstimatorName, PriorObject, RiskConfig};
use crate::{CliError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct RiskEntry {
    pub estimator: String,
    pub estimator_digest: String,
    pub risk: f64,
    pub mc_std_error: f64,
    pub replicates: usize,
    pub failures: usize,
    pub loss: String,
    pub scenario: String,
}

impl From<RiskReport> for RiskEntry {
    fn from(r: RiskReport) -> Self {
        RiskEntry {
            estimator: r.estimator,
            estimator_digest: r.estimator_digest,
            risk: r.risk,
            mc_std_error: r.mc_std_error,
            replicates: r.replicates,
            failures: r.failures,
            loss: r.loss_digest,
            scenario: r.scenario,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskRunReport {
    pub config: RiskConfig,
    pub entries: Vec<RiskEntry>,
}

pub fn render_risk_json(report: &RiskRunReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// Per-replicate posterior for the sampled estimators: exact draws when the
/// prior is conjugate for the model, importance sampling otherwise.
fn replicate_posterior(
    prior: &PriorObject,
    kind: ModelKind,
    data: &ObservationSample,
    draws: usize,
    stream: RngStream,
) -> std::result::Result<WeightedPosterior, String> {
    let post = match prior.conjugate() {
        Some(c) if c.model_kind() == kind => {
            let updated = c.update(data).map_err(|e| e.to_string())?;
            if !updated.is_proper() {
                return Err(format!("posterior {} is improper", updated.digest()));
            }
            updated.sample_posterior(draws, stream).map_err(|e| e.to_string())?
        }
        _ => sample_posterior_is(prior.as_param_prior(), data, draws, stream)
            .map_err(|e| e.to_string())?,
    };
    if post.ess() < 50.0 {
        return Err(format!(
            "posterior effective sample size {:.1} below 50",
            post.ess()
        ));
    }
    Ok(post)
}

/// Closed-form conjugate posterior mean of the quantity, when one exists.
fn exact_posterior_mean(
    prior: &PriorObject,
    kind: ModelKind,
    data: &ObservationSample,
    spec: &QuantitySpec,
) -> std::result::Result<Option<f64>, String> {
    match prior.conjugate() {
        Some(c) if c.model_kind() == kind => {
            let updated = c.update(data).map_err(|e| e.to_string())?;
            updated.posterior_qoi_mean(spec).map_err(|e| e.to_string())
        }
        _ => Ok(None),
    }
}

fn build_estimator(
    name: EstimatorName,
    cfg: &RiskConfig,
    prior: Option<Arc<PriorObject>>,
) -> Result<EstimatorHandle> {
    let kind = cfg.model.kind();
    let spec = cfg.quantity.to_spec();
    let loss = cfg.loss.to_spec();
    let draws = cfg.montecarlo.posterior_draws;
    let predictive = cfg.montecarlo.predictive_draws;

    let handle = match name {
        EstimatorName::Mle => {
            let spec = spec.clone();
            EstimatorHandle::new("mle", "plug-in at the fitted parameter", move |data, _| {
                let fitted = mle_fit(kind, data).map_err(|e| e.to_string())?;
                plug_in(&spec, &fitted).map_err(|e| e.to_string())
            })
        }
        EstimatorName::Hpe => {
            let prior = prior.expect("validated: hpe needs a prior");
            let spec = spec.clone();
            EstimatorHandle::new(
                "hpe",
                "posterior average (predictive quantile for quantile targets)",
                move |data, stream| match &spec {
                    QuantitySpec::Quantile { order } => {
                        let post =
                            replicate_posterior(&prior, kind, data, draws, stream.substream(0))?;
                        hpe_quantile(*order, &post, predictive, stream.substream(1))
                            .map_err(|e| e.to_string())
                    }
                    _ => {
                        if let Some(v) = exact_posterior_mean(&prior, kind, data, &spec)? {
                            return Ok(v);
                        }
                        let post =
                            replicate_posterior(&prior, kind, data, draws, stream.substream(0))?;
                        hpe_expectation(&spec, &post).map_err(|e| e.to_string())
                    }
                },
            )
        }
        EstimatorName::Bayes => {
            let prior = prior.expect("validated: bayes needs a prior");
            let spec = spec.clone();
            EstimatorHandle::new(
                "bayes",
                format!("posterior loss minimizer for {}", loss.digest()),
                move |data, stream| {
                    if matches!(loss, LossSpec::Quadratic { .. }) {
                        if let Some(v) = exact_posterior_mean(&prior, kind, data, &spec)? {
                            return Ok(v);
                        }
                    }
                    let post =
                        replicate_posterior(&prior, kind, data, draws, stream.substream(0))?;
                    let problem = DecisionProblem::new(spec.clone(), loss, &post)
                        .map_err(|e| e.to_string())?;
                    bayes_estimate(&problem).map_err(|e| e.to_string())
                },
            )
        }
    };
    Ok(handle)
}

pub fn run_risk(cfg: &RiskConfig) -> Result<RiskRunReport> {
    cfg.validate()?;
    let kind = cfg.model.kind();
    let spec = cfg.quantity.to_spec();
    let loss = cfg.loss.to_spec();
    let prior = match &cfg.prior {
        Some(p) => Some(Arc::new(p.build(kind)?)),
        None => None,
    };
    let truth = match &cfg.truth {
        Some(t) => Some(t.build(cfg.model)?),
        None => None,
    };

    // one shared stream: every estimator sees identical replicate datasets
    let stream = RngStream::with_index(cfg.seed, 0);
    let mut entries = Vec::new();
    let mut seen = Vec::new();
    for name in &cfg.estimators {
        if seen.contains(name) {
            continue;
        }
        seen.push(*name);
        let est = build_estimator(*name, cfg, prior.clone())?;
        let report = match (&truth, &prior) {
            (Some(theta), _) => frequentist_risk(
                &est,
                theta,
                &spec,
                &loss,
                cfg.sample_size,
                cfg.replicates,
                stream,
            )?,
            (None, Some(p)) => bayes_risk(
                &est,
                p.as_param_prior(),
                &spec,
                &loss,
                cfg.sample_size,
                cfg.replicates,
                stream,
            )?,
            (None, None) => {
                return Err(CliError::config(
                    "risk benchmarks need `truth` or `prior`",
                ))
            }
        };
        entries.push(RiskEntry::from(report));
    }
    Ok(RiskRunReport {
        config: cfg.clone(),
        entries,
    })
}
