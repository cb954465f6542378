//! The configuration-driven study runner: fit, build a posterior, and
//! evaluate every requested estimator against every requested loss.

use uq_core::estimators::{bayes_estimate, hpe_expectation, hpe_quantile, DecisionProblem};
use uq_core::inference::{
    mle_fit, plug_in, sample_posterior_is, sample_posterior_mh, ConjugateSpec, ParamPrior,
    WeightedPosterior,
};
use uq_core::loss::LossSpec;
use uq_core::model::{ModelKind, ObservationSample};
use uq_core::qoi::QuantitySpec;
use uq_core::rng::RngStream;

use crate::config::{
    DataSource, EstimatorName, MonteCarloConfig, PriorObject, SamplerChoice, StudyConfig,
};
use crate::csvio::ingest_csv;
use crate::report::{EstimateEntry, EstimateReport};
use crate::{CliError, Result};

/// Effective sample sizes below this make quantile-type summaries
/// meaningless; the run aborts rather than reporting noise.
const ESS_HARD_FLOOR: f64 = 50.0;

/// The posterior in whichever forms are available: `exact` carries the
/// conjugate closed form when the sampler path produced one, `weighted`
/// always holds draws for the generic estimators.
pub struct PosteriorBundle {
    pub exact: Option<ConjugateSpec>,
    pub weighted: WeightedPosterior,
    pub label: String,
}

pub fn resolve_data(source: &DataSource) -> Result<ObservationSample> {
    match source {
        DataSource::Inline(values) => {
            if values.is_empty() {
                return Err(CliError::config("inline data list is empty"));
            }
            if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
                return Err(CliError::config(format!(
                    "inline data contains the non-finite value {bad}"
                )));
            }
            Ok(ObservationSample::new(values.clone()))
        }
        DataSource::File(path) => ingest_csv(std::path::Path::new(path)),
    }
}

/// Random-walk step scales for the Metropolis fallback, per coordinate of
/// the model's internal (log or logit) parameterization.
fn default_step_scales(kind: ModelKind) -> Vec<f64> {
    match kind {
        ModelKind::Exponential => vec![0.4],
        ModelKind::Weibull => vec![0.2, 0.2],
        ModelKind::Bernoulli => vec![0.6],
        ModelKind::Normal => vec![0.4, 0.5],
    }
}

/// Build the posterior according to the sampler choice.
///
/// `auto` prefers the conjugate closed form, falling back to importance
/// sampling and then to Metropolis when the importance weights are starved
/// (effective sample size under 1% of the draw count). Whatever the route,
/// an effective sample size under 50 is a hard error.
pub fn build_posterior(
    prior: &PriorObject,
    model: ModelKind,
    data: &ObservationSample,
    mc: &MonteCarloConfig,
    stream: RngStream,
) -> Result<PosteriorBundle> {
    let n = mc.posterior_draws;
    let conjugate_posterior = match prior.conjugate() {
        Some(c) if c.model_kind() == model => Some(c.update(data)?),
        _ => None,
    };

    let bundle = match mc.sampler {
        SamplerChoice::Conjugate | SamplerChoice::Auto if conjugate_posterior.is_some() => {
            let post = conjugate_posterior.expect("checked above");
            if !post.is_proper() {
                return Err(CliError::numeric(format!(
                    "posterior {} is improper; provide a proper prior or more data",
                    post.digest()
                )));
            }
            let weighted = post.sample_posterior(n, stream)?;
            PosteriorBundle {
                label: format!("conjugate: {}", post.digest()),
                exact: Some(post),
                weighted,
            }
        }
        SamplerChoice::Conjugate => {
            return Err(CliError::config(format!(
                "sampler \"conjugate\" requested but the prior has no closed-form posterior \
                 for the {} model",
                model.name()
            )));
        }
        SamplerChoice::Auto | SamplerChoice::Importance => {
            let weighted = sample_posterior_is(prior.as_param_prior(), data, n, stream)?;
            let starved = weighted.ess() < 0.01 * n as f64;
            if starved && mc.sampler == SamplerChoice::Auto {
                let mut fallback = metropolis_posterior(prior, model, data, n, stream)?;
                fallback.push_diagnostic(format!(
                    "importance sampling starved (ess {:.1} of {n}); fell back to metropolis",
                    weighted.ess()
                ));
                PosteriorBundle {
                    exact: None,
                    label: "metropolis (importance fallback)".into(),
                    weighted: fallback,
                }
            } else {
                PosteriorBundle {
                    exact: None,
                    label: "importance".into(),
                    weighted,
                }
            }
        }
        SamplerChoice::Metropolis => PosteriorBundle {
            exact: None,
            label: "metropolis".into(),
            weighted: metropolis_posterior(prior, model, data, n, stream)?,
        },
    };

    let ess = bundle.weighted.ess();
    if ess < ESS_HARD_FLOOR {
        return Err(CliError::numeric(format!(
            "posterior effective sample size {ess:.1} is below the floor of {ESS_HARD_FLOOR}; \
             increase montecarlo.posterior_draws or switch sampler"
        )));
    }
    Ok(bundle)
}

fn metropolis_posterior(
    prior: &PriorObject,
    model: ModelKind,
    data: &ObservationSample,
    n: usize,
    stream: RngStream,
) -> Result<WeightedPosterior> {
    let burn = (n / 10).max(100);
    Ok(sample_posterior_mh(
        prior.as_param_prior(),
        data,
        n,
        burn,
        &default_step_scales(model),
        stream,
    )?)
}

/// Weighted standard error of the posterior mean of the quantity values.
fn expectation_std_error(problem: &DecisionProblem) -> f64 {
    let post = problem.posterior();
    let phi = problem.quantity_values();
    let mean: f64 = post
        .weights()
        .iter()
        .zip(phi)
        .map(|(w, v)| w * v)
        .sum();
    let var: f64 = post
        .weights()
        .iter()
        .zip(phi)
        .map(|(w, v)| w * (v - mean) * (v - mean))
        .sum();
    (var / post.ess()).sqrt()
}

pub fn run_study(cfg: &StudyConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    let data = resolve_data(&cfg.data)?;
    let kind = cfg.model.kind();
    let spec = cfg.quantity.to_spec();
    let prior = cfg.prior.build(kind)?;

    let posterior_stream = RngStream::with_index(cfg.seed, 0);
    let predictive_stream = RngStream::with_index(cfg.seed, 1);

    let needs_posterior = cfg
        .estimators
        .iter()
        .any(|e| matches!(e, EstimatorName::Hpe | EstimatorName::Bayes));
    let bundle = if needs_posterior {
        Some(build_posterior(
            &prior,
            kind,
            &data,
            &cfg.montecarlo,
            posterior_stream,
        )?)
    } else {
        None
    };

    let mut entries = Vec::new();
    let mut seen = Vec::new();
    for est in &cfg.estimators {
        if seen.contains(est) {
            continue;
        }
        seen.push(*est);
        match est {
            EstimatorName::Mle => {
                let fitted = mle_fit(kind, &data)?;
                entries.push(EstimateEntry {
                    estimator: "mle".into(),
                    loss: None,
                    value: plug_in(&spec, &fitted)?,
                    ess: None,
                    mc_std_error: None,
                });
            }
            EstimatorName::Hpe => {
                let bundle = bundle.as_ref().expect("posterior built for hpe");
                entries.push(hpe_entry(&spec, bundle, cfg, predictive_stream)?);
            }
            EstimatorName::Bayes => {
                let bundle = bundle.as_ref().expect("posterior built for bayes");
                for loss in &cfg.losses {
                    entries.push(bayes_entry(&spec, loss.to_spec(), bundle)?);
                }
            }
        }
    }

    let (posterior_label, diagnostics) = match &bundle {
        Some(b) => (b.label.clone(), b.weighted.diagnostics().to_vec()),
        None => ("not built (no posterior estimator requested)".into(), vec![]),
    };
    Ok(EstimateReport {
        config: cfg.clone(),
        seed: cfg.seed,
        posterior: posterior_label,
        diagnostics,
        entries,
    })
}

fn hpe_entry(
    spec: &QuantitySpec,
    bundle: &PosteriorBundle,
    cfg: &StudyConfig,
    predictive_stream: RngStream,
) -> Result<EstimateEntry> {
    match spec {
        QuantitySpec::Quantile { order } => {
            let value = hpe_quantile(
                *order,
                &bundle.weighted,
                cfg.montecarlo.predictive_draws,
                predictive_stream,
            )?;
            Ok(EstimateEntry {
                estimator: "hpe".into(),
                loss: None,
                value,
                ess: None,
                mc_std_error: None,
            })
        }
        _ => {
            // expectation-form quantities: exact posterior mean when the
            // conjugate family registers one, weighted average otherwise
            if let Some(exact) = &bundle.exact {
                if let Some(value) = exact.posterior_qoi_mean(spec)? {
                    return Ok(EstimateEntry {
                        estimator: "hpe".into(),
                        loss: None,
                        value,
                        ess: None,
                        mc_std_error: None,
                    });
                }
            }
            let value = hpe_expectation(spec, &bundle.weighted)?;
            let problem =
                DecisionProblem::new(spec.clone(), LossSpec::Quadratic { scale: 1.0 }, &bundle.weighted)?;
            Ok(EstimateEntry {
                estimator: "hpe".into(),
                loss: None,
                value,
                ess: Some(bundle.weighted.ess()),
                mc_std_error: Some(expectation_std_error(&problem)),
            })
        }
    }
}

fn bayes_entry(spec: &QuantitySpec, loss: LossSpec, bundle: &PosteriorBundle) -> Result<EstimateEntry> {
    // the quadratic-loss Bayes estimate is the posterior mean of the
    // quantity, exact when the conjugate family registers a closed form
    if let (Some(exact), LossSpec::Quadratic { .. }) = (&bundle.exact, &loss) {
        if let Some(value) = exact.posterior_qoi_mean(spec)? {
            return Ok(EstimateEntry {
                estimator: "bayes".into(),
                loss: Some(loss.digest()),
                value,
                ess: None,
                mc_std_error: None,
            });
        }
    }
    let problem = DecisionProblem::new(spec.clone(), loss, &bundle.weighted)?;
    let value = bayes_estimate(&problem)?;
    let mc_std_error = match loss {
        LossSpec::Quadratic { .. } => Some(expectation_std_error(&problem)),
        _ => None,
    };
    Ok(EstimateEntry {
        estimator: "bayes".into(),
        loss: Some(loss.digest()),
        value,
        ess: Some(bundle.weighted.ess()),
        mc_std_error,
    })
}

/// Convenience wrapper used by tests and the demo paths: run a study from a
/// JSON string.
pub fn run_study_json(json: &str) -> Result<EstimateReport> {
    let cfg: StudyConfig =
        serde_json::from_str(json).map_err(|e| CliError::config(format!("config: {e}")))?;
    run_study(&cfg)
}
