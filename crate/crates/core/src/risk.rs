//! Empirical risk benchmarking: frequentist risk at a fixed true parameter
//! and Bayes risk under a prior, for any estimator packaged as an
//! [`EstimatorHandle`].
//!
//! Replicates are seeded by replicate index and reduced in index order, so
//! reports are bit-identical for any worker count. Estimators that fail on
//! a pathological replicate (for example a degenerate likelihood fit) are
//! excluded and counted; more than 1% failures fails the whole run.

use crate::dist::DistError;
use crate::inference::{InferenceError, ParamPrior};
use crate::loss::{LossError, LossSpec};
use crate::model::{ObservationSample, ParamPoint};
use crate::qoi::{qoi_eval, QoiError, QuantitySpec};
use crate::rng::RngStream;
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RiskError {
    #[error(transparent)]
    Qoi(#[from] QoiError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("invalid setting {name} = {value}: requires {constraint}")]
    InvalidSetting {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error(
        "estimator {name} failed on {failed} of {reps} replicates (limit 1%); first failure: {first}"
    )]
    TooManyFailures {
        name: String,
        failed: usize,
        reps: usize,
        first: String,
    },
}

type Result<T> = std::result::Result<T, RiskError>;

/// The result of applying an estimation procedure to one dataset: either a
/// decision, or a reason the procedure was unusable on that dataset.
pub type EstimateResult = std::result::Result<f64, String>;

/// A named estimation procedure mapping a dataset (plus a private random
/// stream, for procedures with Monte-Carlo internals) to a decision.
/// The procedure must be deterministic given `(sample, stream)`.
#[derive(Clone)]
pub struct EstimatorHandle {
    name: String,
    digest: String,
    procedure: Arc<dyn Fn(&ObservationSample, RngStream) -> EstimateResult + Send + Sync>,
}

impl fmt::Debug for EstimatorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EstimatorHandle")
            .field("name", &self.name)
            .field("digest", &self.digest)
            .finish_non_exhaustive()
    }
}

impl EstimatorHandle {
    pub fn new(
        name: impl Into<String>,
        digest: impl Into<String>,
        procedure: impl Fn(&ObservationSample, RngStream) -> EstimateResult + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            digest: digest.into(),
            procedure: Arc::new(procedure),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Settings summary recorded in reports.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn apply(&self, data: &ObservationSample, stream: RngStream) -> EstimateResult {
        (self.procedure)(data, stream)
    }
}

/// An empirical risk value with its Monte-Carlo precision and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub estimator: String,
    pub estimator_digest: String,
    /// Mean loss over the contributing replicates.
    pub risk: f64,
    /// Sample standard deviation of the replicate losses divided by the
    /// square root of the contributing count.
    pub mc_std_error: f64,
    /// Replicates that contributed to the mean.
    pub replicates: usize,
    /// Replicates excluded because the estimator failed on them.
    pub failures: usize,
    pub loss_digest: String,
    /// True-parameter digest (frequentist) or prior digest (Bayes).
    pub scenario: String,
}

fn check_settings(spec: &QuantitySpec, loss: &LossSpec, n: usize, reps: usize) -> Result<()> {
    spec.validate()?;
    loss.validate()?;
    if reps < 2 {
        return Err(RiskError::InvalidSetting {
            name: "replicates",
            value: reps as f64,
            constraint: ">= 2",
        });
    }
    if n < 1 {
        return Err(RiskError::InvalidSetting {
            name: "sample_size",
            value: n as f64,
            constraint: ">= 1",
        });
    }
    Ok(())
}

/// Index-ordered reduction of per-replicate outcomes into a mean, its
/// Monte-Carlo standard error, and the failure tally.
fn reduce_replicates(
    outcomes: Vec<EstimateResult>,
    estimator: &str,
) -> Result<(f64, f64, usize, usize)> {
    let reps = outcomes.len();
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let mut good = 0usize;
    let mut first_failure: Option<String> = None;
    for outcome in outcomes {
        match outcome {
            Ok(v) => {
                sum += v;
                sumsq += v * v;
                good += 1;
            }
            Err(msg) => {
                first_failure.get_or_insert(msg);
            }
        }
    }
    let failed = reps - good;
    if failed as f64 > 0.01 * reps as f64 {
        return Err(RiskError::TooManyFailures {
            name: estimator.to_string(),
            failed,
            reps,
            first: first_failure.unwrap_or_default(),
        });
    }
    let m = good as f64;
    let risk = sum / m;
    let var = ((sumsq - sum * sum / m) / (m - 1.0)).max(0.0);
    Ok((risk, (var / m).sqrt(), good, failed))
}

/// Average loss of the estimator over `reps` datasets drawn at the fixed
/// true parameter: the Monte-Carlo form of the frequentist risk
/// `E[C(phi(theta), delta(D)) | theta]`.
///
/// Replicate `i` draws its dataset on `stream.substream(i).substream(0)`
/// and hands `stream.substream(i).substream(1)` to the estimator.
pub fn frequentist_risk(
    est: &EstimatorHandle,
    theta_true: &ParamPoint,
    spec: &QuantitySpec,
    loss: &LossSpec,
    n: usize,
    reps: usize,
    stream: RngStream,
) -> Result<RiskReport> {
    check_settings(spec, loss, n, reps)?;
    let phi_true = qoi_eval(spec, theta_true)?;
    // catch loss-domain problems (a nonpositive quantity under the
    // log-quadratic loss) before burning replicates
    loss.loss(phi_true, phi_true)?;
    let dist = theta_true.observation_dist();
    dist.validate()?;

    let outcomes = (0..reps as u64)
        .into_par_iter()
        .map(|i| -> Result<EstimateResult> {
            let sub = stream.substream(i);
            let mut rng = sub.substream(0).rng();
            let mut values = Vec::with_capacity(n);
            for _ in 0..n {
                values.push(dist.sample(&mut rng)?);
            }
            let data = ObservationSample::new(values);
            Ok(match est.apply(&data, sub.substream(1)) {
                Ok(d) => match loss.loss(phi_true, d) {
                    Ok(c) => Ok(c),
                    Err(e) => Err(e.to_string()),
                },
                Err(msg) => Err(msg),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (risk, mc_std_error, good, failed) = reduce_replicates(outcomes, est.name())?;
    Ok(RiskReport {
        estimator: est.name().to_string(),
        estimator_digest: est.digest().to_string(),
        risk,
        mc_std_error,
        replicates: good,
        failures: failed,
        loss_digest: loss.digest(),
        scenario: theta_true.digest(),
    })
}

/// Average loss of the estimator over `reps` replicates that each draw a
/// parameter from the prior and then a dataset from it: the Monte-Carlo
/// form of the Bayes risk, the prior average of the frequentist risk.
///
/// Replicate seeding matches [`frequentist_risk`]; the parameter draw and
/// the dataset share `substream(0)` sequentially.
pub fn bayes_risk(
    est: &EstimatorHandle,
    prior: &(impl ParamPrior + ?Sized),
    spec: &QuantitySpec,
    loss: &LossSpec,
    n: usize,
    reps: usize,
    stream: RngStream,
) -> Result<RiskReport> {
    check_settings(spec, loss, n, reps)?;

    let outcomes = (0..reps as u64)
        .into_par_iter()
        .map(|i| -> Result<EstimateResult> {
            let sub = stream.substream(i);
            let mut rng = sub.substream(0).rng();
            let theta = prior.sample_param(&mut rng)?;
            let phi = qoi_eval(spec, &theta)?;
            let dist = theta.observation_dist();
            let mut values = Vec::with_capacity(n);
            for _ in 0..n {
                values.push(dist.sample(&mut rng)?);
            }
            let data = ObservationSample::new(values);
            Ok(match est.apply(&data, sub.substream(1)) {
                Ok(d) => match loss.loss(phi, d) {
                    Ok(c) => Ok(c),
                    Err(e) => Err(e.to_string()),
                },
                Err(msg) => Err(msg),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (risk, mc_std_error, good, failed) = reduce_replicates(outcomes, est.name())?;
    Ok(RiskReport {
        estimator: est.name().to_string(),
        estimator_digest: est.digest().to_string(),
        risk,
        mc_std_error,
        replicates: good,
        failures: failed,
        loss_digest: loss.digest(),
        scenario: prior.digest(),
    })
}
