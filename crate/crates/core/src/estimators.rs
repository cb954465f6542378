//! Estimation rules over a weighted posterior: Bayes estimates by
//! expected-loss minimization, heuristic predictive estimates (HPE) that
//! plug the posterior predictive distribution into the quantity, and the
//! exponential-model closed forms that make the two comparable.
//!
//! The central identity: for expectation-form quantities the HPE equals the
//! posterior mean, i.e. the quadratic-loss Bayes estimate. For quantiles it
//! does not; [`not_bayes_demo`] constructs two problems with identical
//! quantile posteriors but different HPEs, so no loss function on the
//! quantile can reproduce the HPE. [`hpe_as_predictor_check`] shows what the
//! predictive quantile is instead: the Bayes predictor of the next
//! observation under the order-matched pinball loss.

use crate::dist::{DistError, DistFamily};
use crate::inference::{ConjugateSpec, InferenceError, WeightedPosterior};
use crate::loss::{LossError, LossSpec};
use crate::model::{ModelKind, ObservationSample};
use crate::numeric::{empirical_quantile, golden_section_min, weighted_quantile};
use crate::qoi::{qoi_eval, qoi_eval_log, QoiError, QuantitySpec};
use crate::rng::RngStream;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Qoi(#[from] QoiError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("decision problem needs a nonempty posterior")]
    EmptyPosterior,
    #[error("posterior mixes {first} and {second} parameter points")]
    MixedModels {
        first: &'static str,
        second: &'static str,
    },
    #[error("log-scale estimation needs positive quantity values; draw {index} gives {value}")]
    NonpositiveQuantity { index: usize, value: f64 },
    #[error("quantile targets need the predictive sample: use hpe_quantile")]
    QuantileNeedsPredictive,
    #[error("posterior averaging is exact only for expectation-form quantities (a mean or an exceedance), got {0}")]
    NotExpectationForm(&'static str),
    #[error("invalid setting {name} = {value}: requires {constraint}")]
    InvalidSetting {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
}

type Result<T> = std::result::Result<T, EstimatorError>;

/// One estimation problem: a quantity, a loss, and the posterior to act
/// under. Quantity values at every posterior point are evaluated once at
/// construction, so repeated loss evaluations are cheap.
///
/// Under log-quadratic loss the log quantity is evaluated alongside, on the
/// stable log path, so exceedance probabilities that underflow to zero in
/// deep prior tails still carry their correct (finite, hugely negative) log.
#[derive(Debug)]
pub struct DecisionProblem<'a> {
    spec: QuantitySpec,
    loss: LossSpec,
    posterior: &'a WeightedPosterior,
    model: ModelKind,
    phi: Vec<f64>,
    log_phi: Option<Vec<f64>>,
}

impl<'a> DecisionProblem<'a> {
    pub fn new(
        spec: QuantitySpec,
        loss: LossSpec,
        posterior: &'a WeightedPosterior,
    ) -> Result<Self> {
        loss.validate()?;
        let first = posterior
            .points()
            .first()
            .ok_or(EstimatorError::EmptyPosterior)?;
        let model = first.kind();
        for p in posterior.points() {
            if p.kind() != model {
                return Err(EstimatorError::MixedModels {
                    first: model.name(),
                    second: p.kind().name(),
                });
            }
        }
        let phi = posterior
            .points()
            .iter()
            .map(|p| qoi_eval(&spec, p))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let log_phi = if matches!(loss, LossSpec::LogQuadratic) {
            let logs = posterior
                .points()
                .iter()
                .map(|p| qoi_eval_log(&spec, p))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            for (i, &l) in logs.iter().enumerate() {
                // a zero-mass point never enters an expectation, so only
                // weighted draws must have a usable log
                if l == f64::NEG_INFINITY && posterior.weights()[i] > 0.0 {
                    return Err(EstimatorError::NonpositiveQuantity {
                        index: i,
                        value: phi[i],
                    });
                }
            }
            Some(logs)
        } else {
            None
        };
        Ok(Self {
            spec,
            loss,
            posterior,
            model,
            phi,
            log_phi,
        })
    }

    pub fn spec(&self) -> &QuantitySpec {
        &self.spec
    }

    pub fn loss(&self) -> LossSpec {
        self.loss
    }

    pub fn posterior(&self) -> &WeightedPosterior {
        self.posterior
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    /// Quantity values at the posterior points, in point order.
    pub fn quantity_values(&self) -> &[f64] {
        &self.phi
    }
}

/// Monte-Carlo form of the expected posterior loss at decision `d`:
/// the weighted average of `C(phi_i, d)` over the posterior points.
pub fn posterior_expected_loss(p: &DecisionProblem, d: f64) -> Result<f64> {
    let w = p.posterior.weights();
    if let (LossSpec::LogQuadratic, Some(log_phi)) = (p.loss, p.log_phi.as_ref()) {
        if d <= 0.0 {
            return Err(LossError::NonpositiveLogArgument { phi: 1.0, d }.into());
        }
        let ld = d.ln();
        let mut total = 0.0;
        for (i, &l) in log_phi.iter().enumerate() {
            if w[i] == 0.0 {
                continue;
            }
            total += w[i] * (l - ld) * (l - ld);
        }
        return Ok(total);
    }
    let mut total = 0.0;
    for (i, &phi) in p.phi.iter().enumerate() {
        total += w[i] * p.loss.loss(phi, d)?;
    }
    Ok(total)
}

/// The decision minimizing the expected posterior loss, via the loss
/// family's closed form: posterior mean under quadratic loss, the
/// `under/(under+over)` posterior quantile under weighted-absolute loss
/// (lower-quantile convention), and the posterior geometric mean under
/// log-quadratic loss.
pub fn bayes_estimate(p: &DecisionProblem) -> Result<f64> {
    let w = p.posterior.weights();
    match p.loss {
        LossSpec::Quadratic { .. } => {
            Ok(p.phi.iter().zip(w).map(|(phi, wi)| phi * wi).sum())
        }
        LossSpec::WeightedAbsolute { .. } => {
            let order = p.loss.quantile_order().expect("weighted-absolute loss");
            Ok(weighted_quantile(&p.phi, w, order))
        }
        LossSpec::LogQuadratic => {
            let log_phi = p.log_phi.as_ref().expect("evaluated for log-quadratic");
            let mut mean_log = 0.0;
            for (i, &l) in log_phi.iter().enumerate() {
                if w[i] > 0.0 {
                    mean_log += w[i] * l;
                }
            }
            Ok(mean_log.exp())
        }
    }
}

/// Golden-section minimization of [`posterior_expected_loss`] over the
/// posterior quantity range widened by 10%, at 1e-10 relative tolerance.
/// Exists to cross-check the closed-form dispatch and to handle losses
/// without one; golden-section is preferred over derivative methods because
/// the weighted-absolute loss is non-smooth.
pub fn bayes_estimate_numeric(p: &DecisionProblem) -> Result<f64> {
    // evaluation errors inside the search are impossible: weights were
    // validated by the problem and log values by its constructor
    let objective = |d: f64| posterior_expected_loss(p, d).expect("loss evaluable on bracket");
    Ok(match p.loss {
        LossSpec::LogQuadratic => {
            // bracket and widen in log coordinates so the search stays
            // positive; zero-mass draws do not constrain the bracket
            let w = p.posterior.weights();
            let log_phi = p.log_phi.as_ref().expect("evaluated for log-quadratic");
            let (llo, lhi) = log_phi
                .iter()
                .zip(w)
                .filter(|(_, &wi)| wi > 0.0)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&v, _)| {
                    (lo.min(v), hi.max(v))
                });
            if llo == lhi {
                return Ok(llo.exp());
            }
            let pad = 0.1 * (lhi - llo);
            golden_section_min(|z: f64| objective(z.exp()), llo - pad, lhi + pad, 1e-10).exp()
        }
        _ => {
            let (lo, hi) = p
                .phi
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            if lo == hi {
                // point-mass quantity: every loss vanishes on the diagonal
                return Ok(lo);
            }
            let pad = 0.1 * (hi - lo);
            golden_section_min(objective, lo - pad, hi + pad, 1e-10)
        }
    })
}

/// Draws from the posterior predictive distribution, tagged with the
/// stream they came from.
#[derive(Debug, Clone)]
pub struct PredictiveSample {
    draws: Vec<f64>,
    parent: RngStream,
}

impl PredictiveSample {
    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn parent(&self) -> RngStream {
        self.parent
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }
}

/// Sample the posterior predictive distribution by double Monte Carlo:
/// draw a parameter point (multinomial resampling of the weighted
/// posterior), then one observation from it, `i_draws` times.
///
/// Each draw runs on its own derived substream, so results are identical
/// for any thread count.
pub fn double_monte_carlo(
    posterior: &WeightedPosterior,
    i_draws: usize,
    stream: RngStream,
) -> Result<PredictiveSample> {
    if i_draws < 1 {
        return Err(EstimatorError::InvalidSetting {
            name: "predictive_draws",
            value: i_draws as f64,
            constraint: ">= 1",
        });
    }
    let points = posterior.points();
    if points.is_empty() {
        return Err(EstimatorError::EmptyPosterior);
    }
    let mut cum = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    for &w in posterior.weights() {
        acc += w;
        cum.push(acc);
    }
    let draws = (0..i_draws as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.substream(i).rng();
            let u: f64 = rng.gen();
            // rounding can leave the final cumulative weight just under 1
            let k = cum.partition_point(|&c| c < u).min(points.len() - 1);
            points[k].observation_dist().sample(&mut rng)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    debug_assert!(draws.iter().all(|y| y.is_finite()));
    Ok(PredictiveSample {
        draws,
        parent: stream,
    })
}

/// Heuristic predictive estimate of an expectation-form quantity (a mean
/// or an exceedance probability). Plugging the predictive distribution
/// into such a quantity gives exactly the posterior mean of the quantity
/// by exchanging the order of integration, so no predictive sample is
/// needed: this equals the double-Monte-Carlo statistic in expectation,
/// without its simulation noise, and coincides with the quadratic-loss
/// Bayes estimate.
pub fn hpe_expectation(spec: &QuantitySpec, posterior: &WeightedPosterior) -> Result<f64> {
    match spec {
        QuantitySpec::Mean(_) | QuantitySpec::Exceedance { .. } => {}
        QuantitySpec::Quantile { .. } => return Err(EstimatorError::QuantileNeedsPredictive),
        other => return Err(EstimatorError::NotExpectationForm(other.label())),
    }
    let mut total = 0.0;
    for (i, point) in posterior.points().iter().enumerate() {
        total += posterior.weights()[i] * qoi_eval(spec, point)?;
    }
    Ok(total)
}

/// Heuristic predictive estimate of the order-`order` quantile: the
/// empirical quantile (lower convention) of a fresh double-Monte-Carlo
/// predictive sample.
pub fn hpe_quantile(
    order: f64,
    posterior: &WeightedPosterior,
    i_draws: usize,
    stream: RngStream,
) -> Result<f64> {
    let sample = double_monte_carlo(posterior, i_draws, stream)?;
    hpe_quantile_from(&sample, order)
}

/// Same as [`hpe_quantile`] on an already-drawn predictive sample, so one
/// sample can serve several orders.
pub fn hpe_quantile_from(sample: &PredictiveSample, order: f64) -> Result<f64> {
    if !(order > 0.0 && order < 1.0) {
        return Err(EstimatorError::InvalidSetting {
            name: "order",
            value: order,
            constraint: "inside (0, 1)",
        });
    }
    Ok(empirical_quantile(sample.draws(), order))
}

/// Exponential model with an inverse-gamma prior on the mean: the
/// posterior of the order-`order` quantile `q = theta ln(1/(1-order))` is
/// again inverse-gamma, with the same shape and the scale multiplied by
/// `ln(1/(1-order))`.
pub fn quantile_posterior_exponential(
    n0: f64,
    s0: f64,
    data: &ObservationSample,
    order: f64,
) -> Result<DistFamily> {
    let (np, sp) = exp_posterior_params(n0, s0, data)?;
    let c = quantile_factor(order)?;
    Ok(DistFamily::InverseGamma {
        shape: np,
        scale: c * sp,
    })
}

/// Closed-form HPE of the exponential order-`order` quantile:
/// `(e^{ln(1/(1-order))/N} - 1) * S` with posterior parameters `(N, S)`.
/// Inverts the predictive survival function `(1 + q/S)^{-N}` at
/// `1 - order`.
pub fn hpe_quantile_closed(
    n0: f64,
    s0: f64,
    data: &ObservationSample,
    order: f64,
) -> Result<f64> {
    let (np, sp) = exp_posterior_params(n0, s0, data)?;
    let c = quantile_factor(order)?;
    Ok((c / np).exp_m1() * sp)
}

fn exp_posterior_params(n0: f64, s0: f64, data: &ObservationSample) -> Result<(f64, f64)> {
    let prior = ConjugateSpec::ExpInvGamma { n0, s0 };
    match prior.update(data)? {
        ConjugateSpec::ExpInvGamma { n0, s0 } => Ok((n0, s0)),
        other => unreachable!("exponential update stays in family, got {other:?}"),
    }
}

fn quantile_factor(order: f64) -> Result<f64> {
    if !(order > 0.0 && order < 1.0) {
        return Err(EstimatorError::InvalidSetting {
            name: "order",
            value: order,
            constraint: "inside (0, 1)",
        });
    }
    Ok(-(1.0 - order).ln())
}

/// One branch of the two-problems-one-posterior construction.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileBranch {
    /// Quantile order targeted by this branch.
    pub order: f64,
    /// Posterior scale `S` of the exponential mean on this branch.
    pub mean_scale: f64,
    /// Posterior distribution of the target quantile.
    pub quantile_posterior: DistFamily,
    /// Heuristic predictive estimate of the target quantile.
    pub hpe: f64,
    /// Quadratic-loss Bayes estimate of the target quantile (the mean of
    /// `quantile_posterior`), identical across branches by construction.
    pub quadratic_bayes: Option<f64>,
}

/// Numerical certificate that the predictive quantile is not a Bayes
/// estimate of the quantile: two exponential problems whose target
/// quantiles have the *same* posterior (inverse-gamma with shape
/// `n_total` and scale `scale`) but different HPEs. Any Bayes estimate is
/// a functional of the target's posterior alone, so it cannot tell the
/// branches apart; the HPE does.
#[derive(Debug, Clone, PartialEq)]
pub struct NotBayesDemo {
    pub branches: [QuantileBranch; 2],
    /// Absolute difference of the two HPEs; positive for every valid input.
    pub hpe_gap: f64,
}

pub fn not_bayes_demo(n_total: f64, scale: f64) -> Result<NotBayesDemo> {
    if !(n_total >= 2.0 && n_total.is_finite()) {
        return Err(EstimatorError::InvalidSetting {
            name: "n_total",
            value: n_total,
            constraint: ">= 2",
        });
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(EstimatorError::InvalidSetting {
            name: "scale",
            value: scale,
            constraint: "> 0",
        });
    }
    let empty = ObservationSample::empty();
    let branch = |order: f64| -> Result<QuantileBranch> {
        // mean scale chosen so this branch's quantile posterior lands on
        // IG(n_total, scale) exactly: S = scale / ln(1/(1-order))
        let mean_scale = scale / quantile_factor(order)?;
        let quantile_posterior = quantile_posterior_exponential(n_total, mean_scale, &empty, order)?;
        let hpe = hpe_quantile_closed(n_total, mean_scale, &empty, order)?;
        Ok(QuantileBranch {
            order,
            mean_scale,
            quantile_posterior,
            hpe,
            quadratic_bayes: quantile_posterior.mean(),
        })
    };
    let branches = [branch(0.5)?, branch(0.75)?];
    let hpe_gap = (branches[0].hpe - branches[1].hpe).abs();
    Ok(NotBayesDemo { branches, hpe_gap })
}

/// Outcome of [`hpe_as_predictor_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorCheck {
    /// The predictive quantile under test.
    pub hpe: f64,
    /// Minimizer of the average pinball loss over the predictive sample.
    pub pinball_argmin: f64,
    /// Spacing of the order statistics adjacent to the quantile; the
    /// resolution at which the sample can distinguish candidate decisions.
    pub quantile_spacing: f64,
    pub agrees: bool,
}

/// Verifies the positive side of the quantile story: the predictive
/// quantile at `order` is the Bayes predictor of the next observation
/// under the pinball loss `|y - d| (order 1{d<y} + (1-order) 1{d>y})`.
/// Minimizes the sample-average pinball loss over all candidate decisions
/// (the minimum of a piecewise-linear convex function is attained at a
/// sample point) and flags agreement within one order-statistic spacing.
pub fn hpe_as_predictor_check(
    order: f64,
    posterior: &WeightedPosterior,
    i_draws: usize,
    stream: RngStream,
) -> Result<PredictorCheck> {
    let sample = double_monte_carlo(posterior, i_draws, stream)?;
    let hpe = hpe_quantile_from(&sample, order)?;
    let mut ys = sample.draws().to_vec();
    ys.sort_by(f64::total_cmp);
    let n = ys.len();
    let total: f64 = ys.iter().sum();
    // average pinball loss at d = ys[k], via prefix sums:
    //   (1-order) * (k d - below) + order * (above - (n-1-k) d)
    let mut below = 0.0;
    let mut best = (f64::INFINITY, ys[0]);
    for (k, &d) in ys.iter().enumerate() {
        let above = total - below - d;
        let cost = (1.0 - order) * (k as f64 * d - below)
            + order * (above - (n - 1 - k) as f64 * d);
        if cost < best.0 {
            best = (cost, d);
        }
        below += d;
    }
    let (_, pinball_argmin) = best;
    let k = ((order * n as f64 - 1e-9).ceil() as usize).clamp(1, n) - 1;
    let quantile_spacing = ys[(k + 1).min(n - 1)] - ys[k.saturating_sub(1)];
    let agrees =
        (pinball_argmin - hpe).abs() <= quantile_spacing + 1e-12 * hpe.abs().max(1.0);
    Ok(PredictorCheck {
        hpe,
        pinball_argmin,
        quantile_spacing,
        agrees,
    })
}
