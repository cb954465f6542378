//! Posterior construction by importance sampling.

use super::{
    checked_log_likelihood, point_from_coords, InferenceError, ParamPrior, PosteriorSource,
    Result, WeightedPosterior,
};
use crate::model::{ModelKind, ObservationSample, ParamPoint};
use crate::rng::RngStream;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// A proposal distribution for importance sampling: sampling plus log
/// density, over the same parameter space as the target prior.
pub trait Proposal: Send + Sync {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<ParamPoint>;
    fn log_pdf(&self, point: &ParamPoint) -> Result<f64>;
}

/// Importance sampling with the prior itself as proposal: weights reduce
/// to the likelihood.
///
/// Draw `i` uses the dedicated substream `stream.substream(i)`, so the
/// result is bit-identical for any degree of parallelism. Weights are
/// normalized; the effective sample size `(sum w)^2 / sum w^2` lands in the
/// diagnostics as a warning when it falls below 1% of the draw count.
/// Empty data yields uniform weights tagged as a prior-only posterior.
pub fn sample_posterior_is(
    prior: &dyn ParamPrior,
    data: &ObservationSample,
    n: usize,
    stream: RngStream,
) -> Result<WeightedPosterior> {
    is_impl(prior, None, data, n, stream)
}

/// Importance sampling from an explicit proposal; weights carry the
/// prior-over-proposal density correction on top of the likelihood.
pub fn sample_posterior_is_from(
    prior: &dyn ParamPrior,
    proposal: &dyn Proposal,
    data: &ObservationSample,
    n: usize,
    stream: RngStream,
) -> Result<WeightedPosterior> {
    is_impl(prior, Some(proposal), data, n, stream)
}

fn is_impl(
    prior: &dyn ParamPrior,
    proposal: Option<&dyn Proposal>,
    data: &ObservationSample,
    n: usize,
    stream: RngStream,
) -> Result<WeightedPosterior> {
    if n < 100 {
        return Err(InferenceError::InvalidSetting {
            name: "posterior_draws",
            value: n as f64,
            constraint: ">= 100",
        });
    }
    let kind = prior.model_kind();
    let drawn: Vec<(ParamPoint, f64)> = (0..n as u64)
        .into_par_iter()
        .map(|i| -> Result<(ParamPoint, f64)> {
            let mut rng = stream.substream(i).rng();
            match proposal {
                None => {
                    let point = prior.sample_param(&mut rng)?;
                    let lw = checked_log_likelihood(kind, &point, data)?;
                    Ok((point, lw))
                }
                Some(q) => {
                    let point = q.sample(&mut rng)?;
                    let lp = prior.log_prior(&point)?;
                    let lw = if lp == f64::NEG_INFINITY {
                        f64::NEG_INFINITY
                    } else {
                        checked_log_likelihood(kind, &point, data)? + lp - q.log_pdf(&point)?
                    };
                    Ok((point, lw))
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let (points, log_weights): (Vec<_>, Vec<_>) = drawn.into_iter().unzip();
    if data.is_empty() && proposal.is_none() {
        let mut post = WeightedPosterior::uniform(points, PosteriorSource::PriorOnly)?;
        post.push_diagnostic("empty sample: weights uniform, posterior equals the prior".into());
        return Ok(post);
    }
    let mut post =
        WeightedPosterior::from_log_weights(points, log_weights, PosteriorSource::Importance)?;
    if post.ess() < 0.01 * n as f64 {
        post.push_diagnostic(format!(
            "low effective sample size: {:.1} of {} draws; weights are dominated by few points",
            post.ess(),
            n
        ));
    }
    Ok(post)
}

/// Independent log-normal proposal over positive parameter coordinates,
/// e.g. centered at the MLE with inflated spread as an escape hatch when
/// prior-proposal weights degenerate.
#[derive(Debug, Clone)]
pub struct LogNormalProposal {
    kind: ModelKind,
    log_center: Vec<f64>,
    log_sd: Vec<f64>,
}

impl LogNormalProposal {
    /// Centers the proposal at `point` (all coordinates must be positive)
    /// with the given per-coordinate standard deviations on the log scale.
    pub fn centered_at(point: &ParamPoint, log_sd: Vec<f64>) -> Result<Self> {
        let kind = point.kind();
        if matches!(kind, ModelKind::Bernoulli | ModelKind::Normal) {
            return Err(InferenceError::ModelMismatch {
                what: "log-normal proposal",
                expected: "exponential or weibull (positive coordinates)",
                got: kind.name(),
            });
        }
        let coords = point.coords();
        if log_sd.len() != coords.len() {
            return Err(InferenceError::InvalidSetting {
                name: "log_sd",
                value: log_sd.len() as f64,
                constraint: "one entry per parameter coordinate",
            });
        }
        for &sd in &log_sd {
            if !(sd > 0.0 && sd.is_finite()) {
                return Err(InferenceError::InvalidSetting {
                    name: "log_sd",
                    value: sd,
                    constraint: "> 0",
                });
            }
        }
        Ok(Self {
            kind,
            log_center: coords.iter().map(|c| c.ln()).collect(),
            log_sd,
        })
    }
}

impl Proposal for LogNormalProposal {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<ParamPoint> {
        let coords: Vec<f64> = self
            .log_center
            .iter()
            .zip(&self.log_sd)
            .map(|(&c, &sd)| {
                let z: f64 = StandardNormal.sample(rng);
                (c + sd * z).exp()
            })
            .collect();
        Ok(point_from_coords(self.kind, &coords))
    }

    fn log_pdf(&self, point: &ParamPoint) -> Result<f64> {
        if point.kind() != self.kind {
            return Err(InferenceError::ModelMismatch {
                what: "log-normal proposal density",
                expected: self.kind.name(),
                got: point.kind().name(),
            });
        }
        const LN_2PI: f64 = 1.837_877_066_409_345_5;
        let mut lp = 0.0;
        for ((&x, &c), &sd) in point
            .coords()
            .iter()
            .zip(&self.log_center)
            .zip(&self.log_sd)
        {
            if x <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            let z = (x.ln() - c) / sd;
            lp += -sd.ln() - 0.5 * LN_2PI - 0.5 * z * z - x.ln();
        }
        Ok(lp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::ConjugateSpec;
    use crate::numeric::adaptive_quadrature;

    fn exp_mean(post: &WeightedPosterior) -> f64 {
        post.weighted_mean(|p| match p {
            ParamPoint::Exponential { mean } => *mean,
            _ => unreachable!(),
        })
    }

    fn conjugate_case() -> (ConjugateSpec, ObservationSample) {
        let prior = ConjugateSpec::ExpInvGamma { n0: 2.0, s0: 10.0 };
        let data = ObservationSample::new(vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 20.0, 28.0]);
        (prior, data)
    }

    #[test]
    fn prior_proposal_recovers_the_conjugate_posterior_mean() {
        let (prior, data) = conjugate_case();
        let post =
            sample_posterior_is(&prior, &data, 100_000, RngStream::with_index(42, 1)).unwrap();
        let mean = exp_mean(&post);
        assert!(
            (mean - 100.0 / 9.0).abs() < 0.15,
            "weighted mean {mean} vs closed form 11.111"
        );
        assert_eq!(post.source(), PosteriorSource::Importance);
        assert!(post.ess() >= 1.0 && post.ess() <= 100_000.0);
    }

    #[test]
    fn empty_sample_yields_the_prior_with_uniform_weights() {
        let (prior, _) = conjugate_case();
        let post = sample_posterior_is(
            &prior,
            &ObservationSample::empty(),
            1_000,
            RngStream::with_index(42, 2),
        )
        .unwrap();
        assert_eq!(post.source(), PosteriorSource::PriorOnly);
        assert_eq!(post.ess(), 1_000.0);
        assert!(post.diagnostics().iter().any(|d| d.contains("empty sample")));
        // prior mean of IG(2,10) is 10/(2-1) = 10; MC noise is wide (heavy
        // tail), so only sanity-check the scale
        let mean = exp_mean(&post);
        assert!(mean > 5.0 && mean < 20.0, "prior-only mean {mean}");
    }

    #[test]
    fn impossible_data_is_a_prior_data_conflict() {
        let (prior, _) = conjugate_case();
        let err = sample_posterior_is(
            &prior,
            &ObservationSample::new(vec![-3.0]),
            200,
            RngStream::with_index(42, 3),
        )
        .unwrap_err();
        assert!(
            err.to_string().contains("prior-data conflict: zero-likelihood proposal"),
            "unexpected: {err}"
        );
    }

    #[test]
    fn conflicting_data_fires_the_low_ess_warning() {
        // prior concentrated near 0.1, data demanding theta near 50
        let prior = ConjugateSpec::ExpInvGamma { n0: 2.0, s0: 0.2 };
        let data = ObservationSample::new(vec![50.0, 60.0]);
        let post =
            sample_posterior_is(&prior, &data, 2_000, RngStream::with_index(42, 4)).unwrap();
        assert!(
            post.ess() < 20.0,
            "conflict should collapse ess, got {}",
            post.ess()
        );
        assert!(
            post.diagnostics()
                .iter()
                .any(|d| d.contains("low effective sample size")),
            "diagnostics: {:?}",
            post.diagnostics()
        );
    }

    #[test]
    fn draw_count_floor_is_enforced() {
        let (prior, data) = conjugate_case();
        let err = sample_posterior_is(&prior, &data, 50, RngStream::new(1)).unwrap_err();
        assert!(err.to_string().contains("posterior_draws"), "{err}");
    }

    #[test]
    fn mle_centered_proposal_matches_prior_proposal_answer() {
        let (prior, data) = conjugate_case();
        let fitted = ParamPoint::Exponential { mean: data.mean() };
        let proposal = LogNormalProposal::centered_at(&fitted, vec![0.6]).unwrap();
        let post = sample_posterior_is_from(
            &prior,
            &proposal,
            &data,
            40_000,
            RngStream::with_index(42, 5),
        )
        .unwrap();
        let mean = exp_mean(&post);
        assert!(
            (mean - 100.0 / 9.0).abs() < 0.15,
            "proposal-corrected mean {mean}"
        );
        // a well-centered proposal should not collapse the weights
        assert!(post.ess() > 4_000.0, "ess {}", post.ess());
    }

    #[test]
    fn log_normal_proposal_density_integrates_to_one() {
        let proposal = LogNormalProposal::centered_at(
            &ParamPoint::Exponential { mean: 3.0 },
            vec![0.4],
        )
        .unwrap();
        let mass = adaptive_quadrature(
            &|x: f64| {
                proposal
                    .log_pdf(&ParamPoint::Exponential { mean: x })
                    .unwrap()
                    .exp()
            },
            1e-4,
            200.0,
            1e-10,
        );
        assert!((mass - 1.0).abs() < 1e-6, "proposal mass {mass}");
    }

    #[test]
    fn proposal_rejects_mismatched_shapes() {
        assert!(
            LogNormalProposal::centered_at(&ParamPoint::Bernoulli { prob: 0.5 }, vec![0.1])
                .is_err()
        );
        assert!(LogNormalProposal::centered_at(
            &ParamPoint::Weibull {
                scale: 1.0,
                shape: 2.0
            },
            vec![0.1]
        )
        .is_err());
        assert!(LogNormalProposal::centered_at(
            &ParamPoint::Exponential { mean: 1.0 },
            vec![-0.1]
        )
        .is_err());
    }

    #[test]
    fn results_are_identical_across_thread_counts() {
        let (prior, data) = conjugate_case();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                sample_posterior_is(&prior, &data, 5_000, RngStream::with_index(9, 0)).unwrap()
            })
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.ess().to_bits(), b.ess().to_bits());
        for (wa, wb) in a.weights().iter().zip(b.weights()) {
            assert_eq!(wa.to_bits(), wb.to_bits(), "weights drifted across pools");
        }
        for (pa, pb) in a.points().iter().zip(b.points()) {
            assert_eq!(pa, pb);
        }
    }
}
