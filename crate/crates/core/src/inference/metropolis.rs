//! Random-walk Metropolis fallback sampler.
//!
//! The chain walks transformed coordinates with unconstrained support:
//! logs of positive parameters, logit of the Bernoulli probability, the
//! normal location untouched. The target density carries the matching
//! Jacobian so the chain samples the parameter posterior, not the
//! transformed one.

use super::{
    checked_log_likelihood, point_from_coords, InferenceError, ParamPrior, PosteriorSource,
    Result, WeightedPosterior,
};
use crate::model::{ModelKind, ObservationSample, ParamPoint};
use crate::rng::RngStream;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Coordinate dimension of each model's parameter space.
fn dim(kind: ModelKind) -> usize {
    match kind {
        ModelKind::Exponential | ModelKind::Bernoulli => 1,
        ModelKind::Weibull | ModelKind::Normal => 2,
    }
}

fn to_unconstrained(kind: ModelKind, point: &ParamPoint) -> Vec<f64> {
    let c = point.coords();
    match kind {
        ModelKind::Exponential => vec![c[0].ln()],
        ModelKind::Weibull => vec![c[0].ln(), c[1].ln()],
        ModelKind::Bernoulli => vec![(c[0] / (1.0 - c[0])).ln()],
        ModelKind::Normal => vec![c[0], c[1].ln()],
    }
}

/// Maps a chain state back to a parameter point together with the log
/// Jacobian of the inverse transform (d parameter / d state).
fn from_unconstrained(kind: ModelKind, z: &[f64]) -> (ParamPoint, f64) {
    match kind {
        ModelKind::Exponential => (point_from_coords(kind, &[z[0].exp()]), z[0]),
        ModelKind::Weibull => (
            point_from_coords(kind, &[z[0].exp(), z[1].exp()]),
            z[0] + z[1],
        ),
        ModelKind::Bernoulli => {
            let p = 1.0 / (1.0 + (-z[0]).exp());
            (point_from_coords(kind, &[p]), p.ln() + (1.0 - p).ln())
        }
        ModelKind::Normal => (point_from_coords(kind, &[z[0], z[1].exp()]), z[1]),
    }
}

/// Posterior sampling by random-walk Metropolis: `n` iterations, the first
/// `burn_in` discarded, one Gaussian step scale per coordinate.
///
/// Returned draws have uniform weights; the effective sample size is
/// estimated from the chain autocorrelation (initial-positive-sequence
/// rule, minimum across coordinates) and the acceptance rate is recorded
/// in the diagnostics.
pub fn sample_posterior_mh(
    prior: &dyn ParamPrior,
    data: &ObservationSample,
    n: usize,
    burn_in: usize,
    step_scales: &[f64],
    stream: RngStream,
) -> Result<WeightedPosterior> {
    let kind = prior.model_kind();
    let d = dim(kind);
    if step_scales.len() != d {
        return Err(InferenceError::InvalidSetting {
            name: "step_scales",
            value: step_scales.len() as f64,
            constraint: "one entry per parameter coordinate",
        });
    }
    for &s in step_scales {
        if !(s > 0.0 && s.is_finite()) {
            return Err(InferenceError::InvalidSetting {
                name: "step_scales",
                value: s,
                constraint: "> 0",
            });
        }
    }
    if burn_in >= n {
        return Err(InferenceError::InvalidSetting {
            name: "burn_in",
            value: burn_in as f64,
            constraint: "< iteration count",
        });
    }

    let log_target = |z: &[f64]| -> Result<f64> {
        let (point, log_jac) = from_unconstrained(kind, z);
        // overflowed transforms land outside the family's parameter
        // constraints; treat them as zero posterior mass, not as errors
        if point.observation_dist().validate().is_err() {
            return Ok(f64::NEG_INFINITY);
        }
        let lp = prior.log_prior(&point)?;
        if lp == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(lp + checked_log_likelihood(kind, &point, data)? + log_jac)
    };

    let mut rng = stream.rng();
    let mut z = Vec::new();
    let mut target = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let start = prior.sample_param(&mut rng)?;
        let zc = to_unconstrained(kind, &start);
        let t = log_target(&zc)?;
        if t > f64::NEG_INFINITY {
            z = zc;
            target = t;
            break;
        }
    }
    if z.is_empty() {
        return Err(InferenceError::ZeroLikelihood(1000));
    }

    let mut retained: Vec<ParamPoint> = Vec::with_capacity(n - burn_in);
    let mut chain_coords: Vec<Vec<f64>> = vec![Vec::with_capacity(n - burn_in); d];
    let mut accepted = 0usize;
    let mut proposal = vec![0.0; d];
    for it in 0..n {
        for (k, p) in proposal.iter_mut().enumerate() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *p = z[k] + step_scales[k] * e;
        }
        let cand_target = log_target(&proposal)?;
        let u: f64 = rng.gen::<f64>().max(1e-300);
        if u.ln() < cand_target - target {
            z.copy_from_slice(&proposal);
            target = cand_target;
            accepted += 1;
        }
        if it >= burn_in {
            let (point, _) = from_unconstrained(kind, &z);
            retained.push(point);
            for k in 0..d {
                chain_coords[k].push(z[k]);
            }
        }
    }
    if accepted == 0 {
        return Err(InferenceError::NoAcceptedProposals(n));
    }

    let kept = retained.len();
    let mut post = WeightedPosterior::uniform(retained, PosteriorSource::Metropolis)?;
    let ess = chain_coords
        .iter()
        .map(|series| ips_ess(series))
        .fold(f64::INFINITY, f64::min);
    post.set_ess(ess);
    post.push_diagnostic(format!(
        "acceptance rate {:.3} over {n} proposals",
        accepted as f64 / n as f64
    ));
    if ess < 0.01 * kept as f64 {
        post.push_diagnostic(format!(
            "low effective sample size: {ess:.1} of {kept} chain states; \
             consider retuning step scales"
        ));
    }
    Ok(post)
}

/// Effective sample size from the initial positive sequence of lagged
/// autocovariance pairs (Geyer's rule): sum consecutive even/odd pairs
/// while they stay positive, capped at 1000 lags.
fn ips_ess(series: &[f64]) -> f64 {
    let m = series.len();
    if m < 4 {
        return 1.0;
    }
    let mean = series.iter().sum::<f64>() / m as f64;
    let gamma = |k: usize| -> f64 {
        series[..m - k]
            .iter()
            .zip(&series[k..])
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum::<f64>()
            / m as f64
    };
    let g0 = gamma(0);
    if g0 <= 0.0 {
        return 1.0;
    }
    let mut rho_sum = 0.0;
    let mut k = 1;
    while k + 1 < m.min(1000) {
        let pair = gamma(k) + gamma(k + 1);
        if pair <= 0.0 {
            break;
        }
        rho_sum += pair / g0;
        k += 2;
    }
    (m as f64 / (1.0 + 2.0 * rho_sum)).clamp(1.0, m as f64)
}
