//! Cross-checks between the three posterior constructions for the
//! exponential model: the inverse-gamma closed form, importance sampling,
//! and random-walk Metropolis, plus the large-sample normal approximation.

use uq_core::dist::DistFamily;
use uq_core::inference::{
    asymptotic_approx, mle_fit, sample_posterior_is, sample_posterior_mh, ApproxKind,
    ConjugateSpec, WeightedPosterior,
};
use uq_core::model::{ModelKind, ObservationSample, ParamPoint};
use uq_core::qoi::QuantitySpec;
use uq_core::rng::RngStream;

struct Moments {
    mean: f64,
    var: f64,
    se_mean: f64,
    se_var: f64,
}

fn theta_moments(post: &WeightedPosterior) -> Moments {
    let coord = |p: &ParamPoint| p.coords()[0];
    let mean = post.weighted_mean(coord);
    let var = post.weighted_mean(|p| (coord(p) - mean).powi(2));
    let m4 = post.weighted_mean(|p| (coord(p) - mean).powi(4));
    let ess = post.ess();
    Moments {
        mean,
        var,
        se_mean: (var / ess).sqrt(),
        // standard error of a sample variance: sqrt((m4 - var^2) / n)
        se_var: ((m4 - var * var).max(0.0) / ess).sqrt(),
    }
}

#[test]
fn samplers_reproduce_the_closed_form_posterior() {
    let prior = ConjugateSpec::ExpInvGamma { n0: 2.0, s0: 10.0 };
    let data = ObservationSample::new(vec![4.0, 6.0, 2.0, 18.0, 10.0, 9.0, 21.0, 20.0]);
    assert_eq!(data.sum(), 90.0, "fixture data should sum to 90");

    // conjugate update gives IG(10, 100) exactly
    let exact_mean = 100.0 / 9.0;
    let exact_var = 100.0 * 100.0 / (81.0 * 8.0);

    let is_post = sample_posterior_is(&prior, &data, 100_000, RngStream::with_index(42, 0))
        .expect("importance sampling runs");
    let mh_post = sample_posterior_mh(
        &prior,
        &data,
        100_000,
        10_000,
        &[0.5],
        RngStream::with_index(42, 1),
    )
    .expect("metropolis runs");

    let mut results = Vec::new();
    for (name, post) in [("importance", &is_post), ("metropolis", &mh_post)] {
        let m = theta_moments(post);
        assert!(
            (m.mean - exact_mean).abs() <= 3.0 * m.se_mean,
            "{name}: mean {} vs closed form {exact_mean}, 3 mc-se = {}",
            m.mean,
            3.0 * m.se_mean
        );
        assert!(
            (m.var - exact_var).abs() <= 3.0 * m.se_var,
            "{name}: variance {} vs closed form {exact_var}, 3 mc-se = {}",
            m.var,
            3.0 * m.se_var
        );
        results.push(m);
    }

    let (a, b) = (&results[0], &results[1]);
    assert!(
        (a.mean - b.mean).abs() <= 3.0 * (a.se_mean + b.se_mean),
        "samplers disagree on the mean: {} vs {}",
        a.mean,
        b.mean
    );
    assert!(
        (a.var - b.var).abs() <= 3.0 * (a.se_var + b.se_var),
        "samplers disagree on the variance: {} vs {}",
        a.var,
        b.var
    );
}

#[test]
fn normal_approximation_tracks_the_exact_posterior() {
    let mut rng = RngStream::with_index(42, 2).rng();
    let ys = DistFamily::Exponential { mean: 4.0 }
        .sample_many(200, &mut rng)
        .unwrap();
    let data = ObservationSample::new(ys);

    let mle = mle_fit(ModelKind::Exponential, &data).unwrap();
    let approx =
        asymptotic_approx(ApproxKind::Posterior, &mle, &QuantitySpec::mean(), data.n()).unwrap();

    let post = ConjugateSpec::ExpInvGamma { n0: 2.0, s0: 10.0 }
        .update(&data)
        .unwrap();
    let exact = post.theta_dist().expect("exponential posterior has a closed form");

    let lo = exact.quantile(1e-6).unwrap();
    let hi = exact.quantile(1.0 - 1e-6).unwrap();
    let mut sup: f64 = 0.0;
    for i in 0..=2000 {
        let x = lo + (hi - lo) * i as f64 / 2000.0;
        sup = sup.max((exact.cdf(x).unwrap() - approx.cdf(x)).abs());
    }
    assert!(
        sup < 0.03,
        "sup-norm gap between exact posterior and normal approximation is {sup}"
    );
}
