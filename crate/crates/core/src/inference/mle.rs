//! Maximum-likelihood fitting and the plug-in estimate.

use super::{InferenceError, Result};
use crate::model::{ModelKind, ObservationSample, ParamPoint};
use crate::qoi::{qoi_eval, QuantitySpec};

/// Maximum-likelihood parameter estimate for one observation model.
///
/// Exponential, Bernoulli, and Normal have closed forms (mean, success
/// fraction, mean and biased variance). Weibull solves the profile shape
/// equation `1/b = sum(x^b ln x)/sum(x^b) - mean(ln x)` by Newton-Raphson
/// with a bracketed-bisection fallback, then recovers the scale as
/// `(sum(x^b)/n)^(1/b)`.
pub fn mle_fit(kind: ModelKind, data: &ObservationSample) -> Result<ParamPoint> {
    let unusable = |reason: String| InferenceError::UnusableData {
        model: kind.name(),
        reason,
    };
    if data.is_empty() {
        return Err(unusable("empty sample".into()));
    }
    let xs = data.values();
    match kind {
        ModelKind::Exponential => {
            if xs.iter().any(|&x| x < 0.0) {
                return Err(unusable("negative observation outside support".into()));
            }
            let mean = data.mean();
            if mean <= 0.0 {
                return Err(unusable("all observations are zero".into()));
            }
            Ok(ParamPoint::Exponential { mean })
        }
        ModelKind::Bernoulli => {
            if xs.iter().any(|&x| x != 0.0 && x != 1.0) {
                return Err(unusable("observations must be 0 or 1".into()));
            }
            Ok(ParamPoint::Bernoulli { prob: data.mean() })
        }
        ModelKind::Normal => {
            if xs.len() < 2 {
                return Err(unusable("variance needs at least two observations".into()));
            }
            let mean = data.mean();
            let variance = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
                / xs.len() as f64;
            if variance <= 0.0 {
                return Err(unusable("zero sample variance (constant data)".into()));
            }
            Ok(ParamPoint::Normal { mean, variance })
        }
        ModelKind::Weibull => weibull_mle(xs),
    }
}

/// Plug-in estimate: the quantity evaluated at the fitted parameter.
/// Invariant under reparameterization because the MLE itself is.
pub fn plug_in(spec: &QuantitySpec, fitted: &ParamPoint) -> Result<f64> {
    Ok(qoi_eval(spec, fitted)?)
}

/// Profile-equation residual `1/b - sum(x^b ln x)/sum(x^b) + mean(ln x)`
/// and its derivative in `b`, computed with the largest term factored out
/// so huge shapes cannot overflow `x^b`.
fn profile_residual(log_xs: &[f64], shift: f64, beta: f64) -> (f64, f64) {
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for &lx in log_xs {
        let e = (beta * (lx - shift)).exp();
        s0 += e;
        s1 += lx * e;
        s2 += lx * lx * e;
    }
    let mean_ln = log_xs.iter().sum::<f64>() / log_xs.len() as f64;
    let ratio = s1 / s0;
    let f = 1.0 / beta - ratio + mean_ln;
    // d(ratio)/db is the s0-weighted variance of ln x, always >= 0
    let fp = -1.0 / (beta * beta) - (s2 * s0 - s1 * s1) / (s0 * s0);
    (f, fp)
}

fn weibull_mle(xs: &[f64]) -> Result<ParamPoint> {
    let unusable = |reason: String| InferenceError::UnusableData {
        model: "weibull",
        reason,
    };
    if xs.len() < 2 {
        return Err(unusable("shape needs at least two observations".into()));
    }
    if xs.iter().any(|&x| x <= 0.0) {
        return Err(unusable("nonpositive observation outside support".into()));
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Err(InferenceError::DegenerateShape {
            n: xs.len(),
            value: lo,
        });
    }
    let log_xs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let shift = hi.ln();

    let mut beta = 1.0;
    let mut converged = false;
    for _ in 0..100 {
        let (f, fp) = profile_residual(&log_xs, shift, beta);
        let step = f / fp;
        let next = beta - step;
        if !(next > 0.0) || !next.is_finite() {
            break;
        }
        beta = next;
        if step.abs() < 1e-10 {
            converged = true;
            break;
        }
    }
    if !converged {
        // residual is strictly decreasing in the shape, so bisect
        let (mut a, mut b) = (0.01, 100.0);
        let fa = profile_residual(&log_xs, shift, a).0;
        let fb = profile_residual(&log_xs, shift, b).0;
        if fa <= 0.0 || fb >= 0.0 {
            return Err(unusable(
                "profile shape equation has no root in [0.01, 100]".into(),
            ));
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if profile_residual(&log_xs, shift, mid).0 > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        beta = 0.5 * (a + b);
    }

    let s0: f64 = log_xs.iter().map(|&lx| (beta * (lx - shift)).exp()).sum();
    let scale = shift.exp() * (s0 / xs.len() as f64).powf(1.0 / beta);
    Ok(ParamPoint::Weibull { scale, shape: beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistFamily;
    use crate::numeric::golden_section_min;

    fn sample(v: &[f64]) -> ObservationSample {
        ObservationSample::new(v.to_vec())
    }

    #[test]
    fn exponential_mle_is_the_sample_mean() {
        let fit = mle_fit(ModelKind::Exponential, &sample(&[2.0, 4.0, 6.0])).unwrap();
        assert_eq!(fit, ParamPoint::Exponential { mean: 4.0 });
    }

    #[test]
    fn bernoulli_mle_is_the_success_fraction() {
        let coin = sample(&[1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        let fit = mle_fit(ModelKind::Bernoulli, &coin).unwrap();
        assert_eq!(fit, ParamPoint::Bernoulli { prob: 0.875 });
        assert!(mle_fit(ModelKind::Bernoulli, &sample(&[0.5])).is_err());
    }

    #[test]
    fn normal_mle_uses_biased_variance() {
        let fit = mle_fit(ModelKind::Normal, &sample(&[1.0, 2.0, 3.0])).unwrap();
        match fit {
            ParamPoint::Normal { mean, variance } => {
                assert_eq!(mean, 2.0);
                assert!((variance - 2.0 / 3.0).abs() < 1e-15, "variance {variance}");
            }
            other => panic!("wrong family: {other:?}"),
        }
    }

    #[test]
    fn weibull_mle_solves_the_profile_equation() {
        let fit = mle_fit(ModelKind::Weibull, &sample(&[1.0, 2.0, 3.0])).unwrap();
        let (scale, shape) = match fit {
            ParamPoint::Weibull { scale, shape } => (scale, shape),
            other => panic!("wrong family: {other:?}"),
        };
        assert!(
            (scale - 2.2585862462440258).abs() < 1e-8,
            "scale {scale}"
        );
        assert!(
            (shape - 2.7385731735959591).abs() < 1e-8,
            "shape {shape}"
        );
        // the fitted shape must kill the profile residual
        let log_xs: Vec<f64> = [1.0f64, 2.0, 3.0].iter().map(|x| x.ln()).collect();
        let (res, _) = profile_residual(&log_xs, 3.0f64.ln(), shape);
        assert!(res.abs() < 1e-8, "profile residual {res}");
    }

    #[test]
    fn weibull_mle_beats_nearby_parameters_in_likelihood() {
        let data = sample(&[0.8, 1.9, 2.4, 3.3, 0.5]);
        let fit = mle_fit(ModelKind::Weibull, &data).unwrap();
        let ll = crate::model::log_likelihood(&fit, &data).unwrap();
        let (scale, shape) = match fit {
            ParamPoint::Weibull { scale, shape } => (scale, shape),
            _ => unreachable!(),
        };
        for (ds, db) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
            let nearby = ParamPoint::Weibull {
                scale: scale + ds,
                shape: shape + db,
            };
            let ll_nearby = crate::model::log_likelihood(&nearby, &data).unwrap();
            assert!(
                ll_nearby <= ll + 1e-12,
                "perturbation ({ds}, {db}) raises likelihood: {ll_nearby} > {ll}"
            );
        }
    }

    #[test]
    fn degenerate_weibull_data_reports_divergent_shape() {
        let err = mle_fit(ModelKind::Weibull, &sample(&[5.0, 5.0, 5.0])).unwrap_err();
        assert!(
            err.to_string().contains("shape MLE diverges"),
            "unexpected message: {err}"
        );
    }

    #[test]
    fn unusable_samples_are_rejected() {
        assert!(mle_fit(ModelKind::Exponential, &ObservationSample::empty()).is_err());
        assert!(mle_fit(ModelKind::Exponential, &sample(&[-1.0, 2.0])).is_err());
        assert!(mle_fit(ModelKind::Weibull, &sample(&[2.0])).is_err());
        assert!(mle_fit(ModelKind::Weibull, &sample(&[0.0, 1.0])).is_err());
        assert!(mle_fit(ModelKind::Normal, &sample(&[3.0, 3.0, 3.0])).is_err());
    }

    #[test]
    fn exponential_mle_is_reparameterization_invariant() {
        // independent fit in the rate parameterization: maximize
        // n ln(r) - r * S by golden section, then map back
        let data = sample(&[2.0, 4.0, 6.0]);
        let (n, s) = (data.n() as f64, data.sum());
        let neg_ll = |r: f64| -(n * r.ln() - r * s);
        let rate_hat = golden_section_min(neg_ll, 1e-3, 10.0, 1e-12);
        let fit = mle_fit(ModelKind::Exponential, &data).unwrap();
        let mean = match fit {
            ParamPoint::Exponential { mean } => mean,
            _ => unreachable!(),
        };
        assert!(
            (1.0 / rate_hat - mean).abs() < 1e-6,
            "rate-parameterized optimum maps to {} vs {mean}",
            1.0 / rate_hat
        );
        // closed-form rate MLE n/S maps back exactly
        assert_eq!(1.0 / (n / s), mean);
    }

    #[test]
    fn plug_in_evaluates_quantity_at_the_fit() {
        let fit = mle_fit(ModelKind::Exponential, &sample(&[2.0, 4.0, 6.0])).unwrap();
        let v = plug_in(&QuantitySpec::Exceedance { threshold: 2.0 }, &fit).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-15, "plug-in exceedance {v}");
        let q = plug_in(&QuantitySpec::Quantile { order: 0.5 }, &fit).unwrap();
        assert!((q - 4.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn weibull_fit_is_usable_downstream() {
        let fit = mle_fit(ModelKind::Weibull, &sample(&[1.0, 2.0, 3.0])).unwrap();
        let d = fit.observation_dist();
        assert!(matches!(d, DistFamily::Weibull { .. }));
        let med = d.quantile(0.5).unwrap();
        assert!(med > 1.0 && med < 3.0, "median {med} outside data range");
    }
}
