//! Large-sample normal approximations for the exponential model.
//!
//! With Fisher information `I(theta) = 1/theta^2` (mean parameterization),
//! the delta method gives the quantity's sampling variance
//! `(theta^2 / n) * phi'(theta)^2`. The same recipe evaluated at the MLE
//! approximates the posterior of the quantity for large n.

use super::{InferenceError, Result};
use crate::dist::DistFamily;
use crate::model::ParamPoint;
use crate::qoi::{qoi_eval, MeanMap, QuantitySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxKind {
    /// Sampling distribution of the plug-in estimator at a reference
    /// parameter (frequentist view).
    MleSampling,
    /// Normal approximation of the quantity's posterior, centered at the
    /// MLE (Bernstein-von Mises view).
    Posterior,
}

/// A normal approximation `N(center, variance)` of a scalar quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalApprox {
    pub center: f64,
    pub variance: f64,
    pub kind: ApproxKind,
}

impl NormalApprox {
    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        DistFamily::Normal {
            mean: self.center,
            variance: self.variance,
        }
        .cdf(x)
        .expect("positive variance is validated at construction")
    }
}

/// Derivative of the quantity with respect to the exponential mean.
/// Closed forms for the registered quantities; a custom mean map falls
/// back to a central finite difference of the quadrature evaluation.
fn quantity_derivative(spec: &QuantitySpec, theta: f64) -> Result<f64> {
    let d = match spec {
        QuantitySpec::Mean(MeanMap::Identity) => 1.0,
        QuantitySpec::Exceedance { threshold } => {
            threshold / (theta * theta) * (-threshold / theta).exp()
        }
        QuantitySpec::Quantile { order } => (1.0 - order).recip().ln(),
        QuantitySpec::NegLog10(inner) => match **inner {
            QuantitySpec::Exceedance { threshold } => {
                -threshold / (theta * theta * std::f64::consts::LN_10)
            }
            _ => {
                return Err(InferenceError::InvalidSetting {
                    name: "quantity",
                    value: f64::NAN,
                    constraint: "a derivative closed form (log-magnitude of exceedance only)",
                })
            }
        },
        QuantitySpec::Mean(MeanMap::Custom(_)) => {
            let h = 1e-5 * theta;
            let up = qoi_eval(spec, &ParamPoint::Exponential { mean: theta + h })?;
            let down = qoi_eval(spec, &ParamPoint::Exponential { mean: theta - h })?;
            (up - down) / (2.0 * h)
        }
    };
    Ok(d)
}

/// Normal approximation of a quantity of the exponential model at
/// reference parameter `theta_ref` with sample size `n`.
///
/// Errors with "no Fisher information registered" for any other model.
pub fn asymptotic_approx(
    kind: ApproxKind,
    theta_ref: &ParamPoint,
    spec: &QuantitySpec,
    n: usize,
) -> Result<NormalApprox> {
    let theta = match theta_ref {
        ParamPoint::Exponential { mean } => *mean,
        other => return Err(InferenceError::NoFisherInformation(other.kind().name())),
    };
    if n == 0 {
        return Err(InferenceError::InvalidSetting {
            name: "n",
            value: 0.0,
            constraint: ">= 1",
        });
    }
    let center = qoi_eval(spec, theta_ref)?;
    let slope = quantity_derivative(spec, theta)?;
    // inverse Fisher information of the mean parameterization is theta^2
    let variance = theta * theta / n as f64 * slope * slope;
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(InferenceError::InvalidSetting {
            name: "variance",
            value: variance,
            constraint: "positive and finite (flat quantity has no normal approximation)",
        });
    }
    Ok(NormalApprox {
        center,
        variance,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn theta(mean: f64) -> ParamPoint {
        ParamPoint::Exponential { mean }
    }

    #[test]
    fn identity_quantity_variance_is_theta_squared_over_n() {
        let a = asymptotic_approx(ApproxKind::MleSampling, &theta(4.0), &QuantitySpec::mean(), 10)
            .unwrap();
        assert!((a.center - 4.0).abs() < 1e-14);
        assert!((a.variance - 1.6).abs() < 1e-14, "variance {}", a.variance);
    }

    #[test]
    fn exceedance_variance_matches_frozen_delta_method_value() {
        let spec = QuantitySpec::Exceedance { threshold: 2.0 };
        let a = asymptotic_approx(ApproxKind::MleSampling, &theta(4.0), &spec, 10).unwrap();
        assert!(
            (a.variance - 0.0091969860292860587).abs() < 1e-16,
            "variance {}",
            a.variance
        );
        // independent slope check by central finite difference
        let fd = ((-2.0f64 / 4.0001).exp() - (-2.0f64 / 3.9999).exp()) / 2e-4;
        let slope = 2.0 / 16.0 * (-0.5f64).exp();
        assert!((fd - slope).abs() < 1e-8, "fd {fd} vs closed {slope}");
    }

    #[test]
    fn quantile_and_log_magnitude_variances() {
        let q = asymptotic_approx(
            ApproxKind::Posterior,
            &theta(4.0),
            &QuantitySpec::Quantile { order: 0.5 },
            10,
        )
        .unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!((q.variance - 1.6 * ln2 * ln2).abs() < 1e-14);
        assert!((q.center - 4.0 * ln2).abs() < 1e-14);

        let spec = QuantitySpec::NegLog10(Box::new(QuantitySpec::Exceedance { threshold: 2.0 }));
        let a = asymptotic_approx(ApproxKind::Posterior, &theta(4.0), &spec, 10).unwrap();
        let ln10 = std::f64::consts::LN_10;
        let expect = 4.0 / (10.0 * 16.0 * ln10 * ln10);
        assert!(
            (a.variance - expect).abs() < 1e-16,
            "variance {} vs {expect}",
            a.variance
        );
        // center: -log10 of e^{-1/2}
        assert!((a.center - 0.5 / ln10).abs() < 1e-14);
    }

    #[test]
    fn quadrupling_n_halves_the_sd() {
        let spec = QuantitySpec::Exceedance { threshold: 2.0 };
        let a = asymptotic_approx(ApproxKind::MleSampling, &theta(4.0), &spec, 10).unwrap();
        let b = asymptotic_approx(ApproxKind::MleSampling, &theta(4.0), &spec, 40).unwrap();
        let ratio = a.sd() / b.sd();
        assert!((ratio - 2.0).abs() < 1e-12, "sd ratio {ratio}");
    }

    #[test]
    fn custom_mean_map_uses_a_finite_difference_slope() {
        // E[Y^2] = 2 theta^2, slope 4 theta
        let spec = QuantitySpec::Mean(MeanMap::Custom(Arc::new(|y: f64| y * y)));
        let a = asymptotic_approx(ApproxKind::MleSampling, &theta(3.0), &spec, 10).unwrap();
        let expect = 9.0 / 10.0 * (12.0f64 * 12.0);
        assert!(
            (a.variance - expect).abs() / expect < 1e-3,
            "variance {} vs {expect}",
            a.variance
        );
    }

    #[test]
    fn unsupported_models_name_the_missing_information() {
        let err = asymptotic_approx(
            ApproxKind::MleSampling,
            &ParamPoint::Weibull {
                scale: 1.0,
                shape: 2.0,
            },
            &QuantitySpec::mean(),
            10,
        )
        .unwrap_err();
        assert!(
            err.to_string().contains("no Fisher information registered"),
            "unexpected {err}"
        );
    }

    #[test]
    fn cdf_is_the_plain_normal_cdf() {
        let a = NormalApprox {
            center: 2.0,
            variance: 4.0,
            kind: ApproxKind::Posterior,
        };
        assert!((a.cdf(2.0) - 0.5).abs() < 1e-15);
        // the error-function approximation is good to roughly 1e-11
        assert!((a.cdf(4.0) - 0.8413447460685429).abs() < 1e-9);
    }
}
