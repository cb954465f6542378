//! Hierarchical prior over Weibull (scale, shape) for flood-frequency
//! studies.
//!
//! The shape gets a truncated Gamma(m, m/beta0) prior; conditional on the
//! shape, the precision `mu = scale^(-shape)` gets a Gamma(m, b) prior
//! with rate `b = t_e^shape / (2^(1/m) - 1)`. That rate is chosen so the
//! prior predictive survival at `t_e` equals 1/2 for every shape: `t_e`
//! acts as a prior guess of the median observation (e.g. the median annual
//! flood), while `m` plays the role of a virtual data size.

use super::{InferenceError, ParamPrior, Result};
use crate::dist::DistFamily;
use crate::model::{ModelKind, ParamPoint};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchicalWeibullPrior {
    m: f64,
    beta0: f64,
    t_e: f64,
    beta_l: f64,
}

impl Default for HierarchicalWeibullPrior {
    /// Virtual size 1, shape guess 1.5, median guess equal to the median
    /// of Weibull(800, 1.5), shapes bounded below by 1.
    fn default() -> Self {
        let t_e = 800.0 * std::f64::consts::LN_2.powf(2.0 / 3.0);
        Self {
            m: 1.0,
            beta0: 1.5,
            t_e,
            beta_l: 1.0,
        }
    }
}

impl HierarchicalWeibullPrior {
    pub fn new(m: f64, beta0: f64, t_e: f64, beta_l: f64) -> Result<Self> {
        let bad = |name: &'static str, value: f64, constraint: &'static str| {
            Err(InferenceError::InvalidSetting {
                name,
                value,
                constraint,
            })
        };
        if !(m > 0.0 && m.is_finite()) {
            return bad("m", m, "> 0");
        }
        if !(beta0 > 0.0 && beta0.is_finite()) {
            return bad("beta0", beta0, "> 0");
        }
        if !(t_e > 0.0 && t_e.is_finite()) {
            return bad("t_e", t_e, "> 0");
        }
        if !(beta_l >= 0.0 && beta_l.is_finite()) {
            return bad("beta_l", beta_l, ">= 0");
        }
        Ok(Self {
            m,
            beta0,
            t_e,
            beta_l,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn t_e(&self) -> f64 {
        self.t_e
    }

    pub fn beta_l(&self) -> f64 {
        self.beta_l
    }

    /// Marginal prior of the Weibull shape.
    pub fn shape_prior(&self) -> DistFamily {
        DistFamily::TruncatedGamma {
            shape: self.m,
            rate: self.m / self.beta0,
            lower: self.beta_l,
        }
    }

    /// Rate of the conditional Gamma prior on the precision
    /// `mu = scale^(-shape)`, i.e. `t_e^shape / (2^(1/m) - 1)`.
    pub fn precision_rate(&self, shape: f64) -> f64 {
        self.t_e.powf(shape) / ((1.0 / self.m).exp2() - 1.0)
    }

    /// Prior predictive survival P[Y > t] conditional on the shape:
    /// `(1 + t^shape / b)^(-m)`. Equals 1/2 at `t = t_e` for every shape,
    /// which pins the prior predictive median at `t_e`.
    pub fn predictive_survival_given_shape(&self, t: f64, shape: f64) -> f64 {
        let b = self.precision_rate(shape);
        (1.0 + t.powf(shape) / b).powf(-self.m)
    }
}

impl ParamPrior for HierarchicalWeibullPrior {
    fn model_kind(&self) -> ModelKind {
        ModelKind::Weibull
    }

    fn sample_param(&self, rng: &mut ChaCha8Rng) -> Result<ParamPoint> {
        let shape = self.shape_prior().sample(rng)?;
        let b = self.precision_rate(shape);
        if !(b > 0.0 && b.is_finite()) {
            return Err(InferenceError::InvalidSetting {
                name: "precision rate",
                value: b,
                constraint: "finite (sampled shape overflows t_e^shape)",
            });
        }
        let gamma = DistFamily::Gamma {
            shape: self.m,
            rate: b,
        };
        // guard the measure-zero chance of an exactly-zero draw, which
        // would map to an infinite scale
        let mut mu = gamma.sample(rng)?;
        for _ in 0..100 {
            if mu > 0.0 && mu.is_finite() {
                break;
            }
            mu = gamma.sample(rng)?;
        }
        let scale = mu.powf(-1.0 / shape);
        Ok(ParamPoint::Weibull { scale, shape })
    }

    fn log_prior(&self, point: &ParamPoint) -> Result<f64> {
        let (scale, shape) = match point {
            ParamPoint::Weibull { scale, shape } => (*scale, *shape),
            other => {
                return Err(InferenceError::ModelMismatch {
                    what: "hierarchical prior density",
                    expected: "weibull",
                    got: other.kind().name(),
                })
            }
        };
        if !(scale > 0.0 && scale.is_finite() && shape > 0.0 && shape.is_finite()) {
            return Ok(f64::NEG_INFINITY);
        }
        let l_shape = self.shape_prior().log_pdf(shape)?;
        if l_shape == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let b = self.precision_rate(shape);
        let mu = scale.powf(-shape);
        if !(b > 0.0 && b.is_finite() && mu > 0.0 && mu.is_finite()) {
            return Ok(f64::NEG_INFINITY);
        }
        let l_mu = DistFamily::Gamma {
            shape: self.m,
            rate: b,
        }
        .log_pdf(mu)?;
        // change of variables from the precision to the scale:
        // |d mu / d scale| = shape * mu / scale
        Ok(l_shape + l_mu + shape.ln() + mu.ln() - scale.ln())
    }

    fn digest(&self) -> String {
        format!(
            "hierarchical-weibull(m={}, beta0={}, t_e={:.6}, beta_l={})",
            self.m, self.beta0, self.t_e, self.beta_l
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::adaptive_quadrature;
    use crate::rng::RngStream;

    #[test]
    fn default_median_guess_is_the_reference_weibull_median() {
        let prior = HierarchicalWeibullPrior::default();
        assert!(
            (prior.t_e() - 626.57581501972106).abs() < 1e-9,
            "t_e {}",
            prior.t_e()
        );
        let direct = DistFamily::Weibull {
            scale: 800.0,
            shape: 1.5,
        }
        .quantile(0.5)
        .unwrap();
        assert!((prior.t_e() - direct).abs() < 1e-9);
    }

    #[test]
    fn precision_rate_closed_form() {
        let prior = HierarchicalWeibullPrior::default();
        let te = prior.t_e();
        // m = 1: denominator 2 - 1
        assert!((prior.precision_rate(2.0) - te * te).abs() < 1e-6);
        let prior2 = HierarchicalWeibullPrior::new(2.0, 1.5, 100.0, 0.0).unwrap();
        let expect = 100.0f64.powf(1.7) / (2.0f64.sqrt() - 1.0);
        assert!((prior2.precision_rate(1.7) - expect).abs() < 1e-9);
    }

    #[test]
    fn predictive_median_is_pinned_at_t_e_for_every_shape() {
        for &m in &[1.0, 4.0] {
            let prior = HierarchicalWeibullPrior::new(m, 1.5, 626.6, 1.0).unwrap();
            for &shape in &[0.8, 1.5, 3.0] {
                let s = prior.predictive_survival_given_shape(prior.t_e(), shape);
                assert!(
                    (s - 0.5).abs() < 1e-12,
                    "survival at t_e should be 1/2, got {s} (m={m}, shape={shape})"
                );
            }
        }
    }

    #[test]
    fn sampled_predictive_median_confirms_the_identity() {
        let prior = HierarchicalWeibullPrior::default();
        let mut rng = RngStream::with_index(33, 0).rng();
        let n = 20_000;
        let mut above = 0usize;
        for _ in 0..n {
            let point = prior.sample_param(&mut rng).unwrap();
            let y = point.observation_dist().sample(&mut rng).unwrap();
            if y > prior.t_e() {
                above += 1;
            }
        }
        let frac = above as f64 / n as f64;
        // 3 binomial se at p=1/2, n=20000 is 0.0106
        assert!(
            (frac - 0.5).abs() < 0.012,
            "fraction above t_e: {frac}"
        );
    }

    #[test]
    fn shapes_below_the_bound_are_excluded() {
        let prior = HierarchicalWeibullPrior::default();
        let lp = prior
            .log_prior(&ParamPoint::Weibull {
                scale: 1000.0,
                shape: 0.5,
            })
            .unwrap();
        assert_eq!(lp, f64::NEG_INFINITY);
        let mut rng = RngStream::with_index(33, 1).rng();
        for _ in 0..5_000 {
            match prior.sample_param(&mut rng).unwrap() {
                ParamPoint::Weibull { shape, .. } => {
                    assert!(shape >= 1.0, "sampled shape {shape} below bound")
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn conditional_scale_density_integrates_to_one() {
        // validates the precision-to-scale Jacobian: at fixed shape the
        // conditional density of the scale must carry unit mass
        let prior = HierarchicalWeibullPrior::default();
        let shape = 2.0;
        let l_shape = prior.shape_prior().log_pdf(shape).unwrap();
        let b = prior.precision_rate(shape);
        let mu_dist = DistFamily::Gamma { shape: 1.0, rate: b };
        // scale = mu^(-1/shape) is decreasing in mu
        let lo = mu_dist.quantile(1.0 - 1e-12).unwrap().powf(-1.0 / shape);
        let hi = mu_dist.quantile(1e-12).unwrap().powf(-1.0 / shape);
        let mass = adaptive_quadrature(
            &|scale: f64| {
                (prior
                    .log_prior(&ParamPoint::Weibull { scale, shape })
                    .unwrap()
                    - l_shape)
                    .exp()
            },
            lo,
            hi,
            1e-9,
        );
        assert!((mass - 1.0).abs() < 1e-6, "conditional mass {mass}");
    }

    #[test]
    fn log_prior_is_finite_on_typical_flood_parameters() {
        let prior = HierarchicalWeibullPrior::default();
        let lp = prior
            .log_prior(&ParamPoint::Weibull {
                scale: 1000.0,
                shape: 2.0,
            })
            .unwrap();
        assert!(lp.is_finite(), "log prior {lp}");
        let err = prior
            .log_prior(&ParamPoint::Exponential { mean: 1.0 })
            .unwrap_err();
        assert!(err.to_string().contains("expects the weibull model"), "{err}");
    }

    #[test]
    fn invalid_settings_are_rejected() {
        assert!(HierarchicalWeibullPrior::new(0.0, 1.5, 600.0, 1.0).is_err());
        assert!(HierarchicalWeibullPrior::new(1.0, -1.0, 600.0, 1.0).is_err());
        assert!(HierarchicalWeibullPrior::new(1.0, 1.5, 0.0, 1.0).is_err());
        assert!(HierarchicalWeibullPrior::new(1.0, 1.5, 600.0, -0.5).is_err());
    }
}
