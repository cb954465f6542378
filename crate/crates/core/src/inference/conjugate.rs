//! Conjugate prior families with closed-form posterior updates.

use super::{InferenceError, ParamPrior, PosteriorSource, Result, WeightedPosterior};
use crate::dist::DistFamily;
use crate::model::{ModelKind, ObservationSample, ParamPoint};
use crate::qoi::{MeanMap, QuantitySpec};
use crate::rng::RngStream;
use rand_chacha::ChaCha8Rng;

/// A conjugate prior (equally, a conjugate posterior: updating maps the
/// type to itself).
///
/// - `ExpInvGamma`: inverse-gamma on the exponential mean; observing
///   `(n, S)` maps `(n0, S0)` to `(n0 + n, S0 + S)`.
/// - `BernoulliBeta`: beta on the success probability; `(0, 0)` is the
///   improper flat-on-odds prior, whose posterior is proper only once both
///   outcomes have been observed.
/// - `NormalNig`: normal-inverse-gamma on (mean, variance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConjugateSpec {
    ExpInvGamma { n0: f64, s0: f64 },
    BernoulliBeta { a: f64, b: f64 },
    NormalNig { m0: f64, k0: f64, a0: f64, b0: f64 },
}

impl ConjugateSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, value: f64, constraint: &'static str| {
            Err(InferenceError::InvalidSetting {
                name,
                value,
                constraint,
            })
        };
        match *self {
            ConjugateSpec::ExpInvGamma { n0, s0 } => {
                if !(n0 > 0.0 && n0.is_finite()) {
                    return bad("n0", n0, "> 0");
                }
                if !(s0 > 0.0 && s0.is_finite()) {
                    return bad("S0", s0, "> 0");
                }
            }
            ConjugateSpec::BernoulliBeta { a, b } => {
                if !(a >= 0.0 && a.is_finite()) {
                    return bad("a", a, ">= 0");
                }
                if !(b >= 0.0 && b.is_finite()) {
                    return bad("b", b, ">= 0");
                }
            }
            ConjugateSpec::NormalNig { m0, k0, a0, b0 } => {
                if !m0.is_finite() {
                    return bad("m0", m0, "finite");
                }
                if !(k0 > 0.0 && k0.is_finite()) {
                    return bad("k0", k0, "> 0");
                }
                if !(a0 > 0.0 && a0.is_finite()) {
                    return bad("a0", a0, "> 0");
                }
                if !(b0 > 0.0 && b0.is_finite()) {
                    return bad("b0", b0, "> 0");
                }
            }
        }
        Ok(())
    }

    pub fn model_kind(&self) -> ModelKind {
        match self {
            ConjugateSpec::ExpInvGamma { .. } => ModelKind::Exponential,
            ConjugateSpec::BernoulliBeta { .. } => ModelKind::Bernoulli,
            ConjugateSpec::NormalNig { .. } => ModelKind::Normal,
        }
    }

    pub fn is_proper(&self) -> bool {
        match *self {
            ConjugateSpec::BernoulliBeta { a, b } => a > 0.0 && b > 0.0,
            _ => true,
        }
    }

    /// Closed-form posterior spec after observing `data`.
    ///
    /// Errors when observations fall outside the model support or when the
    /// posterior stays improper (flat beta prior with one-sided data).
    pub fn update(&self, data: &ObservationSample) -> Result<ConjugateSpec> {
        self.validate()?;
        let unusable = |reason: String| InferenceError::UnusableData {
            model: self.model_kind().name(),
            reason,
        };
        let xs = data.values();
        match *self {
            ConjugateSpec::ExpInvGamma { n0, s0 } => {
                if xs.iter().any(|&x| x < 0.0) {
                    return Err(unusable("negative observation outside support".into()));
                }
                Ok(ConjugateSpec::ExpInvGamma {
                    n0: n0 + data.n() as f64,
                    s0: s0 + data.sum(),
                })
            }
            ConjugateSpec::BernoulliBeta { a, b } => {
                if xs.iter().any(|&x| x != 0.0 && x != 1.0) {
                    return Err(unusable("observations must be 0 or 1".into()));
                }
                let successes = data.sum();
                let failures = data.n() as f64 - successes;
                let (an, bn) = (a + successes, b + failures);
                if an == 0.0 || bn == 0.0 {
                    let reason = if an == 0.0 {
                        "data contains no successes"
                    } else {
                        "data contains no failures"
                    };
                    return Err(InferenceError::ImproperPosterior {
                        family: "Beta",
                        a: an,
                        b: bn,
                        reason: reason.into(),
                    });
                }
                Ok(ConjugateSpec::BernoulliBeta { a: an, b: bn })
            }
            ConjugateSpec::NormalNig { m0, k0, a0, b0 } => {
                let n = data.n() as f64;
                if data.is_empty() {
                    return Ok(*self);
                }
                let xbar = data.mean();
                let ss: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
                let kn = k0 + n;
                Ok(ConjugateSpec::NormalNig {
                    m0: (k0 * m0 + n * xbar) / kn,
                    k0: kn,
                    a0: a0 + 0.5 * n,
                    b0: b0 + 0.5 * ss + 0.5 * k0 * n * (xbar - m0) * (xbar - m0) / kn,
                })
            }
        }
    }

    /// Distribution of the scalar parameter, for the one-parameter
    /// families; `None` for the two-parameter normal case.
    pub fn theta_dist(&self) -> Option<DistFamily> {
        match *self {
            ConjugateSpec::ExpInvGamma { n0, s0 } => Some(DistFamily::InverseGamma {
                shape: n0,
                scale: s0,
            }),
            ConjugateSpec::BernoulliBeta { a, b } => Some(DistFamily::Beta { alpha: a, beta: b }),
            ConjugateSpec::NormalNig { .. } => None,
        }
    }

    /// Exact posterior mean of the quantity, where a closed form exists
    /// (`None` otherwise, signalling the caller to fall back to sampling).
    ///
    /// Registered forms, writing the exponential case as IG(N, S):
    /// mean of the parameter S/(N-1); exceedance E[e^(-t/theta)] =
    /// (1 + t/S)^(-N), which is also the posterior predictive survival at
    /// t; quantile mean ln(1/(1-alpha)) * S/(N-1); the log-magnitude of the
    /// exceedance t/(ln 10) * N/S. Beta: parameter mean a/(a+b). Normal:
    /// location mean m.
    pub fn posterior_qoi_mean(&self, spec: &QuantitySpec) -> Result<Option<f64>> {
        self.validate()?;
        let v = match (*self, spec) {
            (ConjugateSpec::ExpInvGamma { n0, s0 }, QuantitySpec::Mean(MeanMap::Identity)) => {
                (n0 > 1.0).then(|| s0 / (n0 - 1.0))
            }
            (ConjugateSpec::ExpInvGamma { n0, s0 }, QuantitySpec::Exceedance { threshold }) => {
                Some((1.0 + threshold / s0).powf(-n0))
            }
            (ConjugateSpec::ExpInvGamma { n0, s0 }, QuantitySpec::Quantile { order }) => {
                (n0 > 1.0).then(|| (1.0 - order).recip().ln() * s0 / (n0 - 1.0))
            }
            (ConjugateSpec::ExpInvGamma { n0, s0 }, QuantitySpec::NegLog10(inner)) => {
                match **inner {
                    QuantitySpec::Exceedance { threshold } => {
                        Some(threshold / std::f64::consts::LN_10 * n0 / s0)
                    }
                    _ => None,
                }
            }
            (ConjugateSpec::BernoulliBeta { a, b }, QuantitySpec::Mean(MeanMap::Identity)) => {
                if a > 0.0 && b >= 0.0 && a + b > 0.0 {
                    Some(a / (a + b))
                } else {
                    None
                }
            }
            (ConjugateSpec::NormalNig { m0, .. }, QuantitySpec::Mean(MeanMap::Identity)) => {
                Some(m0)
            }
            _ => None,
        };
        Ok(v)
    }

    /// `n` exact draws from this spec treated as a posterior, with uniform
    /// weights.
    pub fn sample_posterior(&self, n: usize, stream: RngStream) -> Result<WeightedPosterior> {
        self.validate()?;
        let mut rng = stream.rng();
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            points.push(self.draw_param(&mut rng)?);
        }
        WeightedPosterior::uniform(points, PosteriorSource::ConjugateExact)
    }

    fn draw_param(&self, rng: &mut ChaCha8Rng) -> Result<ParamPoint> {
        match *self {
            ConjugateSpec::ExpInvGamma { n0, s0 } => {
                let theta = DistFamily::InverseGamma {
                    shape: n0,
                    scale: s0,
                }
                .sample(rng)?;
                Ok(ParamPoint::Exponential { mean: theta })
            }
            ConjugateSpec::BernoulliBeta { a, b } => {
                let p = DistFamily::Beta { alpha: a, beta: b }.sample(rng)?;
                Ok(ParamPoint::Bernoulli { prob: p })
            }
            ConjugateSpec::NormalNig { m0, k0, a0, b0 } => {
                let variance = DistFamily::InverseGamma {
                    shape: a0,
                    scale: b0,
                }
                .sample(rng)?;
                let mean = DistFamily::Normal {
                    mean: m0,
                    variance: variance / k0,
                }
                .sample(rng)?;
                Ok(ParamPoint::Normal { mean, variance })
            }
        }
    }
}

impl ParamPrior for ConjugateSpec {
    fn model_kind(&self) -> ModelKind {
        ConjugateSpec::model_kind(self)
    }

    fn sample_param(&self, rng: &mut ChaCha8Rng) -> Result<ParamPoint> {
        self.validate()?;
        self.draw_param(rng)
    }

    fn log_prior(&self, point: &ParamPoint) -> Result<f64> {
        self.validate()?;
        match (*self, point) {
            (ConjugateSpec::ExpInvGamma { n0, s0 }, ParamPoint::Exponential { mean }) => {
                Ok(DistFamily::InverseGamma {
                    shape: n0,
                    scale: s0,
                }
                .log_pdf(*mean)?)
            }
            (ConjugateSpec::BernoulliBeta { a, b }, ParamPoint::Bernoulli { prob }) => {
                Ok(DistFamily::Beta { alpha: a, beta: b }.log_pdf(*prob)?)
            }
            (ConjugateSpec::NormalNig { m0, k0, a0, b0 }, ParamPoint::Normal { mean, variance }) => {
                let lv = DistFamily::InverseGamma {
                    shape: a0,
                    scale: b0,
                }
                .log_pdf(*variance)?;
                let lm = DistFamily::Normal {
                    mean: m0,
                    variance: variance / k0,
                }
                .log_pdf(*mean)?;
                Ok(lv + lm)
            }
            (spec, point) => Err(InferenceError::ModelMismatch {
                what: "conjugate prior density",
                expected: spec.model_kind().name(),
                got: point.kind().name(),
            }),
        }
    }

    fn digest(&self) -> String {
        match *self {
            ConjugateSpec::ExpInvGamma { n0, s0 } => {
                format!("exp-inverse-gamma(n0={n0}, S0={s0})")
            }
            ConjugateSpec::BernoulliBeta { a, b } => format!("beta(a={a}, b={b})"),
            ConjugateSpec::NormalNig { m0, k0, a0, b0 } => {
                format!("normal-inverse-gamma(m0={m0}, k0={k0}, a0={a0}, b0={b0})")
            }
        }
    }
}
