//! Cost functions scoring an estimate `d` against the true quantity `phi`,
//! and the regret they induce.
//!
//! Three families:
//! * `Quadratic`: `scale * (phi - d)^2`;
//! * `WeightedAbsolute`: `|phi - d|` weighted by `under` when `d < phi`
//!   (under-estimation) and by `over` when `d > phi`;
//! * `LogQuadratic`: `(ln phi - ln d)^2`, for strictly positive quantities
//!   where relative error is what matters.
//!
//! All three vanish exactly at `d = phi`, so regret coincides with the loss
//! itself; `regret` still evaluates the definition `C(phi, d) - C(phi, phi)`
//! rather than assuming it.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error("log-quadratic loss needs positive arguments, got phi = {phi}, d = {d}")]
    NonpositiveLogArgument { phi: f64, d: f64 },
    #[error("invalid loss weight {name} = {value}: requires a finite value > 0")]
    InvalidWeight { name: &'static str, value: f64 },
}

type Result<T> = std::result::Result<T, LossError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossSpec {
    Quadratic { scale: f64 },
    WeightedAbsolute { under: f64, over: f64 },
    LogQuadratic,
}

impl LossSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(LossError::InvalidWeight { name, value })
            }
        };
        match *self {
            LossSpec::Quadratic { scale } => bad("scale", scale),
            LossSpec::WeightedAbsolute { under, over } => {
                bad("under", under)?;
                bad("over", over)
            }
            LossSpec::LogQuadratic => Ok(()),
        }
    }

    /// Cost of deciding `d` when the quantity is `phi`.
    pub fn loss(&self, phi: f64, d: f64) -> Result<f64> {
        self.validate()?;
        match *self {
            LossSpec::Quadratic { scale } => Ok(scale * (phi - d) * (phi - d)),
            LossSpec::WeightedAbsolute { under, over } => {
                let w = if d < phi {
                    under
                } else if d > phi {
                    over
                } else {
                    return Ok(0.0);
                };
                Ok(w * (phi - d).abs())
            }
            LossSpec::LogQuadratic => {
                if phi <= 0.0 || d <= 0.0 {
                    return Err(LossError::NonpositiveLogArgument { phi, d });
                }
                let r = phi.ln() - d.ln();
                Ok(r * r)
            }
        }
    }

    /// `C(phi, d) - C(phi, phi)`; equals the loss for these families since
    /// each is zero on the diagonal.
    pub fn regret(&self, phi: f64, d: f64) -> Result<f64> {
        Ok(self.loss(phi, d)? - self.loss(phi, phi)?)
    }

    /// The quantile order a weighted-absolute loss points the Bayes
    /// estimate at: `under / (under + over)`.
    pub fn quantile_order(&self) -> Option<f64> {
        match *self {
            LossSpec::WeightedAbsolute { under, over } => Some(under / (under + over)),
            _ => None,
        }
    }

    pub fn digest(&self) -> String {
        match *self {
            LossSpec::Quadratic { scale } => format!("quadratic(scale={scale})"),
            LossSpec::WeightedAbsolute { under, over } => {
                format!("weighted-absolute(under={under},over={over})")
            }
            LossSpec::LogQuadratic => "log-quadratic".into(),
        }
    }
}
