//! Decision-theoretic estimation of quantities of interest under parametric
//! uncertainty.
//!
//! The crate separates four concerns:
//! * what is uncertain: parametric observation models ([`model`]) and the
//!   distribution toolbox beneath them ([`dist`]);
//! * what is wanted: scalar quantities of interest ([`qoi`]);
//! * what mistakes cost: loss functions ([`loss`]);
//! * how to estimate: plug-in maximum likelihood, posterior predictive
//!   summaries, and loss-matched Bayes rules ([`inference`], [`estimators`]),
//!   benchmarked by frequentist and Bayes risk simulation ([`risk`]).
//!
//! Everything stochastic is driven by explicit [`rng::RngStream`] addresses,
//! so results are reproducible bit for bit regardless of thread count.

pub mod dist;
pub mod estimators;
pub mod inference;
pub mod loss;
pub mod model;
pub mod numeric;
pub mod qoi;
pub mod risk;
pub mod rng;
