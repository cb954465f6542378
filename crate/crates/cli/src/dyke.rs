//! Flood-protection case study: annual maximal discharges follow a Weibull
//! law, a deterministic rating curve maps discharge to water level, and the
//! quantity of interest is the probability that the water tops the crest.
//!
//! Each replicate draws a fresh 30-point discharge record, fits it four
//! ways, and lands in one CSV row: the plug-in estimate, the predictive
//! (posterior-mean) estimate, the log-quadratic Bayes estimate, and a
//! conservative Bayes estimate under asymmetric absolute loss on the
//! -log10 probability scale (over-protection priced nine times cheaper
//! than under-protection).

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use uq_core::dist::DistFamily;
use uq_core::estimators::{bayes_estimate, hpe_expectation, DecisionProblem};
use uq_core::inference::{
    mle_fit, plug_in, sample_posterior_is, HierarchicalWeibullPrior, WeightedPosterior,
};
use uq_core::loss::LossSpec;
use uq_core::model::{dyke_output, flood_probability, DykeGeometry, ModelKind, ObservationSample};
use uq_core::qoi::QuantitySpec;
use uq_core::rng::RngStream;

use crate::csvio::fmt_real;
use crate::{CliError, Result};

/// Crest height 53.1 m over a 50 m bed, with the rating-curve coefficient
/// calibrated so the true flood probability under W(1000, 2) is 0.013.
pub fn default_geometry() -> DykeGeometry {
    DykeGeometry::calibrated(50.0, 53.1, 1000.0, 2.0, 0.013).expect("constants are valid")
}

#[derive(Debug, Clone)]
pub struct DykeStudy {
    pub geometry: DykeGeometry,
    pub scale: f64,
    pub shape: f64,
    pub n: usize,
    pub replicates: usize,
    pub posterior_draws: usize,
    pub prior: HierarchicalWeibullPrior,
    pub seed: u64,
}

impl DykeStudy {
    pub fn standard(replicates: usize, n: usize, seed: u64) -> Result<Self> {
        if replicates == 0 {
            return Err(CliError::config("replicates must be at least 1"));
        }
        if n == 0 {
            return Err(CliError::config("sample size must be at least 1"));
        }
        Ok(DykeStudy {
            geometry: default_geometry(),
            scale: 1000.0,
            shape: 2.0,
            n,
            replicates,
            posterior_draws: 20_000,
            prior: HierarchicalWeibullPrior::default(),
            seed,
        })
    }

    pub fn true_probability(&self) -> f64 {
        flood_probability(&self.geometry, self.scale, self.shape)
            .expect("true parameters are valid")
    }
}

/// One simulated record of annual maximal discharges.
pub fn simulate_dyke_data(
    scale: f64,
    shape: f64,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ObservationSample> {
    let draws = DistFamily::Weibull { scale, shape }.sample_many(n, rng)?;
    Ok(ObservationSample::new(draws))
}

/// Policy zone for a flood-probability estimate: below 1e-3 the risk is
/// negligible, above 1e-2 the protection needs reinforcing, in between the
/// site counts as a flood-risk area to keep monitoring.
pub fn zone(p: f64) -> &'static str {
    if p < 1e-3 {
        "negligible"
    } else if p < 1e-2 {
        "flood-risk"
    } else {
        "reinforce"
    }
}

#[derive(Debug, Clone)]
pub struct DykeRow {
    pub replicate: u64,
    pub p_mle: f64,
    pub p_hpe: f64,
    pub p_bayes_log_quadratic: f64,
    pub p_bayes_weighted_absolute: f64,
    pub p_true: f64,
    pub p_posterior_median: f64,
}

#[derive(Debug)]
pub struct DykeTable {
    pub rows: Vec<DykeRow>,
    pub failures: Vec<(u64, String)>,
    pub replicates: usize,
}

/// Run the replicate benchmark. Per-replicate failures (degenerate fits,
/// starved importance weights) are counted and excluded; more than 1% of
/// them aborts the run.
pub fn run_dyke_replicates(study: &DykeStudy) -> Result<DykeTable> {
    let p_true = study.true_probability();
    let base = RngStream::with_index(study.seed, 0);

    let outcomes: Vec<(u64, std::result::Result<DykeRow, String>)> = (0..study.replicates as u64)
        .into_par_iter()
        .map(|i| (i, replicate_row(study, base, i, p_true)))
        .collect();

    let mut rows = Vec::with_capacity(study.replicates);
    let mut failures = Vec::new();
    for (i, outcome) in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err(msg) => failures.push((i, msg)),
        }
    }
    if failures.len() * 100 > study.replicates {
        let (first_idx, first_msg) = &failures[0];
        return Err(CliError::numeric(format!(
            "{} of {} replicates failed (limit 1%); first failure at replicate {first_idx}: \
             {first_msg}",
            failures.len(),
            study.replicates
        )));
    }
    Ok(DykeTable {
        rows,
        failures,
        replicates: study.replicates,
    })
}

fn replicate_row(
    study: &DykeStudy,
    base: RngStream,
    i: u64,
    p_true: f64,
) -> std::result::Result<DykeRow, String> {
    let sub = base.substream(i);
    let mut data_rng = sub.substream(0).rng();
    let data = simulate_dyke_data(study.scale, study.shape, study.n, &mut data_rng)
        .map_err(|e| e.to_string())?;

    let q_crit = study.geometry.critical_discharge();
    let exceedance = QuantitySpec::Exceedance { threshold: q_crit };

    let fitted = mle_fit(ModelKind::Weibull, &data).map_err(|e| e.to_string())?;
    let p_mle = plug_in(&exceedance, &fitted).map_err(|e| e.to_string())?;

    let posterior = sample_posterior_is(
        &study.prior,
        &data,
        study.posterior_draws,
        sub.substream(1),
    )
    .map_err(|e| e.to_string())?;
    if posterior.ess() < 50.0 {
        return Err(format!(
            "posterior effective sample size {:.1} below 50",
            posterior.ess()
        ));
    }

    let p_hpe = hpe_expectation(&exceedance, &posterior).map_err(|e| e.to_string())?;
    let p_bay1 = log_quadratic_estimate(&exceedance, &posterior)?;

    let neglog = QuantitySpec::NegLog10(Box::new(exceedance));
    let p_bay2 = conservative_estimate(&neglog, &posterior, 1.0, 9.0)?;
    let p_med = conservative_estimate(&neglog, &posterior, 1.0, 1.0)?;

    Ok(DykeRow {
        replicate: i,
        p_mle,
        p_hpe,
        p_bayes_log_quadratic: p_bay1,
        p_bayes_weighted_absolute: p_bay2,
        p_true,
        p_posterior_median: p_med,
    })
}

fn log_quadratic_estimate(
    spec: &QuantitySpec,
    posterior: &WeightedPosterior,
) -> std::result::Result<f64, String> {
    let problem = DecisionProblem::new(spec.clone(), LossSpec::LogQuadratic, posterior)
        .map_err(|e| e.to_string())?;
    bayes_estimate(&problem).map_err(|e| e.to_string())
}

/// Bayes estimate of the probability under weighted absolute loss on its
/// -log10 transform, mapped back to the probability scale. `under`/`over`
/// price under- and over-estimation of the log-magnitude; equal prices
/// yield the posterior median.
fn conservative_estimate(
    neglog: &QuantitySpec,
    posterior: &WeightedPosterior,
    under: f64,
    over: f64,
) -> std::result::Result<f64, String> {
    let problem = DecisionProblem::new(
        neglog.clone(),
        LossSpec::WeightedAbsolute { under, over },
        posterior,
    )
    .map_err(|e| e.to_string())?;
    let log_magnitude = bayes_estimate(&problem).map_err(|e| e.to_string())?;
    Ok(10f64.powf(-log_magnitude))
}

pub fn render_dyke_csv(table: &DykeTable) -> String {
    let mut out = String::from(
        "replicate,p_mle,p_hpe,p_bayes_log_quadratic,p_bayes_weighted_absolute,p_true,\
         p_posterior_median,zone_mle,zone_hpe,zone_bayes_log_quadratic,\
         zone_bayes_weighted_absolute\n",
    );
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.replicate,
            fmt_real(r.p_mle),
            fmt_real(r.p_hpe),
            fmt_real(r.p_bayes_log_quadratic),
            fmt_real(r.p_bayes_weighted_absolute),
            fmt_real(r.p_true),
            fmt_real(r.p_posterior_median),
            zone(r.p_mle),
            zone(r.p_hpe),
            zone(r.p_bayes_log_quadratic),
            zone(r.p_bayes_weighted_absolute),
        ));
    }
    out
}

/// Plot-ready CSV of one simulated record: discharge and the water level it
/// produces through the rating curve.
pub fn render_sample_csv(study: &DykeStudy) -> Result<String> {
    let mut rng = RngStream::with_index(study.seed, 0)
        .substream(0)
        .substream(0)
        .rng();
    let data = simulate_dyke_data(study.scale, study.shape, study.n, &mut rng)?;
    let mut out = String::from("discharge,water_level\n");
    for &q in data.values() {
        let level = dyke_output(&study.geometry, q)?;
        out.push_str(&format!("{},{}\n", fmt_real(q), fmt_real(level)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_reproduces_the_target_probability() {
        let study = DykeStudy::standard(1, 30, 7).unwrap();
        let p = study.true_probability();
        assert!(
            (p - 0.013).abs() < 1e-12,
            "calibrated geometry gives p = {p}"
        );
    }

    #[test]
    fn simulated_discharges_stay_above_the_bed() {
        let study = DykeStudy::standard(1, 30, 7).unwrap();
        let mut rng = RngStream::with_index(7, 0).rng();
        let data = simulate_dyke_data(1000.0, 2.0, 30, &mut rng).unwrap();
        assert_eq!(data.n(), 30);
        for &q in data.values() {
            let level = dyke_output(&study.geometry, q).unwrap();
            assert!(
                level > 50.0 && q > 0.0,
                "discharge {q} maps to level {level}"
            );
        }
    }

    #[test]
    fn single_draw_is_positive() {
        let mut rng = RngStream::with_index(8, 0).rng();
        let data = simulate_dyke_data(1000.0, 2.0, 1, &mut rng).unwrap();
        assert!(data.values()[0] > 0.0);
    }

    #[test]
    fn zones_split_at_the_policy_thresholds() {
        assert_eq!(zone(5e-4), "negligible");
        assert_eq!(zone(1e-3), "flood-risk");
        assert_eq!(zone(0.0099), "flood-risk");
        assert_eq!(zone(0.013), "reinforce");
    }

    #[test]
    fn a_small_replicate_table_has_the_structural_orderings() {
        let mut study = DykeStudy::standard(8, 30, 13).unwrap();
        study.posterior_draws = 8000;
        let table = run_dyke_replicates(&study).unwrap();
        assert!(table.failures.is_empty(), "failures: {:?}", table.failures);
        assert_eq!(table.rows.len(), 8);
        for r in &table.rows {
            assert!(
                r.p_bayes_log_quadratic <= r.p_hpe + 1e-15,
                "replicate {}: log-scale average {} above plain average {}",
                r.replicate,
                r.p_bayes_log_quadratic,
                r.p_hpe
            );
            assert!(
                r.p_bayes_weighted_absolute >= r.p_posterior_median,
                "replicate {}: conservative estimate {} below the median {}",
                r.replicate,
                r.p_bayes_weighted_absolute,
                r.p_posterior_median
            );
            assert!(
                (r.p_true - 0.013).abs() < 1e-12,
                "truth column should echo the calibrated probability, got {}",
                r.p_true
            );
        }
    }

    #[test]
    fn replicate_rows_are_deterministic() {
        let mut study = DykeStudy::standard(3, 30, 99).unwrap();
        study.posterior_draws = 2000;
        let a = run_dyke_replicates(&study).unwrap();
        let b = run_dyke_replicates(&study).unwrap();
        assert_eq!(render_dyke_csv(&a), render_dyke_csv(&b));
    }

    #[test]
    fn sample_csv_is_plot_ready() {
        let study = DykeStudy::standard(1, 5, 3).unwrap();
        let text = render_sample_csv(&study).unwrap();
        assert!(text.starts_with("discharge,water_level\n"));
        assert_eq!(text.lines().count(), 6, "header plus five rows");
    }
}
