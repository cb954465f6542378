//! Property tests pinning the loss families to their defining shape:
//! zero on the diagonal, nonnegative everywhere, convex in the decision
//! coordinate, and asymmetric exactly in the ratio of the two penalties.

use proptest::prelude::*;
use uq_core::loss::LossSpec;

fn losses(scale: f64, under: f64, over: f64) -> [LossSpec; 3] {
    [
        LossSpec::Quadratic { scale },
        LossSpec::WeightedAbsolute { under, over },
        LossSpec::LogQuadratic,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn zero_on_the_diagonal_and_nonnegative(
        phi in 1e-3..1e3f64,
        d in 1e-3..1e3f64,
        scale in 0.1..10.0f64,
        under in 0.1..10.0f64,
        over in 0.1..10.0f64,
    ) {
        for loss in losses(scale, under, over) {
            let at_truth = loss.loss(phi, phi).unwrap();
            prop_assert!(at_truth == 0.0, "{loss:?}: loss(phi, phi) = {at_truth}");
            let c = loss.loss(phi, d).unwrap();
            prop_assert!(c >= 0.0, "{loss:?}: loss({phi}, {d}) = {c}");
            prop_assert_eq!(loss.regret(phi, d).unwrap(), c);
        }
    }

    #[test]
    fn convex_in_the_decision(
        phi in 1e-3..1e3f64,
        d1 in 1e-3..1e3f64,
        d2 in 1e-3..1e3f64,
        lambda in 0.0..1.0f64,
        scale in 0.1..10.0f64,
        under in 0.1..10.0f64,
        over in 0.1..10.0f64,
    ) {
        // Quadratic and weighted-absolute losses are convex in d itself.
        // The log-quadratic loss is quadratic, hence convex, in ln d (its
        // natural coordinate), so its chord test interpolates there.
        for loss in [LossSpec::Quadratic { scale }, LossSpec::WeightedAbsolute { under, over }] {
            let mid = lambda * d1 + (1.0 - lambda) * d2;
            let chord = lambda * loss.loss(phi, d1).unwrap()
                + (1.0 - lambda) * loss.loss(phi, d2).unwrap();
            let at_mid = loss.loss(phi, mid).unwrap();
            prop_assert!(
                at_mid <= chord + 1e-12 * (1.0 + chord.abs()),
                "{loss:?}: loss at {mid} is {at_mid}, chord gives {chord}"
            );
        }
        let loss = LossSpec::LogQuadratic;
        let mid = (lambda * d1.ln() + (1.0 - lambda) * d2.ln()).exp();
        let chord = lambda * loss.loss(phi, d1).unwrap()
            + (1.0 - lambda) * loss.loss(phi, d2).unwrap();
        let at_mid = loss.loss(phi, mid).unwrap();
        prop_assert!(
            at_mid <= chord + 1e-12 * (1.0 + chord.abs()),
            "log-quadratic at ln-interpolated {mid} is {at_mid}, chord gives {chord}"
        );
    }

    #[test]
    fn asymmetry_matches_the_penalty_ratio(
        phi in 1e-3..1e3f64,
        eps_frac in 0.01..0.99f64,
        under in 0.1..10.0f64,
        over in 0.1..10.0f64,
    ) {
        let eps = eps_frac * phi;
        let loss = LossSpec::WeightedAbsolute { under, over };
        let below = loss.loss(phi, phi - eps).unwrap();
        let above = loss.loss(phi, phi + eps).unwrap();
        let ratio = below / above;
        let want = under / over;
        prop_assert!(
            (ratio - want).abs() <= 1e-12 * want,
            "under/over penalty ratio {ratio} differs from {want}"
        );
    }
}
