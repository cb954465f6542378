//! Shared numeric kernels: log-sum-exp, weighted quantiles, golden-section
//! minimization, and adaptive Gauss-Kronrod quadrature.

/// log(sum(exp(x_i))) without overflow. Returns -inf for an empty slice or
/// when every entry is -inf.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Lower weighted quantile: the smallest value whose cumulative normalized
/// weight reaches `order`. Weights must be nonnegative and sum to 1; a
/// 1e-12 slack absorbs accumulation roundoff so that e.g. order 0.95 on a
/// hundred equal weights lands on the 95th value, not the 96th.
///
/// Panics in debug builds if lengths differ or `order` is outside (0, 1).
pub fn weighted_quantile(values: &[f64], weights: &[f64], order: f64) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    debug_assert!(order > 0.0 && order < 1.0);
    debug_assert!(!values.is_empty());
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut cum = 0.0;
    for &i in &idx {
        cum += weights[i];
        if cum >= order - 1e-12 {
            return values[i];
        }
    }
    values[*idx.last().expect("nonempty")]
}

/// Lower empirical quantile of an unweighted sample (need not be sorted).
pub fn empirical_quantile(values: &[f64], order: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    // smallest k with k/n >= order
    let k = ((order * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    v[k - 1]
}

/// Golden-section search for the minimizer of a unimodal `f` on `[lo, hi]`.
/// Stops when the bracket width falls below `rel_tol` relative to the
/// midpoint magnitude (floored at `rel_tol` absolute for brackets near 0).
pub fn golden_section_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, rel_tol: f64) -> f64 {
    debug_assert!(lo <= hi);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a) <= rel_tol * mid.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1]; abscissae are the
// absolute values, used symmetrically. Even positions are the embedded
// Gauss-7 nodes.
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];
const GK_WEIGHTS_K: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];
const GK_WEIGHTS_G: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kron = GK_WEIGHTS_K[7] * f(mid);
    let mut gauss = GK_WEIGHTS_G[3] * f(mid);
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let s = f(mid - dx) + f(mid + dx);
        kron += GK_WEIGHTS_K[i] * s;
        if i % 2 == 1 {
            gauss += GK_WEIGHTS_G[i / 2] * s;
        }
    }
    (kron * half, (kron - gauss).abs() * half)
}

/// Adaptive Gauss-Kronrod quadrature of `f` on the finite interval `[a, b]`
/// to the requested relative tolerance (with a small absolute floor).
///
/// The acceptance test is local: a panel is kept once its Kronrod-Gauss
/// error estimate is small relative to its own contribution (or to its
/// width-proportional share of an absolute floor), so flat stretches close
/// immediately and sharp features refine without collapsing the tolerance
/// below the roundoff level of the rule itself.
pub fn adaptive_quadrature(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        rel_tol: f64,
        floor_density: f64,
        depth: u32,
    ) -> f64 {
        let (val, err) = gk15(f, a, b);
        if err <= rel_tol * val.abs() + floor_density * (b - a) || depth >= 28 {
            return val;
        }
        let mid = 0.5 * (a + b);
        recurse(f, a, mid, rel_tol, floor_density, depth + 1)
            + recurse(f, mid, b, rel_tol, floor_density, depth + 1)
    }
    let width = b - a;
    if !(width > 0.0) {
        return 0.0;
    }
    let (rough, _) = gk15(f, a, b);
    // absolute floor keeps near-zero panels from demanding refinement
    let floor_density = (rel_tol * rough.abs()).max(1e-14) / width;
    recurse(f, a, b, rel_tol, floor_density, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let xs: [f64; 4] = [0.3, -1.2, 2.5, 0.0];
        let direct: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-14);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
        // far from zero: naive sum would overflow
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn weighted_quantile_lower_convention() {
        let values: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let weights = vec![0.01; 100];
        assert_eq!(weighted_quantile(&values, &weights, 0.95), 95.0);
        assert_eq!(weighted_quantile(&values, &weights, 0.5), 50.0);
        assert_eq!(weighted_quantile(&values, &weights, 0.001), 1.0);
        // two equal atoms: lower median
        assert_eq!(weighted_quantile(&[2.0, 7.0], &[0.5, 0.5], 0.5), 2.0);
        // all mass on one point
        assert_eq!(weighted_quantile(&[3.0, 9.0], &[0.0, 1.0], 0.5), 9.0);
    }

    #[test]
    fn empirical_quantile_lower_convention() {
        let v: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        assert_eq!(empirical_quantile(&v, 0.5), 5.0);
        assert_eq!(empirical_quantile(&v, 0.05), 1.0);
        assert_eq!(empirical_quantile(&v, 0.999), 10.0);
    }

    #[test]
    fn golden_section_finds_quartic_minimum() {
        // a quartic bottom is flat: comparisons cannot resolve the minimizer
        // better than (eps * |f|)^(1/4) ~ 5e-4, so ask only for 1e-3
        let xmin = golden_section_min(|x| (x - 1.7).powi(4) + 2.0, -10.0, 10.0, 1e-10);
        assert!(
            (xmin - 1.7).abs() < 1e-3,
            "quartic minimizer off: {xmin}"
        );
        let xmin = golden_section_min(|x| (x - 1.7) * (x - 1.7) + 2.0, -10.0, 10.0, 1e-10);
        assert!(
            (xmin - 1.7).abs() < 1e-6,
            "parabola minimizer off: {xmin}"
        );
        let xmin = golden_section_min(|x| (x + 3.0).abs(), -10.0, 10.0, 1e-10);
        assert!((xmin + 3.0).abs() < 1e-8, "kinked minimizer off: {xmin}");
    }

    #[test]
    fn quadrature_reproduces_known_integrals() {
        let v = adaptive_quadrature(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-10);
        assert!((v - 2.0).abs() < 1e-9, "integral of sin: {v}");
        // standard normal mass over +-8 sd
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let v = adaptive_quadrature(&phi, -8.0, 8.0, 1e-10);
        assert!((v - 1.0).abs() < 1e-9, "normal mass: {v}");
        // oscillatory with sharp peak forces refinement
        let v = adaptive_quadrature(&|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-9);
        let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!(
            (v - exact).abs() / exact < 1e-8,
            "peaked integrand: {v} vs {exact}"
        );
    }
}
