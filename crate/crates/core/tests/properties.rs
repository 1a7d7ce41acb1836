use proptest::prelude::*;

use skewadj::adjustment::{self, MonotoneDomain};
use skewadj::gaussian::{self, Probability};
use skewadj::inference::{self, TestRule};
use skewadj::{AdjustmentOrder, MomentProfile, Sign};

fn order() -> impl Strategy<Value = AdjustmentOrder> {
    prop_oneof![Just(AdjustmentOrder::Unadjusted), Just(AdjustmentOrder::First), Just(AdjustmentOrder::Second)]
}

fn adjusted_order() -> impl Strategy<Value = AdjustmentOrder> {
    prop_oneof![Just(AdjustmentOrder::First), Just(AdjustmentOrder::Second)]
}

fn profile() -> impl Strategy<Value = MomentProfile> {
    (-3.0f64..3.0, 0.0f64..12.0, 0.1f64..10.0, -50.0f64..50.0).prop_map(|(g1, extra, sigma, mu)| MomentProfile {
        mu,
        sigma,
        g1,
        g2: g1 * g1 - 2.0 + extra,
    })
}

fn log_prob() -> impl Strategy<Value = Probability> {
    (-280.0f64..-0.302).prop_map(|l| Probability::new(10f64.powf(l)).unwrap())
}

fn finite_part(d: MonotoneDomain, cap: f64) -> (f64, f64) {
    (d.lo.max(-cap), d.hi.min(cap))
}

proptest! {
    #[test]
    fn quantile_round_trip(p in log_prob()) {
        let x = gaussian::normal_quantile(p);
        let back = gaussian::normal_cdf(x).unwrap();
        prop_assert!((back - p.value()).abs() <= 1e-10 * p.value());
    }

    #[test]
    fn quantile_is_strictly_increasing(a in -280.0f64..-0.302, b in -280.0f64..-0.302) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let qlo = gaussian::normal_quantile(Probability::new(10f64.powf(lo)).unwrap());
        let qhi = gaussian::normal_quantile(Probability::new(10f64.powf(hi)).unwrap());
        prop_assert!(qlo < qhi);
    }

    #[test]
    fn cdf_and_sf_are_complementary(x in -8.0f64..8.0) {
        let sum = gaussian::normal_cdf(x).unwrap() + gaussian::normal_sf(x).unwrap();
        prop_assert!((sum - 1.0).abs() <= 2e-16);
    }

    #[test]
    fn adjusted_statistic_increases_on_its_domain(m in profile(), n in 1u64..100_000, s in adjusted_order(), u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let m = MomentProfile { mu: 0.0, sigma: 1.0, ..m };
        let (lo, hi) = finite_part(adjustment::monotone_domain(n, &m, s), 50.0);
        let a = lo + (hi - lo) * u.min(v);
        let b = lo + (hi - lo) * u.max(v);
        prop_assume!(b - a > 1e-9 * (hi - lo) && a > lo && b < hi);
        let ta = adjustment::adjusted_statistic(a, n, &m, s).unwrap();
        let tb = adjustment::adjusted_statistic(b, n, &m, s).unwrap();
        prop_assert!(ta < tb, "T({a}) = {ta} !< T({b}) = {tb}");
    }

    #[test]
    fn inverse_round_trips(m in profile(), n in 1u64..100_000, s in adjusted_order(), u in 0.01f64..0.99) {
        let (lo, hi) = finite_part(adjustment::monotone_domain(n, &m, s), 30.0);
        let t = lo + (hi - lo) * u;
        let x = adjustment::adjusted_statistic(t, n, &m, s).unwrap();
        let back = adjustment::inverse_adjusted_statistic(x, n, &m, s).unwrap();
        let resid = (adjustment::adjusted_statistic(back, n, &m, s).unwrap() - x).abs();
        prop_assert!(resid <= 1e-12 * x.abs().max(1.0), "resid {resid}");
    }

    #[test]
    fn unadjusted_order_is_gaussian(m in profile(), n in 1u64..100_000, alpha in log_prob(), t in -30.0f64..30.0) {
        let z = gaussian::upper_quantile(alpha);
        prop_assert_eq!(adjustment::adjusted_quantile(alpha, n, &m, AdjustmentOrder::Unadjusted, Sign::Plus).unwrap(), z);
        prop_assert_eq!(adjustment::adjusted_statistic(t, n, &m, AdjustmentOrder::Unadjusted).unwrap(), t);
    }

    #[test]
    fn zero_moments_are_gaussian(n in 1u64..100_000, alpha in log_prob(), s in order(), x in 0.1f64..30.0) {
        let m = MomentProfile::standardized(0.0, 0.0).unwrap();
        let z = gaussian::upper_quantile(alpha);
        prop_assert_eq!(adjustment::adjusted_quantile(alpha, n, &m, s, Sign::Plus).unwrap(), z);
        prop_assert_eq!(adjustment::adjusted_quantile(alpha, n, &m, s, Sign::Minus).unwrap(), z);
        if s != AdjustmentOrder::Unadjusted {
            let f = adjustment::cramer_tail(x, n, &m, s, Sign::Plus).unwrap();
            let g = gaussian::mills_tail(x).unwrap();
            prop_assert!((f - g).abs() <= 1e-15 * g);
        }
    }

    #[test]
    fn minus_sign_is_negated_skewness(m in profile(), n in 1u64..100_000, alpha in log_prob(), s in order()) {
        let a = adjustment::adjusted_quantile(alpha, n, &m, s, Sign::Minus).unwrap();
        let b = adjustment::adjusted_quantile(alpha, n, &m.negated(), s, Sign::Plus).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn cramer_orders_differ_by_kurtosis_factor(m in profile(), n in 1u64..100_000, x in 0.1f64..20.0) {
        let l1 = adjustment::ln_cramer_tail(x, n, &m, AdjustmentOrder::First, Sign::Plus).unwrap();
        let l2 = adjustment::ln_cramer_tail(x, n, &m, AdjustmentOrder::Second, Sign::Plus).unwrap();
        let a1 = m.cramer_coefficients().a1;
        let expected = a1 * x.powi(4) / n as f64;
        prop_assert!((l2 - l1 - expected).abs() <= 1e-12 * l1.abs().max(1.0));
    }

    #[test]
    fn test_rejects_iff_interval_misses(m in profile(), n in 1u64..10_000, alpha in log_prob(), s in order(), d in -5.0f64..5.0) {
        let xbar = m.mu + d * m.sigma / (n as f64).sqrt();
        let ci = inference::upper_interval(xbar, n, &m, alpha, s).unwrap();
        let test = inference::gauss_test(xbar, n, &m, m.mu, alpha, s, TestRule::AdjustedQuantile).unwrap();
        prop_assert_eq!(test.reject, !ci.covers(m.mu));
    }
}

#[test]
fn duality_residual_has_the_expected_order() {
    let m = MomentProfile::standardized(1.2, 3.0).unwrap();
    let alpha = Probability::new(0.01).unwrap();
    let z = gaussian::upper_quantile(alpha);
    for (s, power) in [(AdjustmentOrder::First, 1.0), (AdjustmentOrder::Second, 1.5)] {
        let scaled: Vec<f64> = [100u64, 1_000, 10_000, 100_000]
            .iter()
            .map(|&n| {
                let zq = adjustment::adjusted_quantile(alpha, n, &m, s, Sign::Plus).unwrap();
                let r = (adjustment::adjusted_statistic(zq, n, &m, s).unwrap() - z).abs();
                r * (n as f64).powf(power)
            })
            .collect();
        let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(lo > 0.0 && hi / lo < 3.0, "s={s}: {scaled:?}");
    }
}
