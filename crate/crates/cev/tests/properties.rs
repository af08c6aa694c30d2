//! Randomized property tests for the pricing identities, the distribution
//! kernel, and the scale invariance of the variable transform.

use cev::model::{transform, CevParams};
use cev::pricing::{call_price, put_price};
use cev::specfun::{nc_chi2_sf, NcChi2Query, SeriesControl};
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = CevParams<f64>> {
    (
        20.0..200.0f64,  // spot
        20.0..200.0f64,  // strike
        0.0..0.15f64,    // rate
        0.3..1.9f64,     // beta
        0.05..3.0f64,    // tau
        0.05..0.6f64,    // sigma0
    )
        .prop_map(|(s, k, r, beta, tau, sigma0)| {
            let delta = sigma0 * s.powf(1.0 - beta / 2.0);
            CevParams::new(s, k, r, delta, beta, tau).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn put_call_parity(p in params_strategy()) {
        let c = call_price(&p).unwrap();
        let pu = put_price(&p).unwrap();
        let gap = c - pu - (p.spot - p.strike * p.discount());
        prop_assert!(gap.abs() <= 1e-10 * (p.spot + p.strike), "gap={gap}");
    }

    #[test]
    fn prices_respect_no_arbitrage_bounds(p in params_strategy()) {
        let c = call_price(&p).unwrap();
        let pu = put_price(&p).unwrap();
        let disc_k = p.strike * p.discount();
        prop_assert!(c >= (p.spot - disc_k).max(0.0) - 1e-12 * p.spot);
        prop_assert!(c <= p.spot + 1e-12 * p.spot);
        prop_assert!(pu >= (disc_k - p.spot).max(0.0) - 1e-12 * p.strike);
        prop_assert!(pu <= disc_k + 1e-12 * p.strike);
    }

    #[test]
    fn survival_in_unit_interval_and_monotone(
        w in 0.01..60.0f64,
        df in 0.2..12.0f64,
        lam in 0.0..40.0f64,
        bump in 0.01..5.0f64,
    ) {
        let ctl = SeriesControl::default();
        let q = |w, df, lam| NcChi2Query { w, df, noncentrality: lam };
        let v = nc_chi2_sf(&q(w, df, lam), &ctl).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        // decreasing in w
        let v_w = nc_chi2_sf(&q(w + bump, df, lam), &ctl).unwrap();
        prop_assert!(v_w <= v + 1e-12);
        // increasing in the noncentrality
        let v_l = nc_chi2_sf(&q(w, df, lam + bump), &ctl).unwrap();
        prop_assert!(v_l >= v - 1e-12);
        // increasing in df
        let v_d = nc_chi2_sf(&q(w, df + bump, lam), &ctl).unwrap();
        prop_assert!(v_d >= v - 1e-12);
    }

    #[test]
    fn transform_scale_invariance(p in params_strategy(), c in 0.2..5.0f64) {
        // S -> cS, K -> cK, delta -> delta c^{1 - beta/2} leaves x, y (and
        // hence the price relative to scale) unchanged
        let tv = transform(&p).unwrap();
        let mut scaled = p;
        scaled.spot *= c;
        scaled.strike *= c;
        scaled.delta_vol *= c.powf(1.0 - p.beta / 2.0);
        let tv2 = transform(&scaled).unwrap();
        prop_assert!((tv2.x / tv.x - 1.0).abs() < 1e-10, "x: {} vs {}", tv2.x, tv.x);
        prop_assert!((tv2.y / tv.y - 1.0).abs() < 1e-10, "y: {} vs {}", tv2.y, tv.y);
        let price = call_price(&p).unwrap();
        let price_scaled = call_price(&scaled).unwrap();
        // mixed tolerance: deep out-of-the-money draws price to (near) zero,
        // where only agreement on the absolute scale c*(S+K) is meaningful
        let tol = 1e-9 * (c * price).abs() + 1e-11 * c * (p.spot + p.strike);
        prop_assert!(
            (price_scaled - c * price).abs() <= tol,
            "{price_scaled} vs {}",
            c * price
        );
    }

    #[test]
    fn call_decreasing_put_increasing_in_strike(p in params_strategy(), bump in 1.0..40.0f64) {
        let mut hi = p;
        hi.strike += bump;
        prop_assert!(call_price(&hi).unwrap() <= call_price(&p).unwrap() + 1e-10);
        prop_assert!(put_price(&hi).unwrap() >= put_price(&p).unwrap() - 1e-10);
    }
}
