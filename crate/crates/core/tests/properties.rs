//! Property tests over randomly generated inputs.

use chrono::NaiveDate;
use proptest::prelude::*;

use jdpinn_core::estimation::{
    detect_jumps, estimate_jump_diffusion, JumpDiffusionEstimate, JumpThresholdConfig,
    SentimentEstimate,
};
use jdpinn_core::fd::{solve_with, FdGrid, FdOptions};
use jdpinn_core::market_data::{describe, log_returns, DayCount, PriceSeries, ReturnSeries};
use jdpinn_core::model::{inverse_transform, transform, MarketModel, PdeProblem};
use jdpinn_core::neural::{eval, init_params, Activation, NetworkArchitecture};
use jdpinn_core::pinn::{trial_eval, TrialFunction};
use jdpinn_core::pricing::{interpolate_spot, PriceSurface, SurfaceSource};

fn series(closes: &[f64]) -> PriceSeries {
    let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    PriceSeries::new(
        closes
            .iter()
            .enumerate()
            .map(|(i, c)| (d0 + chrono::Days::new(i as u64), *c))
            .collect(),
    )
    .unwrap()
}

fn model(maturity: f64, s_max: f64) -> MarketModel {
    MarketModel {
        jd: JumpDiffusionEstimate {
            mu_d: 0.0,
            sigma_d: 0.2,
            lambda: 0.0,
            k: 0.0,
            mu_j: None,
            delta_j: None,
            jump_count: 0,
        },
        sp: SentimentEstimate {
            mu_p: 0.0,
            sigma_p: 0.1,
        },
        phi0: 1.0,
        tau: 0.0,
        rate: 0.03,
        strike: 0.5 * s_max,
        s_max,
        maturity,
    }
}

fn activation() -> impl Strategy<Value = Activation> {
    prop_oneof![
        Just(Activation::Sigmoid),
        Just(Activation::Tanh),
        Just(Activation::Relu)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn log_returns_reconstruct_prices(
        closes in prop::collection::vec(1e-2f64..1e5, 2..60),
        scale in 1e-3f64..1e3,
    ) {
        let r = log_returns(&series(&closes), DayCount::Calendar365);
        let mut level = closes[0];
        for (i, ret) in r.returns.iter().enumerate() {
            level *= ret.exp();
            prop_assert!((level / closes[i + 1] - 1.0).abs() <= 1e-12);
        }
        let scaled: Vec<f64> = closes.iter().map(|c| c * scale).collect();
        let rs = log_returns(&series(&scaled), DayCount::Calendar365);
        for (a, b) in r.returns.iter().zip(&rs.returns) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn describe_ignores_order(
        xs in prop::collection::vec(-1.0f64..1.0, 4..80),
        seed in any::<u64>(),
    ) {
        let mut shuffled = xs.clone();
        let n = shuffled.len();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let a = describe(&ReturnSeries { returns: xs, period_years: 1.0 }).unwrap();
        let b = describe(&ReturnSeries { returns: shuffled, period_years: 1.0 }).unwrap();
        prop_assert_eq!((a.min, a.q1, a.median, a.q3, a.max), (b.min, b.q1, b.median, b.q3, b.max));
        prop_assert!(a.min <= a.q1 && a.q1 <= a.median && a.median <= a.q3 && a.q3 <= a.max);
        prop_assert!((a.mean - b.mean).abs() <= 1e-12);
        prop_assert!((a.std_dev - b.std_dev).abs() <= 1e-12);
        if a.std_dev > 1e-6 {
            prop_assert!((a.skewness - b.skewness).abs() <= 1e-9);
            prop_assert!((a.kurtosis - b.kurtosis).abs() <= 1e-9);
        }
    }

    #[test]
    fn jump_set_shrinks_with_threshold(
        xs in prop::collection::vec(-0.3f64..0.3, 2..200),
        e1 in 0.001f64..0.2,
        de in 0.0f64..0.2,
        years in 0.1f64..10.0,
    ) {
        let r = ReturnSeries { returns: xs, period_years: years };
        let lo = detect_jumps(&r, JumpThresholdConfig::new(e1).unwrap());
        let hi = detect_jumps(&r, JumpThresholdConfig::new(e1 + de).unwrap());
        prop_assert!(hi.jumps.iter().all(|i| lo.jumps.contains(i)));
        prop_assert_eq!(lo.jumps.len() + lo.diffusion.len(), r.returns.len());
        if let Ok(est) = estimate_jump_diffusion(&r, JumpThresholdConfig::new(e1).unwrap()) {
            prop_assert_eq!(est.lambda, est.jump_count as f64 / years);
            prop_assert_eq!(est.jump_count, lo.jumps.len());
        }
    }

    #[test]
    fn transform_round_trips(
        maturity in 0.1f64..10.0,
        s_max in 1.0f64..1e6,
        ut in 0.0f64..=1.0,
        us in 0.0f64..=1.0,
    ) {
        let m = model(maturity, s_max);
        let (tc, sd) = (ut * maturity, us * s_max);
        let (t, s) = transform(tc, sd, &m).unwrap();
        let (tc2, sd2) = inverse_transform(t, s, &m).unwrap();
        prop_assert!((tc2 - tc).abs() <= 1e-12 * maturity);
        prop_assert!((sd2 - sd).abs() <= 1e-12 * s_max);
    }

    #[test]
    fn trial_meets_conditions(
        widths in prop::collection::vec(1usize..12, 1..4),
        act in activation(),
        seed in any::<u64>(),
        kappa in 0.01f64..0.99,
        t in 0.0f64..=1.0,
        s in 0.0f64..=1.0,
    ) {
        let mut sizes = vec![2];
        sizes.extend(widths);
        sizes.push(1);
        let arch = NetworkArchitecture::new(sizes, act).unwrap();
        let tf = TrialFunction::new(arch.clone(), init_params(&arch, seed), kappa).unwrap();
        prop_assert!((trial_eval(&tf, 0.0, s) - (s - kappa).max(0.0)).abs() <= 1e-12);
        prop_assert!(trial_eval(&tf, t, 0.0).abs() <= 1e-12);
        prop_assert!((trial_eval(&tf, t, 1.0) - (1.0 - kappa)).abs() <= 1e-12);
    }

    #[test]
    fn output_layer_scales_linearly(
        act in activation(),
        seed in any::<u64>(),
        c in -5.0f64..5.0,
        t in 0.0f64..=1.0,
        s in 0.0f64..=1.0,
    ) {
        let arch = NetworkArchitecture::new(vec![2, 6, 5, 1], act).unwrap();
        let p = init_params(&arch, seed);
        let mut q = p.clone();
        let last = arch.depth() - 1;
        q.weights_mut(&arch, last).iter_mut().for_each(|w| *w *= c);
        q.biases_mut(&arch, last).iter_mut().for_each(|b| *b *= c);
        let a = eval(&arch, &p, t, s);
        let b = eval(&arch, &q, t, s);
        for (x, y) in [(a.n, b.n), (a.dn_dt, b.dn_dt), (a.dn_ds, b.dn_ds), (a.d2n_ds2, b.d2n_ds2)] {
            prop_assert!((c * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn surface_dollars_round_trip(
        values in prop::collection::vec(0.0f64..1.0, 9),
        s_max in 1.0f64..1e6,
    ) {
        let mut surf = PriceSurface {
            t: vec![0.0, 0.5, 1.0],
            s: vec![0.0, 0.5, 1.0],
            values_normalized: values.clone(),
            s_max,
            maturity: 1.0,
            source: SurfaceSource::Fd,
        };
        let dollars = surf.values_dollars();
        surf.set_from_dollars(&dollars);
        for (a, b) in surf.values_normalized.iter().zip(&values) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn interpolated_quote_is_bracketed(
        values in prop::collection::vec(0.0f64..1.0, 6),
        frac in 0.0f64..=1.0,
    ) {
        let surf = PriceSurface {
            t: vec![0.0, 1.0],
            s: vec![0.0, 0.4, 1.0],
            values_normalized: values.clone(),
            s_max: 100.0,
            maturity: 1.0,
            source: SurfaceSource::Pinn,
        };
        let q = interpolate_spot(&surf, frac * 100.0, 1, 50.0).unwrap();
        let row = &values[3..];
        let (lo, hi) = if frac <= 0.4 { (row[0], row[1]) } else { (row[1], row[2]) };
        let v = q.value_dollars / 100.0;
        prop_assert!(v >= lo.min(hi) - 1e-15 && v <= lo.max(hi) + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fd_values_increase_in_price(
        sigma in 0.1f64..0.5,
        rate in 0.0f64..0.1,
        maturity in 0.25f64..2.0,
        kappa in 0.2f64..0.8,
    ) {
        let pde = PdeProblem::black_scholes(sigma, rate, maturity, kappa);
        let sol = solve_with(&pde, FdGrid::new(100, 100).unwrap(), FdOptions { rannacher: true }).unwrap();
        for j in 0..=100 {
            prop_assert!(sol.row(j).windows(2).all(|w| w[1] >= w[0] - 1e-12), "row {j}");
        }
    }
}
