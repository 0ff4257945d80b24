//! Property-based tests for invariants that should hold on arbitrary
//! inputs, not just hand-picked fixtures.

use ndarray::{Array1, Array2};
use proptest::prelude::*;

use sentfactor::date::TradingDate;
use sentfactor::event::{cumulative_ar, ArSeries};
use sentfactor::regression::{ols_fit, DesignMatrix};
use sentfactor::sentiment::{aggregate_daily, rolling_volatility, DailySentiment, SentimentItem};

fn weekday_series(values: &[f64]) -> Vec<DailySentiment> {
    let mut d = TradingDate::new(2021, 3, 1).unwrap();
    values
        .iter()
        .map(|&s_t| {
            let out = DailySentiment { date: d, s_t, n_items: 1 };
            d = d.next_weekday();
            out
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The daily index is a mean: item order never matters.
    #[test]
    fn aggregation_is_permutation_invariant(
        scores in prop::collection::vec((0u8..5, -1.0f64..1.0), 2..40),
        seed in 0u64..1000,
    ) {
        let dates: Vec<TradingDate> = {
            let mut d = TradingDate::new(2021, 6, 1).unwrap();
            (0..5).map(|_| { let cur = d; d = d.next_weekday(); cur }).collect()
        };
        let items: Vec<SentimentItem> = scores
            .iter()
            .map(|&(day, s)| {
                let p_pos = (1.0 + s) / 2.0;
                let p_neg = (1.0 - s) / 2.0;
                SentimentItem::new(dates[day as usize], "news", p_pos, 0.0, p_neg).unwrap()
            })
            .collect();
        let mut shuffled = items.clone();
        // Deterministic Fisher-Yates driven by the seed.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        let a = aggregate_daily(&items);
        let b = aggregate_daily(&shuffled);
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert_eq!(x.date, y.date);
            prop_assert_eq!(x.n_items, y.n_items);
            prop_assert!((x.s_t - y.s_t).abs() <= 1e-12);
        }
    }

    /// Volatility is shift invariant: adding a constant to every S_t leaves
    /// HV_t unchanged.
    #[test]
    fn hv_is_shift_invariant(
        values in prop::collection::vec(-0.5f64..0.5, 10..60),
        shift in -0.4f64..0.4,
        window in 2usize..8,
    ) {
        prop_assume!(values.len() >= window);
        let base = weekday_series(&values);
        let shifted_vals: Vec<f64> = values.iter().map(|v| v + shift).collect();
        let shifted = weekday_series(&shifted_vals);
        let a = rolling_volatility(&base, window).unwrap();
        let b = rolling_volatility(&shifted, window).unwrap();
        for ((d1, v1), (d2, v2)) in a.values.iter().zip(b.values.iter()) {
            prop_assert_eq!(d1, d2);
            prop_assert!((v1 - v2).abs() <= 1e-12, "{} vs {}", v1, v2);
        }
    }

    /// Scaling a regressor column by c scales its coefficient by 1/c and
    /// leaves every t-statistic unchanged.
    #[test]
    fn t_stats_are_scale_equivariant(
        seed in 0u64..10_000,
        c in prop::sample::select(vec![0.01f64, 0.5, 3.0, 250.0]),
    ) {
        let n = 50;
        let k = 3;
        let mut state = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
        let mut next = || {
            state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let mut x = Array2::<f64>::zeros((n, k));
        let mut y = Array1::<f64>::zeros(n);
        for i in 0..n {
            x[[i, 0]] = 1.0;
            x[[i, 1]] = next();
            x[[i, 2]] = next();
            y[i] = 0.3 + 1.2 * x[[i, 1]] - 0.7 * x[[i, 2]] + 0.1 * next();
        }
        let labels = vec!["const".to_string(), "x1".to_string(), "x2".to_string()];
        let d1 = DesignMatrix::from_parts(x.clone(), y.clone(), labels.clone(), true).unwrap();
        let f1 = ols_fit(&d1).unwrap();
        let mut xs = x;
        for i in 0..n {
            xs[[i, 1]] *= c;
        }
        let d2 = DesignMatrix::from_parts(xs, y, labels, true).unwrap();
        let f2 = ols_fit(&d2).unwrap();
        prop_assert!(
            (f2.coefficients[1] - f1.coefficients[1] / c).abs()
                <= 1e-8 * f1.coefficients[1].abs().max(1e-12) / c.abs().min(1.0),
        );
        for j in 0..k {
            let (t1, t2) = (f1.t_stats[j], f2.t_stats[j]);
            prop_assert!((t1 - t2).abs() <= 1e-8 * t1.abs().max(1.0), "{} vs {}", t1, t2);
        }
    }

    /// CAR telescoping: CAR[t1,t2] = CAR[t1,m] + CAR[m+1,t2] for any split.
    #[test]
    fn car_telescopes(
        ar_values in prop::collection::vec(-0.05f64..0.05, 5..25),
        split_frac in 0.0f64..1.0,
    ) {
        let t1 = -(ar_values.len() as i64 / 2);
        let t2 = t1 + ar_values.len() as i64 - 1;
        let series = ArSeries {
            asset: "X".to_string(),
            t1,
            values: ar_values.iter().map(|&v| Some(v)).collect(),
            forecast_variance: vec![Some(1.0); ar_values.len()],
        };
        let m = t1 + ((t2 - t1) as f64 * split_frac) as i64;
        prop_assume!(m < t2);
        let full = cumulative_ar(&series, t1, t2).unwrap();
        let left = cumulative_ar(&series, t1, m).unwrap();
        let right = cumulative_ar(&series, m + 1, t2).unwrap();
        let total = full.values.last().unwrap().unwrap();
        let l = left.values.last().unwrap().unwrap();
        let r = right.values.last().unwrap().unwrap();
        prop_assert!((total - (l + r)).abs() <= 1e-12, "{} vs {}", total, l + r);
    }
}
