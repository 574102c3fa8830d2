//! Property tests for triangle construction, the baseline indicators,
//! posterior summaries and scoring.

mod common;

use chrono::Duration;
use common::{as_of, proptest_config};
use nalgebra::{DMatrix, DVector};
use nowcast::data::{
    build_triangle, day_of_week_design, AnalysisWindow, CountyGraph, LineListRecord,
};
use nowcast::evaluation::{confusion, true_increase, TruthTable};
use nowcast::indicators::{
    fit_cubic_spline, rolling_flag, run_increase_flag, spline_flag, CubicBSpline, IndicatorConfig,
};
use nowcast::model::{Dims, ModelState};
use nowcast::posterior::{classify, quantile, trend_probability, trend_summaries};
use nowcast::sampler::{ChainDraws, MonitorKey, PosteriorDraws};
use proptest::prelude::*;

// --- triangle -----------------------------------------------------------------

fn records_strategy() -> impl Strategy<Value = Vec<(usize, i64, i64)>> {
    // (county, days before as-of of onset, delay)
    prop::collection::vec((0usize..3, -5i64..45, 0i64..15), 0..300)
}

fn to_records(raw: &[(usize, i64, i64)]) -> Vec<LineListRecord> {
    raw.iter()
        .map(|&(c, back, delay)| {
            let onset = as_of() - Duration::days(back);
            LineListRecord::new(format!("r0c{c}"), onset, onset + Duration::days(delay))
        })
        .collect()
}

proptest! {
    #![proptest_config(proptest_config(128))]

    #[test]
    fn triangle_accounts_for_every_in_window_record(raw in records_strategy()) {
        let graph = CountyGraph::rook_grid(1, 3, |_| 100).unwrap();
        let window = AnalysisWindow::new(as_of(), 30, 10).unwrap();
        let records = to_records(&raw);
        let tri = build_triangle(&records, &window, &graph).unwrap();
        let in_window = raw.iter().filter(|r| (0..30).contains(&r.1)).count() as u64;
        prop_assert_eq!(tri.total() + tri.dropped_late + tri.reported_after_as_of, in_window);
        let late = raw.iter().filter(|r| (0..30).contains(&r.1) && r.2 > 10).count() as u64;
        prop_assert_eq!(tri.dropped_late, late);
    }

    #[test]
    fn triangle_ignores_record_order(raw in records_strategy(), rot in 0usize..300) {
        let graph = CountyGraph::rook_grid(1, 3, |_| 100).unwrap();
        let window = AnalysisWindow::new(as_of(), 30, 10).unwrap();
        let mut records = to_records(&raw);
        let a = build_triangle(&records, &window, &graph).unwrap();
        if !records.is_empty() {
            let k = rot % records.len();
            records.rotate_left(k);
            records.reverse();
        }
        let b = build_triangle(&records, &window, &graph).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn observed_mask_is_monotone_in_delay(len in 2usize..60, delay_frac in 0.0f64..1.0) {
        let max_delay = 1 + ((len - 2) as f64 * delay_frac) as usize;
        let w = AnalysisWindow::unchecked_len(as_of(), len, max_delay).unwrap();
        for t in 0..len {
            for d in 1..=max_delay {
                if w.is_observed(t, d) {
                    prop_assert!(w.is_observed(t, d - 1));
                }
            }
        }
    }

    #[test]
    fn weekday_design_sums_to_zero_over_any_week(len in 28usize..120, back in 0i64..400) {
        let w = AnalysisWindow::new(as_of() - Duration::days(back), len, 5).unwrap();
        let rows = day_of_week_design(&w);
        for start in 0..=rows.len() - 7 {
            for k in 0..6 {
                let s: f64 = rows[start..start + 7].iter().map(|r| r[k]).sum();
                prop_assert_eq!(s, 0.0);
            }
        }
    }
}

// --- indicators ---------------------------------------------------------------

fn series_strategy() -> impl Strategy<Value = Vec<f64>> {
    (27usize..=90).prop_flat_map(|len| prop::collection::vec(0u32..40, len))
        .prop_map(|v| v.into_iter().map(f64::from).collect())
}

/// Smallest gap between consecutive fitted values; flags are only compared
/// when no gap is close enough to flip under rounding.
fn min_step_gap(fit: &[f64]) -> f64 {
    fit.windows(2).map(|w| (w[1] - w[0]).abs()).fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(proptest_config(256))]

    #[test]
    fn flags_are_scale_invariant(series in series_strategy(), c in 1u32..12, pow in -3i32..4) {
        let cfg = IndicatorConfig::default();
        let scaled: Vec<f64> = series.iter().map(|v| v * c as f64).collect();
        prop_assert_eq!(rolling_flag(&series, &cfg).unwrap(), rolling_flag(&scaled, &cfg).unwrap());
        // Powers of two scale every floating-point step exactly.
        let two = 2f64.powi(pow);
        let scaled: Vec<f64> = series.iter().map(|v| v * two).collect();
        prop_assert_eq!(spline_flag(&series, &cfg).unwrap(), spline_flag(&scaled, &cfg).unwrap());
    }

    #[test]
    fn flags_are_shift_invariant(series in series_strategy(), c in 0u32..1000) {
        let cfg = IndicatorConfig::default();
        let shifted: Vec<f64> = series.iter().map(|v| v + c as f64).collect();
        prop_assert_eq!(rolling_flag(&series, &cfg).unwrap(), rolling_flag(&shifted, &cfg).unwrap());
        let avgs = nowcast::indicators::rolling_average(&series).unwrap();
        let fit = fit_cubic_spline(&avgs).unwrap();
        if min_step_gap(&fit) > 1e-7 {
            prop_assert_eq!(spline_flag(&series, &cfg).unwrap(), spline_flag(&shifted, &cfg).unwrap());
        }
    }

    #[test]
    fn single_step_runs(values in prop::collection::vec(0u8..5, 1..30), prior in 0u8..5) {
        let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
        let any_rise = v[0] > prior as f64 || v.windows(2).any(|w| w[1] > w[0]);
        prop_assert_eq!(run_increase_flag(&v, prior as f64, 1), any_rise);
    }

    #[test]
    fn spline_fit_ignores_affine_reindexing(
        y in prop::collection::vec(-50.0f64..50.0, 21),
        a in -100.0f64..100.0,
        b in 0.01f64..20.0,
    ) {
        let base = fit_cubic_spline(&y).unwrap();
        let xs: Vec<f64> = (1..=21).map(|x| a + b * x as f64).collect();
        let basis = CubicBSpline::equally_spaced(xs[0], xs[20], 4);
        let design: DMatrix<f64> = basis.design(&xs);
        let svd = design.clone().svd(true, true);
        let coef = svd.solve(&DVector::from_column_slice(&y), 1e-12).unwrap();
        let fit = design * coef;
        for k in 0..21 {
            prop_assert!((fit[k] - base[k]).abs() < 1e-8 * (1.0 + base[k].abs()));
        }
    }
}

// --- posterior ----------------------------------------------------------------

const T: usize = 30;

/// Draws of `delta` for one county on the trailing 21 days.
fn trend_draws(chains: &[Vec<[f64; 21]>]) -> PosteriorDraws {
    let keys: Vec<MonitorKey> = (T - 21..T).map(|t| MonitorKey::Delta(0, t)).collect();
    let dims = Dims { n: 1, t: T, d: 2 };
    PosteriorDraws {
        names: keys.iter().map(MonitorKey::name).collect(),
        keys,
        chains: chains
            .iter()
            .enumerate()
            .map(|(c, rows)| {
                let values = rows.iter().flat_map(|r| r.iter().copied()).collect();
                ChainDraws::from_values(c, 21, values, ModelState::zeros(dims)).unwrap()
            })
            .collect(),
    }
}

fn row_strategy() -> impl Strategy<Value = [f64; 21]> {
    prop::array::uniform21(-1.0f64..1.0)
}

proptest! {
    #![proptest_config(proptest_config(128))]

    #[test]
    fn trend_probability_recounts(
        a in prop::collection::vec(row_strategy(), 1..60),
        b in prop::collection::vec(row_strategy(), 1..60),
    ) {
        let draws = trend_draws(&[a.clone(), b.clone()]);
        let p = trend_probability(&draws, 0, T, 21).unwrap();
        let positive = a.iter().chain(&b).filter(|r| r.iter().sum::<f64>() > 0.0).count();
        prop_assert_eq!(p, positive as f64 / (a.len() + b.len()) as f64);
        prop_assert!((0.0..=1.0).contains(&p));

        // Chain order and draw order do not matter.
        let mut ra = a.clone();
        ra.reverse();
        let swapped = trend_draws(&[b, ra]);
        prop_assert_eq!(trend_probability(&swapped, 0, T, 21).unwrap(), p);
    }

    #[test]
    fn mirrored_draws_give_one_half(rows in prop::collection::vec(row_strategy(), 1..80)) {
        let rows: Vec<[f64; 21]> = rows.into_iter().filter(|r| r.iter().sum::<f64>() != 0.0).collect();
        prop_assume!(!rows.is_empty());
        let mirrored: Vec<[f64; 21]> = rows.iter().map(|r| r.map(|v| -v)).collect();
        let draws = trend_draws(&[rows, mirrored]);
        prop_assert_eq!(trend_probability(&draws, 0, T, 21).unwrap(), 0.5);
    }

    #[test]
    fn classifications_are_nested(rows in prop::collection::vec(row_strategy(), 1..80)) {
        let draws = trend_draws(&[rows]);
        let s = &trend_summaries(&draws, &["a".to_string()], T, 21).unwrap()[0];
        prop_assert!(!s.flag90 || s.flag70);
        prop_assert!(!s.flag70 || s.flag50);
        for cut in [0.5, 0.7, 0.9] {
            let flagged = classify(s, cut, as_of()).flagged;
            prop_assert_eq!(flagged, s.probability_increase > cut);
        }
    }

    #[test]
    fn quantiles_are_ordered(v in prop::collection::vec(-1e3f64..1e3, 1..200)) {
        let lo = quantile(&v, 0.05);
        let hi = quantile(&v, 0.95);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(min <= lo && lo <= hi && hi <= max);
    }
}

#[test]
fn draws_one_to_hundred_use_linear_interpolation() {
    let v: Vec<f64> = (1..=100).map(f64::from).collect();
    assert!((quantile(&v, 0.05) - 5.95).abs() < 1e-12);
    assert!((quantile(&v, 0.95) - 95.05).abs() < 1e-12);
}

#[test]
fn missing_trend_monitors_are_an_error() {
    let draws = trend_draws(&[vec![[0.5; 21]]]);
    assert!(trend_probability(&draws, 1, T, 21).is_err());
    assert!(trend_probability(&draws, 0, T, 22).is_err());
}

// --- scoring ------------------------------------------------------------------

proptest! {
    #![proptest_config(proptest_config(256))]

    #[test]
    fn confusion_ignores_pair_order(pairs in prop::collection::vec(any::<(bool, bool)>(), 0..100), rot in 0usize..100) {
        let (f, t): (Vec<bool>, Vec<bool>) = pairs.iter().copied().unzip();
        let a = confusion(&f, &t).unwrap();
        let mut shuffled = pairs.clone();
        if !shuffled.is_empty() {
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
        }
        let (f2, t2): (Vec<bool>, Vec<bool>) = shuffled.into_iter().unzip();
        prop_assert_eq!(a, confusion(&f2, &t2).unwrap());
        prop_assert_eq!(a.total(), pairs.len() as u64);
    }

    #[test]
    fn true_increase_is_shift_invariant_and_scale_covariant(
        counts in prop::collection::vec(0u64..50, 21..40),
        shift in -500i64..500,
        factor in 1u64..5,
    ) {
        let flag = true_increase(&counts).unwrap();
        let doubled: Vec<u64> = counts.iter().map(|c| c * factor).collect();
        prop_assert_eq!(true_increase(&doubled).unwrap(), flag);

        let end = as_of() + Duration::days(shift);
        let table: TruthTable = counts
            .iter()
            .rev()
            .enumerate()
            .map(|(k, &c)| ("x".to_string(), end - Duration::days(k as i64), c))
            .collect();
        prop_assert_eq!(table.true_increase("x", end).unwrap(), flag);
    }
}

#[test]
fn ties_are_not_increases() {
    let mut v = vec![3u64; 21];
    v[0] = 4;
    v[20] = 4;
    assert!(!true_increase(&v).unwrap());
    assert!(!run_increase_flag(&[1.0; 8], 1.0, 1));
}
