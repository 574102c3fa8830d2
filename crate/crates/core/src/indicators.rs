//! Rolling-average and cubic-spline trend indicators.
//!
//! Both indicators look at the 7-day rolling averages over the last 21 days
//! of an onset-indexed count series and flag a county when they find a run
//! of strictly increasing values. The spline variant smooths the averages
//! with a least-squares cubic B-spline first.

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rolling,
    Spline,
    Model,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rolling => "rolling",
            Method::Spline => "spline",
            Method::Model => "model",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rolling" => Ok(Method::Rolling),
            "spline" => Ok(Method::Spline),
            "model" => Ok(Method::Model),
            other => Err(Error::Input(format!("unknown method `{other}`"))),
        }
    }
}

/// Per-county decision from one of the three methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorResult {
    pub county_id: String,
    pub method: Method,
    pub flagged: bool,
    /// Posterior probability of an increase; present only for the model.
    pub probability: Option<f64>,
    pub as_of_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorConfig {
    /// Days in the assessment window.
    pub window: usize,
    /// Width of the trailing rolling average.
    pub rolling: usize,
    /// Consecutive strict increases required to flag.
    pub run_length: usize,
    /// Interior spline knots, equally spaced over the window.
    pub interior_knots: usize,
}

impl Default for IndicatorConfig {
    fn default() -> Self {
        Self {
            window: 21,
            rolling: 7,
            run_length: 5,
            interior_knots: 4,
        }
    }
}

impl IndicatorConfig {
    /// Shortest series for which every window average has a full trailing week.
    pub fn min_series_len(&self) -> usize {
        self.window + self.rolling - 1
    }
}

/// Trailing `width`-day means for the last `count` days of `series`.
///
/// Output `k` is the mean of the `width` values ending at position
/// `len - count + k`.
pub fn trailing_means(series: &[f64], width: usize, count: usize) -> Result<Vec<f64>> {
    let needed = count + width - 1;
    if series.len() < needed {
        return Err(Error::SeriesTooShort {
            needed,
            got: series.len(),
        });
    }
    let start = series.len() - needed;
    Ok(series[start..]
        .windows(width)
        .map(|w| w.iter().sum::<f64>() / width as f64)
        .collect())
}

/// The 21 seven-day rolling averages ending at the as-of date.
pub fn rolling_average(series: &[f64]) -> Result<Vec<f64>> {
    let cfg = IndicatorConfig::default();
    trailing_means(series, cfg.rolling, cfg.window)
}

/// True iff there are `run_length` consecutive days each strictly above the
/// day before. The first value is compared with `prior_value`.
pub fn run_increase_flag(values: &[f64], prior_value: f64, run_length: usize) -> bool {
    if run_length == 0 {
        return true;
    }
    let mut prev = prior_value;
    let mut run = 0;
    for &v in values {
        run = if v > prev { run + 1 } else { 0 };
        if run >= run_length {
            return true;
        }
        prev = v;
    }
    false
}

/// Rolling averages plus the baseline value for the first window day.
///
/// The baseline is the average for the day before the window when the series
/// is long enough to provide a full week for it; otherwise the first window
/// average is used, which keeps the first day out of any run.
fn rolling_with_baseline(series: &[f64], cfg: &IndicatorConfig) -> Result<(Vec<f64>, f64)> {
    if series.len() > cfg.min_series_len() {
        let mut avgs = trailing_means(series, cfg.rolling, cfg.window + 1)?;
        let prior = avgs.remove(0);
        Ok((avgs, prior))
    } else {
        let avgs = trailing_means(series, cfg.rolling, cfg.window)?;
        let prior = avgs[0];
        Ok((avgs, prior))
    }
}

pub fn rolling_flag(series: &[f64], cfg: &IndicatorConfig) -> Result<bool> {
    let (avgs, prior) = rolling_with_baseline(series, cfg)?;
    Ok(run_increase_flag(&avgs, prior, cfg.run_length))
}

pub fn rolling_indicator(
    county_id: &str,
    as_of_date: NaiveDate,
    series: &[f64],
    cfg: &IndicatorConfig,
) -> Result<IndicatorResult> {
    Ok(IndicatorResult {
        county_id: county_id.to_string(),
        method: Method::Rolling,
        flagged: rolling_flag(series, cfg)?,
        probability: None,
        as_of_date,
    })
}

pub fn spline_flag(series: &[f64], cfg: &IndicatorConfig) -> Result<bool> {
    let avgs = trailing_means(series, cfg.rolling, cfg.window)?;
    let fit = fit_cubic_spline_with(&avgs, cfg.interior_knots)?;
    Ok(run_increase_flag(&fit, fit[0], cfg.run_length))
}

pub fn spline_indicator(
    county_id: &str,
    as_of_date: NaiveDate,
    series: &[f64],
    cfg: &IndicatorConfig,
) -> Result<IndicatorResult> {
    Ok(IndicatorResult {
        county_id: county_id.to_string(),
        method: Method::Spline,
        flagged: spline_flag(series, cfg)?,
        probability: None,
        as_of_date,
    })
}

/// Cubic B-spline basis on `[lo, hi]` with equally spaced interior knots.
#[derive(Debug, Clone)]
pub struct CubicBSpline {
    knots: Vec<f64>,
}

impl CubicBSpline {
    const ORDER: usize = 4;

    pub fn equally_spaced(lo: f64, hi: f64, interior: usize) -> Self {
        let mut knots = vec![lo; Self::ORDER];
        let step = (hi - lo) / (interior + 1) as f64;
        knots.extend((1..=interior).map(|k| lo + step * k as f64));
        knots.extend(std::iter::repeat_n(hi, Self::ORDER));
        Self { knots }
    }

    pub fn dim(&self) -> usize {
        self.knots.len() - Self::ORDER
    }

    pub fn interior_knots(&self) -> &[f64] {
        &self.knots[Self::ORDER..self.knots.len() - Self::ORDER]
    }

    /// All basis functions at `x` (Cox-de Boor recursion).
    pub fn eval(&self, x: f64) -> Vec<f64> {
        let k = &self.knots;
        let hi = k[k.len() - 1];
        // Degree-0 indicators on half-open spans; the right end belongs to the last span.
        let mut b: Vec<f64> = (0..k.len() - 1)
            .map(|j| {
                let inside = (k[j] <= x && x < k[j + 1]) || (x == hi && k[j] < hi && k[j + 1] == hi);
                if inside {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        for p in 1..Self::ORDER {
            let next: Vec<f64> = (0..k.len() - 1 - p)
                .map(|j| {
                    let mut v = 0.0;
                    let left = k[j + p] - k[j];
                    if left > 0.0 {
                        v += (x - k[j]) / left * b[j];
                    }
                    let right = k[j + p + 1] - k[j + 1];
                    if right > 0.0 {
                        v += (k[j + p + 1] - x) / right * b[j + 1];
                    }
                    v
                })
                .collect();
            b = next;
        }
        b
    }

    pub fn design(&self, xs: &[f64]) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(xs.len(), dim);
        for (r, &x) in xs.iter().enumerate() {
            for (c, v) in self.eval(x).into_iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// Least-squares cubic spline with 4 interior knots over `x = 1..=n`.
pub fn fit_cubic_spline(y: &[f64]) -> Result<Vec<f64>> {
    fit_cubic_spline_with(y, IndicatorConfig::default().interior_knots)
}

pub fn fit_cubic_spline_with(y: &[f64], interior_knots: usize) -> Result<Vec<f64>> {
    let n = y.len();
    let basis = CubicBSpline::equally_spaced(1.0, n as f64, interior_knots);
    if n < basis.dim() {
        return Err(Error::SeriesTooShort {
            needed: basis.dim(),
            got: n,
        });
    }
    let xs: Vec<f64> = (1..=n).map(|x| x as f64).collect();
    let b = basis.design(&xs);
    let rhs = DVector::from_column_slice(y);
    let qr = b.clone().qr();
    let coef = qr
        .r()
        .solve_upper_triangular(&(qr.q().transpose() * &rhs))
        .ok_or_else(|| Error::Numerical("spline design is rank deficient".into()))?;
    let fitted = &b * coef;
    if fitted.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite spline fit".into()));
    }
    Ok(fitted.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rolling_average_examples() {
        assert_eq!(rolling_average(&[3.0; 27]).unwrap(), vec![3.0; 21]);
        let ramp: Vec<f64> = (1..=27).map(|x| x as f64).collect();
        let expect: Vec<f64> = (4..=24).map(|x| x as f64).collect();
        assert_eq!(rolling_average(&ramp).unwrap(), expect);
        assert!(matches!(
            rolling_average(&[1.0; 26]),
            Err(Error::SeriesTooShort { needed: 27, got: 26 })
        ));
    }

    #[test]
    fn run_rule_examples() {
        assert!(!run_increase_flag(&[2.0; 21], 2.0, 5));
        let inc: Vec<f64> = (0..21).map(|x| x as f64).collect();
        assert!(run_increase_flag(&inc, -1.0, 5));
        // Four increases then a drop, repeated.
        let saw: Vec<f64> = (0..21).map(|k| (k % 5) as f64).collect();
        assert!(!run_increase_flag(&saw, 10.0, 5));
        assert!(run_increase_flag(&saw, 10.0, 4));
        // Ties break runs.
        assert!(!run_increase_flag(&[1.0, 2.0, 3.0, 3.0, 4.0, 5.0, 6.0], 0.0, 5));
        // The baseline counts as the comparison for the first day.
        assert!(run_increase_flag(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.0, 5));
        assert!(!run_increase_flag(&[1.0, 2.0, 3.0, 4.0, 5.0], 1.0, 5));
    }

    #[test]
    fn single_step_rule() {
        assert!(run_increase_flag(&[1.0, 1.0, 1.5], 1.0, 1));
        assert!(!run_increase_flag(&[1.0, 1.0, 0.5], 1.0, 1));
    }

    #[test]
    fn rolling_indicator_examples() {
        let cfg = IndicatorConfig::default();
        assert!(!rolling_flag(&[0.0; 40], &cfg).unwrap());
        let doubling: Vec<f64> = (0..27).map(|k| 2f64.powi(k)).collect();
        assert!(rolling_flag(&doubling, &cfg).unwrap());
        let mut spike = vec![0.0; 30];
        spike[10] = 1.0;
        assert!(!rolling_flag(&spike, &cfg).unwrap());
    }

    #[test]
    fn basis_is_a_partition_of_unity() {
        let b = CubicBSpline::equally_spaced(1.0, 21.0, 4);
        assert_eq!(b.dim(), 8);
        assert_eq!(b.interior_knots(), &[5.0, 9.0, 13.0, 17.0]);
        for k in 0..=200 {
            let x = 1.0 + 20.0 * k as f64 / 200.0;
            let s: f64 = b.eval(x).iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "x={x} sum={s}");
        }
    }

    #[test]
    fn spline_reproduces_cubics_and_constants() {
        let y: Vec<f64> = (1..=21)
            .map(|x| {
                let x = x as f64;
                0.5 - 0.3 * x + 0.02 * x * x - 0.001 * x * x * x
            })
            .collect();
        let fit = fit_cubic_spline(&y).unwrap();
        for (a, b) in fit.iter().zip(&y) {
            assert!((a - b).abs() < 1e-8);
        }
        let fit = fit_cubic_spline(&[4.5; 21]).unwrap();
        assert!(fit.iter().all(|v| (v - 4.5).abs() < 1e-10));
    }

    #[test]
    fn spline_indicator_examples() {
        let cfg = IndicatorConfig::default();
        assert!(!spline_flag(&[5.0; 30], &cfg).unwrap());
        assert!(!spline_flag(&[0.0; 30], &cfg).unwrap());
        let line: Vec<f64> = (0..30).map(|k| 2.0 + 0.5 * k as f64).collect();
        assert!(spline_flag(&line, &cfg).unwrap());
    }

    #[test]
    fn bump_flags_rolling_but_not_spline() {
        // A short block of extra cases on a declining background: the
        // trailing averages climb for as many days as the block is wide,
        // while the spline spreads the block over the decline.
        let cfg = IndicatorConfig::default();
        let mut found = None;
        'search: for slope in [0.0, 0.25, 0.5, 1.0, 2.0] {
            for width in 5..=7 {
                for start in 6..22 {
                    for height in 1..=60 {
                        let mut s: Vec<f64> = (0..28).map(|k| 100.0 - slope * k as f64).collect();
                        for v in &mut s[start..start + width] {
                            *v += height as f64;
                        }
                        if rolling_flag(&s, &cfg).unwrap() && !spline_flag(&s, &cfg).unwrap() {
                            found = Some((slope, width, start, height));
                            break 'search;
                        }
                    }
                }
            }
        }
        assert!(found.is_some(), "no bump separates the two rules");
    }
}
