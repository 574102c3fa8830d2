//! Nowcasts, trend probabilities and model-based alerts from posterior draws.
//!
//! Chains are pooled. Quantiles interpolate linearly between order
//! statistics: the `p` quantile of `n` sorted values sits at position
//! `(n - 1) p`.

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::data::AnalysisWindow;
use crate::error::{Error, Result};
use crate::indicators::{IndicatorResult, Method};
use crate::model::{CellStatus, ModelData};
use crate::sampler::diagnostics::{split_rhat, MIN_DRAWS, RHAT_THRESHOLD};
use crate::sampler::{MonitorKey, PosteriorDraws};

/// Cutpoints reported in `trend.csv`.
pub const CUTPOINTS: [f64; 3] = [0.5, 0.7, 0.9];

/// Name of the quantile rule, written to output metadata.
pub const QUANTILE_RULE: &str = "linear interpolation of order statistics at (n - 1) p";

/// Quantile of already sorted values.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

/// Monitored `delta` columns of `county` on the trailing `window` days.
fn trend_columns(draws: &PosteriorDraws, county: usize, n_days: usize, window: usize) -> Result<Vec<usize>> {
    let from = n_days.checked_sub(window).ok_or(Error::SeriesTooShort {
        needed: window,
        got: n_days,
    })?;
    (from..n_days)
        .map(|t| {
            let key = MonitorKey::Delta(county, t);
            draws.column_of(key).ok_or_else(|| Error::MissingMonitor(key.name()))
        })
        .collect()
}

/// Per-draw sums of `delta` over the trailing `window` days, pooled over chains.
pub fn trend_sums(draws: &PosteriorDraws, county: usize, n_days: usize, window: usize) -> Result<Vec<f64>> {
    let cols = trend_columns(draws, county, n_days, window)?;
    let mut out = Vec::with_capacity(draws.total_draws());
    for c in &draws.chains {
        for k in 0..c.n_draws() {
            let row = c.row(k);
            out.push(cols.iter().map(|&j| row[j]).sum());
        }
    }
    Ok(out)
}

/// Fraction of pooled draws whose trailing `window`-day sum of `delta` is positive.
pub fn trend_probability(draws: &PosteriorDraws, county: usize, n_days: usize, window: usize) -> Result<f64> {
    let sums = trend_sums(draws, county, n_days, window)?;
    if sums.is_empty() {
        return Err(Error::Input("no posterior draws".into()));
    }
    Ok(sums.iter().filter(|&&s| s > 0.0).count() as f64 / sums.len() as f64)
}

/// Whether any monitored trend column of `county` has split-R-hat above the
/// threshold. `false` when fewer than two chains or too few draws.
fn trend_unconverged(draws: &PosteriorDraws, cols: &[usize]) -> bool {
    let min = draws.chains.iter().map(|c| c.n_draws()).min().unwrap_or(0);
    if draws.chains.len() < 2 || min < MIN_DRAWS {
        return false;
    }
    cols.iter().any(|&col| {
        let chains: Vec<Vec<f64>> = draws.chains.iter().map(|c| c.column(col)).collect();
        let r = split_rhat(&chains);
        // Constant columns have no between-chain disagreement to report.
        !r.is_nan() && r > RHAT_THRESHOLD
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub county_id: String,
    pub probability_increase: f64,
    pub flag50: bool,
    pub flag70: bool,
    pub flag90: bool,
    /// Some monitored trend value of this county failed the R-hat screen.
    pub convergence_warning: bool,
}

pub fn trend_summaries(
    draws: &PosteriorDraws,
    county_ids: &[String],
    n_days: usize,
    window: usize,
) -> Result<Vec<TrendSummary>> {
    county_ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let p = trend_probability(draws, i, n_days, window)?;
            let cols = trend_columns(draws, i, n_days, window)?;
            Ok(TrendSummary {
                county_id: id.clone(),
                probability_increase: p,
                flag50: p > CUTPOINTS[0],
                flag70: p > CUTPOINTS[1],
                flag90: p > CUTPOINTS[2],
                convergence_warning: trend_unconverged(draws, &cols),
            })
        })
        .collect()
}

/// Model-based alert: flagged iff the probability exceeds `cutpoint` strictly.
pub fn classify(trend: &TrendSummary, cutpoint: f64, as_of: NaiveDate) -> IndicatorResult {
    IndicatorResult {
        county_id: trend.county_id.clone(),
        method: Method::Model,
        flagged: trend.probability_increase > cutpoint,
        probability: Some(trend.probability_increase),
        as_of_date: as_of,
    }
}

/// Posterior summary of one county-day total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NowcastSummary {
    pub county_id: String,
    pub date: NaiveDate,
    /// Cases reported so far.
    pub observed: u64,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Equal-tailed `level` intervals for every county-day. Fully reported days
/// have the degenerate interval at the observed total.
pub fn nowcast_intervals(
    draws: &PosteriorDraws,
    data: &ModelData,
    window: &AnalysisWindow,
    county_ids: &[String],
    level: f64,
) -> Result<Vec<NowcastSummary>> {
    let dims = data.dims;
    let tail = (1.0 - level) / 2.0;
    let mut out = Vec::with_capacity(dims.n * dims.t);
    for (i, id) in county_ids.iter().enumerate().take(dims.n) {
        for t in 0..dims.t {
            let observed: u64 = (0..=dims.d).map(|d| data.z(i, t, d)).sum();
            let (mean, lower, upper) = match (data.status(t), draws.column_of(MonitorKey::Y(i, t))) {
                (_, Some(_)) => {
                    let mut v = draws.pooled(MonitorKey::Y(i, t))?;
                    if v.is_empty() {
                        return Err(Error::Input("no posterior draws".into()));
                    }
                    let mean = v.iter().sum::<f64>() / v.len() as f64;
                    v.sort_by(f64::total_cmp);
                    (mean, quantile_sorted(&v, tail), quantile_sorted(&v, 1.0 - tail))
                }
                (CellStatus::Complete, None) => (observed as f64, observed as f64, observed as f64),
                (_, None) => return Err(Error::MissingMonitor(MonitorKey::Y(i, t).name())),
            };
            out.push(NowcastSummary {
                county_id: id.clone(),
                date: window.date(t),
                observed,
                mean,
                lower,
                upper,
            });
        }
    }
    Ok(out)
}

/// `county,date,observed,mean,lo90,hi90`.
pub fn write_nowcast_csv(path: &Path, rows: &[NowcastSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["county", "date", "observed", "mean", "lo90", "hi90"])
        .map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.write_record([
            r.county_id.clone(),
            r.date.to_string(),
            r.observed.to_string(),
            r.mean.to_string(),
            r.lower.to_string(),
            r.upper.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `county,p_increase,flag50,flag70,flag90`.
pub fn write_trend_csv(path: &Path, rows: &[TrendSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["county", "p_increase", "flag50", "flag70", "flag90"])
        .map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.write_record([
            r.county_id.clone(),
            r.probability_increase.to_string(),
            r.flag50.to_string(),
            r.flag70.to_string(),
            r.flag90.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads `county,date,observed,mean,lo90,hi90`.
pub fn read_nowcast_csv(path: &Path) -> Result<Vec<NowcastSummary>> {
    #[derive(Deserialize)]
    struct Row {
        county: String,
        date: NaiveDate,
        observed: u64,
        mean: f64,
        lo90: f64,
        hi90: f64,
    }
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    rdr.deserialize::<Row>()
        .map(|r| {
            r.map(|r| NowcastSummary {
                county_id: r.county,
                date: r.date,
                observed: r.observed,
                mean: r.mean,
                lower: r.lo90,
                upper: r.hi90,
            })
            .map_err(|e| Error::csv(path, e))
        })
        .collect()
}

/// Reads `county,p_increase,...` and returns `(county, probability)` pairs.
pub fn read_trend_csv(path: &Path) -> Result<Vec<(String, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        county: String,
        p_increase: f64,
    }
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    rdr.deserialize::<Row>()
        .map(|r| r.map(|r| (r.county, r.p_increase)).map_err(|e| Error::csv(path, e)))
        .collect()
}
