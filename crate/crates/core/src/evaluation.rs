//! Scoring indicator decisions against fully reported counts.

use std::collections::HashMap;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::NowcastSummary;

/// Days in the comparison window of the true-increase rule.
pub const TRUE_CHANGE_WINDOW: usize = 21;

/// True iff the last 7 of the trailing 21 daily counts sum to strictly more
/// than the first 7.
pub fn true_increase(counts: &[u64]) -> Result<bool> {
    if counts.len() < TRUE_CHANGE_WINDOW {
        return Err(Error::SeriesTooShort {
            needed: TRUE_CHANGE_WINDOW,
            got: counts.len(),
        });
    }
    let w = &counts[counts.len() - TRUE_CHANGE_WINDOW..];
    let first: u64 = w[..7].iter().sum();
    let last: u64 = w[14..].iter().sum();
    Ok(last > first)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn add(&mut self, flagged: bool, truth: bool) {
        match (flagged, truth) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `TP / (TP + FN)`, absent when there are no true increases.
    pub fn sensitivity(&self) -> Option<f64> {
        let p = self.tp + self.fn_;
        (p > 0).then(|| self.tp as f64 / p as f64)
    }

    /// `TN / (TN + FP)`, absent when there are no true non-increases.
    pub fn specificity(&self) -> Option<f64> {
        let n = self.tn + self.fp;
        (n > 0).then(|| self.tn as f64 / n as f64)
    }
}

/// Confusion counts over aligned flag/truth pairs.
pub fn confusion(flags: &[bool], truths: &[bool]) -> Result<Confusion> {
    if flags.len() != truths.len() {
        return Err(Error::LengthMismatch(flags.len(), truths.len()));
    }
    let mut c = Confusion::default();
    for (&f, &t) in flags.iter().zip(truths) {
        c.add(f, t);
    }
    Ok(c)
}

/// Onset days scored for interval coverage, counted back from the as-of date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Last30,
    Last7,
    /// The days whose reporting is still incomplete: the last `D`.
    Incomplete,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Last30 => "last30",
            Region::Last7 => "last7",
            Region::Incomplete => "incomplete",
        }
    }

    pub fn days(self, max_delay: usize) -> usize {
        match self {
            Region::Last30 => 30,
            Region::Last7 => 7,
            Region::Incomplete => max_delay,
        }
    }
}

/// True totals keyed by county and onset date.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TruthTable {
    counts: HashMap<(String, NaiveDate), u64>,
}

impl TruthTable {
    pub fn insert(&mut self, county: &str, date: NaiveDate, count: u64) {
        self.counts.insert((county.to_string(), date), count);
    }

    pub fn get(&self, county: &str, date: NaiveDate) -> Option<u64> {
        self.counts.get(&(county.to_string(), date)).copied()
    }

    /// The `len` daily totals ending at `end`.
    pub fn series(&self, county: &str, end: NaiveDate, len: usize) -> Result<Vec<u64>> {
        (0..len)
            .rev()
            .map(|k| {
                let date = end - Duration::days(k as i64);
                self.get(county, date).ok_or_else(|| {
                    Error::Input(format!("no true count for county `{county}` on {date}"))
                })
            })
            .collect()
    }

    pub fn true_increase(&self, county: &str, as_of: NaiveDate) -> Result<bool> {
        true_increase(&self.series(county, as_of, TRUE_CHANGE_WINDOW)?)
    }
}

impl FromIterator<(String, NaiveDate, u64)> for TruthTable {
    fn from_iter<I: IntoIterator<Item = (String, NaiveDate, u64)>>(iter: I) -> Self {
        Self {
            counts: iter.into_iter().map(|(c, d, n)| ((c, d), n)).collect(),
        }
    }
}

/// Cells scored and cells whose truth lies inside `[lower, upper]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageCount {
    pub covered: u64,
    pub cells: u64,
}

impl CoverageCount {
    pub fn coverage(&self) -> Option<f64> {
        (self.cells > 0).then(|| self.covered as f64 / self.cells as f64)
    }

    pub fn merge(&mut self, other: CoverageCount) {
        self.covered += other.covered;
        self.cells += other.cells;
    }
}

/// Coverage of the true totals by the nowcast intervals on the `days`
/// onset days ending at `as_of`.
pub fn interval_coverage(
    nowcasts: &[NowcastSummary],
    truth: &TruthTable,
    as_of: NaiveDate,
    days: usize,
) -> Result<CoverageCount> {
    let first = as_of - Duration::days(days as i64 - 1);
    let mut c = CoverageCount::default();
    for r in nowcasts.iter().filter(|r| r.date >= first && r.date <= as_of) {
        let y = truth
            .get(&r.county_id, r.date)
            .ok_or_else(|| Error::Input(format!("no true count for county `{}` on {}", r.county_id, r.date)))?
            as f64;
        c.cells += 1;
        c.covered += (r.lower <= y && y <= r.upper) as u64;
    }
    Ok(c)
}

/// One row of `evaluation.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScore {
    pub method: String,
    pub cutpoint: Option<f64>,
    pub confusion: Confusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageScore {
    pub region: Region,
    pub count: CoverageCount,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub methods: Vec<MethodScore>,
    pub coverage: Vec<CoverageScore>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl EvaluationReport {
    /// `method,cutpoint,tp,fp,tn,fn,sensitivity,specificity`; undefined
    /// rates are left empty.
    pub fn write_evaluation_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(["method", "cutpoint", "tp", "fp", "tn", "fn", "sensitivity", "specificity"])
            .map_err(|e| Error::csv(path, e))?;
        for m in &self.methods {
            let c = m.confusion;
            w.write_record([
                m.method.clone(),
                fmt_opt(m.cutpoint),
                c.tp.to_string(),
                c.fp.to_string(),
                c.tn.to_string(),
                c.fn_.to_string(),
                fmt_opt(c.sensitivity()),
                fmt_opt(c.specificity()),
            ])
            .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// `region,cells,covered,coverage`.
    pub fn write_coverage_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(["region", "cells", "covered", "coverage"])
            .map_err(|e| Error::csv(path, e))?;
        for r in &self.coverage {
            w.write_record([
                r.region.name().to_string(),
                r.count.cells.to_string(),
                r.count.covered.to_string(),
                fmt_opt(r.count.coverage()),
            ])
            .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}
