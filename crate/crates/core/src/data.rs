//! Line lists, reporting triangles, county graphs and weekday designs.
//!
//! Day indices are zero-based inside the crate: day `0` is the first onset
//! date of the analysis window and day `len - 1` is the as-of date. A cell
//! `(t, d)` of the reporting triangle is observed iff `t + d <= len - 1`.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One reported case.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineListRecord {
    pub county_id: String,
    pub onset_date: NaiveDate,
    pub report_date: NaiveDate,
}

impl LineListRecord {
    pub fn new(county_id: impl Into<String>, onset_date: NaiveDate, report_date: NaiveDate) -> Self {
        Self {
            county_id: county_id.into(),
            onset_date,
            report_date,
        }
    }

    /// Reporting delay in days; negative when the record is malformed.
    pub fn delay(&self) -> i64 {
        (self.report_date - self.onset_date).num_days()
    }
}

/// Moving analysis window ending at the as-of date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisWindow {
    as_of: NaiveDate,
    len: usize,
    max_delay: usize,
}

/// The 21-day indicator window plus the 7-day rolling window.
pub const MIN_WINDOW_LEN: usize = 28;

impl AnalysisWindow {
    pub fn new(as_of: NaiveDate, len: usize, max_delay: usize) -> Result<Self> {
        if len < MIN_WINDOW_LEN {
            return Err(Error::Input(format!(
                "window length {len} is shorter than the minimum {MIN_WINDOW_LEN}"
            )));
        }
        Self::unchecked_len(as_of, len, max_delay)
    }

    /// Window without the indicator-driven minimum length. The model itself
    /// only needs `1 <= max_delay < len`; small windows are used for
    /// calibration studies of the sampler.
    pub fn unchecked_len(as_of: NaiveDate, len: usize, max_delay: usize) -> Result<Self> {
        if max_delay < 1 {
            return Err(Error::Input("maximum delay must be at least 1".into()));
        }
        if max_delay >= len {
            return Err(Error::Input(format!(
                "maximum delay {max_delay} must be smaller than the window length {len}"
            )));
        }
        Ok(Self {
            as_of,
            len,
            max_delay,
        })
    }

    pub fn as_of(&self) -> NaiveDate {
        self.as_of
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn max_delay(&self) -> usize {
        self.max_delay
    }

    pub fn start(&self) -> NaiveDate {
        self.as_of - Duration::days(self.len as i64 - 1)
    }

    pub fn date(&self, t: usize) -> NaiveDate {
        self.start() + Duration::days(t as i64)
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        (0..self.len).map(|t| self.date(t)).collect()
    }

    /// Day index of `date`, if it falls inside the window.
    pub fn day_index(&self, date: NaiveDate) -> Option<usize> {
        let offset = (date - self.start()).num_days();
        (0..self.len as i64).contains(&offset).then_some(offset as usize)
    }

    pub fn is_observed(&self, t: usize, d: usize) -> bool {
        t + d < self.len
    }
}

/// Counts `Z[i][t][d]` of cases by county, onset day and reporting delay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportingTriangle {
    n_counties: usize,
    window: AnalysisWindow,
    counts: Vec<u64>,
    /// In-window records whose delay exceeds the maximum delay.
    pub dropped_late: u64,
    /// In-window records reported after the as-of date.
    pub reported_after_as_of: u64,
}

impl ReportingTriangle {
    pub fn zeros(n_counties: usize, window: AnalysisWindow) -> Self {
        Self {
            n_counties,
            window,
            counts: vec![0; n_counties * window.len() * (window.max_delay() + 1)],
            dropped_late: 0,
            reported_after_as_of: 0,
        }
    }

    /// Builds a triangle from a dense `N x T x (D+1)` array; cells outside the
    /// observed region must be zero.
    pub fn from_counts(n_counties: usize, window: AnalysisWindow, counts: Vec<u64>) -> Result<Self> {
        let mut tri = Self::zeros(n_counties, window);
        if counts.len() != tri.counts.len() {
            return Err(Error::LengthMismatch(counts.len(), tri.counts.len()));
        }
        tri.counts = counts;
        for i in 0..n_counties {
            for t in 0..window.len() {
                for d in 0..=window.max_delay() {
                    if !window.is_observed(t, d) && tri.get(i, t, d) != 0 {
                        return Err(Error::Input(format!(
                            "count at county {i}, day {t}, delay {d} lies beyond the as-of date"
                        )));
                    }
                }
            }
        }
        Ok(tri)
    }

    #[inline]
    fn idx(&self, i: usize, t: usize, d: usize) -> usize {
        (i * self.window.len() + t) * (self.window.max_delay() + 1) + d
    }

    #[inline]
    pub fn get(&self, i: usize, t: usize, d: usize) -> u64 {
        self.counts[self.idx(i, t, d)]
    }

    fn add(&mut self, i: usize, t: usize, d: usize, n: u64) {
        let k = self.idx(i, t, d);
        self.counts[k] += n;
    }

    pub fn n_counties(&self) -> usize {
        self.n_counties
    }

    pub fn window(&self) -> &AnalysisWindow {
        &self.window
    }

    pub fn n_days(&self) -> usize {
        self.window.len()
    }

    pub fn max_delay(&self) -> usize {
        self.window.max_delay()
    }

    pub fn is_observed(&self, t: usize, d: usize) -> bool {
        self.window.is_observed(t, d)
    }

    /// Every onset day is fully reported once `t + D` is on or before the as-of day.
    pub fn is_complete(&self, t: usize) -> bool {
        t + self.max_delay() < self.n_days()
    }

    pub fn onset_dates(&self) -> Vec<NaiveDate> {
        self.window.dates()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `S[i][t]`: cases reported so far for each county and onset day.
    pub fn partial_totals(&self) -> CountMatrix {
        let (n, len, width) = (self.n_counties, self.n_days(), self.max_delay() + 1);
        let mut out = CountMatrix::zeros(n, len);
        for i in 0..n {
            for t in 0..len {
                let start = self.idx(i, t, 0);
                let observed = width.min(len - t);
                out.set(i, t, self.counts[start..start + observed].iter().sum());
            }
        }
        out
    }

    /// Daily onset series for county `i` as seen on the as-of date.
    pub fn onset_series(&self, i: usize) -> Vec<f64> {
        let s = self.partial_totals();
        s.row(i).iter().map(|&v| v as f64).collect()
    }
}

/// Row-major integer matrix, county by day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl CountMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<u64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch(data.len(), rows * cols));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, t: usize) -> u64 {
        self.data[i * self.cols + t]
    }

    #[inline]
    pub fn set(&mut self, i: usize, t: usize, v: u64) {
        self.data[i * self.cols + t] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.data
    }
}

/// Builds the reporting triangle for `window` from a line list.
///
/// Records with onset outside the window are ignored. In-window records with
/// a delay above the maximum are counted in `dropped_late`; records reported
/// after the as-of date are counted in `reported_after_as_of`.
pub fn build_triangle(
    records: &[LineListRecord],
    window: &AnalysisWindow,
    counties: &CountyGraph,
) -> Result<ReportingTriangle> {
    let mut tri = ReportingTriangle::zeros(counties.len(), *window);
    for (row, rec) in records.iter().enumerate() {
        let i = counties
            .index_of(&rec.county_id)
            .ok_or_else(|| Error::UnknownCounty(rec.county_id.clone()))?;
        let delay = rec.delay();
        if delay < 0 {
            return Err(Error::NegativeDelay {
                row,
                county: rec.county_id.clone(),
                onset: rec.onset_date,
                report: rec.report_date,
            });
        }
        let Some(t) = window.day_index(rec.onset_date) else {
            continue;
        };
        let d = delay as usize;
        if d > window.max_delay() {
            tri.dropped_late += 1;
        } else if !window.is_observed(t, d) {
            tri.reported_after_as_of += 1;
        } else {
            tri.add(i, t, d, 1);
        }
    }
    Ok(tri)
}

/// One row of the aggregate triangle input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub county_id: String,
    pub onset_date: NaiveDate,
    pub delay: i64,
    pub count: u64,
}

/// Same bookkeeping as [`build_triangle`] for pre-aggregated counts.
pub fn build_triangle_from_aggregates(
    rows: &[AggregateRecord],
    window: &AnalysisWindow,
    counties: &CountyGraph,
) -> Result<ReportingTriangle> {
    let mut tri = ReportingTriangle::zeros(counties.len(), *window);
    for (row, rec) in rows.iter().enumerate() {
        let i = counties
            .index_of(&rec.county_id)
            .ok_or_else(|| Error::UnknownCounty(rec.county_id.clone()))?;
        if rec.delay < 0 {
            return Err(Error::NegativeDelay {
                row,
                county: rec.county_id.clone(),
                onset: rec.onset_date,
                report: rec.onset_date + Duration::days(rec.delay),
            });
        }
        let Some(t) = window.day_index(rec.onset_date) else {
            continue;
        };
        let d = rec.delay as usize;
        if d > window.max_delay() {
            tri.dropped_late += rec.count;
        } else if !window.is_observed(t, d) {
            tri.reported_after_as_of += rec.count;
        } else {
            tri.add(i, t, d, rec.count);
        }
    }
    Ok(tri)
}

/// Counties with populations and a symmetric 0/1 adjacency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountyGraph {
    ids: Vec<String>,
    population: Vec<u64>,
    offsets: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl CountyGraph {
    /// Builds the graph from a population table and an undirected edge list.
    ///
    /// Duplicate edges (in either orientation) are merged. Self loops, zero
    /// populations, duplicated counties and isolated counties are rejected.
    pub fn new(populations: &[(String, u64)], edges: &[(String, String)]) -> Result<Self> {
        let mut index = HashMap::with_capacity(populations.len());
        for (k, (id, pop)) in populations.iter().enumerate() {
            if *pop == 0 {
                return Err(Error::Graph(format!("county `{id}` has zero population")));
            }
            if index.insert(id.clone(), k).is_some() {
                return Err(Error::Graph(format!("county `{id}` listed twice")));
            }
        }
        let n = populations.len();
        let mut sets = vec![BTreeSet::new(); n];
        for (a, b) in edges {
            let ia = *index.get(a).ok_or_else(|| Error::UnknownCounty(a.clone()))?;
            let ib = *index.get(b).ok_or_else(|| Error::UnknownCounty(b.clone()))?;
            if ia == ib {
                return Err(Error::Graph(format!("self-adjacency for county `{a}`")));
            }
            sets[ia].insert(ib);
            sets[ib].insert(ia);
        }
        if let Some(k) = sets.iter().position(|s| s.is_empty()) {
            return Err(Error::Graph(format!(
                "county `{}` has no neighbours",
                populations[k].0
            )));
        }
        Ok(Self {
            ids: populations.iter().map(|(id, _)| id.clone()).collect(),
            population: populations.iter().map(|(_, p)| *p).collect(),
            offsets: populations.iter().map(|(_, p)| (*p as f64).ln()).collect(),
            neighbors: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
            index,
        })
    }

    /// Rook-adjacency lattice with counties named `r{row}c{col}`.
    pub fn rook_grid(rows: usize, cols: usize, population: impl Fn(usize) -> u64) -> Result<Self> {
        let id = |r: usize, c: usize| format!("r{r}c{c}");
        let pops: Vec<_> = (0..rows * cols)
            .map(|k| (id(k / cols, k % cols), population(k)))
            .collect();
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push((id(r, c), id(r, c + 1)));
                }
                if r + 1 < rows {
                    edges.push((id(r, c), id(r + 1, c)));
                }
            }
        }
        Self::new(&pops, &edges)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        if self.index.is_empty() && !self.ids.is_empty() {
            return self.ids.iter().position(|x| x == id);
        }
        self.index.get(id).copied()
    }

    pub fn population(&self, i: usize) -> u64 {
        self.population[i]
    }

    /// `O_i = ln(population_i)`.
    pub fn offset(&self, i: usize) -> f64 {
        self.offsets[i]
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn neighbor_lists(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    /// `w_i+`.
    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Undirected edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, nb) in self.neighbors.iter().enumerate() {
            out.extend(nb.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// Graph Laplacian `diag(w_i+) - W`.
    pub fn laplacian(&self) -> nalgebra::DMatrix<f64> {
        let n = self.len();
        let mut q = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            q[(i, i)] = self.degree(i) as f64;
            for &j in &self.neighbors[i] {
                q[(i, j)] = -1.0;
            }
        }
        q
    }
}

/// Weekday level with Monday = 0 through Sunday = 6.
pub fn weekday_level(date: NaiveDate) -> u8 {
    date.weekday().num_days_from_monday() as u8
}

/// Sum-to-zero effect coding of a weekday level: the first six levels map to
/// unit vectors and Sunday maps to all minus ones.
pub fn effect_coding(level: u8) -> [f64; 6] {
    let mut row = [0.0; 6];
    if level < 6 {
        row[level as usize] = 1.0;
    } else {
        row = [-1.0; 6];
    }
    row
}

/// `x · effects` for an effect-coded weekday, without materialising the row.
#[inline]
pub fn coded_dot(level: u8, effects: &[f64]) -> f64 {
    if level < 6 {
        effects[level as usize]
    } else {
        -effects[..6].iter().sum::<f64>()
    }
}

/// Onset-day design rows `X_t` for every day in the window.
pub fn day_of_week_design(window: &AnalysisWindow) -> Vec<[f64; 6]> {
    window
        .dates()
        .into_iter()
        .map(|d| effect_coding(weekday_level(d)))
        .collect()
}

/// Weekday levels for the onset day (`onset[t]`) and report day
/// (`report(t, d)`, the weekday of `t + d`) of every triangle cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeekdayLevels {
    levels: Vec<u8>,
    n_days: usize,
}

impl WeekdayLevels {
    pub fn new(start: NaiveDate, n_days: usize, max_delay: usize) -> Self {
        Self {
            levels: (0..n_days + max_delay)
                .map(|k| weekday_level(start + Duration::days(k as i64)))
                .collect(),
            n_days,
        }
    }

    pub fn for_window(window: &AnalysisWindow) -> Self {
        Self::new(window.start(), window.len(), window.max_delay())
    }

    #[inline]
    pub fn onset(&self, t: usize) -> u8 {
        self.levels[t]
    }

    #[inline]
    pub fn report(&self, t: usize, d: usize) -> u8 {
        self.levels[t + d]
    }

    pub fn n_days(&self) -> usize {
        self.n_days
    }
}

// --- CSV input / output ----------------------------------------------------

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))
}

/// Reads `county_id,onset_date,report_date`.
pub fn read_line_list(path: &Path) -> Result<Vec<LineListRecord>> {
    let mut rdr = open_reader(path)?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| Error::csv(path, e)))
        .collect()
}

pub fn write_line_list(path: &Path, records: &[LineListRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for r in records {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads `county_id,onset_date,delay,count`.
pub fn read_aggregates(path: &Path) -> Result<Vec<AggregateRecord>> {
    let mut rdr = open_reader(path)?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| Error::csv(path, e)))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct PopulationRow {
    county_id: String,
    population: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    county_a: String,
    county_b: String,
}

/// Loads `county_id,population` and `county_a,county_b` tables.
pub fn load_graph(population_path: &Path, edge_path: &Path) -> Result<CountyGraph> {
    let mut rdr = open_reader(population_path)?;
    let pops = rdr
        .deserialize::<PopulationRow>()
        .map(|r| {
            r.map(|p| (p.county_id, p.population))
                .map_err(|e| Error::csv(population_path, e))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rdr = open_reader(edge_path)?;
    let edges = rdr
        .deserialize::<EdgeRow>()
        .map(|r| r.map(|e| (e.county_a, e.county_b)).map_err(|e| Error::csv(edge_path, e)))
        .collect::<Result<Vec<_>>>()?;
    CountyGraph::new(&pops, &edges)
}

pub fn write_graph(graph: &CountyGraph, population_path: &Path, edge_path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(population_path).map_err(|e| Error::csv(population_path, e))?;
    for (i, id) in graph.ids().iter().enumerate() {
        w.serialize(PopulationRow {
            county_id: id.clone(),
            population: graph.population(i),
        })
        .map_err(|e| Error::csv(population_path, e))?;
    }
    w.flush().map_err(|e| Error::io(population_path, e))?;
    let mut w = csv::Writer::from_path(edge_path).map_err(|e| Error::csv(edge_path, e))?;
    for (i, j) in graph.edges() {
        w.serialize(EdgeRow {
            county_a: graph.ids()[i].clone(),
            county_b: graph.ids()[j].clone(),
        })
        .map_err(|e| Error::csv(edge_path, e))?;
    }
    w.flush().map_err(|e| Error::io(edge_path, e))
}
