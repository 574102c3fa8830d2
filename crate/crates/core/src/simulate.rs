//! Forward simulation from the generative model.
//!
//! Global quantities (hyperparameters, the spatial field) come from a stream
//! keyed by the seed; everything indexed by county comes from a stream keyed
//! by `(seed, county_id)`. Relabeling or reordering counties therefore
//! permutes the output without changing it.

use std::path::Path;

use chrono::{Duration, NaiveDate};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{coded_dot, AnalysisWindow, CountyGraph, LineListRecord, ReportingTriangle, WeekdayLevels};
use crate::error::{Error, Result};
use crate::model::special::expit;
use crate::model::{Dims, HyperPriorSpec, ModelState, N_EFFECTS};

/// Hyperparameters held fixed instead of drawn from the prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedParameters {
    pub delta_bar: f64,
    pub tau2_alpha: f64,
    pub tau2_delta: f64,
    pub tau2_d: f64,
    pub tau2_eta: f64,
    pub tau2_psi: f64,
    pub tau2_xi: f64,
    pub rho_delta: f64,
    pub rho_psi: f64,
    pub eta_bar: [f64; N_EFFECTS],
    pub xi_bar: [f64; N_EFFECTS],
    /// Delay intercepts `beta_d`, `d = 0..D`.
    pub beta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Initial level `alpha_i1` for every county; drawn from its prior if absent.
    pub initial_level: Option<f64>,
    /// Spatial field; drawn from the intrinsic CAR if absent.
    pub spatial: Option<Vec<f64>>,
}

impl FixedParameters {
    /// Moderate defaults: a flat trend, mild weekday effects and a delay
    /// distribution with roughly a quarter of cases reported per day.
    pub fn typical(max_delay: usize) -> Self {
        Self {
            delta_bar: 0.0,
            tau2_alpha: 0.005,
            tau2_delta: 1e-4,
            tau2_d: 1e-4,
            tau2_eta: 0.01,
            tau2_psi: 0.05,
            tau2_xi: 0.01,
            rho_delta: 0.8,
            rho_psi: 0.5,
            eta_bar: [0.05, 0.1, 0.05, 0.0, -0.05, 0.05],
            xi_bar: [0.1, 0.1, 0.05, 0.05, 0.0, -0.2],
            beta: vec![-1.0; max_delay],
            phi: vec![50.0; max_delay],
            initial_level: Some((5e-4f64).ln()),
            spatial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ParameterSource {
    Prior,
    Fixed(FixedParameters),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_days: usize,
    pub max_delay: usize,
    /// Last onset day of the simulated window.
    pub as_of: NaiveDate,
    pub seed: u64,
    pub parameters: ParameterSource,
    /// Prior constants; also supplies the bound on `|ln lambda|`.
    pub priors: HyperPriorSpec,
    /// Replaces the simulated `delta[i][t]` (county-major, `N * T` values).
    pub trend_override: Option<Vec<f64>>,
    /// Redraws allowed when a draw leaves the rate bound.
    pub max_attempts: usize,
}

impl SimulationConfig {
    pub fn new(n_days: usize, max_delay: usize, as_of: NaiveDate, seed: u64) -> Self {
        Self {
            n_days,
            max_delay,
            as_of,
            seed,
            parameters: ParameterSource::Fixed(FixedParameters::typical(max_delay)),
            priors: HyperPriorSpec::default(),
            trend_override: None,
            max_attempts: 10_000,
        }
    }

    pub fn window(&self) -> Result<AnalysisWindow> {
        AnalysisWindow::unchecked_len(self.as_of, self.n_days, self.max_delay)
    }
}

/// A simulated dataset with its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub window: AnalysisWindow,
    pub county_ids: Vec<String>,
    /// Every report `Z[i][t][d]`, including those after the as-of date.
    pub full_counts: Vec<u64>,
    /// Every latent quantity; `truth.y` holds the true totals.
    pub truth: ModelState,
    /// Draws rejected for leaving the rate bound before this one.
    pub rejected: usize,
}

impl Simulation {
    pub fn dims(&self) -> Dims {
        self.truth.dims
    }

    #[inline]
    pub fn z(&self, i: usize, t: usize, d: usize) -> u64 {
        let dims = self.dims();
        self.full_counts[(i * dims.t + t) * (dims.d + 1) + d]
    }

    /// True totals `Y[i][t]`.
    pub fn true_totals(&self, i: usize) -> &[u64] {
        let t = self.dims().t;
        &self.truth.y[i * t..(i + 1) * t]
    }

    /// The triangle observed on the as-of date.
    pub fn observed_triangle(&self) -> Result<ReportingTriangle> {
        let mut counts = self.full_counts.clone();
        let Dims { n, t: len, d: max_d } = self.dims();
        for i in 0..n {
            for t in 0..len {
                for d in 0..=max_d {
                    if !self.window.is_observed(t, d) {
                        counts[(i * len + t) * (max_d + 1) + d] = 0;
                    }
                }
            }
        }
        ReportingTriangle::from_counts(n, self.window, counts)
    }

    /// One record per case, ordered by county, onset and delay.
    pub fn line_list(&self) -> Result<Vec<LineListRecord>> {
        const MAX_RECORDS: u64 = 50_000_000;
        let total: u64 = self.full_counts.iter().sum();
        if total > MAX_RECORDS {
            return Err(Error::Input(format!(
                "{total} simulated cases is too many for a line list"
            )));
        }
        let Dims { n, t: len, d: max_d } = self.dims();
        let mut out = Vec::with_capacity(total as usize);
        for i in 0..n {
            for t in 0..len {
                let onset = self.window.date(t);
                for d in 0..=max_d {
                    let rec = LineListRecord::new(self.county_ids[i].clone(), onset, onset + Duration::days(d as i64));
                    out.extend(std::iter::repeat_n(rec, self.z(i, t, d) as usize));
                }
            }
        }
        Ok(out)
    }

    /// `county_id,date,count` with the true totals.
    pub fn write_truth_counts(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(["county_id", "date", "count"]).map_err(|e| Error::csv(path, e))?;
        for (i, id) in self.county_ids.iter().enumerate() {
            for (t, y) in self.true_totals(i).iter().enumerate() {
                w.write_record([id.clone(), self.window.date(t).to_string(), y.to_string()])
                    .map_err(|e| Error::csv(path, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// True totals keyed by county and date.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRow {
    pub county_id: String,
    pub date: NaiveDate,
    pub count: u64,
}

pub fn read_truth_counts(path: &Path) -> Result<Vec<TruthRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    rdr.deserialize().map(|r| r.map_err(|e| Error::csv(path, e))).collect()
}

/// Drops records reported after `as_of`.
pub fn censor(records: &[LineListRecord], as_of: NaiveDate) -> Vec<LineListRecord> {
    records.iter().filter(|r| r.report_date <= as_of).cloned().collect()
}

fn county_rng(seed: u64, county_id: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(county_id.as_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

#[inline]
fn normal<R: Rng + ?Sized>(mean: f64, var: f64, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    mean + var.sqrt() * z
}

/// `ln G` for `G ~ Gamma(shape, 1)`, accurate for tiny shapes.
fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g: f64 = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
        g.ln()
    } else {
        let g: f64 = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
        let u: f64 = rng.random::<f64>();
        g.ln() + (1.0 - u).ln() / shape
    }
}

/// `Beta(a, b)` as a ratio of gammas, computed on the log scale.
fn beta_variate<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let x = ln_gamma_variate(a, rng);
    let y = ln_gamma_variate(b, rng);
    expit(x - y)
}

fn inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    let g: f64 = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
    scale / g
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("finite mean").sample(rng) as u64
    }
}

/// Zero-mean intrinsic CAR draw with precision `L / tau2`: `z` is mapped
/// through the symmetric square root of the Laplacian pseudo-inverse.
/// Counties are processed in id order so the result does not depend on
/// the order of the graph.
pub fn icar_draw(graph: &CountyGraph, tau2: f64, z: &[f64]) -> Vec<f64> {
    let n = graph.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| graph.ids()[a].cmp(&graph.ids()[b]));
    let mut rank = vec![0; n];
    for (r, &k) in order.iter().enumerate() {
        rank[k] = r;
    }
    let mut lap = DMatrix::zeros(n, n);
    for (r, &k) in order.iter().enumerate() {
        lap[(r, r)] = graph.degree(k) as f64;
        for &j in graph.neighbors(k) {
            lap[(r, rank[j])] = -1.0;
        }
    }
    let eig = SymmetricEigen::new(lap);
    let tol = 1e-9 * eig.eigenvalues.amax().max(1.0);
    let mut root = DMatrix::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > tol {
            let v = eig.eigenvectors.column(k);
            root += (v * v.transpose()) / lambda.sqrt();
        }
    }
    let zs = nalgebra::DVector::from_iterator(n, order.iter().map(|&k| z[k]));
    let sorted = root * zs * tau2.sqrt();
    let mut d = vec![0.0; n];
    for (r, &k) in order.iter().enumerate() {
        d[k] = sorted[r];
    }
    let mean = d.iter().sum::<f64>() / n as f64;
    d.iter_mut().for_each(|v| *v -= mean);
    d
}

fn draw_hyperparameters(config: &SimulationConfig, rng: &mut ChaCha8Rng) -> FixedParameters {
    match &config.parameters {
        ParameterSource::Fixed(p) => p.clone(),
        ParameterSource::Prior => {
            let pr = &config.priors;
            let mut ig = || inverse_gamma(pr.ig_shape, pr.ig_scale, rng);
            let (tau2_alpha, tau2_delta, tau2_d, tau2_eta, tau2_psi, tau2_xi) = (ig(), ig(), ig(), ig(), ig(), ig());
            let delta_bar = normal(0.0, pr.effect_var, rng);
            let mut eta_bar = [0.0; N_EFFECTS];
            let mut xi_bar = [0.0; N_EFFECTS];
            for k in 0..N_EFFECTS {
                eta_bar[k] = normal(0.0, pr.effect_var, rng);
                xi_bar[k] = normal(0.0, pr.effect_var, rng);
            }
            let beta = (0..config.max_delay).map(|_| normal(0.0, pr.beta_var, rng)).collect();
            let phi_dist = Gamma::new(pr.phi_shape, 1.0 / pr.phi_rate).expect("valid gamma prior");
            let phi = (0..config.max_delay).map(|_| phi_dist.sample(rng)).collect();
            let rho_delta = rng.random_range(-1.0..1.0);
            let rho_psi = rng.random_range(-1.0..1.0);
            FixedParameters {
                delta_bar,
                tau2_alpha,
                tau2_delta,
                tau2_d,
                tau2_eta,
                tau2_psi,
                tau2_xi,
                rho_delta,
                rho_psi,
                eta_bar,
                xi_bar,
                beta,
                phi,
                initial_level: None,
                spatial: None,
            }
        }
    }
}

/// One forward pass. Returns `None` when some rate leaves the bound.
fn attempt(
    config: &SimulationConfig,
    graph: &CountyGraph,
    global: &mut ChaCha8Rng,
    counties: &mut [ChaCha8Rng],
) -> Result<Option<(ModelState, Vec<u64>)>> {
    let dims = Dims {
        n: graph.len(),
        t: config.n_days,
        d: config.max_delay,
    };
    let Dims { n, t: len, d: max_d } = dims;
    let window = config.window()?;
    let weekdays = WeekdayLevels::for_window(&window);
    let p = draw_hyperparameters(config, global);
    if p.beta.len() != max_d || p.phi.len() != max_d {
        return Err(Error::Input(format!("expected {max_d} delay intercepts and dispersions")));
    }

    let mut s = ModelState::zeros(dims);
    s.delta_bar = p.delta_bar;
    s.tau2_alpha = p.tau2_alpha;
    s.tau2_delta = p.tau2_delta;
    s.tau2_d = p.tau2_d;
    s.tau2_eta = p.tau2_eta;
    s.tau2_psi = p.tau2_psi;
    s.tau2_xi = p.tau2_xi;
    s.rho_delta = p.rho_delta;
    s.rho_psi = p.rho_psi;
    s.eta_bar = p.eta_bar;
    s.xi_bar = p.xi_bar;
    s.beta.clone_from(&p.beta);
    s.phi.clone_from(&p.phi);

    // The spatial field draws one standard normal per county from that county's stream.
    let z: Vec<f64> = counties.iter_mut().map(|r| StandardNormal.sample(r)).collect();
    s.d = match &p.spatial {
        Some(d) if d.len() == n => d.clone(),
        Some(d) => return Err(Error::LengthMismatch(d.len(), n)),
        None => icar_draw(graph, p.tau2_d, &z),
    };
    if let Some(o) = &config.trend_override {
        if o.len() != n * len {
            return Err(Error::LengthMismatch(o.len(), n * len));
        }
    }

    let mut counts = vec![0u64; n * len * (max_d + 1)];
    let mut in_bound = true;
    for i in 0..n {
        let rng = &mut counties[i];
        for k in 0..N_EFFECTS {
            s.eta[i * N_EFFECTS + k] = normal(s.eta_bar[k], s.tau2_eta, rng);
            s.xi[i * N_EFFECTS + k] = normal(s.xi_bar[k], s.tau2_xi, rng);
        }
        let center = s.delta_bar + s.d[i];
        for t in 0..len {
            let k = dims.it(i, t);
            let mean = if t == 0 {
                center
            } else {
                center + s.rho_delta * (s.delta[k - 1] - center)
            };
            s.delta[k] = normal(mean, s.tau2_delta, rng);
            if let Some(o) = &config.trend_override {
                s.delta[k] = o[k];
            }
        }
        for t in 0..len {
            let k = dims.it(i, t);
            s.alpha[k] = if t == 0 {
                match p.initial_level {
                    Some(a) => a,
                    None => normal(0.0, config.priors.alpha_init_var, rng),
                }
            } else {
                normal(s.alpha[k - 1] + s.delta[k - 1], s.tau2_alpha, rng)
            };
        }
        let mu = |s: &ModelState, t: usize, d: usize| s.beta[d] + coded_dot(weekdays.report(t, d), s.xi_i(i));
        for t in 0..len {
            for d in 0..max_d {
                let mean = if t == 0 {
                    mu(&s, t, d)
                } else {
                    mu(&s, t, d) + s.rho_psi * (s.psi[dims.itd(i, t - 1, d)] - mu(&s, t - 1, d))
                };
                s.psi[dims.itd(i, t, d)] = normal(mean, s.tau2_psi, rng);
            }
        }
        let bound = config.priors.log_rate_bound;
        // Each county's stream use depends only on that county.
        let county_ok = (0..len).all(|t| {
            let lr = graph.offset(i) + s.alpha[dims.it(i, t)] + coded_dot(weekdays.onset(t), s.eta_i(i));
            lr.abs() < bound
        });
        if county_ok {
            draw_county_reports(i, &mut s, graph.offset(i), &weekdays, &mut counts, rng);
        }
        in_bound &= county_ok;
    }
    Ok(in_bound.then_some((s, counts)))
}

/// Draws `Y[i][t] ~ Poisson(lambda)` into `state.y` and splits each total
/// over delays `0..=D` by sequential beta-binomial draws into `counts`.
fn draw_county_reports<R: Rng + ?Sized>(
    i: usize,
    state: &mut ModelState,
    offset: f64,
    weekdays: &WeekdayLevels,
    counts: &mut [u64],
    rng: &mut R,
) {
    let dims = state.dims;
    let stride = dims.d + 1;
    for t in 0..dims.t {
        let k = dims.it(i, t);
        let log_rate = offset + state.alpha[k] + coded_dot(weekdays.onset(t), state.eta_i(i));
        let y = poisson(log_rate.exp(), rng);
        state.y[k] = y;
        let mut remaining = y;
        for d in 0..dims.d {
            let psi = state.psi[dims.itd(i, t, d)];
            let phi = state.phi[d];
            let nu = beta_variate(phi * expit(psi), phi * expit(-psi), rng);
            let z = if remaining == 0 {
                0
            } else {
                Binomial::new(remaining, nu.clamp(0.0, 1.0)).expect("valid binomial").sample(rng)
            };
            counts[k * stride + d] = z;
            remaining -= z;
        }
        counts[k * stride + dims.d] = remaining;
    }
}

/// Redraws the totals `state.y` and every report given the rest of the
/// state. Returns the full counts `Z[i][t][d]`.
pub fn redraw_reports<R: Rng + ?Sized>(
    state: &mut ModelState,
    offsets: &[f64],
    weekdays: &WeekdayLevels,
    rng: &mut R,
) -> Vec<u64> {
    let dims = state.dims;
    let mut counts = vec![0; dims.n * dims.t * (dims.d + 1)];
    for (i, &offset) in offsets.iter().enumerate().take(dims.n) {
        draw_county_reports(i, state, offset, weekdays, &mut counts, rng);
    }
    counts
}

/// Draws a dataset and its ground truth.
///
/// Draws with some `|ln lambda|` at or above the bound have zero density
/// under the model and are redrawn, up to `max_attempts` times.
pub fn simulate(config: &SimulationConfig, graph: &CountyGraph) -> Result<Simulation> {
    let window = config.window()?;
    let mut global = ChaCha8Rng::seed_from_u64(config.seed);
    let mut counties: Vec<ChaCha8Rng> = graph.ids().iter().map(|id| county_rng(config.seed, id)).collect();
    for rejected in 0..config.max_attempts.max(1) {
        if let Some((truth, full_counts)) = attempt(config, graph, &mut global, &mut counties)? {
            return Ok(Simulation {
                window,
                county_ids: graph.ids().to_vec(),
                full_counts,
                truth,
                rejected,
            });
        }
    }
    Err(Error::Numerical(format!(
        "no draw within the rate bound after {} attempts",
        config.max_attempts
    )))
}
