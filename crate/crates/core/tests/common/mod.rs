//! Reference implementations written independently of the library, plus
//! small fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use nalgebra::{DMatrix, DVector};
use nowcast::data::{AnalysisWindow, CountyGraph, ReportingTriangle};
use nowcast::model::{Dims, ModelData, ModelState, VarianceComponent};
use rand::Rng;

/// Deterministic property-test settings: a fixed seed and no regression files.
pub fn proptest_config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        failure_persistence: None,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed),
        ..Default::default()
    }
}

pub fn as_of() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 9, 15).unwrap()
}

// --- indicators ------------------------------------------------------------

/// Mean of the seven values ending at `end`, summed by hand.
fn week_mean(series: &[f64], end: usize) -> f64 {
    let mut total = 0.0;
    for k in 0..7 {
        total += series[end - k];
    }
    total / 7.0
}

/// Five consecutive strict rises of the 7-day average inside the last 21
/// days. A window day only counts as a rise when the day before it has a
/// full week of data.
pub fn brute_rolling_flag(series: &[f64]) -> bool {
    let len = series.len();
    let first = len - 21;
    let rises = |day: usize| day >= 7 && week_mean(series, day) > week_mean(series, day - 1);
    (first..=len - 5).any(|start| (start..start + 5).all(rises))
}

/// Some block of `run` consecutive values, each strictly above its
/// predecessor, where the predecessor of the first value is `prior`.
pub fn brute_run_flag(values: &[f64], prior: f64, run: usize) -> bool {
    if run == 0 {
        return true;
    }
    let prev = |k: usize| if k == 0 { prior } else { values[k - 1] };
    if values.len() < run {
        return false;
    }
    (0..=values.len() - run).any(|s| (s..s + run).all(|k| values[k] > prev(k)))
}

/// Least-squares cubic spline fit in the truncated power basis
/// `1, u, u^2, u^3, (u - k)^3_+` on `u in [-1, 1]`, solved through the
/// pseudo-inverse of the normal equations with one refinement step. Columns are scaled to unit norm
/// first so the normal equations stay well conditioned.
pub fn truncated_power_fit(y: &[f64], interior: usize) -> Vec<f64> {
    let n = y.len();
    let u: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 / (n - 1) as f64 - 1.0).collect();
    let knots: Vec<f64> = (1..=interior).map(|j| -1.0 + 2.0 * j as f64 / (interior + 1) as f64).collect();
    let p = 4 + interior;
    let mut x = DMatrix::from_fn(n, p, |r, c| match c {
        0..=3 => u[r].powi(c as i32),
        _ => (u[r] - knots[c - 4]).max(0.0).powi(3),
    });
    for mut col in x.column_iter_mut() {
        let norm = col.norm();
        col /= norm;
    }
    let y = DVector::from_column_slice(y);
    let pinv = (x.transpose() * &x).pseudo_inverse(1e-13).unwrap();
    let mut coef = &pinv * (x.transpose() * &y);
    // One step of iterative refinement on the residual.
    coef += &pinv * (x.transpose() * (&y - &x * &coef));
    (x * coef).iter().copied().collect()
}

// --- model -------------------------------------------------------------------

/// Raw inputs of the joint density, kept apart from the library's data view.
#[derive(Debug, Clone)]
pub struct RawData {
    pub n: usize,
    pub t: usize,
    pub d: usize,
    /// `z[(i * t + s) * (d + 1) + k]`, zero where unobserved.
    pub z: Vec<u64>,
    pub population: Vec<f64>,
    pub edges: Vec<(usize, usize)>,
    pub first_day: NaiveDate,
    pub drop_last_day: bool,
}

/// Sum-to-zero weekday coding with Monday first and Sunday as `-1`s.
pub fn weekday_row(date: NaiveDate) -> [f64; 6] {
    let order = [Weekday::Mon, Weekday::Tue, Weekday::Wed, Weekday::Thu, Weekday::Fri, Weekday::Sat];
    let mut row = [0.0; 6];
    match order.iter().position(|&w| w == date.weekday()) {
        Some(k) => row[k] = 1.0,
        None => row = [-1.0; 6],
    }
    row
}

fn dot6(a: &[f64; 6], b: &[f64]) -> f64 {
    (0..6).map(|k| a[k] * b[k]).sum()
}

fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn normal_lpdf(x: f64, m: f64, v: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - m) * (x - m) / (2.0 * v)
}

fn log_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Beta-binomial pmf from rising-factorial products.
pub fn beta_binomial_lpmf(k: u64, n: u64, a: f64, b: f64) -> f64 {
    let mut v = log_factorial(n) - log_factorial(k) - log_factorial(n - k);
    for j in 0..k {
        v += (a + j as f64).ln();
    }
    for j in 0..n - k {
        v += (b + j as f64).ln();
    }
    for j in 0..n {
        v -= (a + b + j as f64).ln();
    }
    v
}

/// Joint log-density evaluated term by term from the model definition.
pub fn straight_line_log_joint(s: &ModelState, raw: &RawData) -> f64 {
    let (n, len, dmax) = (raw.n, raw.t, raw.d);
    let it = |i: usize, t: usize| i * len + t;
    let itd = |i: usize, t: usize, d: usize| (i * len + t) * dmax + d;
    let z = |i: usize, t: usize, d: usize| raw.z[(i * len + t) * (dmax + 1) + d];
    let day = |k: usize| weekday_row(raw.first_day + Duration::days(k as i64));
    let eta = |i: usize| &s.eta[i * 6..i * 6 + 6];
    let xi = |i: usize| &s.xi[i * 6..i * 6 + 6];
    let ln_gamma_half = 0.5 * std::f64::consts::PI.ln();
    let mut total = 0.0;

    for i in 0..n {
        for t in 0..len {
            // Counts.
            let lr = raw.population[i].ln() + s.alpha[it(i, t)] + dot6(&day(t), eta(i));
            if lr.abs() >= 50.0 {
                return f64::NEG_INFINITY;
            }
            let y = s.y[it(i, t)];
            total += y as f64 * lr - lr.exp() - log_factorial(y);

            // Reports.
            let forced = raw.drop_last_day && t == len - 1;
            if !forced {
                let complete = t + dmax < len;
                let last = if complete { dmax - 1 } else { len - 1 - t };
                let mut remaining = y;
                for d in 0..=last {
                    let k = z(i, t, d);
                    if k > remaining {
                        return f64::NEG_INFINITY;
                    }
                    let psi = s.psi[itd(i, t, d)];
                    let phi = s.phi[d];
                    total += beta_binomial_lpmf(k, remaining, phi * expit(psi), phi * expit(-psi));
                    remaining -= k;
                }
                if complete && remaining != z(i, t, dmax) {
                    return f64::NEG_INFINITY;
                }
            }

            // Level and trend.
            if t == 0 {
                total += normal_lpdf(s.alpha[it(i, 0)], 0.0, 100.0);
            } else {
                let m = s.alpha[it(i, t - 1)] + s.delta[it(i, t - 1)];
                total += normal_lpdf(s.alpha[it(i, t)], m, s.tau2_alpha);
            }
            let c = s.delta_bar + s.d[i];
            let m = if t == 0 { c } else { c + s.rho_delta * (s.delta[it(i, t - 1)] - c) };
            total += normal_lpdf(s.delta[it(i, t)], m, s.tau2_delta);

            // Reporting hazards.
            for d in 0..dmax {
                let mu = |tt: usize| s.beta[d] + dot6(&day(tt + d), xi(i));
                let m = if t == 0 {
                    mu(0)
                } else {
                    mu(t) + s.rho_psi * (s.psi[itd(i, t - 1, d)] - mu(t - 1))
                };
                total += normal_lpdf(s.psi[itd(i, t, d)], m, s.tau2_psi);
            }
        }
        for k in 0..6 {
            total += normal_lpdf(eta(i)[k], s.eta_bar[k], s.tau2_eta);
            total += normal_lpdf(xi(i)[k], s.xi_bar[k], s.tau2_xi);
        }
    }

    // Intrinsic CAR on the sum-to-zero subspace.
    let ssr: f64 = raw.edges.iter().map(|&(a, b)| (s.d[a] - s.d[b]).powi(2)).sum();
    total += -0.5 * (n - 1) as f64 * (2.0 * std::f64::consts::PI * s.tau2_d).ln() - ssr / (2.0 * s.tau2_d);

    total += normal_lpdf(s.delta_bar, 0.0, 1.0);
    for k in 0..6 {
        total += normal_lpdf(s.eta_bar[k], 0.0, 1.0) + normal_lpdf(s.xi_bar[k], 0.0, 1.0);
    }
    for d in 0..dmax {
        total += normal_lpdf(s.beta[d], 0.0, 4.0);
        // Gamma(1, rate 0.01).
        total += 0.01f64.ln() - 0.01 * s.phi[d];
    }
    for v in [s.tau2_alpha, s.tau2_delta, s.tau2_d, s.tau2_eta, s.tau2_psi, s.tau2_xi] {
        // Inverse gamma with shape and scale 1/2.
        total += 0.5 * 0.5f64.ln() - ln_gamma_half - 1.5 * v.ln() - 0.5 / v;
    }
    for r in [s.rho_delta, s.rho_psi] {
        if r.abs() >= 1.0 {
            return f64::NEG_INFINITY;
        }
        total -= 2f64.ln();
    }
    total
}

/// A random triangle on a `1 x n` county row and a random state consistent
/// with it. Populations are small so every count stays modest.
pub fn random_case<R: Rng>(
    rng: &mut R,
    n: usize,
    len: usize,
    max_delay: usize,
    drop_last_day: bool,
) -> (RawData, ModelData, ModelState) {
    let window = AnalysisWindow::unchecked_len(as_of(), len, max_delay).unwrap();
    let pops: Vec<u64> = (0..n).map(|_| rng.random_range(2..40)).collect();
    let graph = CountyGraph::rook_grid(1, n, |k| pops[k]).unwrap();
    let stride = max_delay + 1;
    let mut z = vec![0u64; n * len * stride];
    for i in 0..n {
        for t in 0..len {
            for d in 0..=max_delay {
                if t + d < len {
                    z[(i * len + t) * stride + d] = rng.random_range(0..6);
                }
            }
        }
    }
    let triangle = ReportingTriangle::from_counts(n, window, z.clone()).unwrap();
    let data = ModelData::with_options(&triangle, &graph, drop_last_day).unwrap();

    let dims = Dims { n, t: len, d: max_delay };
    let mut s = ModelState::zeros(dims);
    let mut g = |sd: f64| sd * (rng.random::<f64>() * 2.0 - 1.0) * 1.7;
    for v in s.alpha.iter_mut() {
        *v = 0.5 + g(0.6);
    }
    for v in s.delta.iter_mut() {
        *v = g(0.3);
    }
    s.delta_bar = g(0.5);
    for v in s.d.iter_mut() {
        *v = g(0.4);
    }
    let m = s.d.iter().sum::<f64>() / n as f64;
    s.d.iter_mut().for_each(|v| *v -= m);
    for v in s.eta.iter_mut().chain(s.xi.iter_mut()) {
        *v = g(0.3);
    }
    for k in 0..6 {
        s.eta_bar[k] = g(0.3);
        s.xi_bar[k] = g(0.3);
    }
    for v in s.psi.iter_mut() {
        *v = g(1.0);
    }
    for v in s.beta.iter_mut() {
        *v = g(1.0);
    }
    s.rho_delta = g(0.55);
    s.rho_psi = g(0.55);
    for v in s.phi.iter_mut() {
        *v = rng.random_range(0.5..20.0);
    }
    for c in VarianceComponent::ALL {
        *s.tau2_mut(c) = rng.random_range(0.05..2.0);
    }
    for i in 0..n {
        for t in 0..len {
            let seen: u64 = (0..=max_delay).map(|d| z[(i * len + t) * stride + d]).sum();
            s.y[i * len + t] = if drop_last_day && t + 1 == len {
                rng.random_range(0..12)
            } else if t + max_delay < len {
                seen
            } else {
                seen + rng.random_range(0..6)
            };
        }
    }
    let raw = RawData {
        n,
        t: len,
        d: max_delay,
        z,
        population: pops.iter().map(|&p| p as f64).collect(),
        edges: (0..n - 1).map(|k| (k, k + 1)).collect(),
        first_day: window.start(),
        drop_last_day,
    };
    (raw, data, s)
}

// --- gradients of the Gaussian blocks -------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Alpha(usize, usize),
    Delta(usize, usize),
    DeltaBar,
    Spatial(usize),
    RhoDelta,
    Eta(usize, usize),
    EtaBar(usize),
    Xi(usize, usize),
    XiBar(usize),
    Psi(usize, usize, usize),
    Beta(usize),
    RhoPsi,
    Tau2(VarianceComponent),
}

impl Param {
    pub fn get(self, s: &ModelState) -> f64 {
        let dims = s.dims;
        match self {
            Param::Alpha(i, t) => s.alpha[dims.it(i, t)],
            Param::Delta(i, t) => s.delta[dims.it(i, t)],
            Param::DeltaBar => s.delta_bar,
            Param::Spatial(i) => s.d[i],
            Param::RhoDelta => s.rho_delta,
            Param::Eta(i, k) => s.eta[i * 6 + k],
            Param::EtaBar(k) => s.eta_bar[k],
            Param::Xi(i, k) => s.xi[i * 6 + k],
            Param::XiBar(k) => s.xi_bar[k],
            Param::Psi(i, t, d) => s.psi[dims.itd(i, t, d)],
            Param::Beta(d) => s.beta[d],
            Param::RhoPsi => s.rho_psi,
            Param::Tau2(c) => s.tau2(c),
        }
    }

    pub fn set(self, s: &mut ModelState, v: f64) {
        let dims = s.dims;
        match self {
            Param::Alpha(i, t) => s.alpha[dims.it(i, t)] = v,
            Param::Delta(i, t) => s.delta[dims.it(i, t)] = v,
            Param::DeltaBar => s.delta_bar = v,
            Param::Spatial(i) => s.d[i] = v,
            Param::RhoDelta => s.rho_delta = v,
            Param::Eta(i, k) => s.eta[i * 6 + k] = v,
            Param::EtaBar(k) => s.eta_bar[k] = v,
            Param::Xi(i, k) => s.xi[i * 6 + k] = v,
            Param::XiBar(k) => s.xi_bar[k] = v,
            Param::Psi(i, t, d) => s.psi[dims.itd(i, t, d)] = v,
            Param::Beta(d) => s.beta[d] = v,
            Param::RhoPsi => s.rho_psi = v,
            Param::Tau2(c) => *s.tau2_mut(c) = v,
        }
    }

    /// Every continuous parameter of a state.
    pub fn all(s: &ModelState) -> Vec<Param> {
        let dims = s.dims;
        let mut out = vec![Param::DeltaBar, Param::RhoDelta, Param::RhoPsi];
        for i in 0..dims.n {
            out.push(Param::Spatial(i));
            for t in 0..dims.t {
                out.push(Param::Alpha(i, t));
                out.push(Param::Delta(i, t));
                for d in 0..dims.d {
                    out.push(Param::Psi(i, t, d));
                }
            }
            for k in 0..6 {
                out.push(Param::Eta(i, k));
                out.push(Param::Xi(i, k));
            }
        }
        for k in 0..6 {
            out.push(Param::EtaBar(k));
            out.push(Param::XiBar(k));
        }
        out.extend((0..dims.d).map(Param::Beta));
        out.extend(VarianceComponent::ALL.map(Param::Tau2));
        out
    }
}

/// One Gaussian factor `N(r; 0, v)` with the partial derivatives of its
/// residual `r`.
struct Factor {
    r: f64,
    v: f64,
    var: Option<Param>,
    partials: Vec<(Param, f64)>,
}

fn accumulate(factors: &[Factor], grad: &mut HashMap<Param, f64>) {
    for f in factors {
        for &(p, dr) in &f.partials {
            *grad.entry(p).or_default() += -f.r / f.v * dr;
        }
        if let Some(p) = f.var {
            *grad.entry(p).or_default() += -0.5 / f.v + f.r * f.r / (2.0 * f.v * f.v);
        }
    }
}

/// Analytic gradient of the level random walk, summed over counties.
pub fn grad_latent(s: &ModelState) -> HashMap<Param, f64> {
    let dims = s.dims;
    let mut fs = Vec::new();
    for i in 0..dims.n {
        fs.push(Factor {
            r: s.alpha[dims.it(i, 0)],
            v: 100.0,
            var: None,
            partials: vec![(Param::Alpha(i, 0), 1.0)],
        });
        for t in 1..dims.t {
            fs.push(Factor {
                r: s.alpha[dims.it(i, t)] - s.alpha[dims.it(i, t - 1)] - s.delta[dims.it(i, t - 1)],
                v: s.tau2_alpha,
                var: Some(Param::Tau2(VarianceComponent::Alpha)),
                partials: vec![
                    (Param::Alpha(i, t), 1.0),
                    (Param::Alpha(i, t - 1), -1.0),
                    (Param::Delta(i, t - 1), -1.0),
                ],
            });
        }
    }
    let mut g = HashMap::new();
    accumulate(&fs, &mut g);
    g
}

/// Analytic gradient of the trend AR(1), summed over counties.
pub fn grad_trend(s: &ModelState) -> HashMap<Param, f64> {
    let dims = s.dims;
    let rho = s.rho_delta;
    let mut fs = Vec::new();
    for i in 0..dims.n {
        let c = s.delta_bar + s.d[i];
        for t in 0..dims.t {
            let x = s.delta[dims.it(i, t)];
            let f = if t == 0 {
                Factor {
                    r: x - c,
                    v: s.tau2_delta,
                    var: Some(Param::Tau2(VarianceComponent::Delta)),
                    partials: vec![(Param::Delta(i, 0), 1.0), (Param::DeltaBar, -1.0), (Param::Spatial(i), -1.0)],
                }
            } else {
                let prev = s.delta[dims.it(i, t - 1)];
                Factor {
                    r: x - c - rho * (prev - c),
                    v: s.tau2_delta,
                    var: Some(Param::Tau2(VarianceComponent::Delta)),
                    partials: vec![
                        (Param::Delta(i, t), 1.0),
                        (Param::Delta(i, t - 1), -rho),
                        (Param::DeltaBar, rho - 1.0),
                        (Param::Spatial(i), rho - 1.0),
                        (Param::RhoDelta, -(prev - c)),
                    ],
                }
            };
            fs.push(f);
        }
    }
    let mut g = HashMap::new();
    accumulate(&fs, &mut g);
    g
}

/// Analytic gradient of the intrinsic CAR density including its
/// `(N - 1)`-rank normaliser.
pub fn grad_icar(s: &ModelState, edges: &[(usize, usize)]) -> HashMap<Param, f64> {
    let mut g: HashMap<Param, f64> = HashMap::new();
    let v = s.tau2_d;
    let mut ssr = 0.0;
    for &(a, b) in edges {
        let r = s.d[a] - s.d[b];
        ssr += r * r;
        *g.entry(Param::Spatial(a)).or_default() += -r / v;
        *g.entry(Param::Spatial(b)).or_default() += r / v;
    }
    let rank = (s.dims.n - 1) as f64;
    g.insert(Param::Tau2(VarianceComponent::Spatial), -rank / (2.0 * v) + ssr / (2.0 * v * v));
    g
}

/// Analytic gradient of the reporting-hazard AR(1), summed over counties.
pub fn grad_psi(s: &ModelState, first_day: NaiveDate) -> HashMap<Param, f64> {
    let dims = s.dims;
    let rho = s.rho_psi;
    let row = |k: usize| weekday_row(first_day + Duration::days(k as i64));
    let mut fs = Vec::new();
    for i in 0..dims.n {
        let xi = &s.xi[i * 6..i * 6 + 6];
        for d in 0..dims.d {
            let mu = |t: usize| s.beta[d] + dot6(&row(t + d), xi);
            for t in 0..dims.t {
                let x = s.psi[dims.itd(i, t, d)];
                let v_now = row(t + d);
                let mut partials = vec![(Param::Psi(i, t, d), 1.0)];
                let r = if t == 0 {
                    partials.push((Param::Beta(d), -1.0));
                    partials.extend((0..6).map(|k| (Param::Xi(i, k), -v_now[k])));
                    x - mu(0)
                } else {
                    let prev = s.psi[dims.itd(i, t - 1, d)];
                    let v_prev = row(t - 1 + d);
                    partials.push((Param::Psi(i, t - 1, d), -rho));
                    partials.push((Param::Beta(d), rho - 1.0));
                    partials.extend((0..6).map(|k| (Param::Xi(i, k), -(v_now[k] - rho * v_prev[k]))));
                    partials.push((Param::RhoPsi, -(prev - mu(t - 1))));
                    x - mu(t) - rho * (prev - mu(t - 1))
                };
                fs.push(Factor {
                    r,
                    v: s.tau2_psi,
                    var: Some(Param::Tau2(VarianceComponent::Psi)),
                    partials,
                });
            }
        }
    }
    let mut g = HashMap::new();
    accumulate(&fs, &mut g);
    g
}

/// Analytic gradient of the weekday-effect hierarchy and the standard
/// normal priors on the state means and `delta_bar`.
pub fn grad_hierarchical(s: &ModelState) -> HashMap<Param, f64> {
    let mut fs = vec![Factor {
        r: s.delta_bar,
        v: 1.0,
        var: None,
        partials: vec![(Param::DeltaBar, 1.0)],
    }];
    for k in 0..6 {
        fs.push(Factor {
            r: s.eta_bar[k],
            v: 1.0,
            var: None,
            partials: vec![(Param::EtaBar(k), 1.0)],
        });
        fs.push(Factor {
            r: s.xi_bar[k],
            v: 1.0,
            var: None,
            partials: vec![(Param::XiBar(k), 1.0)],
        });
        for i in 0..s.dims.n {
            fs.push(Factor {
                r: s.eta[i * 6 + k] - s.eta_bar[k],
                v: s.tau2_eta,
                var: Some(Param::Tau2(VarianceComponent::Eta)),
                partials: vec![(Param::Eta(i, k), 1.0), (Param::EtaBar(k), -1.0)],
            });
            fs.push(Factor {
                r: s.xi[i * 6 + k] - s.xi_bar[k],
                v: s.tau2_xi,
                var: Some(Param::Tau2(VarianceComponent::Xi)),
                partials: vec![(Param::Xi(i, k), 1.0), (Param::XiBar(k), -1.0)],
            });
        }
    }
    let mut g = HashMap::new();
    accumulate(&fs, &mut g);
    g
}

/// Central difference with one Richardson step; `h` scales with `|x|`.
pub fn numeric_partial(s: &ModelState, p: Param, f: &dyn Fn(&ModelState) -> f64) -> f64 {
    let x = p.get(s);
    let h = 1e-3 * x.abs().max(0.1);
    let mut work = s.clone();
    let mut central = |h: f64| {
        p.set(&mut work, x + h);
        let up = f(&work);
        p.set(&mut work, x - h);
        let down = f(&work);
        p.set(&mut work, x);
        (up - down) / (2.0 * h)
    };
    let coarse = central(h);
    let fine = central(h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

// --- statistics ----------------------------------------------------------------

/// Pearson chi-square statistic for counts against a uniform expectation.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

/// Standard error of a mean from non-overlapping batch means.
pub fn batch_mean_se(x: &[f64], batches: usize) -> f64 {
    let size = x.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| x[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}
