//! Single-site updates of the Metropolis-within-Gibbs sweep.
//!
//! Each continuous scalar gets a Gaussian random-walk proposal on its
//! unconstrained scale, evaluated through the local log-density (the sum of
//! every joint factor that involves the node). Variance components are drawn
//! from their inverse-gamma full conditionals and the latent totals `Y` use
//! an independence proposal built from the current reporting hazards.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use super::mh::{accept, ScaleAdaptation};
use crate::model::density::{
    alpha_term, delay_cell, delta_term, icar_ssr, log_icar_prior, log_rate, outcome_term,
    psi_mean, psi_term,
};
use crate::model::special::{expit, ln_beta_binomial_kernel, ln_gamma_density, ln_normal, ln_poisson};
use crate::model::{CellStatus, Dims, HyperPriorSpec, ModelData, ModelState, VarianceComponent, N_EFFECTS};

/// Largest Poisson mean drawn directly; beyond it counts no longer fit the
/// sampler's integer range and the latent-total move is skipped.
const MAX_POISSON_MEAN: f64 = 1e15;

/// A continuous scalar updated by random-walk Metropolis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Alpha(usize, usize),
    Delta(usize, usize),
    /// Moves `d` along `e_i - 1/N`, staying on the sum-to-zero plane.
    Spatial(usize),
    DeltaBar,
    Eta(usize, usize),
    EtaBar(usize),
    Psi(usize, usize, usize),
    Beta(usize),
    Xi(usize, usize),
    XiBar(usize),
    /// `ln phi_d`.
    LogPhi(usize),
    /// `logit((rho_delta + 1) / 2)`.
    RhoDelta,
    /// `logit((rho_psi + 1) / 2)`.
    RhoPsi,
}

/// Node families, used for scale bookkeeping and acceptance reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Alpha,
    Delta,
    Spatial,
    DeltaBar,
    Eta,
    EtaBar,
    Psi,
    Beta,
    Xi,
    XiBar,
    LogPhi,
    RhoDelta,
    RhoPsi,
}

impl Family {
    pub const ALL: [Family; 13] = [
        Family::Alpha,
        Family::Delta,
        Family::Spatial,
        Family::DeltaBar,
        Family::Eta,
        Family::EtaBar,
        Family::Psi,
        Family::Beta,
        Family::Xi,
        Family::XiBar,
        Family::LogPhi,
        Family::RhoDelta,
        Family::RhoPsi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Alpha => "alpha",
            Family::Delta => "delta",
            Family::Spatial => "d",
            Family::DeltaBar => "delta_bar",
            Family::Eta => "eta",
            Family::EtaBar => "eta_bar",
            Family::Psi => "psi",
            Family::Beta => "beta",
            Family::Xi => "xi",
            Family::XiBar => "xi_bar",
            Family::LogPhi => "phi",
            Family::RhoDelta => "rho_delta",
            Family::RhoPsi => "rho_psi",
        }
    }

    fn size(self, dims: Dims) -> usize {
        match self {
            Family::Alpha | Family::Delta => dims.n * dims.t,
            Family::Spatial => dims.n,
            Family::DeltaBar | Family::RhoDelta | Family::RhoPsi => 1,
            Family::Eta | Family::Xi => dims.n * N_EFFECTS,
            Family::EtaBar | Family::XiBar => N_EFFECTS,
            Family::Psi => dims.n * dims.t * dims.d,
            Family::Beta | Family::LogPhi => dims.d,
        }
    }

    fn initial_scale(self) -> f64 {
        match self {
            Family::Alpha => 0.1,
            Family::Delta | Family::Spatial => 0.05,
            Family::DeltaBar => 0.02,
            Family::Psi | Family::LogPhi | Family::RhoDelta | Family::RhoPsi => 0.3,
            _ => 0.1,
        }
    }
}

impl Node {
    pub fn family(self) -> Family {
        match self {
            Node::Alpha(..) => Family::Alpha,
            Node::Delta(..) => Family::Delta,
            Node::Spatial(_) => Family::Spatial,
            Node::DeltaBar => Family::DeltaBar,
            Node::Eta(..) => Family::Eta,
            Node::EtaBar(_) => Family::EtaBar,
            Node::Psi(..) => Family::Psi,
            Node::Beta(_) => Family::Beta,
            Node::Xi(..) => Family::Xi,
            Node::XiBar(_) => Family::XiBar,
            Node::LogPhi(_) => Family::LogPhi,
            Node::RhoDelta => Family::RhoDelta,
            Node::RhoPsi => Family::RhoPsi,
        }
    }

    fn offset_in_family(self, dims: Dims) -> usize {
        match self {
            Node::Alpha(i, t) | Node::Delta(i, t) => dims.it(i, t),
            Node::Spatial(i) => i,
            Node::Eta(i, k) | Node::Xi(i, k) => i * N_EFFECTS + k,
            Node::EtaBar(k) | Node::XiBar(k) => k,
            Node::Psi(i, t, d) => dims.itd(i, t, d),
            Node::Beta(d) | Node::LogPhi(d) => d,
            Node::DeltaBar | Node::RhoDelta | Node::RhoPsi => 0,
        }
    }
}

/// Per-node proposal scales and acceptance counters.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalScales {
    dims: Dims,
    starts: Vec<usize>,
    pub scales: Vec<f64>,
    accepted: Vec<u32>,
    proposed: Vec<u32>,
    family_accepted: Vec<u64>,
    family_proposed: Vec<u64>,
    pub adaptation: ScaleAdaptation,
}

impl ProposalScales {
    pub fn new(dims: Dims, target: f64) -> Self {
        let mut starts = Vec::with_capacity(Family::ALL.len());
        let mut scales = Vec::new();
        for f in Family::ALL {
            starts.push(scales.len());
            scales.extend(std::iter::repeat_n(f.initial_scale(), f.size(dims)));
        }
        let len = scales.len();
        Self {
            dims,
            starts,
            scales,
            accepted: vec![0; len],
            proposed: vec![0; len],
            family_accepted: vec![0; Family::ALL.len()],
            family_proposed: vec![0; Family::ALL.len()],
            adaptation: ScaleAdaptation::new(target),
        }
    }

    #[inline]
    fn slot(&self, node: Node) -> usize {
        self.starts[node.family() as usize] + node.offset_in_family(self.dims)
    }

    #[inline]
    pub fn scale(&self, node: Node) -> f64 {
        self.scales[self.slot(node)]
    }

    #[inline]
    fn record(&mut self, node: Node, accepted: bool) {
        let k = self.slot(node);
        self.proposed[k] += 1;
        self.accepted[k] += accepted as u32;
        let f = node.family() as usize;
        self.family_proposed[f] += 1;
        self.family_accepted[f] += accepted as u64;
    }

    /// Moves every scale toward the target rate using the counts since the
    /// last call, then clears them.
    pub fn adapt(&mut self) {
        for k in 0..self.scales.len() {
            if self.proposed[k] > 0 {
                let rate = self.accepted[k] as f64 / self.proposed[k] as f64;
                self.scales[k] = self.adaptation.adapt(self.scales[k], rate);
            }
            self.accepted[k] = 0;
            self.proposed[k] = 0;
        }
        self.adaptation.times_adapted += 1;
    }

    pub fn reset_family_counts(&mut self) {
        self.family_accepted.iter_mut().for_each(|v| *v = 0);
        self.family_proposed.iter_mut().for_each(|v| *v = 0);
    }

    /// Acceptance rate per family since the last reset.
    pub fn family_rates(&self) -> Vec<(Family, f64)> {
        Family::ALL
            .iter()
            .filter_map(|&f| {
                let p = self.family_proposed[f as usize];
                (p > 0).then(|| (f, self.family_accepted[f as usize] as f64 / p as f64))
            })
            .collect()
    }
}

/// State plus everything needed to update it in place.
pub struct Sampler<'a> {
    pub data: &'a ModelData,
    pub priors: &'a HyperPriorSpec,
    pub state: ModelState,
    pub scales: ProposalScales,
    pub latent_accepted: u64,
    pub latent_proposed: u64,
}

#[inline]
fn rho_from(z: f64) -> f64 {
    2.0 * expit(z) - 1.0
}

#[inline]
fn rho_to(rho: f64) -> f64 {
    let p = (rho + 1.0) / 2.0;
    (p / (1.0 - p)).ln()
}

/// `ln |d rho / d z|` for `rho = 2 expit(z) - 1`.
#[inline]
fn rho_log_jacobian(z: f64) -> f64 {
    2f64.ln() + ln_expit(z) + ln_expit(-z)
}

#[inline]
fn ln_expit(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

impl<'a> Sampler<'a> {
    pub fn new(data: &'a ModelData, priors: &'a HyperPriorSpec, state: ModelState, target: f64) -> Self {
        let dims = data.dims;
        Self {
            data,
            priors,
            state,
            scales: ProposalScales::new(dims, target),
            latent_accepted: 0,
            latent_proposed: 0,
        }
    }

    fn dims(&self) -> Dims {
        self.data.dims
    }

    /// Current value of `node` on its unconstrained scale.
    pub fn get(&self, node: Node) -> f64 {
        let s = &self.state;
        let dims = self.dims();
        match node {
            Node::Alpha(i, t) => s.alpha[dims.it(i, t)],
            Node::Delta(i, t) => s.delta[dims.it(i, t)],
            Node::Spatial(i) => s.d[i],
            Node::DeltaBar => s.delta_bar,
            Node::Eta(i, k) => s.eta[i * N_EFFECTS + k],
            Node::EtaBar(k) => s.eta_bar[k],
            Node::Psi(i, t, d) => s.psi[dims.itd(i, t, d)],
            Node::Beta(d) => s.beta[d],
            Node::Xi(i, k) => s.xi[i * N_EFFECTS + k],
            Node::XiBar(k) => s.xi_bar[k],
            Node::LogPhi(d) => s.phi[d].ln(),
            Node::RhoDelta => rho_to(s.rho_delta),
            Node::RhoPsi => rho_to(s.rho_psi),
        }
    }

    /// Sets `node` from an unconstrained value. Spatial nodes shift the
    /// whole field so that it keeps summing to zero.
    pub fn set(&mut self, node: Node, value: f64) {
        let dims = self.dims();
        let s = &mut self.state;
        match node {
            Node::Alpha(i, t) => s.alpha[dims.it(i, t)] = value,
            Node::Delta(i, t) => s.delta[dims.it(i, t)] = value,
            Node::Spatial(i) => {
                let step = value - s.d[i];
                let share = step / dims.n as f64;
                for dj in s.d.iter_mut() {
                    *dj -= share;
                }
                s.d[i] += step;
            }
            Node::DeltaBar => s.delta_bar = value,
            Node::Eta(i, k) => s.eta[i * N_EFFECTS + k] = value,
            Node::EtaBar(k) => s.eta_bar[k] = value,
            Node::Psi(i, t, d) => s.psi[dims.itd(i, t, d)] = value,
            Node::Beta(d) => s.beta[d] = value,
            Node::Xi(i, k) => s.xi[i * N_EFFECTS + k] = value,
            Node::XiBar(k) => s.xi_bar[k] = value,
            Node::LogPhi(d) => s.phi[d] = value.exp(),
            Node::RhoDelta => s.rho_delta = rho_from(value),
            Node::RhoPsi => s.rho_psi = rho_from(value),
        }
    }

    fn all_delta_terms(&self) -> f64 {
        let dims = self.dims();
        let mut total = 0.0;
        for i in 0..dims.n {
            for t in 0..dims.t {
                total += delta_term(i, t, &self.state);
            }
        }
        total
    }

    fn psi_terms_for_delay(&self, d: usize) -> f64 {
        let dims = self.dims();
        let mut total = 0.0;
        for i in 0..dims.n {
            for t in 0..dims.t {
                total += psi_term(i, t, d, &self.state, self.data);
            }
        }
        total
    }

    fn psi_terms_for_county(&self, i: usize) -> f64 {
        let dims = self.dims();
        let mut total = 0.0;
        for t in 0..dims.t {
            for d in 0..dims.d {
                total += psi_term(i, t, d, &self.state, self.data);
            }
        }
        total
    }

    /// Beta-binomial kernel (no binomial coefficient) for `(i, t, d)` if that
    /// delay enters the likelihood.
    #[inline]
    fn delay_kernel(&self, i: usize, t: usize, d: usize) -> f64 {
        let data = self.data;
        match data.likelihood_depth(t) {
            Some(depth) if d <= depth => {
                let dims = self.dims();
                let mut remaining = self.state.y[dims.it(i, t)];
                for j in 0..d {
                    remaining -= data.z(i, t, j);
                }
                let psi = self.state.psi[dims.itd(i, t, d)];
                let phi = self.state.phi[d];
                ln_beta_binomial_kernel(data.z(i, t, d), remaining, phi * expit(psi), phi * expit(-psi))
            }
            _ => 0.0,
        }
    }

    /// Sum of every joint factor that depends on `node`, plus the
    /// log-Jacobian of its unconstrained transform.
    pub fn local_log_density(&self, node: Node) -> f64 {
        let (s, data, priors) = (&self.state, self.data, self.priors);
        let dims = self.dims();
        let last = dims.t - 1;
        match node {
            Node::Alpha(i, t) => {
                let mut v = outcome_term(i, t, s, data, priors) + alpha_term(i, t, s, priors);
                if t < last {
                    v += alpha_term(i, t + 1, s, priors);
                }
                v
            }
            Node::Delta(i, t) => {
                let mut v = delta_term(i, t, s);
                if t < last {
                    v += alpha_term(i, t + 1, s, priors) + delta_term(i, t + 1, s);
                }
                v
            }
            Node::Spatial(_) => self.all_delta_terms() + log_icar_prior(&s.d, &data.neighbors, s.tau2_d),
            Node::DeltaBar => self.all_delta_terms() + ln_normal(s.delta_bar, 0.0, priors.effect_var),
            Node::Eta(i, k) => {
                let mut v = ln_normal(s.eta[i * N_EFFECTS + k], s.eta_bar[k], s.tau2_eta);
                for t in 0..dims.t {
                    v += outcome_term(i, t, s, data, priors);
                }
                v
            }
            Node::EtaBar(k) => {
                let mut v = ln_normal(s.eta_bar[k], 0.0, priors.effect_var);
                for i in 0..dims.n {
                    v += ln_normal(s.eta[i * N_EFFECTS + k], s.eta_bar[k], s.tau2_eta);
                }
                v
            }
            Node::Psi(i, t, d) => {
                let mut v = psi_term(i, t, d, s, data) + self.delay_kernel(i, t, d);
                if t < last {
                    v += psi_term(i, t + 1, d, s, data);
                }
                v
            }
            Node::Beta(d) => self.psi_terms_for_delay(d) + ln_normal(s.beta[d], 0.0, priors.beta_var),
            Node::Xi(i, k) => {
                self.psi_terms_for_county(i) + ln_normal(s.xi[i * N_EFFECTS + k], s.xi_bar[k], s.tau2_xi)
            }
            Node::XiBar(k) => {
                let mut v = ln_normal(s.xi_bar[k], 0.0, priors.effect_var);
                for i in 0..dims.n {
                    v += ln_normal(s.xi[i * N_EFFECTS + k], s.xi_bar[k], s.tau2_xi);
                }
                v
            }
            Node::LogPhi(d) => {
                let phi = s.phi[d];
                let mut v = ln_gamma_density(phi, priors.phi_shape, priors.phi_rate) + phi.ln();
                for i in 0..dims.n {
                    for t in 0..dims.t {
                        v += self.delay_kernel(i, t, d);
                    }
                }
                v
            }
            Node::RhoDelta => self.all_delta_terms() + rho_log_jacobian(rho_to(s.rho_delta)),
            Node::RhoPsi => {
                let mut v = rho_log_jacobian(rho_to(s.rho_psi));
                for i in 0..dims.n {
                    v += self.psi_terms_for_county(i);
                }
                v
            }
        }
    }

    /// Metropolis step to an explicit unconstrained proposal.
    pub fn metropolis_to<R: Rng + ?Sized>(&mut self, node: Node, proposal: f64, rng: &mut R) -> bool {
        let current = self.get(node);
        let saved_d = matches!(node, Node::Spatial(_)).then(|| self.state.d.clone());
        let lp_old = self.local_log_density(node);
        self.set(node, proposal);
        let lp_new = self.local_log_density(node);
        let ok = accept(lp_new - lp_old, rng);
        if !ok {
            match saved_d {
                Some(d) => self.state.d = d,
                None => self.set(node, current),
            }
        }
        self.scales.record(node, ok);
        ok
    }

    /// Gaussian random-walk update of one scalar node.
    pub fn update_scalar_metropolis<R: Rng + ?Sized>(&mut self, node: Node, rng: &mut R) -> bool {
        let eps: f64 = rand_distr::StandardNormal.sample(rng);
        let proposal = self.get(node) + self.scales.scale(node) * eps;
        self.metropolis_to(node, proposal, rng)
    }

    /// Number of residuals and their sum of squares for a variance component.
    pub fn residuals(&self, component: VarianceComponent) -> (usize, f64) {
        let (s, data) = (&self.state, self.data);
        let dims = self.dims();
        let mut ssr = 0.0;
        let k = match component {
            VarianceComponent::Alpha => {
                for i in 0..dims.n {
                    for t in 1..dims.t {
                        let p = dims.it(i, t - 1);
                        let r = s.alpha[p + 1] - s.alpha[p] - s.delta[p];
                        ssr += r * r;
                    }
                }
                dims.n * (dims.t - 1)
            }
            VarianceComponent::Delta => {
                for i in 0..dims.n {
                    let center = s.delta_bar + s.d[i];
                    for t in 0..dims.t {
                        let mean = if t == 0 {
                            center
                        } else {
                            center + s.rho_delta * (s.delta[dims.it(i, t - 1)] - center)
                        };
                        let r = s.delta[dims.it(i, t)] - mean;
                        ssr += r * r;
                    }
                }
                dims.n * dims.t
            }
            VarianceComponent::Spatial => {
                ssr = icar_ssr(&s.d, &data.neighbors);
                dims.n - 1
            }
            VarianceComponent::Eta | VarianceComponent::Xi => {
                let (vals, bar) = if component == VarianceComponent::Eta {
                    (&s.eta, &s.eta_bar)
                } else {
                    (&s.xi, &s.xi_bar)
                };
                for i in 0..dims.n {
                    for k in 0..N_EFFECTS {
                        let r = vals[i * N_EFFECTS + k] - bar[k];
                        ssr += r * r;
                    }
                }
                dims.n * N_EFFECTS
            }
            VarianceComponent::Psi => {
                for i in 0..dims.n {
                    for t in 0..dims.t {
                        for d in 0..dims.d {
                            let mu = psi_mean(i, t, d, s, data);
                            let mean = if t == 0 {
                                mu
                            } else {
                                mu + s.rho_psi * (s.psi[dims.itd(i, t - 1, d)] - psi_mean(i, t - 1, d, s, data))
                            };
                            let r = s.psi[dims.itd(i, t, d)] - mean;
                            ssr += r * r;
                        }
                    }
                }
                dims.n * dims.t * dims.d
            }
        };
        (k, ssr)
    }

    /// Conjugate inverse-gamma draw for one variance component.
    pub fn update_variance_gibbs<R: Rng + ?Sized>(&mut self, component: VarianceComponent, rng: &mut R) -> f64 {
        let (k, ssr) = self.residuals(component);
        let v = draw_variance(self.priors, k, ssr, rng);
        *self.state.tau2_mut(component) = v;
        v
    }

    /// Updates the latent total of a not-fully-reported cell. Complete cells
    /// are left pinned at their observed total.
    pub fn update_latent_total<R: Rng + ?Sized>(&mut self, i: usize, t: usize, rng: &mut R) -> u64 {
        let dims = self.dims();
        let k = dims.it(i, t);
        let data = self.data;
        let lr = log_rate(i, t, &self.state, data);
        let lambda = lr.exp();
        match data.status(t) {
            CellStatus::Complete => {}
            CellStatus::ForcedMissing => {
                if lambda <= MAX_POISSON_MEAN {
                    self.state.y[k] = draw_poisson(lambda, rng);
                }
            }
            CellStatus::Partial { depth } => {
                let mut unreported = 1.0;
                for d in 0..=depth {
                    unreported *= expit(-self.state.psi[dims.itd(i, t, d)]);
                }
                let mean = lambda * unreported;
                if !(mean <= MAX_POISSON_MEAN) || !(lr.abs() < self.priors.log_rate_bound) {
                    return self.state.y[k];
                }
                let floor = data.s(i, t);
                let proposal = floor + draw_poisson(mean, rng);
                let current = self.state.y[k];
                let log_q = |y: u64| -> f64 {
                    if mean > 0.0 {
                        ln_poisson(y - floor, mean.ln())
                    } else if y == floor {
                        0.0
                    } else {
                        f64::NEG_INFINITY
                    }
                };
                let log_target = |y: u64| ln_poisson(y, lr) + delay_cell(i, t, &self.state, data, y);
                let ratio = (log_target(proposal) - log_q(proposal)) - (log_target(current) - log_q(current));
                self.latent_proposed += 1;
                if accept(ratio, rng) {
                    self.state.y[k] = proposal;
                    self.latent_accepted += 1;
                }
            }
        }
        self.state.y[k]
    }

    /// Subtracts the mean from the spatial field.
    pub fn recenter_spatial(&mut self) {
        recenter(&mut self.state.d);
    }

    /// One full sweep over every node, variance and latent total.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let Dims { n, t: len, d: max_d } = self.dims();
        for i in 0..n {
            for t in 0..len {
                self.update_scalar_metropolis(Node::Alpha(i, t), rng);
            }
        }
        for i in 0..n {
            for t in 0..len {
                self.update_scalar_metropolis(Node::Delta(i, t), rng);
            }
        }
        for i in 0..n {
            self.update_scalar_metropolis(Node::Spatial(i), rng);
        }
        self.recenter_spatial();
        self.update_scalar_metropolis(Node::DeltaBar, rng);
        for i in 0..n {
            for k in 0..N_EFFECTS {
                self.update_scalar_metropolis(Node::Eta(i, k), rng);
            }
        }
        for k in 0..N_EFFECTS {
            self.update_scalar_metropolis(Node::EtaBar(k), rng);
        }
        for i in 0..n {
            for t in 0..len {
                for d in 0..max_d {
                    self.update_scalar_metropolis(Node::Psi(i, t, d), rng);
                }
            }
        }
        for d in 0..max_d {
            self.update_scalar_metropolis(Node::Beta(d), rng);
        }
        for i in 0..n {
            for k in 0..N_EFFECTS {
                self.update_scalar_metropolis(Node::Xi(i, k), rng);
            }
        }
        for k in 0..N_EFFECTS {
            self.update_scalar_metropolis(Node::XiBar(k), rng);
        }
        for d in 0..max_d {
            self.update_scalar_metropolis(Node::LogPhi(d), rng);
        }
        self.update_scalar_metropolis(Node::RhoDelta, rng);
        self.update_scalar_metropolis(Node::RhoPsi, rng);
        for c in VarianceComponent::ALL {
            self.update_variance_gibbs(c, rng);
        }
        for i in 0..n {
            for t in 0..len {
                self.update_latent_total(i, t, rng);
            }
        }
    }
}

/// Subtracts the mean so the entries sum to zero.
pub fn recenter(d: &mut [f64]) {
    if d.is_empty() {
        return;
    }
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    d.iter_mut().for_each(|v| *v -= mean);
}

/// `InvGamma(shape + k/2, scale + ssr/2)`.
pub fn draw_variance<R: Rng + ?Sized>(priors: &HyperPriorSpec, k: usize, ssr: f64, rng: &mut R) -> f64 {
    let shape = priors.ig_shape + k as f64 / 2.0;
    let scale = priors.ig_scale + ssr / 2.0;
    let g: f64 = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
    scale / g
}

/// Poisson draw that accepts a zero mean.
pub fn draw_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}
