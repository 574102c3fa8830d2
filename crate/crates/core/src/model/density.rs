//! Log-density blocks of the joint model.
//!
//! Every block is a pure function of `(state, data)`. The `*_term` helpers
//! evaluate single factors and are shared with the sampler's local updates.

use serde::{Deserialize, Serialize};

use super::special::{
    expit, ln_beta_binomial, ln_gamma_density, ln_inverse_gamma, ln_normal, ln_poisson,
};
use super::{HyperPriorSpec, ModelData, ModelState, VarianceComponent, N_EFFECTS};
use crate::data::coded_dot;
use crate::error::{Error, Result};

/// `ln lambda_it = O_i + alpha_it + x_t . eta_i`.
#[inline]
pub fn log_rate(i: usize, t: usize, state: &ModelState, data: &ModelData) -> f64 {
    data.offsets[i] + state.alpha[state.dims.it(i, t)] + coded_dot(data.weekdays.onset(t), state.eta_i(i))
}

/// Poisson factor for `Y_it`, or `-inf` when the rate leaves the bound.
#[inline]
pub fn outcome_term(i: usize, t: usize, state: &ModelState, data: &ModelData, priors: &HyperPriorSpec) -> f64 {
    let lr = log_rate(i, t, state, data);
    if !(lr.abs() < priors.log_rate_bound) {
        return f64::NEG_INFINITY;
    }
    ln_poisson(state.y[state.dims.it(i, t)], lr)
}

/// `ln Poisson(Y_it | lambda_it)`.
pub fn log_poisson_outcome(
    i: usize,
    t: usize,
    state: &ModelState,
    data: &ModelData,
    priors: &HyperPriorSpec,
) -> Result<f64> {
    let lr = log_rate(i, t, state, data);
    if !(lr.abs() < priors.log_rate_bound) {
        return Err(Error::Numerical(format!(
            "divergent state: ln lambda[{i},{t}] = {lr} outside +/-{}",
            priors.log_rate_bound
        )));
    }
    Ok(ln_poisson(state.y[state.dims.it(i, t)], lr))
}

/// Random-walk factor for `alpha_it`.
#[inline]
pub fn alpha_term(i: usize, t: usize, state: &ModelState, priors: &HyperPriorSpec) -> f64 {
    let dims = state.dims;
    let a = state.alpha[dims.it(i, t)];
    if t == 0 {
        ln_normal(a, 0.0, priors.alpha_init_var)
    } else {
        let k = dims.it(i, t - 1);
        ln_normal(a, state.alpha[k] + state.delta[k], state.tau2_alpha)
    }
}

/// Initial term plus the random-walk increments of county `i`.
pub fn log_latent_prior(i: usize, state: &ModelState, priors: &HyperPriorSpec) -> f64 {
    (0..state.dims.t).map(|t| alpha_term(i, t, state, priors)).sum()
}

/// AR(1) factor for `delta_it` around `delta_bar + d_i`.
#[inline]
pub fn delta_term(i: usize, t: usize, state: &ModelState) -> f64 {
    let dims = state.dims;
    let center = state.delta_bar + state.d[i];
    let x = state.delta[dims.it(i, t)];
    let mean = if t == 0 {
        center
    } else {
        center + state.rho_delta * (state.delta[dims.it(i, t - 1)] - center)
    };
    ln_normal(x, mean, state.tau2_delta)
}

pub fn log_trend_prior(i: usize, state: &ModelState) -> f64 {
    (0..state.dims.t).map(|t| delta_term(i, t, state)).sum()
}

/// Pairwise-difference form `-(1 / 2 tau2) sum_{i~j} (d_i - d_j)^2`,
/// without normalising constants.
pub fn log_icar_prior(d: &[f64], neighbors: &[Vec<usize>], tau2_d: f64) -> f64 {
    icar_ssr(d, neighbors) * (-0.5 / tau2_d)
}

/// `sum_{i<j} w_ij (d_i - d_j)^2`.
pub fn icar_ssr(d: &[f64], neighbors: &[Vec<usize>]) -> f64 {
    let mut ssr = 0.0;
    for (i, nb) in neighbors.iter().enumerate() {
        for &j in nb.iter().filter(|&&j| j > i) {
            let r = d[i] - d[j];
            ssr += r * r;
        }
    }
    ssr
}

/// Normalising term of the intrinsic CAR density on the sum-to-zero
/// subspace, which has rank `N - 1`.
pub fn log_icar_normalizer(n: usize, tau2_d: f64) -> f64 {
    -0.5 * (n.saturating_sub(1)) as f64 * (2.0 * std::f64::consts::PI * tau2_d).ln()
}

/// Stick-breaking proportions from `D` hazards; the last proportion is the
/// remainder, so the output has `D + 1` entries summing to one.
pub fn stick_breaking_mean(nu: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(nu.len() + 1);
    let mut left = 1.0;
    for &v in nu {
        out.push(v * left);
        left *= 1.0 - v;
    }
    out.push(left);
    out
}

/// Beta-binomial factor for delay `d` given `remaining` unreported cases.
#[inline]
pub fn delay_term(
    i: usize,
    t: usize,
    d: usize,
    remaining: u64,
    state: &ModelState,
    data: &ModelData,
) -> f64 {
    let k = data.z(i, t, d);
    if k > remaining {
        return f64::NEG_INFINITY;
    }
    let psi = state.psi[state.dims.itd(i, t, d)];
    let phi = state.phi[d];
    ln_beta_binomial(k, remaining, phi * expit(psi), phi * expit(-psi))
}

/// Cell likelihood as a plain float; `-inf` when `Y` is below the reports.
#[inline]
pub fn delay_cell(i: usize, t: usize, state: &ModelState, data: &ModelData, y: u64) -> f64 {
    let Some(depth) = data.likelihood_depth(t) else {
        return 0.0;
    };
    let mut remaining = y;
    let mut total = 0.0;
    for d in 0..=depth {
        let k = data.z(i, t, d);
        if k > remaining {
            return f64::NEG_INFINITY;
        }
        total += delay_term(i, t, d, remaining, state, data);
        remaining -= k;
    }
    total
}

/// Sequential beta-binomial likelihood of the observed delay cells of
/// `(i, t)`. Unobserved delays marginalise out; a fully observed cell's last
/// delay is the deterministic remainder.
pub fn log_delay_likelihood(i: usize, t: usize, state: &ModelState, data: &ModelData) -> Result<f64> {
    let y = state.y[state.dims.it(i, t)];
    let v = delay_cell(i, t, state, data, y);
    if v == f64::NEG_INFINITY {
        return Err(Error::InvalidState(format!(
            "Y[{i},{t}] = {y} is below the reported count"
        )));
    }
    Ok(v)
}

/// Mean of `psi_itd`: `beta_d + v_td . xi_i`.
#[inline]
pub fn psi_mean(i: usize, t: usize, d: usize, state: &ModelState, data: &ModelData) -> f64 {
    state.beta[d] + coded_dot(data.weekdays.report(t, d), state.xi_i(i))
}

/// Mean-centred AR(1) factor for `psi_itd`.
#[inline]
pub fn psi_term(i: usize, t: usize, d: usize, state: &ModelState, data: &ModelData) -> f64 {
    let dims = state.dims;
    let mu = psi_mean(i, t, d, state, data);
    let x = state.psi[dims.itd(i, t, d)];
    let mean = if t == 0 {
        mu
    } else {
        let prev = state.psi[dims.itd(i, t - 1, d)] - psi_mean(i, t - 1, d, state, data);
        mu + state.rho_psi * prev
    };
    ln_normal(x, mean, state.tau2_psi)
}

pub fn log_psi_prior(i: usize, state: &ModelState, data: &ModelData) -> f64 {
    let dims = state.dims;
    let mut total = 0.0;
    for t in 0..dims.t {
        for d in 0..dims.d {
            total += psi_term(i, t, d, state, data);
        }
    }
    total
}

/// County weekday effects around the state means, plus the standard normal
/// priors on the state means and on `delta_bar`.
pub fn log_hierarchical_effects(state: &ModelState, priors: &HyperPriorSpec) -> f64 {
    let mut total = ln_normal(state.delta_bar, 0.0, priors.effect_var);
    for k in 0..N_EFFECTS {
        total += ln_normal(state.eta_bar[k], 0.0, priors.effect_var);
        total += ln_normal(state.xi_bar[k], 0.0, priors.effect_var);
    }
    for i in 0..state.dims.n {
        for k in 0..N_EFFECTS {
            total += ln_normal(state.eta_i(i)[k], state.eta_bar[k], state.tau2_eta);
            total += ln_normal(state.xi_i(i)[k], state.xi_bar[k], state.tau2_xi);
        }
    }
    total
}

/// Inverse-gamma variances, normal delay intercepts, gamma dispersions and
/// uniform autoregressive parameters.
pub fn log_hyperpriors(state: &ModelState, priors: &HyperPriorSpec) -> f64 {
    let mut total = 0.0;
    for c in VarianceComponent::ALL {
        total += ln_inverse_gamma(state.tau2(c), priors.ig_shape, priors.ig_scale);
    }
    for &b in &state.beta {
        total += ln_normal(b, 0.0, priors.beta_var);
    }
    for &p in &state.phi {
        total += ln_gamma_density(p, priors.phi_shape, priors.phi_rate);
    }
    for rho in [state.rho_delta, state.rho_psi] {
        total += if rho.abs() < 1.0 { -(2f64.ln()) } else { f64::NEG_INFINITY };
    }
    total
}

/// Per-block contributions to the joint log-density.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct JointBreakdown {
    pub outcome: f64,
    pub latent: f64,
    pub trend: f64,
    pub icar: f64,
    pub icar_normalizer: f64,
    pub delay: f64,
    pub psi: f64,
    pub hierarchical: f64,
    pub hyperpriors: f64,
}

impl JointBreakdown {
    pub fn total(&self) -> f64 {
        self.outcome
            + self.latent
            + self.trend
            + self.icar
            + self.icar_normalizer
            + self.delay
            + self.psi
            + self.hierarchical
            + self.hyperpriors
    }
}

/// Joint log-density broken down by block.
pub fn log_joint_breakdown(
    state: &ModelState,
    data: &ModelData,
    priors: &HyperPriorSpec,
) -> Result<JointBreakdown> {
    let dims = state.dims;
    let mut b = JointBreakdown::default();
    for i in 0..dims.n {
        for t in 0..dims.t {
            b.outcome += log_poisson_outcome(i, t, state, data, priors)?;
            b.delay += log_delay_likelihood(i, t, state, data)?;
        }
        b.latent += log_latent_prior(i, state, priors);
        b.trend += log_trend_prior(i, state);
        b.psi += log_psi_prior(i, state, data);
    }
    b.icar = log_icar_prior(&state.d, &data.neighbors, state.tau2_d);
    b.icar_normalizer = log_icar_normalizer(dims.n, state.tau2_d);
    b.hierarchical = log_hierarchical_effects(state, priors);
    b.hyperpriors = log_hyperpriors(state, priors);
    if !b.total().is_finite() {
        return Err(Error::Numerical(format!("non-finite joint density: {b:?}")));
    }
    Ok(b)
}

/// Joint log-density of the state and the observed data.
pub fn log_joint(state: &ModelState, data: &ModelData, priors: &HyperPriorSpec) -> Result<f64> {
    log_joint_breakdown(state, data, priors).map(|b| b.total())
}
