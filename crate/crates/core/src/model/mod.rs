//! The Bayesian nowcasting model: state, data view, priors and densities.
//!
//! Onset counts follow `Y_it ~ Poisson(lambda_it)` with
//! `ln lambda_it = O_i + alpha_it + x_t . eta_i`. The latent level `alpha`
//! is a random walk whose drift `delta` is a mean-reverting AR(1) around
//! `delta_bar + d_i`, with `d` an intrinsic CAR field. Reporting delays
//! follow a sequential beta-binomial (generalized Dirichlet) split whose
//! logit hazards `psi` are AR(1) around `beta_d + v_td . xi_i`.

pub mod density;
pub mod special;

use serde::{Deserialize, Serialize};

use crate::data::{CountMatrix, CountyGraph, ReportingTriangle, WeekdayLevels};
use crate::error::{Error, Result};

pub use density::{log_joint, JointBreakdown};

/// Number of free weekday effects under sum-to-zero coding.
pub const N_EFFECTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    /// Counties.
    pub n: usize,
    /// Onset days in the window.
    pub t: usize,
    /// Maximum delay; delays run over `0..=d`.
    pub d: usize,
}

impl Dims {
    #[inline]
    pub fn it(&self, i: usize, t: usize) -> usize {
        i * self.t + t
    }

    #[inline]
    pub fn itd(&self, i: usize, t: usize, d: usize) -> usize {
        (i * self.t + t) * self.d + d
    }
}

/// Fixed prior constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperPriorSpec {
    /// Variance of the normal priors on weekday effects and `delta_bar`.
    pub effect_var: f64,
    /// Variance of the normal priors on delay intercepts `beta_d`.
    pub beta_var: f64,
    /// Variance of the initial level `alpha_i1`.
    pub alpha_init_var: f64,
    /// Inverse-gamma shape for all variance components.
    pub ig_shape: f64,
    /// Inverse-gamma scale for all variance components.
    pub ig_scale: f64,
    /// Gamma shape for the dispersions `phi_d`.
    pub phi_shape: f64,
    /// Gamma rate for the dispersions `phi_d`.
    pub phi_rate: f64,
    /// States with `|ln lambda| >= bound` anywhere have zero density.
    pub log_rate_bound: f64,
}

impl Default for HyperPriorSpec {
    fn default() -> Self {
        Self {
            effect_var: 1.0,
            beta_var: 4.0,
            alpha_init_var: 100.0,
            ig_shape: 0.5,
            ig_scale: 0.5,
            phi_shape: 1.0,
            phi_rate: 0.01,
            log_rate_bound: 50.0,
        }
    }
}

/// Where a county-day sits relative to the as-of date.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    /// Every delay is observed; `Y` equals the observed total.
    Complete,
    /// Delays `0..=depth` are observed.
    Partial { depth: usize },
    /// The as-of day itself: its reports are discarded and `Y` is forecast.
    ForcedMissing,
}

/// Everything the densities need from the data, in flat arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelData {
    pub dims: Dims,
    /// `Z[i][t][d]` for `d = 0..=D`, row-major.
    pub counts: Vec<u64>,
    /// Observed totals used as the lower bound on `Y`; zero on the forced-missing day.
    pub partial: Vec<u64>,
    pub offsets: Vec<f64>,
    pub neighbors: Vec<Vec<usize>>,
    pub weekdays: WeekdayLevels,
    /// Treat the as-of day as missing.
    pub drop_last_day: bool,
}

impl ModelData {
    pub fn new(triangle: &ReportingTriangle, graph: &CountyGraph) -> Result<Self> {
        Self::with_options(triangle, graph, true)
    }

    pub fn with_options(triangle: &ReportingTriangle, graph: &CountyGraph, drop_last_day: bool) -> Result<Self> {
        if triangle.n_counties() != graph.len() {
            return Err(Error::LengthMismatch(triangle.n_counties(), graph.len()));
        }
        let dims = Dims {
            n: graph.len(),
            t: triangle.n_days(),
            d: triangle.max_delay(),
        };
        let totals = triangle.partial_totals();
        let mut partial = totals.as_slice().to_vec();
        if drop_last_day {
            for i in 0..dims.n {
                partial[dims.it(i, dims.t - 1)] = 0;
            }
        }
        Ok(Self {
            dims,
            counts: triangle.counts().to_vec(),
            partial,
            offsets: graph.offsets().to_vec(),
            neighbors: graph.neighbor_lists().to_vec(),
            weekdays: WeekdayLevels::for_window(triangle.window()),
            drop_last_day,
        })
    }

    #[inline]
    pub fn z(&self, i: usize, t: usize, d: usize) -> u64 {
        self.counts[(i * self.dims.t + t) * (self.dims.d + 1) + d]
    }

    #[inline]
    pub fn s(&self, i: usize, t: usize) -> u64 {
        self.partial[self.dims.it(i, t)]
    }

    #[inline]
    pub fn status(&self, t: usize) -> CellStatus {
        let Dims { t: len, d, .. } = self.dims;
        if self.drop_last_day && t + 1 == len {
            CellStatus::ForcedMissing
        } else if t + d < len {
            CellStatus::Complete
        } else {
            CellStatus::Partial { depth: len - 1 - t }
        }
    }

    /// Highest delay whose beta-binomial term enters the likelihood.
    ///
    /// For complete cells the last delay is the deterministic remainder.
    #[inline]
    pub fn likelihood_depth(&self, t: usize) -> Option<usize> {
        match self.status(t) {
            CellStatus::Complete => Some(self.dims.d - 1),
            CellStatus::Partial { depth } => Some(depth),
            CellStatus::ForcedMissing => None,
        }
    }

    pub fn partial_matrix(&self) -> CountMatrix {
        CountMatrix::from_vec(self.dims.n, self.dims.t, self.partial.clone()).expect("dims")
    }
}

/// Variance components with inverse-gamma priors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceComponent {
    Alpha,
    Delta,
    Spatial,
    Eta,
    Psi,
    Xi,
}

impl VarianceComponent {
    pub const ALL: [VarianceComponent; 6] = [
        VarianceComponent::Alpha,
        VarianceComponent::Delta,
        VarianceComponent::Spatial,
        VarianceComponent::Eta,
        VarianceComponent::Psi,
        VarianceComponent::Xi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VarianceComponent::Alpha => "tau2_alpha",
            VarianceComponent::Delta => "tau2_delta",
            VarianceComponent::Spatial => "tau2_d",
            VarianceComponent::Eta => "tau2_eta",
            VarianceComponent::Psi => "tau2_psi",
            VarianceComponent::Xi => "tau2_xi",
        }
    }
}

/// One full assignment of every latent quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub dims: Dims,
    /// `alpha[i][t]`.
    pub alpha: Vec<f64>,
    /// `delta[i][t]`.
    pub delta: Vec<f64>,
    pub delta_bar: f64,
    /// Spatial trend offsets, summing to zero.
    pub d: Vec<f64>,
    /// `eta[i][k]`.
    pub eta: Vec<f64>,
    pub eta_bar: [f64; N_EFFECTS],
    /// `psi[i][t][d]` for `d = 0..D`.
    pub psi: Vec<f64>,
    pub beta: Vec<f64>,
    /// `xi[i][k]`.
    pub xi: Vec<f64>,
    pub xi_bar: [f64; N_EFFECTS],
    pub rho_delta: f64,
    pub rho_psi: f64,
    pub phi: Vec<f64>,
    pub tau2_alpha: f64,
    pub tau2_delta: f64,
    pub tau2_d: f64,
    pub tau2_eta: f64,
    pub tau2_psi: f64,
    pub tau2_xi: f64,
    /// Latent true totals `Y[i][t]`.
    pub y: Vec<u64>,
}

impl ModelState {
    /// All-zero effects, unit variances and dispersions.
    pub fn zeros(dims: Dims) -> Self {
        let Dims { n, t, d } = dims;
        Self {
            dims,
            alpha: vec![0.0; n * t],
            delta: vec![0.0; n * t],
            delta_bar: 0.0,
            d: vec![0.0; n],
            eta: vec![0.0; n * N_EFFECTS],
            eta_bar: [0.0; N_EFFECTS],
            psi: vec![0.0; n * t * d],
            beta: vec![0.0; d],
            xi: vec![0.0; n * N_EFFECTS],
            xi_bar: [0.0; N_EFFECTS],
            rho_delta: 0.0,
            rho_psi: 0.0,
            phi: vec![1.0; d],
            tau2_alpha: 1.0,
            tau2_delta: 1.0,
            tau2_d: 1.0,
            tau2_eta: 1.0,
            tau2_psi: 1.0,
            tau2_xi: 1.0,
            y: vec![0; n * t],
        }
    }

    #[inline]
    pub fn eta_i(&self, i: usize) -> &[f64] {
        &self.eta[i * N_EFFECTS..(i + 1) * N_EFFECTS]
    }

    #[inline]
    pub fn xi_i(&self, i: usize) -> &[f64] {
        &self.xi[i * N_EFFECTS..(i + 1) * N_EFFECTS]
    }

    pub fn tau2(&self, c: VarianceComponent) -> f64 {
        match c {
            VarianceComponent::Alpha => self.tau2_alpha,
            VarianceComponent::Delta => self.tau2_delta,
            VarianceComponent::Spatial => self.tau2_d,
            VarianceComponent::Eta => self.tau2_eta,
            VarianceComponent::Psi => self.tau2_psi,
            VarianceComponent::Xi => self.tau2_xi,
        }
    }

    pub fn tau2_mut(&mut self, c: VarianceComponent) -> &mut f64 {
        match c {
            VarianceComponent::Alpha => &mut self.tau2_alpha,
            VarianceComponent::Delta => &mut self.tau2_delta,
            VarianceComponent::Spatial => &mut self.tau2_d,
            VarianceComponent::Eta => &mut self.tau2_eta,
            VarianceComponent::Psi => &mut self.tau2_psi,
            VarianceComponent::Xi => &mut self.tau2_xi,
        }
    }

    /// Applies a county relabeling: county `i` of the result is county
    /// `perm[i]` of `self`.
    pub fn permute_counties(&self, perm: &[usize]) -> Self {
        let Dims { n, t, d } = self.dims;
        let mut out = self.clone();
        for (new, &old) in perm.iter().enumerate() {
            out.alpha[new * t..(new + 1) * t].copy_from_slice(&self.alpha[old * t..(old + 1) * t]);
            out.delta[new * t..(new + 1) * t].copy_from_slice(&self.delta[old * t..(old + 1) * t]);
            out.y[new * t..(new + 1) * t].copy_from_slice(&self.y[old * t..(old + 1) * t]);
            out.d[new] = self.d[old];
            out.eta[new * N_EFFECTS..(new + 1) * N_EFFECTS].copy_from_slice(self.eta_i(old));
            out.xi[new * N_EFFECTS..(new + 1) * N_EFFECTS].copy_from_slice(self.xi_i(old));
            let w = t * d;
            out.psi[new * w..(new + 1) * w].copy_from_slice(&self.psi[old * w..(old + 1) * w]);
        }
        debug_assert_eq!(perm.len(), n);
        out
    }

    /// Checks the structural invariants against the data.
    pub fn validate(&self, data: &ModelData) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidState(m));
        if self.dims != data.dims {
            return bad("dimension mismatch".into());
        }
        let sum: f64 = self.d.iter().sum();
        if sum.abs() > 1e-8 {
            return bad(format!("spatial effects sum to {sum}"));
        }
        if self.rho_delta.abs() >= 1.0 || self.rho_psi.abs() >= 1.0 {
            return bad("autoregressive parameter outside (-1, 1)".into());
        }
        for c in VarianceComponent::ALL {
            if !(self.tau2(c) > 0.0) {
                return bad(format!("{} is not positive", c.name()));
            }
        }
        if self.phi.iter().any(|&p| !(p > 0.0)) {
            return bad("dispersion is not positive".into());
        }
        for i in 0..self.dims.n {
            for t in 0..self.dims.t {
                let (y, s) = (self.y[self.dims.it(i, t)], data.s(i, t));
                if y < s {
                    return bad(format!("Y[{i},{t}] = {y} is below the observed total {s}"));
                }
                if data.status(t) == CellStatus::Complete && y != s {
                    return bad(format!("Y[{i},{t}] = {y} differs from the complete total {s}"));
                }
            }
        }
        Ok(())
    }
}
