//! Metropolis-within-Gibbs engine.
//!
//! One iteration is a full sweep: random-walk updates of every continuous
//! scalar, conjugate draws of the six variance components, latent-total
//! updates and recentering of the spatial field. Proposal scales adapt
//! during burn-in only.

pub mod diagnostics;
pub mod init;
pub mod mh;
pub mod updates;

use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{log_joint, HyperPriorSpec, ModelData, ModelState, VarianceComponent};
pub use updates::{Family, Node, Sampler};

/// Which scalars are recorded at each retained iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSpec {
    /// Trailing days of `delta` recorded per county.
    pub trend_window: usize,
    /// Record every `alpha`, `delta` and `Y` instead of the trailing subsets.
    pub full_state: bool,
}

impl Default for MonitorSpec {
    fn default() -> Self {
        Self {
            trend_window: 21,
            full_state: false,
        }
    }
}

/// A monitored scalar. County and day indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MonitorKey {
    Delta(usize, usize),
    Alpha(usize, usize),
    Y(usize, usize),
    Tau2(VarianceComponent),
    RhoDelta,
    RhoPsi,
    DeltaBar,
    Beta(usize),
    Phi(usize),
}

impl MonitorKey {
    /// Column name with 1-based county and day indices; delays stay 0-based.
    pub fn name(&self) -> String {
        match *self {
            MonitorKey::Delta(i, t) => format!("delta[{}:{}]", i + 1, t + 1),
            MonitorKey::Alpha(i, t) => format!("alpha[{}:{}]", i + 1, t + 1),
            MonitorKey::Y(i, t) => format!("Y[{}:{}]", i + 1, t + 1),
            MonitorKey::Tau2(c) => c.name().to_string(),
            MonitorKey::RhoDelta => "rho_delta".into(),
            MonitorKey::RhoPsi => "rho_psi".into(),
            MonitorKey::DeltaBar => "delta_bar".into(),
            MonitorKey::Beta(d) => format!("beta[{d}]"),
            MonitorKey::Phi(d) => format!("phi[{d}]"),
        }
    }

    pub fn value(&self, s: &ModelState) -> f64 {
        let dims = s.dims;
        match *self {
            MonitorKey::Delta(i, t) => s.delta[dims.it(i, t)],
            MonitorKey::Alpha(i, t) => s.alpha[dims.it(i, t)],
            MonitorKey::Y(i, t) => s.y[dims.it(i, t)] as f64,
            MonitorKey::Tau2(c) => s.tau2(c),
            MonitorKey::RhoDelta => s.rho_delta,
            MonitorKey::RhoPsi => s.rho_psi,
            MonitorKey::DeltaBar => s.delta_bar,
            MonitorKey::Beta(d) => s.beta[d],
            MonitorKey::Phi(d) => s.phi[d],
        }
    }
}

impl MonitorSpec {
    /// Monitored keys in column order.
    pub fn keys(&self, data: &ModelData) -> Vec<MonitorKey> {
        let dims = data.dims;
        let trend_from = dims.t.saturating_sub(self.trend_window);
        let y_from = if self.full_state { 0 } else { dims.t.saturating_sub(dims.d) };
        let mut keys = Vec::new();
        for i in 0..dims.n {
            let from = if self.full_state { 0 } else { trend_from };
            keys.extend((from..dims.t).map(|t| MonitorKey::Delta(i, t)));
        }
        if self.full_state {
            for i in 0..dims.n {
                keys.extend((0..dims.t).map(|t| MonitorKey::Alpha(i, t)));
            }
        }
        for i in 0..dims.n {
            keys.extend((y_from..dims.t).map(|t| MonitorKey::Y(i, t)));
        }
        keys.extend(VarianceComponent::ALL.map(MonitorKey::Tau2));
        keys.extend([MonitorKey::RhoDelta, MonitorKey::RhoPsi, MonitorKey::DeltaBar]);
        keys.extend((0..dims.d).map(MonitorKey::Beta));
        keys.extend((0..dims.d).map(MonitorKey::Phi));
        keys
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub chains: usize,
    pub seed: u64,
    pub adapt_interval: usize,
    pub target_acceptance: f64,
    pub monitors: MonitorSpec,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            iterations: 30_000,
            burn_in: 15_000,
            thin: 10,
            chains: 2,
            seed: 1,
            adapt_interval: 200,
            target_acceptance: 0.44,
            monitors: MonitorSpec::default(),
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(Error::Input(format!(
                "burn_in ({}) must be below iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 || self.chains == 0 || self.adapt_interval == 0 {
            return Err(Error::Input("thin, chains and adapt_interval must be at least 1".into()));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::Input("target_acceptance must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Retained draws per chain.
    pub fn n_draws(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// Retained draws and run statistics of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDraws {
    pub chain: usize,
    n_cols: usize,
    /// Row-major, one row per retained draw.
    values: Vec<f64>,
    /// Post-burn-in acceptance rate per node family.
    pub acceptance: Vec<(String, f64)>,
    /// Post-burn-in acceptance rate of the latent-total moves.
    pub latent_acceptance: Option<f64>,
    pub scales_at_burn_in: Vec<f64>,
    pub final_scales: Vec<f64>,
    pub final_state: ModelState,
}

impl ChainDraws {
    /// Draws without run statistics, e.g. loaded from disk or constructed.
    pub fn from_values(chain: usize, n_cols: usize, values: Vec<f64>, final_state: ModelState) -> Result<Self> {
        if n_cols == 0 || values.len() % n_cols != 0 {
            return Err(Error::LengthMismatch(values.len(), n_cols));
        }
        Ok(Self {
            chain,
            n_cols,
            values,
            acceptance: Vec::new(),
            latent_acceptance: None,
            scales_at_burn_in: Vec::new(),
            final_scales: Vec::new(),
            final_state,
        })
    }

    pub fn n_draws(&self) -> usize {
        self.values.len().checked_div(self.n_cols).unwrap_or(0)
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.n_cols..(k + 1) * self.n_cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_draws()).map(|k| self.values[k * self.n_cols + col]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub names: Vec<String>,
    pub keys: Vec<MonitorKey>,
    pub chains: Vec<ChainDraws>,
}

impl PosteriorDraws {
    pub fn column_of(&self, key: MonitorKey) -> Option<usize> {
        self.keys.iter().position(|&k| k == key)
    }

    /// Every chain's draws of `key`, concatenated in chain order.
    pub fn pooled(&self, key: MonitorKey) -> Result<Vec<f64>> {
        let col = self.column_of(key).ok_or_else(|| Error::MissingMonitor(key.name()))?;
        Ok(self.chains.iter().flat_map(|c| c.column(col)).collect())
    }

    pub fn total_draws(&self) -> usize {
        self.chains.iter().map(ChainDraws::n_draws).sum()
    }

    /// Columnar CSV: `chain,draw` then one column per monitor. Floats use
    /// the shortest round-trip representation.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut header = vec!["chain".to_string(), "draw".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(|e| Error::csv(path, e))?;
        for c in &self.chains {
            for k in 0..c.n_draws() {
                let mut rec = vec![(c.chain + 1).to_string(), (k + 1).to_string()];
                rec.extend(c.row(k).iter().map(|v| v.to_string()));
                w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Runs one chain. The result depends only on `(data, priors, config,
/// chain_index)`.
pub fn run_chain(
    data: &ModelData,
    priors: &HyperPriorSpec,
    config: &SamplerConfig,
    chain_index: usize,
) -> Result<ChainDraws> {
    run_chain_from(data, priors, config, chain_index, init::initialize(data))
}

/// Runs one chain from an explicit starting state.
pub fn run_chain_from(
    data: &ModelData,
    priors: &HyperPriorSpec,
    config: &SamplerConfig,
    chain_index: usize,
    start: ModelState,
) -> Result<ChainDraws> {
    config.validate()?;
    start.validate(data)?;
    log_joint(&start, data, priors).map_err(|e| match e {
        Error::Numerical(m) => Error::Numerical(format!("initial state: {m}")),
        other => other,
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(chain_index as u64);
    let keys = config.monitors.keys(data);
    let mut sampler = Sampler::new(data, priors, start, config.target_acceptance);
    let mut values = Vec::with_capacity(config.n_draws() * keys.len());
    let mut scales_at_burn_in = Vec::new();

    for iter in 0..config.iterations {
        sampler.sweep(&mut rng);
        if iter < config.burn_in {
            if (iter + 1) % config.adapt_interval == 0 {
                sampler.scales.adapt();
            }
            if iter + 1 == config.burn_in {
                scales_at_burn_in = sampler.scales.scales.clone();
                sampler.scales.reset_family_counts();
                sampler.latent_accepted = 0;
                sampler.latent_proposed = 0;
            }
        } else if (iter + 1 - config.burn_in) % config.thin == 0 {
            values.extend(keys.iter().map(|k| k.value(&sampler.state)));
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("chain {chain_index} produced non-finite draws")));
    }
    let acceptance = sampler
        .scales
        .family_rates()
        .into_iter()
        .map(|(f, r)| (f.name().to_string(), r))
        .collect();
    let latent_acceptance = (sampler.latent_proposed > 0)
        .then(|| sampler.latent_accepted as f64 / sampler.latent_proposed as f64);
    Ok(ChainDraws {
        chain: chain_index,
        n_cols: keys.len(),
        values,
        acceptance,
        latent_acceptance,
        scales_at_burn_in,
        final_scales: sampler.scales.scales.clone(),
        final_state: sampler.state,
    })
}

/// Runs `config.chains` chains, in parallel when a pool is available.
pub fn run_chains(data: &ModelData, priors: &HyperPriorSpec, config: &SamplerConfig) -> Result<PosteriorDraws> {
    config.validate()?;
    let chains = (0..config.chains)
        .into_par_iter()
        .map(|c| run_chain(data, priors, config, c))
        .collect::<Result<Vec<_>>>()?;
    let keys = config.monitors.keys(data);
    Ok(PosteriorDraws {
        names: keys.iter().map(MonitorKey::name).collect(),
        keys,
        chains,
    })
}

/// [`run_chains`] on a dedicated pool of `threads` workers.
pub fn run_chains_with_threads(
    data: &ModelData,
    priors: &HyperPriorSpec,
    config: &SamplerConfig,
    threads: usize,
) -> Result<PosteriorDraws> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Input(format!("thread pool: {e}")))?;
    pool.install(|| run_chains(data, priors, config))
}

/// Timing wrapper used by the command line.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}
