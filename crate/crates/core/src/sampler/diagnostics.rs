//! Split-R-hat and autocorrelation-based effective sample size.

use serde::{Deserialize, Serialize};

use super::PosteriorDraws;
use crate::error::{Error, Result};

/// Minimum retained draws per chain for the diagnostics table.
pub const MIN_DRAWS: usize = 100;

/// R-hat above this marks a quantity as unconverged.
pub const RHAT_THRESHOLD: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityDiagnostics {
    pub name: String,
    pub ess: f64,
    /// `None` with a single chain.
    pub rhat: Option<f64>,
    pub flagged: bool,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Biased autocovariance at `lag`.
fn autocovariance(x: &[f64], m: f64, lag: usize) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for k in 0..n - lag {
        s += (x[k] - m) * (x[k + lag] - m);
    }
    s / n as f64
}

/// Split-R-hat over equal-length chains (trimmed to the shortest). Odd
/// chains drop their middle draw. `NaN` when the within-chain variance is 0.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    let half = n / 2;
    if half < 2 {
        return f64::NAN;
    }
    let mut pieces: Vec<&[f64]> = Vec::with_capacity(2 * chains.len());
    for c in chains {
        pieces.push(&c[..half]);
        pieces.push(&c[n - half..n]);
    }
    let means: Vec<f64> = pieces.iter().map(|p| mean(p)).collect();
    let w = pieces.iter().map(|p| sample_variance(p)).sum::<f64>() / pieces.len() as f64;
    let b = half as f64 * sample_variance(&means);
    if !(w > 0.0) {
        return f64::NAN;
    }
    let var_plus = (half as f64 - 1.0) / half as f64 * w + b / half as f64;
    (var_plus / w).sqrt()
}

/// Effective sample size from Geyer's initial monotone sequence of summed
/// autocorrelation pairs, combined across chains.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len();
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    if m == 0 || n < 4 {
        return f64::NAN;
    }
    let chains: Vec<&[f64]> = chains.iter().map(|c| &c[..n]).collect();
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let acov0: Vec<f64> = chains
        .iter()
        .zip(&means)
        .map(|(c, &mu)| autocovariance(c, mu, 0))
        .collect();
    let nf = n as f64;
    let w = acov0.iter().map(|a| a * nf / (nf - 1.0)).sum::<f64>() / m as f64;
    let mut var_plus = w * (nf - 1.0) / nf;
    if m > 1 {
        var_plus += sample_variance(&means);
    }
    if !(var_plus > 0.0) {
        return f64::NAN;
    }
    let rho = |lag: usize| -> f64 {
        if lag == 0 {
            return 1.0;
        }
        let mean_acov = chains
            .iter()
            .zip(&means)
            .map(|(c, &mu)| autocovariance(c, mu, lag))
            .sum::<f64>()
            / m as f64;
        1.0 - (w - mean_acov) / var_plus
    };

    let mut sum_pairs = 0.0;
    let mut prev_pair = f64::INFINITY;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        sum_pairs += pair;
        prev_pair = pair;
        lag += 2;
    }
    let tau = (-1.0 + 2.0 * sum_pairs).max(1.0 / (m * n) as f64);
    let total = (m * n) as f64;
    (total / tau).min(total * total.log10())
}

/// ESS and split-R-hat for every monitored scalar.
pub fn diagnostics(draws: &PosteriorDraws) -> Result<Vec<QuantityDiagnostics>> {
    let min = draws.chains.iter().map(|c| c.n_draws()).min().unwrap_or(0);
    if draws.chains.is_empty() || min < MIN_DRAWS {
        return Err(Error::Input(format!(
            "diagnostics need at least {MIN_DRAWS} draws per chain, got {min}"
        )));
    }
    let multi = draws.chains.len() > 1;
    Ok((0..draws.names.len())
        .map(|col| {
            let chains: Vec<Vec<f64>> = draws.chains.iter().map(|c| c.column(col)).collect();
            let ess = effective_sample_size(&chains);
            let rhat = multi.then(|| split_rhat(&chains));
            let flagged = !ess.is_finite() || rhat.is_some_and(|r| !(r <= RHAT_THRESHOLD));
            QuantityDiagnostics {
                name: draws.names[col].clone(),
                ess,
                rhat,
                flagged,
            }
        })
        .collect())
}
