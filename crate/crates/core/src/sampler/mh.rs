//! Random-walk Metropolis primitives and proposal-scale adaptation.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Accepts with probability `min(1, exp(log_ratio))`. Non-finite or NaN
/// ratios reject; a ratio of exactly one always accepts.
#[inline]
pub fn accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    if !(log_ratio > f64::NEG_INFINITY) {
        return false;
    }
    rng.random::<f64>().ln() < log_ratio
}

/// One Gaussian random-walk step on an unconstrained scalar.
///
/// `log_density` must include any log-Jacobian of the transform. Returns the
/// new value, its log density and whether the move was accepted.
pub fn random_walk_step<R, F>(
    current: f64,
    current_lp: f64,
    scale: f64,
    rng: &mut R,
    mut log_density: F,
) -> (f64, f64, bool)
where
    R: Rng + ?Sized,
    F: FnMut(f64) -> f64,
{
    let eps: f64 = StandardNormal.sample(rng);
    let proposal = current + scale * eps;
    let lp = log_density(proposal);
    if accept(lp - current_lp, rng) {
        (proposal, lp, true)
    } else {
        (current, current_lp, false)
    }
}

/// Robbins-Monro style scale adaptation toward a target acceptance rate,
/// with a decaying gain so adaptation settles during burn-in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleAdaptation {
    pub target: f64,
    pub times_adapted: u32,
}

impl ScaleAdaptation {
    pub fn new(target: f64) -> Self {
        Self {
            target,
            times_adapted: 0,
        }
    }

    /// Gain for the current round.
    pub fn gain(&self) -> f64 {
        1.0 / (self.times_adapted as f64 + 3.0).powf(0.8)
    }

    /// New scale given the acceptance rate over the last interval.
    pub fn adapt(&self, scale: f64, rate: f64) -> f64 {
        let s = scale * (10.0 * self.gain() * (rate - self.target)).exp();
        s.clamp(1e-8, 1e4)
    }
}
