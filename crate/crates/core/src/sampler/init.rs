use crate::model::special::logit;
use crate::model::{CellStatus, ModelData, ModelState};

/// Logit hazards clamp for the pooled starting values.
const HAZARD_CLAMP: f64 = 5.0;

/// Statewide empirical hazard for each delay `0..D`, from fully reported
/// onset days: reports at delay `d` over cases still unreported before `d`.
pub fn pooled_hazards(data: &ModelData) -> Vec<f64> {
    let dims = data.dims;
    let mut num = vec![0u64; dims.d];
    let mut den = vec![0u64; dims.d];
    for i in 0..dims.n {
        for t in 0..dims.t {
            if data.status(t) != CellStatus::Complete {
                continue;
            }
            let mut remaining = data.s(i, t);
            for d in 0..dims.d {
                let z = data.z(i, t, d);
                num[d] += z;
                den[d] += remaining;
                remaining -= z;
            }
        }
    }
    num.iter()
        .zip(&den)
        .map(|(&k, &n)| if n == 0 { 0.5 } else { k as f64 / n as f64 })
        .collect()
}

/// Deterministic starting point built from the observed counts.
pub fn initialize(data: &ModelData) -> ModelState {
    let dims = data.dims;
    let mut s = ModelState::zeros(dims);
    let hazards = pooled_hazards(data);
    let logits: Vec<f64> = hazards
        .iter()
        .map(|&h| logit(h).clamp(-HAZARD_CLAMP, HAZARD_CLAMP))
        .collect();
    s.beta.clone_from(&logits);
    for k in 0..s.psi.len() {
        s.psi[k] = logits[k % dims.d];
    }
    // Cumulative reported fraction by observation depth.
    let mut cumulative = Vec::with_capacity(dims.d);
    let mut unreported = 1.0;
    for &h in &hazards {
        unreported *= 1.0 - h;
        cumulative.push(1.0 - unreported);
    }

    for i in 0..dims.n {
        let log_pop = data.offsets[i];
        for t in 0..dims.t {
            let k = dims.it(i, t);
            let obs = data.s(i, t);
            s.alpha[k] = (obs as f64 + 1.0).ln() - log_pop;
            if data.status(t) == CellStatus::ForcedMissing && t > 0 {
                s.alpha[k] = s.alpha[k - 1];
            }
            s.y[k] = match data.status(t) {
                CellStatus::Complete => obs,
                CellStatus::Partial { depth } => {
                    let frac = cumulative[depth].max(0.05);
                    obs.max((obs as f64 / frac).round() as u64)
                }
                CellStatus::ForcedMissing => {
                    // Nothing observed; start from the previous day's estimate.
                    if t > 0 {
                        s.y[k - 1]
                    } else {
                        0
                    }
                }
            };
        }
    }
    for tau2 in [
        &mut s.tau2_alpha,
        &mut s.tau2_delta,
        &mut s.tau2_d,
        &mut s.tau2_eta,
        &mut s.tau2_psi,
        &mut s.tau2_xi,
    ] {
        *tau2 = 0.1;
    }
    s.rho_delta = 0.5;
    s.rho_psi = 0.5;
    s.phi = vec![10.0; dims.d];
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AnalysisWindow, CountyGraph, ReportingTriangle};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn window() -> AnalysisWindow {
        AnalysisWindow::new("2020-09-15".parse().unwrap(), 30, 5).unwrap()
    }

    #[test]
    fn zero_data() {
        let g = CountyGraph::rook_grid(1, 2, |k| 10 + 90 * k as u64).unwrap();
        let data = ModelData::new(&ReportingTriangle::zeros(2, window()), &g).unwrap();
        let s = initialize(&data);
        for i in 0..2 {
            for t in 0..30 {
                let k = s.dims.it(i, t);
                assert!((s.alpha[k] - (1.0 / g.population(i) as f64).ln()).abs() < 1e-12);
                assert_eq!(s.y[k], 0);
            }
        }
        assert!(s.delta.iter().all(|&v| v == 0.0));
        assert!(s.psi.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn latent_totals_respect_reports() {
        let g = CountyGraph::rook_grid(2, 2, |_| 1000).unwrap();
        let w = window();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut counts = vec![0; 4 * 30 * 6];
            for i in 0..4 {
                for t in 0..30 {
                    for d in 0..6 {
                        if w.is_observed(t, d) {
                            counts[(i * 30 + t) * 6 + d] = rng.random_range(0..15);
                        }
                    }
                }
            }
            let tri = ReportingTriangle::from_counts(4, w, counts).unwrap();
            let data = ModelData::new(&tri, &g).unwrap();
            let s = initialize(&data);
            s.validate(&data).unwrap();
            for i in 0..4 {
                for t in 0..25 {
                    assert_eq!(s.y[s.dims.it(i, t)], data.s(i, t));
                }
            }
            assert!(s.psi.iter().all(|p| p.abs() <= HAZARD_CLAMP));
        }
    }
}
