//! Hub-and-spoke experiment cells comparing the stage-aware and the
//! expected-demand fluid approximations.

use serde::Serialize;

use crate::demand::{DemandModel, StageProbabilities};
use crate::error::Result;
use crate::fluid::{exf_solution, prf_solution};
use crate::instance::{generate_hub_spoke, HubSpokeConfig, NetworkInstance};
use crate::policy::{exf_policy, prf_policy, simulate, SimConfig};

/// One row of an experiment: both bounds, both policies under common random numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub stages: usize,
    /// Demand persistence of a generated cell; `None` for a given instance.
    pub rho: Option<f64>,
    pub prf_bound: f64,
    pub prf_mean: f64,
    pub prf_stderr: f64,
    /// PRF policy mean over PRF bound.
    pub prf_ratio: f64,
    pub exf_bound: f64,
    pub exf_mean: f64,
    pub exf_stderr: f64,
    pub exf_ratio: f64,
    /// `(EXF - PRF) / EXF * 100` on the bounds.
    pub bound_gap: f64,
    /// `(PRF - EXF) / EXF * 100` on the policy means.
    pub policy_gap: f64,
    /// Summed over both simulations; zero unless the simulator is broken.
    pub capacity_violations: u64,
}

impl CellReport {
    /// Standard error of `prf_ratio`, treating the bound as exact.
    pub fn prf_ratio_stderr(&self) -> f64 {
        self.prf_stderr / self.prf_bound
    }
}

/// Generates the instance for `gen` and compares both approximations on it.
pub fn run_cell(gen: &HubSpokeConfig, n_paths: usize, seed: u64, gamma: f64) -> Result<CellReport> {
    let (inst, model) = generate_hub_spoke(gen)?;
    let mut report = compare_approximations(&inst, &model, n_paths, seed, gamma)?;
    report.rho = Some(gen.rho);
    Ok(report)
}

/// Solves both fluid LPs and simulates both policies with thinning `gamma` on the same paths.
pub fn compare_approximations(inst: &NetworkInstance, model: &DemandModel, n_paths: usize, seed: u64, gamma: f64) -> Result<CellReport> {
    let probs = StageProbabilities::derive(&model);
    let prf = prf_solution(inst, model, &probs)?;
    let exf = exf_solution(inst, model, &probs)?;
    let cfg = SimConfig::new(n_paths, seed);
    let a = simulate(inst, model, &prf_policy(&prf, inst, gamma)?, &cfg)?;
    let b = simulate(inst, model, &exf_policy(&exf, inst, gamma)?, &cfg)?;
    Ok(CellReport {
        stages: inst.stages(),
        rho: None,
        prf_bound: prf.value,
        prf_mean: a.mean,
        prf_stderr: a.stderr,
        prf_ratio: a.mean / prf.value,
        exf_bound: exf.value,
        exf_mean: b.mean,
        exf_stderr: b.stderr,
        exf_ratio: b.mean / exf.value,
        bound_gap: (exf.value - prf.value) / exf.value * 100.0,
        policy_gap: (a.mean - b.mean) / b.mean * 100.0,
        capacity_violations: a.capacity_violations + b.capacity_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cell_is_deterministic_and_ordered() {
        let gen = HubSpokeConfig { spoke_count: 2, base_mean: 4, stages: 2, rho: 0.5, seed: 1, ..Default::default() };
        let a = run_cell(&gen, 300, 9, 1.0).unwrap();
        assert_eq!(a, run_cell(&gen, 300, 9, 1.0).unwrap());
        assert!(a.prf_bound <= a.exf_bound + 1e-6);
        assert!(a.bound_gap >= -1e-6);
        assert!((a.prf_ratio - a.prf_mean / a.prf_bound).abs() < 1e-15);
    }
}
