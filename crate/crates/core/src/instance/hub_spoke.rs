use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, LogNormal};

use super::{NetworkInstance, Product};
use crate::demand::{DemandModel, StageProbabilities};
use crate::error::{Error, Result};

/// Parameters of the hub-and-spoke airline network generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubSpokeConfig {
    pub spoke_count: usize,
    /// Long-run mean stage demand; also the initial previous-stage demand.
    pub base_mean: usize,
    /// Coefficient of variation of a stage demand.
    pub cv: f64,
    /// Weight of the previous stage's demand in the next stage's mean.
    pub rho: f64,
    /// High-fare to low-fare revenue multiplier.
    pub kappa: f64,
    /// Expected load divided by capacity.
    pub beta: f64,
    pub stages: usize,
    pub seed: u64,
}

impl Default for HubSpokeConfig {
    fn default() -> Self {
        HubSpokeConfig { spoke_count: 3, base_mean: 100, cv: 0.3, rho: 0.5, kappa: 8.0, beta: 1.6, stages: 3, seed: 0 }
    }
}

impl HubSpokeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, message: &str| {
            Err(Error::ParamOutOfRange { name: name.into(), message: message.into() })
        };
        if !(0.0..1.0).contains(&self.rho) {
            return bad("rho", "must lie in [0, 1)");
        }
        if self.base_mean < 2 {
            return bad("base_mean", "must be at least 2");
        }
        if !(self.beta > 0.0) {
            return bad("beta", "must be positive");
        }
        if !(self.cv > 0.0) || !self.cv.is_finite() {
            return bad("cv", "must be positive");
        }
        if !(self.kappa >= 0.0) {
            return bad("kappa", "must be nonnegative");
        }
        if self.spoke_count == 0 {
            return bad("spoke_count", "must be positive");
        }
        if self.stages == 0 {
            return bad("stages", "must be positive");
        }
        Ok(())
    }

    /// Global demand cap: mean plus three standard deviations at the base mean.
    pub fn max_demand(&self) -> usize {
        ((1.0 + 3.0 * self.cv) * self.base_mean as f64 - 1e-9).ceil() as usize
    }
}

/// Law of `ceil(X)` truncated to `1..=t_max`, `X` log-normal with the given mean and standard deviation.
fn rounded_lognormal_row(mean: f64, sd: f64, t_max: usize) -> Vec<f64> {
    let s2 = (1.0 + (sd / mean).powi(2)).ln();
    let dist = LogNormal::new(mean.ln() - s2 / 2.0, s2.sqrt()).expect("positive log-normal parameters");
    let mut row = Vec::with_capacity(t_max);
    let mut prev = 0.0;
    for d in 1..t_max {
        let c = dist.cdf(d as f64);
        row.push(c - prev);
        prev = c;
    }
    row.push(1.0 - prev);
    row
}

/// Builds a hub-and-spoke instance with Markov stage demands. Deterministic in `cfg.seed`.
///
/// Locations: index 0 is the hub at the center of a 100 x 100 square, spokes
/// are uniform on the square. Resource `2s` is the hub-to-spoke-`s` leg and
/// `2s+1` the reverse leg. Products enumerate ordered location pairs, each
/// with a low fare (index `2p`) and a high fare (index `2p+1`).
pub fn generate_hub_spoke(cfg: &HubSpokeConfig) -> Result<(NetworkInstance, DemandModel)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (kk, tt) = (cfg.stages, cfg.max_demand());
    let m = cfg.base_mean as f64;

    let mut loc = vec![(50.0, 50.0)];
    for _ in 0..cfg.spoke_count {
        let x: f64 = rng.random::<f64>() * 100.0;
        let y: f64 = rng.random::<f64>() * 100.0;
        loc.push((x, y));
    }
    let n_loc = loc.len();
    let n_res = 2 * cfg.spoke_count;
    let out_leg = |s: usize| 2 * (s - 1);
    let in_leg = |s: usize| 2 * (s - 1) + 1;

    let pairs: Vec<(usize, usize)> =
        (0..n_loc).flat_map(|f| (0..n_loc).filter(move |&g| g != f).map(move |g| (f, g))).collect();
    let zeta: Vec<f64> = pairs.iter().map(|_| rng.random::<f64>()).collect();
    let zsum: f64 = zeta.iter().sum();
    let horizon = kk * tt;
    let (lo_tau, hi_tau) = (horizon.div_ceil(2), (2 * horizon).div_ceil(3));
    let tau: Vec<usize> = pairs.iter().map(|_| rng.random_range(lo_tau..=hi_tau)).collect();

    let mut products = Vec::with_capacity(2 * pairs.len());
    for &(f, g) in &pairs {
        let mut usage = vec![0u8; n_res];
        if f != 0 {
            usage[in_leg(f)] = 1;
        }
        if g != 0 {
            usage[out_leg(g)] = 1;
        }
        let dist = ((loc[f].0 - loc[g].0).powi(2) + (loc[f].1 - loc[g].1).powi(2)).sqrt();
        products.push(Product::new(dist, usage.clone()));
        products.push(Product::new(cfg.kappa * dist, usage));
    }

    let h = horizon as f64;
    let mut arrivals = vec![vec![vec![0.0; products.len()]; tt]; kk];
    for (k, stage) in arrivals.iter_mut().enumerate() {
        for (t, row) in stage.iter_mut().enumerate() {
            let global = k * tt + t + 1;
            let low_shape = (h + 1.0 - global as f64) / h;
            for (p, _) in pairs.iter().enumerate() {
                let high_shape = global.saturating_sub(tau[p]) as f64 / (horizon - tau[p]) as f64;
                let share = zeta[p] / zsum;
                let total = low_shape + high_shape;
                row[2 * p] = share * low_shape / total;
                row[2 * p + 1] = share * high_shape / total;
            }
        }
    }

    let rows: Vec<Vec<f64>> = (1..=tt)
        .map(|q| {
            let mean = cfg.rho * q as f64 + (1.0 - cfg.rho) * m;
            rounded_lognormal_row(mean, cfg.cv * mean, tt)
        })
        .collect();
    let model = DemandModel::new(kk, tt, cfg.base_mean.min(tt), vec![rows; kk])?;

    let probs = StageProbabilities::derive(&model);
    let mut load = vec![0.0; n_res];
    for k in 0..kk {
        for t in 0..tt {
            let reach = probs.reach(k, t);
            for (j, prod) in products.iter().enumerate() {
                let mass = reach * arrivals[k][t][j];
                for (i, &a) in prod.usage.iter().enumerate() {
                    if a == 1 {
                        load[i] += mass;
                    }
                }
            }
        }
    }
    let capacities = load.iter().map(|&xi| ((xi / cfg.beta).ceil() as u32).max(1)).collect();
    let inst = NetworkInstance::new(capacities, products, arrivals, None)?;
    Ok((inst, model))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64) -> HubSpokeConfig {
        HubSpokeConfig { base_mean: 10, rho: 0.2, stages: 3, seed, ..Default::default() }
    }

    #[test]
    fn three_spokes_give_six_legs_and_24_products() {
        let (inst, model) = generate_hub_spoke(&cfg(1)).unwrap();
        assert_eq!(inst.num_resources(), 6);
        assert_eq!(inst.num_products(), 24);
        assert_eq!(model.max_demand(), 19);
        assert_eq!(inst.max_usage(), 2);
    }

    #[test]
    fn regeneration_is_identical() {
        assert_eq!(generate_hub_spoke(&cfg(9)).unwrap(), generate_hub_spoke(&cfg(9)).unwrap());
        assert_ne!(generate_hub_spoke(&cfg(9)).unwrap().0, generate_hub_spoke(&cfg(10)).unwrap().0);
    }

    #[test]
    fn capacities_cover_scaled_load() {
        let c = cfg(3);
        let (inst, model) = generate_hub_spoke(&c).unwrap();
        let probs = StageProbabilities::derive(&model);
        for i in 0..inst.num_resources() {
            let mut xi = 0.0;
            for k in 0..inst.stages() {
                for t in 0..inst.periods() {
                    for j in 0..inst.num_products() {
                        if inst.uses(i, j) {
                            xi += probs.reach(k, t) * inst.arrival(k, t, j);
                        }
                    }
                }
            }
            let cap = inst.capacities()[i] as f64;
            assert!(cap >= 1.0);
            assert!(xi / cap <= c.beta + 1.0);
        }
    }

    #[test]
    fn high_fares_are_kappa_times_low_fares() {
        let (inst, _) = generate_hub_spoke(&cfg(4)).unwrap();
        for p in 0..12 {
            let (lo, hi) = (inst.revenue(2 * p), inst.revenue(2 * p + 1));
            assert!((hi - 8.0 * lo).abs() < 1e-9);
            assert!(lo > 0.0);
        }
    }

    #[test]
    fn lognormal_row_matches_moments_before_truncation() {
        let row = rounded_lognormal_row(50.0, 15.0, 400);
        let mean: f64 = row.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum();
        // ceiling adds about one half
        assert!((mean - 50.5).abs() < 0.1, "{mean}");
    }

    #[test]
    fn invalid_rho_rejected() {
        let c = HubSpokeConfig { rho: 1.0, ..cfg(0) };
        assert!(generate_hub_spoke(&c).is_err());
    }
}
