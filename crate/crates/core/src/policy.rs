//! Randomized admission policies derived from fluid solutions, and their
//! Monte Carlo evaluation with common random numbers.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::demand::{DemandModel, StageProbabilities};
use crate::error::{Error, Result};
use crate::exact::mean_and_stderr;
use crate::fluid::{BoundKind, ExfSolution, FluidSolution};
use crate::instance::NetworkInstance;
use crate::rng::PathStreams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Prf,
    Indep,
    Exf,
    /// Same acceptance probability for every request.
    Constant,
}

impl PolicyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Prf => "prf",
            PolicyKind::Indep => "indep",
            PolicyKind::Exf => "exf",
            PolicyKind::Constant => "constant",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "prf" => Ok(PolicyKind::Prf),
            "indep" => Ok(PolicyKind::Indep),
            "exf" => Ok(PolicyKind::Exf),
            "constant" => Ok(PolicyKind::Constant),
            _ => Err(format!("unknown policy {s:?}")),
        }
    }
}

/// Acceptance probability per `(k, t, q, j)`; always in `[0, 1]` and zero where no request can arrive.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissionPolicy {
    pub kind: PolicyKind,
    pub gamma: f64,
    stages: usize,
    periods: usize,
    products: usize,
    table: Vec<f64>,
}

impl AdmissionPolicy {
    fn from_fn(kind: PolicyKind, gamma: f64, inst: &NetworkInstance, mut rate: impl FnMut(usize, usize, usize, usize) -> Result<f64>) -> Result<Self> {
        let (kk, tt, nj) = (inst.stages(), inst.periods(), inst.num_products());
        let mut table = Vec::with_capacity(kk * tt * tt * nj);
        for k in 0..kk {
            for t in 0..tt {
                for q in 0..tt {
                    for j in 0..nj {
                        let p = if inst.arrival(k, t, j) == 0.0 { 0.0 } else { rate(k, t, q, j)?.clamp(0.0, 1.0) };
                        table.push(p);
                    }
                }
            }
        }
        Ok(AdmissionPolicy { kind, gamma, stages: kk, periods: tt, products: nj, table })
    }

    /// Probability of accepting a request for `j` in period `t` of stage `k` with previous demand index `q`.
    pub fn p(&self, j: usize, t: usize, k: usize, q: usize) -> f64 {
        self.table[((k * self.periods + t) * self.periods + q) * self.products + j]
    }

    fn check_dims(&self, inst: &NetworkInstance) -> Result<()> {
        if (self.stages, self.periods, self.products) != (inst.stages(), inst.periods(), inst.num_products()) {
            return Err(Error::DimensionMismatch("policy was built for a different instance".into()));
        }
        Ok(())
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    Ok(())
}

fn check_prf(fluid: &FluidSolution, inst: &NetworkInstance) -> Result<()> {
    if !matches!(fluid.kind, BoundKind::PrfReduced | BoundKind::PrfFull) {
        return Err(Error::PreconditionViolated(format!("policy needs a PRF solution, got {}", fluid.kind)));
    }
    let ix = fluid.index;
    if (ix.stages, ix.periods, ix.products) != (inst.stages(), inst.periods(), inst.num_products()) {
        return Err(Error::DimensionMismatch("fluid solution was built for a different instance".into()));
    }
    Ok(())
}

/// Accepts with probability `gamma * x / lambda` for the current previous-stage demand.
pub fn prf_policy(fluid: &FluidSolution, inst: &NetworkInstance, gamma: f64) -> Result<AdmissionPolicy> {
    check_gamma(gamma)?;
    check_prf(fluid, inst)?;
    AdmissionPolicy::from_fn(PolicyKind::Prf, gamma, inst, |k, t, q, j| Ok(gamma * fluid.x(k, t, q, j) / inst.arrival(k, t, j)))
}

/// Averages the PRF acceptance rates over the previous-stage demand law, ignoring the realized value.
pub fn indep_policy(fluid: &FluidSolution, inst: &NetworkInstance, probs: &StageProbabilities, gamma: f64) -> Result<AdmissionPolicy> {
    check_gamma(gamma)?;
    check_prf(fluid, inst)?;
    let tt = inst.periods();
    AdmissionPolicy::from_fn(PolicyKind::Indep, gamma, inst, |k, t, _, j| {
        let x: f64 = (0..tt).map(|q| probs.prev_marginal(k, q) * fluid.x(k, t, q, j)).sum();
        Ok(gamma * x / inst.arrival(k, t, j))
    })
}

/// Stationary per-product probability `gamma * accepted_j / demand_mass_j`.
pub fn exf_policy(exf: &ExfSolution, inst: &NetworkInstance, gamma: f64) -> Result<AdmissionPolicy> {
    check_gamma(gamma)?;
    if exf.accepted.len() != inst.num_products() {
        return Err(Error::DimensionMismatch("EXF solution was built for a different instance".into()));
    }
    let mut rate = Vec::with_capacity(inst.num_products());
    for (j, (&w, &m)) in exf.accepted.iter().zip(&exf.demand_mass).enumerate() {
        rate.push(if m > 0.0 {
            gamma * w / m
        } else if w > 1e-12 {
            return Err(Error::DegenerateDenominator { product: j });
        } else {
            0.0
        });
    }
    AdmissionPolicy::from_fn(PolicyKind::Exf, gamma, inst, |_, _, _, j| Ok(rate[j]))
}

/// Accepts every arriving request with probability `p`.
pub fn constant_policy(inst: &NetworkInstance, p: f64) -> Result<AdmissionPolicy> {
    check_gamma(p)?;
    AdmissionPolicy::from_fn(PolicyKind::Constant, p, inst, |_, _, _, _| Ok(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaRegime {
    /// Large-capacity choice; requires positive minimum transition probability.
    Asymptotic,
    /// `1 / (2L)` with `L` the most resources any product uses.
    ConstantFactor,
}

/// Theoretical thinning parameter for the regime.
///
/// The asymptotic value is `1 - sqrt(4 (c + 3 d (K - 1)) ln c) / c` with
/// `c` the smallest capacity and `d = eps^-6`, clamped to `[0, 1]`.
pub fn recommended_gamma(inst: &NetworkInstance, model: &DemandModel, probs: &StageProbabilities, regime: GammaRegime) -> Result<f64> {
    inst.check_compatible(model)?;
    match regime {
        GammaRegime::ConstantFactor => {
            let l = inst.max_usage();
            if l == 0 {
                return Err(Error::PreconditionViolated("no product uses a resource".into()));
            }
            Ok(1.0 / (2.0 * l as f64))
        }
        GammaRegime::Asymptotic => {
            let eps = probs.eps();
            if eps <= 0.0 {
                return Err(Error::EpsilonZero);
            }
            let c = inst.min_capacity() as f64;
            if c < 2.0 {
                return Err(Error::PreconditionViolated("smallest capacity must be at least 2".into()));
            }
            let delta = eps.powi(-6);
            let k = inst.stages() as f64;
            let g = 1.0 - (4.0 * (c + 3.0 * delta * (k - 1.0)) * c.ln()).sqrt() / c;
            Ok(g.clamp(0.0, 1.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub seed: u64,
    /// Keep per-path revenues and full request records.
    pub record_paths: bool,
}

impl SimConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        SimConfig { n_paths, seed, record_paths: false }
    }
}

/// One simulated path: realized demands (1-based), requested products, acceptance decisions and revenue.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub demands: Vec<usize>,
    pub requests: Vec<usize>,
    pub accepted: Vec<bool>,
    pub revenue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub revenues: Option<Vec<f64>>,
    pub paths: Option<Vec<PathRecord>>,
    /// Accepted requests per product summed over paths.
    pub accepted: Vec<u64>,
    /// Accepts that would have driven a capacity negative; zero unless the simulator is broken.
    pub capacity_violations: u64,
}

struct PathOutcome {
    revenue: f64,
    accepted: Vec<u32>,
    violations: u64,
    record: Option<PathRecord>,
}

fn run_path(
    inst: &NetworkInstance,
    probs: &StageProbabilities,
    policy: &AdmissionPolicy,
    q0: usize,
    seed: u64,
    path: u64,
    record: bool,
) -> PathOutcome {
    let mut s = PathStreams::new(seed, path);
    let mut y: Vec<i64> = inst.capacities().iter().map(|&c| c as i64).collect();
    let mut accepted = vec![0u32; inst.num_products()];
    let mut revenue = 0.0;
    let mut violations = 0;
    let mut rec = record.then(|| PathRecord { demands: Vec::new(), requests: Vec::new(), accepted: Vec::new(), revenue: 0.0 });
    let mut q = q0;
    for k in 0..inst.stages() {
        let mut t = 0;
        loop {
            let j = s.product(inst, k, t);
            let wants = s.accept(policy.p(j, t, k, q));
            let real = Some(j) != inst.null_product();
            let fits = inst.resources_of(j).iter().all(|&i| y[i] >= 1);
            let take = wants && real && fits;
            if take {
                for &i in inst.resources_of(j) {
                    y[i] -= 1;
                    if y[i] < 0 {
                        violations += 1;
                    }
                }
                revenue += inst.revenue(j);
                accepted[j] += 1;
            }
            if let Some(r) = rec.as_mut() {
                r.requests.push(j);
                r.accepted.push(take);
            }
            if !s.survives(probs, k, t, q) {
                break;
            }
            t += 1;
        }
        if let Some(r) = rec.as_mut() {
            r.demands.push(t + 1);
        }
        q = t;
    }
    if let Some(r) = rec.as_mut() {
        r.revenue = revenue;
    }
    PathOutcome { revenue, accepted, violations, record: rec }
}

/// Simulates `cfg.n_paths` independent horizons under `policy`.
///
/// Path `i` draws products, accept coins and survival coins from its own
/// three streams, so results do not depend on the thread count and two
/// policies under the same config see the same requests and demands.
pub fn simulate(inst: &NetworkInstance, model: &DemandModel, policy: &AdmissionPolicy, cfg: &SimConfig) -> Result<SimStats> {
    inst.check_compatible(model)?;
    policy.check_dims(inst)?;
    if cfg.n_paths == 0 {
        return Err(Error::Validation("simulation needs at least one path".into()));
    }
    let probs = StageProbabilities::derive(model);
    let q0 = model.initial_prev_demand() - 1;
    let outcomes: Vec<PathOutcome> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|p| run_path(inst, &probs, policy, q0, cfg.seed, p, cfg.record_paths))
        .collect();

    let revenues: Vec<f64> = outcomes.iter().map(|o| o.revenue).collect();
    let (mean, stderr) = mean_and_stderr(&revenues);
    let mut accepted = vec![0u64; inst.num_products()];
    let mut capacity_violations = 0;
    for o in &outcomes {
        for (a, &n) in accepted.iter_mut().zip(&o.accepted) {
            *a += n as u64;
        }
        capacity_violations += o.violations;
    }
    let (revenues, paths) = if cfg.record_paths {
        (Some(revenues), Some(outcomes.into_iter().map(|o| o.record.expect("recorded")).collect()))
    } else {
        (None, None)
    };
    Ok(SimStats { mean, stderr, n_paths: cfg.n_paths, revenues, paths, accepted, capacity_violations })
}

/// `exp(mu lam^2) - exp(-lam mu) ((1 - mu) + mu exp(lam))`; nonnegative for `mu, lam` in `[0, 1]`.
pub fn bernoulli_mgf_gap(mu: f64, lam: f64) -> f64 {
    (mu * lam * lam).exp() - (-lam * mu).exp() * ((1.0 - mu) + mu * lam.exp())
}

/// Smallest gap over the 21 x 21 grid of step 0.05 on `[0, 1]^2`.
pub fn bernoulli_grid_min_gap() -> f64 {
    let mut worst = f64::INFINITY;
    for a in 0..=20 {
        for b in 0..=20 {
            worst = worst.min(bernoulli_mgf_gap(a as f64 * 0.05, b as f64 * 0.05));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::{exf_solution, prf_solution};
    use crate::instance::counterexample;

    struct Setup {
        inst: NetworkInstance,
        model: DemandModel,
        probs: StageProbabilities,
    }

    fn setup(name: &str) -> Setup {
        let f = counterexample(name, &[]).unwrap();
        let probs = StageProbabilities::derive(&f.model);
        Setup { inst: f.instance, model: f.model, probs }
    }

    #[test]
    fn gamma_range_checked() {
        let s = setup("appF");
        let fl = prf_solution(&s.inst, &s.model, &s.probs).unwrap();
        assert!(matches!(prf_policy(&fl, &s.inst, 1.5), Err(Error::GammaOutOfRange(_))));
        assert!(matches!(prf_policy(&fl, &s.inst, -0.1), Err(Error::GammaOutOfRange(_))));
    }

    #[test]
    fn zero_gamma_earns_nothing() {
        let s = setup("appF");
        let fl = prf_solution(&s.inst, &s.model, &s.probs).unwrap();
        let pol = prf_policy(&fl, &s.inst, 0.0).unwrap();
        let st = simulate(&s.inst, &s.model, &pol, &SimConfig::new(500, 1)).unwrap();
        assert_eq!(st.mean, 0.0);
        assert_eq!(st.stderr, 0.0);
    }

    #[test]
    fn probabilities_bounded_and_zero_without_arrivals() {
        let s = setup("appE1");
        let fl = prf_solution(&s.inst, &s.model, &s.probs).unwrap();
        let pol = prf_policy(&fl, &s.inst, 1.0).unwrap();
        for k in 0..2 {
            for t in 0..2 {
                for q in 0..2 {
                    for j in 0..3 {
                        let p = pol.p(j, t, k, q);
                        assert!((0.0..=1.0).contains(&p));
                        if s.inst.arrival(k, t, j) == 0.0 {
                            assert_eq!(p, 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn indep_equals_prf_for_single_stage() {
        let s = setup("appK1");
        let fl = prf_solution(&s.inst, &s.model, &s.probs).unwrap();
        let a = prf_policy(&fl, &s.inst, 0.7).unwrap();
        let b = indep_policy(&fl, &s.inst, &s.probs, 0.7).unwrap();
        for t in 0..s.inst.periods() {
            assert!((a.p(0, t, 0, 0) - b.p(0, t, 0, 0)).abs() < 1e-12);
        }
    }

    #[test]
    fn exf_policy_on_loose_instance() {
        let s = setup("appN");
        let ex = exf_solution(&s.inst, &s.model, &s.probs).unwrap();
        let pol = exf_policy(&ex, &s.inst, 1.0).unwrap();
        // capacity 9 equals the expected demand 0.75 * 3 + 0.25 * 27
        assert!((ex.demand_mass[0] - 9.0).abs() < 1e-9);
        assert!((pol.p(0, 0, 0, 0) - 1.0).abs() < 1e-9);
        assert!((pol.p(0, 20, 0, 0) - 1.0).abs() < 1e-9);
        let half = exf_policy(&ex, &s.inst, 0.5).unwrap();
        assert!((half.p(0, 5, 0, 0) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn exf_degenerate_denominator() {
        let s = setup("appK2");
        let ex = ExfSolution { value: 1.0, accepted: vec![1.0], demand_mass: vec![0.0] };
        assert!(matches!(exf_policy(&ex, &s.inst, 1.0), Err(Error::DegenerateDenominator { product: 0 })));
    }

    #[test]
    fn always_accept_matches_demand_mass() {
        let s = setup("appK2");
        let inst = NetworkInstance::new(vec![10], s.inst.products().to_vec(), vec![vec![vec![1.0]; 2]; 2], None).unwrap();
        let pol = constant_policy(&inst, 1.0).unwrap();
        let st = simulate(&inst, &s.model, &pol, &SimConfig::new(20_000, 4)).unwrap();
        assert!((st.mean - 3.0).abs() < 3.0 * st.stderr + 1e-12);
        assert_eq!(st.capacity_violations, 0);
    }

    #[test]
    fn simulation_independent_of_thread_count() {
        let s = setup("appE1");
        let fl = prf_solution(&s.inst, &s.model, &s.probs).unwrap();
        let pol = prf_policy(&fl, &s.inst, 1.0).unwrap();
        let cfg = SimConfig { n_paths: 3000, seed: 11, record_paths: true };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| simulate(&s.inst, &s.model, &pol, &cfg).unwrap());
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let b = four.install(|| simulate(&s.inst, &s.model, &pol, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn recommended_gamma_regimes() {
        let s = setup("appF");
        assert_eq!(recommended_gamma(&s.inst, &s.model, &s.probs, GammaRegime::ConstantFactor).unwrap(), 0.5);
        let g = recommended_gamma(&s.inst, &s.model, &s.probs, GammaRegime::Asymptotic).unwrap();
        assert!((0.0..=1.0).contains(&g));
        let e1 = setup("appE1");
        assert!(matches!(recommended_gamma(&e1.inst, &e1.model, &e1.probs, GammaRegime::Asymptotic), Err(Error::EpsilonZero)));
    }

    #[test]
    fn asymptotic_gamma_tends_to_one() {
        use crate::instance::Product;
        let c = 1_000_000_000u32;
        let inst = NetworkInstance::new(vec![c], vec![Product::new(1.0, vec![1])], vec![vec![vec![1.0]]], None).unwrap();
        let model = DemandModel::new(1, 1, 1, vec![vec![vec![1.0]]]).unwrap();
        let probs = StageProbabilities::derive(&model);
        let g = recommended_gamma(&inst, &model, &probs, GammaRegime::Asymptotic).unwrap();
        let cm = c as f64;
        assert!((g - (1.0 - (4.0 * cm.ln() / cm).sqrt())).abs() < 1e-12);
        assert!(g > 0.99);
    }

    #[test]
    fn bernoulli_grid_nonnegative() {
        assert!(bernoulli_grid_min_gap() >= -1e-12);
        assert_eq!(bernoulli_mgf_gap(0.0, 0.7), 0.0);
    }

    #[test]
    fn policy_kind_names() {
        for k in [PolicyKind::Prf, PolicyKind::Indep, PolicyKind::Exf, PolicyKind::Constant] {
            assert_eq!(k.as_str().parse::<PolicyKind>().unwrap(), k);
        }
    }
}
