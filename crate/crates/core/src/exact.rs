//! Exact oracles for small instances: the optimal dynamic program and the
//! offline bound that sees every request before deciding.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::demand::{DemandModel, StageProbabilities};
use crate::error::{Error, Result};
use crate::instance::NetworkInstance;
use crate::rng::sample_requests;

pub const DEFAULT_STATE_CAP: u128 = 50_000_000;
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpOptions {
    /// Largest admissible `K * T * T * prod(c_i + 1)`.
    pub state_cap: u128,
    pub keep_table: bool,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions { state_cap: DEFAULT_STATE_CAP, keep_table: false }
    }
}

/// Remaining capacity encoded in mixed radix: digit `i` has base `c_i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct CapacityIndex {
    bases: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl CapacityIndex {
    fn new(capacities: &[u32]) -> Self {
        let bases: Vec<usize> = capacities.iter().map(|&c| c as usize + 1).collect();
        let mut strides = Vec::with_capacity(bases.len());
        let mut size = 1usize;
        for &b in &bases {
            strides.push(size);
            size *= b;
        }
        CapacityIndex { bases, strides, size }
    }

    fn encode(&self, y: &[u32]) -> usize {
        y.iter().zip(&self.strides).map(|(&v, &s)| v as usize * s).sum()
    }

    fn digit(&self, idx: usize, i: usize) -> usize {
        idx / self.strides[i] % self.bases[i]
    }
}

/// Value function `J[k][t][q](y)` for every state.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    periods: usize,
    index: CapacityIndex,
    values: Vec<f64>,
}

impl ValueTable {
    /// Optimal expected revenue from the start of period `t` of stage `k`
    /// with previous demand index `q` and remaining capacity `y`.
    pub fn get(&self, k: usize, t: usize, q: usize, y: &[u32]) -> f64 {
        let block = (k * self.periods + t) * self.periods + q;
        self.values[block * self.index.size + self.index.encode(y)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DPResult {
    pub opt: f64,
    pub states: u128,
    pub table: Option<ValueTable>,
}

fn state_count(inst: &NetworkInstance) -> u128 {
    let caps: u128 = inst.capacities().iter().map(|&c| c as u128 + 1).product();
    (inst.stages() * inst.periods() * inst.periods()) as u128 * caps
}

/// Backward induction over `(k, t)` with acceptance decided per product.
pub fn solve_dp(inst: &NetworkInstance, model: &DemandModel, probs: &StageProbabilities, opts: &DpOptions) -> Result<DPResult> {
    inst.check_compatible(model)?;
    let states = state_count(inst);
    if states > opts.state_cap {
        return Err(Error::StateSpaceTooLarge { required: states, cap: opts.state_cap });
    }
    let (kk, tt, nj) = (inst.stages(), inst.periods(), inst.num_products());
    let index = CapacityIndex::new(inst.capacities());
    let ny = index.size;
    let delta: Vec<usize> = (0..nj).map(|j| inst.resources_of(j).iter().map(|&i| index.strides[i]).sum()).collect();
    // feasible[j][y]: every resource product j uses has a unit left
    let feasible: Vec<Vec<bool>> = (0..nj)
        .map(|j| (0..ny).map(|y| inst.resources_of(j).iter().all(|&i| index.digit(y, i) >= 1)).collect())
        .collect();

    let mut table = opts.keep_table.then(|| vec![0.0; kk * tt * tt * ny]);
    // next[q'][y] = value at the start of the following stage
    let mut next = vec![0.0; tt * ny];
    let mut cont = vec![0.0; ny];
    for k in (0..kk).rev() {
        let mut start = vec![0.0; tt * ny];
        for q in 0..tt {
            if probs.prev_marginal(k, q) == 0.0 {
                continue;
            }
            let mut cur = vec![0.0; ny];
            for t in (0..tt).rev() {
                let theta = probs.survival(k, t, q);
                let stop = &next[t * ny..(t + 1) * ny];
                for y in 0..ny {
                    let later = if k + 1 < kk { (1.0 - theta) * stop[y] } else { 0.0 };
                    cont[y] = theta * cur[y] + later;
                }
                for y in 0..ny {
                    let mut v = 0.0;
                    for j in 0..nj {
                        let lam = inst.arrival(k, t, j);
                        if lam == 0.0 {
                            continue;
                        }
                        let reject = cont[y];
                        let accept = if feasible[j][y] { inst.revenue(j) + cont[y - delta[j]] } else { f64::NEG_INFINITY };
                        v += lam * reject.max(accept);
                    }
                    cur[y] = v;
                }
                if let Some(tab) = table.as_mut() {
                    let block = (k * tt + t) * tt + q;
                    tab[block * ny..(block + 1) * ny].copy_from_slice(&cur);
                }
            }
            start[q * ny..(q + 1) * ny].copy_from_slice(&cur);
        }
        next = start;
    }
    let q0 = model.initial_prev_demand() - 1;
    let opt = next[q0 * ny + ny - 1];
    let table = table.map(|values| ValueTable { periods: tt, index, values });
    Ok(DPResult { opt, states, table })
}

/// Best revenue from accepting at most `counts[j]` requests of each product within capacity.
///
/// Depth-first branch and bound over products in descending revenue order.
pub fn hindsight_optimum(inst: &NetworkInstance, counts: &[u32]) -> f64 {
    let mut items: Vec<usize> = (0..inst.num_products())
        .filter(|&j| counts[j] > 0 && inst.revenue(j) > 0.0 && !inst.resources_of(j).is_empty())
        .collect();
    items.sort_by(|&a, &b| inst.revenue(b).total_cmp(&inst.revenue(a)));
    let mut search = Hindsight { inst, counts, items: &items, best: 0.0 };
    let mut y: Vec<u32> = inst.capacities().to_vec();
    search.dfs(0, 0.0, &mut y);
    search.best
}

struct Hindsight<'a> {
    inst: &'a NetworkInstance,
    counts: &'a [u32],
    items: &'a [usize],
    best: f64,
}

impl Hindsight<'_> {
    /// Each remaining unit is charged to its tightest resource; per resource
    /// only the most valuable units fitting in what is left can be accepted.
    fn upper_bound(&self, from: usize, y: &[u32]) -> f64 {
        let mut room: Vec<u32> = y.to_vec();
        let mut ub = 0.0;
        for &j in &self.items[from..] {
            let res = self.inst.resources_of(j);
            let &i = res.iter().min_by_key(|&&i| y[i]).expect("item uses a resource");
            let take = self.counts[j].min(room[i]);
            room[i] -= take;
            ub += take as f64 * self.inst.revenue(j);
        }
        ub
    }

    fn dfs(&mut self, pos: usize, value: f64, y: &mut [u32]) {
        if value > self.best {
            self.best = value;
        }
        if pos == self.items.len() || value + self.upper_bound(pos, y) <= self.best + 1e-12 {
            return;
        }
        let j = self.items[pos];
        let res = self.inst.resources_of(j);
        let max_z = res.iter().map(|&i| y[i]).min().unwrap_or(0).min(self.counts[j]);
        for &i in res {
            y[i] -= max_z;
        }
        for z in (0..=max_z).rev() {
            self.dfs(pos + 1, value + z as f64 * self.inst.revenue(j), y);
            if z > 0 {
                for &i in res {
                    y[i] += 1;
                }
            }
        }
    }
}

/// Number of requests of each product in a request sequence.
pub fn request_counts(inst: &NetworkInstance, requests: &[usize]) -> Vec<u32> {
    let mut counts = vec![0u32; inst.num_products()];
    for &j in requests {
        counts[j] += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OfflineMode {
    /// Enumerates every realization of demands and requests.
    Exact,
    /// Averages over sampled paths drawn from the simulation streams.
    MonteCarlo { paths: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineResult {
    pub value: f64,
    pub mode: OfflineMode,
    /// Standard error of the sampled mean; `None` in exact mode.
    pub stderr: Option<f64>,
}

/// Expected hindsight optimum, enumerated exactly or sampled.
pub fn offline_bound(inst: &NetworkInstance, model: &DemandModel, probs: &StageProbabilities, mode: OfflineMode) -> Result<OfflineResult> {
    inst.check_compatible(model)?;
    match mode {
        OfflineMode::Exact => {
            let value = OfflineEnumeration::new(inst, probs).run(model.initial_prev_demand() - 1, DEFAULT_ENUMERATION_CAP)?;
            Ok(OfflineResult { value, mode, stderr: None })
        }
        OfflineMode::MonteCarlo { paths, seed } => {
            if paths == 0 {
                return Err(Error::Validation("offline sampling needs at least one path".into()));
            }
            let q0 = model.initial_prev_demand();
            let values: Vec<f64> = (0..paths as u64)
                .into_par_iter()
                .map(|p| {
                    let r = sample_requests(inst, probs, q0, seed, p);
                    hindsight_optimum(inst, &request_counts(inst, &r.requests))
                })
                .collect();
            let (mean, stderr) = mean_and_stderr(&values);
            Ok(OfflineResult { value: mean, mode, stderr: Some(stderr) })
        }
    }
}

/// Sample mean and standard error (sample standard deviation over `sqrt(n)`).
pub(crate) fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

struct OfflineEnumeration<'a> {
    inst: &'a NetworkInstance,
    probs: &'a StageProbabilities,
    /// Per `(k, t)`: request outcomes as (product or `None` for a worthless request, probability).
    branches: Vec<Vec<(Option<usize>, f64)>>,
    memo: HashMap<Vec<u32>, f64>,
    counts: Vec<u32>,
}

impl<'a> OfflineEnumeration<'a> {
    fn new(inst: &'a NetworkInstance, probs: &'a StageProbabilities) -> Self {
        let mut branches = Vec::with_capacity(inst.stages() * inst.periods());
        for k in 0..inst.stages() {
            for t in 0..inst.periods() {
                let mut b = Vec::new();
                let mut worthless = 0.0;
                for j in 0..inst.num_products() {
                    let lam = inst.arrival(k, t, j);
                    if lam == 0.0 {
                        continue;
                    }
                    if inst.revenue(j) > 0.0 {
                        b.push((Some(j), lam));
                    } else {
                        worthless += lam;
                    }
                }
                if worthless > 0.0 {
                    b.push((None, worthless));
                }
                branches.push(b);
            }
        }
        OfflineEnumeration { inst, probs, branches, memo: HashMap::new(), counts: vec![0; inst.num_products()] }
    }

    fn leaves(&self, q0: usize) -> u128 {
        let (kk, tt) = (self.inst.stages(), self.inst.periods());
        let mut memo: HashMap<(usize, usize, usize), u128> = HashMap::new();
        fn go(e: &OfflineEnumeration, memo: &mut HashMap<(usize, usize, usize), u128>, kk: usize, tt: usize, k: usize, t: usize, q: usize) -> u128 {
            if let Some(&v) = memo.get(&(k, t, q)) {
                return v;
            }
            let theta = e.probs.survival(k, t, q);
            let mut below = 0u128;
            if theta > 0.0 && t + 1 < tt {
                below = below.saturating_add(go(e, memo, kk, tt, k, t + 1, q));
            }
            if theta < 1.0 {
                below = below.saturating_add(if k + 1 < kk { go(e, memo, kk, tt, k + 1, 0, t) } else { 1 });
            }
            let v = below.saturating_mul(e.branches[k * tt + t].len() as u128);
            memo.insert((k, t, q), v);
            v
        }
        go(self, &mut memo, kk, tt, 0, 0, q0)
    }

    fn run(mut self, q0: usize, cap: u128) -> Result<f64> {
        let required = self.leaves(q0);
        if required > cap {
            return Err(Error::EnumerationTooLarge { required, cap });
        }
        Ok(self.visit(0, 0, q0))
    }

    /// Expected hindsight optimum conditional on the requests seen so far.
    fn visit(&mut self, k: usize, t: usize, q: usize) -> f64 {
        let (kk, tt) = (self.inst.stages(), self.inst.periods());
        let theta = self.probs.survival(k, t, q);
        let mut total = 0.0;
        for b in 0..self.branches[k * tt + t].len() {
            let (j, p) = self.branches[k * tt + t][b];
            if let Some(j) = j {
                self.counts[j] += 1;
            }
            let mut v = 0.0;
            if theta > 0.0 && t + 1 < tt {
                v += theta * self.visit(k, t + 1, q);
            }
            if theta < 1.0 {
                let after = if k + 1 < kk { self.visit(k + 1, 0, t) } else { self.leaf() };
                v += (1.0 - theta) * after;
            }
            total += p * v;
            if let Some(j) = j {
                self.counts[j] -= 1;
            }
        }
        total
    }

    fn leaf(&mut self) -> f64 {
        if let Some(&v) = self.memo.get(&self.counts) {
            return v;
        }
        let v = hindsight_optimum(self.inst, &self.counts);
        self.memo.insert(self.counts.clone(), v);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{counterexample, Product};

    fn dp(name: &str, params: &[(&str, &str)]) -> f64 {
        let params: Vec<(String, String)> = params.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        let f = counterexample(name, &params).unwrap();
        let probs = StageProbabilities::derive(&f.model);
        solve_dp(&f.instance, &f.model, &probs, &DpOptions::default()).unwrap().opt
    }

    fn offline(name: &str) -> f64 {
        let f = counterexample(name, &[]).unwrap();
        let probs = StageProbabilities::derive(&f.model);
        offline_bound(&f.instance, &f.model, &probs, OfflineMode::Exact).unwrap().value
    }

    #[test]
    fn dp_reference_values() {
        assert!((dp("appG", &[("C", "8")]) - 8.0).abs() < 1e-9);
        assert!((dp("appN", &[("alpha", "3")]) - 4.5).abs() < 1e-9);
        assert!((dp("appF", &[("K", "8")]) - 3.453125).abs() < 1e-9);
        assert!((dp("appK1", &[("alpha", "2")]) - 3.5).abs() < 1e-9);
        assert!((dp("appK2", &[]) - 2.75).abs() < 1e-9);
    }

    #[test]
    fn offline_reference_values() {
        assert!((offline("appE1") - 1.375).abs() < 1e-9);
        assert!((offline("appE2") - 1.75).abs() < 1e-9);
    }

    #[test]
    fn state_cap_is_enforced() {
        let f = counterexample("appN", &[("alpha".into(), "3".into())]).unwrap();
        let probs = StageProbabilities::derive(&f.model);
        let opts = DpOptions { state_cap: 100, ..Default::default() };
        match solve_dp(&f.instance, &f.model, &probs, &opts) {
            Err(Error::StateSpaceTooLarge { required, cap }) => {
                assert_eq!(required, 27 * 27 * 10);
                assert_eq!(cap, 100);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn value_table_start_matches_opt() {
        let f = counterexample("appK2", &[]).unwrap();
        let probs = StageProbabilities::derive(&f.model);
        let r = solve_dp(&f.instance, &f.model, &probs, &DpOptions { keep_table: true, ..Default::default() }).unwrap();
        let tab = r.table.unwrap();
        assert_eq!(tab.get(0, 0, 0, &[3]), r.opt);
        assert_eq!(tab.get(1, 0, 1, &[0]), 0.0);
        // one unit left, last stage of length one or two: always sells one
        assert!((tab.get(1, 0, 0, &[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hindsight_two_resources() {
        // product 0 uses both legs, products 1 and 2 one leg each
        let inst = NetworkInstance::new(
            vec![1, 1],
            vec![Product::new(3.0, vec![1, 1]), Product::new(2.0, vec![1, 0]), Product::new(2.0, vec![0, 1])],
            vec![vec![vec![1.0, 0.0, 0.0]]],
            None,
        )
        .unwrap();
        assert_eq!(hindsight_optimum(&inst, &[1, 1, 1]), 4.0);
        assert_eq!(hindsight_optimum(&inst, &[1, 1, 0]), 3.0);
        assert_eq!(hindsight_optimum(&inst, &[0, 0, 0]), 0.0);
    }

    #[test]
    fn ample_capacity_offline_equals_demand_mass() {
        let f = counterexample("appK2", &[]).unwrap();
        let inst = NetworkInstance::new(vec![10], f.instance.products().to_vec(), vec![vec![vec![1.0]; 2]; 2], None).unwrap();
        let probs = StageProbabilities::derive(&f.model);
        let v = offline_bound(&inst, &f.model, &probs, OfflineMode::Exact).unwrap().value;
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_offline_is_close_to_exact() {
        let f = counterexample("appE1", &[]).unwrap();
        let probs = StageProbabilities::derive(&f.model);
        let r = offline_bound(&f.instance, &f.model, &probs, OfflineMode::MonteCarlo { paths: 20_000, seed: 5 }).unwrap();
        assert!((r.value - 1.375).abs() < 4.0 * r.stderr.unwrap());
    }

    #[test]
    fn enumeration_cap() {
        // eight coin-flip periods give 256 request sequences
        let f = counterexample("appF", &[]).unwrap();
        let probs = StageProbabilities::derive(&f.model);
        assert_eq!(OfflineEnumeration::new(&f.instance, &probs).leaves(0), 256);
        let e = OfflineEnumeration::new(&f.instance, &probs);
        assert!(matches!(e.run(0, 10), Err(Error::EnumerationTooLarge { required: 256, .. })));
    }
}
