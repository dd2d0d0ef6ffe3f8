//! Stage-demand Markov chain and the probabilities derived from it.
//!
//! Indexing convention used throughout the crate: stage index `k` in
//! `0..K` is stage `k+1`; demand index `q` in `0..T` is demand value `q+1`;
//! period index `t` in `0..T` is period `t+1`. The "previous demand" of
//! stage index `k` is the demand of stage index `k-1`, or the fixed initial
//! demand when `k == 0`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DemandModelFile", into = "DemandModelFile")]
pub struct DemandModel {
    stages: usize,
    max_demand: usize,
    /// Demand value (1-based) of the stage before the horizon.
    initial_prev_demand: usize,
    /// `transition[k][q][p]`: probability that stage index `k` has demand
    /// index `p` given previous demand index `q`.
    transition: Vec<Vec<Vec<f64>>>,
}

/// Unvalidated on-disk form of [`DemandModel`].
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct DemandModelFile {
    #[serde(rename = "K")]
    stages: usize,
    #[serde(rename = "T")]
    max_demand: usize,
    initial_prev_demand: usize,
    transition: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<DemandModelFile> for DemandModel {
    type Error = Error;
    fn try_from(f: DemandModelFile) -> Result<Self> {
        DemandModel::new(f.stages, f.max_demand, f.initial_prev_demand, f.transition)
    }
}

impl From<DemandModel> for DemandModelFile {
    fn from(m: DemandModel) -> Self {
        DemandModelFile {
            stages: m.stages,
            max_demand: m.max_demand,
            initial_prev_demand: m.initial_prev_demand,
            transition: m.transition,
        }
    }
}

impl DemandModel {
    /// Validates and builds a model. `initial_prev_demand` is a demand value in `1..=T`.
    pub fn new(
        stages: usize,
        max_demand: usize,
        initial_prev_demand: usize,
        transition: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if stages == 0 || max_demand == 0 {
            return bad(format!("K={stages} and T={max_demand} must both be positive"));
        }
        if !(1..=max_demand).contains(&initial_prev_demand) {
            return bad(format!("initial_prev_demand {initial_prev_demand} not in 1..={max_demand}"));
        }
        if transition.len() != stages {
            return bad(format!("expected {stages} transition matrices, got {}", transition.len()));
        }
        for (k, mat) in transition.iter().enumerate() {
            if mat.len() != max_demand {
                return bad(format!("transition[{k}] has {} rows, expected {max_demand}", mat.len()));
            }
            for (q, row) in mat.iter().enumerate() {
                if row.len() != max_demand {
                    return bad(format!("transition[{k}][{q}] has {} entries, expected {max_demand}", row.len()));
                }
                if row.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                    return bad(format!("transition[{k}][{q}] has a negative or non-finite entry"));
                }
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > TOL {
                    return bad(format!("transition[{k}][{q}] sums to {s}"));
                }
            }
        }
        let model = DemandModel { stages, max_demand, initial_prev_demand, transition };
        if model.min_transition_mass() == 0.0 {
            log::warn!("demand model lacks full support (minimum transition probability is 0)");
        }
        Ok(model)
    }

    /// Model whose every stage draws from `row` regardless of the past.
    pub fn independent(rows: Vec<Vec<f64>>, initial_prev_demand: usize) -> Result<Self> {
        let t = rows.first().map_or(0, Vec::len);
        let transition = rows.into_iter().map(|r| vec![r; t]).collect::<Vec<_>>();
        DemandModel::new(transition.len(), t, initial_prev_demand, transition)
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn max_demand(&self) -> usize {
        self.max_demand
    }

    /// Demand value of the stage before the horizon, in `1..=T`.
    pub fn initial_prev_demand(&self) -> usize {
        self.initial_prev_demand
    }

    pub fn transition(&self, k: usize, q: usize, p: usize) -> f64 {
        self.transition[k][q][p]
    }

    pub fn transition_row(&self, k: usize, q: usize) -> &[f64] {
        &self.transition[k][q]
    }

    /// Smallest transition probability over all stages and rows.
    pub fn min_transition_mass(&self) -> f64 {
        self.transition.iter().flatten().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when each stage's rows coincide within 1e-12.
    pub fn is_independent(&self) -> bool {
        self.transition
            .iter()
            .all(|mat| mat.iter().all(|row| row.iter().zip(&mat[0]).all(|(a, b)| (a - b).abs() <= TOL)))
    }
}

/// Probabilities derived from a [`DemandModel`], flat row-major tables.
#[derive(Debug, Clone, PartialEq)]
pub struct StageProbabilities {
    stages: usize,
    max_demand: usize,
    /// `[k][t][q]`: P{stage k demand reaches period t, previous demand is q}
    w: Vec<f64>,
    /// `[s][q]` for `s` in `0..=K`: law of the demand of stage index `s-1`; row 0 is the initial point mass.
    marginal: Vec<f64>,
    /// `[k][t][q]`: P{demand exceeds t | it reaches t, previous is q}; 0 on null events.
    survival: Vec<f64>,
    eps: f64,
}

impl StageProbabilities {
    pub fn derive(model: &DemandModel) -> Self {
        let (kk, tt) = (model.stages, model.max_demand);
        let mut w = vec![0.0; kk * tt * tt];
        let mut survival = vec![0.0; kk * tt * tt];
        let mut marginal = vec![0.0; (kk + 1) * tt];
        marginal[model.initial_prev_demand - 1] = 1.0;
        let idx = |k: usize, t: usize, q: usize| (k * tt + t) * tt + q;

        for k in 0..kk {
            for q in 0..tt {
                w[idx(k, 0, q)] = marginal[k * tt + q];
                // tail[t] = P{demand index >= t | previous q}
                let row = &model.transition[k][q];
                let mut tail = vec![0.0; tt + 1];
                for p in (0..tt).rev() {
                    tail[p] = tail[p + 1] + row[p];
                }
                for t in 0..tt {
                    let here = w[idx(k, t, q)];
                    let theta = if here > 0.0 && tail[t] > 0.0 { tail[t + 1] / tail[t] } else { 0.0 };
                    survival[idx(k, t, q)] = theta;
                    if t + 1 < tt {
                        w[idx(k, t + 1, q)] = theta * here;
                    }
                }
            }
            // stopping in period q with previous p gives demand index q
            for q in 0..tt {
                let mass: f64 = (0..tt).map(|p| (1.0 - survival[idx(k, q, p)]) * w[idx(k, q, p)]).sum();
                marginal[(k + 1) * tt + q] = mass;
            }
        }
        StageProbabilities { stages: kk, max_demand: tt, w, marginal, survival, eps: model.min_transition_mass() }
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn max_demand(&self) -> usize {
        self.max_demand
    }

    fn idx(&self, k: usize, t: usize, q: usize) -> usize {
        (k * self.max_demand + t) * self.max_demand + q
    }

    /// P{stage `k` demand reaches period `t`, previous demand index is `q`}.
    pub fn w(&self, k: usize, t: usize, q: usize) -> f64 {
        self.w[self.idx(k, t, q)]
    }

    /// Survival probability past period `t` of stage `k` given previous demand `q`.
    pub fn survival(&self, k: usize, t: usize, q: usize) -> f64 {
        self.survival[self.idx(k, t, q)]
    }

    /// P{previous demand of stage `k` has index `q`}.
    pub fn prev_marginal(&self, k: usize, q: usize) -> f64 {
        self.marginal[k * self.max_demand + q]
    }

    /// P{stage `k` demand has index `q`}.
    pub fn marginal(&self, k: usize, q: usize) -> f64 {
        self.marginal[(k + 1) * self.max_demand + q]
    }

    /// P{stage `k` demand reaches period `t`}.
    pub fn reach(&self, k: usize, t: usize) -> f64 {
        (0..self.max_demand).map(|q| self.w(k, t, q)).sum()
    }

    /// Minimum transition probability.
    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// Table of P{stage `l` reaches period `s`, its previous demand is `p` | previous demand of stage `k` is `q`}
/// for all `l < k`, stored as `[l][s][p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalJoint {
    max_demand: usize,
    values: Vec<f64>,
}

impl ConditionalJoint {
    pub fn get(&self, l: usize, s: usize, p: usize) -> f64 {
        self.values[(l * self.max_demand + s) * self.max_demand + p]
    }

    pub fn earlier_stages(&self) -> usize {
        self.values.len() / (self.max_demand * self.max_demand)
    }
}

/// Unnormalized joints `[l][s][p][q]` = P{stage `l` reaches `s`, its previous is `p`, previous of stage `k` is `q`}
/// for every `l < k`, by Chapman-Kolmogorov propagation.
pub fn conditional_joint_all(model: &DemandModel, probs: &StageProbabilities, k: usize) -> Vec<f64> {
    let tt = model.max_demand;
    let mut out = vec![0.0; k * tt * tt * tt];
    // g[r][q] = P{previous of stage k is q | demand of stage l is r}
    let mut g = identity(tt);
    for l in (0..k).rev() {
        if l + 1 < k {
            g = matmul(&model.transition[l + 1], &g, tt);
        }
        let mat = &model.transition[l];
        for p in 0..tt {
            let pp = probs.prev_marginal(l, p);
            if pp == 0.0 {
                continue;
            }
            let mut acc = vec![0.0; tt];
            for s in (0..tt).rev() {
                let m = mat[p][s];
                if m != 0.0 {
                    for q in 0..tt {
                        acc[q] += m * g[s * tt + q];
                    }
                }
                let base = ((l * tt + s) * tt + p) * tt;
                for q in 0..tt {
                    out[base + q] = pp * acc[q];
                }
            }
        }
    }
    out
}

/// Conditional weights for the capacity rows of stage `k` and previous demand `q`.
pub fn conditional_joint(model: &DemandModel, probs: &StageProbabilities, k: usize, q: usize) -> Result<ConditionalJoint> {
    let tt = model.max_demand;
    let denom = probs.prev_marginal(k, q);
    if denom <= 0.0 {
        return Err(Error::ConditioningOnNull { stage: k + 1, demand: q + 1 });
    }
    let all = conditional_joint_all(model, probs, k);
    let values = all.chunks_exact(tt).map(|c| c[q] / denom).collect();
    Ok(ConditionalJoint { max_demand: tt, values })
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn matmul(a: &[Vec<f64>], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for r in 0..n {
            let v = a[i][r];
            if v != 0.0 {
                for j in 0..n {
                    c[i * n + j] += v * b[r * n + j];
                }
            }
        }
    }
    c
}

/// Realized demand values (1-based), one per stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandPath(pub Vec<usize>);

/// Index drawn from `weights` by inverse CDF on `u` in `[0,1)`; skips zero-weight entries.
pub(crate) fn inverse_cdf(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in weights.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Samples one demand path, one uniform draw per stage.
pub fn sample_path<R: Rng + ?Sized>(model: &DemandModel, rng: &mut R) -> DemandPath {
    let mut prev = model.initial_prev_demand - 1;
    let mut d = Vec::with_capacity(model.stages);
    for k in 0..model.stages {
        let u: f64 = rng.random();
        prev = inverse_cdf(&model.transition[k][prev], u);
        d.push(prev + 1);
    }
    DemandPath(d)
}

/// Target law of total demand over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTarget {
    #[serde(rename = "K")]
    pub stages: usize,
    #[serde(rename = "T")]
    pub max_demand: usize,
    /// Probabilities of totals `K, K+1, ..., K*T`.
    pub pmf: Vec<f64>,
}

impl CalibrationTarget {
    pub fn validate(&self) -> Result<()> {
        let (k, t) = (self.stages, self.max_demand);
        if k == 0 || t == 0 {
            return Err(Error::InvalidTarget("K and T must be positive".into()));
        }
        let expected = k * t - k + 1;
        if self.pmf.len() != expected {
            return Err(Error::InvalidTarget(format!("pmf has {} entries, expected {expected}", self.pmf.len())));
        }
        if self.pmf.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidTarget("pmf has a negative or non-finite entry".into()));
        }
        let s: f64 = self.pmf.iter().sum();
        if (s - 1.0).abs() > TOL {
            return Err(Error::InvalidTarget(format!("pmf sums to {s}")));
        }
        Ok(())
    }
}

/// Builds a model whose total demand has exactly the target law.
///
/// A stage's demand is 1 unless the previous stage hit the maximum `T`,
/// in which case it is drawn from a stage-specific law; the initial demand
/// is `T`. Rows conditioned on unreachable totals become point masses at 1.
pub fn calibrate_total_demand(target: &CalibrationTarget) -> Result<DemandModel> {
    target.validate()?;
    let (kk, tt) = (target.stages, target.max_demand);
    let n = target.pmf.len();
    // tail[x] = P{total >= K + x}
    let mut tail = vec![0.0; n + 1];
    for x in (0..n).rev() {
        tail[x] = tail[x + 1] + target.pmf[x];
    }
    let tail_at = |x: usize| if x <= n { tail[x] } else { 0.0 };
    let mut point_one = vec![0.0; tt];
    point_one[0] = 1.0;
    let mut transition = Vec::with_capacity(kk);
    for k in 0..kk {
        // offset of (k)(T-1) + K above the minimum total K
        let base = k * (tt - 1);
        let cond = tail_at(base);
        let law = if cond <= 0.0 {
            point_one.clone()
        } else {
            let mut f: Vec<f64> = (0..tt - 1).map(|l| target.pmf[base + l] / cond).collect();
            f.push(tail_at(base + tt - 1) / cond);
            f
        };
        let mut mat = vec![point_one.clone(); tt];
        mat[tt - 1] = law;
        transition.push(mat);
    }
    DemandModel::new(kk, tt, tt, transition)
}
