//! Builders for the fluid upper-bound LPs and extraction of their solutions.
//!
//! All acceptance-variable LPs index variables as `[k][t][q][j]` (stage,
//! period, previous-stage demand, product) or `[k][t][j]` when the
//! previous demand is irrelevant.

use std::fmt;
use std::str::FromStr;

use calrm_lp::{solve_lp, BoundedLP, LPSolution, Relation, Sense, Status};

use crate::demand::{conditional_joint_all, DemandModel, StageProbabilities};
use crate::error::{Error, Result};
use crate::instance::NetworkInstance;

const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    PrfReduced,
    PrfFull,
    Exf,
    Indep,
    NaiveCumulative,
    NaiveUnweighted,
    LagrangianDual,
    LinearVfa,
    Assortment,
}

impl BoundKind {
    pub const ALL: [BoundKind; 9] = [
        BoundKind::PrfReduced,
        BoundKind::PrfFull,
        BoundKind::Exf,
        BoundKind::Indep,
        BoundKind::NaiveCumulative,
        BoundKind::NaiveUnweighted,
        BoundKind::LagrangianDual,
        BoundKind::LinearVfa,
        BoundKind::Assortment,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::PrfReduced => "prf",
            BoundKind::PrfFull => "prf-full",
            BoundKind::Exf => "exf",
            BoundKind::Indep => "indep",
            BoundKind::NaiveCumulative => "naive-cum",
            BoundKind::NaiveUnweighted => "naive-unw",
            BoundKind::LagrangianDual => "lagrangian",
            BoundKind::LinearVfa => "vfa",
            BoundKind::Assortment => "assortment",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown bound {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrfForm {
    /// One capacity row per (resource, previous demand, stage).
    Reduced,
    /// One capacity row per (resource, period, previous demand, stage).
    Full,
}

/// Position of variable `(k, t, q, j)` in a PRF LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrfIndex {
    pub stages: usize,
    pub periods: usize,
    pub products: usize,
}

impl PrfIndex {
    pub fn var(&self, k: usize, t: usize, q: usize, j: usize) -> usize {
        ((k * self.periods + t) * self.periods + q) * self.products + j
    }

    pub fn len(&self) -> usize {
        self.stages * self.periods * self.periods * self.products
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Optimal PRF value with its acceptance rates `x[k][t][q][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidSolution {
    pub kind: BoundKind,
    pub value: f64,
    pub index: PrfIndex,
    pub x: Vec<f64>,
}

impl FluidSolution {
    pub fn x(&self, k: usize, t: usize, q: usize, j: usize) -> f64 {
        self.x[self.index.var(k, t, q, j)]
    }

    /// CSV of `k,t,q,j,x` with 1-based stage, period, demand and 0-based product.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,t,q,j,x\n");
        let ix = self.index;
        for k in 0..ix.stages {
            for t in 0..ix.periods {
                for q in 0..ix.periods {
                    for j in 0..ix.products {
                        let v = self.x(k, t, q, j);
                        if v != 0.0 {
                            s.push_str(&format!("{},{},{},{},{}\n", k + 1, t + 1, q + 1, j, v));
                        }
                    }
                }
            }
        }
        s
    }
}

/// Optimal expected-demand LP: accepted amount per product and its demand mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ExfSolution {
    pub value: f64,
    pub accepted: Vec<f64>,
    pub demand_mass: Vec<f64>,
}

/// Multinomial-logit choice with preference weights per product; no-purchase weight 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MNLChoiceModel {
    pub weights: Vec<f64>,
}

impl MNLChoiceModel {
    /// Choice probability of product `j` when `offered` (a bitmask over `products`) is shown.
    pub fn probability(&self, products: &[usize], offered: usize, j: usize) -> f64 {
        let denom: f64 = 1.0
            + products
                .iter()
                .enumerate()
                .filter(|(b, _)| offered >> b & 1 == 1)
                .map(|(_, &p)| self.weights[p])
                .sum::<f64>();
        self.weights[j] / denom
    }
}

pub const MAX_ASSORTMENT_PRODUCTS: usize = 10;

fn check_dims(inst: &NetworkInstance, model: &DemandModel, probs: &StageProbabilities) -> Result<()> {
    inst.check_compatible(model)?;
    if probs.stages() != model.stages() || probs.max_demand() != model.max_demand() {
        return Err(Error::DimensionMismatch("stage probabilities do not match the demand model".into()));
    }
    Ok(())
}

/// Rows of capacity coefficients for earlier stages: `[i][l][s][p]` weight shared by all products using `i`.
fn prf_lp(inst: &NetworkInstance, model: &DemandModel, probs: &StageProbabilities, form: PrfForm) -> Result<(BoundedLP, PrfIndex)> {
    check_dims(inst, model, probs)?;
    let (kk, tt, nj) = (inst.stages(), inst.periods(), inst.num_products());
    let ix = PrfIndex { stages: kk, periods: tt, products: nj };
    let mut lp = BoundedLP::new(Sense::Maximize);
    for k in 0..kk {
        for t in 0..tt {
            for q in 0..tt {
                let reachable = probs.prev_marginal(k, q) > 0.0;
                let w = probs.w(k, t, q);
                for j in 0..nj {
                    let lam = inst.arrival(k, t, j);
                    let hi = if reachable { lam } else { 0.0 };
                    lp.add_var(inst.revenue(j) * w, 0.0, hi);
                }
            }
        }
    }
    let users: Vec<Vec<usize>> =
        (0..inst.num_resources()).map(|i| (0..nj).filter(|&j| inst.uses(i, j)).collect()).collect();

    for k in 0..kk {
        let joint = conditional_joint_all(model, probs, k);
        for q in 0..tt {
            let denom = probs.prev_marginal(k, q);
            if denom <= 0.0 {
                continue;
            }
            for (i, js) in users.iter().enumerate() {
                if js.is_empty() {
                    continue;
                }
                let mut earlier = Vec::new();
                for l in 0..k {
                    for s in 0..tt {
                        for p in 0..tt {
                            let c = joint[((l * tt + s) * tt + p) * tt + q] / denom;
                            if c > 0.0 {
                                earlier.extend(js.iter().map(|&j| (ix.var(l, s, p, j), c)));
                            }
                        }
                    }
                }
                let cap = inst.capacities()[i] as f64;
                match form {
                    PrfForm::Reduced => {
                        let mut row = earlier;
                        for s in 0..tt {
                            row.extend(js.iter().map(|&j| (ix.var(k, s, q, j), 1.0)));
                        }
                        lp.add_row(row, Relation::Le, cap);
                    }
                    PrfForm::Full => {
                        for t in 0..tt {
                            if probs.w(k, t, q) <= 0.0 {
                                continue;
                            }
                            let mut row = earlier.clone();
                            for s in 0..=t {
                                row.extend(js.iter().map(|&j| (ix.var(k, s, q, j), 1.0)));
                            }
                            lp.add_row(row, Relation::Le, cap);
                        }
                    }
                }
            }
        }
    }
    Ok((lp, ix))
}

/// The stage-aware fluid LP with acceptance variables conditioned on the previous stage's demand.
pub fn build_prf(inst: &NetworkInstance, model: &DemandModel, probs: &StageProbabilities, form: PrfForm) -> Result<(BoundedLP, PrfIndex)> {
    prf_lp(inst, model, probs, form)
}

fn solve_optimal(lp: &BoundedLP) -> Result<LPSolution> {
    let sol = solve_lp(lp)?;
    match sol.status {
        Status::Optimal => Ok(sol),
        s => Err(Error::UnexpectedStatus(s)),
    }
}

/// Solves the PRF LP in the given form.
pub fn prf_solution_with_form(
    inst: &NetworkInstance,
    model: &DemandModel,
    probs: &StageProbabilities,
    form: PrfForm,
) -> Result<FluidSolution> {
    let (lp, index) = build_prf(inst, model, probs, form)?;
    let sol = solve_optimal(&lp)?;
    let kind = if form == PrfForm::Reduced { BoundKind::PrfReduced } else { BoundKind::PrfFull };
    Ok(FluidSolution { kind, value: sol.objective, index, x: sol.primal })
}

/// Solves the reduced PRF LP.
pub fn prf_solution(inst: &NetworkInstance, model: &DemandModel, probs: &StageProbabilities) -> Result<FluidSolution> {
    prf_solution_with_form(inst, model, probs, PrfForm::Reduced)
}

/// Expected demand of each product over the horizon.
pub fn demand_mass(inst: &NetworkInstance, probs: &StageProbabilities) -> Vec<f64> {
    let mut mass = vec![0.0; inst.num_products()];
    for k in 0..inst.stages() {
        for t in 0..inst.periods() {
            let r = probs.reach(k, t);
            for (j, m) in mass.iter_mut().enumerate() {
                *m += r * inst.arrival(k, t, j);
            }
        }
    }
    mass
}

/// LP that only sees each product's expected demand.
pub fn build_exf(inst: &NetworkInstance, model: &DemandModel, probs: &StageProbabilities) -> Result<BoundedLP> {
    check_dims(inst, model, probs)?;
    let mut lp = BoundedLP::new(Sense::Maximize);
    for (j, m) in demand_mass(inst, probs).into_iter().enumerate() {
        lp.add_var(inst.revenue(j), 0.0, m);
    }
    for i in 0..inst.num_resources() {
        let row: Vec<(usize, f64)> = (0..inst.num_products()).filter(|&j| inst.uses(i, j)).map(|j| (j, 1.0)).collect();
        if !row.is_empty() {
            lp.add_row(row, Relation::Le, inst.capacities()[i] as f64);
        }
    }
    Ok(lp)
}

pub fn exf_solution(inst: &NetworkInstance, model: &DemandModel, probs: &StageProbabilities) -> Result<ExfSolution> {
    let lp = build_exf(inst, model, probs)?;
    let sol = solve_optimal(&lp)?;
    Ok(ExfSolution { value: sol.objective, accepted: sol.primal, demand_mass: lp.upper })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaiveVariant {
    /// Every stage up to the current one weighted by its reach probability.
    Cumulative,
    /// Every stage up to the current one with unit weight.
    Unweighted,
}

fn independent_lp(
    inst: &NetworkInstance,
    model: &DemandModel,
    probs: &StageProbabilities,
    own_weighted: bool,
    earlier_weighted: bool,
) -> Result<BoundedLP> {
    check_dims(inst, model, probs)?;
    if !model.is_independent() {
        return Err(Error::PreconditionViolated("stage demands are not independent".into()));
    }
    let (kk, tt, nj) = (inst.stages(), inst.periods(), inst.num_products());
    let var = |k: usize, t: usize, j: usize| (k * tt + t) * nj + j;
    let mut lp = BoundedLP::new(Sense::Maximize);
    for k in 0..kk {
        for t in 0..tt {
            let r = probs.reach(k, t);
            for j in 0..nj {
                lp.add_var(inst.revenue(j) * r, 0.0, inst.arrival(k, t, j));
            }
        }
    }
    for k in 0..kk {
        for i in 0..inst.num_resources() {
            let js: Vec<usize> = (0..nj).filter(|&j| inst.uses(i, j)).collect();
            if js.is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for l in 0..=k {
                let weighted = if l == k { own_weighted } else { earlier_weighted };
                for t in 0..tt {
                    let c = if weighted { probs.reach(l, t) } else { 1.0 };
                    row.extend(js.iter().map(|&j| (var(l, t, j), c)));
                }
            }
            lp.add_row(row, Relation::Le, inst.capacities()[i] as f64);
        }
    }
    Ok(lp)
}

/// PRF LP specialized to independent stages, with previous-demand index dropped.
pub fn build_indep(inst: &NetworkInstance, model: &DemandModel, probs: &StageProbabilities) -> Result<BoundedLP> {
    independent_lp(inst, model, probs, false, true)
}

/// Independent-demand LP with the capacity rows replaced by a naive variant.
pub fn build_naive(inst: &NetworkInstance, model: &DemandModel, probs: &StageProbabilities, variant: NaiveVariant) -> Result<BoundedLP> {
    match variant {
        NaiveVariant::Cumulative => independent_lp(inst, model, probs, true, true),
        NaiveVariant::Unweighted => independent_lp(inst, model, probs, false, false),
    }
}

/// Block layout shared by the two minimization LPs: one entry per `(k, t, q)`.
struct StateIndex {
    periods: usize,
}

impl StateIndex {
    fn state(&self, k: usize, t: usize, q: usize) -> usize {
        (k * self.periods + t) * self.periods + q
    }
}

/// Minimization LP equivalent to relaxing capacity into per-state resource prices.
///
/// Variables: resource prices `alpha[i][k][t][q]` and value offsets
/// `beta[k][t][q]` (free), price increments `mu >= 0`, product margins
/// `eta[j][k][t][q] >= 0`.
pub fn build_lagrangian(inst: &NetworkInstance, model: &DemandModel, probs: &StageProbabilities) -> Result<BoundedLP> {
    check_dims(inst, model, probs)?;
    let (kk, tt, nl, nj) = (inst.stages(), inst.periods(), inst.num_resources(), inst.num_products());
    let si = StateIndex { periods: tt };
    let ns = kk * tt * tt;
    let mut lp = BoundedLP::new(Sense::Minimize);
    let alpha0 = lp.num_vars();
    for _ in 0..nl * ns {
        lp.add_var(0.0, -INF, INF);
    }
    let beta0 = lp.num_vars();
    for _ in 0..ns {
        lp.add_var(0.0, -INF, INF);
    }
    let mu0 = lp.num_vars();
    for _ in 0..nl * ns {
        lp.add_var(0.0, 0.0, INF);
    }
    let eta0 = lp.num_vars();
    for _ in 0..nj * ns {
        lp.add_var(0.0, 0.0, INF);
    }
    let alpha = |i: usize, s: usize| alpha0 + i * ns + s;
    let mu = |i: usize, s: usize| mu0 + i * ns + s;
    let eta = |j: usize, s: usize| eta0 + j * ns + s;
    let beta = |s: usize| beta0 + s;

    let q0 = model.initial_prev_demand() - 1;
    let start = si.state(0, 0, q0);
    for i in 0..nl {
        lp.objective[alpha(i, start)] = inst.capacities()[i] as f64;
    }
    lp.objective[beta(start)] = 1.0;

    for k in 0..kk {
        for t in 0..tt {
            for q in 0..tt {
                let s = si.state(k, t, q);
                let theta = probs.survival(k, t, q);
                let cont = (theta > 0.0 && t + 1 < tt).then(|| si.state(k, t + 1, q));
                let next = (theta < 1.0 && k + 1 < kk).then(|| si.state(k + 1, 0, t));
                for i in 0..nl {
                    let mut row = vec![(alpha(i, s), 1.0), (mu(i, s), -1.0)];
                    if let Some(c) = cont {
                        row.push((alpha(i, c), -theta));
                    }
                    if let Some(n) = next {
                        row.push((alpha(i, n), -(1.0 - theta)));
                    }
                    lp.add_row(row, Relation::Eq, 0.0);
                }
                let mut row = vec![(beta(s), 1.0)];
                for j in 0..nj {
                    row.push((eta(j, s), -inst.arrival(k, t, j)));
                }
                if let Some(c) = cont {
                    row.push((beta(c), -theta));
                }
                if let Some(n) = next {
                    row.push((beta(n), -(1.0 - theta)));
                }
                lp.add_row(row, Relation::Eq, 0.0);
                for j in 0..nj {
                    let mut row = vec![(eta(j, s), 1.0)];
                    row.extend(inst.resources_of(j).iter().map(|&i| (alpha(i, s), 1.0)));
                    lp.add_row(row, Relation::Ge, inst.revenue(j));
                }
            }
        }
    }
    Ok(lp)
}

/// Minimization LP over value functions affine in remaining capacity, with
/// plus-parts linearized by nonnegative auxiliaries `eta[j]` and `zeta[i]`.
pub fn build_linear_vfa(inst: &NetworkInstance, model: &DemandModel, probs: &StageProbabilities) -> Result<BoundedLP> {
    check_dims(inst, model, probs)?;
    let (kk, tt, nl, nj) = (inst.stages(), inst.periods(), inst.num_resources(), inst.num_products());
    let si = StateIndex { periods: tt };
    let ns = kk * tt * tt;
    let mut lp = BoundedLP::new(Sense::Minimize);
    let alpha0 = lp.num_vars();
    for _ in 0..nl * ns {
        lp.add_var(0.0, -INF, INF);
    }
    let beta0 = lp.num_vars();
    for _ in 0..ns {
        lp.add_var(0.0, -INF, INF);
    }
    let eta0 = lp.num_vars();
    for _ in 0..nj * ns {
        lp.add_var(0.0, 0.0, INF);
    }
    let zeta0 = lp.num_vars();
    for _ in 0..nl * ns {
        lp.add_var(0.0, 0.0, INF);
    }
    let alpha = |i: usize, s: usize| alpha0 + i * ns + s;
    let beta = |s: usize| beta0 + s;
    let eta = |j: usize, s: usize| eta0 + j * ns + s;
    let zeta = |i: usize, s: usize| zeta0 + i * ns + s;

    let q0 = model.initial_prev_demand() - 1;
    let start = si.state(0, 0, q0);
    for i in 0..nl {
        lp.objective[alpha(i, start)] = inst.capacities()[i] as f64;
    }
    lp.objective[beta(start)] = 1.0;

    for k in 0..kk {
        for t in 0..tt {
            for q in 0..tt {
                let s = si.state(k, t, q);
                let theta = probs.survival(k, t, q);
                let cont = (theta > 0.0 && t + 1 < tt).then(|| si.state(k, t + 1, q));
                let next = (theta < 1.0 && k + 1 < kk).then(|| si.state(k + 1, 0, t));
                // future price of resource i, as (variable, weight) terms
                let future = |i: usize| {
                    let mut v = Vec::with_capacity(2);
                    if let Some(c) = cont {
                        v.push((alpha(i, c), theta));
                    }
                    if let Some(n) = next {
                        v.push((alpha(i, n), 1.0 - theta));
                    }
                    v
                };
                for j in 0..nj {
                    let mut row = vec![(eta(j, s), 1.0)];
                    for &i in inst.resources_of(j) {
                        row.extend(future(i));
                    }
                    lp.add_row(row, Relation::Ge, inst.revenue(j));
                }
                for i in 0..nl {
                    let mut row = vec![(zeta(i, s), 1.0), (alpha(i, s), 1.0)];
                    row.extend(future(i).into_iter().map(|(v, w)| (v, -w)));
                    lp.add_row(row, Relation::Ge, 0.0);
                }
                let mut row = vec![(beta(s), 1.0)];
                if let Some(c) = cont {
                    row.push((beta(c), -theta));
                }
                if let Some(n) = next {
                    row.push((beta(n), -(1.0 - theta)));
                }
                for j in 0..nj {
                    row.push((eta(j, s), -inst.arrival(k, t, j)));
                }
                for i in 0..nl {
                    row.push((zeta(i, s), -(inst.capacities()[i] as f64)));
                }
                lp.add_row(row, Relation::Ge, 0.0);
            }
        }
    }
    Ok(lp)
}

/// Fluid LP over offered assortments under MNL choice, capacity rows in reduced form.
///
/// Variables `x[k][t][q][S]` for every subset `S` of the non-null products
/// (bitmask over their order); each reachable `(k, q)` block sums to one
/// per period.
pub fn build_assortment(
    inst: &NetworkInstance,
    model: &DemandModel,
    probs: &StageProbabilities,
    choice: &MNLChoiceModel,
) -> Result<BoundedLP> {
    check_dims(inst, model, probs)?;
    let products: Vec<usize> = (0..inst.num_products()).filter(|&j| Some(j) != inst.null_product()).collect();
    if products.len() > MAX_ASSORTMENT_PRODUCTS {
        return Err(Error::TooManyProducts { got: products.len(), max: MAX_ASSORTMENT_PRODUCTS });
    }
    if choice.weights.len() != inst.num_products() {
        return Err(Error::DimensionMismatch(format!(
            "{} choice weights for {} products",
            choice.weights.len(),
            inst.num_products()
        )));
    }
    let (kk, tt, nl) = (inst.stages(), inst.periods(), inst.num_resources());
    let nsets = 1usize << products.len();
    let var = |k: usize, t: usize, q: usize, s: usize| ((k * tt + t) * tt + q) * nsets + s;
    // choice-weighted revenue and per-resource consumption of each set, per (k, t)
    let phi = |_k: usize, _t: usize, set: usize, b: usize| {
        if set >> b & 1 == 1 {
            choice.probability(&products, set, products[b])
        } else {
            0.0
        }
    };
    let set_revenue = |k: usize, t: usize, set: usize| -> f64 {
        (0..products.len()).map(|b| phi(k, t, set, b) * inst.revenue(products[b])).sum()
    };
    let set_usage = |k: usize, t: usize, set: usize, i: usize| -> f64 {
        (0..products.len()).filter(|&b| inst.uses(i, products[b])).map(|b| phi(k, t, set, b)).sum()
    };

    let mut lp = BoundedLP::new(Sense::Maximize);
    for k in 0..kk {
        for t in 0..tt {
            for q in 0..tt {
                let reachable = probs.prev_marginal(k, q) > 0.0;
                let w = probs.w(k, t, q);
                for set in 0..nsets {
                    let hi = if reachable { INF } else { 0.0 };
                    lp.add_var(set_revenue(k, t, set) * w, 0.0, hi);
                }
            }
        }
    }
    for k in 0..kk {
        for q in 0..tt {
            if probs.prev_marginal(k, q) <= 0.0 {
                continue;
            }
            for t in 0..tt {
                lp.add_row((0..nsets).map(|s| (var(k, t, q, s), 1.0)).collect(), Relation::Eq, 1.0);
            }
        }
    }
    for k in 0..kk {
        let joint = conditional_joint_all(model, probs, k);
        for q in 0..tt {
            let denom = probs.prev_marginal(k, q);
            if denom <= 0.0 {
                continue;
            }
            for i in 0..nl {
                let mut row = Vec::new();
                for l in 0..k {
                    for s in 0..tt {
                        for p in 0..tt {
                            let c = joint[((l * tt + s) * tt + p) * tt + q] / denom;
                            if c > 0.0 {
                                for set in 1..nsets {
                                    row.push((var(l, s, p, set), c * set_usage(l, s, set, i)));
                                }
                            }
                        }
                    }
                }
                for s in 0..tt {
                    for set in 1..nsets {
                        row.push((var(k, s, q, set), set_usage(k, s, set, i)));
                    }
                }
                lp.add_row(row, Relation::Le, inst.capacities()[i] as f64);
            }
        }
    }
    Ok(lp)
}

/// Builds the LP of `kind`. Assortment requires `choice`.
pub fn build_bound(
    kind: BoundKind,
    inst: &NetworkInstance,
    model: &DemandModel,
    probs: &StageProbabilities,
    choice: Option<&MNLChoiceModel>,
) -> Result<BoundedLP> {
    match kind {
        BoundKind::PrfReduced => Ok(build_prf(inst, model, probs, PrfForm::Reduced)?.0),
        BoundKind::PrfFull => Ok(build_prf(inst, model, probs, PrfForm::Full)?.0),
        BoundKind::Exf => build_exf(inst, model, probs),
        BoundKind::Indep => build_indep(inst, model, probs),
        BoundKind::NaiveCumulative => build_naive(inst, model, probs, NaiveVariant::Cumulative),
        BoundKind::NaiveUnweighted => build_naive(inst, model, probs, NaiveVariant::Unweighted),
        BoundKind::LagrangianDual => build_lagrangian(inst, model, probs),
        BoundKind::LinearVfa => build_linear_vfa(inst, model, probs),
        BoundKind::Assortment => {
            let default;
            let choice = match choice {
                Some(c) => c,
                None => {
                    default = MNLChoiceModel { weights: vec![1.0; inst.num_products()] };
                    &default
                }
            };
            build_assortment(inst, model, probs, choice)
        }
    }
}

/// Optimal value of the LP of `kind`; assortment defaults to unit MNL weights.
pub fn bound_value(
    kind: BoundKind,
    inst: &NetworkInstance,
    model: &DemandModel,
    probs: &StageProbabilities,
    choice: Option<&MNLChoiceModel>,
) -> Result<f64> {
    let lp = build_bound(kind, inst, model, probs, choice)?;
    Ok(solve_optimal(&lp)?.objective)
}
