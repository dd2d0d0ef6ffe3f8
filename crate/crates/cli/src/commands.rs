use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;

use calrm_core::demand::{calibrate_total_demand, CalibrationTarget, DemandModel, StageProbabilities};
use calrm_core::exact::{offline_bound, solve_dp, DpOptions, OfflineMode};
use calrm_core::experiment::{compare_approximations, run_cell, CellReport};
use calrm_core::fluid::{build_bound, bound_value, exf_solution, prf_solution, BoundKind, MNLChoiceModel};
use calrm_core::instance::{counterexample, generate_hub_spoke, load_instance, save_instance, HubSpokeConfig, NetworkInstance};
use calrm_core::policy::{
    exf_policy, indep_policy, prf_policy, recommended_gamma, AdmissionPolicy, GammaRegime, PolicyKind, SimConfig,
};

use crate::args::{
    BoundsArgs, CalibrateArgs, Cli, DumpLpArgs, ExperimentArgs, GenerateArgs, GeneratorArgs, SimulateArgs, Source, SweepArgs,
};

/// A mistake in the command line that clap cannot see; exits with the validation code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

struct Loaded {
    name: String,
    inst: NetworkInstance,
    model: DemandModel,
    probs: StageProbabilities,
}

fn load(source: &Source) -> Result<Loaded> {
    let (name, inst, model) = if let Some(fixture) = &source.fixture {
        let params = source
            .params
            .iter()
            .map(|p| {
                p.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| usage(format!("--param {p:?} is not NAME=VALUE")))
            })
            .collect::<Result<Vec<_>>>()?;
        let named = counterexample(fixture, &params)?;
        (named.name, named.instance, named.model)
    } else {
        let path = source.instance.as_ref().expect("clap requires --fixture or --instance");
        let (inst, model) = load_instance(path).with_context(|| format!("loading {}", path.display()))?;
        let name = path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
        (name, inst, model)
    };
    let probs = StageProbabilities::derive(&model);
    Ok(Loaded { name, inst, model, probs })
}

fn output(cli: &Cli) -> Result<Box<dyn Write>> {
    Ok(match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn csv_out(cli: &Cli) -> Result<csv::Writer<Box<dyn Write>>> {
    Ok(csv::Writer::from_writer(output(cli)?))
}

fn num(v: f64) -> String {
    v.to_string()
}

fn choice_model(weights: &Option<Vec<f64>>, inst: &NetworkInstance) -> Result<Option<MNLChoiceModel>> {
    match weights {
        None => Ok(None),
        Some(w) if w.len() != inst.num_products() => {
            Err(usage(format!("--mnl-weights has {} entries, instance has {} products", w.len(), inst.num_products())))
        }
        Some(w) if w.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) => Err(usage("--mnl-weights must be finite and nonnegative")),
        Some(w) => Ok(Some(MNLChoiceModel { weights: w.clone() })),
    }
}

pub fn bounds(cli: &Cli, args: &BoundsArgs) -> Result<()> {
    let l = load(&args.source)?;
    let choice = choice_model(&args.mnl_weights, &l.inst)?;
    let names: Vec<&str> = args.bound.iter().chain(&args.oracle).map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(usage("no bound requested"));
    }
    // Reject unknown names before any solve starts.
    for n in &names {
        if !matches!(*n, "dp" | "offline") {
            BoundKind::from_str(n).map_err(usage)?;
        }
    }
    if let Some(path) = &args.solution {
        let sol = prf_solution(&l.inst, &l.model, &l.probs)?;
        std::fs::write(path, sol.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut rows = Vec::with_capacity(names.len());
    for n in &names {
        let start = Instant::now();
        let (value, stderr) = match *n {
            "dp" => (solve_dp(&l.inst, &l.model, &l.probs, &DpOptions::default())?.opt, None),
            "offline" => {
                let mode = match args.paths {
                    Some(paths) => OfflineMode::MonteCarlo { paths, seed: cli.seed },
                    None => OfflineMode::Exact,
                };
                let r = offline_bound(&l.inst, &l.model, &l.probs, mode)?;
                (r.value, r.stderr)
            }
            kind => {
                let kind = BoundKind::from_str(kind).map_err(usage)?;
                (bound_value(kind, &l.inst, &l.model, &l.probs, choice.as_ref())?, None)
            }
        };
        log::info!("{}: {n} = {value}", l.name);
        rows.push([n.to_string(), num(value), stderr.map_or_else(String::new, num), format!("{:.6}", start.elapsed().as_secs_f64())]);
    }
    let mut w = csv_out(cli)?;
    w.write_record(["bound", "value", "stderr", "solve_seconds"])?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_gamma(text: &str, l: &Loaded) -> Result<f64> {
    let regime = match text {
        "auto-asymptotic" => GammaRegime::Asymptotic,
        "auto-constant" => GammaRegime::ConstantFactor,
        g => {
            return g.parse::<f64>().map_err(|_| usage(format!("--gamma {g:?} is neither a number nor an auto mode")));
        }
    };
    Ok(recommended_gamma(&l.inst, &l.model, &l.probs, regime)?)
}

/// Fluid solutions a policy is derived from, solved once per command.
struct Fluids {
    prf: calrm_core::fluid::FluidSolution,
    exf: calrm_core::fluid::ExfSolution,
}

impl Fluids {
    fn solve(l: &Loaded) -> Result<Self> {
        Ok(Fluids { prf: prf_solution(&l.inst, &l.model, &l.probs)?, exf: exf_solution(&l.inst, &l.model, &l.probs)? })
    }

    fn policy(&self, kind: PolicyKind, l: &Loaded, gamma: f64) -> Result<AdmissionPolicy> {
        Ok(match kind {
            PolicyKind::Prf => prf_policy(&self.prf, &l.inst, gamma)?,
            PolicyKind::Indep => indep_policy(&self.prf, &l.inst, &l.probs, gamma)?,
            PolicyKind::Exf => exf_policy(&self.exf, &l.inst, gamma)?,
            PolicyKind::Constant => return Err(usage("policy must be prf, indep or exf")),
        })
    }
}

fn parse_policy(s: &str) -> Result<PolicyKind> {
    match PolicyKind::from_str(s).map_err(usage)? {
        PolicyKind::Constant => Err(usage("policy must be prf, indep or exf")),
        k => Ok(k),
    }
}

fn check_paths(n: usize) -> Result<()> {
    if n == 0 {
        return Err(usage("--paths must be at least 1"));
    }
    Ok(())
}

pub fn simulate(cli: &Cli, args: &SimulateArgs) -> Result<()> {
    let kind = parse_policy(&args.policy)?;
    check_paths(args.paths)?;
    let l = load(&args.source)?;
    let gamma = parse_gamma(&args.gamma, &l)?;
    let fluids = Fluids::solve(&l)?;
    let policy = fluids.policy(kind, &l, gamma)?;
    let stats = simulate_policy(&l, &policy, args.paths, cli.seed)?;
    let mut w = csv_out(cli)?;
    w.write_record(["policy", "gamma", "n_paths", "mean", "stderr", "bound_prf", "bound_exf", "ratio_prf"])?;
    w.write_record([
        kind.to_string(),
        num(gamma),
        stats.n_paths.to_string(),
        num(stats.mean),
        num(stats.stderr),
        num(fluids.prf.value),
        num(fluids.exf.value),
        num(stats.mean / fluids.prf.value),
    ])?;
    w.flush()?;
    Ok(())
}

fn simulate_policy(l: &Loaded, policy: &AdmissionPolicy, paths: usize, seed: u64) -> Result<calrm_core::policy::SimStats> {
    let stats = calrm_core::policy::simulate(&l.inst, &l.model, policy, &SimConfig::new(paths, seed))?;
    if stats.capacity_violations > 0 {
        log::error!("{} paths exceeded a capacity", stats.capacity_violations);
    }
    Ok(stats)
}

enum Cell {
    Generated { stages: usize, rho: f64 },
    Fixture(String),
}

fn parse_cell(s: &str) -> Result<Cell> {
    let (k, rho) = s.split_once(':').ok_or_else(|| usage(format!("cell {s:?} is not STAGES:RHO")))?;
    let stages = k.trim().parse().map_err(|_| usage(format!("cell {s:?}: stage count is not an integer")))?;
    let rho = rho.trim().parse().map_err(|_| usage(format!("cell {s:?}: rho is not a number")))?;
    Ok(Cell::Generated { stages, rho })
}

fn hub_spoke(g: &GeneratorArgs, stages: usize, rho: f64, seed: u64) -> HubSpokeConfig {
    HubSpokeConfig { spoke_count: g.spokes, base_mean: g.mean, cv: g.cv, rho, kappa: g.kappa, beta: g.beta, stages, seed }
}

pub fn experiment(cli: &Cli, args: &ExperimentArgs) -> Result<()> {
    let mut cells = Vec::new();
    for s in args.cells.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        cells.push(parse_cell(s)?);
    }
    cells.extend(args.fixtures.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).map(|s| Cell::Fixture(s.to_string())));
    if cells.is_empty() {
        return Err(usage("experiment needs at least one cell (--cells or --fixtures)"));
    }
    check_paths(args.paths)?;
    let seed = cli.seed;
    let results: Vec<calrm_core::Result<CellReport>> = cells
        .par_iter()
        .map(|cell| match cell {
            Cell::Generated { stages, rho } => run_cell(&hub_spoke(&args.generator, *stages, *rho, seed), args.paths, seed, args.gamma),
            Cell::Fixture(name) => {
                let f = counterexample(name, &[])?;
                compare_approximations(&f.instance, &f.model, args.paths, seed, args.gamma)
            }
        })
        .collect();
    let mut w = csv_out(cli)?;
    w.write_record([
        "cell",
        "name",
        "stages",
        "rho",
        "status",
        "prf_bound",
        "exf_bound",
        "prf_mean",
        "prf_stderr",
        "exf_mean",
        "exf_stderr",
        "prf_ratio",
        "exf_ratio",
        "bound_gap_pct",
        "policy_gap_pct",
        "capacity_violations",
    ])?;
    for (i, (cell, result)) in cells.iter().zip(results).enumerate() {
        let (name, stages, rho) = match cell {
            Cell::Generated { stages, rho } => ("hub-spoke".to_string(), stages.to_string(), num(*rho)),
            Cell::Fixture(n) => (n.clone(), String::new(), String::new()),
        };
        let mut row = vec![(i + 1).to_string(), name];
        match result {
            Ok(r) => {
                row.extend([r.stages.to_string(), r.rho.map_or(rho, num), "ok".to_string()]);
                row.extend(
                    [r.prf_bound, r.exf_bound, r.prf_mean, r.prf_stderr, r.exf_mean, r.exf_stderr, r.prf_ratio, r.exf_ratio, r.bound_gap, r.policy_gap]
                        .map(num),
                );
                row.push(r.capacity_violations.to_string());
            }
            Err(e) => {
                log::warn!("cell {} failed: {e}", i + 1);
                row.extend([stages, rho, format!("error: {e}")]);
                row.extend(std::iter::repeat_n(String::new(), 11));
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_gamma(cli: &Cli, args: &SweepArgs) -> Result<()> {
    let kind = parse_policy(&args.policy)?;
    check_paths(args.paths)?;
    let mut grid: Vec<f64> = Vec::with_capacity(args.grid.len());
    for &g in &args.grid {
        if !(0.0..=1.0).contains(&g) {
            return Err(usage(format!("grid value {g} is outside [0, 1]")));
        }
        if grid.contains(&g) {
            log::warn!("duplicate grid value {g} dropped");
        } else {
            grid.push(g);
        }
    }
    let l = load(&args.source)?;
    let fluids = Fluids::solve(&l)?;
    let mut w = csv_out(cli)?;
    w.write_record(["gamma", "n_paths", "mean", "stderr"])?;
    for g in grid {
        // Same seed for every gamma gives common random numbers.
        let stats = simulate_policy(&l, &fluids.policy(kind, &l, g)?, args.paths, cli.seed)?;
        w.write_record([num(g), stats.n_paths.to_string(), num(stats.mean), num(stats.stderr)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn generate(cli: &Cli, args: &GenerateArgs) -> Result<()> {
    let (inst, model) = generate_hub_spoke(&hub_spoke(&args.generator, args.stages, args.rho, cli.seed))?;
    let mut out = output(cli)?;
    writeln!(out, "{}", save_instance(&inst, &model))?;
    out.flush()?;
    Ok(())
}

pub fn calibrate(cli: &Cli, args: &CalibrateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.target).with_context(|| format!("reading {}", args.target.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: not valid JSON: {e}", args.target.display())))?;
    let mut target = if value.is_array() {
        let pmf: Vec<f64> = serde_json::from_value(value).map_err(|e| usage(format!("pmf must be an array of numbers: {e}")))?;
        match (args.stages, args.max_demand) {
            (Some(k), Some(t)) => CalibrationTarget { stages: k, max_demand: t, pmf },
            _ => return Err(usage("a bare pmf array needs --stages and --max-demand")),
        }
    } else {
        serde_json::from_value::<CalibrationTarget>(value).map_err(|e| usage(format!("malformed target: {e}")))?
    };
    if let Some(k) = args.stages {
        target.stages = k;
    }
    if let Some(t) = args.max_demand {
        target.max_demand = t;
    }
    let model = calibrate_total_demand(&target)?;
    let mut out = output(cli)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&model)?)?;
    out.flush()?;
    Ok(())
}

pub fn dump_lp(cli: &Cli, args: &DumpLpArgs) -> Result<()> {
    let kind = BoundKind::from_str(&args.bound).map_err(usage)?;
    let l = load(&args.source)?;
    let choice = choice_model(&args.mnl_weights, &l.inst)?;
    let lp = build_bound(kind, &l.inst, &l.model, &l.probs, choice.as_ref())?;
    let mut out = output(cli)?;
    calrm_lp::write_mps(&lp, kind.as_str(), &mut out)?;
    out.flush()?;
    Ok(())
}
