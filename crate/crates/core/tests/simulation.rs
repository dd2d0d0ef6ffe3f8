use calrm_core::demand::StageProbabilities;
use calrm_core::exact::{hindsight_optimum, request_counts, solve_dp, DpOptions};
use calrm_core::fluid::{exf_solution, prf_solution};
use calrm_core::instance::{counterexample, random_small_instance, SmallInstanceLimits};
use calrm_core::policy::{constant_policy, exf_policy, indep_policy, prf_policy, simulate, SimConfig};
use calrm_core::rng::sample_requests;

fn recorded(n: usize, seed: u64) -> SimConfig {
    SimConfig { n_paths: n, seed, record_paths: true }
}

#[test]
fn policies_share_requests_and_demands_under_one_config() {
    let f = counterexample("appE1", &[]).unwrap();
    let probs = StageProbabilities::derive(&f.model);
    let fl = prf_solution(&f.instance, &f.model, &probs).unwrap();
    let ex = exf_solution(&f.instance, &f.model, &probs).unwrap();
    let cfg = recorded(2000, 21);
    let a = simulate(&f.instance, &f.model, &prf_policy(&fl, &f.instance, 1.0).unwrap(), &cfg).unwrap();
    let b = simulate(&f.instance, &f.model, &exf_policy(&ex, &f.instance, 0.6).unwrap(), &cfg).unwrap();
    let c = simulate(&f.instance, &f.model, &constant_policy(&f.instance, 0.0).unwrap(), &cfg).unwrap();
    let (pa, pb, pc) = (a.paths.unwrap(), b.paths.unwrap(), c.paths.unwrap());
    for i in 0..cfg.n_paths {
        assert_eq!(pa[i].requests, pb[i].requests);
        assert_eq!(pa[i].demands, pb[i].demands);
        assert_eq!(pa[i].requests, pc[i].requests);
        let replay = sample_requests(&f.instance, &probs, f.model.initial_prev_demand(), cfg.seed, i as u64);
        assert_eq!(replay.requests, pa[i].requests);
        assert_eq!(replay.demands, pa[i].demands);
    }
    assert_eq!(c.mean, 0.0);
}

#[test]
fn simulated_revenue_never_beats_hindsight_on_its_own_path() {
    for seed in 0..20 {
        let (inst, model) = random_small_instance(seed, &SmallInstanceLimits::default(), seed % 2 == 0).unwrap();
        let probs = StageProbabilities::derive(&model);
        let fl = prf_solution(&inst, &model, &probs).unwrap();
        for pol in [prf_policy(&fl, &inst, 1.0).unwrap(), indep_policy(&fl, &inst, &probs, 1.0).unwrap(), constant_policy(&inst, 1.0).unwrap()] {
            let st = simulate(&inst, &model, &pol, &recorded(200, seed)).unwrap();
            assert_eq!(st.capacity_violations, 0);
            for path in st.paths.unwrap() {
                let best = hindsight_optimum(&inst, &request_counts(&inst, &path.requests));
                assert!(path.revenue <= best + 1e-9);
            }
        }
    }
}

#[test]
fn accepted_units_never_exceed_capacity() {
    let f = counterexample("appG", &[]).unwrap();
    let pol = constant_policy(&f.instance, 1.0).unwrap();
    let st = simulate(&f.instance, &f.model, &pol, &recorded(500, 2)).unwrap();
    for path in st.paths.unwrap() {
        let used = path.accepted.iter().filter(|&&a| a).count();
        assert!(used <= f.instance.capacities()[0] as usize);
    }
}

#[test]
fn prf_policy_stays_below_dp_and_above_quarter_of_bound() {
    let f = counterexample("appF", &[]).unwrap();
    let probs = StageProbabilities::derive(&f.model);
    let fl = prf_solution(&f.instance, &f.model, &probs).unwrap();
    let opt = solve_dp(&f.instance, &f.model, &probs, &DpOptions::default()).unwrap().opt;
    let st = simulate(&f.instance, &f.model, &prf_policy(&fl, &f.instance, 1.0).unwrap(), &SimConfig::new(20_000, 8)).unwrap();
    assert!(st.mean <= opt + 3.0 * st.stderr);
    assert!(st.mean / fl.value >= 0.25);
}

#[test]
fn seeds_change_results() {
    let f = counterexample("appF", &[]).unwrap();
    let pol = constant_policy(&f.instance, 1.0).unwrap();
    let a = simulate(&f.instance, &f.model, &pol, &SimConfig::new(100, 1)).unwrap();
    let b = simulate(&f.instance, &f.model, &pol, &SimConfig::new(100, 2)).unwrap();
    assert_ne!(a.mean, b.mean);
}
