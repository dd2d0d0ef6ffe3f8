use calrm_core::demand::StageProbabilities;
use calrm_core::exact::{offline_bound, solve_dp, DpOptions, OfflineMode};
use calrm_core::fluid::{bound_value, BoundKind};
use calrm_core::instance::{counterexample, NamedInstance};

const TOL: f64 = 1e-6;

fn build(name: &str, params: &[(&str, &str)]) -> (NamedInstance, StageProbabilities) {
    let params: Vec<(String, String)> = params.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    let f = counterexample(name, &params).unwrap();
    let p = StageProbabilities::derive(&f.model);
    (f, p)
}

fn bound(kind: BoundKind, f: &NamedInstance, p: &StageProbabilities) -> f64 {
    bound_value(kind, &f.instance, &f.model, p, None).unwrap()
}

fn dp(f: &NamedInstance, p: &StageProbabilities) -> f64 {
    solve_dp(&f.instance, &f.model, p, &DpOptions::default()).unwrap().opt
}

fn offline(f: &NamedInstance, p: &StageProbabilities) -> f64 {
    offline_bound(&f.instance, &f.model, p, OfflineMode::Exact).unwrap().value
}

#[test]
fn offline_bound_has_no_fixed_order_against_prf() {
    let (e1, p1) = build("appE1", &[]);
    assert!((bound(BoundKind::PrfReduced, &e1, &p1) - 1.25).abs() < TOL);
    assert!((offline(&e1, &p1) - 1.375).abs() < TOL);
    let (e2, p2) = build("appE2", &[]);
    assert!((bound(BoundKind::PrfReduced, &e2, &p2) - 2.0).abs() < TOL);
    assert!((offline(&e2, &p2) - 1.75).abs() < TOL);
}

#[test]
fn frozen_stage_counterexample_scales_with_capacity() {
    for c in [8usize, 10, 12, 16] {
        let cs = c.to_string();
        let (g, p) = build("appG", &[("C", &cs)]);
        assert!((dp(&g, &p) - c as f64).abs() < TOL, "C={c}");
        assert!((bound(BoundKind::PrfReduced, &g, &p) - 1.25 * c as f64).abs() < TOL, "C={c}");
    }
}

#[test]
fn coin_flip_stages_match_binomial_expectation() {
    for k in [2usize, 4, 8] {
        let ks = k.to_string();
        let (f, p) = build("appF", &[("K", &ks)]);
        let cap = k / 2;
        // E[min(Bin(k, 1/2), k/2)]
        let mut expect = 0.0;
        let mut binom = 1.0f64;
        for i in 0..=k {
            if i > 0 {
                binom = binom * (k - i + 1) as f64 / i as f64;
            }
            expect += binom / 2f64.powi(k as i32) * i.min(cap) as f64;
        }
        assert!((dp(&f, &p) - expect).abs() < TOL, "K={k}");
        assert!((bound(BoundKind::PrfReduced, &f, &p) - cap as f64).abs() < TOL, "K={k}");
    }
}

#[test]
fn naive_independent_rows_fail_in_both_directions() {
    let (k1, p1) = build("appK1", &[("alpha", "2")]);
    assert!((dp(&k1, &p1) - 3.5).abs() < TOL);
    assert!((bound(BoundKind::PrfReduced, &k1, &p1) - 3.5).abs() < TOL);
    assert!((bound(BoundKind::Indep, &k1, &p1) - 3.5).abs() < TOL);
    assert!((bound(BoundKind::NaiveCumulative, &k1, &p1) - 5.5).abs() < TOL);

    let (k2, p2) = build("appK2", &[]);
    assert!((dp(&k2, &p2) - 2.75).abs() < TOL);
    assert!((bound(BoundKind::PrfReduced, &k2, &p2) - 2.75).abs() < TOL);
    assert!((bound(BoundKind::NaiveUnweighted, &k2, &p2) - 2.5).abs() < TOL);
}

#[test]
fn expected_demand_bound_is_loose_on_rare_long_demand() {
    for alpha in [2usize, 3, 4] {
        let a = alpha.to_string();
        let (n, p) = build("appN", &[("alpha", &a)]);
        let af = alpha as f64;
        assert!((dp(&n, &p) - 1.5 * af).abs() < TOL, "alpha={alpha}");
        assert!((bound(BoundKind::PrfReduced, &n, &p) - 1.5 * af).abs() < TOL, "alpha={alpha}");
        let p_long = 1.0 / (2.0 * (af - 1.0));
        let mean_demand = af * (1.0 - p_long) + af.powi(3) * p_long;
        let exf = bound(BoundKind::Exf, &n, &p);
        assert!((exf - mean_demand.min(af * af)).abs() < TOL, "alpha={alpha}");
        assert!(exf >= 1.5 * af + 1.0 - TOL);
    }
}

#[test]
fn prf_sandwiches_dp_on_every_fixture() {
    for name in ["appE1", "appE2", "appF", "appG", "appK1", "appK2", "appN"] {
        let (f, p) = build(name, &[]);
        let opt = dp(&f, &p);
        let prf = bound(BoundKind::PrfReduced, &f, &p);
        let exf = bound(BoundKind::Exf, &f, &p);
        assert!(opt <= prf + TOL, "{name}: {opt} > {prf}");
        assert!(prf <= exf + TOL, "{name}: {prf} > {exf}");
        let full = bound(BoundKind::PrfFull, &f, &p);
        assert!((prf - full).abs() < TOL, "{name}");
    }
}
