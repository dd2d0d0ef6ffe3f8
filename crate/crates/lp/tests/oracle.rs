//! Solver agreement with a dense vertex enumerator on small boxed LPs, plus
//! duality and scaling properties.

use calrm_lp::{solve_lp, BoundedLP, Relation, Sense, Status};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_lp(seed: u64) -> BoundedLP {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=6);
    let m = rng.random_range(0..=6);
    let sense = if rng.random_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
    let mut lp = BoundedLP::new(sense);
    for _ in 0..n {
        let lo = rng.random_range(-2..=0) as f64;
        let hi = lo + rng.random_range(0..=5) as f64;
        lp.add_var(rng.random_range(-5..=5) as f64, lo, hi);
    }
    for _ in 0..m {
        let coeffs = (0..n).map(|j| (j, rng.random_range(-3..=3) as f64)).collect();
        let rel = match rng.random_range(0..4) {
            0 => Relation::Eq,
            1 => Relation::Ge,
            _ => Relation::Le,
        };
        lp.add_row(coeffs, rel, rng.random_range(-5..=10) as f64);
    }
    lp
}

/// Dense solve of `a x = b`; `None` when singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(p, c);
        b.swap(p, c);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Best objective over basic feasible solutions, `None` when infeasible.
fn vertex_oracle(lp: &BoundedLP) -> Option<f64> {
    let n = lp.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in &lp.rows {
        let mut a = vec![0.0; n];
        for &(j, v) in &row.coeffs {
            a[j] += v;
        }
        planes.push((a, row.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lp.lower[j]));
        planes.push((e, lp.upper[j]));
    }
    let feasible = |x: &[f64]| {
        let tol = 1e-9;
        (0..n).all(|j| x[j] >= lp.lower[j] - tol && x[j] <= lp.upper[j] + tol)
            && lp.rows.iter().enumerate().all(|(i, r)| {
                let act = lp.row_activity(i, x);
                match r.relation {
                    Relation::Le => act <= r.rhs + tol,
                    Relation::Ge => act >= r.rhs - tol,
                    Relation::Eq => (act - r.rhs).abs() <= tol,
                }
            })
    };
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_dense(a, b) {
            if feasible(&x) {
                let v = lp.objective_value(&x);
                best = Some(match (best, lp.sense) {
                    (None, _) => v,
                    (Some(o), Sense::Maximize) => o.max(v),
                    (Some(o), Sense::Minimize) => o.min(v),
                });
            }
        }
        // next n-combination of planes
        let p = planes.len();
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] < p - n + k {
                idx[k] += 1;
                for r in k + 1..n {
                    idx[r] = idx[r - 1] + 1;
                }
                break;
            }
        }
    }
}

#[test]
fn agrees_with_vertex_enumeration_on_random_lps() {
    for seed in 0..400 {
        let lp = random_lp(seed);
        let sol = solve_lp(&lp).unwrap();
        match vertex_oracle(&lp) {
            None => assert_eq!(sol.status, Status::Infeasible, "seed {seed}"),
            Some(v) => {
                assert_eq!(sol.status, Status::Optimal, "seed {seed}");
                assert!((sol.objective - v).abs() <= 1e-7 * (1.0 + v.abs()), "seed {seed}: {} vs {v}", sol.objective);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn optimal_solutions_satisfy_feasibility_and_duality(seed in any::<u64>()) {
        let lp = random_lp(seed);
        let sol = solve_lp(&lp).unwrap();
        if sol.status == Status::Optimal {
            for (i, row) in lp.rows.iter().enumerate() {
                let act = lp.row_activity(i, &sol.primal);
                let tol = 1e-7 * (1.0 + row.rhs.abs());
                match row.relation {
                    Relation::Le => prop_assert!(act <= row.rhs + tol),
                    Relation::Ge => prop_assert!(act >= row.rhs - tol),
                    Relation::Eq => prop_assert!((act - row.rhs).abs() <= tol),
                }
            }
            for j in 0..lp.num_vars() {
                prop_assert!(sol.primal[j] >= lp.lower[j] - 1e-9 && sol.primal[j] <= lp.upper[j] + 1e-9);
            }
            let dual = sol.dual_objective(&lp);
            prop_assert!((dual - sol.objective).abs() <= 1e-6 * (1.0 + sol.objective.abs()));
            prop_assert!(sol.complementary_slackness_residual(&lp) <= 1e-6);
        }
    }

    #[test]
    fn doubling_the_objective_doubles_the_optimum(seed in any::<u64>()) {
        let lp = random_lp(seed);
        let sol = solve_lp(&lp).unwrap();
        let mut doubled = lp.clone();
        doubled.objective.iter_mut().for_each(|c| *c *= 2.0);
        let sol2 = solve_lp(&doubled).unwrap();
        prop_assert_eq!(sol.status, sol2.status);
        if sol.status == Status::Optimal {
            prop_assert!((sol2.objective - 2.0 * sol.objective).abs() <= 1e-9 * (1.0 + sol.objective.abs()));
            // the first solve's point stays feasible for the scaled problem and attains half its optimum
            prop_assert!((doubled.objective_value(&sol.primal) - sol2.objective).abs() <= 1e-9 * (1.0 + sol2.objective.abs()));
        }
    }
}

#[test]
fn deterministic_for_fixed_input() {
    let lp = random_lp(7);
    let a = solve_lp(&lp).unwrap();
    let b = solve_lp(&lp).unwrap();
    assert_eq!(a.primal, b.primal);
    assert_eq!(a.iterations, b.iterations);
}
