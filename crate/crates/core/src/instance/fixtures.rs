//! Small instances with known exact bound and policy values.
//!
//! Zero demand in a stage is encoded by a leading period whose only
//! arrival is the null product, so stage demand `d` means `d - 1` real
//! requests.

use super::{NetworkInstance, Product};
use crate::demand::DemandModel;
use crate::error::{Error, Result};

/// Named counterexample with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// Two stages, offline bound above the fluid bound.
    AppE1,
    /// Two deterministic stages, offline bound below the fluid bound.
    AppE2,
    /// `stages` single-period stages with a coin-flip request each.
    AppF { stages: usize },
    /// Three stages where freezing stage demands at their means misleads.
    AppG { c: usize },
    /// Single stage with rare long demand; the cumulative naive LP overshoots.
    AppK1 { alpha: usize },
    /// Two independent stages; the unweighted naive LP undershoots the optimum.
    AppK2,
    /// Single stage with rare long demand; the expected-demand LP is loose.
    AppN { alpha: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedInstance {
    pub name: String,
    pub instance: NetworkInstance,
    pub model: DemandModel,
}

pub const FIXTURE_NAMES: [&str; 7] = ["appE1", "appE2", "appF", "appG", "appK1", "appK2", "appN"];

fn out_of_range(name: &str, message: impl Into<String>) -> Error {
    Error::ParamOutOfRange { name: name.into(), message: message.into() }
}

fn int_param(params: &[(String, String)], key: &str, default: usize) -> Result<usize> {
    match params.iter().rev().find(|(k, _)| k == key) {
        None => Ok(default),
        Some((_, v)) => v.trim().parse::<usize>().map_err(|_| out_of_range(key, format!("{v:?} is not a nonnegative integer"))),
    }
}

impl Fixture {
    /// Resolves a fixture name with `NAME=VALUE` parameters; unknown keys are rejected.
    pub fn parse(name: &str, params: &[(String, String)]) -> Result<Fixture> {
        let allowed: &[&str] = match name {
            "appF" => &["K"],
            "appG" => &["C"],
            "appK1" | "appN" => &["alpha"],
            "appE1" | "appE2" | "appK2" => &[],
            _ => return Err(Error::UnknownName(name.to_string())),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(out_of_range(k, format!("not a parameter of {name}")));
        }
        let f = match name {
            "appE1" => Fixture::AppE1,
            "appE2" => Fixture::AppE2,
            "appK2" => Fixture::AppK2,
            "appF" => Fixture::AppF { stages: int_param(params, "K", 8)? },
            "appG" => Fixture::AppG { c: int_param(params, "C", 8)? },
            "appK1" => Fixture::AppK1 { alpha: int_param(params, "alpha", 2)? },
            _ => Fixture::AppN { alpha: int_param(params, "alpha", 3)? },
        };
        f.check()?;
        Ok(f)
    }

    fn check(&self) -> Result<()> {
        match *self {
            Fixture::AppF { stages } if stages < 2 || stages % 2 == 1 => Err(out_of_range("K", "must be even and at least 2")),
            Fixture::AppG { c } if c < 8 || c % 2 == 1 => Err(out_of_range("C", "must be even and at least 8")),
            Fixture::AppK1 { alpha } if !(2..=6).contains(&alpha) => Err(out_of_range("alpha", "must be an integer in 2..=6")),
            Fixture::AppN { alpha } if !(2..=12).contains(&alpha) => Err(out_of_range("alpha", "must be an integer in 2..=12")),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Fixture::AppE1 => "appE1".into(),
            Fixture::AppE2 => "appE2".into(),
            Fixture::AppF { stages } => format!("appF(K={stages})"),
            Fixture::AppG { c } => format!("appG(C={c})"),
            Fixture::AppK1 { alpha } => format!("appK1(alpha={alpha})"),
            Fixture::AppK2 => "appK2".into(),
            Fixture::AppN { alpha } => format!("appN(alpha={alpha})"),
        }
    }

    pub fn build(&self) -> Result<NamedInstance> {
        self.check()?;
        let (instance, model) = match *self {
            Fixture::AppE1 => app_e1()?,
            Fixture::AppE2 => app_e2()?,
            Fixture::AppF { stages } => app_f(stages)?,
            Fixture::AppG { c } => app_g(c)?,
            Fixture::AppK1 { alpha } => {
                let t = alpha.pow(4);
                let a2 = (alpha * alpha) as f64;
                two_point_single_stage(t, alpha.pow(3) as u32, alpha, 1.0 - 1.0 / a2)?
            }
            Fixture::AppK2 => app_k2()?,
            Fixture::AppN { alpha } => {
                let t = alpha.pow(3);
                let p_long = 1.0 / (2.0 * (alpha as f64 - 1.0));
                two_point_single_stage(t, (alpha * alpha) as u32, alpha, 1.0 - p_long)?
            }
        };
        instance.check_compatible(&model)?;
        Ok(NamedInstance { name: self.name(), instance, model })
    }
}

/// Looks up a fixture by name and builds it.
pub fn counterexample(name: &str, params: &[(String, String)]) -> Result<NamedInstance> {
    Fixture::parse(name, params)?.build()
}

fn point_mass(t: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; t];
    v[at] = 1.0;
    v
}

fn app_e1() -> Result<(NetworkInstance, DemandModel)> {
    let products = vec![Product::new(1.0, vec![1]), Product::new(2.0, vec![1]), Product::new(0.0, vec![0])];
    let dummy = vec![0.0, 0.0, 1.0];
    let arrivals = vec![vec![dummy.clone(), vec![1.0, 0.0, 0.0]], vec![dummy, vec![0.5, 0.5, 0.0]]];
    let inst = NetworkInstance::new(vec![1], products, arrivals, Some(2))?;
    let half = vec![0.5, 0.5];
    let model = DemandModel::new(2, 2, 1, vec![vec![half.clone(), half.clone()], vec![vec![0.0, 1.0], half]])?;
    Ok((inst, model))
}

fn app_e2() -> Result<(NetworkInstance, DemandModel)> {
    let products = vec![Product::new(1.0, vec![1]), Product::new(2.0, vec![1]), Product::new(0.0, vec![0])];
    let arrivals = vec![vec![vec![0.5, 0.5, 0.0]], vec![vec![0.0, 0.5, 0.5]]];
    let inst = NetworkInstance::new(vec![1], products, arrivals, Some(2))?;
    let model = DemandModel::new(2, 1, 1, vec![vec![vec![1.0]]; 2])?;
    Ok((inst, model))
}

fn app_f(stages: usize) -> Result<(NetworkInstance, DemandModel)> {
    let products = vec![Product::new(1.0, vec![1]), Product::new(0.0, vec![0])];
    let arrivals = vec![vec![vec![0.5, 0.5]]; stages];
    let inst = NetworkInstance::new(vec![(stages / 2) as u32], products, arrivals, Some(1))?;
    let model = DemandModel::new(stages, 1, 1, vec![vec![vec![1.0]]; stages])?;
    Ok((inst, model))
}

fn app_g(c: usize) -> Result<(NetworkInstance, DemandModel)> {
    let t = c + 1;
    let products = vec![Product::new(1.0, vec![1]), Product::new(c as f64 / 4.0, vec![1]), Product::new(0.0, vec![0])];
    let (p1, p2, null) = (vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]);
    let half = c / 2;

    // stage 1: dummy period then up to C requests
    let mut s1 = vec![p1.clone(); t];
    s1[0] = null.clone();
    // stage 2: exactly one request
    let mut s2 = vec![null.clone(); t];
    s2[0] = p1.clone();
    // stage 3: C/2 - 1 low requests then one high request
    let mut s3 = vec![null; t];
    for row in s3.iter_mut().take(half - 1) {
        *row = p1.clone();
    }
    s3[half - 1] = p2;
    let inst = NetworkInstance::new(vec![t as u32], products, vec![s1, s2, s3], Some(2))?;

    let mut split = vec![0.0; t];
    split[0] = 0.5;
    split[t - 1] = 0.5;
    let model = DemandModel::new(
        3,
        t,
        1,
        vec![vec![split; t], vec![point_mass(t, 0); t], vec![point_mass(t, half - 1); t]],
    )?;
    Ok((inst, model))
}

fn app_k2() -> Result<(NetworkInstance, DemandModel)> {
    let inst = NetworkInstance::new(vec![3], vec![Product::new(1.0, vec![1])], vec![vec![vec![1.0]; 2]; 2], None)?;
    let model = DemandModel::independent(vec![vec![0.5, 0.5]; 2], 1)?;
    Ok((inst, model))
}

/// One stage, one unit-revenue product arriving every period, demand `short` w.p. `p_short` else `t`.
fn two_point_single_stage(t: usize, capacity: u32, short: usize, p_short: f64) -> Result<(NetworkInstance, DemandModel)> {
    let inst = NetworkInstance::new(vec![capacity], vec![Product::new(1.0, vec![1])], vec![vec![vec![1.0]; t]], None)?;
    let mut row = vec![0.0; t];
    row[short - 1] = p_short;
    row[t - 1] = 1.0 - p_short;
    let model = DemandModel::independent(vec![row], 1)?;
    Ok((inst, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::StageProbabilities;

    fn p(k: &str, v: &str) -> (String, String) {
        (k.to_string(), v.to_string())
    }

    #[test]
    fn every_fixture_builds_with_defaults() {
        for name in FIXTURE_NAMES {
            let f = counterexample(name, &[]).unwrap();
            f.instance.check_compatible(&f.model).unwrap();
        }
    }

    #[test]
    fn parameter_checks() {
        assert!(matches!(counterexample("appF", &[p("K", "7")]), Err(Error::ParamOutOfRange { .. })));
        assert!(matches!(counterexample("appG", &[p("C", "6")]), Err(Error::ParamOutOfRange { .. })));
        assert!(matches!(counterexample("appN", &[p("alpha", "1")]), Err(Error::ParamOutOfRange { .. })));
        assert!(matches!(counterexample("appE1", &[p("C", "8")]), Err(Error::ParamOutOfRange { .. })));
        assert!(matches!(counterexample("appZ", &[]), Err(Error::UnknownName(_))));
    }

    #[test]
    fn app_e2_shape() {
        let f = counterexample("appE2", &[]).unwrap();
        assert_eq!((f.instance.stages(), f.instance.periods()), (2, 1));
        assert_eq!(f.instance.arrival_row(1, 0), &[0.0, 0.5, 0.5]);
        assert_eq!(f.instance.capacities(), &[1]);
    }

    #[test]
    fn app_f_shape() {
        let f = counterexample("appF", &[p("K", "8")]).unwrap();
        assert_eq!(f.instance.capacities(), &[4]);
        assert_eq!(f.instance.arrival_row(3, 0), &[0.5, 0.5]);
    }

    #[test]
    fn app_n_shape() {
        let f = counterexample("appN", &[p("alpha", "3")]).unwrap();
        assert_eq!(f.instance.capacities(), &[9]);
        assert_eq!(f.model.max_demand(), 27);
        assert_eq!(f.model.transition(0, 0, 2), 0.75);
        assert_eq!(f.model.transition(0, 0, 26), 0.25);
    }

    #[test]
    fn app_g_first_stage_support() {
        let f = counterexample("appG", &[p("C", "8")]).unwrap();
        let probs = StageProbabilities::derive(&f.model);
        for q in 0..9 {
            let expect = if q == 0 || q == 8 { 0.5 } else { 0.0 };
            assert_eq!(probs.marginal(0, q), expect);
        }
    }
}
