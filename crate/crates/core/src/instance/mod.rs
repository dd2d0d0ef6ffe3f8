//! Network instances: resources, products and per-period arrival laws.

mod fixtures;
mod hub_spoke;
mod random;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::demand::{DemandModel, DemandModelFile};
use crate::error::{Error, Result};

pub use fixtures::{counterexample, Fixture, NamedInstance, FIXTURE_NAMES};
pub use hub_spoke::{generate_hub_spoke, HubSpokeConfig};
pub use random::{random_small_instance, SmallInstanceLimits};

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Product {
    pub revenue: f64,
    /// One 0/1 entry per resource.
    pub usage: Vec<u8>,
}

impl Product {
    pub fn new(revenue: f64, usage: Vec<u8>) -> Self {
        Product { revenue, usage }
    }
}

/// Validated network instance. Arrival table is indexed `[k][t][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    capacities: Vec<u32>,
    products: Vec<Product>,
    arrivals: Vec<Vec<Vec<f64>>>,
    null_product: Option<usize>,
    /// Resources used by each product.
    resources_of: Vec<Vec<usize>>,
}

impl NetworkInstance {
    pub fn new(
        capacities: Vec<u32>,
        products: Vec<Product>,
        arrivals: Vec<Vec<Vec<f64>>>,
        null_product: Option<usize>,
    ) -> Result<Self> {
        let invalid = |m: String| Err(Error::Validation(m));
        let nl = capacities.len();
        if nl == 0 {
            return invalid("instance has no resources".into());
        }
        if let Some(i) = capacities.iter().position(|&c| c == 0) {
            return invalid(format!("resources[{i}]: capacity must be positive"));
        }
        if products.is_empty() {
            return invalid("instance has no products".into());
        }
        if let Some(n) = null_product {
            if n >= products.len() {
                return invalid(format!("null_product_index {n} out of range"));
            }
        }
        for (j, p) in products.iter().enumerate() {
            if !(p.revenue >= 0.0) || !p.revenue.is_finite() {
                return invalid(format!("products[{j}].revenue must be finite and nonnegative"));
            }
            if p.usage.len() != nl {
                return invalid(format!("products[{j}].usage has {} entries, expected {nl}", p.usage.len()));
            }
            if p.usage.iter().any(|&a| a > 1) {
                return invalid(format!("products[{j}].usage entries must be 0 or 1"));
            }
            let uses_any = p.usage.contains(&1);
            if Some(j) == null_product {
                if uses_any || p.revenue != 0.0 {
                    return invalid(format!("null product {j} must have zero revenue and usage"));
                }
            } else if !uses_any {
                return invalid(format!("products[{j}] uses no resource but is not the null product"));
            }
        }
        if arrivals.is_empty() || arrivals[0].is_empty() {
            return invalid("arrival table is empty".into());
        }
        let periods = arrivals[0].len();
        for (k, stage) in arrivals.iter().enumerate() {
            if stage.len() != periods {
                return invalid(format!("arrivals[{k}] has {} periods, expected {periods}", stage.len()));
            }
            for (t, row) in stage.iter().enumerate() {
                if row.len() != products.len() {
                    return invalid(format!("arrivals[{k}][{t}] has {} entries, expected {}", row.len(), products.len()));
                }
                if row.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                    return invalid(format!("arrivals[{k}][{t}] has a negative or non-finite entry"));
                }
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > TOL {
                    return invalid(format!("arrivals[{k}][{t}] sums to {s}, expected 1"));
                }
            }
        }
        let resources_of = products
            .iter()
            .map(|p| p.usage.iter().enumerate().filter(|(_, &a)| a == 1).map(|(i, _)| i).collect())
            .collect();
        Ok(NetworkInstance { capacities, products, arrivals, null_product, resources_of })
    }

    pub fn stages(&self) -> usize {
        self.arrivals.len()
    }

    pub fn periods(&self) -> usize {
        self.arrivals[0].len()
    }

    pub fn num_products(&self) -> usize {
        self.products.len()
    }

    pub fn num_resources(&self) -> usize {
        self.capacities.len()
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn revenue(&self, j: usize) -> f64 {
        self.products[j].revenue
    }

    pub fn uses(&self, i: usize, j: usize) -> bool {
        self.products[j].usage[i] == 1
    }

    pub fn resources_of(&self, j: usize) -> &[usize] {
        &self.resources_of[j]
    }

    pub fn arrival(&self, k: usize, t: usize, j: usize) -> f64 {
        self.arrivals[k][t][j]
    }

    pub fn arrival_row(&self, k: usize, t: usize) -> &[f64] {
        &self.arrivals[k][t]
    }

    pub fn null_product(&self) -> Option<usize> {
        self.null_product
    }

    /// Largest number of resources any product consumes.
    pub fn max_usage(&self) -> usize {
        self.resources_of.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_capacity(&self) -> u32 {
        self.capacities.iter().copied().min().unwrap_or(0)
    }

    /// Errors unless stage and period counts agree with `model`.
    pub fn check_compatible(&self, model: &DemandModel) -> Result<()> {
        if self.stages() != model.stages() || self.periods() != model.max_demand() {
            return Err(Error::DimensionMismatch(format!(
                "instance has K={} T={}, demand model has K={} T={}",
                self.stages(),
                self.periods(),
                model.stages(),
                model.max_demand()
            )));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    resources: Vec<u32>,
    products: Vec<Product>,
    arrivals: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    null_product_index: Option<usize>,
    /// Embedded model object, or a path to a model file relative to the instance file.
    demand: serde_json::Value,
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Parses and validates a demand model document.
pub fn load_demand_model_str(text: &str) -> Result<DemandModel> {
    DemandModel::try_from(parse::<DemandModelFile>(text)?)
}

pub fn load_demand_model(path: &Path) -> Result<DemandModel> {
    load_demand_model_str(&std::fs::read_to_string(path)?)
}

/// Parses an instance document; relative demand-model paths resolve against `base_dir`.
pub fn load_instance_str(text: &str, base_dir: Option<&Path>) -> Result<(NetworkInstance, DemandModel)> {
    let file: InstanceFile = parse(text)?;
    let model = match &file.demand {
        serde_json::Value::String(p) => {
            let path = base_dir.map_or_else(|| Path::new(p).to_path_buf(), |b| b.join(p));
            load_demand_model(&path)?
        }
        value => {
            let text = value.to_string();
            load_demand_model_str(&text).map_err(|e| match e {
                Error::Parse { path, message } => Error::Parse { path: format!("demand.{path}"), message },
                other => other,
            })?
        }
    };
    let inst = NetworkInstance::new(file.resources, file.products, file.arrivals, file.null_product_index)?;
    inst.check_compatible(&model)?;
    Ok((inst, model))
}

pub fn load_instance(path: &Path) -> Result<(NetworkInstance, DemandModel)> {
    let text = std::fs::read_to_string(path)?;
    load_instance_str(&text, path.parent())
}

/// Serializes an instance with its demand model embedded.
pub fn save_instance(inst: &NetworkInstance, model: &DemandModel) -> String {
    let file = InstanceFile {
        resources: inst.capacities.clone(),
        products: inst.products.clone(),
        arrivals: inst.arrivals.clone(),
        null_product_index: inst.null_product,
        demand: serde_json::to_value(model).expect("demand model serializes"),
    };
    serde_json::to_string_pretty(&file).expect("instance serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (NetworkInstance, DemandModel) {
        let inst = NetworkInstance::new(
            vec![2],
            vec![Product::new(1.0, vec![1]), Product::new(0.0, vec![0])],
            vec![vec![vec![0.5, 0.5], vec![1.0, 0.0]]],
            Some(1),
        )
        .unwrap();
        let model = DemandModel::new(1, 2, 1, vec![vec![vec![0.5, 0.5]; 2]]).unwrap();
        (inst, model)
    }

    #[test]
    fn round_trip_is_identity() {
        let (inst, model) = toy();
        let text = save_instance(&inst, &model);
        let (i2, m2) = load_instance_str(&text, None).unwrap();
        assert_eq!(i2, inst);
        assert_eq!(m2, model);
        assert_eq!(save_instance(&i2, &m2), text);
    }

    #[test]
    fn arrival_row_off_by_a_tenth_is_rejected() {
        let (inst, model) = toy();
        let text = save_instance(&inst, &model).replacen("0.5", "0.4", 1);
        assert!(matches!(load_instance_str(&text, None), Err(Error::Validation(_))));
    }

    #[test]
    fn zero_capacity_is_rejected() {
        let (inst, model) = toy();
        let mut v: serde_json::Value = serde_json::from_str(&save_instance(&inst, &model)).unwrap();
        v["resources"][0] = 0.into();
        assert!(matches!(load_instance_str(&v.to_string(), None), Err(Error::Validation(_))));
    }

    #[test]
    fn parse_errors_carry_field_path() {
        let (inst, model) = toy();
        let mut v: serde_json::Value = serde_json::from_str(&save_instance(&inst, &model)).unwrap();
        v["products"][1]["revenue"] = "cheap".into();
        match load_instance_str(&v.to_string(), None) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "products[1].revenue"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn product_without_usage_must_be_null() {
        let r = NetworkInstance::new(vec![1], vec![Product::new(1.0, vec![0])], vec![vec![vec![1.0]]], None);
        assert!(r.is_err());
    }

    #[test]
    fn dimension_mismatch_with_model() {
        let (inst, _) = toy();
        let other = DemandModel::new(1, 3, 1, vec![vec![vec![1.0, 0.0, 0.0]; 3]]).unwrap();
        assert!(matches!(inst.check_compatible(&other), Err(Error::DimensionMismatch(_))));
    }
}
