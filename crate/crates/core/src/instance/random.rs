use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{NetworkInstance, Product};
use crate::demand::DemandModel;
use crate::error::Result;

/// Size limits for [`random_small_instance`]; every maximum must be at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmallInstanceLimits {
    pub max_stages: usize,
    pub max_periods: usize,
    pub max_resources: usize,
    /// Includes the null product when one is drawn.
    pub max_products: usize,
    pub max_capacity: u32,
}

impl Default for SmallInstanceLimits {
    fn default() -> Self {
        SmallInstanceLimits { max_stages: 3, max_periods: 3, max_resources: 2, max_products: 3, max_capacity: 4 }
    }
}

/// Row of `n` probabilities, each at least `floor / n` when `floor > 0`.
fn random_row(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| floor + rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    let mut row: Vec<f64> = raw.iter().map(|v| v / s).collect();
    // force an exact unit sum
    let rest: f64 = row[1..].iter().sum();
    row[0] = 1.0 - rest;
    row
}

/// Seeded random instance within `limits`. With `full_support` every
/// transition probability is positive; otherwise rows may contain zeros.
pub fn random_small_instance(seed: u64, limits: &SmallInstanceLimits, full_support: bool) -> Result<(NetworkInstance, DemandModel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kk = rng.random_range(1..=limits.max_stages);
    let tt = rng.random_range(1..=limits.max_periods);
    let nl = rng.random_range(1..=limits.max_resources);
    let nj = rng.random_range(1..=limits.max_products);
    let with_null = nj >= 2 && rng.random_bool(0.5);

    let capacities: Vec<u32> = (0..nl).map(|_| rng.random_range(1..=limits.max_capacity)).collect();
    let mut products = Vec::with_capacity(nj);
    for j in 0..nj {
        if with_null && j == nj - 1 {
            products.push(Product::new(0.0, vec![0; nl]));
            continue;
        }
        let mut usage: Vec<u8> = (0..nl).map(|_| rng.random_bool(0.5) as u8).collect();
        if !usage.contains(&1) {
            usage[rng.random_range(0..nl)] = 1;
        }
        let revenue = rng.random_range(1..=10) as f64;
        products.push(Product::new(revenue, usage));
    }
    let arrivals: Vec<Vec<Vec<f64>>> = (0..kk).map(|_| (0..tt).map(|_| random_row(&mut rng, nj, 0.0)).collect()).collect();
    let null = with_null.then_some(nj - 1);
    let inst = NetworkInstance::new(capacities, products, arrivals, null)?;

    let floor = if full_support { 0.1 } else { 0.0 };
    let transition: Vec<Vec<Vec<f64>>> = (0..kk)
        .map(|_| {
            (0..tt)
                .map(|_| {
                    let mut row = random_row(&mut rng, tt, floor);
                    if !full_support && tt > 1 && rng.random_bool(0.3) {
                        let z = rng.random_range(0..tt);
                        let moved = row[z];
                        row[z] = 0.0;
                        row[(z + 1) % tt] += moved;
                    }
                    row
                })
                .collect()
        })
        .collect();
    let q0 = rng.random_range(1..=tt);
    let model = DemandModel::new(kk, tt, q0, transition)?;
    Ok((inst, model))
}
