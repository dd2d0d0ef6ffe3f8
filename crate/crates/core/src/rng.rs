//! Per-path random streams shared by simulation and the sampled offline bound.
//!
//! Each path owns three ChaCha streams keyed by (seed, path, kind). A stream
//! is consumed once per visited period, so the draw for period `(k, t)` of a
//! path is a fixed position in its stream regardless of the policy or the
//! worker that evaluates the path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::demand::{inverse_cdf, StageProbabilities};
use crate::instance::NetworkInstance;

#[derive(Debug, Clone, Copy)]
enum Kind {
    Product = 0,
    Accept = 1,
    Survival = 2,
}

fn stream(seed: u64, path: u64, kind: Kind) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path * 3 + kind as u64);
    rng
}

pub(crate) struct PathStreams {
    product: ChaCha8Rng,
    accept: ChaCha8Rng,
    survival: ChaCha8Rng,
}

impl PathStreams {
    pub(crate) fn new(seed: u64, path: u64) -> Self {
        PathStreams {
            product: stream(seed, path, Kind::Product),
            accept: stream(seed, path, Kind::Accept),
            survival: stream(seed, path, Kind::Survival),
        }
    }

    /// Requested product in the current period.
    pub(crate) fn product(&mut self, inst: &NetworkInstance, k: usize, t: usize) -> usize {
        inverse_cdf(inst.arrival_row(k, t), self.product.random())
    }

    pub(crate) fn accept(&mut self, p: f64) -> bool {
        self.accept.random::<f64>() < p
    }

    /// Whether the stage continues past period `t`.
    pub(crate) fn survives(&mut self, probs: &StageProbabilities, k: usize, t: usize, q: usize) -> bool {
        self.survival.random::<f64>() < probs.survival(k, t, q)
    }
}

/// Realized demands (1-based) and the product requested in each visited period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestPath {
    pub demands: Vec<usize>,
    pub requests: Vec<usize>,
}

/// Replays the request sequence that path `path` of a simulation with `seed` faces.
pub fn sample_requests(inst: &NetworkInstance, probs: &StageProbabilities, initial_prev: usize, seed: u64, path: u64) -> RequestPath {
    let mut s = PathStreams::new(seed, path);
    let mut q = initial_prev - 1;
    let mut demands = Vec::with_capacity(inst.stages());
    let mut requests = Vec::new();
    for k in 0..inst.stages() {
        let mut t = 0;
        loop {
            requests.push(s.product(inst, k, t));
            if !s.survives(probs, k, t, q) {
                break;
            }
            t += 1;
        }
        demands.push(t + 1);
        q = t;
    }
    RequestPath { demands, requests }
}
