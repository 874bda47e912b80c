//! Seeded random graphs and permutations.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Label, MultiRelGraph};

pub type GraphRng = Xoshiro256StarStar;

pub fn seeded(seed: u64) -> GraphRng {
    Xoshiro256StarStar::seed_from_u64(seed)
}

/// Each unordered pair becomes an edge with probability `p`, placed in one
/// uniformly chosen relation, so relations never share an edge. Labels are
/// uniform in `0..labels`.
pub fn random_graph<R: Rng>(
    rng: &mut R,
    n: usize,
    r: usize,
    p: f64,
    labels: u32,
) -> Result<MultiRelGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::contract(format!(
            "edge probability {p} outside [0, 1]"
        )));
    }
    if labels == 0 {
        return Err(Error::contract("need at least one label value"));
    }
    let mut relations = vec![Vec::new(); r];
    for u in 0..n {
        for v in u + 1..n {
            if r > 0 && rng.random_bool(p) {
                relations[rng.random_range(0..r)].push((u, v));
            }
        }
    }
    let labels = (0..n).map(|_| rng.random_range(0..labels)).collect();
    MultiRelGraph::new(n, &relations, labels)
}

/// Ranges the small random-graph workloads draw from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomGraphSpec {
    pub min_n: usize,
    pub max_n: usize,
    pub max_r: usize,
    pub min_p: f64,
    pub max_p: f64,
    pub max_labels: u32,
}

impl Default for RandomGraphSpec {
    fn default() -> Self {
        RandomGraphSpec {
            min_n: 2,
            max_n: 30,
            max_r: 4,
            min_p: 0.05,
            max_p: 0.4,
            max_labels: 3,
        }
    }
}

impl RandomGraphSpec {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<MultiRelGraph> {
        if self.min_n > self.max_n
            || self.max_r == 0
            || self.max_labels == 0
            || self.min_p > self.max_p
        {
            return Err(Error::contract("empty random graph range"));
        }
        let n = rng.random_range(self.min_n..=self.max_n);
        let r = rng.random_range(1..=self.max_r);
        let p = rng.random_range(self.min_p..=self.max_p);
        let labels = rng.random_range(1..=self.max_labels);
        random_graph(rng, n, r, p, labels)
    }
}

/// `m` distinct edges on `n` unlabeled vertices, each in one uniformly
/// chosen relation; for sparse graphs where pair enumeration is too slow.
pub fn random_sparse_graph<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    r: usize,
) -> Result<MultiRelGraph> {
    let max_edges = n.saturating_mul(n.saturating_sub(1)) / 2;
    if m > max_edges || (m > 0 && r == 0) {
        return Err(Error::contract(format!(
            "cannot place {m} edges on {n} vertices"
        )));
    }
    let mut seen = HashSet::with_capacity(m);
    let mut relations = vec![Vec::new(); r];
    while seen.len() < m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key) {
            relations[rng.random_range(0..r)].push(key);
        }
    }
    MultiRelGraph::new(n, &relations, vec![0 as Label; n])
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}
