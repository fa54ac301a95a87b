//! Accumulated sample weights over hypothesis tuples.

use std::collections::BTreeMap;

use crate::cbnet::for_each_assignment;

/// Weights `W[(x)_H]` and their total `W_tot`. Estimates of
/// `P((x)_H | (x)_E)` are `W[(x)_H] / W_tot`.
///
/// The total is derived from the per-tuple weights, so `W_tot` equals their
/// sum identically, not just within rounding of a second accumulator.
/// Merging two tables is associative addition of weights, so independent
/// chains can be accumulated in any grouping.
#[derive(Clone, Debug, Default)]
pub struct PosteriorTable {
    weights: BTreeMap<Vec<usize>, f64>,
    n_samples: u64,
}

impl PosteriorTable {
    /// Table with every hypothesis tuple of the given cardinalities present
    /// at weight zero.
    pub fn zeroed(hypothesis_cards: &[usize]) -> Self {
        let mut weights = BTreeMap::new();
        for_each_assignment(hypothesis_cards, |key| {
            weights.insert(key.to_vec(), 0.0);
        });
        PosteriorTable {
            weights,
            n_samples: 0,
        }
    }

    pub fn add(&mut self, key: Vec<usize>, weight: f64) {
        *self.weights.entry(key).or_insert(0.0) += weight;
        self.n_samples += 1;
    }

    pub fn merge(&mut self, other: PosteriorTable) {
        for (key, w) in other.weights {
            *self.weights.entry(key).or_insert(0.0) += w;
        }
        self.n_samples += other.n_samples;
    }

    pub fn w_tot(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn weights(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.weights
    }

    /// Normalized estimates; keys are hypothesis tuples in declaration order.
    pub fn estimates(&self) -> BTreeMap<Vec<usize>, f64> {
        let w_tot = self.w_tot();
        self.weights
            .iter()
            .map(|(k, w)| (k.clone(), w / w_tot))
            .collect()
    }

    /// Estimates as JSON text with comma-joined tuple keys, e.g. `{"0,1":0.25}`.
    /// Key order is lexicographic in the tuple, so output is deterministic.
    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, f64> = self
            .estimates()
            .into_iter()
            .map(|(k, v)| {
                let key = k
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                (key, v)
            })
            .collect();
        serde_json::to_string(&map).expect("posterior serializes")
    }
}
