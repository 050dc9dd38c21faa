//! Seeded random tree-child sequences and instances.
//!
//! A sequence is drawn back to front. Starting from the final leaf `z`, each
//! step prepends either a pair `(x, y)` with a fresh leaf `x`, or a pair that
//! adds a reticulation edge: `x` already occurs as a first coordinate and is
//! not a second coordinate later on. In both cases `y` is `z` or a later
//! first coordinate. Each step draws uniformly among the pairs allowed at that
//! point.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::network::{Network, NodeId};
use crate::sequence::TcSequence;
use crate::solver::Instance;
use crate::taxon::{Pair, Taxon};

pub const MAX_TAXA: usize = 12;
pub const MAX_WEIGHT: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub taxa_count: usize,
    pub target_weight: usize,
    pub seed: u64,
    pub subnetwork_count: usize,
}

impl fmt::Display for GeneratorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "taxa={} weight={} seed={} count={}",
            self.taxa_count, self.target_weight, self.seed, self.subnetwork_count
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("taxa count must be between 1 and {MAX_TAXA}, got {0}")]
    TaxaCount(usize),
    #[error("target weight must be at most {MAX_WEIGHT}, got {0}")]
    Weight(usize),
    #[error("at least one network must be requested")]
    NoNetworks,
    #[error("a single taxon admits no reticulations")]
    Infeasible,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), GenerateError> {
        if self.taxa_count == 0 || self.taxa_count > MAX_TAXA {
            return Err(GenerateError::TaxaCount(self.taxa_count));
        }
        if self.target_weight > MAX_WEIGHT {
            return Err(GenerateError::Weight(self.target_weight));
        }
        if self.subnetwork_count == 0 {
            return Err(GenerateError::NoNetworks);
        }
        if self.taxa_count == 1 && self.target_weight > 0 {
            return Err(GenerateError::Infeasible);
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Leaf labels `1 ..= n`.
pub fn labels(n: usize) -> Vec<Taxon> {
    (1..=n)
        .map(|i| Taxon::new(i.to_string()).expect("non-empty"))
        .collect()
}

/// A random tree-child sequence on `taxa_count` leaves of weight exactly `target_weight`.
pub fn random_tcs(cfg: &GeneratorConfig) -> Result<TcSequence, GenerateError> {
    cfg.validate()?;
    Ok(draw_sequence(cfg, &mut cfg.rng()))
}

fn draw_sequence(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> TcSequence {
    let all = labels(cfg.taxa_count);
    let mut unused: Vec<Taxon> = all.clone();
    let z = unused.swap_remove(rng.gen_range(0..unused.len()));
    let mut present: Vec<Taxon> = vec![z];
    let mut seconds: BTreeSet<Taxon> = BTreeSet::new();
    let mut reversed: Vec<Pair> = Vec::new();
    let mut fresh_left = cfg.taxa_count - 1;
    let mut retic_left = cfg.target_weight;

    while fresh_left + retic_left > 0 {
        let pickable: Vec<&Taxon> = present.iter().filter(|t| !seconds.contains(*t)).collect();
        // Reticulation steps need a first coordinate already in place.
        let retic_options = if retic_left > 0 && !reversed.is_empty() {
            pickable.len() * (present.len() - 1)
        } else {
            0
        };
        let fresh_options = if fresh_left > 0 {
            unused.len() * present.len()
        } else {
            0
        };
        let draw = rng.gen_range(0..fresh_options + retic_options);
        let pair = if draw < fresh_options {
            let x = unused.swap_remove(draw / present.len());
            let y = present[draw % present.len()].clone();
            present.push(x.clone());
            fresh_left -= 1;
            Pair::new(x, y)
        } else {
            let draw = draw - fresh_options;
            let x = pickable[draw / (present.len() - 1)].clone();
            let others: Vec<&Taxon> = present.iter().filter(|t| **t != x).collect();
            let y = others[draw % (present.len() - 1)].clone();
            retic_left -= 1;
            Pair::new(x, y)
        }
        .expect("coordinates differ");
        seconds.insert(pair.second().clone());
        reversed.push(pair);
    }
    reversed.reverse();
    TcSequence::new(reversed, all.into_iter().collect()).expect("drawn sequences are tree-child")
}

#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub host: Network,
    pub sequence: TcSequence,
    pub instance: Instance,
}

/// Draws a host network from a random sequence and derives the instance
/// networks from it by deleting reticulation edges.
pub fn generate_instance(cfg: &GeneratorConfig) -> Result<GeneratedInstance, GenerateError> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let sequence = draw_sequence(cfg, &mut rng);
    let host = sequence.construct_network();
    let networks: Vec<Network> = (0..cfg.subnetwork_count)
        .map(|_| derive_network(&host, &mut rng))
        .collect();
    let instance =
        Instance::new(networks).expect("networks displayed by a tree-child network are tree-child");
    Ok(GeneratedInstance {
        host,
        sequence,
        instance,
    })
}

/// Deletes a random non-empty set of reticulation edges from `host`, keeping
/// at least one incoming edge per reticulation. Trees are returned unchanged.
pub fn derive_network(host: &Network, rng: &mut impl Rng) -> Network {
    let mut out = host.clone();
    let mut plan: Vec<(NodeId, usize)> = host
        .reticulations()
        .map(|r| (r, rng.gen_range(0..host.indegree(r))))
        .collect();
    if !plan.is_empty() && plan.iter().all(|&(_, k)| k == 0) {
        let i = rng.gen_range(0..plan.len());
        plan[i].1 = 1;
    }
    for (r, count) in plan {
        for _ in 0..count {
            let from = *out
                .parents(r)
                .choose(rng)
                .expect("reticulation keeps a parent");
            out.delete_reticulation_edge(from, r)
                .expect("edge into a reticulation with indegree at least two");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::displays_bruteforce;

    fn cfg(taxa_count: usize, target_weight: usize, seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            taxa_count,
            target_weight,
            seed,
            subnetwork_count: 2,
        }
    }

    #[test]
    fn two_taxa_without_reticulation() {
        let s = random_tcs(&cfg(2, 0, 3)).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.weight(), 0);
    }

    #[test]
    fn two_taxa_with_one_reticulation() {
        for seed in 0..10 {
            let s = random_tcs(&cfg(2, 1, seed)).unwrap();
            assert_eq!(s.pairs().len(), 2);
            assert_eq!(s.pairs()[0], s.pairs()[1]);
        }
    }

    #[test]
    fn same_seed_same_sequence() {
        let c = cfg(7, 3, 42);
        assert_eq!(random_tcs(&c).unwrap(), random_tcs(&c).unwrap());
        assert_ne!(random_tcs(&c).unwrap(), random_tcs(&cfg(7, 3, 43)).unwrap());
    }

    #[test]
    fn infeasible_configs() {
        assert_eq!(
            random_tcs(&cfg(1, 1, 0)).unwrap_err(),
            GenerateError::Infeasible
        );
        assert_eq!(
            random_tcs(&cfg(13, 0, 0)).unwrap_err(),
            GenerateError::TaxaCount(13)
        );
        assert_eq!(
            random_tcs(&cfg(4, 7, 0)).unwrap_err(),
            GenerateError::Weight(7)
        );
        assert_eq!(random_tcs(&cfg(1, 0, 0)).unwrap().len(), 0);
    }

    #[test]
    fn weight_is_exact() {
        for seed in 0..50 {
            let c = cfg(2 + (seed as usize % 7), seed as usize % 5, seed);
            let s = random_tcs(&c).unwrap();
            assert_eq!(s.weight(), c.target_weight);
            assert_eq!(s.construct_network().reticulation_number(), c.target_weight);
        }
    }

    #[test]
    fn trees_pass_through() {
        let g = generate_instance(&cfg(5, 0, 9)).unwrap();
        for n in g.instance.networks() {
            assert!(n.isomorphic(&g.host));
        }
    }

    #[test]
    fn derived_networks_are_displayed() {
        for seed in 0..10 {
            let g = generate_instance(&cfg(4, 2, seed)).unwrap();
            for n in g.instance.networks() {
                assert!(n.is_tree_child());
                assert!(n.reticulation_number() < g.host.reticulation_number());
                assert!(displays_bruteforce(&g.host, n).unwrap());
            }
        }
    }
}
