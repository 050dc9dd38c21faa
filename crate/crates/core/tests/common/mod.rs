#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;

use tcnet::generate::{generate_instance, random_tcs, GeneratorConfig};
use tcnet::network::{Network, NodeId, PairKind};
use tcnet::sequence;
use tcnet::solver::{trivial_pairs, Instance};
use tcnet::{Pair, Taxon};

pub fn cfg(
    taxa_count: usize,
    target_weight: usize,
    seed: u64,
    subnetwork_count: usize,
) -> GeneratorConfig {
    GeneratorConfig {
        taxa_count,
        target_weight,
        seed,
        subnetwork_count,
    }
}

/// A tree-child network built from a random sequence.
pub fn random_network(taxa: usize, weight: usize, seed: u64) -> Network {
    random_tcs(&cfg(taxa, weight, seed, 1))
        .unwrap()
        .construct_network()
}

pub fn instance(taxa: usize, weight: usize, seed: u64, count: usize) -> Instance {
    generate_instance(&cfg(taxa, weight, seed, count))
        .unwrap()
        .instance
}

/// Copies `n` with node ids assigned in random order and leaf labels renamed by `rename`.
pub fn rebuild(n: &Network, rename: &HashMap<Taxon, Taxon>, rng: &mut impl Rng) -> Network {
    let mut ids: Vec<NodeId> = n.node_ids().collect();
    ids.shuffle(rng);
    let mut out = Network::new();
    let mut map: HashMap<NodeId, NodeId> = HashMap::new();
    for v in ids {
        let w = match n.label(v) {
            Some(t) => out.add_leaf(rename.get(t).unwrap_or(t).clone()).unwrap(),
            None => out.add_node(),
        };
        map.insert(v, w);
    }
    let mut edges = n.edges();
    edges.shuffle(rng);
    for (a, b) in edges {
        out.add_edge(map[&a], map[&b]).unwrap();
    }
    out
}

pub fn swap_labels(n: &Network, x: &Taxon, y: &Taxon, rng: &mut impl Rng) -> Network {
    let rename = HashMap::from([(x.clone(), y.clone()), (y.clone(), x.clone())]);
    rebuild(n, &rename, rng)
}

pub fn reticulated_cherries(n: &Network) -> Vec<Pair> {
    n.reducible_pairs()
        .into_iter()
        .filter(|r| r.kind == PairKind::ReticulatedCherry)
        .map(|r| r.pair())
        .collect()
}

/// Reticulated cherries of the inputs missing from `pairs`.
pub fn missing_forced_pairs(instance: &Instance, pairs: &[Pair]) -> Vec<Pair> {
    instance
        .networks()
        .iter()
        .flat_map(reticulated_cherries)
        .filter(|p| !pairs.contains(p))
        .collect()
}

/// Replays `pairs` and returns the largest number of reducible pairs at a
/// state where no trivial pair with a non-forbidden second leaf exists.
pub fn widest_nontrivial_state(instance: &Instance, pairs: &[Pair]) -> usize {
    let mut networks: Vec<Network> = instance.networks().to_vec();
    let mut widest = 0;
    for i in 0..=pairs.len() {
        let forbidden = sequence::forbidden(&pairs[..i]);
        let has_trivial = trivial_pairs(&networks)
            .iter()
            .any(|p| !forbidden.contains(p.second()));
        if !has_trivial {
            let all: BTreeSet<Pair> = networks
                .iter()
                .flat_map(|n| n.reducible_pairs().into_iter().map(|r| r.pair()))
                .collect();
            widest = widest.max(all.len());
        }
        if let Some(p) = pairs.get(i) {
            for n in &mut networks {
                n.reduce_in_place(p);
            }
        }
    }
    widest
}

/// Pairs of networks with opposite reticulated cherries: a generated network
/// and a copy with the two cherry leaves swapped.
pub fn incompatible_instances(count: usize, max_taxa: usize, rng: &mut impl Rng) -> Vec<Instance> {
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count {
        seed += 1;
        let taxa = 2 + (seed as usize % (max_taxa - 1));
        let n = random_network(taxa, 1 + (seed as usize % 2), seed);
        let Some(p) = reticulated_cherries(&n).into_iter().next() else {
            continue;
        };
        let m = swap_labels(&n, p.first(), p.second(), rng);
        out.push(Instance::new(vec![n, m]).unwrap());
    }
    out
}

/// Malformed instance files, each rejected with a line and column.
pub const MALFORMED: [&str; 20] = [
    "((1,2);",
    "(1,2));",
    "(1,2)",
    "(1,1);",
    "((1,2),(3)#H1);",
    "((1,#H1),(2,#H1));",
    "(((1)#H1,2),((3)#H1,4));",
    "(1,2);x",
    ";",
    "(1,2,3);",
    "((1,2)#LGT1,3);",
    "(1,(2,3)",
    "(,1);",
    "(1,2):x;",
    "('1,2);",
    "(1,2)[comment;",
    "((1)#H1,(#H1,#H1));",
    "(1);",
    "((1,2),3),4;",
    "((1,2),3);\n(1,2,(3;",
];
