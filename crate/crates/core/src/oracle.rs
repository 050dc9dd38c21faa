//! Exhaustive reference implementations used to check the solver.
//!
//! Nothing here relies on trivial pairs or on bounds on the number of
//! reducible pairs. The searches are exponential and meant for a handful of
//! leaves and reticulations.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::network::{Network, NodeId};
use crate::sequence::{self, TcSequence};
use crate::solver::Instance;
use crate::taxon::{Pair, Taxon};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("inconclusive: gave up after {explored} states")]
    Inconclusive { explored: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleReport {
    pub min_weight: Option<usize>,
    /// A lexicographically least sequence of weight `min_weight`.
    pub witness_sequence: Option<TcSequence>,
    pub states_explored: u64,
}

pub const DEFAULT_STATE_LIMIT: u64 = 2_000_000;
const DISPLAY_LIMIT: u64 = 1 << 16;

/// The minimum weight of a tree-child sequence reducing `instance`, if it is
/// at most `k_max`.
pub fn brute_force_min_tcs(instance: &Instance, k_max: usize) -> Result<OracleReport, OracleError> {
    brute_force_min_tcs_limited(instance, k_max, DEFAULT_STATE_LIMIT)
}

pub fn brute_force_min_tcs_limited(
    instance: &Instance,
    k_max: usize,
    state_limit: u64,
) -> Result<OracleReport, OracleError> {
    let taxa = instance.taxa();
    let mut search = Exhaustive {
        taxa,
        explored: 0,
        limit: state_limit,
        failed: HashMap::new(),
    };
    for w in 0..=k_max {
        let length = taxa.len() - 1 + w;
        let mut pairs = Vec::new();
        let found = search.run(
            instance.networks().to_vec(),
            &BTreeSet::new(),
            &mut pairs,
            length,
        )?;
        if found {
            let witness = TcSequence::new(pairs, taxa.clone()).expect("checked before acceptance");
            return Ok(OracleReport {
                min_weight: Some(w),
                witness_sequence: Some(witness),
                states_explored: search.explored,
            });
        }
    }
    Ok(OracleReport {
        min_weight: None,
        witness_sequence: None,
        states_explored: search.explored,
    })
}

type StateKey = (Vec<String>, BTreeSet<Taxon>);

struct Exhaustive<'a> {
    taxa: &'a BTreeSet<Taxon>,
    explored: u64,
    limit: u64,
    /// Largest remaining length known to fail from a state.
    failed: HashMap<StateKey, usize>,
}

impl Exhaustive<'_> {
    /// Depth-first search for a completion of `pairs` using at most `remaining` more pairs.
    fn run(
        &mut self,
        networks: Vec<Network>,
        forbidden: &BTreeSet<Taxon>,
        pairs: &mut Vec<Pair>,
        remaining: usize,
    ) -> Result<bool, OracleError> {
        self.explored += 1;
        if self.explored > self.limit {
            return Err(OracleError::Inconclusive {
                explored: self.explored,
            });
        }
        let mut options: BTreeSet<Pair> = BTreeSet::new();
        for n in &networks {
            options.extend(n.reducible_pairs().into_iter().map(|r| r.pair()));
        }
        if options.is_empty() {
            let done = sequence::is_tcs(pairs, self.taxa)
                && (self.taxa.len() == 1
                    || sequence::involved_taxa(pairs).len() == self.taxa.len())
                && sequence::reduces_set(&networks, &[]);
            return Ok(done);
        }
        // Each pair removes at most one leaf from a network.
        let most_leaves = networks.iter().map(Network::leaf_count).max().unwrap_or(1);
        if most_leaves - 1 > remaining {
            return Ok(false);
        }
        let key: StateKey = (
            networks
                .iter()
                .map(|n| n.canonical_form().unwrap_or_default())
                .collect(),
            forbidden.clone(),
        );
        if self.failed.get(&key).is_some_and(|&r| r >= remaining) {
            return Ok(false);
        }
        for pair in options
            .into_iter()
            .filter(|p| !forbidden.contains(p.second()))
        {
            let next: Vec<Network> = networks
                .iter()
                .map(|n| {
                    let mut m = n.clone();
                    m.reduce_in_place(&pair);
                    m
                })
                .collect();
            let mut forbidden_next = forbidden.clone();
            forbidden_next.insert(pair.first().clone());
            pairs.push(pair);
            if self.run(next, &forbidden_next, pairs, remaining - 1)? {
                return Ok(true);
            }
            pairs.pop();
        }
        let entry = self.failed.entry(key).or_insert(0);
        *entry = (*entry).max(remaining);
        Ok(false)
    }
}

/// Whether `guest` is obtained from `host` by deleting reticulation edges,
/// removing leaves outside the guest's leaf set, suppressing degree-2 nodes
/// and contracting edges.
pub fn displays_bruteforce(host: &Network, guest: &Network) -> Result<bool, OracleError> {
    let keep = guest.taxon_set();
    if !keep.iter().all(|t| host.has_leaf(t)) {
        return Ok(false);
    }
    let incoming: Vec<(NodeId, Vec<NodeId>)> = host
        .reticulations()
        .map(|r| (r, host.parents(r).to_vec()))
        .collect();
    let combinations: u64 = incoming
        .iter()
        .map(|(_, ps)| (1u64 << ps.len().min(63)) - 1)
        .try_fold(1u64, |acc, c| acc.checked_mul(c))
        .unwrap_or(u64::MAX);
    if combinations > DISPLAY_LIMIT {
        return Err(OracleError::Inconclusive { explored: 0 });
    }
    let mut explored = 0u64;
    let mut choice: Vec<u64> = vec![1; incoming.len()];
    loop {
        let mut candidate = host.clone();
        for ((r, parents), &mask) in incoming.iter().zip(&choice) {
            for (i, &p) in parents.iter().enumerate() {
                if mask & (1 << i) == 0 {
                    candidate.remove_edge(p, *r);
                }
            }
        }
        prune_dangling(&mut candidate);
        let candidate = candidate.restrict_to(&keep);
        if candidate.is_valid() && matches_by_contraction(&candidate, guest, &mut explored)? {
            return Ok(true);
        }
        // Next combination: each mask runs over 1 .. 2^d - 1.
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Ok(false);
            }
            let full = (1u64 << incoming[i].1.len()) - 1;
            if choice[i] < full {
                choice[i] += 1;
                break;
            }
            choice[i] = 1;
            i += 1;
        }
    }
}

/// Removes unlabelled nodes left without children.
fn prune_dangling(n: &mut Network) {
    let mut work: Vec<NodeId> = n.node_ids().collect();
    while let Some(v) = work.pop() {
        if n.contains(v) && n.label(v).is_none() && n.outdegree(v) == 0 && n.indegree(v) > 0 {
            work.extend_from_slice(n.parents(v));
            n.remove_node(v).expect("node exists");
        }
    }
}

fn matches_by_contraction(
    candidate: &Network,
    guest: &Network,
    explored: &mut u64,
) -> Result<bool, OracleError> {
    let excess = match candidate.node_count().checked_sub(guest.node_count()) {
        None => return Ok(false),
        Some(0) => return Ok(candidate.isomorphic(guest)),
        Some(d) => d,
    };
    let edges: Vec<(NodeId, NodeId)> = candidate
        .edges()
        .into_iter()
        // Contracting any other edge leaves a node of invalid degree.
        .filter(|&(u, v)| candidate.indegree(u) >= 2 && candidate.indegree(v) >= 2)
        .collect();
    if excess > edges.len() {
        return Ok(false);
    }
    let mut picked: Vec<usize> = (0..excess).collect();
    loop {
        *explored += 1;
        if *explored > DISPLAY_LIMIT * 4 {
            return Err(OracleError::Inconclusive {
                explored: *explored,
            });
        }
        if let Some(contracted) = contract(candidate, picked.iter().map(|&i| edges[i])) {
            if contracted.is_valid() && contracted.isomorphic(guest) {
                return Ok(true);
            }
        }
        // Next combination of `excess` edge indices.
        let mut i = excess;
        loop {
            if i == 0 {
                return Ok(false);
            }
            i -= 1;
            if picked[i] < edges.len() - excess + i {
                picked[i] += 1;
                for j in i + 1..excess {
                    picked[j] = picked[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Contracts each edge by merging its head into its tail. `None` if two of
/// the edges collapse into the same node.
fn contract(n: &Network, edges: impl Iterator<Item = (NodeId, NodeId)>) -> Option<Network> {
    let mut out = n.clone();
    let mut merged: HashMap<NodeId, NodeId> = HashMap::new();
    let find = |merged: &HashMap<NodeId, NodeId>, mut v: NodeId| {
        while let Some(&w) = merged.get(&v) {
            v = w;
        }
        v
    };
    for (a, b) in edges {
        let (u, v) = (find(&merged, a), find(&merged, b));
        if u == v {
            return None;
        }
        let parents: Vec<NodeId> = out.parents(v).iter().copied().filter(|&p| p != u).collect();
        let children: Vec<NodeId> = out.children(v).to_vec();
        out.remove_node(v).ok()?;
        for p in parents {
            out.add_edge(p, u).ok()?;
        }
        for c in children {
            out.add_edge(u, c).ok()?;
        }
        merged.insert(v, u);
    }
    Some(out)
}
