//! Branching search for minimum-weight tree-child sequences.
//!
//! The search grows a sequence `S` for the reduced instance `NS`. It first
//! appends trivial pairs (reducible in every network that still has the first
//! leaf), then gives up when a reducible pair can no longer be picked without
//! breaking the tree-child conditions, when more than `8k` reducible pairs
//! remain, or when the leaves still present already force weight `k`.
//! Otherwise it branches on every reducible pair whose second leaf is not
//! forbidden. With budget `k` this runs in `O((8k)^k * poly(|X|, |N|))`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::network::{Diagnostic, Network, PairKind};
use crate::sequence::{self, TcSequence};
use crate::taxon::{Pair, Taxon};

/// A set of tree-child networks on a common leaf set.
#[derive(Clone, Debug)]
pub struct Instance {
    networks: Vec<Network>,
    taxa: BTreeSet<Taxon>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("an instance needs at least one network")]
    Empty,
    #[error("network {} is invalid: {}", .index + 1, first_diagnostic(.diagnostics))]
    Invalid {
        index: usize,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("network {} is not tree-child", .index + 1)]
    NotTreeChild { index: usize },
    #[error("network {} has a different leaf set than network 1", .index + 1)]
    LeafSetMismatch { index: usize },
}

fn first_diagnostic(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .first()
        .map(|d| d.to_string())
        .unwrap_or_default()
}

impl Instance {
    pub fn new(networks: Vec<Network>) -> Result<Self, InstanceError> {
        let first = networks.first().ok_or(InstanceError::Empty)?;
        let taxa = first.taxon_set();
        for (index, n) in networks.iter().enumerate() {
            let diagnostics = n.validate();
            if !diagnostics.is_empty() {
                return Err(InstanceError::Invalid { index, diagnostics });
            }
            if !n.is_tree_child() {
                return Err(InstanceError::NotTreeChild { index });
            }
            if !n.taxa().eq(taxa.iter()) {
                return Err(InstanceError::LeafSetMismatch { index });
            }
        }
        Ok(Instance { networks, taxa })
    }

    pub fn networks(&self) -> &[Network] {
        &self.networks
    }

    pub fn taxa(&self) -> &BTreeSet<Taxon> {
        &self.taxa
    }

    pub fn len(&self) -> usize {
        self.networks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.networks.is_empty()
    }
}

/// Two networks with opposite reticulated cherries; no tree-child network displays both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncompatibilityWitness {
    /// `(x, y)`: a reticulated cherry of `network_a`; `(y, x)` is one of `network_b`.
    pub pair: Pair,
    pub network_a: usize,
    pub network_b: usize,
}

impl fmt::Display for IncompatibilityWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "network {} has reticulated cherry {:?} and network {} has reticulated cherry {:?}",
            self.network_a + 1,
            self.pair,
            self.network_b + 1,
            self.pair.reversed()
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FailReason {
    /// A cherry on two forbidden leaves, or a reticulated cherry `(x, y)` with `y` forbidden.
    ForbiddenCherry,
    /// More than `8k` reducible pairs after trivial reductions.
    TooManyPairs,
    /// The leaves left already force weight above `k`.
    BudgetExceeded,
}

impl fmt::Display for FailReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailReason::ForbiddenCherry => "forbidden_cherry",
            FailReason::TooManyPairs => "too_many_pairs",
            FailReason::BudgetExceeded => "budget_exceeded",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub trivial_reductions: u64,
    /// Largest number of reducible pairs at a state without trivial pairs on
    /// the path of the returned sequence. Zero when nothing was found.
    pub max_branch_width: usize,
    /// Largest number of reducible pairs at any state without trivial pairs.
    pub max_width_seen: usize,
    pub failures_by_reason: BTreeMap<FailReason, u64>,
}

impl SearchStats {
    fn fail(&mut self, reason: FailReason) {
        *self.failures_by_reason.entry(reason).or_default() += 1;
    }

    fn absorb(&mut self, other: &SearchStats) {
        self.nodes_expanded += other.nodes_expanded;
        self.trivial_reductions += other.trivial_reductions;
        self.max_width_seen = self.max_width_seen.max(other.max_width_seen);
        for (reason, count) in &other.failures_by_reason {
            *self.failures_by_reason.entry(*reason).or_default() += count;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverOptions {
    /// Lower the budget to one below the best weight found so far.
    pub prune: bool,
    /// Explore the branches of the top search levels on the rayon pool.
    pub parallel: bool,
    /// Shuffle branch order with this seed instead of taking pairs in label order.
    pub seed: Option<u64>,
    /// Reduce trivial pairs eagerly. Turning this off also drops the `8k`
    /// cut-off and relaxes the weight cut-off by one, since both are only
    /// sound after trivial pairs are gone.
    pub reduce_trivial_pairs: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            prune: false,
            parallel: false,
            seed: None,
            reduce_trivial_pairs: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub sequence: TcSequence,
    pub network: Network,
    /// The weight of `sequence`, which equals the reticulation number of `network`.
    pub weight: usize,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("incompatible: {0}")]
    Incompatible(IncompatibilityWitness),
    #[error("no tree-child network displays the input (searched every weight up to {bound})")]
    NoSolution { bound: usize },
    #[error("no tree-child network of reticulation number at most {k_max} displays the input")]
    BudgetExhausted { k_max: usize },
    #[error("the prefix cannot be extended to a tree-child sequence")]
    InvalidPrefix,
}

/// The outcome of one budgeted search.
#[derive(Clone, Debug)]
pub struct SequenceSearch {
    pub sequence: Option<TcSequence>,
    pub stats: SearchStats,
}

/// Pairs `(x, y)` reducible in every network that has leaf `x`.
pub fn trivial_pairs(networks: &[Network]) -> BTreeSet<Pair> {
    let per_network: Vec<BTreeSet<Pair>> = networks
        .iter()
        .map(|n| n.reducible_pairs().iter().map(|r| r.pair()).collect())
        .collect();
    trivial_from(networks, &per_network)
}

fn trivial_from(networks: &[Network], per_network: &[BTreeSet<Pair>]) -> BTreeSet<Pair> {
    let candidates: BTreeSet<&Pair> = per_network.iter().flatten().collect();
    candidates
        .into_iter()
        .filter(|p| {
            networks
                .iter()
                .zip(per_network)
                .all(|(n, pairs)| !n.has_leaf(p.first()) || pairs.contains(*p))
        })
        .cloned()
        .collect()
}

/// Looks for reticulated cherries `(x, y)` and `(y, x)` in two input networks.
pub fn quick_incompatibility(instance: &Instance) -> Option<IncompatibilityWitness> {
    let cherries: Vec<BTreeSet<Pair>> = instance
        .networks
        .iter()
        .map(|n| {
            n.reducible_pairs()
                .into_iter()
                .filter(|r| r.kind == PairKind::ReticulatedCherry)
                .map(|r| r.pair())
                .collect()
        })
        .collect();
    for (a, pairs) in cherries.iter().enumerate() {
        for pair in pairs {
            let reversed = pair.reversed();
            if let Some(b) = cherries.iter().position(|other| other.contains(&reversed)) {
                return Some(IncompatibilityWitness {
                    pair: pair.clone(),
                    network_a: a,
                    network_b: b,
                });
            }
        }
    }
    None
}

/// Whether some network has a cherry on two forbidden leaves or a reticulated
/// cherry whose second leaf is forbidden.
fn blocked(networks: &[Network], forbidden: &BTreeSet<Taxon>) -> bool {
    networks.iter().any(|n| {
        n.reducible_pairs().iter().any(|r| match r.kind {
            PairKind::Cherry => forbidden.contains(&r.first) && forbidden.contains(&r.second),
            PairKind::ReticulatedCherry => forbidden.contains(&r.second),
        })
    })
}

#[derive(Clone)]
struct State {
    networks: Vec<Network>,
    pairs: Vec<Pair>,
    forbidden: BTreeSet<Taxon>,
}

impl State {
    fn apply(&mut self, pair: Pair) {
        for n in &mut self.networks {
            n.reduce_in_place(&pair);
        }
        self.forbidden.insert(pair.first().clone());
        self.pairs.push(pair);
    }
}

struct Found {
    pairs: Vec<Pair>,
    path_width: usize,
}

fn better(candidate: &Found, incumbent: &Option<Found>) -> bool {
    match incumbent {
        None => true,
        Some(best) => (candidate.pairs.len(), &candidate.pairs) < (best.pairs.len(), &best.pairs),
    }
}

const PARALLEL_DEPTH: usize = 2;
const SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

struct Search<'a> {
    taxa_count: usize,
    options: &'a SolverOptions,
}

impl Search<'_> {
    fn weight(&self, len: usize) -> usize {
        (len + 1).saturating_sub(self.taxa_count)
    }

    fn explore(
        &self,
        mut state: State,
        budget: usize,
        depth: usize,
        stats: &mut SearchStats,
    ) -> Option<Found> {
        stats.nodes_expanded += 1;
        if self.options.reduce_trivial_pairs {
            loop {
                let next = trivial_pairs(&state.networks)
                    .into_iter()
                    .find(|p| !state.forbidden.contains(p.second()));
                match next {
                    Some(pair) => {
                        state.apply(pair);
                        stats.trivial_reductions += 1;
                    }
                    None => break,
                }
            }
        }
        if blocked(&state.networks, &state.forbidden) {
            stats.fail(FailReason::ForbiddenCherry);
            return None;
        }
        let present: BTreeSet<&Taxon> = state.networks.iter().flat_map(|n| n.taxa()).collect();
        let lower_bound = (state.pairs.len() + present.len()).saturating_sub(self.taxa_count);
        let candidates: BTreeSet<Pair> = state
            .networks
            .iter()
            .flat_map(|n| n.reducible_pairs().into_iter().map(|r| r.pair()))
            .collect();
        if candidates.is_empty() {
            // Trivial pairs that only delete reticulation edges add weight
            // after the last budget check.
            if self.weight(state.pairs.len()) > budget {
                stats.fail(FailReason::BudgetExceeded);
                return None;
            }
            return Some(Found {
                pairs: state.pairs,
                path_width: 0,
            });
        }
        let width = candidates.len();
        stats.max_width_seen = stats.max_width_seen.max(width);
        if self.options.reduce_trivial_pairs && width > 8 * budget {
            stats.fail(FailReason::TooManyPairs);
            return None;
        }
        // Without trivial pairs left, the next pair keeps its first leaf in
        // some network, so the weight ends strictly above `lower_bound`.
        let exceeded = if self.options.reduce_trivial_pairs {
            lower_bound >= budget
        } else {
            lower_bound > budget
        };
        if exceeded {
            stats.fail(FailReason::BudgetExceeded);
            return None;
        }
        let mut branches: Vec<Pair> = candidates
            .into_iter()
            .filter(|p| !state.forbidden.contains(p.second()))
            .collect();
        if let Some(seed) = self.options.seed {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (state.pairs.len() as u64).wrapping_mul(SEED_MIX));
            branches.shuffle(&mut rng);
        }

        let best = if self.options.parallel && depth < PARALLEL_DEPTH {
            let results: Vec<(Option<Found>, SearchStats)> = branches
                .into_par_iter()
                .map(|pair| {
                    let mut child = state.clone();
                    child.apply(pair);
                    let mut local = SearchStats::default();
                    let found = self.explore(child, budget, depth + 1, &mut local);
                    (found, local)
                })
                .collect();
            let mut best: Option<Found> = None;
            for (found, local) in results {
                stats.absorb(&local);
                if let Some(found) = found.filter(|f| better(f, &best)) {
                    best = Some(found);
                }
            }
            best
        } else {
            let mut best: Option<Found> = None;
            let mut budget_here = budget;
            for pair in branches {
                if self.options.prune {
                    if let Some(b) = &best {
                        match self.weight(b.pairs.len()) {
                            0 => break,
                            w => budget_here = budget_here.min(w - 1),
                        }
                    }
                }
                let mut child = state.clone();
                child.apply(pair);
                if let Some(found) = self
                    .explore(child, budget_here, depth + 1, stats)
                    .filter(|f| better(f, &best))
                {
                    best = Some(found);
                }
            }
            best
        };
        best.map(|f| Found {
            path_width: f.path_width.max(width),
            pairs: f.pairs,
        })
    }
}

fn run_search(
    instance: &Instance,
    prefix: &[Pair],
    budget: usize,
    options: &SolverOptions,
) -> (Option<Found>, SearchStats) {
    let state = State {
        networks: instance
            .networks
            .iter()
            .map(|n| sequence::reduce_by_sequence(n, prefix))
            .collect(),
        pairs: prefix.to_vec(),
        forbidden: sequence::forbidden(prefix),
    };
    let search = Search {
        taxa_count: instance.taxa.len(),
        options,
    };
    let mut stats = SearchStats::default();
    let found = search.explore(state, budget, 0, &mut stats);
    if let Some(f) = &found {
        stats.max_branch_width = f.path_width;
    }
    (found, stats)
}

fn to_sequence(instance: &Instance, pairs: Vec<Pair>) -> TcSequence {
    TcSequence::new(pairs, instance.taxa.clone())
        .expect("the search only emits tree-child sequences")
}

/// A minimum-weight tree-child sequence of weight at most `k` that starts with
/// `prefix` and reduces the instance, if one exists.
pub fn tree_child_sequence(
    instance: &Instance,
    prefix: &[Pair],
    k: usize,
    options: &SolverOptions,
) -> Result<SequenceSearch, SolveError> {
    if !sequence::is_extendable(prefix, &instance.taxa)
        || prefix
            .iter()
            .any(|p| !instance.taxa.contains(p.first()) || !instance.taxa.contains(p.second()))
    {
        return Err(SolveError::InvalidPrefix);
    }
    let (found, stats) = run_search(instance, prefix, k, options);
    Ok(SequenceSearch {
        sequence: found.map(|f| to_sequence(instance, f.pairs)),
        stats,
    })
}

/// A tree-child network with reticulation number at most `k` displaying the
/// instance, built from the sequence found by [`tree_child_sequence`].
pub fn tree_child_network(
    instance: &Instance,
    k: usize,
    options: &SolverOptions,
) -> Option<Network> {
    let (found, _) = run_search(instance, &[], k, options);
    found.map(|f| to_sequence(instance, f.pairs).construct_network())
}

/// No sequence the search can produce is heavier than this: every pair it
/// appends removes a leaf or a reticulation edge from at least one network.
pub fn weight_ceiling(instance: &Instance) -> usize {
    let leaves = instance.taxa.len();
    let removable: usize = instance
        .networks
        .iter()
        .map(|n| leaves - 1 + n.reticulations().map(|r| n.indegree(r)).sum::<usize>())
        .sum();
    (removable + 1).saturating_sub(leaves)
}

/// Finds an optimal tree-child network by trying budgets `0, 1, 2, ...`.
///
/// Without `k_max` the budgets stop at [`weight_ceiling`], so a failure there
/// means no tree-child network displays the instance.
pub fn solve(
    instance: &Instance,
    k_max: Option<usize>,
    options: &SolverOptions,
) -> Result<SolveResult, SolveError> {
    if let Some(witness) = quick_incompatibility(instance) {
        return Err(SolveError::Incompatible(witness));
    }
    let ceiling = weight_ceiling(instance);
    let limit = k_max.map_or(ceiling, |k| k.min(ceiling));
    let mut total = SearchStats::default();
    for k in 0..=limit {
        let (found, stats) = run_search(instance, &[], k, options);
        total.absorb(&stats);
        if let Some(found) = found {
            total.max_branch_width = stats.max_branch_width;
            let sequence = to_sequence(instance, found.pairs);
            let network = sequence.construct_network();
            return Ok(SolveResult {
                weight: sequence.weight(),
                sequence,
                network,
                stats: total,
            });
        }
    }
    match k_max {
        Some(k) if k < ceiling => Err(SolveError::BudgetExhausted { k_max: k }),
        _ => Err(SolveError::NoSolution { bound: ceiling }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enewick::parse_enewick;

    fn inst(texts: &[&str]) -> Instance {
        Instance::new(texts.iter().map(|t| parse_enewick(t).unwrap()).collect()).unwrap()
    }

    fn p(a: &str, b: &str) -> Pair {
        Pair::from_labels(a, b).unwrap()
    }

    #[test]
    fn instance_checks() {
        assert_eq!(Instance::new(vec![]).unwrap_err(), InstanceError::Empty);
        let a = parse_enewick("((1,2),3);").unwrap();
        let b = parse_enewick("((1,2),4);").unwrap();
        assert_eq!(
            Instance::new(vec![a, b]).unwrap_err(),
            InstanceError::LeafSetMismatch { index: 1 }
        );
    }

    #[test]
    fn trivial_pairs_of_one_cherry() {
        let n = parse_enewick("(x,y);").unwrap();
        let t: Vec<Pair> = trivial_pairs(&[n]).into_iter().collect();
        assert_eq!(t, vec![p("x", "y"), p("y", "x")]);
    }

    #[test]
    fn trivial_pairs_with_a_reticulated_cherry() {
        let rc = parse_enewick("((x)#H1,(#H1,y));").unwrap();
        let c = parse_enewick("(x,y);").unwrap();
        let t = trivial_pairs(&[rc, c]);
        assert!(t.contains(&p("x", "y")));
        assert!(!t.contains(&p("y", "x")));
    }

    #[test]
    fn no_trivial_pair_when_a_network_lacks_it() {
        let a = parse_enewick("((x,y),z);").unwrap();
        let b = parse_enewick("((y,z),x);").unwrap();
        let t = trivial_pairs(&[a, b]);
        assert!(t.iter().all(|q| q.first().as_str() != "x"));
    }

    #[test]
    fn witness_on_opposite_reticulated_cherries() {
        let i = inst(&["((x)#H1,(#H1,y));", "((y)#H1,(#H1,x));"]);
        let w = quick_incompatibility(&i).unwrap();
        assert_eq!(
            w,
            IncompatibilityWitness {
                pair: p("x", "y"),
                network_a: 0,
                network_b: 1
            }
        );
        assert!(matches!(
            solve(&i, None, &SolverOptions::default()),
            Err(SolveError::Incompatible(_))
        ));
        for k in 0..4 {
            assert!(tree_child_network(&i, k, &SolverOptions::default()).is_none());
        }
        assert!(
            quick_incompatibility(&inst(&["((x)#H1,(#H1,y));", "((x)#H1,(#H1,y));"])).is_none()
        );
        assert!(quick_incompatibility(&inst(&["((1,2),3);", "((1,3),2);"])).is_none());
    }

    #[test]
    fn single_tree_needs_no_reticulation() {
        let i = inst(&["(((1,2),(3,4)),5);"]);
        let s = tree_child_sequence(&i, &[], 0, &SolverOptions::default()).unwrap();
        let seq = s.sequence.unwrap();
        assert_eq!(seq.weight(), 0);
        assert_eq!(s.stats.trivial_reductions, 4);
    }

    #[test]
    fn two_trees_need_one_reticulation() {
        let i = inst(&["((1,2),3);", "((1,3),2);"]);
        assert!(tree_child_network(&i, 0, &SolverOptions::default()).is_none());
        let r = solve(&i, None, &SolverOptions::default()).unwrap();
        assert_eq!(r.weight, 1);
        assert_eq!(r.network.reticulation_number(), 1);
        assert!(sequence::reduces_set(i.networks(), r.sequence.pairs()));
        assert!(r.stats.max_branch_width <= 8);
    }

    #[test]
    fn budget_exhaustion_is_distinct() {
        let i = inst(&["((1,2),3);", "((1,3),2);"]);
        assert_eq!(
            solve(&i, Some(0), &SolverOptions::default()).unwrap_err(),
            SolveError::BudgetExhausted { k_max: 0 }
        );
    }

    #[test]
    fn prefix_must_be_extendable() {
        let i = inst(&["((1,2),3);"]);
        let bad = [p("1", "2"), p("2", "1")];
        assert_eq!(
            tree_child_sequence(&i, &bad, 2, &SolverOptions::default()).unwrap_err(),
            SolveError::InvalidPrefix
        );
        let ok = tree_child_sequence(&i, &[p("3", "1")], 2, &SolverOptions::default()).unwrap();
        assert_eq!(ok.sequence.unwrap().pairs()[0], p("3", "1"));
    }

    #[test]
    fn options_agree_on_weight() {
        let i = inst(&["(((1,2),3),4);", "(((1,3),4),2);", "((1,4),(2,3));"]);
        let base = solve(&i, None, &SolverOptions::default()).unwrap();
        for options in [
            SolverOptions {
                prune: true,
                ..Default::default()
            },
            SolverOptions {
                parallel: true,
                ..Default::default()
            },
            SolverOptions {
                seed: Some(7),
                prune: true,
                ..Default::default()
            },
            SolverOptions {
                reduce_trivial_pairs: false,
                ..Default::default()
            },
        ] {
            let r = solve(&i, None, &options).unwrap();
            assert_eq!(r.weight, base.weight, "{options:?}");
        }
        let par = solve(
            &i,
            None,
            &SolverOptions {
                parallel: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(par.sequence, base.sequence);
    }
}
