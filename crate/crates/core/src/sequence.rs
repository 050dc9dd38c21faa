//! Tree-child sequences.
//!
//! A tree-child sequence `(x1,y1) .. (xn,yn)` is a list of ordered leaf pairs
//! where
//!
//! 1. every second coordinate `yi` reappears later as a first coordinate, or
//!    equals `yn`;
//! 2. no first coordinate `xi` is used as a second coordinate later on.
//!
//! Replaying a sequence on a network reduces it pair by pair; building a
//! network from a sequence adds the pairs back in reverse order.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::network::Network;
use crate::taxon::{Pair, Taxon, TaxonError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("pair {index} ({pair:?}): second coordinate never reappears as a first coordinate")]
    SecondNotPicked { index: usize, pair: Pair },
    #[error(
        "pair {index} ({pair:?}): first coordinate {leaf} is used as a second coordinate later"
    )]
    ForbiddenSecond {
        index: usize,
        pair: Pair,
        leaf: Taxon,
    },
    #[error("taxon {0} is not part of the leaf set")]
    UnknownTaxon(Taxon),
    #[error("an empty sequence only describes a single-leaf network")]
    Empty,
}

/// Checks both tree-child conditions, reporting the first violation.
pub fn check_tcs(pairs: &[Pair]) -> Result<(), SequenceError> {
    let Some(last) = pairs.last() else {
        return Ok(());
    };
    for (i, pair) in pairs.iter().enumerate() {
        let rest = &pairs[i + 1..];
        if pair.second() != last.second() && !rest.iter().any(|q| q.first() == pair.second()) {
            return Err(SequenceError::SecondNotPicked {
                index: i,
                pair: pair.clone(),
            });
        }
        if rest.iter().any(|q| q.second() == pair.first()) {
            return Err(SequenceError::ForbiddenSecond {
                index: i,
                pair: pair.clone(),
                leaf: pair.first().clone(),
            });
        }
    }
    Ok(())
}

/// Whether `pairs` is a tree-child sequence over `taxa`.
pub fn is_tcs(pairs: &[Pair], taxa: &BTreeSet<Taxon>) -> bool {
    pairs
        .iter()
        .all(|p| taxa.contains(p.first()) && taxa.contains(p.second()))
        && check_tcs(pairs).is_ok()
}

/// Leaves occurring in `pairs`.
pub fn involved_taxa(pairs: &[Pair]) -> BTreeSet<Taxon> {
    pairs
        .iter()
        .flat_map(|p| [p.first().clone(), p.second().clone()])
        .collect()
}

/// `|S| - |X| + 1` with `X` the leaves occurring in `S`; zero for the empty sequence.
pub fn weight_of(pairs: &[Pair]) -> usize {
    if pairs.is_empty() {
        return 0;
    }
    (pairs.len() + 1).saturating_sub(involved_taxa(pairs).len())
}

/// The leaves used as first coordinates so far.
pub fn forbidden(prefix: &[Pair]) -> BTreeSet<Taxon> {
    prefix.iter().map(|p| p.first().clone()).collect()
}

/// Reduces `network` by each pair in turn; non-reducible pairs are skipped.
pub fn reduce_by_sequence(network: &Network, pairs: &[Pair]) -> Network {
    let mut out = network.clone();
    for pair in pairs {
        out.reduce_in_place(pair);
    }
    out
}

/// Whether `pairs` reduces every network to the same single-leaf network.
pub fn reduces_set(networks: &[Network], pairs: &[Pair]) -> bool {
    let mut last: Option<Taxon> = None;
    for n in networks {
        let reduced = reduce_by_sequence(n, pairs);
        match (reduced.single_leaf_taxon(), &last) {
            (None, _) => return false,
            (Some(t), Some(prev)) if t != prev => return false,
            (Some(t), _) => last = Some(t.clone()),
        }
    }
    true
}

/// A validated tree-child sequence together with the leaf set it acts on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TcSequence {
    pairs: Vec<Pair>,
    taxa: BTreeSet<Taxon>,
}

impl TcSequence {
    /// An empty sequence is accepted only for a single-leaf universe.
    pub fn new(pairs: Vec<Pair>, taxa: BTreeSet<Taxon>) -> Result<Self, SequenceError> {
        if let Some(t) = involved_taxa(&pairs)
            .into_iter()
            .find(|t| !taxa.contains(t))
        {
            return Err(SequenceError::UnknownTaxon(t));
        }
        if pairs.is_empty() && taxa.len() != 1 {
            return Err(SequenceError::Empty);
        }
        check_tcs(&pairs)?;
        Ok(TcSequence { pairs, taxa })
    }

    /// Uses the leaves occurring in `pairs` as the leaf set.
    pub fn from_pairs(pairs: Vec<Pair>) -> Result<Self, SequenceError> {
        let taxa = involved_taxa(&pairs);
        TcSequence::new(pairs, taxa)
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn taxa(&self) -> &BTreeSet<Taxon> {
        &self.taxa
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn weight(&self) -> usize {
        weight_of(&self.pairs)
    }

    /// `S[:i]`, the first `i` pairs.
    pub fn prefix(&self, i: usize) -> &[Pair] {
        &self.pairs[..i.min(self.pairs.len())]
    }

    /// `S[i+1:]`, everything after the first `i` pairs.
    pub fn suffix(&self, i: usize) -> &[Pair] {
        &self.pairs[i.min(self.pairs.len())..]
    }

    pub fn contains(&self, pair: &Pair) -> bool {
        self.pairs.contains(pair)
    }

    /// The leaf every network reduced by this sequence ends on.
    pub fn final_leaf(&self) -> &Taxon {
        match self.pairs.last() {
            Some(p) => p.second(),
            None => self.taxa.iter().next().expect("single-leaf universe"),
        }
    }

    /// Builds the network reduced by this sequence, adding pairs from last to first.
    ///
    /// Existing leaves whose parent is already a reticulation get the new
    /// incoming edge on that reticulation, so the result is stack-free; the
    /// second tree-child condition makes it tree-child.
    pub fn construct_network(&self) -> Network {
        let mut n = Network::single_leaf(self.final_leaf().clone());
        for pair in self.pairs.iter().rev() {
            n.add_pair_in_place(pair)
                .expect("tree-child sequences only attach to existing leaves");
        }
        n
    }
}

/// Validates `pairs` and builds its network.
pub fn construct_network(pairs: &[Pair]) -> Result<Network, SequenceError> {
    Ok(TcSequence::from_pairs(pairs.to_vec())?.construct_network())
}

/// A sequence prefix that respects the second tree-child condition.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialTcs {
    pairs: Vec<Pair>,
}

impl PartialTcs {
    pub fn new(pairs: Vec<Pair>) -> Result<Self, SequenceError> {
        let mut out = PartialTcs::default();
        for p in pairs {
            out.push(p)?;
        }
        Ok(out)
    }

    pub fn push(&mut self, pair: Pair) -> Result<(), SequenceError> {
        if self.pairs.iter().any(|q| q.first() == pair.second()) {
            return Err(SequenceError::ForbiddenSecond {
                index: self.pairs.len(),
                leaf: pair.second().clone(),
                pair,
            });
        }
        self.pairs.push(pair);
        Ok(())
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn forbidden(&self) -> BTreeSet<Taxon> {
        forbidden(&self.pairs)
    }

    pub fn is_extendable(&self, taxa: &BTreeSet<Taxon>) -> bool {
        self.completion(taxa).is_some()
    }

    /// A full tree-child sequence over `taxa` starting with this prefix.
    ///
    /// Picks the least non-forbidden leaf `z` and appends `(y, z)` for every
    /// second coordinate `y != z` that is never picked later in the prefix.
    pub fn completion(&self, taxa: &BTreeSet<Taxon>) -> Option<Vec<Pair>> {
        let banned = self.forbidden();
        let z = taxa.iter().find(|t| !banned.contains(*t))?;
        let mut out = self.pairs.clone();
        let mut pending: Vec<&Taxon> = Vec::new();
        for (i, p) in self.pairs.iter().enumerate() {
            let y = p.second();
            if y != z
                && !self.pairs[i + 1..].iter().any(|q| q.first() == y)
                && !pending.contains(&y)
            {
                pending.push(y);
            }
        }
        for y in pending {
            out.push(Pair::new(y.clone(), z.clone()).expect("y differs from z"));
        }
        Some(out)
    }
}

/// Condition 2 holds within `prefix` and some leaf of `taxa` is still allowed
/// as a second coordinate.
pub fn is_extendable(prefix: &[Pair], taxa: &BTreeSet<Taxon>) -> bool {
    PartialTcs::new(prefix.to_vec()).is_ok_and(|p| p.is_extendable(taxa))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct SequenceParseError {
    pub line: usize,
    pub message: String,
}

/// Parses one `first,second` pair per line. Blank lines and lines starting
/// with `#` are skipped; whitespace around labels is ignored.
pub fn parse_sequence(text: &str) -> Result<Vec<Pair>, SequenceParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| SequenceParseError {
            line: i + 1,
            message,
        };
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| err(format!("expected `first,second`, found `{line}`")))?;
        if b.contains(',') {
            return Err(err(format!("expected exactly one comma in `{line}`")));
        }
        let pair =
            Pair::from_labels(a.trim(), b.trim()).map_err(|e: TaxonError| err(e.to_string()))?;
        out.push(pair);
    }
    Ok(out)
}

/// One `first,second` line per pair.
pub fn format_sequence(pairs: &[Pair]) -> String {
    pairs.iter().map(|p| format!("{p}\n")).collect()
}
