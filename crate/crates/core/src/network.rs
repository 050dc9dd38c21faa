//! Rooted phylogenetic networks.
//!
//! A network is a directed acyclic graph with a single root of outdegree one,
//! uniquely labelled leaves, tree nodes (indegree one, outdegree two) and
//! reticulations (indegree at least two, outdegree one). [`Network`] is a plain
//! graph container: it can hold graphs that break these rules, and
//! [`Network::validate`] reports which rules are broken.
//!
//! Node ids are opaque. Two networks are considered equal when they are
//! isomorphic with leaf labels fixed, see [`Network::isomorphic`].

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::taxon::{Pair, Taxon};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Root,
    Leaf,
    TreeNode,
    Reticulation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PairKind {
    Cherry,
    ReticulatedCherry,
}

/// A reducible pair of a network.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReduciblePair {
    pub first: Taxon,
    pub second: Taxon,
    pub kind: PairKind,
}

impl ReduciblePair {
    pub fn pair(&self) -> Pair {
        Pair::new(self.first.clone(), self.second.clone())
            .expect("reducible pairs have distinct coordinates")
    }
}

/// A violated structural rule, naming the offending node(s).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    Empty,
    Cycle {
        nodes: Vec<NodeId>,
    },
    RootCount {
        roots: Vec<NodeId>,
    },
    RootOutdegree {
        node: NodeId,
        outdegree: usize,
    },
    UnlabeledLeaf {
        node: NodeId,
    },
    MisplacedLabel {
        node: NodeId,
        label: Taxon,
    },
    BadDegree {
        node: NodeId,
        indegree: usize,
        outdegree: usize,
    },
    ParallelEdge {
        from: NodeId,
        to: NodeId,
    },
}

impl Diagnostic {
    pub fn nodes(&self) -> Vec<NodeId> {
        match self {
            Diagnostic::Empty => Vec::new(),
            Diagnostic::Cycle { nodes } => nodes.clone(),
            Diagnostic::RootCount { roots } => roots.clone(),
            Diagnostic::RootOutdegree { node, .. }
            | Diagnostic::UnlabeledLeaf { node }
            | Diagnostic::MisplacedLabel { node, .. }
            | Diagnostic::BadDegree { node, .. } => vec![*node],
            Diagnostic::ParallelEdge { from, to } => vec![*from, *to],
        }
    }
}

fn join_ids(ids: &[NodeId]) -> String {
    ids.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Empty => write!(f, "network has no nodes"),
            Diagnostic::Cycle { nodes } => write!(f, "cycle through {}", join_ids(nodes)),
            Diagnostic::RootCount { roots } if roots.is_empty() => {
                write!(f, "no node of indegree 0 (root)")
            }
            Diagnostic::RootCount { roots } => {
                write!(f, "{} nodes of indegree 0: {}", roots.len(), join_ids(roots))
            }
            Diagnostic::RootOutdegree { node, outdegree } => {
                write!(f, "root {node} has outdegree {outdegree}, expected 1")
            }
            Diagnostic::UnlabeledLeaf { node } => write!(f, "leaf {node} has no label"),
            Diagnostic::MisplacedLabel { node, label } => {
                write!(f, "labelled node {node} ({label}) is not a leaf")
            }
            Diagnostic::BadDegree { node, indegree, outdegree } => write!(
                f,
                "{node} (indegree {indegree}, outdegree {outdegree}) is not a tree node/reticulation"
            ),
            Diagnostic::ParallelEdge { from, to } => {
                write!(f, "parallel edges from {from} to {to}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("duplicate leaf label {0}")]
    DuplicateLabel(Taxon),
    #[error("{0} is not a leaf of the network")]
    NotALeaf(Taxon),
    #[error("no edge from {0} to {1}")]
    MissingEdge(NodeId, NodeId),
    #[error("{0} is not a reticulation")]
    NotAReticulation(NodeId),
    #[error("invalid network: {}", describe(.0))]
    Invalid(Vec<Diagnostic>),
}

fn describe(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Clone, Debug, Default)]
struct Node {
    parents: Vec<NodeId>,
    children: Vec<NodeId>,
    label: Option<Taxon>,
}

#[derive(Clone, Debug, Default)]
pub struct Network {
    nodes: Vec<Option<Node>>,
    leaves: BTreeMap<Taxon, NodeId>,
    live: usize,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    /// The network `root -> leaf`.
    pub fn single_leaf(taxon: Taxon) -> Self {
        let mut n = Network::new();
        let root = n.add_node();
        let leaf = n.add_leaf(taxon).expect("fresh network");
        n.add_edge(root, leaf).expect("nodes exist");
        n
    }

    // ----- construction

    pub fn add_node(&mut self) -> NodeId {
        self.nodes.push(Some(Node::default()));
        self.live += 1;
        NodeId(self.nodes.len() - 1)
    }

    pub fn add_leaf(&mut self, taxon: Taxon) -> Result<NodeId, NetworkError> {
        if self.leaves.contains_key(&taxon) {
            return Err(NetworkError::DuplicateLabel(taxon));
        }
        let v = self.add_node();
        self.leaves.insert(taxon.clone(), v);
        self.node_mut(v).label = Some(taxon);
        Ok(v)
    }

    pub fn add_edge(&mut self, from: NodeId, to: NodeId) -> Result<(), NetworkError> {
        for v in [from, to] {
            if !self.contains(v) {
                return Err(NetworkError::UnknownNode(v));
            }
        }
        self.node_mut(from).children.push(to);
        self.node_mut(to).parents.push(from);
        Ok(())
    }

    /// Removes one edge `from -> to`; returns whether it existed.
    pub fn remove_edge(&mut self, from: NodeId, to: NodeId) -> bool {
        if !self.contains(from) || !self.contains(to) {
            return false;
        }
        let children = &mut self.node_mut(from).children;
        let Some(i) = children.iter().position(|&c| c == to) else {
            return false;
        };
        children.remove(i);
        let parents = &mut self.node_mut(to).parents;
        if let Some(j) = parents.iter().position(|&p| p == from) {
            parents.remove(j);
        }
        true
    }

    /// Removes a node and all edges touching it.
    pub fn remove_node(&mut self, v: NodeId) -> Result<(), NetworkError> {
        let node = self
            .nodes
            .get_mut(v.0)
            .and_then(Option::take)
            .ok_or(NetworkError::UnknownNode(v))?;
        self.live -= 1;
        for p in node.parents {
            if let Some(Some(pn)) = self.nodes.get_mut(p.0) {
                pn.children.retain(|&c| c != v);
            }
        }
        for c in node.children {
            if let Some(Some(cn)) = self.nodes.get_mut(c.0) {
                cn.parents.retain(|&p| p != v);
            }
        }
        if let Some(label) = node.label {
            self.leaves.remove(&label);
        }
        Ok(())
    }

    // ----- accessors

    pub fn contains(&self, v: NodeId) -> bool {
        matches!(self.nodes.get(v.0), Some(Some(_)))
    }

    fn node(&self, v: NodeId) -> &Node {
        self.nodes[v.0]
            .as_ref()
            .unwrap_or_else(|| panic!("unknown node {v}"))
    }

    fn node_mut(&mut self, v: NodeId) -> &mut Node {
        self.nodes[v.0]
            .as_mut()
            .unwrap_or_else(|| panic!("unknown node {v}"))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_some())
            .map(|(i, _)| NodeId(i))
    }

    pub fn node_count(&self) -> usize {
        self.live
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().flatten().map(|n| n.children.len()).sum()
    }

    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.node_ids()
            .flat_map(|u| self.node(u).children.iter().map(move |&c| (u, c)))
            .collect()
    }

    /// Parents of `v`. Panics on an unknown id.
    pub fn parents(&self, v: NodeId) -> &[NodeId] {
        &self.node(v).parents
    }

    /// Children of `v`. Panics on an unknown id.
    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.node(v).children
    }

    pub fn indegree(&self, v: NodeId) -> usize {
        self.node(v).parents.len()
    }

    pub fn outdegree(&self, v: NodeId) -> usize {
        self.node(v).children.len()
    }

    pub fn label(&self, v: NodeId) -> Option<&Taxon> {
        self.node(v).label.as_ref()
    }

    pub fn leaf(&self, taxon: &Taxon) -> Option<NodeId> {
        self.leaves.get(taxon).copied()
    }

    pub fn has_leaf(&self, taxon: &Taxon) -> bool {
        self.leaves.contains_key(taxon)
    }

    /// Leaf labels in ascending order.
    pub fn taxa(&self) -> impl Iterator<Item = &Taxon> + '_ {
        self.leaves.keys()
    }

    pub fn taxon_set(&self) -> BTreeSet<Taxon> {
        self.leaves.keys().cloned().collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// The unique node of indegree 0, if there is exactly one.
    pub fn root(&self) -> Option<NodeId> {
        let mut roots = self.node_ids().filter(|&v| self.indegree(v) == 0);
        let root = roots.next()?;
        roots.next().is_none().then_some(root)
    }

    /// The leaf of a single-leaf network `root -> x`.
    pub fn single_leaf_taxon(&self) -> Option<&Taxon> {
        if self.live != 2 || self.leaves.len() != 1 {
            return None;
        }
        let (taxon, &leaf) = self.leaves.iter().next()?;
        let parents = self.parents(leaf);
        (parents.len() == 1 && self.indegree(parents[0]) == 0).then_some(taxon)
    }

    /// Nodes in topological order (parents first), or the nodes left on cycles.
    pub fn topological_order(&self) -> Result<Vec<NodeId>, Vec<NodeId>> {
        let mut indeg: HashMap<NodeId, usize> =
            self.node_ids().map(|v| (v, self.indegree(v))).collect();
        let mut queue: VecDeque<NodeId> = self.node_ids().filter(|v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.live);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &c in self.children(v) {
                let d = indeg.get_mut(&c).expect("edge endpoints exist");
                *d -= 1;
                if *d == 0 {
                    queue.push_back(c);
                }
            }
        }
        if order.len() == self.live {
            Ok(order)
        } else {
            let mut stuck: Vec<NodeId> = indeg
                .into_iter()
                .filter(|&(_, d)| d > 0)
                .map(|(v, _)| v)
                .collect();
            stuck.sort();
            Err(stuck)
        }
    }

    // ----- structural checks

    /// All violated structural rules; empty iff the graph is a valid network.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.live == 0 {
            out.push(Diagnostic::Empty);
            return out;
        }
        for u in self.node_ids() {
            let mut seen = BTreeSet::new();
            for &c in self.children(u) {
                if !seen.insert(c) {
                    out.push(Diagnostic::ParallelEdge { from: u, to: c });
                }
            }
        }
        if let Err(nodes) = self.topological_order() {
            out.push(Diagnostic::Cycle { nodes });
        }
        let roots: Vec<NodeId> = self.node_ids().filter(|&v| self.indegree(v) == 0).collect();
        if roots.len() != 1 {
            out.push(Diagnostic::RootCount {
                roots: roots.clone(),
            });
        }
        for v in self.node_ids() {
            let (indeg, outdeg) = (self.indegree(v), self.outdegree(v));
            let label = self.label(v);
            if indeg == 0 {
                if let Some(label) = label {
                    out.push(Diagnostic::MisplacedLabel {
                        node: v,
                        label: label.clone(),
                    });
                }
                if roots.len() == 1 && outdeg != 1 {
                    out.push(Diagnostic::RootOutdegree {
                        node: v,
                        outdegree: outdeg,
                    });
                }
                continue;
            }
            match (label, indeg, outdeg) {
                (Some(_), 1, 0) => {}
                (Some(label), _, _) => out.push(Diagnostic::MisplacedLabel {
                    node: v,
                    label: label.clone(),
                }),
                (None, 1, 0) => out.push(Diagnostic::UnlabeledLeaf { node: v }),
                (None, 1, 2) => {}
                (None, d, 1) if d >= 2 => {}
                (None, _, _) => out.push(Diagnostic::BadDegree {
                    node: v,
                    indegree: indeg,
                    outdegree: outdeg,
                }),
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub(crate) fn ensure_valid(&self) -> Result<(), NetworkError> {
        let diagnostics = self.validate();
        if diagnostics.is_empty() {
            Ok(())
        } else {
            Err(NetworkError::Invalid(diagnostics))
        }
    }

    pub fn node_kind(&self, v: NodeId) -> Result<NodeKind, NetworkError> {
        if !self.contains(v) {
            return Err(NetworkError::UnknownNode(v));
        }
        Ok(if self.indegree(v) == 0 {
            NodeKind::Root
        } else if self.label(v).is_some() {
            NodeKind::Leaf
        } else if self.indegree(v) == 1 {
            NodeKind::TreeNode
        } else {
            NodeKind::Reticulation
        })
    }

    fn is_reticulation(&self, v: NodeId) -> bool {
        self.indegree(v) >= 2
    }

    pub fn reticulations(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.node_ids().filter(|&v| self.is_reticulation(v))
    }

    /// Reticulation edges minus reticulation nodes.
    pub fn reticulation_number(&self) -> usize {
        self.reticulations().map(|r| self.indegree(r) - 1).sum()
    }

    pub fn is_binary(&self) -> bool {
        self.reticulations().all(|r| self.indegree(r) == 2)
    }

    pub fn is_stack_free(&self) -> bool {
        self.reticulations()
            .all(|r| self.children(r).iter().any(|&c| !self.is_reticulation(c)))
    }

    pub fn is_tree_child(&self) -> bool {
        self.node_ids()
            .filter(|&v| self.outdegree(v) > 0 && self.indegree(v) != 0)
            .all(|v| self.children(v).iter().any(|&c| !self.is_reticulation(c)))
    }

    // ----- reducible pairs

    fn leaf_parent(&self, taxon: &Taxon) -> Option<(NodeId, NodeId)> {
        let leaf = self.leaf(taxon)?;
        match self.parents(leaf) {
            [p] => Some((leaf, *p)),
            _ => None,
        }
    }

    /// How `(x, y)` is reducible in this network, if it is.
    pub fn pair_kind(&self, pair: &Pair) -> Option<PairKind> {
        let (_, px) = self.leaf_parent(pair.first())?;
        let (_, py) = self.leaf_parent(pair.second())?;
        if px == py {
            Some(PairKind::Cherry)
        } else if self.is_reticulation(px) && self.parents(px).contains(&py) {
            Some(PairKind::ReticulatedCherry)
        } else {
            None
        }
    }

    /// Every cherry in both orders and every reticulated cherry.
    pub fn reducible_pairs(&self) -> BTreeSet<ReduciblePair> {
        let mut out = BTreeSet::new();
        for (x, &lx) in &self.leaves {
            let [px] = self.parents(lx) else { continue };
            let px = *px;
            if self.is_reticulation(px) {
                for &u in self.parents(px) {
                    for &c in self.children(u) {
                        if let (true, Some(y)) = (c != px, self.leaf_label(c)) {
                            out.insert(ReduciblePair {
                                first: x.clone(),
                                second: y.clone(),
                                kind: PairKind::ReticulatedCherry,
                            });
                        }
                    }
                }
            } else {
                for &c in self.children(px) {
                    if let (true, Some(y)) = (c != lx, self.leaf_label(c)) {
                        out.insert(ReduciblePair {
                            first: x.clone(),
                            second: y.clone(),
                            kind: PairKind::Cherry,
                        });
                    }
                }
            }
        }
        out
    }

    fn leaf_label(&self, v: NodeId) -> Option<&Taxon> {
        let node = self.node(v);
        if node.children.is_empty() {
            node.label.as_ref()
        } else {
            None
        }
    }

    // ----- reduction and addition

    /// The network `N(x,y)`. Pairs that are not reducible leave the network unchanged.
    pub fn reduce_pair(&self, pair: &Pair) -> Result<Network, NetworkError> {
        self.ensure_valid()?;
        let mut out = self.clone();
        out.reduce_in_place(pair);
        Ok(out)
    }

    /// Reduces `pair` in place without validating first; returns what was reduced.
    pub fn reduce_in_place(&mut self, pair: &Pair) -> Option<PairKind> {
        let kind = self.pair_kind(pair)?;
        let (lx, px) = self.leaf_parent(pair.first())?;
        match kind {
            PairKind::Cherry => {
                self.remove_node(lx).expect("leaf exists");
                self.suppress(px);
            }
            PairKind::ReticulatedCherry => {
                let (_, py) = self.leaf_parent(pair.second())?;
                self.remove_edge(py, px);
                self.suppress(py);
                self.suppress(px);
            }
        }
        Some(kind)
    }

    /// Deletes the reticulation edge `from -> reticulation` and suppresses
    /// any endpoint left with indegree and outdegree one.
    pub fn delete_reticulation_edge(
        &mut self,
        from: NodeId,
        reticulation: NodeId,
    ) -> Result<(), NetworkError> {
        if !self.contains(reticulation) {
            return Err(NetworkError::UnknownNode(reticulation));
        }
        if !self.is_reticulation(reticulation) {
            return Err(NetworkError::NotAReticulation(reticulation));
        }
        if !self.remove_edge(from, reticulation) {
            return Err(NetworkError::MissingEdge(from, reticulation));
        }
        self.suppress(from);
        self.suppress(reticulation);
        Ok(())
    }

    /// Splices out `v` if it is an unlabelled node with one parent and one child.
    /// Returns whether it did.
    pub fn suppress(&mut self, v: NodeId) -> bool {
        if !self.contains(v) {
            return false;
        }
        let node = self.node(v);
        if node.label.is_some() || node.parents.len() != 1 || node.children.len() != 1 {
            return false;
        }
        let (p, c) = (node.parents[0], node.children[0]);
        for slot in self.node_mut(p).children.iter_mut().filter(|s| **s == v) {
            *slot = c;
        }
        for slot in self.node_mut(c).parents.iter_mut().filter(|s| **s == v) {
            *slot = p;
        }
        self.nodes[v.0] = None;
        self.live -= 1;
        true
    }

    /// Suppresses degree-2 nodes until none remain.
    pub fn suppress_all(&mut self) {
        loop {
            let ids: Vec<NodeId> = self.node_ids().collect();
            let mut changed = false;
            for v in ids {
                changed |= self.suppress(v);
            }
            if !changed {
                break;
            }
        }
    }

    fn subdivide_above(&mut self, v: NodeId) -> Result<NodeId, NetworkError> {
        let [p] = *self.parents(v) else {
            return Err(NetworkError::Invalid(vec![Diagnostic::BadDegree {
                node: v,
                indegree: self.indegree(v),
                outdegree: self.outdegree(v),
            }]));
        };
        let m = self.add_node();
        for slot in self.node_mut(p).children.iter_mut().filter(|s| **s == v) {
            *slot = m;
        }
        self.node_mut(v).parents = vec![m];
        self.node_mut(m).parents.push(p);
        self.node_mut(m).children.push(v);
        Ok(m)
    }

    /// Adds `(x, y)`, reversing a reduction of that pair.
    pub fn add_pair(&self, pair: &Pair) -> Result<Network, NetworkError> {
        let mut out = self.clone();
        out.add_pair_in_place(pair)?;
        Ok(out)
    }

    pub fn add_pair_in_place(&mut self, pair: &Pair) -> Result<(), NetworkError> {
        let ly = self
            .leaf(pair.second())
            .ok_or_else(|| NetworkError::NotALeaf(pair.second().clone()))?;
        match self.leaf(pair.first()) {
            Some(lx) => {
                let [px] = *self.parents(lx) else {
                    return Err(NetworkError::NotALeaf(pair.first().clone()));
                };
                let target = if self.is_reticulation(px) {
                    px
                } else {
                    self.subdivide_above(lx)?
                };
                let q = self.subdivide_above(ly)?;
                self.add_edge(q, target)
            }
            None => {
                let q = self.subdivide_above(ly)?;
                let lx = self.add_leaf(pair.first().clone())?;
                self.add_edge(q, lx)
            }
        }
    }

    /// Removes leaves outside `keep`, prunes unlabelled nodes left without
    /// children and suppresses degree-2 nodes.
    pub fn restrict_to(&self, keep: &BTreeSet<Taxon>) -> Network {
        let mut out = self.clone();
        let dropped: Vec<NodeId> = out
            .leaves
            .iter()
            .filter(|(t, _)| !keep.contains(*t))
            .map(|(_, &v)| v)
            .collect();
        let mut work: Vec<NodeId> = Vec::new();
        for v in dropped {
            work.extend_from_slice(out.parents(v));
            out.remove_node(v).expect("leaf exists");
        }
        while let Some(v) = work.pop() {
            if out.contains(v)
                && out.label(v).is_none()
                && out.outdegree(v) == 0
                && out.indegree(v) > 0
            {
                work.extend_from_slice(out.parents(v));
                out.remove_node(v).expect("node exists");
            }
        }
        out.suppress_all();
        out
    }

    // ----- isomorphism

    /// A string per node describing the labelled subgraph below it. Keys are
    /// invariant under isomorphism; for tree-child networks distinct nodes get
    /// distinct keys. `None` if the graph has a cycle.
    pub fn canonical_keys(&self) -> Option<HashMap<NodeId, String>> {
        let order = self.topological_order().ok()?;
        let mut keys: HashMap<NodeId, String> = HashMap::with_capacity(order.len());
        for &v in order.iter().rev() {
            let key = match self.label(v) {
                Some(label) if self.outdegree(v) == 0 => quote_label(label.as_str()),
                label => {
                    let mut parts: Vec<&str> =
                        self.children(v).iter().map(|c| keys[c].as_str()).collect();
                    parts.sort_unstable();
                    let inner = parts.join(",");
                    let tag = label.map(|l| quote_label(l.as_str())).unwrap_or_default();
                    match self.indegree(v) {
                        0 => format!("^({inner}){tag}"),
                        1 => format!("({inner}){tag}"),
                        d => format!("#{d}({inner}){tag}"),
                    }
                }
            };
            keys.insert(v, key);
        }
        Some(keys)
    }

    /// The key of the root; a complete isomorphism invariant for tree-child networks.
    pub fn canonical_form(&self) -> Option<String> {
        let root = self.root()?;
        self.canonical_keys()?.remove(&root)
    }

    /// Whether a leaf-label-preserving graph isomorphism exists.
    pub fn isomorphic(&self, other: &Network) -> bool {
        if self.live != other.live
            || self.edge_count() != other.edge_count()
            || !self.leaves.keys().eq(other.leaves.keys())
        {
            return false;
        }
        let (Some(ka), Some(kb)) = (self.canonical_keys(), other.canonical_keys()) else {
            return false;
        };
        let mut groups: HashMap<&str, Vec<NodeId>> = HashMap::new();
        for (v, k) in &kb {
            groups.entry(k.as_str()).or_default().push(*v);
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for k in ka.values() {
            *counts.entry(k.as_str()).or_default() += 1;
        }
        if counts.len() != groups.len()
            || counts
                .iter()
                .any(|(k, n)| groups.get(k).map(Vec::len) != Some(*n))
        {
            return false;
        }
        let order = self.topological_order().expect("keys exist, so acyclic");
        let mut mapping: HashMap<NodeId, NodeId> = HashMap::with_capacity(order.len());
        let mut used: BTreeSet<NodeId> = BTreeSet::new();
        self.extend_mapping(other, &order, 0, &ka, &groups, &mut mapping, &mut used)
    }

    #[allow(clippy::too_many_arguments)]
    fn extend_mapping(
        &self,
        other: &Network,
        order: &[NodeId],
        i: usize,
        keys: &HashMap<NodeId, String>,
        groups: &HashMap<&str, Vec<NodeId>>,
        mapping: &mut HashMap<NodeId, NodeId>,
        used: &mut BTreeSet<NodeId>,
    ) -> bool {
        let Some(&u) = order.get(i) else {
            return true;
        };
        let mut want: Vec<NodeId> = self.parents(u).iter().map(|p| mapping[p]).collect();
        want.sort_unstable();
        for &cand in &groups[keys[&u].as_str()] {
            if used.contains(&cand) {
                continue;
            }
            let mut have = other.parents(cand).to_vec();
            have.sort_unstable();
            if have != want {
                continue;
            }
            mapping.insert(u, cand);
            used.insert(cand);
            if self.extend_mapping(other, order, i + 1, keys, groups, mapping, used) {
                return true;
            }
            mapping.remove(&u);
            used.remove(&cand);
        }
        false
    }
}

fn quote_label(label: &str) -> String {
    format!("'{}'", label.replace('\'', "''"))
}
