//! Extended Newick reading and writing.
//!
//! Plain Newick trees plus reticulation tags `#H<id>`. All occurrences of a
//! tag denote one reticulation. Exactly one occurrence carries the
//! reticulation's child, either as a parenthesised subtree `(2)#H1` or as a
//! leaf label `2#H1`; the bare occurrences `#H1` add incoming edges.
//!
//! The Newick top-level node gets an extra root edge on input, and that edge
//! is left implicit on output. Internal labels, branch lengths, supports and
//! `[...]` comments are accepted and dropped.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::network::{Network, NodeId};
use crate::taxon::Taxon;

/// A positioned syntax or structure error. Lines and columns start at 1.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )?;
        if let Some(expected) = &self.expected {
            write!(f, " (expected {expected})")?;
        }
        Ok(())
    }
}

/// The networks of an instance file, with the line each came from.
#[derive(Debug, Clone, Default)]
pub struct ENewickDocument {
    pub networks: Vec<Network>,
    pub lines: Vec<usize>,
}

/// Parses one network terminated by `;`.
pub fn parse_enewick(text: &str) -> Result<Network, ParseError> {
    Parser::new(text, 1).network()
}

/// Parses an instance file: one network per line, `#` starts a comment line.
pub fn parse_document(text: &str) -> Result<ENewickDocument, ParseError> {
    let mut doc = ENewickDocument::default();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        doc.networks.push(Parser::new(line, i + 1).network()?);
        doc.lines.push(i + 1);
    }
    Ok(doc)
}

const DELIMITERS: &[char] = &['(', ')', ',', ':', ';', '#', '[', ']', '\''];

struct TagState {
    node: NodeId,
    child_bearing: usize,
    occurrences: usize,
    first_seen: usize,
}

struct Parser {
    chars: Vec<char>,
    positions: Vec<(usize, usize)>,
    pos: usize,
    net: Network,
    node_pos: HashMap<NodeId, usize>,
    tags: BTreeMap<String, TagState>,
}

impl Parser {
    fn new(text: &str, first_line: usize) -> Self {
        let chars: Vec<char> = text.chars().collect();
        let mut positions = Vec::with_capacity(chars.len() + 1);
        let (mut line, mut col) = (first_line, 1);
        for &c in &chars {
            positions.push((line, col));
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        positions.push((line, col));
        Parser {
            chars,
            positions,
            pos: 0,
            net: Network::new(),
            node_pos: HashMap::new(),
            tags: BTreeMap::new(),
        }
    }

    fn error_at(
        &self,
        at: usize,
        message: impl Into<String>,
        expected: Option<&str>,
    ) -> ParseError {
        let (line, column) = self.positions[at.min(self.positions.len() - 1)];
        ParseError {
            line,
            column,
            message: message.into(),
            expected: expected.map(str::to_owned),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) -> Result<(), ParseError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => self.pos += 1,
                Some('[') => {
                    let start = self.pos;
                    while self.peek().is_some_and(|c| c != ']') {
                        self.pos += 1;
                    }
                    if self.peek().is_none() {
                        return Err(self.error_at(start, "unterminated comment", Some("']'")));
                    }
                    self.pos += 1;
                }
                _ => return Ok(()),
            }
        }
    }

    fn network(mut self) -> Result<Network, ParseError> {
        self.skip_ws()?;
        if self.peek().is_none() {
            return Err(self.error_at(self.pos, "empty input", Some("a network")));
        }
        let top = self.subtree()?;
        self.skip_ws()?;
        match self.peek() {
            Some(';') => self.pos += 1,
            None => return Err(self.error_at(self.pos, "missing ';'", Some("';'"))),
            Some(')') => {
                return Err(self.error_at(self.pos, "unbalanced parentheses", Some("';'")))
            }
            Some(c) => {
                return Err(self.error_at(self.pos, format!("unexpected '{c}'"), Some("';'")))
            }
        }
        self.skip_ws()?;
        if let Some(c) = self.peek() {
            return Err(self.error_at(
                self.pos,
                format!("unexpected '{c}' after ';'"),
                Some("end of network"),
            ));
        }
        for (id, tag) in &self.tags {
            if tag.child_bearing == 0 {
                return Err(self.error_at(
                    tag.first_seen,
                    format!("reticulation #{id} has no occurrence carrying its child"),
                    None,
                ));
            }
            if tag.occurrences < 2 {
                return Err(self.error_at(
                    tag.first_seen,
                    format!("reticulation #{id} has indegree 1"),
                    Some("at least two occurrences"),
                ));
            }
        }
        let root = self.net.add_node();
        self.node_pos.insert(root, 0);
        self.net.add_edge(root, top).expect("nodes exist");
        if let Some(d) = self.net.validate().into_iter().next() {
            let at = d
                .nodes()
                .first()
                .and_then(|v| self.node_pos.get(v))
                .copied()
                .unwrap_or(0);
            return Err(self.error_at(at, format!("invalid network: {d}"), None));
        }
        Ok(self.net)
    }

    fn new_node(&mut self, at: usize) -> NodeId {
        let v = self.net.add_node();
        self.node_pos.insert(v, at);
        v
    }

    fn new_leaf(&mut self, label: String, at: usize) -> Result<NodeId, ParseError> {
        let taxon = Taxon::new(&label).map_err(|e| self.error_at(at, e.to_string(), None))?;
        let v = self
            .net
            .add_leaf(taxon)
            .map_err(|_| self.error_at(at, format!("duplicate leaf label '{label}'"), None))?;
        self.node_pos.insert(v, at);
        Ok(v)
    }

    fn tag_node(&mut self, id: &str, at: usize, bears_child: bool) -> Result<NodeId, ParseError> {
        let node = match self.tags.get(id) {
            Some(tag) => tag.node,
            None => {
                let node = self.new_node(at);
                self.tags.insert(
                    id.to_owned(),
                    TagState {
                        node,
                        child_bearing: 0,
                        occurrences: 0,
                        first_seen: at,
                    },
                );
                node
            }
        };
        let tag = self.tags.get_mut(id).expect("inserted above");
        tag.occurrences += 1;
        if bears_child {
            tag.child_bearing += 1;
            if tag.child_bearing > 1 {
                return Err(self.error_at(
                    at,
                    format!("reticulation #{id} carries a subtree more than once"),
                    Some(&format!("a bare reference '#{id}'")),
                ));
            }
            self.node_pos.insert(node, at);
        }
        Ok(node)
    }

    fn subtree(&mut self) -> Result<NodeId, ParseError> {
        self.skip_ws()?;
        let start = self.pos;
        if self.peek() == Some('(') {
            self.pos += 1;
            let mut children = Vec::new();
            loop {
                children.push(self.subtree()?);
                self.skip_ws()?;
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    None => {
                        return Err(self.error_at(self.pos, "unbalanced parentheses", Some("')'")))
                    }
                    Some(c) => {
                        return Err(self.error_at(
                            self.pos,
                            format!("unexpected '{c}'"),
                            Some("',' or ')'"),
                        ))
                    }
                }
            }
            self.label()?;
            let tag_at = self.pos;
            let tag = self.tag()?;
            self.branch_info()?;
            let node = match tag {
                Some(id) => self.tag_node(&id, tag_at, true)?,
                None => self.new_node(start),
            };
            for c in children {
                self.net.add_edge(node, c).expect("nodes exist");
            }
            Ok(node)
        } else {
            let label = self.label()?;
            let tag_at = self.pos;
            let tag = self.tag()?;
            self.branch_info()?;
            match (label, tag) {
                (Some(label), None) => self.new_leaf(label, start),
                (Some(label), Some(id)) => {
                    let node = self.tag_node(&id, tag_at, true)?;
                    let leaf = self.new_leaf(label, start)?;
                    self.net.add_edge(node, leaf).expect("nodes exist");
                    Ok(node)
                }
                (None, Some(id)) => self.tag_node(&id, tag_at, false),
                (None, None) => {
                    let found = match self.peek() {
                        Some(c) => format!("unexpected '{c}'"),
                        None => "unexpected end of input".to_owned(),
                    };
                    Err(self.error_at(self.pos, found, Some("a label or '('")))
                }
            }
        }
    }

    fn label(&mut self) -> Result<Option<String>, ParseError> {
        self.skip_ws()?;
        if self.peek() == Some('\'') {
            let start = self.pos;
            self.pos += 1;
            let mut out = String::new();
            loop {
                match self.peek() {
                    None => {
                        return Err(self.error_at(
                            start,
                            "unterminated quoted label",
                            Some("'\\''"),
                        ))
                    }
                    Some('\'') if self.chars.get(self.pos + 1) == Some(&'\'') => {
                        out.push('\'');
                        self.pos += 2;
                    }
                    Some('\'') => {
                        self.pos += 1;
                        break;
                    }
                    Some(c) => {
                        out.push(c);
                        self.pos += 1;
                    }
                }
            }
            if out.is_empty() {
                return Err(self.error_at(start, "empty quoted label", Some("a label")));
            }
            return Ok(Some(out));
        }
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| !c.is_whitespace() && !DELIMITERS.contains(&c))
        {
            self.pos += 1;
        }
        Ok((self.pos > start).then(|| self.chars[start..self.pos].iter().collect()))
    }

    fn tag(&mut self) -> Result<Option<String>, ParseError> {
        if self.peek() != Some('#') {
            return Ok(None);
        }
        let start = self.pos;
        self.pos += 1;
        if self.peek() != Some('H') {
            return Err(self.error_at(start, "unsupported reticulation tag", Some("'#H<id>'")));
        }
        self.pos += 1;
        let id_start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            self.pos += 1;
        }
        if self.pos == id_start {
            return Err(self.error_at(self.pos, "missing reticulation id", Some("'#H<id>'")));
        }
        Ok(Some(format!(
            "H{}",
            self.chars[id_start..self.pos].iter().collect::<String>()
        )))
    }

    fn branch_info(&mut self) -> Result<(), ParseError> {
        self.skip_ws()?;
        while self.peek() == Some(':') {
            self.pos += 1;
            self.skip_ws()?;
            let start = self.pos;
            while self
                .peek()
                .is_some_and(|c| !c.is_whitespace() && !DELIMITERS.contains(&c))
            {
                self.pos += 1;
            }
            let text: String = self.chars[start..self.pos].iter().collect();
            if !text.is_empty() && text.parse::<f64>().is_err() {
                return Err(self.error_at(
                    start,
                    format!("invalid branch value '{text}'"),
                    Some("a number"),
                ));
            }
            self.skip_ws()?;
        }
        Ok(())
    }
}

fn write_label(label: &str, out: &mut String) {
    if label
        .chars()
        .any(|c| c.is_whitespace() || DELIMITERS.contains(&c))
    {
        out.push('\'');
        out.push_str(&label.replace('\'', "''"));
        out.push('\'');
    } else {
        out.push_str(label);
    }
}

/// Serializes a valid network. Children are ordered by the least leaf label
/// below them (ties broken by structure) and reticulation tags are numbered
/// in order of first appearance, so isomorphic networks give the same text.
pub fn write_enewick(network: &Network) -> String {
    let keys = network
        .canonical_keys()
        .expect("valid networks are acyclic");
    let order = network
        .topological_order()
        .expect("valid networks are acyclic");
    let mut least: HashMap<NodeId, &Taxon> = HashMap::new();
    for &v in order.iter().rev() {
        let own = network.label(v);
        let below = network.children(v).iter().map(|c| least[c]).min();
        if let Some(t) = own.into_iter().chain(below).min() {
            least.insert(v, t);
        }
    }
    let root = network.root().expect("valid networks have a root");
    let mut writer = Writer {
        network,
        keys: &keys,
        least: &least,
        tags: HashMap::new(),
        out: String::new(),
    };
    for &top in network.children(root) {
        writer.node(top);
    }
    writer.out.push(';');
    writer.out
}

struct Writer<'a> {
    network: &'a Network,
    keys: &'a HashMap<NodeId, String>,
    least: &'a HashMap<NodeId, &'a Taxon>,
    tags: HashMap<NodeId, usize>,
    out: String,
}

impl Writer<'_> {
    fn node(&mut self, v: NodeId) {
        let n = self.network;
        if let Some(label) = n.label(v).filter(|_| n.outdegree(v) == 0) {
            write_label(label.as_str(), &mut self.out);
            return;
        }
        let reticulate = n.indegree(v) >= 2;
        if reticulate {
            if let Some(id) = self.tags.get(&v) {
                self.out.push_str(&format!("#H{id}"));
                return;
            }
            let id = self.tags.len() + 1;
            self.tags.insert(v, id);
        }
        let mut children = n.children(v).to_vec();
        children.sort_by(|a, b| {
            (self.least.get(a), &self.keys[a]).cmp(&(self.least.get(b), &self.keys[b]))
        });
        self.out.push('(');
        for (i, &c) in children.iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            self.node(c);
        }
        self.out.push(')');
        if reticulate {
            self.out.push_str(&format!("#H{}", self.tags[&v]));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_tree() {
        let n = parse_enewick("((1,2),3);").unwrap();
        assert_eq!(n.leaf_count(), 3);
        assert_eq!(n.node_count(), 6);
        assert_eq!(n.reticulation_number(), 0);
        assert_eq!(write_enewick(&n), "((1,2),3);");
    }

    #[test]
    fn one_reticulation() {
        let n = parse_enewick("((1,(2)#H1),(#H1,3));").unwrap();
        assert_eq!(n.reticulation_number(), 1);
        assert!(n.is_tree_child());
        let r = n.reticulations().next().unwrap();
        let child = n.children(r)[0];
        assert_eq!(n.label(child).unwrap().as_str(), "2");
        assert_eq!(write_enewick(&n), "((1,(2)#H1),(#H1,3));");
    }

    #[test]
    fn leaf_form_tag_equals_subtree_form() {
        let a = parse_enewick("((1,2#H1),(#H1,3));").unwrap();
        let b = parse_enewick("((1,(2)#H1),(#H1,3));").unwrap();
        assert!(a.isomorphic(&b));
    }

    #[test]
    fn missing_parenthesis() {
        let e = parse_enewick("((1,2);").unwrap_err();
        assert_eq!((e.line, e.column), (1, 7));
        assert_eq!(e.expected.as_deref(), Some("',' or ')'"));
    }

    #[test]
    fn single_leaf_and_cherry_output() {
        assert_eq!(write_enewick(&parse_enewick("x;").unwrap()), "x;");
        assert_eq!(write_enewick(&parse_enewick("(2,1);").unwrap()), "(1,2);");
    }

    #[test]
    fn lengths_labels_and_comments_are_dropped() {
        let n = parse_enewick("((a:0.1,b:2e-3)ab:1[&support=9],'c d':0.5)top;").unwrap();
        assert_eq!(write_enewick(&n), "((a,b),'c d');");
    }

    #[test]
    fn structural_errors() {
        let cases = [
            ("((1,2),1);", "duplicate"),
            ("((1,(2)#H1),3);", "indegree 1"),
            ("((1,#H1),(#H1,3));", "no occurrence"),
            ("(((1)#H1,(2)#H1),(#H1,3));", "more than once"),
            ("((1,2)#LGT1,3);", "unsupported"),
            ("(1,2,3);", "not a tree node"),
            ("(1,2):x;", "branch"),
            ("(1,2); (3,4);", "after ';'"),
            ("", "empty"),
            ("(1,2)", "missing ';'"),
        ];
        for (text, needle) in cases {
            let e = parse_enewick(text).unwrap_err();
            assert!(e.message.contains(needle), "{text}: {e}");
            assert!(e.line >= 1 && e.column >= 1);
        }
    }

    #[test]
    fn document_lines() {
        let text = "# two trees\n((1,2),3);\n\n((1,3),2);\n";
        let doc = parse_document(text).unwrap();
        assert_eq!(doc.networks.len(), 2);
        assert_eq!(doc.lines, vec![2, 4]);
        let e = parse_document("(1,2);\n((1,2),3;\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn non_binary_reticulation_round_trip() {
        let text = "((1,(2)#H1),((#H1,3),(#H1,4)));";
        let n = parse_enewick(text).unwrap();
        assert!(!n.is_binary());
        assert_eq!(n.reticulation_number(), 2);
        let again = parse_enewick(&write_enewick(&n)).unwrap();
        assert!(again.isomorphic(&n));
    }
}
