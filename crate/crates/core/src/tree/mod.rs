//! Leaf-labelled trees with polytomies, Newick I/O, quartet distances and a
//! neighbor-joining baseline.
//!
//! Trees are stored rooted (Newick is rooted by construction) but every
//! metric here treats them as unrooted.

mod newick;
mod nj;
mod quartet;

use std::collections::{BTreeSet, HashMap};

use crate::{Error, Result};

pub use newick::parse_newick;
pub use nj::{hamming_matrix, nj_tree, DistanceMatrix};
pub use quartet::{gq_distance, gq_counts, quartet_topology, GqCounts, QuartetTopology, StarPolicy};

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub label: Option<String>,
    /// Length of the edge to the parent.
    pub length: Option<f64>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
    root: usize,
}

/// Pointer-free nested form used to build and rebuild trees.
#[derive(Debug, Clone)]
pub(crate) struct Subtree {
    pub label: Option<String>,
    pub length: Option<f64>,
    pub children: Vec<Subtree>,
}

impl Tree {
    pub fn parse(text: &str) -> Result<Tree> {
        parse_newick(text)
    }

    /// Builds a tree from nested subtrees. Unary nodes are suppressed (edge
    /// lengths add up) and leaf labels must be present and unique.
    pub(crate) fn from_subtree(root: Subtree) -> Result<Tree> {
        let root = suppress_unary(root, true);
        let mut tree = Tree {
            nodes: Vec::new(),
            root: 0,
        };
        tree.push_subtree(root, None);
        tree.check_labels()?;
        Ok(tree)
    }

    fn push_subtree(&mut self, sub: Subtree, parent: Option<usize>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            label: sub.label,
            length: sub.length,
            parent,
            children: Vec::new(),
        });
        for child in sub.children {
            let c = self.push_subtree(child, Some(id));
            self.nodes[id].children.push(c);
        }
        id
    }

    fn check_labels(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for node in self.nodes.iter().filter(|n| n.is_leaf()) {
            match &node.label {
                None => return Err(Error::data("unlabelled leaf")),
                Some(l) if !seen.insert(l.as_str()) => {
                    return Err(Error::data(format!("duplicate leaf label {l:?}")))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub(crate) fn to_subtree(&self, node: usize) -> Subtree {
        let n = &self.nodes[node];
        Subtree {
            label: n.label.clone(),
            length: n.length,
            children: n.children.iter().map(|&c| self.to_subtree(c)).collect(),
        }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf())
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    pub fn leaf_labels(&self) -> BTreeSet<String> {
        self.leaves()
            .filter_map(|i| self.nodes[i].label.clone())
            .collect()
    }

    pub fn find_leaf(&self, label: &str) -> Option<usize> {
        self.leaves()
            .find(|&i| self.nodes[i].label.as_deref() == Some(label))
    }

    /// Internal nodes other than the root; each one is the lower end of a
    /// contractible edge.
    pub fn internal_edges(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| i != self.root && !self.nodes[i].is_leaf())
            .collect()
    }

    /// Removes the edge above internal node `node`, attaching its children
    /// to its parent.
    pub fn contract_edge(&self, node: usize) -> Result<Tree> {
        if node == self.root || self.nodes.get(node).is_none_or(Node::is_leaf) {
            return Err(Error::Param(format!("node {node} is not a non-root internal node")));
        }
        fn build(t: &Tree, id: usize, target: usize) -> Subtree {
            let n = &t.nodes[id];
            let mut children = Vec::new();
            for &c in &n.children {
                if c == target {
                    children.extend(t.nodes[c].children.iter().map(|&g| build(t, g, target)));
                } else {
                    children.push(build(t, c, target));
                }
            }
            Subtree {
                label: n.label.clone(),
                length: n.length,
                children,
            }
        }
        Tree::from_subtree(build(self, self.root, node))
    }

    fn adjacency(&self) -> Vec<Vec<(usize, Option<f64>)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                adj[i].push((p, n.length));
                adj[p].push((i, n.length));
            }
        }
        adj
    }

    /// The same unrooted tree hung from internal node `node`.
    pub fn rerooted(&self, node: usize) -> Result<Tree> {
        if self.nodes.get(node).is_none_or(Node::is_leaf) {
            return Err(Error::Param(format!("node {node} is not an internal node")));
        }
        let adj = self.adjacency();
        fn build(
            t: &Tree,
            adj: &[Vec<(usize, Option<f64>)>],
            id: usize,
            from: Option<usize>,
            length: Option<f64>,
        ) -> Subtree {
            Subtree {
                label: t.nodes[id].label.clone(),
                length,
                children: adj[id]
                    .iter()
                    .filter(|(n, _)| Some(*n) != from)
                    .map(|&(n, len)| build(t, adj, n, Some(id), len))
                    .collect(),
            }
        }
        Tree::from_subtree(build(self, &adj, node, None, None))
    }

    /// The subtree induced by the leaves in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> Result<Tree> {
        fn build(t: &Tree, id: usize, keep: &BTreeSet<String>) -> Option<Subtree> {
            let n = &t.nodes[id];
            if n.is_leaf() {
                return n
                    .label
                    .as_ref()
                    .filter(|l| keep.contains(*l))
                    .map(|_| t.to_subtree(id));
            }
            let children: Vec<Subtree> = n.children.iter().filter_map(|&c| build(t, c, keep)).collect();
            (!children.is_empty()).then(|| Subtree {
                label: n.label.clone(),
                length: n.length,
                children,
            })
        }
        let sub = build(self, self.root, keep)
            .ok_or_else(|| Error::data("restriction removes every leaf"))?;
        Tree::from_subtree(sub)
    }

    /// Topological (edge-count) distances between the given leaves.
    pub fn path_lengths(&self, labels: &[&str]) -> Result<Vec<Vec<u32>>> {
        let adj = self.adjacency();
        let index: HashMap<usize, usize> = labels
            .iter()
            .enumerate()
            .map(|(k, l)| {
                self.find_leaf(l)
                    .map(|node| (node, k))
                    .ok_or_else(|| Error::data(format!("unknown leaf {l:?}")))
            })
            .collect::<Result<_>>()?;
        let mut out = vec![vec![0u32; labels.len()]; labels.len()];
        let mut dist = vec![u32::MAX; self.nodes.len()];
        let mut queue = std::collections::VecDeque::new();
        for (k, l) in labels.iter().enumerate() {
            let start = self.find_leaf(l).expect("checked above");
            dist.fill(u32::MAX);
            dist[start] = 0;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                if let Some(&j) = index.get(&u) {
                    out[k][j] = dist[u];
                }
                for &(v, _) in &adj[u] {
                    if dist[v] == u32::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Replaces leaf labels through `f`; labels mapped to `None` stay as they are.
    pub fn relabel(&self, f: impl Fn(&str) -> Option<String>) -> Result<Tree> {
        let mut sub = self.to_subtree(self.root);
        fn walk(s: &mut Subtree, f: &dyn Fn(&str) -> Option<String>) {
            if s.children.is_empty() {
                if let Some(new) = s.label.as_deref().and_then(f) {
                    s.label = Some(new);
                }
            }
            s.children.iter_mut().for_each(|c| walk(c, f));
        }
        walk(&mut sub, &f);
        Tree::from_subtree(sub)
    }

    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        self.write_node(self.root, &mut out);
        out.push(';');
        out
    }

    fn write_node(&self, id: usize, out: &mut String) {
        let n = &self.nodes[id];
        if !n.children.is_empty() {
            out.push('(');
            for (k, &c) in n.children.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                self.write_node(c, out);
            }
            out.push(')');
        }
        if let Some(l) = &n.label {
            out.push_str(&newick::quote_label(l));
        }
        if let Some(len) = n.length {
            out.push(':');
            out.push_str(&format_length(len));
        }
    }
}

fn format_length(len: f64) -> String {
    let s = format!("{len:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" { "0".into() } else { s.into() }
}

fn suppress_unary(mut sub: Subtree, is_root: bool) -> Subtree {
    sub.children = std::mem::take(&mut sub.children)
        .into_iter()
        .map(|c| suppress_unary(c, false))
        .collect();
    while sub.children.len() == 1 {
        let child = sub.children.pop().expect("one child");
        let length = if is_root {
            None
        } else {
            match (sub.length, child.length) {
                (None, None) => None,
                (a, b) => Some(a.unwrap_or(0.0) + b.unwrap_or(0.0)),
            }
        };
        let label = if child.children.is_empty() { child.label } else { sub.label.or(child.label) };
        sub = Subtree {
            label,
            length,
            children: child.children,
        };
    }
    sub
}

/// Extracts a bracketed glottocode from a label such as
/// `'Hungarian [hung1274][hun]-l-'`.
pub fn glottocode_in_label(label: &str) -> Option<String> {
    label
        .split('[')
        .skip(1)
        .filter_map(|s| s.split(']').next())
        .find(|s| crate::corpus::is_glottocode(s))
        .map(str::to_string)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polytomous_root() {
        let t = Tree::parse("(a,b,(c,d));").unwrap();
        assert_eq!(t.node(t.root()).children.len(), 3);
        assert_eq!(t.leaf_count(), 4);
    }

    #[test]
    fn unary_nodes_are_suppressed() {
        let t = Tree::parse("(((a:1):2,b:1):1,c:1);").unwrap();
        assert_eq!(t.to_newick(), "((a:3,b:1):1,c:1);");
        let t = Tree::parse("((a,b,c));").unwrap();
        assert_eq!(t.to_newick(), "(a,b,c);");
    }

    #[test]
    fn contraction_and_reroot() {
        let t = Tree::parse("((a,b)x,(c,d)y,e);").unwrap();
        let x = t.internal_edges()[0];
        let c = t.contract_edge(x).unwrap();
        assert_eq!(c.to_newick(), "(a,b,(c,d)y,e);");
        let leaf = t.find_leaf("a").unwrap();
        let r = t.rerooted(t.node(leaf).parent.unwrap()).unwrap();
        assert_eq!(r.leaf_labels(), t.leaf_labels());
        assert!(t.contract_edge(t.root()).is_err());
    }

    #[test]
    fn restriction() {
        let t = Tree::parse("((a:1,b:1):1,(c:1,d:1):1,e:1);").unwrap();
        let keep: BTreeSet<String> = ["a", "c", "d"].iter().map(|s| s.to_string()).collect();
        assert_eq!(t.restrict(&keep).unwrap().to_newick(), "(a:2,(c:1,d:1):1);");
    }

    #[test]
    fn topological_distances() {
        let t = Tree::parse("((a,b),(c,d),e);").unwrap();
        let d = t.path_lengths(&["a", "b", "c", "e"]).unwrap();
        assert_eq!(d[0][1], 2);
        assert_eq!(d[0][2], 4);
        assert_eq!(d[0][3], 3);
        assert!(t.path_lengths(&["zz"]).is_err());
    }

    #[test]
    fn glottolog_labels() {
        assert_eq!(glottocode_in_label("Hungarian [hung1274][hun]-l-").as_deref(), Some("hung1274"));
        assert_eq!(glottocode_in_label("plain"), None);
    }
}
