//! Elimination-order trees and their DAG compression.
//!
//! The feasible orders of a [`SearchReport`] form a prefix tree whose edges
//! are eliminations. Identical subtrees are merged by hashing a canonical
//! serialization of each subtree (its label followed by its children's
//! hashes, children in candidate-id order), which yields the smallest DAG
//! with the same root-to-sink label paths.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::election::CandidateId;
use crate::error::{RcvError, Result};
use crate::search::SearchReport;

pub type Digest = [u8; 32];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    /// Candidate eliminated on the edge into this node; `None` for the root.
    pub label: Option<CandidateId>,
    /// Ordered by label.
    pub children: Vec<usize>,
}

/// Prefix tree of elimination orders. Node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeTree {
    pub candidates: Vec<String>,
    pub nodes: Vec<TreeNode>,
}

impl OutcomeTree {
    pub fn from_orders<'a>(candidates: Vec<String>, orders: impl IntoIterator<Item = &'a [CandidateId]>) -> Self {
        let mut nodes = vec![TreeNode { label: None, children: Vec::new() }];
        for order in orders {
            let mut at = 0;
            for &c in order {
                let found = nodes[at].children.iter().copied().find(|&i| nodes[i].label == Some(c));
                at = match found {
                    Some(i) => i,
                    None => {
                        let i = nodes.len();
                        nodes.push(TreeNode { label: Some(c), children: Vec::new() });
                        let pos = nodes[at].children.partition_point(|&j| nodes[j].label < Some(c));
                        nodes[at].children.insert(pos, i);
                        i
                    }
                };
            }
        }
        OutcomeTree { candidates, nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    /// Label sequences of all root-to-leaf paths.
    pub fn paths(&self) -> BTreeSet<Vec<CandidateId>> {
        let mut out = BTreeSet::new();
        let mut stack = vec![(0usize, Vec::new())];
        while let Some((i, path)) = stack.pop() {
            if self.nodes[i].children.is_empty() {
                if i != 0 {
                    out.insert(path);
                }
                continue;
            }
            for &c in &self.nodes[i].children {
                let mut p = path.clone();
                p.push(self.nodes[c].label.expect("non-root"));
                stack.push((c, p));
            }
        }
        out
    }

    pub fn to_graph(&self) -> Graph {
        let mut edges = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            for &c in &n.children {
                edges.push(GraphEdge { from: i, to: c, label: self.nodes[c].label.expect("non-root") });
            }
        }
        Graph {
            candidates: self.candidates.clone(),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| GraphNode { label: n.label, is_winner: i != 0 && n.children.is_empty() })
                .collect(),
            edges,
        }
    }
}

pub fn build_tree(report: &SearchReport) -> Result<OutcomeTree> {
    if report.orders.is_empty() {
        return Err(RcvError::EmptyOutcomeSet);
    }
    Ok(OutcomeTree::from_orders(report.candidates.clone(), report.orders.iter().map(|o| o.as_slice())))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DagNode {
    pub label: Option<CandidateId>,
    /// Ordered by the children's labels.
    pub children: Vec<Digest>,
}

/// Tree with identical subtrees merged. Nodes are keyed by subtree digest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeDag {
    pub candidates: Vec<String>,
    pub root: Digest,
    pub nodes: BTreeMap<Digest, DagNode>,
}

/// Canonical serialization of a node given its children's digests.
pub fn canonical_form(label: Option<CandidateId>, children: &[Digest]) -> String {
    let mut s = match label {
        None => "root(".to_string(),
        Some(c) => format!("{}(", c.0),
    };
    for (i, d) in children.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        for b in d {
            write!(s, "{b:02x}").expect("write to string");
        }
    }
    s.push(')');
    s
}

fn digest(label: Option<CandidateId>, children: &[Digest]) -> Digest {
    Sha256::digest(canonical_form(label, children).as_bytes()).into()
}

pub fn compress(tree: &OutcomeTree) -> OutcomeDag {
    let mut nodes = BTreeMap::new();
    let mut digests: Vec<Option<Digest>> = vec![None; tree.nodes.len()];
    // children always have larger indices than their parent
    for i in (0..tree.nodes.len()).rev() {
        let node = &tree.nodes[i];
        let children: Vec<Digest> = node.children.iter().map(|&c| digests[c].expect("child first")).collect();
        let d = digest(node.label, &children);
        nodes.entry(d).or_insert(DagNode { label: node.label, children });
        digests[i] = Some(d);
    }
    OutcomeDag { candidates: tree.candidates.clone(), root: digests[0].expect("root"), nodes }
}

impl OutcomeDag {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn paths(&self) -> BTreeSet<Vec<CandidateId>> {
        let mut out = BTreeSet::new();
        let mut stack = vec![(self.root, Vec::new())];
        while let Some((d, path)) = stack.pop() {
            let node = &self.nodes[&d];
            if node.children.is_empty() {
                if node.label.is_some() {
                    out.insert(path);
                }
                continue;
            }
            for c in &node.children {
                let mut p = path.clone();
                p.push(self.nodes[c].label.expect("non-root"));
                stack.push((*c, p));
            }
        }
        out
    }

    /// Candidates labelling sink nodes.
    pub fn winners(&self) -> BTreeSet<CandidateId> {
        self.nodes.values().filter(|n| n.children.is_empty()).filter_map(|n| n.label).collect()
    }

    pub fn to_graph(&self) -> Graph {
        let index: HashMap<Digest, usize> = self.nodes.keys().enumerate().map(|(i, d)| (*d, i)).collect();
        let mut edges = Vec::new();
        for (d, n) in &self.nodes {
            for c in &n.children {
                edges.push(GraphEdge { from: index[d], to: index[c], label: self.nodes[c].label.expect("non-root") });
            }
        }
        edges.sort_by_key(|e| (e.from, e.label, e.to));
        Graph {
            candidates: self.candidates.clone(),
            nodes: self
                .nodes
                .values()
                .map(|n| GraphNode { label: n.label, is_winner: n.label.is_some() && n.children.is_empty() })
                .collect(),
            edges,
        }
    }

    /// Rebuilds a DAG from the JSON node/edge list.
    pub fn from_json(json: &GraphJson) -> Result<Self> {
        from_graph(&Graph::from_json(json)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphNode {
    pub label: Option<CandidateId>,
    pub is_winner: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub label: CandidateId,
}

/// Index-addressed view of a tree or DAG, ready for rendering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub candidates: Vec<String>,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub candidates: Vec<String>,
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: usize,
    /// Candidate name; `null` for the root.
    pub label: Option<String>,
    pub is_winner: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: usize,
    pub to: usize,
    pub label: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmitFormat {
    Dot,
    Json,
}

/// `"Eric L. Adams"` -> `"ELA"`
pub fn initials(name: &str) -> String {
    let s: String = name.split_whitespace().filter_map(|w| w.chars().next()).flat_map(char::to_uppercase).collect();
    if s.is_empty() {
        name.to_string()
    } else {
        s
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

impl Graph {
    fn name(&self, c: CandidateId) -> &str {
        &self.candidates[c.index()]
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            candidates: self.candidates.clone(),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| NodeJson {
                    id,
                    label: n.label.map(|c| self.name(c).to_string()),
                    is_winner: n.is_winner,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson { from: e.from, to: e.to, label: self.name(e.label).to_string() })
                .collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Graph> {
        let lookup = |name: &str| {
            json.candidates
                .iter()
                .position(|c| c == name)
                .map(|i| CandidateId(i as u16))
                .ok_or_else(|| RcvError::UnknownCandidate(name.to_string()))
        };
        let mut nodes = vec![GraphNode { label: None, is_winner: false }; json.nodes.len()];
        let mut seen = vec![false; json.nodes.len()];
        for n in &json.nodes {
            if n.id >= nodes.len() || std::mem::replace(&mut seen[n.id], true) {
                return Err(RcvError::InconsistentInput(format!("bad or repeated node id {}", n.id)));
            }
            nodes[n.id] = GraphNode { label: n.label.as_deref().map(lookup).transpose()?, is_winner: n.is_winner };
        }
        let edges = json
            .edges
            .iter()
            .map(|e| {
                if e.from >= nodes.len() || e.to >= nodes.len() {
                    return Err(RcvError::InconsistentInput(format!("edge {}->{} out of range", e.from, e.to)));
                }
                let label = lookup(&e.label)?;
                if nodes[e.to].label != Some(label) {
                    return Err(RcvError::InconsistentInput(format!("edge label {} does not match its target", e.label)));
                }
                Ok(GraphEdge { from: e.from, to: e.to, label })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Graph { candidates: json.candidates.clone(), nodes, edges })
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph outcomes {\n  rankdir=TB;\n  node [shape=circle, fontname=\"Helvetica\"];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            match n.label {
                None => writeln!(s, "  n{i} [label=\"start\", shape=box];"),
                Some(c) => {
                    let name = dot_escape(self.name(c));
                    let label = dot_escape(&initials(self.name(c)));
                    if n.is_winner {
                        writeln!(
                            s,
                            "  n{i} [label=\"{label}\", tooltip=\"{name}\", shape=doublecircle, style=filled, fillcolor=gold];"
                        )
                    } else {
                        writeln!(s, "  n{i} [label=\"{label}\", tooltip=\"{name}\"];")
                    }
                }
            }
            .expect("write to string");
        }
        for e in &self.edges {
            let label = dot_escape(&initials(self.name(e.label)));
            writeln!(s, "  n{} -> n{} [label=\"{label}\"];", e.from, e.to).expect("write to string");
        }
        s.push_str("}\n");
        s
    }

    pub fn emit(&self, format: EmitFormat) -> Vec<u8> {
        match format {
            EmitFormat::Dot => self.to_dot().into_bytes(),
            EmitFormat::Json => {
                let mut v = serde_json::to_vec_pretty(&self.to_json()).expect("serializable");
                v.push(b'\n');
                v
            }
        }
    }
}

/// Compresses an arbitrary rooted tree or DAG given as a [`Graph`].
pub fn from_graph(g: &Graph) -> Result<OutcomeDag> {
    let mut children: Vec<Vec<(CandidateId, usize)>> = vec![Vec::new(); g.nodes.len()];
    let mut indegree = vec![0usize; g.nodes.len()];
    for e in &g.edges {
        children[e.from].push((e.label, e.to));
        indegree[e.to] += 1;
    }
    let roots: Vec<usize> = (0..g.nodes.len()).filter(|&i| indegree[i] == 0).collect();
    let [root] = roots[..] else {
        return Err(RcvError::InconsistentInput(format!("expected one root, found {}", roots.len())));
    };
    for c in &mut children {
        c.sort();
    }

    fn visit(
        i: usize,
        g: &Graph,
        children: &[Vec<(CandidateId, usize)>],
        memo: &mut Vec<Option<Digest>>,
        on_stack: &mut Vec<bool>,
        nodes: &mut BTreeMap<Digest, DagNode>,
    ) -> Result<Digest> {
        if let Some(d) = memo[i] {
            return Ok(d);
        }
        if std::mem::replace(&mut on_stack[i], true) {
            return Err(RcvError::InconsistentInput("graph has a cycle".into()));
        }
        let mut kids = Vec::with_capacity(children[i].len());
        for &(_, c) in &children[i] {
            kids.push(visit(c, g, children, memo, on_stack, nodes)?);
        }
        on_stack[i] = false;
        let d = digest(g.nodes[i].label, &kids);
        nodes.entry(d).or_insert(DagNode { label: g.nodes[i].label, children: kids });
        memo[i] = Some(d);
        Ok(d)
    }

    let mut memo = vec![None; g.nodes.len()];
    let mut on_stack = vec![false; g.nodes.len()];
    let mut nodes = BTreeMap::new();
    let root = visit(root, g, &children, &mut memo, &mut on_stack, &mut nodes)?;
    Ok(OutcomeDag { candidates: g.candidates.clone(), root, nodes })
}
