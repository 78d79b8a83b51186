//! Simple d-regular graphs and their port-labeled variants.
//!
//! A [`RegularGraph`] stores the sorted neighbor list of every node in one flat
//! buffer of length `n * d`. Port labels of a [`PortLabeledGraph`] are stored in
//! a parallel buffer: `ports[v * d + k]` is the label (1-based) that node `v`
//! gives to the edge towards its `k`-th smallest neighbor.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("degree violation: node {node} has {found} incident edges, expected {expected}")]
    DegreeViolation {
        node: usize,
        found: usize,
        expected: usize,
    },
    #[error("graph is not simple: {0}")]
    NonSimple(String),
    #[error("parity violation: d*n = {d}*{n} is odd")]
    ParityViolation { n: usize, d: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("label violation at node {node}: {reason}")]
    LabelViolation { node: usize, reason: String },
    #[error("not a permutation of 0..{n}")]
    NotAPermutation { n: usize },
    #[error("edge-list parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// An undirected edge `(u, v)` with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeRef {
    pub u: usize,
    pub v: usize,
}

impl EdgeRef {
    pub fn new(a: usize, b: usize) -> Self {
        Self {
            u: a.min(b),
            v: a.max(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegularGraph {
    n: usize,
    d: usize,
    adj: Vec<u32>,
}

impl RegularGraph {
    /// Validates an edge list and builds the graph.
    ///
    /// Each unordered pair may appear once, in either orientation.
    pub fn from_edges(n: usize, d: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::InvalidParameters("n must be positive".into()));
        }
        if d >= n {
            return Err(GraphError::InvalidParameters(format!(
                "degree {d} must be smaller than node count {n}"
            )));
        }
        if n > u32::MAX as usize {
            return Err(GraphError::InvalidParameters("node count too large".into()));
        }
        if (d * n) % 2 == 1 {
            return Err(GraphError::ParityViolation { n, d });
        }
        let mut lists: Vec<Vec<u32>> = vec![Vec::with_capacity(d); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::InvalidParameters(format!(
                    "edge ({a}, {b}) references a node outside 0..{n}"
                )));
            }
            if a == b {
                return Err(GraphError::NonSimple(format!("self-loop at node {a}")));
            }
            lists[a].push(b as u32);
            lists[b].push(a as u32);
        }
        for (node, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::NonSimple(format!(
                    "repeated edge ({node}, {})",
                    w[0]
                )));
            }
        }
        for (node, list) in lists.iter().enumerate() {
            if list.len() != d {
                return Err(GraphError::DegreeViolation {
                    node,
                    found: list.len(),
                    expected: d,
                });
            }
        }
        Ok(Self {
            n,
            d,
            adj: lists.into_iter().flatten().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn edge_count(&self) -> usize {
        self.n * self.d / 2
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v * self.d..(v + 1) * self.d]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.neighbors(a).binary_search(&(b as u32)).is_ok()
    }

    /// Position of `b` in the sorted neighbor list of `a`.
    pub fn neighbor_rank(&self, a: usize, b: usize) -> Option<usize> {
        self.neighbors(a).binary_search(&(b as u32)).ok()
    }

    /// All edges with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = EdgeRef> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| (v as usize) > u)
                .map(move |&v| EdgeRef { u, v: v as usize })
        })
    }

    /// Edge list suitable for [`RegularGraph::from_edges`].
    pub fn decompose(&self) -> Vec<(usize, usize)> {
        self.edges().map(|e| (e.u, e.v)).collect()
    }

    /// `|N(a) ∩ N(b)|` via a sorted merge.
    pub fn common_neighbor_count(&self, a: usize, b: usize) -> usize {
        sorted_intersection_count(self.neighbors(a), self.neighbors(b))
    }

    pub fn common_neighbors(&self, a: usize, b: usize) -> Vec<usize> {
        let (x, y) = (self.neighbors(a), self.neighbors(b));
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(x[i] as usize);
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }

    /// Applies a node permutation: node `i` becomes `sigma[i]`.
    pub fn relabel(&self, sigma: &[usize]) -> Result<Self, GraphError> {
        check_permutation(sigma, self.n)?;
        let edges: Vec<(usize, usize)> = self.edges().map(|e| (sigma[e.u], sigma[e.v])).collect();
        Self::from_edges(self.n, self.d, &edges)
    }

    /// Disjoint union; nodes of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &RegularGraph) -> Result<Self, GraphError> {
        if self.d != other.d {
            return Err(GraphError::InvalidParameters(format!(
                "cannot join degree {} with degree {}",
                self.d, other.d
            )));
        }
        let shift = self.n;
        let mut edges = self.decompose();
        edges.extend(other.edges().map(|e| (e.u + shift, e.v + shift)));
        Self::from_edges(self.n + other.n, self.d, &edges)
    }

    /// Writes the edge-list format: `n d` header, then `u v` lines with `u < v`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 + self.edge_count() * 8);
        let _ = writeln!(out, "{} {}", self.n, self.d);
        for e in self.edges() {
            let _ = writeln!(out, "{} {}", e.u, e.v);
        }
        out
    }

    /// Parses the edge-list format written by [`RegularGraph::to_edge_list`].
    ///
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line_no, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            reason: "missing `n d` header".into(),
        })?;
        let (n, d) = parse_pair(header, line_no)?;
        let mut edges = Vec::new();
        for (line_no, line) in lines {
            let (u, v) = parse_pair(line, line_no)?;
            if u >= v {
                return Err(GraphError::Parse {
                    line: line_no,
                    reason: format!("expected u < v, found {u} {v}"),
                });
            }
            edges.push((u, v));
        }
        Self::from_edges(n, d, &edges)
    }
}

fn parse_pair(line: &str, line_no: usize) -> Result<(usize, usize), GraphError> {
    let mut parts = line.split_whitespace();
    let parse = |tok: Option<&str>| -> Result<usize, GraphError> {
        tok.ok_or_else(|| GraphError::Parse {
            line: line_no,
            reason: "expected two integers".into(),
        })?
        .parse()
        .map_err(|_| GraphError::Parse {
            line: line_no,
            reason: format!("not a non-negative integer: {line:?}"),
        })
    };
    let a = parse(parts.next())?;
    let b = parse(parts.next())?;
    if parts.next().is_some() {
        return Err(GraphError::Parse {
            line: line_no,
            reason: "trailing tokens".into(),
        });
    }
    Ok((a, b))
}

pub(crate) fn sorted_intersection_count(x: &[u32], y: &[u32]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

pub fn check_permutation(sigma: &[usize], n: usize) -> Result<(), GraphError> {
    if sigma.len() != n {
        return Err(GraphError::NotAPermutation { n });
    }
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || std::mem::replace(&mut seen[s], true) {
            return Err(GraphError::NotAPermutation { n });
        }
    }
    Ok(())
}

pub fn invert_permutation(sigma: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; sigma.len()];
    for (i, &s) in sigma.iter().enumerate() {
        inv[s] = i;
    }
    inv
}

/// A regular graph whose edges carry a port label (1..=d) at each endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PortLabeledGraph {
    graph: RegularGraph,
    ports: Vec<u32>,
}

impl PortLabeledGraph {
    /// Attaches labels given per node, aligned with the sorted neighbor list:
    /// `labels[v][k]` labels the edge from `v` to its `k`-th smallest neighbor.
    pub fn new(graph: RegularGraph, labels: &[Vec<u32>]) -> Result<Self, GraphError> {
        let (n, d) = (graph.n(), graph.d());
        if labels.len() != n {
            return Err(GraphError::LabelViolation {
                node: labels.len().min(n),
                reason: format!("expected labels for {n} nodes, got {}", labels.len()),
            });
        }
        let mut ports = Vec::with_capacity(n * d);
        let mut seen = vec![false; d + 1];
        for (node, node_labels) in labels.iter().enumerate() {
            if node_labels.len() != d {
                return Err(GraphError::LabelViolation {
                    node,
                    reason: format!("expected {d} labels, got {}", node_labels.len()),
                });
            }
            seen.iter_mut().for_each(|s| *s = false);
            for &label in node_labels {
                let l = label as usize;
                if l == 0 || l > d {
                    return Err(GraphError::LabelViolation {
                        node,
                        reason: format!("label {label} outside 1..={d}"),
                    });
                }
                if std::mem::replace(&mut seen[l], true) {
                    return Err(GraphError::LabelViolation {
                        node,
                        reason: format!("label {label} used twice"),
                    });
                }
            }
            ports.extend_from_slice(node_labels);
        }
        Ok(Self { graph, ports })
    }

    /// Default labeling: the edge to the `k`-th smallest neighbor gets label `k`.
    pub fn with_rank_ports(graph: RegularGraph) -> Self {
        let d = graph.d() as u32;
        let ports = (0..graph.n()).flat_map(|_| 1..=d).collect();
        Self { graph, ports }
    }

    pub fn graph(&self) -> &RegularGraph {
        &self.graph
    }

    pub fn into_graph(self) -> RegularGraph {
        self.graph
    }

    /// Labels at `v`, aligned with `graph().neighbors(v)`.
    pub fn ports(&self, v: usize) -> &[u32] {
        let d = self.graph.d();
        &self.ports[v * d..(v + 1) * d]
    }

    /// Label of edge `(a, b)` at endpoint `a`.
    pub fn label(&self, a: usize, b: usize) -> Option<u32> {
        self.graph
            .neighbor_rank(a, b)
            .map(|rank| self.ports(a)[rank])
    }

    pub fn labels(&self) -> Vec<Vec<u32>> {
        (0..self.graph.n())
            .map(|v| self.ports(v).to_vec())
            .collect()
    }

    /// Transports the graph and its labels along `sigma` (node `i` becomes `sigma[i]`).
    pub fn relabel_nodes(&self, sigma: &[usize]) -> Result<Self, GraphError> {
        let graph = self.graph.relabel(sigma)?;
        let d = graph.d();
        let mut ports = vec![0u32; graph.n() * d];
        for old in 0..self.graph.n() {
            let new = sigma[old];
            for (k, &nb) in self.graph.neighbors(old).iter().enumerate() {
                let rank = graph
                    .neighbor_rank(new, sigma[nb as usize])
                    .expect("relabeled edge present");
                ports[new * d + rank] = self.ports(old)[k];
            }
        }
        Ok(Self { graph, ports })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn k4() -> RegularGraph {
        RegularGraph::from_edges(4, 3, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn two_triangles() -> RegularGraph {
        RegularGraph::from_edges(6, 2, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap()
    }

    #[test]
    fn builds_complete_graph_and_two_triangles() {
        let g = k4();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.neighbors(2), &[0, 1, 3]);
        let t = two_triangles();
        assert_eq!(t.neighbors(5), &[3, 4]);
        assert!(t.has_edge(0, 2));
        assert!(!t.has_edge(0, 3));
    }

    #[test]
    fn rejects_invalid_edge_lists() {
        let five = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)];
        assert!(matches!(
            RegularGraph::from_edges(4, 3, &five),
            Err(GraphError::DegreeViolation { .. })
        ));
        assert!(matches!(
            RegularGraph::from_edges(3, 2, &[(0, 0), (1, 2), (1, 2)]),
            Err(GraphError::NonSimple(_))
        ));
        assert!(matches!(
            RegularGraph::from_edges(4, 2, &[(0, 1), (1, 0), (2, 3), (3, 2)]),
            Err(GraphError::NonSimple(_))
        ));
        assert!(matches!(
            RegularGraph::from_edges(5, 3, &[]),
            Err(GraphError::ParityViolation { .. })
        ));
        assert!(RegularGraph::from_edges(3, 3, &[]).is_err());
    }

    #[test]
    fn attach_ports_checks_bijection() {
        let g = k4();
        let ranked = PortLabeledGraph::with_rank_ports(g.clone());
        assert_eq!(ranked.label(2, 3), Some(3));
        assert_eq!(ranked.label(3, 2), Some(3));
        let mut bad = ranked.labels();
        bad[0] = vec![1, 1, 2];
        assert!(matches!(
            PortLabeledGraph::new(g.clone(), &bad),
            Err(GraphError::LabelViolation { node: 0, .. })
        ));
        let t = PortLabeledGraph::new(two_triangles(), &vec![vec![2, 1]; 6]).unwrap();
        let label_count: usize = t
            .graph()
            .edges()
            .map(|e| {
                [t.label(e.u, e.v), t.label(e.v, e.u)]
                    .iter()
                    .flatten()
                    .count()
            })
            .sum();
        assert_eq!(label_count, 12);
    }

    #[test]
    fn relabel_round_trips() {
        let g = PortLabeledGraph::new(two_triangles(), &vec![vec![2, 1]; 6]).unwrap();
        let identity: Vec<usize> = (0..6).collect();
        assert_eq!(g.relabel_nodes(&identity).unwrap(), g);
        let swap = [3, 4, 5, 0, 1, 2];
        let swapped = g.relabel_nodes(&swap).unwrap();
        assert_eq!(swapped.graph(), g.graph());
        let sigma = [4, 0, 5, 2, 1, 3];
        let there = g.relabel_nodes(&sigma).unwrap();
        let back = there.relabel_nodes(&invert_permutation(&sigma)).unwrap();
        assert_eq!(back, g);
        assert_eq!(there.label(sigma[0], sigma[1]), g.label(0, 1));
        assert!(matches!(
            g.relabel_nodes(&[0, 0, 1, 2, 3, 4]),
            Err(GraphError::NotAPermutation { .. })
        ));
    }

    #[test]
    fn edge_list_round_trip_and_errors() {
        let g = k4();
        let text = g.to_edge_list();
        assert!(text.starts_with("4 3\n0 1\n"));
        assert_eq!(RegularGraph::parse_edge_list(&text).unwrap(), g);
        assert!(matches!(
            RegularGraph::parse_edge_list("4 3\n1 0\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            RegularGraph::parse_edge_list("4 3\n0 x\n"),
            Err(GraphError::Parse { .. })
        ));
        assert!(matches!(
            RegularGraph::parse_edge_list("4 3\n0 1\n"),
            Err(GraphError::DegreeViolation { .. })
        ));
    }
}
