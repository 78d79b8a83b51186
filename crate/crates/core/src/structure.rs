//! Good and bad edges and nodes, `K_{d+1}` detection, dense spots and
//! pseudo-cliques, and the triangle coverage they achieve.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{default_eps_delta, Regime};
use crate::census::{count_triangles, count_triangles_within, node_in_kplus1_clique};
use crate::graph::{sorted_intersection_count, RegularGraph};
use crate::rational::{self, Rational};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("edge ({u}, {v}) is not a good edge")]
    NotAGoodEdge { u: usize, v: usize },
    #[error("endpoint {node} of the edge is a bad node")]
    EndpointNotGood { node: usize },
}

fn big(x: usize) -> BigInt {
    BigInt::from(x)
}

/// `d - 1 - δd`: edges with `1 <= t_e <=` this value are bad.
pub fn bad_edge_limit(d: usize, delta: &Rational) -> Rational {
    rational::int(d as i64 - 1) - delta * big(d)
}

pub fn is_bad_edge(t_e: u32, d: usize, delta: &Rational) -> bool {
    t_e >= 1 && rational::int(t_e as i64) <= bad_edge_limit(d, delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadnessReport {
    #[serde(with = "rational::serde_rational")]
    pub delta: Rational,
    pub bad_edges: Vec<(usize, usize)>,
    /// In a triangle but in no `K_{d+1}`.
    pub bad_nodes_fixed: Vec<usize>,
    /// Incident to at least `δd` bad edges.
    pub bad_nodes_growing: Vec<usize>,
    #[serde(with = "rational::serde_rational")]
    pub bad_edge_fraction: Rational,
    #[serde(with = "rational::serde_rational")]
    pub bad_node_fraction_fixed: Rational,
    #[serde(with = "rational::serde_rational")]
    pub bad_node_fraction_growing: Rational,
}

/// The triangle-carrying part of a graph: same nodes, only edges with `t_e >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    d: usize,
    adj: Vec<Vec<u32>>,
}

impl Subgraph {
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Degree of the host graph.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&(b as u32)).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, nu)| {
            nu.iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn t_e(&self, a: usize, b: usize) -> u32 {
        sorted_intersection_count(&self.adj[a], &self.adj[b]) as u32
    }
}

pub fn strip_triangle_free_edges(g: &RegularGraph) -> Subgraph {
    let adj: Vec<Vec<u32>> = (0..g.n())
        .map(|u| {
            g.neighbors(u)
                .iter()
                .copied()
                .filter(|&v| g.common_neighbor_count(u, v as usize) > 0)
                .collect()
        })
        .collect();
    let sub = Subgraph { d: g.d(), adj };
    for (u, v) in sub.edges() {
        assert_eq!(
            sub.t_e(u, v) as usize,
            g.common_neighbor_count(u, v),
            "stripping changed t_e of ({u}, {v})"
        );
    }
    sub
}

/// Per-edge good/bad flags on the stripped graph plus growing-mode bad nodes.
struct Classification {
    delta: Rational,
    sub: Subgraph,
    /// `bad[v][k]` for the `k`-th neighbor of `v` in `sub`.
    bad: Vec<Vec<bool>>,
    bad_node: Vec<bool>,
}

impl Classification {
    fn new(sub: Subgraph, delta: &Rational) -> Self {
        let d = sub.d();
        let limit = bad_edge_limit(d, delta);
        let bad: Vec<Vec<bool>> = (0..sub.n())
            .map(|u| {
                sub.neighbors(u)
                    .iter()
                    .map(|&v| rational::int(sub.t_e(u, v as usize) as i64) <= limit)
                    .collect()
            })
            .collect();
        let node_limit = delta * big(d);
        let bad_node = bad
            .iter()
            .map(|flags| rational::int(flags.iter().filter(|&&b| b).count() as i64) >= node_limit)
            .collect();
        Self {
            delta: delta.clone(),
            sub,
            bad,
            bad_node,
        }
    }

    fn edge_is_good(&self, u: usize, v: usize) -> Option<bool> {
        let k = self.sub.adj[u].binary_search(&(v as u32)).ok()?;
        Some(!self.bad[u][k])
    }

    fn spot(&self, u: usize, v: usize) -> Result<Option<DenseSpot>, StructureError> {
        if self.edge_is_good(u, v) != Some(true) {
            return Err(StructureError::NotAGoodEdge { u, v });
        }
        for node in [u, v] {
            if self.bad_node[node] {
                return Err(StructureError::EndpointNotGood { node });
            }
        }
        let mut nodes: Vec<usize> = common(&self.sub.adj[u], &self.sub.adj[v])
            .into_iter()
            .filter(|&w| {
                self.edge_is_good(u, w) == Some(true) && self.edge_is_good(v, w) == Some(true)
            })
            .collect();
        nodes.push(u);
        nodes.push(v);
        nodes.sort_unstable();
        let d = self.sub.d();
        if nodes.len() > d + 1 {
            return Ok(None);
        }
        let min_degree = (rational::int(1) - rational::int(4) * &self.delta) * big(d);
        let dense = nodes.iter().all(|&x| {
            let inside = nodes.iter().filter(|&&y| self.sub.has_edge(x, y)).count();
            rational::int(inside as i64) >= min_degree
        });
        Ok(dense.then_some(DenseSpot { nodes }))
    }
}

fn common(x: &[u32], y: &[u32]) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut a, mut b) = (0, 0);
    while a < x.len() && b < y.len() {
        match x[a].cmp(&y[b]) {
            std::cmp::Ordering::Less => a += 1,
            std::cmp::Ordering::Greater => b += 1,
            std::cmp::Ordering::Equal => {
                out.push(x[a] as usize);
                a += 1;
                b += 1;
            }
        }
    }
    out
}

pub fn classify_badness(g: &RegularGraph, delta: &Rational) -> BadnessReport {
    let sub = strip_triangle_free_edges(g);
    let class = Classification::new(sub, delta);
    let bad_edges: Vec<(usize, usize)> = class
        .sub
        .edges()
        .filter(|&(u, v)| class.edge_is_good(u, v) == Some(false))
        .collect();
    let bad_nodes_fixed: Vec<usize> = (0..g.n())
        .filter(|&v| !class.sub.neighbors(v).is_empty() && !node_in_kplus1_clique(g, v))
        .collect();
    let bad_nodes_growing: Vec<usize> = (0..g.n()).filter(|&v| class.bad_node[v]).collect();
    let n = g.n().max(1);
    let edges = g.edge_count().max(1);
    BadnessReport {
        delta: delta.clone(),
        bad_edge_fraction: Rational::new(big(bad_edges.len()), big(edges)),
        bad_node_fraction_fixed: Rational::new(big(bad_nodes_fixed.len()), big(n)),
        bad_node_fraction_growing: Rational::new(big(bad_nodes_growing.len()), big(n)),
        bad_edges,
        bad_nodes_fixed,
        bad_nodes_growing,
    }
}

/// Every `K_{d+1}` of a d-regular graph; each is a whole component `{v} ∪ N(v)`.
pub fn find_d_plus_1_cliques(g: &RegularGraph) -> Vec<Vec<usize>> {
    (0..g.n())
        .filter(|&v| g.neighbors(v).first().is_some_and(|&w| (w as usize) > v))
        .filter(|&v| node_in_kplus1_clique(g, v))
        .map(|v| {
            std::iter::once(v)
                .chain(g.neighbors(v).iter().map(|&w| w as usize))
                .collect()
        })
        .collect()
}

/// Nodes whose incident edges all lie in `d - 1` triangles but which are in
/// no `K_{d+1}`; empty for every d-regular graph.
pub fn saturated_nodes_outside_cliques(g: &RegularGraph) -> Vec<usize> {
    let full = g.d().saturating_sub(1);
    (0..g.n())
        .filter(|&v| {
            g.neighbors(v)
                .iter()
                .all(|&w| g.common_neighbor_count(v, w as usize) == full)
        })
        .filter(|&v| !node_in_kplus1_clique(g, v))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DenseSpot {
    pub nodes: Vec<usize>,
}

/// Spot `H_0 ∪ {u, v}` grown from a good edge of the stripped graph, where
/// `H_0` holds the common neighbors joined to both endpoints by good edges.
/// `None` when the result is not dense.
pub fn dense_spot_from_edge(
    sub: &Subgraph,
    u: usize,
    v: usize,
    delta: &Rational,
) -> Result<Option<DenseSpot>, StructureError> {
    Classification::new(sub.clone(), delta).spot(u, v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub nodes: Vec<usize>,
    pub size: usize,
    /// Dense spots merged into this block; absent for `K_{d+1}` blocks.
    pub spot_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `log log n / log n`.
    pub eps_n: f64,
    /// `eps_n · n`, compared against the bad-node count.
    pub eps_n_nodes: f64,
    pub bad_nodes_below_eps_n: bool,
    /// `c n / d`, printed beside the block count.
    #[serde(with = "rational::serde_rational_opt")]
    pub c_n_over_d: Option<Rational>,
    /// `(1-8δ)/(1-13δ) (d+1)` when `δ < 1/16`.
    #[serde(with = "rational::serde_rational_opt")]
    pub size_bound: Option<Rational>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    pub spot_pairs_checked: u64,
    /// Spot pairs that meet in fewer than `(1-8δ)d` nodes.
    pub claim1_violations: u64,
    /// Spot pairs in one pseudo-clique that are disjoint.
    pub claim2_violations: u64,
    pub size_bound_violations: u64,
    pub overlapping_blocks: u64,
    /// Good edges between good nodes that no block contains.
    pub uncovered_good_edges: u64,
    pub uncovered_triangles: u64,
    /// `bad_edges · d + bad_nodes · C(d, 2)`.
    pub accounting_bound: u64,
    pub accounting_holds: bool,
}

impl Checks {
    pub fn all_pass(&self) -> bool {
        self.claim1_violations == 0
            && self.claim2_violations == 0
            && self.size_bound_violations == 0
            && self.overlapping_blocks == 0
            && self.uncovered_good_edges == 0
            && self.accounting_holds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub schema_version: u32,
    pub mode: Regime,
    pub n: usize,
    pub d: usize,
    #[serde(with = "rational::serde_rational")]
    pub delta: Rational,
    #[serde(with = "rational::serde_rational_opt")]
    pub eps: Option<Rational>,
    pub blocks: Vec<Block>,
    pub covered_triangles: u64,
    pub total_triangles: u64,
    #[serde(with = "rational::serde_rational")]
    pub coverage_fraction: Rational,
    /// Bad nodes for the report's mode.
    pub bad_nodes: usize,
    pub badness: BadnessReport,
    pub thresholds: Thresholds,
    pub checks: Checks,
    pub warnings: Vec<String>,
}

fn coverage(g: &RegularGraph, blocks: &[Block]) -> (u64, u64, Rational) {
    let covered: u64 = blocks
        .iter()
        .map(|b| count_triangles_within(g, &b.nodes))
        .sum();
    let total = count_triangles(g);
    let fraction = if total == 0 {
        Rational::one()
    } else {
        Rational::new(BigInt::from(covered), BigInt::from(total))
    };
    (covered, total, fraction)
}

fn thresholds(
    n: usize,
    d: usize,
    delta: &Rational,
    bad_nodes: usize,
    c: Option<&Rational>,
) -> Thresholds {
    let nf = n as f64;
    let eps_n = if n > 2 { nf.ln().ln() / nf.ln() } else { 0.0 };
    let sixteenth = rational::ratio(1, 16);
    let size_bound = (*delta < sixteenth).then(|| {
        (rational::int(1) - rational::int(8) * delta)
            / (rational::int(1) - rational::int(13) * delta)
            * big(d + 1)
    });
    Thresholds {
        eps_n,
        eps_n_nodes: eps_n * nf,
        bad_nodes_below_eps_n: (bad_nodes as f64) < eps_n * nf,
        c_n_over_d: c.map(|c| c * Rational::new(big(n), big(d.max(1)))),
        size_bound,
    }
}

fn overlaps(blocks: &[Block], n: usize) -> u64 {
    let mut owner = vec![usize::MAX; n];
    let mut count = 0;
    for (i, b) in blocks.iter().enumerate() {
        for &v in &b.nodes {
            if owner[v] != usize::MAX && owner[v] != i {
                count += 1;
            }
            owner[v] = i;
        }
    }
    count
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Builds one dense spot per good edge between good nodes, merges spots
/// sharing a node into pseudo-cliques, and checks the spot and block
/// properties, recording any violation in the report.
pub fn assemble_pseudo_cliques(g: &RegularGraph, delta: &Rational) -> StructureReport {
    build_growing(g, delta, None, None)
}

fn build_growing(
    g: &RegularGraph,
    delta: &Rational,
    eps: Option<Rational>,
    c: Option<&Rational>,
) -> StructureReport {
    let (n, d) = (g.n(), g.d());
    let badness = classify_badness(g, delta);
    let class = Classification::new(strip_triangle_free_edges(g), delta);
    let seeds: Vec<(usize, usize)> = class
        .sub
        .edges()
        .filter(|&(u, v)| {
            class.edge_is_good(u, v) == Some(true) && !class.bad_node[u] && !class.bad_node[v]
        })
        .collect();
    let spots: BTreeSet<DenseSpot> = seeds
        .par_iter()
        .filter_map(|&(u, v)| class.spot(u, v).expect("seed edges are good"))
        .collect();
    let spots: Vec<DenseSpot> = spots.into_iter().collect();
    let mut checks = Checks::default();

    let claim1_floor = (rational::int(1) - rational::int(8) * delta) * big(d);
    let mut by_node: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, s) in spots.iter().enumerate() {
        for &v in &s.nodes {
            by_node[v].push(i);
        }
    }
    let mut meeting: BTreeSet<(usize, usize)> = BTreeSet::new();
    for list in &by_node {
        for (a, &i) in list.iter().enumerate() {
            for &j in &list[a + 1..] {
                meeting.insert((i, j));
            }
        }
    }
    let intersection = |i: usize, j: usize| {
        let (x, y) = (&spots[i].nodes, &spots[j].nodes);
        x.iter().filter(|v| y.binary_search(v).is_ok()).count()
    };
    checks.spot_pairs_checked = meeting.len() as u64;
    checks.claim1_violations = meeting
        .iter()
        .filter(|&&(i, j)| rational::int(intersection(i, j) as i64) < claim1_floor)
        .count() as u64;

    let mut sets = DisjointSet::new(n);
    for s in &spots {
        for w in s.nodes.windows(2) {
            sets.union(w[0], w[1]);
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, s) in spots.iter().enumerate() {
        groups.entry(sets.find(s.nodes[0])).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    groups.sort_unstable();
    for members in &groups {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                if intersection(i, j) == 0 {
                    checks.claim2_violations += 1;
                }
            }
        }
    }
    let mut blocks: Vec<Block> = groups
        .iter()
        .map(|members| {
            let nodes: BTreeSet<usize> = members
                .iter()
                .flat_map(|&i| spots[i].nodes.iter().copied())
                .collect();
            let nodes: Vec<usize> = nodes.into_iter().collect();
            Block {
                size: nodes.len(),
                nodes,
                spot_count: Some(members.len()),
            }
        })
        .collect();
    blocks.sort_by(|a, b| a.nodes.cmp(&b.nodes));

    let bad_nodes = badness.bad_nodes_growing.len();
    let thresholds = thresholds(n, d, delta, bad_nodes, c);
    if let Some(bound) = &thresholds.size_bound {
        checks.size_bound_violations = blocks
            .iter()
            .filter(|b| rational::int(b.size as i64) > *bound)
            .count() as u64;
    }
    checks.overlapping_blocks = overlaps(&blocks, n);
    let mut block_of = vec![usize::MAX; n];
    for (i, b) in blocks.iter().enumerate() {
        for &v in &b.nodes {
            block_of[v] = i;
        }
    }
    checks.uncovered_good_edges = seeds
        .iter()
        .filter(|&&(u, v)| block_of[u] == usize::MAX || block_of[u] != block_of[v])
        .count() as u64;

    let (covered, total, coverage_fraction) = coverage(g, &blocks);
    checks.uncovered_triangles = total - covered;
    let pairs = (d * d.saturating_sub(1) / 2) as u64;
    checks.accounting_bound = badness.bad_edges.len() as u64 * d as u64 + bad_nodes as u64 * pairs;
    checks.accounting_holds = checks.uncovered_triangles <= checks.accounting_bound;

    let mut warnings = Vec::new();
    if *delta >= rational::ratio(1, 16) {
        warnings.push("delta >= 1/16: pseudo-clique size bound not guaranteed".to_string());
    }
    if delta * big(d) < Rational::one() {
        warnings.push("delta * d < 1".to_string());
    }
    StructureReport {
        schema_version: SCHEMA_VERSION,
        mode: Regime::GrowingD,
        n,
        d,
        delta: delta.clone(),
        eps,
        blocks,
        covered_triangles: covered,
        total_triangles: total,
        coverage_fraction,
        bad_nodes,
        badness,
        thresholds,
        checks,
        warnings,
    }
}

fn build_fixed(g: &RegularGraph, c: &Rational) -> StructureReport {
    let (n, d) = (g.n(), g.d());
    let delta = Rational::new(BigInt::one(), big(d.max(1)));
    let badness = classify_badness(g, &delta);
    let blocks: Vec<Block> = find_d_plus_1_cliques(g)
        .into_iter()
        .map(|nodes| Block {
            size: nodes.len(),
            nodes,
            spot_count: None,
        })
        .collect();
    let bad_nodes = badness.bad_nodes_fixed.len();
    let mut thresholds = thresholds(n, d, &delta, bad_nodes, Some(c));
    thresholds.size_bound = None;
    let (covered, total, coverage_fraction) = coverage(g, &blocks);
    let checks = Checks {
        overlapping_blocks: overlaps(&blocks, n),
        uncovered_triangles: total - covered,
        // Every uncovered triangle has a fixed-mode bad node.
        accounting_bound: bad_nodes as u64 * (d * d.saturating_sub(1) / 2) as u64,
        accounting_holds: total - covered
            <= bad_nodes as u64 * (d * d.saturating_sub(1) / 2) as u64,
        ..Checks::default()
    };
    StructureReport {
        schema_version: SCHEMA_VERSION,
        mode: Regime::FixedD,
        n,
        d,
        delta,
        eps: None,
        blocks,
        covered_triangles: covered,
        total_triangles: total,
        coverage_fraction,
        bad_nodes,
        badness,
        thresholds,
        checks,
        warnings: Vec::new(),
    }
}

/// `δ` used in growing mode: the default from `(n, d, c)` when it is defined
/// and below `1/16`, otherwise `1/20`. Returned with the matching `ε = δ²`.
pub fn growing_parameters(n: usize, d: usize, c: &Rational) -> (Rational, Rational) {
    let delta = match default_eps_delta(n, d, c) {
        Ok(p) if !p.warning && p.delta > 0.0 => Rational::new(
            BigInt::from((p.delta * 1e6).round() as i64),
            BigInt::from(1_000_000),
        ),
        _ => rational::ratio(1, 20),
    };
    let eps = &delta * &delta;
    (delta, eps)
}

pub fn structure_report(g: &RegularGraph, c: &Rational, mode: Regime) -> StructureReport {
    match mode {
        Regime::FixedD => build_fixed(g, c),
        Regime::GrowingD => {
            let (delta, eps) = growing_parameters(g.n(), g.d(), c);
            let eps = (!eps.is_zero()).then_some(eps);
            build_growing(g, &delta, eps, Some(c))
        }
    }
}
