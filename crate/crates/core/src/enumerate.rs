//! Exhaustive oracles for tiny `(n, d)`: every pairing of the `dn` labeled
//! half-edges, and every simple labeled d-regular graph.
//!
//! The pairing recursion always matches the lowest free half-edge. Half-edge
//! `v*d + (l-1)` is port `l` of node `v`, so the edges of a simple pairing are
//! produced exactly in configuration order and the reveal profile is built
//! bit by bit along the way.

use std::collections::{BTreeMap, HashSet};

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::phi_preimage_bound;
use crate::census::{t_k_max, threshold_of, triangle_threshold, CensusError};
use crate::graph::{PortLabeledGraph, RegularGraph};
use crate::rational::{self, Rational};
use crate::reveal::{for_each_permutation_with_first, phi_weight_fast, RevealProfile};
use crate::SCHEMA_VERSION;

/// Largest `(dn-1)!!` swept by default (`dn <= 18`).
pub const DEFAULT_PAIRING_BUDGET: u64 = 35_000_000;
/// Largest number of graphs streamed by default.
pub const DEFAULT_GRAPH_BUDGET: u64 = 35_000_000;
/// Half-edge counts above this are split into parallel shards.
pub const PARALLEL_ABOVE: usize = 14;

const FREE: u8 = u8::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("enumeration needs {required} leaves, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Census(#[from] CensusError),
}

fn check_params(n: usize, d: usize) -> Result<(), EnumerateError> {
    if d == 0 {
        return Err(EnumerateError::InvalidParameters(
            "d must be positive".into(),
        ));
    }
    if n > 64 {
        return Err(EnumerateError::InvalidParameters("n > 64".into()));
    }
    Ok(())
}

/// A complete simple pairing, as seen by a [`PairingVisitor`].
pub struct PairingLeaf<'a> {
    n: usize,
    d: usize,
    partner: &'a [u8],
    adj: &'a [u64],
    profile: u32,
    triangles: u32,
}

impl PairingLeaf<'_> {
    /// Reveal profile as a bit mask; bit `k` is the `k`-th edge in configuration order.
    pub fn profile_mask(&self) -> u32 {
        self.profile
    }

    pub fn profile(&self) -> RevealProfile {
        let len = self.n * self.d / 2;
        RevealProfile::from_bits((0..len).map(|k| self.profile >> k & 1 == 1).collect())
    }

    pub fn weight(&self) -> u32 {
        self.profile.count_ones()
    }

    pub fn triangles(&self) -> u32 {
        self.triangles
    }

    /// Neighbor bit masks of the underlying graph.
    pub fn adjacency(&self) -> &[u64] {
        self.adj
    }

    pub fn graph(&self) -> RegularGraph {
        graph_from_masks(self.n, self.d, self.adj)
    }

    pub fn to_port_labeled(&self) -> PortLabeledGraph {
        let graph = self.graph();
        let d = self.d;
        let labels: Vec<Vec<u32>> = (0..self.n)
            .map(|v| {
                let mut by_neighbor: Vec<(u32, u32)> = (0..d)
                    .map(|p| ((self.partner[v * d + p] as usize / d) as u32, p as u32 + 1))
                    .collect();
                by_neighbor.sort_unstable();
                by_neighbor.into_iter().map(|(_, l)| l).collect()
            })
            .collect();
        PortLabeledGraph::new(graph, &labels).expect("simple pairing gives valid labels")
    }
}

pub trait PairingVisitor: Send + Sync + Sized {
    fn simple(&mut self, leaf: &PairingLeaf<'_>);

    /// Called per non-simple pairing with the half-edge partner table; only
    /// reached in a full sweep.
    fn non_simple(&mut self, _partner: &[u8]) {}

    fn fork(&self) -> Self;

    fn merge(&mut self, other: Self);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairingOptions {
    pub budget: u64,
    /// Walk non-simple branches to their leaves instead of counting them in bulk.
    pub full_sweep: bool,
    pub parallel: bool,
}

impl Default for PairingOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_PAIRING_BUDGET,
            full_sweep: true,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairingCounts {
    pub total: u64,
    pub simple: u64,
}

/// `(r-1)!!` for even `r`, indexed by `r`.
fn double_factorials(max: usize) -> Vec<u64> {
    let mut table = vec![1u64; max + 1];
    for r in (2..=max).step_by(2) {
        table[r] = table[r - 2] * (r as u64 - 1);
    }
    table
}

struct Walker<'v, V> {
    n: usize,
    d: usize,
    dn: usize,
    full: bool,
    partner: Vec<u8>,
    mult: Vec<u8>,
    adj: Vec<u64>,
    defects: u32,
    depth: usize,
    profile: u32,
    triangles: u32,
    leaves_below: Vec<u64>,
    counts: PairingCounts,
    visitor: &'v mut V,
}

impl<'v, V: PairingVisitor> Walker<'v, V> {
    fn new(n: usize, d: usize, full: bool, visitor: &'v mut V) -> Self {
        let dn = n * d;
        Self {
            n,
            d,
            dn,
            full,
            partner: vec![FREE; dn],
            mult: vec![0; n * n],
            adj: vec![0; n],
            defects: 0,
            depth: 0,
            profile: 0,
            triangles: 0,
            leaves_below: double_factorials(dn),
            counts: PairingCounts::default(),
            visitor,
        }
    }

    fn is_simple_pair(&self, a: usize, b: usize) -> bool {
        let (u, v) = (a / self.d, b / self.d);
        self.defects == 0 && u != v && self.mult[u * self.n + v] == 0
    }

    /// Places the pair and returns what `unplace` needs to restore.
    fn place(&mut self, a: usize, b: usize) -> (u32, u32) {
        let saved = (self.profile, self.triangles);
        let (u, v) = (a / self.d, b / self.d);
        self.partner[a] = b as u8;
        self.partner[b] = a as u8;
        if u == v {
            self.defects += 1;
        } else {
            let m = &mut self.mult[u * self.n + v];
            *m += 1;
            if *m > 1 {
                self.defects += 1;
            }
            self.mult[v * self.n + u] += 1;
            if self.defects == 0 {
                let common = self.adj[u] & self.adj[v];
                if common != 0 {
                    self.profile |= 1 << self.depth;
                    self.triangles += common.count_ones();
                }
                self.adj[u] |= 1 << v;
                self.adj[v] |= 1 << u;
            }
        }
        self.depth += 1;
        saved
    }

    fn unplace(&mut self, a: usize, b: usize, saved: (u32, u32)) {
        let (u, v) = (a / self.d, b / self.d);
        self.depth -= 1;
        self.partner[a] = FREE;
        self.partner[b] = FREE;
        if u == v {
            self.defects -= 1;
        } else {
            if self.defects == 0 {
                self.adj[u] &= !(1 << v);
                self.adj[v] &= !(1 << u);
            }
            let m = &mut self.mult[u * self.n + v];
            if *m > 1 {
                self.defects -= 1;
            }
            *m -= 1;
            self.mult[v * self.n + u] -= 1;
        }
        (self.profile, self.triangles) = saved;
    }

    fn first_free(&self, from: usize) -> usize {
        (from..self.dn)
            .find(|&h| self.partner[h] == FREE)
            .unwrap_or(self.dn)
    }

    fn leaf(&mut self) {
        self.counts.total += 1;
        if self.defects == 0 {
            self.counts.simple += 1;
            let leaf = PairingLeaf {
                n: self.n,
                d: self.d,
                partner: &self.partner,
                adj: &self.adj,
                profile: self.profile,
                triangles: self.triangles,
            };
            self.visitor.simple(&leaf);
        } else {
            self.visitor.non_simple(&self.partner);
        }
    }

    /// Walks every completion of the current partial pairing; at `stop_depth`
    /// the partial pairing is handed to `prefix` instead.
    fn walk(
        &mut self,
        from: usize,
        stop_depth: Option<usize>,
        prefix: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if stop_depth == Some(self.depth) {
            prefix.push(self.placed_pairs());
            return;
        }
        let a = self.first_free(from);
        if a == self.dn {
            self.leaf();
            return;
        }
        for b in a + 1..self.dn {
            if self.partner[b] != FREE {
                continue;
            }
            if !self.full && !self.is_simple_pair(a, b) {
                let remaining = self.dn - 2 * (self.depth + 1);
                self.counts.total += self.leaves_below[remaining];
                continue;
            }
            let saved = self.place(a, b);
            self.walk(a + 1, stop_depth, prefix);
            self.unplace(a, b, saved);
        }
    }

    fn placed_pairs(&self) -> Vec<(usize, usize)> {
        // Pairs in placement order: lowest half-edge first.
        (0..self.dn)
            .filter(|&h| self.partner[h] != FREE && (self.partner[h] as usize) > h)
            .map(|h| (h, self.partner[h] as usize))
            .collect()
    }
}

/// Visits every pairing of the `dn` half-edges (simple ones through
/// `visitor.simple`), returning how many there were.
pub fn for_each_pairing<V: PairingVisitor>(
    n: usize,
    d: usize,
    options: PairingOptions,
    visitor: &mut V,
) -> Result<PairingCounts, EnumerateError> {
    check_params(n, d)?;
    if (n * d) % 2 == 1 {
        return Err(EnumerateError::InvalidParameters(format!(
            "odd number of half-edges, n={n} d={d}"
        )));
    }
    if n * d > 32 {
        return Err(EnumerateError::InvalidParameters("dn > 32".into()));
    }
    let total = rational::pairings(n as u64 * d as u64);
    if total > BigUint::from(options.budget) {
        return Err(EnumerateError::BudgetExceeded {
            required: total.to_string(),
            budget: options.budget,
        });
    }
    if !options.parallel || n * d <= PARALLEL_ABOVE {
        let mut walker = Walker::new(n, d, options.full_sweep, visitor);
        walker.walk(0, None, &mut Vec::new());
        return Ok(walker.counts);
    }
    // Split at depth 2 into independent shards.
    let mut prefixes = Vec::new();
    let mut counts = {
        let mut scout = visitor.fork();
        let mut walker = Walker::new(n, d, options.full_sweep, &mut scout);
        walker.walk(0, Some(2), &mut prefixes);
        walker.counts
    };
    let shards: Vec<(V, PairingCounts)> = prefixes
        .par_iter()
        .map(|pairs| {
            let mut local = visitor.fork();
            let mut walker = Walker::new(n, d, options.full_sweep, &mut local);
            for &(a, b) in pairs {
                walker.place(a, b);
            }
            walker.walk(0, None, &mut Vec::new());
            let c = walker.counts;
            (local, c)
        })
        .collect();
    for (local, c) in shards {
        visitor.merge(local);
        counts.total += c.total;
        counts.simple += c.simple;
    }
    Ok(counts)
}

#[derive(Debug, Clone, Default)]
struct Tally {
    by_triangles: BTreeMap<u32, u64>,
    by_profile: BTreeMap<u32, u64>,
}

impl PairingVisitor for Tally {
    fn simple(&mut self, leaf: &PairingLeaf<'_>) {
        *self.by_triangles.entry(leaf.triangles()).or_default() += 1;
        *self.by_profile.entry(leaf.profile_mask()).or_default() += 1;
    }

    fn fork(&self) -> Self {
        Self::default()
    }

    fn merge(&mut self, other: Self) {
        for (k, v) in other.by_triangles {
            *self.by_triangles.entry(k).or_default() += v;
        }
        for (k, v) in other.by_profile {
            *self.by_profile.entry(k).or_default() += v;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileCount {
    pub rle: String,
    /// `|φ⁻¹(x)|` over simple port-labeled pairings.
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationResult {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub total_pairings: u64,
    pub simple_pairings: u64,
    pub total_simple_graphs: u64,
    /// `T -> number of labeled graphs`.
    pub count_by_triangles: BTreeMap<u32, u64>,
    /// Profile weight -> preimage size of each realized profile of that weight.
    pub phi_histogram: BTreeMap<u32, Vec<ProfileCount>>,
}

fn mask_to_profile(mask: u32, len: usize) -> RevealProfile {
    RevealProfile::from_bits((0..len).map(|k| mask >> k & 1 == 1).collect())
}

/// Full pairing sweep with triangle and profile tallies.
pub fn enumerate_pairings(
    n: usize,
    d: usize,
    options: PairingOptions,
) -> Result<EnumerationResult, EnumerateError> {
    let mut tally = Tally::default();
    let counts = for_each_pairing(n, d, options, &mut tally)?;
    let per_graph = rational::factorial(d as u64)
        .pow(n as u32)
        .to_u64()
        .expect("(d!)^n fits in u64 within budget");
    let to_graphs = |pairings: u64| {
        assert_eq!(
            pairings % per_graph,
            0,
            "simple pairings come in blocks of (d!)^n"
        );
        pairings / per_graph
    };
    let len = n * d / 2;
    let mut phi_histogram: BTreeMap<u32, Vec<ProfileCount>> = BTreeMap::new();
    for (&mask, &count) in &tally.by_profile {
        phi_histogram
            .entry(mask.count_ones())
            .or_default()
            .push(ProfileCount {
                rle: mask_to_profile(mask, len).to_rle(),
                count,
            });
    }
    Ok(EnumerationResult {
        schema_version: SCHEMA_VERSION,
        n,
        d,
        total_pairings: counts.total,
        simple_pairings: counts.simple,
        total_simple_graphs: to_graphs(counts.simple),
        count_by_triangles: tally
            .by_triangles
            .into_iter()
            .map(|(t, c)| (t, to_graphs(c)))
            .collect(),
        phi_histogram,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreimageEntry {
    pub rle: String,
    pub weight: u32,
    pub count: u64,
    pub bound_log: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreimageReport {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub entries: Vec<PreimageEntry>,
    pub all_hold: bool,
}

impl PreimageReport {
    /// Preimage size of a profile; zero when it is never realized.
    pub fn count_of(&self, profile: &RevealProfile) -> u64 {
        let rle = profile.to_rle();
        self.entries
            .iter()
            .find(|e| e.rle == rle)
            .map_or(0, |e| e.count)
    }
}

/// Exact `|φ⁻¹(x)|` for every realized profile, each checked against
/// `(dn)^{dn/2} (d²/n)^{|x|}` in exact arithmetic.
pub fn phi_preimage_histogram(
    n: usize,
    d: usize,
    options: PairingOptions,
) -> Result<PreimageReport, EnumerateError> {
    Ok(preimage_report(&enumerate_pairings(n, d, options)?))
}

pub fn preimage_report(result: &EnumerationResult) -> PreimageReport {
    let (n, d) = (result.n, result.d);
    let entries: Vec<PreimageEntry> = result
        .phi_histogram
        .iter()
        .flat_map(|(&weight, profiles)| {
            let bound = phi_preimage_bound(n, d, weight as usize);
            profiles.iter().map(move |p| {
                let holds = match &bound.exact {
                    Some(exact) => rational::int(p.count as i64) <= *exact,
                    None => (p.count as f64).ln() <= bound.ln,
                };
                PreimageEntry {
                    rle: p.rle.clone(),
                    weight,
                    count: p.count,
                    bound_log: bound.ln,
                    holds,
                }
            })
        })
        .collect();
    PreimageReport {
        schema_version: SCHEMA_VERSION,
        n,
        d,
        all_hold: entries.iter().all(|e| e.holds),
        entries,
    }
}

pub fn graph_from_masks(n: usize, d: usize, adj: &[u64]) -> RegularGraph {
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| {
            let higher = adj[u] & !((2u64 << u) - 1);
            (u + 1..n)
                .filter(move |&v| higher >> v & 1 == 1)
                .map(move |v| (u, v))
        })
        .collect();
    RegularGraph::from_edges(n, d, &edges).expect("enumerated graph is regular")
}

/// Triangles of a bit-mask graph.
pub fn mask_triangles(adj: &[u64]) -> u64 {
    let mut total = 0u64;
    for (u, &nu) in adj.iter().enumerate() {
        let mut higher = nu & !((2u64 << u) - 1);
        while higher != 0 {
            let v = higher.trailing_zeros() as usize;
            higher &= higher - 1;
            total += (nu & adj[v] & !((2u64 << v) - 1)).count_ones() as u64;
        }
    }
    total
}

/// `k`-cliques of a bit-mask graph.
pub fn mask_k_cliques(adj: &[u64], k: usize) -> u64 {
    fn extend(adj: &[u64], candidates: u64, left: usize) -> u64 {
        if left == 0 {
            return 1;
        }
        let mut rest = candidates;
        let mut total = 0;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            total += extend(adj, rest & adj[v], left - 1);
        }
        total
    }
    let all = if adj.len() == 64 {
        u64::MAX
    } else {
        (1u64 << adj.len()) - 1
    };
    extend(adj, all, k)
}

struct GraphWalker<'f, F> {
    n: usize,
    d: usize,
    adj: Vec<u64>,
    deg: Vec<usize>,
    seen: u64,
    budget: u64,
    over: bool,
    visit: &'f mut F,
}

impl<F: FnMut(&[u64])> GraphWalker<'_, F> {
    fn node(&mut self, u: usize) {
        if self.over {
            return;
        }
        if u == self.n {
            self.seen += 1;
            if self.seen > self.budget {
                self.over = true;
                return;
            }
            (self.visit)(&self.adj);
            return;
        }
        let need = self.d - self.deg[u];
        let candidates: Vec<usize> = (u + 1..self.n).filter(|&v| self.deg[v] < self.d).collect();
        if candidates.len() < need {
            return;
        }
        self.choose(u, &candidates, 0, need);
    }

    fn choose(&mut self, u: usize, candidates: &[usize], start: usize, need: usize) {
        if need == 0 {
            self.node(u + 1);
            return;
        }
        for i in start..=candidates.len() - need {
            let v = candidates[i];
            self.adj[u] |= 1 << v;
            self.adj[v] |= 1 << u;
            self.deg[u] += 1;
            self.deg[v] += 1;
            self.choose(u, candidates, i + 1, need - 1);
            self.adj[u] &= !(1 << v);
            self.adj[v] &= !(1 << u);
            self.deg[u] -= 1;
            self.deg[v] -= 1;
            if self.over {
                return;
            }
        }
    }
}

/// Streams every simple labeled d-regular graph on `n` nodes once, as
/// neighbor bit masks, and returns how many there were.
pub fn for_each_adjacency(
    n: usize,
    d: usize,
    budget: u64,
    mut visit: impl FnMut(&[u64]),
) -> Result<u64, EnumerateError> {
    check_params(n, d)?;
    let mut walker = GraphWalker {
        n,
        d,
        adj: vec![0; n],
        deg: vec![0; n],
        seen: 0,
        budget,
        over: false,
        visit: &mut visit,
    };
    walker.node(0);
    if walker.over {
        return Err(EnumerateError::BudgetExceeded {
            required: format!("more than {budget}"),
            budget,
        });
    }
    Ok(walker.seen)
}

pub fn for_each_regular_graph(
    n: usize,
    d: usize,
    mut visit: impl FnMut(RegularGraph),
) -> Result<u64, EnumerateError> {
    for_each_adjacency(n, d, DEFAULT_GRAPH_BUDGET, |adj| {
        visit(graph_from_masks(n, d, adj))
    })
}

pub fn enumerate_regular_graphs(n: usize, d: usize) -> Result<Vec<RegularGraph>, EnumerateError> {
    let mut out = Vec::new();
    for_each_regular_graph(n, d, |g| out.push(g))?;
    Ok(out)
}

/// `T -> number of labeled graphs`, without building graph objects.
pub fn count_by_triangles(n: usize, d: usize) -> Result<BTreeMap<u64, u64>, EnumerateError> {
    let mut hist = BTreeMap::new();
    for_each_adjacency(n, d, DEFAULT_GRAPH_BUDGET, |adj| {
        *hist.entry(mask_triangles(adj)).or_default() += 1;
    })?;
    Ok(hist)
}

/// `|𝒢_d(n)|`.
pub fn count_regular_graphs(n: usize, d: usize) -> Result<u64, EnumerateError> {
    for_each_adjacency(n, d, DEFAULT_GRAPH_BUDGET, |_| {})
}

/// `|{G : T(G) >= ⌈c · T_max⌉}|`.
pub fn exact_conditioned_count(n: usize, d: usize, c: &Rational) -> Result<u64, EnumerateError> {
    let threshold = triangle_threshold(n, d, c);
    let hist = count_by_triangles(n, d)?;
    Ok(hist.range(threshold..).map(|(_, &v)| v).sum())
}

/// Graphs with at least `⌈c · t_k_max⌉` copies of `K_k`.
pub fn exact_k_clique_conditioned_count(
    n: usize,
    d: usize,
    c: &Rational,
    k: usize,
) -> Result<u64, EnumerateError> {
    let threshold = threshold_of(&(c * t_k_max(n, d, k)?));
    let mut count = 0;
    for_each_adjacency(n, d, DEFAULT_GRAPH_BUDGET, |adj| {
        if mask_k_cliques(adj, k) >= threshold {
            count += 1;
        }
    })?;
    Ok(count)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitCheck {
    pub permutations: u64,
    pub permutation_hits: u64,
    pub orbit_size: u64,
    pub orbit_hits: u64,
    pub holds: bool,
}

/// Compares the fraction of relabelings `σ` with `|φ(G*_σ)| >= threshold`
/// against the same fraction over the distinct members of the orbit `S_n G*`.
pub fn orbit_check(gs: &PortLabeledGraph, threshold: i64) -> Result<OrbitCheck, EnumerateError> {
    let n = gs.graph().n();
    if n > 8 {
        return Err(EnumerateError::BudgetExceeded {
            required: format!("{n}! relabelings"),
            budget: 40_320,
        });
    }
    let mut orbit: HashSet<PortLabeledGraph> = HashSet::new();
    let (mut permutations, mut permutation_hits) = (0u64, 0u64);
    for first in 0..n {
        for_each_permutation_with_first(n, first, |sigma| {
            let image = gs.relabel_nodes(sigma).expect("valid permutation");
            permutations += 1;
            if phi_weight_fast(image.graph()) as i64 >= threshold {
                permutation_hits += 1;
            }
            orbit.insert(image);
        });
    }
    let orbit_hits = orbit
        .iter()
        .filter(|g| phi_weight_fast(g.graph()) as i64 >= threshold)
        .count() as u64;
    let orbit_size = orbit.len() as u64;
    let lhs = Rational::new(BigInt::from(permutation_hits), BigInt::from(permutations));
    let rhs = Rational::new(BigInt::from(orbit_hits), BigInt::from(orbit_size));
    Ok(OrbitCheck {
        permutations,
        permutation_hits,
        orbit_size,
        orbit_hits,
        holds: lhs == rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{count_k_cliques, count_triangles};
    use crate::fixtures::complete;
    use crate::rational::{int, ratio};
    use crate::reveal::encode_phi;

    #[test]
    fn small_pairing_sweeps() {
        let r = enumerate_pairings(4, 3, PairingOptions::default()).unwrap();
        assert_eq!(
            (r.total_pairings, r.simple_pairings, r.total_simple_graphs),
            (10_395, 1296, 1)
        );
        assert_eq!(r.phi_histogram.keys().copied().collect::<Vec<_>>(), vec![3]);
        let r = enumerate_pairings(6, 2, PairingOptions::default()).unwrap();
        assert_eq!(
            (r.total_pairings, r.simple_pairings, r.total_simple_graphs),
            (10_395, 4480, 70)
        );
        assert_eq!(r.count_by_triangles, BTreeMap::from([(0, 60), (2, 10)]));
        let pruned = enumerate_pairings(
            6,
            2,
            PairingOptions {
                full_sweep: false,
                ..PairingOptions::default()
            },
        )
        .unwrap();
        assert_eq!(pruned, r);
        let r = enumerate_pairings(2, 2, PairingOptions::default()).unwrap();
        assert_eq!(
            (r.total_pairings, r.simple_pairings, r.total_simple_graphs),
            (3, 0, 0)
        );
        assert!(matches!(
            enumerate_pairings(3, 3, PairingOptions::default()),
            Err(EnumerateError::InvalidParameters(_))
        ));
    }

    #[test]
    fn two_node_multigraph_sweep() {
        struct Count(u64, u64);
        impl PairingVisitor for Count {
            fn simple(&mut self, _: &PairingLeaf<'_>) {
                self.0 += 1;
            }
            fn non_simple(&mut self, _: &[u8]) {
                self.1 += 1;
            }
            fn fork(&self) -> Self {
                Count(0, 0)
            }
            fn merge(&mut self, o: Self) {
                self.0 += o.0;
                self.1 += o.1;
            }
        }
        let mut c = Count(0, 0);
        let mut w = Walker::new(2, 2, true, &mut c);
        w.walk(0, None, &mut Vec::new());
        assert_eq!(
            w.counts,
            PairingCounts {
                total: 3,
                simple: 0
            }
        );
        assert_eq!((c.0, c.1), (0, 3));
    }

    #[test]
    fn leaves_reproduce_reveal_profiles() {
        struct Check(u64);
        impl PairingVisitor for Check {
            fn simple(&mut self, leaf: &PairingLeaf<'_>) {
                let gs = leaf.to_port_labeled();
                assert_eq!(encode_phi(&gs), leaf.profile());
                assert_eq!(count_triangles(gs.graph()), leaf.triangles() as u64);
                self.0 += 1;
            }
            fn fork(&self) -> Self {
                Check(0)
            }
            fn merge(&mut self, o: Self) {
                self.0 += o.0;
            }
        }
        let mut check = Check(0);
        let counts = for_each_pairing(6, 2, PairingOptions::default(), &mut check).unwrap();
        assert_eq!(check.0, counts.simple);
        let mut check = Check(0);
        for_each_pairing(5, 2, PairingOptions::default(), &mut check).unwrap();
        assert_eq!(check.0, 12 * 32);
    }

    #[test]
    fn direct_graph_enumeration() {
        assert_eq!(enumerate_regular_graphs(4, 3).unwrap(), vec![complete(4)]);
        assert_eq!(
            count_by_triangles(6, 2).unwrap(),
            BTreeMap::from([(0, 60), (2, 10)])
        );
        assert_eq!(count_by_triangles(5, 2).unwrap(), BTreeMap::from([(0, 12)]));
        assert_eq!(count_regular_graphs(6, 3).unwrap(), 70);
        assert_eq!(count_regular_graphs(8, 3).unwrap(), 19_355);
        let graphs = enumerate_regular_graphs(6, 3).unwrap();
        let unique: HashSet<_> = graphs.iter().collect();
        assert_eq!(unique.len(), 70);
        assert!(matches!(
            for_each_adjacency(8, 3, 100, |_| {}),
            Err(EnumerateError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn conditioned_counts() {
        assert_eq!(exact_conditioned_count(6, 2, &int(1)).unwrap(), 10);
        assert_eq!(exact_conditioned_count(6, 2, &int(0)).unwrap(), 70);
        assert_eq!(exact_conditioned_count(4, 3, &int(1)).unwrap(), 1);
        assert_eq!(
            exact_k_clique_conditioned_count(8, 3, &int(1), 4).unwrap(),
            35
        );
        assert_eq!(
            exact_k_clique_conditioned_count(4, 3, &int(1), 4).unwrap(),
            1
        );
        for c in [ratio(1, 3), ratio(1, 2), int(1)] {
            assert_eq!(
                exact_k_clique_conditioned_count(6, 2, &c, 3).unwrap(),
                exact_conditioned_count(6, 2, &c).unwrap()
            );
        }
        for_each_regular_graph(8, 3, |g| {
            let adj: Vec<u64> = (0..8)
                .map(|v| g.neighbors(v).iter().fold(0u64, |m, &w| m | 1 << w))
                .collect();
            assert_eq!(mask_k_cliques(&adj, 4), count_k_cliques(&g, 4).unwrap());
            assert_eq!(mask_triangles(&adj), count_triangles(&g));
        })
        .unwrap();
    }

    #[test]
    fn preimage_histograms() {
        let r = phi_preimage_histogram(6, 2, PairingOptions::default()).unwrap();
        assert!(r.all_hold);
        let by_weight = |w: u32| -> u64 {
            r.entries
                .iter()
                .filter(|e| e.weight == w)
                .map(|e| e.count)
                .sum()
        };
        assert_eq!(by_weight(0), 60 * 64);
        assert_eq!(by_weight(2), 10 * 64);
        assert_eq!(r.count_of(&RevealProfile::from_bits(vec![true; 6])), 0);
        let k4 = phi_preimage_histogram(4, 3, PairingOptions::default()).unwrap();
        assert_eq!(k4.entries.len(), 1);
        assert_eq!((k4.entries[0].weight, k4.entries[0].count), (3, 1296));
    }

    #[test]
    fn orbits() {
        for g in enumerate_regular_graphs(6, 2).unwrap() {
            let gs = PortLabeledGraph::with_rank_ports(g);
            for threshold in [0, 1, 2, 3] {
                assert!(orbit_check(&gs, threshold).unwrap().holds);
            }
        }
        let check = orbit_check(&PortLabeledGraph::with_rank_ports(complete(4)), 2).unwrap();
        assert_eq!((check.permutations, check.permutation_hits), (24, 24));
    }
}
