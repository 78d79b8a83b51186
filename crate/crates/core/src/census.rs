//! Exact triangle and k-clique counts, per-edge triangle incidence, and the
//! maximal-count formulas `T_max = C(d,2) n / 3` and `C(d,k-1) n / k`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{sorted_intersection_count, EdgeRef, RegularGraph};
use crate::rational::{self, Rational};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CensusError {
    #[error("clique size k = {k} outside 3..={max} for degree {d}")]
    BadK { k: usize, d: usize, max: usize },
    #[error("clique count overflowed 64 bits")]
    Overflow,
}

/// Number of triangles through each edge, indexed like [`RegularGraph::edges`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeTriangleTable {
    edges: Vec<EdgeRef>,
    counts: Vec<u32>,
}

impl EdgeTriangleTable {
    pub fn edges(&self) -> &[EdgeRef] {
        &self.edges
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeRef, u32)> + '_ {
        self.edges.iter().copied().zip(self.counts.iter().copied())
    }

    /// `t_e` for the edge `{a, b}`, or `None` when it is not an edge.
    pub fn get(&self, a: usize, b: usize) -> Option<u32> {
        self.edges
            .binary_search(&EdgeRef::new(a, b))
            .ok()
            .map(|i| self.counts[i])
    }

    /// `Σ_e t_e`, which is three times the triangle count.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&t| t as u64).sum()
    }

    /// Number of edges with each value of `t_e`, for `t_e` in `0..d`.
    pub fn histogram(&self, d: usize) -> Vec<u64> {
        let mut hist = vec![0u64; d.max(1)];
        for &t in &self.counts {
            hist[t as usize] += 1;
        }
        hist
    }
}

pub fn edge_triangle_table(g: &RegularGraph) -> EdgeTriangleTable {
    let edges: Vec<EdgeRef> = g.edges().collect();
    let counts = edges
        .iter()
        .map(|e| g.common_neighbor_count(e.u, e.v) as u32)
        .collect();
    EdgeTriangleTable { edges, counts }
}

/// `T(G)`, by intersecting sorted neighbor lists along every edge.
pub fn count_triangles(g: &RegularGraph) -> u64 {
    let mut sum = 0u64;
    for u in 0..g.n() {
        let nu = g.neighbors(u);
        for &v in nu.iter().filter(|&&v| (v as usize) > u) {
            sum += sorted_intersection_count(nu, g.neighbors(v as usize)) as u64;
        }
    }
    sum / 3
}

/// Triangles whose three nodes all lie in `nodes` (which must be sorted).
pub fn count_triangles_within(g: &RegularGraph, nodes: &[usize]) -> u64 {
    let inside = |x: usize| nodes.binary_search(&x).is_ok();
    let mut count = 0u64;
    for &u in nodes {
        for v in g.neighbors(u).iter().map(|&v| v as usize) {
            if v <= u || !inside(v) {
                continue;
            }
            count += g
                .common_neighbors(u, v)
                .into_iter()
                .filter(|&w| w > v && inside(w))
                .count() as u64;
        }
    }
    count
}

fn check_k(d: usize, k: usize) -> Result<(), CensusError> {
    if k < 3 || k > d + 1 {
        return Err(CensusError::BadK { k, d, max: d + 1 });
    }
    Ok(())
}

/// Number of `k`-node complete subgraphs, `3 <= k <= d+1`.
///
/// Cliques are listed once each by only ever extending with larger node ids.
pub fn count_k_cliques(g: &RegularGraph, k: usize) -> Result<u64, CensusError> {
    check_k(g.d(), k)?;
    let mut total = 0u64;
    let mut scratch: Vec<Vec<u32>> = vec![Vec::new(); k];
    for v in 0..g.n() {
        let higher: Vec<u32> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| (w as usize) > v)
            .collect();
        let found = extend_cliques(g, &higher, k - 1, &mut scratch)?;
        total = total.checked_add(found).ok_or(CensusError::Overflow)?;
    }
    Ok(total)
}

/// Counts cliques of `remaining` more nodes drawn from `candidates`, all of
/// which are adjacent to every node chosen so far.
fn extend_cliques(
    g: &RegularGraph,
    candidates: &[u32],
    remaining: usize,
    scratch: &mut [Vec<u32>],
) -> Result<u64, CensusError> {
    if remaining == 0 {
        return Ok(1);
    }
    if candidates.len() < remaining {
        return Ok(0);
    }
    if remaining == 1 {
        return Ok(candidates.len() as u64);
    }
    let (level, rest) = scratch.split_first_mut().expect("scratch depth");
    let mut total = 0u64;
    for (i, &w) in candidates.iter().enumerate() {
        let tail = &candidates[i + 1..];
        if tail.len() + 1 < remaining {
            break;
        }
        level.clear();
        let nw = g.neighbors(w as usize);
        let (mut a, mut b) = (0, 0);
        while a < tail.len() && b < nw.len() {
            match tail[a].cmp(&nw[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    level.push(tail[a]);
                    a += 1;
                    b += 1;
                }
            }
        }
        let next = std::mem::take(level);
        let found = extend_cliques(g, &next, remaining - 1, rest);
        *level = next;
        total = total.checked_add(found?).ok_or(CensusError::Overflow)?;
    }
    Ok(total)
}

/// `T_max(n, d) = C(d, 2) n / 3`.
pub fn t_max(n: usize, d: usize) -> Rational {
    let pairs = (d as i64) * (d as i64 - 1) / 2;
    Rational::new(BigInt::from(pairs) * BigInt::from(n), BigInt::from(3))
}

/// `C(d, k-1) n / k`, the largest possible number of `K_k` subgraphs.
pub fn t_k_max(n: usize, d: usize, k: usize) -> Result<Rational, CensusError> {
    check_k(d, k)?;
    let choose = rational::binomial(d as u64, k as u64 - 1);
    Ok(Rational::new(
        BigInt::from(choose) * BigInt::from(n),
        BigInt::from(k),
    ))
}

/// The integer threshold `⌈c · T_max⌉`.
pub fn triangle_threshold(n: usize, d: usize, c: &Rational) -> u64 {
    threshold_of(&(c * t_max(n, d)))
}

pub(crate) fn threshold_of(value: &Rational) -> u64 {
    let ceil = rational::ceil_int(value);
    if ceil.sign() == num_bigint::Sign::Minus {
        0
    } else {
        u64::try_from(ceil).expect("threshold fits in u64")
    }
}

/// True iff `v` together with its neighbors induces `K_{d+1}`.
pub fn node_in_kplus1_clique(g: &RegularGraph, v: usize) -> bool {
    let nv = g.neighbors(v);
    nv.iter().all(|&w| {
        let nw = g.neighbors(w as usize);
        // N(w) must be exactly N[v] \ {w}.
        sorted_intersection_count(nv, nw) == nv.len() - 1
    })
}

/// JSON census report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CensusReport {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    #[serde(rename = "T")]
    pub triangles: u64,
    #[serde(rename = "T_max", with = "rational::serde_rational")]
    pub t_max: Rational,
    /// `T / T_max`; `None` when `T_max = 0`.
    #[serde(with = "rational::serde_rational_opt")]
    pub ratio_c: Option<Rational>,
    pub histogram_of_t_e: Vec<u64>,
    pub k_clique_counts: BTreeMap<usize, u64>,
}

/// Builds a census with k-clique counts for every `k` in `ks` (invalid `k` are rejected).
pub fn census_report(g: &RegularGraph, ks: &[usize]) -> Result<CensusReport, CensusError> {
    let triangles = count_triangles(g);
    let t_max = t_max(g.n(), g.d());
    let ratio_c = (t_max != rational::int(0)).then(|| rational::int(triangles as i64) / &t_max);
    let mut k_clique_counts = BTreeMap::new();
    for &k in ks {
        k_clique_counts.insert(k, count_k_cliques(g, k)?);
    }
    Ok(CensusReport {
        schema_version: SCHEMA_VERSION,
        n: g.n(),
        d: g.d(),
        triangles,
        t_max,
        ratio_c,
        histogram_of_t_e: edge_triangle_table(g).histogram(g.d()),
        k_clique_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::rational::{int, ratio};

    /// Brute force over all k-subsets.
    fn brute_cliques(g: &RegularGraph, k: usize) -> u64 {
        fn rec(g: &RegularGraph, start: usize, chosen: &mut Vec<usize>, k: usize) -> u64 {
            if chosen.len() == k {
                return 1;
            }
            let mut total = 0;
            for v in start..g.n() {
                if chosen.iter().all(|&c| g.has_edge(c, v)) {
                    chosen.push(v);
                    total += rec(g, v + 1, chosen, k);
                    chosen.pop();
                }
            }
            total
        }
        rec(g, 0, &mut Vec::new(), k)
    }

    #[test]
    fn triangle_counts_of_named_graphs() {
        assert_eq!(count_triangles(&complete(4)), 4);
        assert_eq!(count_triangles(&petersen()), 0);
        assert_eq!(count_triangles(&prism()), 2);
        assert_eq!(count_triangles(&two_triangles()), 2);
    }

    #[test]
    fn edge_tables() {
        let k4 = edge_triangle_table(&complete(4));
        assert!(k4.counts().iter().all(|&t| t == 2));
        assert_eq!(k4.total(), 12);
        let prism_table = edge_triangle_table(&prism());
        assert_eq!(prism_table.get(0, 1), Some(1));
        assert_eq!(prism_table.get(4, 1), Some(0));
        assert_eq!(prism_table.get(0, 4), None);
        assert_eq!(prism_table.histogram(3), vec![3, 6, 0]);
        assert!(edge_triangle_table(&two_triangles())
            .counts()
            .iter()
            .all(|&t| t == 1));
    }

    #[test]
    fn k_clique_counts() {
        let k4 = complete(4);
        assert_eq!(count_k_cliques(&k4, 4).unwrap(), 1);
        assert_eq!(count_k_cliques(&k4, 3).unwrap(), 4);
        assert!(matches!(
            count_k_cliques(&k4, 5),
            Err(CensusError::BadK { .. })
        ));
        assert!(matches!(
            count_k_cliques(&k4, 2),
            Err(CensusError::BadK { .. })
        ));
        let three_blocks = disjoint_cliques(3, 4).disjoint_union(&petersen()).unwrap();
        assert_eq!(count_k_cliques(&three_blocks, 4).unwrap(), 3);
        // K6 minus a perfect matching: oracle over all subsets.
        let h = matched_complement(4);
        assert_eq!(brute_cliques(&h, 3), 8);
        assert_eq!(brute_cliques(&h, 4), 0);
        assert_eq!(count_k_cliques(&h, 3).unwrap(), 8);
        assert_eq!(count_k_cliques(&h, 4).unwrap(), 0);
        let k7 = complete(7);
        for k in 3..=7 {
            assert_eq!(count_k_cliques(&k7, k).unwrap(), brute_cliques(&k7, k));
        }
    }

    #[test]
    fn maximal_count_formulas() {
        assert_eq!(t_max(4, 3), int(4));
        assert_eq!(t_max(20, 3), int(20));
        assert_eq!(t_max(7, 2), ratio(7, 3));
        assert_eq!(t_k_max(20, 3, 4).unwrap(), int(5));
        assert_eq!(t_k_max(8, 3, 4).unwrap(), int(2));
        assert_eq!(t_k_max(11, 5, 3).unwrap(), t_max(11, 5));
        assert!(t_k_max(8, 3, 5).is_err());
        assert_eq!(triangle_threshold(7, 2, &ratio(2, 5)), 1);
        assert_eq!(triangle_threshold(20, 3, &ratio(3, 5)), 12);
    }

    #[test]
    fn clique_reduction_identity() {
        // c·C(d,k-1)(n/k)·C(k,3)/C(d-2,k-3) = c·C(d,2)·n/3 for every (d, k).
        for d in 2..=24u64 {
            for k in 3..=(d + 1) {
                let lhs = Rational::new(
                    BigInt::from(rational::binomial(d, k - 1) * rational::binomial(k, 3)),
                    BigInt::from(rational::binomial(d - 2, k - 3)) * BigInt::from(k),
                );
                let rhs = Rational::new(BigInt::from(rational::binomial(d, 2)), BigInt::from(3));
                assert_eq!(lhs, rhs, "d={d} k={k}");
            }
        }
    }

    #[test]
    fn kplus1_membership() {
        let g = disjoint_cliques(2, 4);
        assert!((0..8).all(|v| node_in_kplus1_clique(&g, v)));
        assert!((0..6).all(|v| !node_in_kplus1_clique(&prism(), v)));
        assert!((0..10).all(|v| !node_in_kplus1_clique(&petersen(), v)));
    }

    #[test]
    fn census_report_json() {
        let report = census_report(&complete(4), &[3, 4]).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["T"], 4);
        assert_eq!(json["T_max"], "4");
        assert_eq!(json["ratio_c"], "1");
        assert_eq!(json["k_clique_counts"]["4"], 1);
        let within = count_triangles_within(&prism(), &[0, 1, 2, 3]);
        assert_eq!(within, 1);
    }
}
