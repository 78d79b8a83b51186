//! Configuration ordering of a port-labeled graph, the reveal profile that
//! marks which edges close a triangle when the edges are added in that order,
//! and averages of the profile weight over node relabelings.
//!
//! An edge `(i, j)` closes a triangle exactly when some common neighbor `h`
//! satisfies `h < min(i, j)`, so the weight never depends on the port labels.
//! Under a relabeling `σ` the same test reads `σ(h) < min(σ(i), σ(j))`, which
//! is what [`ApexTable`] evaluates without rebuilding the graph.

use std::fmt::Write as _;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::t_c;
use crate::census::{count_triangles, edge_triangle_table, triangle_threshold};
use crate::generators::{random_permutation_with, rng_for};
use crate::graph::{EdgeRef, PortLabeledGraph, RegularGraph};
use crate::rational::{self, Rational};
use crate::SCHEMA_VERSION;

/// Largest `n` for which all `n!` relabelings are enumerated.
pub const DEFAULT_EXACT_CAP: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RevealError {
    #[error("exact permutation sweep needs n <= {cap}, got n = {n}")]
    CapExceeded { n: usize, cap: usize },
    #[error("graph has {found} triangles, below the required {required}")]
    ConstraintUnmet { found: u64, required: u64 },
    #[error("malformed run-length profile: {0}")]
    BadProfile(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RevealProfile {
    bits: Vec<bool>,
    weight: usize,
}

impl RevealProfile {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        let weight = bits.iter().filter(|&&b| b).count();
        Self { bits, weight }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `|x|`, the number of set bits.
    pub fn weight(&self) -> usize {
        self.weight
    }

    /// Run-length form `bit:run,bit:run,...`, e.g. `0:3,1:3`; empty for length 0.
    pub fn to_rle(&self) -> String {
        let mut out = String::new();
        let mut iter = self.bits.iter().peekable();
        while let Some(&bit) = iter.next() {
            let mut run = 1;
            while iter.peek() == Some(&&bit) {
                iter.next();
                run += 1;
            }
            if !out.is_empty() {
                out.push(',');
            }
            let _ = write!(out, "{}:{run}", bit as u8);
        }
        out
    }

    pub fn from_rle(rle: &str) -> Result<Self, RevealError> {
        let mut bits = Vec::new();
        if rle.is_empty() {
            return Ok(Self::from_bits(bits));
        }
        for part in rle.split(',') {
            let (bit, run) = part
                .split_once(':')
                .ok_or_else(|| RevealError::BadProfile(part.to_string()))?;
            let bit = match bit {
                "0" => false,
                "1" => true,
                _ => return Err(RevealError::BadProfile(part.to_string())),
            };
            let run: usize = run
                .parse()
                .map_err(|_| RevealError::BadProfile(part.to_string()))?;
            bits.extend(std::iter::repeat_n(bit, run));
        }
        Ok(Self::from_bits(bits))
    }

    pub fn dump(&self) -> ProfileDump {
        ProfileDump {
            schema_version: SCHEMA_VERSION,
            len: self.len(),
            weight: self.weight,
            rle: self.to_rle(),
        }
    }
}

/// JSON form `{len, weight, rle}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileDump {
    pub schema_version: u32,
    pub len: usize,
    pub weight: usize,
    pub rle: String,
}

impl TryFrom<&ProfileDump> for RevealProfile {
    type Error = RevealError;

    fn try_from(dump: &ProfileDump) -> Result<Self, Self::Error> {
        let profile = RevealProfile::from_rle(&dump.rle)?;
        if profile.len() != dump.len || profile.weight() != dump.weight {
            return Err(RevealError::BadProfile(
                "len/weight disagree with rle".into(),
            ));
        }
        Ok(profile)
    }
}

/// Edges sorted by smaller endpoint, ties broken by the port label at that endpoint.
pub fn configuration_order(gs: &PortLabeledGraph) -> Vec<EdgeRef> {
    let g = gs.graph();
    let mut order = Vec::with_capacity(g.edge_count());
    let mut at_node: Vec<(u32, usize)> = Vec::with_capacity(g.d());
    for i in 0..g.n() {
        at_node.clear();
        at_node.extend(
            g.neighbors(i)
                .iter()
                .zip(gs.ports(i))
                .filter(|(&j, _)| (j as usize) > i)
                .map(|(&j, &label)| (label, j as usize)),
        );
        at_node.sort_unstable();
        order.extend(at_node.iter().map(|&(_, j)| EdgeRef { u: i, v: j }));
    }
    order
}

/// Adds the edges one by one in configuration order and marks those that
/// close at least one triangle with the edges already present.
pub fn encode_phi(gs: &PortLabeledGraph) -> RevealProfile {
    let g = gs.graph();
    let mut partial: Vec<Vec<u32>> = vec![Vec::with_capacity(g.d()); g.n()];
    let mut mark = vec![false; g.n()];
    let bits = configuration_order(gs)
        .into_iter()
        .map(|e| {
            for &x in &partial[e.u] {
                mark[x as usize] = true;
            }
            let closes = partial[e.v].iter().any(|&x| mark[x as usize]);
            for &x in &partial[e.u] {
                mark[x as usize] = false;
            }
            partial[e.u].push(e.v as u32);
            partial[e.v].push(e.u as u32);
            closes
        })
        .collect();
    RevealProfile::from_bits(bits)
}

/// `|φ(G*)|` without port labels: edges `(i, j)` with a common neighbor `h < min(i, j)`.
pub fn phi_weight_fast(g: &RegularGraph) -> usize {
    g.edges()
        .filter(|e| {
            let (x, y) = (g.neighbors(e.u), g.neighbors(e.v));
            let limit = e.u as u32;
            let (mut a, mut b) = (0, 0);
            while a < x.len() && b < y.len() && x[a] < limit && y[b] < limit {
                match x[a].cmp(&y[b]) {
                    std::cmp::Ordering::Less => a += 1,
                    std::cmp::Ordering::Greater => b += 1,
                    std::cmp::Ordering::Equal => return true,
                }
            }
            false
        })
        .count()
}

/// `Σ_e t_e / (t_e + 2)`, the exact mean of `|φ(G*_σ)|` over uniform `σ`.
pub fn expected_phi_exact(g: &RegularGraph) -> Rational {
    let table = edge_triangle_table(g);
    // Group by t_e to keep the rational arithmetic small.
    let hist = table.histogram(g.d());
    hist.iter()
        .enumerate()
        .filter(|&(t, &count)| t > 0 && count > 0)
        .map(|(t, &count)| rational::ratio((count * t as u64) as i64, t as i64 + 2))
        .fold(rational::int(0), |acc, x| acc + x)
}

/// Per-edge lists of triangle apexes, for evaluating the profile weight of
/// `G_σ` directly from `σ`.
#[derive(Debug, Clone)]
pub struct ApexTable {
    n: usize,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    apexes: Vec<u32>,
    /// Apex sets as bit masks, when `n <= 64`.
    masks: Option<Vec<u64>>,
}

impl ApexTable {
    pub fn new(g: &RegularGraph) -> Self {
        let mut edges = Vec::new();
        let mut offsets = vec![0];
        let mut apexes = Vec::new();
        for e in g.edges() {
            let common = g.common_neighbors(e.u, e.v);
            if common.is_empty() {
                continue;
            }
            edges.push((e.u as u32, e.v as u32));
            apexes.extend(common.into_iter().map(|h| h as u32));
            offsets.push(apexes.len());
        }
        let masks = (g.n() <= 64).then(|| {
            offsets
                .windows(2)
                .map(|w| apexes[w[0]..w[1]].iter().fold(0u64, |m, &h| m | 1 << h))
                .collect()
        });
        Self {
            n: g.n(),
            edges,
            offsets,
            apexes,
            masks,
        }
    }

    /// `|φ(G_σ)|` where node `v` is relabeled to `sigma[v]`.
    pub fn weight_under(&self, sigma: &[usize]) -> usize {
        if let Some(masks) = &self.masks {
            // below[k]: nodes whose new label is < k.
            let mut below = [0u64; 65];
            let mut inverse = [0usize; 64];
            for (v, &s) in sigma.iter().enumerate() {
                inverse[s] = v;
            }
            for k in 0..self.n {
                below[k + 1] = below[k] | 1 << inverse[k];
            }
            return self
                .edges
                .iter()
                .zip(masks)
                .filter(|&(&(i, j), &m)| m & below[sigma[i as usize].min(sigma[j as usize])] != 0)
                .count();
        }
        self.edges
            .iter()
            .enumerate()
            .filter(|&(k, &(i, j))| {
                let low = sigma[i as usize].min(sigma[j as usize]);
                self.apexes[self.offsets[k]..self.offsets[k + 1]]
                    .iter()
                    .any(|&h| sigma[h as usize] < low)
            })
            .count()
    }
}

/// Rearranges `items` into the next lexicographic permutation; false after the last.
pub(crate) fn next_permutation<T: Ord>(items: &mut [T]) -> bool {
    if items.len() < 2 {
        return false;
    }
    let mut i = items.len() - 1;
    while i > 0 && items[i - 1] >= items[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = items.len() - 1;
    while items[j] <= items[i - 1] {
        j -= 1;
    }
    items.swap(i - 1, j);
    items[i..].reverse();
    true
}

/// Calls `visit` on every permutation of `0..n` whose first entry is `first`.
pub(crate) fn for_each_permutation_with_first(
    n: usize,
    first: usize,
    mut visit: impl FnMut(&[usize]),
) {
    let mut sigma: Vec<usize> = std::iter::once(first)
        .chain((0..n).filter(|&x| x != first))
        .collect();
    loop {
        visit(&sigma);
        if !next_permutation(&mut sigma[1..]) {
            break;
        }
    }
}

/// Histogram of `|φ(G_σ)|` over all `n!` relabelings (index = weight).
pub fn weight_distribution_exact(g: &RegularGraph, cap: usize) -> Result<Vec<u64>, RevealError> {
    if g.n() > cap {
        return Err(RevealError::CapExceeded { n: g.n(), cap });
    }
    let table = ApexTable::new(g);
    let len = g.edge_count() + 1;
    let hist = (0..g.n())
        .into_par_iter()
        .map(|first| {
            let mut local = vec![0u64; len];
            for_each_permutation_with_first(g.n(), first, |sigma| {
                local[table.weight_under(sigma)] += 1;
            });
            local
        })
        .reduce(
            || vec![0u64; len],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(hist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PermutationMode {
    Exact { cap: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for PermutationMode {
    fn default() -> Self {
        PermutationMode::Exact {
            cap: DEFAULT_EXACT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    Exact {
        #[serde(with = "rational::serde_rational")]
        value: Rational,
    },
    MonteCarlo {
        mean: f64,
        stderr: f64,
        samples: usize,
        seed: u64,
    },
}

impl Estimate {
    pub fn as_f64(&self) -> f64 {
        match self {
            Estimate::Exact { value } => rational::to_f64(value),
            Estimate::MonteCarlo { mean, .. } => *mean,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Estimate::Exact { value } => Some(value),
            Estimate::MonteCarlo { .. } => None,
        }
    }
}

fn monte_carlo_weights(g: &RegularGraph, samples: usize, seed: u64) -> Vec<usize> {
    let table = ApexTable::new(g);
    let mut rng = rng_for(seed, 3);
    (0..samples)
        .map(|_| table.weight_under(&random_permutation_with(g.n(), &mut rng)))
        .collect()
}

fn mean_and_stderr(values: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, (var / n).sqrt())
}

/// Mean of `|φ(G_σ)|` over uniform relabelings `σ`.
pub fn mean_phi_over_permutations(
    g: &RegularGraph,
    mode: PermutationMode,
) -> Result<Estimate, RevealError> {
    match mode {
        PermutationMode::Exact { cap } => {
            let hist = weight_distribution_exact(g, cap)?;
            let total: u64 = hist.iter().sum();
            let weighted: u64 = hist.iter().enumerate().map(|(w, &c)| w as u64 * c).sum();
            Ok(Estimate::Exact {
                value: Rational::new(BigInt::from(weighted), BigInt::from(total)),
            })
        }
        PermutationMode::MonteCarlo { samples, seed } => {
            let weights = monte_carlo_weights(g, samples, seed);
            let (mean, stderr) = mean_and_stderr(weights.iter().map(|&w| w as f64));
            Ok(Estimate::MonteCarlo {
                mean,
                stderr,
                samples,
                seed,
            })
        }
    }
}

/// Fraction of relabelings whose profile weight reaches `T_c - 1`, against
/// the Markov-inequality floor `2 / (dn)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessFraction {
    #[serde(with = "rational::serde_rational")]
    pub t_c: Rational,
    /// Smallest integer weight with `|x| >= T_c - 1`.
    pub weight_threshold: i64,
    pub fraction: Estimate,
    #[serde(with = "rational::serde_rational")]
    pub bound: Rational,
    pub holds: bool,
}

pub fn permutation_success_fraction(
    g: &RegularGraph,
    c: &Rational,
    mode: PermutationMode,
) -> Result<SuccessFraction, RevealError> {
    let (n, d) = (g.n(), g.d());
    let required = triangle_threshold(n, d, c);
    let found = count_triangles(g);
    if found < required {
        return Err(RevealError::ConstraintUnmet { found, required });
    }
    let tc = t_c(n, d, c);
    let weight_threshold =
        i64::try_from(rational::ceil_int(&(&tc - rational::int(1)))).expect("threshold fits");
    let bound = rational::ratio(2, (d * n) as i64);
    let meets = |w: usize| w as i64 >= weight_threshold;
    let (fraction, holds) = match mode {
        PermutationMode::Exact { cap } => {
            let hist = weight_distribution_exact(g, cap)?;
            let total: u64 = hist.iter().sum();
            let hits: u64 = hist
                .iter()
                .enumerate()
                .filter(|&(w, _)| meets(w))
                .map(|(_, &c)| c)
                .sum();
            let value = Rational::new(BigInt::from(hits), BigInt::from(total));
            let holds = value >= bound;
            (Estimate::Exact { value }, holds)
        }
        PermutationMode::MonteCarlo { samples, seed } => {
            let weights = monte_carlo_weights(g, samples, seed);
            let (mean, stderr) =
                mean_and_stderr(weights.iter().map(|&w| if meets(w) { 1.0 } else { 0.0 }));
            let holds = mean >= rational::to_f64(&bound) - 3.0 * stderr;
            (
                Estimate::MonteCarlo {
                    mean,
                    stderr,
                    samples,
                    seed,
                },
                holds,
            )
        }
    };
    Ok(SuccessFraction {
        t_c: tc,
        weight_threshold,
        fraction,
        bound,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::generators::{plant, random_permutation, BlockKind, PlantedSpec};
    use crate::graph::invert_permutation;
    use crate::rational::{int, ratio};

    #[test]
    fn configuration_orders() {
        let k4 = PortLabeledGraph::with_rank_ports(complete(4));
        let order: Vec<(usize, usize)> = configuration_order(&k4)
            .iter()
            .map(|e| (e.u, e.v))
            .collect();
        assert_eq!(order, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let tt = PortLabeledGraph::with_rank_ports(two_triangles());
        let order: Vec<(usize, usize)> = configuration_order(&tt)
            .iter()
            .map(|e| (e.u, e.v))
            .collect();
        assert_eq!(order, vec![(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]);
        // Reversed labels at node 0 flip the order of its edges.
        let mut labels = k4.labels();
        labels[0] = vec![3, 2, 1];
        let flipped = PortLabeledGraph::new(complete(4), &labels).unwrap();
        assert_eq!(configuration_order(&flipped)[0], EdgeRef { u: 0, v: 3 });
    }

    #[test]
    fn reveal_profiles() {
        let k4 = encode_phi(&PortLabeledGraph::with_rank_ports(complete(4)));
        assert_eq!(k4.bits(), &[false, false, false, true, true, true]);
        assert_eq!(k4.weight(), 3);
        let tt = encode_phi(&PortLabeledGraph::with_rank_ports(two_triangles()));
        assert_eq!(tt.bits(), &[false, false, true, false, false, true]);
        for g in [petersen(), cycle(6)] {
            let p = encode_phi(&PortLabeledGraph::with_rank_ports(g));
            assert_eq!(p.weight(), 0);
        }
        assert_eq!(phi_weight_fast(&complete(4)), 3);
        assert_eq!(phi_weight_fast(&two_triangles()), 2);
        assert_eq!(phi_weight_fast(&petersen()), 0);
    }

    #[test]
    fn k4_weight_is_label_independent_over_all_labelings() {
        let base = PortLabeledGraph::with_rank_ports(complete(4));
        let perms: Vec<Vec<u32>> = {
            let mut p = vec![1u32, 2, 3];
            let mut all = vec![p.clone()];
            while next_permutation(&mut p) {
                all.push(p.clone());
            }
            all
        };
        let mut seen = 0;
        for a in &perms {
            for b in &perms {
                for c in &perms {
                    for e in &perms {
                        let labels = vec![a.clone(), b.clone(), c.clone(), e.clone()];
                        let g = PortLabeledGraph::new(base.graph().clone(), &labels).unwrap();
                        assert_eq!(encode_phi(&g).weight(), 3);
                        seen += 1;
                    }
                }
            }
        }
        assert_eq!(seen, 1296);
    }

    #[test]
    fn rle_format() {
        let p = RevealProfile::from_bits(vec![false, false, false, true, true, true]);
        assert_eq!(p.to_rle(), "0:3,1:3");
        let dump = p.dump();
        assert_eq!((dump.len, dump.weight), (6, 3));
        assert_eq!(RevealProfile::try_from(&dump).unwrap(), p);
        assert!(RevealProfile::from_rle("2:3").is_err());
        assert!(RevealProfile::from_rle("1-3").is_err());
        assert!(RevealProfile::from_rle("").unwrap().is_empty());
    }

    #[test]
    fn expected_weights() {
        assert_eq!(expected_phi_exact(&complete(4)), int(3));
        assert_eq!(expected_phi_exact(&two_triangles()), int(2));
        assert_eq!(expected_phi_exact(&prism()), int(2));
        assert_eq!(expected_phi_exact(&petersen()), int(0));
    }

    #[test]
    fn exact_permutation_means() {
        let mode = PermutationMode::default();
        for g in [complete(4), two_triangles(), prism()] {
            let mean = mean_phi_over_permutations(&g, mode).unwrap();
            assert_eq!(mean.exact().unwrap(), &expected_phi_exact(&g));
        }
        // K4: every relabeling gives weight 3.
        assert_eq!(
            weight_distribution_exact(&complete(4), 9).unwrap(),
            vec![0, 0, 0, 24, 0, 0, 0]
        );
        assert!(matches!(
            mean_phi_over_permutations(&petersen(), PermutationMode::Exact { cap: 9 }),
            Err(RevealError::CapExceeded { n: 10, cap: 9 })
        ));
    }

    #[test]
    fn apex_table_agrees_with_relabeling() {
        let spec = PlantedSpec::for_fraction(12, 3, &ratio(1, 2), BlockKind::Clique).unwrap();
        let g = plant(&spec, 5).unwrap();
        let table = ApexTable::new(&g);
        let mut lists = table.clone();
        lists.masks = None;
        for seed in 0..50 {
            let sigma = random_permutation(12, seed);
            let relabeled = g.relabel(&sigma).unwrap();
            assert_eq!(table.weight_under(&sigma), phi_weight_fast(&relabeled));
            assert_eq!(lists.weight_under(&sigma), phi_weight_fast(&relabeled));
            let back = relabeled.relabel(&invert_permutation(&sigma)).unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn monte_carlo_mean_is_close() {
        let g = matched_complement(4).disjoint_union(&complete(5)).unwrap();
        let est = mean_phi_over_permutations(
            &g,
            PermutationMode::MonteCarlo {
                samples: 20_000,
                seed: 8,
            },
        )
        .unwrap();
        let Estimate::MonteCarlo { mean, stderr, .. } = est else {
            panic!("expected estimate")
        };
        let exact = rational::to_f64(&expected_phi_exact(&g));
        assert!(stderr > 0.0);
        assert!((mean - exact).abs() <= 4.0 * stderr, "{mean} vs {exact}");
    }

    #[test]
    fn success_fractions() {
        let k4 = permutation_success_fraction(&complete(4), &int(1), PermutationMode::default())
            .unwrap();
        assert_eq!(k4.t_c, int(3));
        assert_eq!(k4.weight_threshold, 2);
        assert_eq!(k4.fraction.exact().unwrap(), &int(1));
        assert_eq!(k4.bound, ratio(1, 6));
        assert!(k4.holds);
        let tt =
            permutation_success_fraction(&two_triangles(), &int(1), PermutationMode::default())
                .unwrap();
        assert_eq!(tt.t_c, int(2));
        assert_eq!(tt.fraction.exact().unwrap(), &int(1));
        assert!(matches!(
            permutation_success_fraction(&prism(), &int(1), PermutationMode::default()),
            Err(RevealError::ConstraintUnmet {
                found: 2,
                required: 6
            })
        ));
        let spec = PlantedSpec::for_fraction(20, 3, &ratio(3, 5), BlockKind::Clique).unwrap();
        let planted = plant(&spec, 1).unwrap();
        let mc = permutation_success_fraction(
            &planted,
            &ratio(3, 5),
            PermutationMode::MonteCarlo {
                samples: 10_000,
                seed: 42,
            },
        )
        .unwrap();
        assert!(mc.holds, "{mc:?}");
    }
}
