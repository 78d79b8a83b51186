//! Random regular graphs and the planted lower-bound families.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::census::{t_max, threshold_of};
use crate::graph::{GraphError, RegularGraph};
use crate::rational::{self, Rational};
use crate::sampler::SwapGraph;

/// Attempts before configuration-model rejection gives up.
pub const DEFAULT_REJECTION_BUDGET: u32 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("no simple graph after {attempts} configuration-model attempts")]
    RejectionBudgetExceeded { attempts: u32 },
    #[error("infeasible planted spec: {0}")]
    InfeasibleSpec(String),
    #[error("parity violation: {0}")]
    ParityViolation(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Deterministic generator for `(seed, stream)`; distinct streams never overlap.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform simple `d`-regular graph: uniform pairing of `dn` half-edges,
/// rejected until no loop or repeated edge appears.
pub fn sample_configuration_model(
    n: usize,
    d: usize,
    seed: u64,
    budget: u32,
) -> Result<RegularGraph, GenerateError> {
    let mut rng = rng_for(seed, 0);
    configuration_model_with(n, d, budget, &mut rng)
}

pub(crate) fn configuration_model_with(
    n: usize,
    d: usize,
    budget: u32,
    rng: &mut impl Rng,
) -> Result<RegularGraph, GenerateError> {
    if n == 0 || d >= n {
        return Err(
            GraphError::InvalidParameters(format!("need 0 <= d < n, got n={n} d={d}")).into(),
        );
    }
    if (n * d) % 2 == 1 {
        return Err(GraphError::ParityViolation { n, d }.into());
    }
    let mut points: Vec<u32> = (0..n as u32)
        .flat_map(|v| std::iter::repeat_n(v, d))
        .collect();
    let mut lists: Vec<Vec<u32>> = vec![Vec::with_capacity(d); n];
    'attempt: for _ in 0..budget {
        points.shuffle(rng);
        lists.iter_mut().for_each(Vec::clear);
        for pair in points.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b || lists[a as usize].contains(&b) {
                continue 'attempt;
            }
            lists[a as usize].push(b);
            lists[b as usize].push(a);
        }
        let edges: Vec<(usize, usize)> = points
            .chunks_exact(2)
            .map(|p| (p[0] as usize, p[1] as usize))
            .collect();
        return Ok(RegularGraph::from_edges(n, d, &edges)?);
    }
    Err(GenerateError::RejectionBudgetExceeded { attempts: budget })
}

/// Some `d`-regular graph on `m` nodes: configuration model when it succeeds
/// within `budget`, otherwise a circulant start randomized by edge switches.
pub(crate) fn random_regular_with(
    m: usize,
    d: usize,
    budget: u32,
    rng: &mut impl Rng,
) -> Result<RegularGraph, GenerateError> {
    match configuration_model_with(m, d, budget, rng) {
        Ok(g) => Ok(g),
        Err(GenerateError::RejectionBudgetExceeded { .. }) => {
            let mut state = SwapGraph::from_graph(&circulant(m, d)?);
            let attempts = 20 * m * d;
            for _ in 0..attempts {
                if let Some(p) = state.propose_swap(rng) {
                    state.apply(&p);
                }
            }
            Ok(state.to_graph())
        }
        Err(other) => Err(other),
    }
}

/// Circulant `d`-regular graph on `m >= d+1` nodes (`i ~ i±1..i±d/2`, plus the
/// antipode when `d` is odd).
pub fn circulant(m: usize, d: usize) -> Result<RegularGraph, GenerateError> {
    if m < d + 1 || (m * d) % 2 == 1 {
        return Err(GenerateError::InfeasibleSpec(format!(
            "no {d}-regular graph on {m} nodes"
        )));
    }
    let mut edges = Vec::with_capacity(m * d / 2);
    for i in 0..m {
        for s in 1..=d / 2 {
            let j = (i + s) % m;
            edges.push((i.min(j), i.max(j)));
        }
        if d % 2 == 1 && i < m / 2 {
            edges.push((i, i + m / 2));
        }
    }
    Ok(RegularGraph::from_edges(m, d, &edges)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BlockKind {
    /// `K_{d+1}`.
    Clique,
    /// `K_{d+2}` minus a perfect matching.
    MatchedComplement,
}

impl BlockKind {
    pub fn block_size(self, d: usize) -> usize {
        match self {
            BlockKind::Clique => d + 1,
            BlockKind::MatchedComplement => d + 2,
        }
    }

    /// Triangles inside one block.
    pub fn block_triangles(self, d: usize) -> u64 {
        let d = d as u64;
        match self {
            BlockKind::Clique => (d + 1) * d * (d.saturating_sub(1)) / 6,
            // C(d+2, 3) minus the triples that contain a matched pair.
            BlockKind::MatchedComplement => (d + 2) * (d + 1) * d / 6 - d * (d + 2) / 2,
        }
    }
}

/// Parameters of a planted family: `b` disjoint blocks plus an `m`-node residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub n: usize,
    pub d: usize,
    #[serde(with = "rational::serde_rational")]
    pub c: Rational,
    pub b: usize,
    pub m: usize,
    pub block_kind: BlockKind,
}

impl PlantedSpec {
    /// Smallest block count whose blocks alone reach `⌈c · T_max⌉` triangles.
    ///
    /// For cliques this is `b = ⌈c n / (d+1)⌉`.
    pub fn for_fraction(
        n: usize,
        d: usize,
        c: &Rational,
        block_kind: BlockKind,
    ) -> Result<Self, GenerateError> {
        if block_kind == BlockKind::MatchedComplement && d % 2 == 1 {
            return Err(GenerateError::ParityViolation(format!(
                "K_(d+2) minus a perfect matching needs d+2 even, got d={d}"
            )));
        }
        let b = match block_kind {
            BlockKind::Clique => {
                let b = c * rational::int(n as i64) / rational::int(d as i64 + 1);
                threshold_of(&b) as usize
            }
            BlockKind::MatchedComplement => {
                let needed = threshold_of(&(c * t_max(n, d)));
                let per_block = block_kind.block_triangles(d);
                if per_block == 0 {
                    if needed > 0 {
                        return Err(GenerateError::InfeasibleSpec(format!(
                            "blocks carry no triangles at d={d}"
                        )));
                    }
                    0
                } else {
                    needed.div_ceil(per_block) as usize
                }
            }
        };
        Self::build(n, d, c.clone(), b, block_kind)
    }

    /// Spec with an explicit block count; `c` records the block fraction of `T_max`.
    pub fn with_blocks(
        n: usize,
        d: usize,
        b: usize,
        block_kind: BlockKind,
    ) -> Result<Self, GenerateError> {
        if block_kind == BlockKind::MatchedComplement && d % 2 == 1 {
            return Err(GenerateError::ParityViolation(format!(
                "K_(d+2) minus a perfect matching needs d+2 even, got d={d}"
            )));
        }
        let tmax = t_max(n, d);
        let c = if tmax == rational::int(0) {
            rational::int(0)
        } else {
            rational::int((b as u64 * block_kind.block_triangles(d)) as i64) / tmax
        };
        Self::build(n, d, c, b, block_kind)
    }

    fn build(
        n: usize,
        d: usize,
        c: Rational,
        b: usize,
        block_kind: BlockKind,
    ) -> Result<Self, GenerateError> {
        let used = b * block_kind.block_size(d);
        if used > n {
            return Err(GenerateError::InfeasibleSpec(format!(
                "{b} blocks of size {} exceed n={n}",
                block_kind.block_size(d)
            )));
        }
        let spec = Self {
            n,
            d,
            c,
            b,
            m: n - used,
            block_kind,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GenerateError> {
        let size = self.block_kind.block_size(self.d);
        if self.b * size + self.m != self.n {
            return Err(GenerateError::InfeasibleSpec(format!(
                "b*{size} + m = {} != n = {}",
                self.b * size + self.m,
                self.n
            )));
        }
        if self.block_kind == BlockKind::MatchedComplement && self.d % 2 == 1 {
            return Err(GenerateError::ParityViolation(format!(
                "d={} is odd",
                self.d
            )));
        }
        if self.m != 0 && (self.m < self.d + 1 || (self.d * self.m) % 2 == 1) {
            return Err(GenerateError::InfeasibleSpec(format!(
                "no {}-regular residual on m={} nodes",
                self.d, self.m
            )));
        }
        Ok(())
    }

    /// Node ranges occupied by the blocks, in order.
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let size = self.block_kind.block_size(self.d);
        (0..self.b).map(|i| i * size..(i + 1) * size).collect()
    }
}

/// Builds the planted graph: blocks on consecutive node runs starting at 0,
/// residual on the last `m` nodes.
pub fn plant(spec: &PlantedSpec, seed: u64) -> Result<RegularGraph, GenerateError> {
    spec.validate()?;
    let d = spec.d;
    let mut edges = Vec::with_capacity(spec.n * d / 2);
    for range in spec.block_ranges() {
        let base = range.start;
        let size = range.len();
        for u in 0..size {
            for v in u + 1..size {
                let matched = u % 2 == 0 && v == u + 1;
                if spec.block_kind == BlockKind::MatchedComplement && matched {
                    continue;
                }
                edges.push((base + u, base + v));
            }
        }
    }
    if spec.m > 0 {
        let mut rng = rng_for(seed, 1);
        let residual = random_regular_with(spec.m, d, 1_000, &mut rng)?;
        let base = spec.n - spec.m;
        edges.extend(residual.edges().map(|e| (base + e.u, base + e.v)));
    }
    Ok(RegularGraph::from_edges(spec.n, d, &edges)?)
}

pub fn plant_clique_family(spec: &PlantedSpec, seed: u64) -> Result<RegularGraph, GenerateError> {
    if spec.block_kind != BlockKind::Clique {
        return Err(GenerateError::InfeasibleSpec(
            "expected CLIQUE blocks".into(),
        ));
    }
    plant(spec, seed)
}

pub fn plant_matched_complement_family(
    spec: &PlantedSpec,
    seed: u64,
) -> Result<RegularGraph, GenerateError> {
    if spec.block_kind != BlockKind::MatchedComplement {
        return Err(GenerateError::InfeasibleSpec(
            "expected MATCHED_COMPLEMENT blocks".into(),
        ));
    }
    plant(spec, seed)
}

/// Uniform permutation of `0..n` (Fisher-Yates), deterministic in `seed`.
pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng_for(seed, 2);
    random_permutation_with(n, &mut rng)
}

pub fn random_permutation_with(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(rng);
    sigma
}
