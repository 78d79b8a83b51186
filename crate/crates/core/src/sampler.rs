//! Double-edge-swap Markov chains tilted by `exp(beta * T)`, with an annealing
//! phase that pushes the triangle count above `⌈c · T_max⌉` and a constrained
//! phase that walks uniformly (at `beta = 0`) inside that set.
//!
//! The swap chain restricted to the constraint set is not known to be
//! connected, so everything produced here is an empirical observation.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::census::{count_triangles, triangle_threshold};
use crate::generators::{self, rng_for, BlockKind, GenerateError, PlantedSpec};
use crate::graph::{sorted_intersection_count, RegularGraph};
use crate::rational::{self, Rational};
use crate::SCHEMA_VERSION;

/// Mutable simple graph supporting degree-preserving edge swaps with
/// incremental triangle bookkeeping.
#[derive(Debug, Clone)]
pub struct SwapGraph {
    n: usize,
    d: usize,
    adj: Vec<Vec<u32>>,
    edges: Vec<(u32, u32)>,
    triangles: u64,
}

/// Replace `edges[first] = (a, b)` and `edges[second] = (c, e)` by `(a, e)` and `(c, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapProposal {
    pub first: usize,
    pub second: usize,
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub e: u32,
}

impl SwapGraph {
    pub fn from_graph(g: &RegularGraph) -> Self {
        let adj = (0..g.n()).map(|v| g.neighbors(v).to_vec()).collect();
        let edges = g.edges().map(|e| (e.u as u32, e.v as u32)).collect();
        Self {
            n: g.n(),
            d: g.d(),
            adj,
            edges,
            triangles: count_triangles(g),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Tracked triangle count.
    pub fn triangles(&self) -> u64 {
        self.triangles
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.adj[a as usize].binary_search(&b).is_ok()
    }

    pub fn to_graph(&self) -> RegularGraph {
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(a, b)| (a as usize, b as usize))
            .collect();
        RegularGraph::from_edges(self.n, self.d, &edges).expect("swaps preserve regularity")
    }

    /// Checks a proposal built from explicit edge positions and orientation.
    pub fn proposal_at(&self, first: usize, second: usize, flip: bool) -> Option<SwapProposal> {
        if first == second {
            return None;
        }
        let (a, b) = self.edges[first];
        let (c, e) = if flip {
            let (x, y) = self.edges[second];
            (y, x)
        } else {
            self.edges[second]
        };
        // Shared endpoints would create a loop or reproduce the same edges.
        if a == c || a == e || b == c || b == e {
            return None;
        }
        if self.has_edge(a, e) || self.has_edge(c, b) {
            return None;
        }
        Some(SwapProposal {
            first,
            second,
            a,
            b,
            c,
            e,
        })
    }

    /// Uniform pair of distinct edges and a uniform orientation; `None` when
    /// the rewiring would create a loop or a repeated edge.
    pub fn propose_swap(&self, rng: &mut impl Rng) -> Option<SwapProposal> {
        let m = self.edges.len();
        if m < 2 {
            return None;
        }
        let first = rng.random_range(0..m);
        let mut second = rng.random_range(0..m - 1);
        if second >= first {
            second += 1;
        }
        let flip = rng.random_bool(0.5);
        self.proposal_at(first, second, flip)
    }

    fn common(&self, x: u32, y: u32) -> u64 {
        sorted_intersection_count(&self.adj[x as usize], &self.adj[y as usize]) as u64
    }

    fn remove(&mut self, x: u32, y: u32) -> u64 {
        let lost = self.common(x, y);
        for (p, q) in [(x, y), (y, x)] {
            let list = &mut self.adj[p as usize];
            let pos = list.binary_search(&q).expect("edge present");
            list.remove(pos);
        }
        lost
    }

    fn insert(&mut self, x: u32, y: u32) -> u64 {
        for (p, q) in [(x, y), (y, x)] {
            let list = &mut self.adj[p as usize];
            let pos = list.binary_search(&q).expect_err("edge absent");
            list.insert(pos, q);
        }
        self.common(x, y)
    }

    /// Performs the swap and returns the exact change in triangle count,
    /// computed from the four touched edges only.
    pub fn apply(&mut self, p: &SwapProposal) -> i64 {
        let mut delta = -(self.remove(p.a, p.b) as i64);
        delta -= self.remove(p.c, p.e) as i64;
        delta += self.insert(p.a, p.e) as i64;
        delta += self.insert(p.c, p.b) as i64;
        self.edges[p.first] = (p.a.min(p.e), p.a.max(p.e));
        self.edges[p.second] = (p.c.min(p.b), p.c.max(p.b));
        self.triangles = (self.triangles as i64 + delta) as u64;
        delta
    }

    /// Undoes [`SwapGraph::apply`].
    pub fn revert(&mut self, p: &SwapProposal) {
        let mut delta = -(self.remove(p.a, p.e) as i64);
        delta -= self.remove(p.c, p.b) as i64;
        delta += self.insert(p.a, p.b) as i64;
        delta += self.insert(p.c, p.e) as i64;
        self.edges[p.first] = (p.a.min(p.b), p.a.max(p.b));
        self.edges[p.second] = (p.c.min(p.e), p.c.max(p.e));
        self.triangles = (self.triangles as i64 + delta) as u64;
    }
}

/// Spec-level alias: propose one double edge swap.
pub fn double_edge_swap(g: &SwapGraph, rng: &mut impl Rng) -> Option<SwapProposal> {
    g.propose_swap(rng)
}

/// Metropolis acceptance probability for a triangle change `delta`.
pub fn acceptance_probability(beta: f64, delta: i64) -> f64 {
    if delta >= 0 || beta == 0.0 {
        1.0
    } else {
        (beta * delta as f64).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// The swap would have broken simplicity.
    Invalid,
    Rejected {
        delta: i64,
    },
    Accepted {
        delta: i64,
    },
}

/// One Metropolis step targeting weight `exp(beta * T)`, additionally
/// rejecting any move that takes `T` below `floor`.
pub fn metropolis_step(
    g: &mut SwapGraph,
    beta: f64,
    floor: u64,
    rng: &mut impl Rng,
) -> StepOutcome {
    let Some(p) = g.propose_swap(rng) else {
        return StepOutcome::Invalid;
    };
    let delta = g.apply(&p);
    let prob = acceptance_probability(beta, delta);
    let accept = g.triangles() >= floor && (prob >= 1.0 || rng.random::<f64>() < prob);
    if accept {
        StepOutcome::Accepted { delta }
    } else {
        g.revert(&p);
        StepOutcome::Rejected { delta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StartKind {
    /// Configuration-model sample (switch-randomized circulant if too dense).
    Random,
    /// Planted clique family, already inside the constraint set.
    Planted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n: usize,
    pub d: usize,
    #[serde(with = "rational::serde_rational")]
    pub c: Rational,
    /// `(beta, steps)` stages of the annealing phase.
    pub beta_schedule: Vec<(f64, u64)>,
    pub seed: u64,
    #[serde(default)]
    pub chain_id: u64,
    /// Hard cap on annealing steps before giving up.
    pub max_steps: u64,
    pub record_every: u64,
    /// Steps of the constrained walk at `beta = 0`.
    pub burn_in: u64,
    pub start: StartKind,
    /// How often the tracked triangle count is compared against a full recount.
    pub check_every: u64,
}

impl ChainConfig {
    /// Geometric ramp from 0 to `2 ln n` over ten stages of `100 n d` steps.
    pub fn default_schedule(n: usize, d: usize) -> Vec<(f64, u64)> {
        let beta_max = 2.0 * (n as f64).ln();
        let steps = (100 * n * d) as u64;
        (0..10)
            .map(|k| {
                let beta = if k == 0 {
                    0.0
                } else {
                    beta_max * 2f64.powi(k - 9)
                };
                (beta, steps)
            })
            .collect()
    }

    pub fn new(n: usize, d: usize, c: Rational, seed: u64) -> Self {
        let beta_schedule = Self::default_schedule(n, d);
        let total: u64 = beta_schedule.iter().map(|s| s.1).sum();
        Self {
            n,
            d,
            c,
            beta_schedule,
            seed,
            chain_id: 0,
            max_steps: 4 * total,
            record_every: (n * d) as u64,
            burn_in: (10 * n * d) as u64,
            start: StartKind::Random,
            check_every: 1_000,
        }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.beta_schedule.is_empty() {
            return Err(SamplerError::Config("beta schedule is empty".into()));
        }
        if self
            .beta_schedule
            .iter()
            .any(|&(b, s)| s == 0 || b.is_nan() || b < 0.0)
        {
            return Err(SamplerError::Config(
                "every stage needs a positive step count and a non-negative beta".into(),
            ));
        }
        if self.record_every == 0 || self.check_every == 0 {
            return Err(SamplerError::Config(
                "record/check intervals must be positive".into(),
            ));
        }
        if self.c > rational::int(1) || self.c < rational::int(0) {
            return Err(SamplerError::Config("c must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Anneal,
    Constrained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub phase: Phase,
    pub beta: f64,
    #[serde(rename = "T")]
    pub triangles: u64,
    /// Accepted fraction of proposals since the previous record.
    pub acceptance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub schema_version: u32,
    pub chain_id: u64,
    pub threshold: u64,
    pub records: Vec<TraceRecord>,
    pub proposals: u64,
    pub valid_proposals: u64,
    pub accepted: u64,
    /// Step at which `T >= threshold` first held.
    pub reached_at: Option<u64>,
    pub final_triangles: u64,
    pub delta_checks: u64,
    pub delta_mismatches: u64,
    /// Recorded states that failed regularity/simplicity validation.
    pub invalid_states: u64,
    pub empirical: bool,
}

impl ChainTrace {
    /// CSV with columns `step,phase,beta,T,acceptance`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,phase,beta,T,acceptance\n");
        for r in &self.records {
            let phase = match r.phase {
                Phase::Anneal => "anneal",
                Phase::Constrained => "constrained",
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.step, phase, r.beta, r.triangles, r.acceptance
            );
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("constraint T >= {} not reached within {} steps", .trace.threshold, .steps)]
    Timeout { steps: u64, trace: Box<ChainTrace> },
    #[error("invalid chain config: {0}")]
    Config(String),
    #[error(transparent)]
    Generate(#[from] GenerateError),
}

#[derive(Debug, Clone)]
pub struct ChainOutcome {
    pub graph: RegularGraph,
    pub trace: ChainTrace,
}

struct Recorder {
    trace: ChainTrace,
    window_proposals: u64,
    window_accepted: u64,
}

impl Recorder {
    fn step(&mut self, outcome: StepOutcome) {
        self.trace.proposals += 1;
        self.window_proposals += 1;
        match outcome {
            StepOutcome::Invalid => {}
            StepOutcome::Rejected { .. } => self.trace.valid_proposals += 1,
            StepOutcome::Accepted { .. } => {
                self.trace.valid_proposals += 1;
                self.trace.accepted += 1;
                self.window_accepted += 1;
            }
        }
    }

    fn record(&mut self, step: u64, phase: Phase, beta: f64, g: &SwapGraph) {
        let graph_ok = RegularGraph::from_edges(
            g.n(),
            g.d(),
            &g.edges()
                .iter()
                .map(|&(a, b)| (a as usize, b as usize))
                .collect::<Vec<_>>(),
        )
        .is_ok();
        if !graph_ok {
            self.trace.invalid_states += 1;
        }
        let acceptance = if self.window_proposals == 0 {
            0.0
        } else {
            self.window_accepted as f64 / self.window_proposals as f64
        };
        self.trace.records.push(TraceRecord {
            step,
            phase,
            beta,
            triangles: g.triangles(),
            acceptance,
        });
        self.window_proposals = 0;
        self.window_accepted = 0;
    }

    fn check(&mut self, g: &SwapGraph) {
        self.trace.delta_checks += 1;
        if count_triangles(&g.to_graph()) != g.triangles() {
            self.trace.delta_mismatches += 1;
        }
    }
}

/// Anneals until `T >= ⌈c · T_max⌉`, then walks at `beta = 0` inside the
/// constraint set for `burn_in` steps.
pub fn sample_conditioned(cfg: &ChainConfig) -> Result<ChainOutcome, SamplerError> {
    cfg.validate()?;
    let mut rng = rng_for(cfg.seed, 1_000 + cfg.chain_id);
    let start = match cfg.start {
        StartKind::Random => generators::random_regular_with(cfg.n, cfg.d, 1_000, &mut rng)?,
        StartKind::Planted => {
            let spec = PlantedSpec::for_fraction(cfg.n, cfg.d, &cfg.c, BlockKind::Clique)?;
            generators::plant(&spec, rng.random())?
        }
    };
    let threshold = triangle_threshold(cfg.n, cfg.d, &cfg.c);
    let mut g = SwapGraph::from_graph(&start);
    let mut rec = Recorder {
        trace: ChainTrace {
            schema_version: SCHEMA_VERSION,
            chain_id: cfg.chain_id,
            threshold,
            records: Vec::new(),
            proposals: 0,
            valid_proposals: 0,
            accepted: 0,
            reached_at: None,
            final_triangles: 0,
            delta_checks: 0,
            delta_mismatches: 0,
            invalid_states: 0,
            empirical: true,
        },
        window_proposals: 0,
        window_accepted: 0,
    };

    let mut step = 0u64;
    rec.record(step, Phase::Anneal, cfg.beta_schedule[0].0, &g);
    let last_beta = cfg.beta_schedule.last().expect("non-empty").0;
    let stages = cfg
        .beta_schedule
        .iter()
        .flat_map(|&(beta, steps)| std::iter::repeat_n(beta, steps as usize))
        .chain(std::iter::repeat(last_beta));
    for beta in stages {
        if g.triangles() >= threshold {
            break;
        }
        if step >= cfg.max_steps {
            rec.trace.final_triangles = g.triangles();
            return Err(SamplerError::Timeout {
                steps: step,
                trace: Box::new(rec.trace),
            });
        }
        step += 1;
        let outcome = metropolis_step(&mut g, beta, 0, &mut rng);
        rec.step(outcome);
        if step.is_multiple_of(cfg.check_every) {
            rec.check(&g);
        }
        if step.is_multiple_of(cfg.record_every) {
            rec.record(step, Phase::Anneal, beta, &g);
        }
    }
    rec.trace.reached_at = Some(step);
    rec.record(step, Phase::Anneal, 0.0, &g);

    for _ in 0..cfg.burn_in {
        step += 1;
        let outcome = metropolis_step(&mut g, 0.0, threshold, &mut rng);
        rec.step(outcome);
        if step.is_multiple_of(cfg.check_every) {
            rec.check(&g);
        }
        if step.is_multiple_of(cfg.record_every) {
            rec.record(step, Phase::Constrained, 0.0, &g);
        }
    }
    rec.check(&g);
    rec.record(step, Phase::Constrained, 0.0, &g);
    rec.trace.final_triangles = g.triangles();
    Ok(ChainOutcome {
        graph: g.to_graph(),
        trace: rec.trace,
    })
}

/// Runs at fixed `beta` (no constraint) from `start`, returning the triangle
/// count every `thin` steps after `burn_in` steps.
pub fn triangle_samples(
    start: &RegularGraph,
    beta: f64,
    burn_in: u64,
    thin: u64,
    samples: usize,
    seed: u64,
    chain_id: u64,
) -> Vec<u64> {
    let mut rng = rng_for(seed, 1_000 + chain_id);
    let mut g = SwapGraph::from_graph(start);
    for _ in 0..burn_in {
        metropolis_step(&mut g, beta, 0, &mut rng);
    }
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        for _ in 0..thin {
            metropolis_step(&mut g, beta, 0, &mut rng);
        }
        out.push(g.triangles());
    }
    out
}

/// Standard error of the mean of `values` from `batches` non-overlapping batch means.
pub fn batch_means_stderr(values: &[f64], batches: usize) -> f64 {
    let size = values.len() / batches;
    assert!(size > 0, "need at least one value per batch");
    let means: Vec<f64> = values
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    (var / means.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cycle, two_triangles};
    use crate::rational::ratio;

    #[test]
    fn swap_on_six_cycle() {
        let g = SwapGraph::from_graph(&cycle(6));
        // edges in lexicographic order: (0,1),(0,5),(1,2),(2,3),(3,4),(4,5)
        let p = g
            .proposal_at(0, 4, false)
            .expect("(0,1),(3,4) -> (0,4),(3,1)");
        assert_eq!((p.a, p.e, p.c, p.b), (0, 4, 3, 1));
        // (0,1) and (1,2) share node 1.
        assert!(g.proposal_at(0, 2, false).is_none());
        assert!(g.proposal_at(0, 2, true).is_none());
        // (0,1),(2,3) flipped -> (0,2),(3,1): valid; unflipped -> (0,3),(2,1): (1,2) exists.
        assert!(g.proposal_at(0, 3, true).is_some());
        assert!(g.proposal_at(0, 3, false).is_none());
    }

    #[test]
    fn accepted_swaps_keep_degrees_and_track_triangles() {
        let mut rng = rng_for(5, 0);
        let start = generators::sample_configuration_model(30, 4, 3, 10_000).unwrap();
        let mut g = SwapGraph::from_graph(&start);
        for _ in 0..1_000 {
            let before = count_triangles(&g.to_graph()) as i64;
            if let Some(p) = g.propose_swap(&mut rng) {
                let delta = g.apply(&p);
                let after = count_triangles(&g.to_graph()) as i64;
                assert_eq!(after - before, delta);
                if rng.random_bool(0.3) {
                    g.revert(&p);
                    assert_eq!(count_triangles(&g.to_graph()) as i64, before);
                }
            }
            assert_eq!(count_triangles(&g.to_graph()), g.triangles());
        }
    }

    #[test]
    fn acceptance_limits() {
        assert_eq!(acceptance_probability(0.0, -5), 1.0);
        assert_eq!(acceptance_probability(f64::INFINITY, -1), 0.0);
        assert_eq!(acceptance_probability(3.0, 2), 1.0);
        assert!((acceptance_probability(1.0, -1) - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn vacuous_constraint_returns_after_burn_in() {
        let mut cfg = ChainConfig::new(12, 3, ratio(0, 1), 4);
        cfg.burn_in = 50;
        let out = sample_conditioned(&cfg).unwrap();
        assert_eq!(out.trace.reached_at, Some(0));
        assert_eq!(out.trace.proposals, 50);
    }

    #[test]
    fn reaches_modest_threshold() {
        let cfg = ChainConfig::new(12, 3, ratio(1, 4), 17);
        let out = sample_conditioned(&cfg).unwrap();
        assert!(count_triangles(&out.graph) >= 3);
        assert_eq!(out.trace.delta_mismatches, 0);
        assert_eq!(out.trace.invalid_states, 0);
        assert!(out
            .trace
            .records
            .iter()
            .filter(|r| r.phase == Phase::Constrained)
            .all(|r| r.triangles >= 3));
    }

    #[test]
    fn reaches_two_disjoint_k4() {
        let cfg = ChainConfig::new(8, 3, ratio(1, 1), 2);
        let out = sample_conditioned(&cfg).unwrap();
        assert_eq!(count_triangles(&out.graph), 8);
    }

    #[test]
    fn timeout_carries_trace() {
        let mut cfg = ChainConfig::new(8, 3, ratio(1, 1), 2);
        cfg.beta_schedule = vec![(0.0, 1)];
        cfg.max_steps = 0;
        cfg.start = StartKind::Random;
        match sample_conditioned(&cfg) {
            Err(SamplerError::Timeout { trace, .. }) => assert_eq!(trace.threshold, 8),
            Ok(out) => assert_eq!(count_triangles(&out.graph), 8),
            Err(other) => panic!("unexpected {other}"),
        }
        assert!(sample_conditioned(&ChainConfig {
            beta_schedule: vec![],
            ..ChainConfig::new(8, 3, ratio(1, 1), 2)
        })
        .is_err());
    }

    #[test]
    fn trace_csv_header() {
        let cfg = ChainConfig::new(6, 2, ratio(0, 1), 1);
        let out = sample_conditioned(&cfg).unwrap();
        assert!(out
            .trace
            .to_csv()
            .starts_with("step,phase,beta,T,acceptance\n"));
        let samples = triangle_samples(&two_triangles(), 0.0, 10, 5, 20, 1, 0);
        assert_eq!(samples.len(), 20);
        assert!(samples.iter().all(|&t| t == 0 || t == 2));
    }
}
