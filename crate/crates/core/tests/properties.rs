use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regtri::census::{count_k_cliques, count_triangles, edge_triangle_table};
use regtri::enumerate::count_regular_graphs;
use regtri::generators::{plant, sample_configuration_model, BlockKind, PlantedSpec};
use regtri::rational::{int, ratio};
use regtri::reveal::{
    encode_phi, expected_phi_exact, phi_weight_fast, weight_distribution_exact, ProfileDump,
    RevealProfile,
};
use regtri::sampler::SwapGraph;
use regtri::structure::find_d_plus_1_cliques;
use regtri::{PortLabeledGraph, RegularGraph};

fn graph_params(max_n: usize) -> impl Strategy<Value = (usize, usize, u64, bool)> {
    (2usize..=4, 0usize..max_n, any::<u64>(), any::<bool>()).prop_map(
        move |(d, extra, seed, planted)| {
            let mut n = d + 1 + extra % (max_n - d);
            if n * d % 2 == 1 {
                n += 1;
            }
            (n, d, seed, planted)
        },
    )
}

fn build((n, d, seed, planted): (usize, usize, u64, bool)) -> RegularGraph {
    let spec = PlantedSpec::for_fraction(n, d, &ratio(1, 2), BlockKind::Clique).ok();
    match spec.filter(|_| planted) {
        Some(spec) => plant(&spec, seed).unwrap(),
        None => sample_configuration_model(n, d, seed, 100_000).unwrap(),
    }
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = RegularGraph> {
    graph_params(max_n).prop_map(build)
}

fn shuffled(len: usize, seed: u64) -> Vec<usize> {
    let mut sigma: Vec<usize> = (0..len).collect();
    sigma.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    sigma
}

fn random_ports(g: RegularGraph, seed: u64) -> PortLabeledGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<Vec<u32>> = (0..g.n())
        .map(|_| {
            let mut l: Vec<u32> = (1..=g.d() as u32).collect();
            l.shuffle(&mut rng);
            l
        })
        .collect();
    PortLabeledGraph::new(g, &labels).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relabel_preserves_census(g in arb_graph(24), seed in any::<u64>()) {
        let h = g.relabel(&shuffled(g.n(), seed)).unwrap();
        for v in 0..h.n() {
            prop_assert_eq!(h.neighbors(v).len(), g.d());
        }
        prop_assert_eq!(count_triangles(&h), count_triangles(&g));
        for k in 3..=g.d() + 1 {
            prop_assert_eq!(count_k_cliques(&h, k).unwrap(), count_k_cliques(&g, k).unwrap());
        }
    }

    #[test]
    fn edge_incidence_sums_to_three_t(g in arb_graph(30)) {
        let table = edge_triangle_table(&g);
        let sum: u64 = table.counts().iter().map(|&t| u64::from(t)).sum();
        prop_assert_eq!(sum, 3 * count_triangles(&g));
        prop_assert!(table.counts().iter().all(|&t| (t as usize) < g.d()));
    }

    #[test]
    fn profile_weight_is_label_free(g in arb_graph(30), seed in any::<u64>()) {
        let fast = phi_weight_fast(&g);
        let gs = random_ports(g, seed);
        let profile = encode_phi(&gs);
        prop_assert_eq!(profile.len(), gs.graph().edge_count());
        prop_assert_eq!(profile.weight(), fast);
        prop_assert!(fast as u64 <= count_triangles(gs.graph()));
    }

    #[test]
    fn rle_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
        let p = RevealProfile::from_bits(bits.clone());
        let back = RevealProfile::from_rle(&p.to_rle()).unwrap();
        prop_assert_eq!(back.bits(), &bits[..]);
        let dump = p.dump();
        let json = serde_json::to_string(&dump).unwrap();
        let parsed: ProfileDump = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(RevealProfile::try_from(&parsed).unwrap(), p);
    }

    #[test]
    fn edge_list_round_trip(g in arb_graph(30)) {
        let back = RegularGraph::parse_edge_list(&g.to_edge_list()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn swaps_keep_the_graph_regular(g in arb_graph(20), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = SwapGraph::from_graph(&g);
        for _ in 0..50 {
            if let Some(p) = s.propose_swap(&mut rng) {
                let before = s.triangles();
                let delta = s.apply(&p);
                let h = s.to_graph();
                prop_assert_eq!(count_triangles(&h), s.triangles());
                prop_assert_eq!(s.triangles() as i64, before as i64 + delta);
                if delta < 0 {
                    s.revert(&p);
                    prop_assert_eq!(s.triangles(), before);
                }
            }
        }
    }

    #[test]
    fn cliques_are_disjoint(g in arb_graph(30)) {
        let cliques = find_d_plus_1_cliques(&g);
        let mut seen = vec![false; g.n()];
        for c in &cliques {
            prop_assert_eq!(c.len(), g.d() + 1);
            for &v in c {
                prop_assert!(!seen[v]);
                seen[v] = true;
            }
        }
        prop_assert_eq!(cliques.len() as u64, count_k_cliques(&g, g.d() + 1).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn permutation_mean_is_exact(g in arb_graph(7)) {
        let hist = weight_distribution_exact(&g, 9).unwrap();
        let total: u64 = hist.iter().sum();
        let weighted: u64 = hist.iter().enumerate().map(|(w, &c)| w as u64 * c).sum();
        prop_assert_eq!(total, (1..=g.n() as u64).product::<u64>());
        prop_assert_eq!(ratio(weighted as i64, total as i64), expected_phi_exact(&g));
    }
}

#[test]
fn small_counts() {
    assert_eq!(count_regular_graphs(6, 2).unwrap(), 70);
    assert_eq!(count_regular_graphs(6, 3).unwrap(), 70);
    assert_eq!(expected_phi_exact(&regtri::fixtures::complete(4)), int(3));
}
