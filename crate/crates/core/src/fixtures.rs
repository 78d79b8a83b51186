//! Small named regular graphs used throughout the tests and the CLI examples.

use crate::graph::RegularGraph;

/// `K_{size}` on nodes `0..size`.
pub fn complete(size: usize) -> RegularGraph {
    let edges: Vec<(usize, usize)> = (0..size)
        .flat_map(|u| (u + 1..size).map(move |v| (u, v)))
        .collect();
    RegularGraph::from_edges(size, size - 1, &edges).expect("complete graph is regular")
}

/// `copies` disjoint copies of `K_{size}`, block `i` on nodes `i*size..(i+1)*size`.
pub fn disjoint_cliques(copies: usize, size: usize) -> RegularGraph {
    let edges: Vec<(usize, usize)> = (0..copies)
        .flat_map(|b| {
            let base = b * size;
            (0..size).flat_map(move |u| (u + 1..size).map(move |v| (base + u, base + v)))
        })
        .collect();
    RegularGraph::from_edges(copies * size, size - 1, &edges).expect("disjoint cliques")
}

pub fn cycle(n: usize) -> RegularGraph {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    RegularGraph::from_edges(n, 2, &edges).expect("cycle is 2-regular")
}

/// Two disjoint triangles `{0,1,2}` and `{3,4,5}`.
pub fn two_triangles() -> RegularGraph {
    disjoint_cliques(2, 3)
}

/// Triangular prism: triangles `{0,1,2}`, `{3,4,5}` joined by the matching `i ~ i+3`.
pub fn prism() -> RegularGraph {
    RegularGraph::from_edges(
        6,
        3,
        &[
            (0, 1),
            (1, 2),
            (0, 2),
            (3, 4),
            (4, 5),
            (3, 5),
            (0, 3),
            (1, 4),
            (2, 5),
        ],
    )
    .expect("prism is 3-regular")
}

pub fn petersen() -> RegularGraph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    RegularGraph::from_edges(10, 3, &edges).expect("Petersen graph is 3-regular")
}

/// `K_{d+2}` minus the perfect matching `{2t, 2t+1}`; requires even `d`.
pub fn matched_complement(d: usize) -> RegularGraph {
    assert!(
        d.is_multiple_of(2),
        "K_(d+2) minus a perfect matching needs d even"
    );
    let size = d + 2;
    let edges: Vec<(usize, usize)> = (0..size)
        .flat_map(|u| (u + 1..size).map(move |v| (u, v)))
        .filter(|&(u, v)| !(u % 2 == 0 && v == u + 1))
        .collect();
    RegularGraph::from_edges(size, d, &edges).expect("matched complement is d-regular")
}
