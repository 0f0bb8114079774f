// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use beamnet::graph::{
    average_path_length, closeness_centrality, clustering_coefficient, component_count,
    connected_components, egocentric_betweenness, shortest_path_lengths, Graph,
};
use beamnet::oracle;
use beamnet::rng::stream_rng;
use proptest::prelude::*;

fn graph_strategy(max_nodes: usize) -> impl Strategy<Value = Graph> {
    (1..=max_nodes).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut g = Graph::new(n);
            let mut k = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[k] {
                        g.add_edge(u, v).unwrap();
                    }
                    k += 1;
                }
            }
            g
        })
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

#[test]
fn measures_match_oracles_on_100_seeds() {
    for seed in 0..100u64 {
        let mut rng = stream_rng(seed, 7);
        let n = 1 + (seed as usize % 12);
        let g = oracle::random_graph(n, 0.1 + 0.8 * (seed % 10) as f64 / 10.0, &mut rng);
        assert!(close(average_path_length(&g), oracle::apl(&g)), "seed {seed}");
        assert!(close(clustering_coefficient(&g), oracle::clustering(&g)), "seed {seed}");
        assert_eq!(component_count(&g), oracle::union_find_components(&g), "seed {seed}");
        let fw = oracle::floyd_warshall(&g);
        for v in 0..n {
            let bfs = shortest_path_lengths(&g, v).unwrap();
            for (u, d) in fw[v].iter().enumerate() {
                assert_eq!(bfs.get(&u).copied(), *d, "seed {seed} {v}->{u}");
            }
            assert!(close(closeness_centrality(&g, v).unwrap(), oracle::closeness(&g, v)));
        }
    }
}

#[test]
fn ego_betweenness_matches_brandes_on_100_seeds() {
    for seed in 0..100u64 {
        let mut rng = stream_rng(seed, 8);
        let n = 1 + (seed as usize % 10);
        let g = oracle::random_graph(n, 0.5, &mut rng);
        for v in 0..n {
            let fast = egocentric_betweenness(&g, v).unwrap();
            assert!(close(fast, oracle::ego_betweenness(&g, v)), "seed {seed} node {v}");
        }
    }
}

#[test]
fn star_center_ego_betweenness_matches_full_betweenness() {
    let star = Graph::from_edges(5, (1..5).map(|l| (0, l))).unwrap();
    assert_eq!(egocentric_betweenness(&star, 0).unwrap(), 6.0);
    // The star is its own ego network.
    assert_eq!(oracle::brandes_betweenness(&star)[0], 6.0);
}

proptest! {
    #[test]
    fn adding_an_edge_never_lengthens_paths(g in graph_strategy(10), a in 0usize..10, b in 0usize..10) {
        let n = g.node_count();
        let (a, b) = (a % n, b % n);
        prop_assume!(a != b);
        let mut h = g.clone();
        h.add_edge(a, b).unwrap();
        for s in 0..n {
            let before = shortest_path_lengths(&g, s).unwrap();
            let after = shortest_path_lengths(&h, s).unwrap();
            for (v, d) in before {
                prop_assert!(after[&v] <= d);
            }
        }
        prop_assert!(component_count(&h) <= component_count(&g));
    }

    #[test]
    fn clustering_is_relabeling_invariant(g in graph_strategy(12), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let n = g.node_count();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut stream_rng(seed, 0));
        let h = Graph::from_edges(n, g.edges().map(|(u, v)| (perm[u], perm[v]))).unwrap();
        prop_assert!(close(clustering_coefficient(&g), clustering_coefficient(&h)));
        prop_assert!(close(average_path_length(&g), average_path_length(&h)));
    }

    #[test]
    fn components_partition_nodes(g in graph_strategy(12)) {
        let comps = connected_components(&g);
        let mut all: Vec<usize> = comps.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..g.node_count()).collect::<Vec<_>>());
        for (u, v) in g.edges() {
            prop_assert!(comps.iter().any(|c| c.contains(&u) && c.contains(&v)));
        }
    }

    #[test]
    fn edge_list_round_trip(g in graph_strategy(12)) {
        prop_assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
    }
}
