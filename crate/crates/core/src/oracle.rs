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

//! Brute-force reference implementations, deliberately sharing no code with
//! [`crate::graph`]. Used by the `validate` command and the test suites.

use std::collections::VecDeque;

use rand::Rng;

use crate::graph::{Graph, NodeId};

/// Erdős–Rényi `G(n, p)`.
pub fn random_graph<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}

fn adjacency_matrix(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut m = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        m[u][v] = true;
        m[v][u] = true;
    }
    m
}

/// All-pairs hop distances; `None` when unreachable.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<usize>>> {
    let n = g.node_count();
    let adj = adjacency_matrix(g);
    let mut d = vec![vec![None; n]; n];
    for i in 0..n {
        d[i][i] = Some(0);
        for j in 0..n {
            if adj[i][j] {
                d[i][j] = Some(1);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

pub fn union_find_components(g: &Graph) -> usize {
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut count = n;
    for (u, v) in g.edges() {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            count -= 1;
        }
    }
    count
}

pub fn apl(g: &Graph) -> f64 {
    let d = floyd_warshall(g);
    let n = g.node_count();
    let (mut sum, mut pairs) = (0usize, 0usize);
    for i in 0..n {
        for j in i + 1..n {
            if let Some(x) = d[i][j] {
                sum += x;
                pairs += 1;
            }
        }
    }
    if pairs == 0 {
        0.0
    } else {
        sum as f64 / pairs as f64
    }
}

/// Mean over nodes of `2 · triangles(v) / (k (k − 1))`, 0 for `k < 2`.
pub fn clustering(g: &Graph) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    let adj = adjacency_matrix(g);
    let mut total = 0.0;
    for v in 0..n {
        let k = (0..n).filter(|&u| adj[v][u]).count();
        if k < 2 {
            continue;
        }
        let mut triangles = 0;
        for a in 0..n {
            for b in a + 1..n {
                if adj[v][a] && adj[v][b] && adj[a][b] {
                    triangles += 1;
                }
            }
        }
        total += 2.0 * triangles as f64 / (k * (k - 1)) as f64;
    }
    total / n as f64
}

/// Brandes betweenness of every node (undirected, unnormalized).
pub fn brandes_betweenness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut cb = vec![0.0; n];
    for s in 0..n {
        let mut stack = Vec::new();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in g.neighbors(v) {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0; n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    cb.iter().map(|x| x / 2.0).collect()
}

/// Betweenness of `v` computed by Brandes on its extracted ego subgraph.
pub fn ego_betweenness(g: &Graph, v: NodeId) -> f64 {
    let mut members = vec![v];
    members.extend_from_slice(g.neighbors(v));
    let (ego, _) = g.induced_subgraph(&members);
    brandes_betweenness(&ego)[0]
}

pub fn closeness(g: &Graph, v: NodeId) -> f64 {
    let row = &floyd_warshall(g)[v];
    let reach: Vec<usize> = row.iter().flatten().copied().filter(|&d| d > 0).collect();
    let sum: usize = reach.iter().sum();
    if sum == 0 {
        0.0
    } else {
        reach.len() as f64 / sum as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracles_on_fixtures() {
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!((apl(&path) - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(closeness(&path, 1), 1.0);
        assert_eq!(union_find_components(&Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap()), 2);
        let star = Graph::from_edges(5, (1..5).map(|l| (0, l))).unwrap();
        assert_eq!(ego_betweenness(&star, 0), 6.0);
        assert_eq!(brandes_betweenness(&star)[0], 6.0);
        assert_eq!(clustering(&star), 0.0);
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(clustering(&tri), 1.0);
    }
}
