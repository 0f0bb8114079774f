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

//! Undirected simple graphs and the measurements used by the protocols and
//! the evaluation: BFS distances, components, average path length,
//! clustering coefficient, egocentric betweenness and closeness.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

/// Node identifiers are dense indices `0..node_count`.
pub type NodeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {node} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { node: NodeId, node_count: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("edge list line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Undirected graph without self-loops or parallel edges.
///
/// Adjacency lists are kept sorted so iteration order (and everything
/// derived from it) is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl Graph {
    pub fn new(node_count: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); node_count],
            edge_count: 0,
        }
    }

    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut graph = Graph::new(node_count);
        for (u, v) in edges {
            graph.add_edge(u, v)?;
        }
        Ok(graph)
    }

    /// Inserts `u -- v`. Returns `Ok(false)` when the edge was already present.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<bool, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        match self.adjacency[u].binary_search(&v) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.adjacency[u].insert(pos, v);
                let pos = self.adjacency[v].binary_search(&u).unwrap_err();
                self.adjacency[v].insert(pos, u);
                self.edge_count += 1;
                Ok(true)
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.node_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Subgraph induced by `nodes`. Returns the subgraph together with the
    /// mapping from local index to original id (in the order given).
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> (Graph, Vec<NodeId>) {
        let local: BTreeMap<NodeId, usize> =
            nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut sub = Graph::new(nodes.len());
        for (i, &v) in nodes.iter().enumerate() {
            for w in self.neighbors(v) {
                if let Some(&j) = local.get(w) {
                    if i < j {
                        sub.add_edge(i, j).expect("local indices are in range");
                    }
                }
            }
        }
        (sub, nodes.to_vec())
    }

    pub(crate) fn check(&self, v: NodeId) -> Result<(), GraphError> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange {
                node: v,
                node_count: self.node_count(),
            })
        }
    }

    /// Plain-text edge list: a `nodes N` header followed by one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("nodes {}\n", self.node_count());
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }

    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines.next().ok_or(GraphError::Parse {
            line: 0,
            message: "missing `nodes N` header".into(),
        })?;
        let node_count = header
            .strip_prefix("nodes")
            .and_then(|rest| rest.trim().parse::<usize>().ok())
            .ok_or_else(|| GraphError::Parse {
                line,
                message: format!("expected `nodes N`, found `{header}`"),
            })?;
        let mut graph = Graph::new(node_count);
        for (line, text) in lines {
            let mut parts = text.split_whitespace().map(str::parse::<NodeId>);
            let (u, v) = match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => (u, v),
                _ => {
                    return Err(GraphError::Parse {
                        line,
                        message: format!("expected `u v`, found `{text}`"),
                    })
                }
            };
            graph.add_edge(u, v).map_err(|e| GraphError::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(graph)
    }
}

/// Breadth-first hop distances from `source`. Unreachable nodes are absent.
pub fn shortest_path_lengths(
    g: &Graph,
    source: NodeId,
) -> Result<BTreeMap<NodeId, usize>, GraphError> {
    g.check(source)?;
    Ok(bfs_distances(g, source)
        .into_iter()
        .enumerate()
        .filter_map(|(v, d)| d.map(|d| (v, d)))
        .collect())
}

pub(crate) fn bfs_distances(g: &Graph, source: NodeId) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = dist[u].unwrap() + 1;
        for &w in g.neighbors(u) {
            if dist[w].is_none() {
                dist[w] = Some(next);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Connected components, each sorted ascending, ordered by smallest member.
pub fn connected_components(g: &Graph) -> Vec<Vec<NodeId>> {
    let mut seen = vec![false; g.node_count()];
    let mut components = Vec::new();
    for start in 0..g.node_count() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut members = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

pub fn component_count(g: &Graph) -> usize {
    connected_components(g).len()
}

/// Mean hop distance over unordered pairs that lie in the same component.
/// A graph with no connected pair has APL 0.
pub fn average_path_length(g: &Graph) -> f64 {
    let mut total: u64 = 0;
    let mut pairs: u64 = 0;
    for s in 0..g.node_count() {
        for d in bfs_distances(g, s).into_iter().skip(s + 1).flatten() {
            total += d as u64;
            pairs += 1;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        total as f64 / pairs as f64
    }
}

/// Local clustering coefficient; nodes of degree < 2 have coefficient 0.
pub fn local_clustering(g: &Graph, v: NodeId) -> f64 {
    let adj = g.neighbors(v);
    let k = adj.len();
    if k < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for (i, &a) in adj.iter().enumerate() {
        for &b in &adj[i + 1..] {
            if g.has_edge(a, b) {
                links += 1;
            }
        }
    }
    links as f64 / (k * (k - 1) / 2) as f64
}

/// Average local clustering over all nodes (degree < 2 counts as 0).
pub fn clustering_coefficient(g: &Graph) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    (0..n).map(|v| local_clustering(g, v)).sum::<f64>() / n as f64
}

/// Betweenness of `v` inside its ego network (v, its neighbors and the
/// edges among them).
///
/// Every non-adjacent pair of neighbors is at distance two in the ego
/// network, and its geodesics run through exactly the common neighbors
/// that are themselves in the ego network: `v` plus any neighbor of `v`
/// adjacent to both. `v` receives `1 / (number of such intermediaries)`.
pub fn egocentric_betweenness(g: &Graph, v: NodeId) -> Result<f64, GraphError> {
    g.check(v)?;
    let adj = g.neighbors(v);
    let mut score = 0.0;
    for (i, &a) in adj.iter().enumerate() {
        for &b in &adj[i + 1..] {
            if g.has_edge(a, b) {
                continue;
            }
            let shared = adj
                .iter()
                .filter(|&&c| g.has_edge(a, c) && g.has_edge(b, c))
                .count();
            score += 1.0 / (1 + shared) as f64;
        }
    }
    Ok(score)
}

/// Reachable-node count divided by the sum of hop distances to them.
/// An isolated node scores 0.
pub fn closeness_centrality(g: &Graph, v: NodeId) -> Result<f64, GraphError> {
    g.check(v)?;
    let (reached, total) = bfs_distances(g, v)
        .into_iter()
        .flatten()
        .filter(|&d| d > 0)
        .fold((0usize, 0usize), |(n, s), d| (n + 1, s + d));
    Ok(if total == 0 {
        0.0
    } else {
        reached as f64 / total as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn complete(n: usize) -> Graph {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v).unwrap();
            }
        }
        g
    }

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l))).unwrap()
    }

    #[test]
    fn rejects_self_loops_and_dedups() {
        let mut g = Graph::new(3);
        assert_eq!(g.add_edge(1, 1), Err(GraphError::SelfLoop(1)));
        assert_eq!(g.add_edge(0, 2), Ok(true));
        assert_eq!(g.add_edge(2, 0), Ok(false));
        assert_eq!(g.edge_count(), 1);
        assert!(g.add_edge(0, 3).is_err());
    }

    #[test]
    fn bfs_on_path() {
        let d = shortest_path_lengths(&path3(), 0).unwrap();
        assert_eq!(d, BTreeMap::from([(0, 0), (1, 1), (2, 2)]));
    }

    #[test]
    fn bfs_omits_unreachable() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let d = shortest_path_lengths(&g, 0).unwrap();
        assert_eq!(d, BTreeMap::from([(0, 0), (1, 1)]));
        assert!(shortest_path_lengths(&g, 4).is_err());
    }

    #[test]
    fn components_simple() {
        assert_eq!(connected_components(&Graph::new(3)).len(), 3);
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(connected_components(&g), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn apl_examples() {
        assert!((average_path_length(&path3()) - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(average_path_length(&complete(4)), 1.0);
        assert_eq!(average_path_length(&Graph::new(5)), 0.0);
    }

    #[test]
    fn cc_examples() {
        assert_eq!(clustering_coefficient(&complete(3)), 1.0);
        assert_eq!(clustering_coefficient(&star(3)), 0.0);
    }

    #[test]
    fn ego_betweenness_examples() {
        assert_eq!(egocentric_betweenness(&star(4), 0).unwrap(), 6.0);
        for v in 0..3 {
            assert_eq!(egocentric_betweenness(&complete(3), v).unwrap(), 0.0);
        }
        assert_eq!(egocentric_betweenness(&star(4), 1).unwrap(), 0.0);
        // 4-cycle plus center: leaf pairs across the cycle share one extra neighbor.
        let wheel = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (2, 3), (3, 4), (4, 1)])
            .unwrap();
        assert!((egocentric_betweenness(&wheel, 0).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(egocentric_betweenness(&wheel, 9).is_err());
    }

    #[test]
    fn closeness_examples() {
        assert_eq!(closeness_centrality(&path3(), 1).unwrap(), 1.0);
        assert_eq!(closeness_centrality(&Graph::new(2), 0).unwrap(), 0.0);
    }

    #[test]
    fn edge_list_format() {
        let g = Graph::from_edges(4, [(2, 1), (0, 3)]).unwrap();
        let text = g.to_edge_list();
        assert_eq!(text, "nodes 4\n0 3\n1 2\n");
        assert_eq!(Graph::parse_edge_list(&text).unwrap(), g);
        assert!(Graph::parse_edge_list("nodes 2\n0 5\n").is_err());
        assert!(Graph::parse_edge_list("0 1\n").is_err());
    }
}
