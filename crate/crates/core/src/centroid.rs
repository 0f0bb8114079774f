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

//! Centroid election inside each region.
//!
//! Members draw random virtual coordinates in the unit square and repeatedly
//! replace theirs by the mean over their closed same-region neighborhood
//! until the region agrees. Nodes whose initial coordinate lies within ε of
//! the agreed point are candidates; the one with the largest
//! `degree + egocentric betweenness` becomes the centroid, and the region's
//! gradient is rebuilt from it.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use thiserror::Error;

use crate::graph::{egocentric_betweenness, Graph, NodeId};
use crate::regions::RegionOutcome;
use crate::topology::Point;

/// Upper bound on averaging rounds within a single region.
pub const MAX_AVERAGING_ROUNDS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualCoordinate {
    pub initial: Point,
    pub current: Point,
}

pub fn assign_virtual_coordinates<R: Rng + ?Sized>(
    region: &[NodeId],
    rng: &mut R,
) -> Vec<VirtualCoordinate> {
    region
        .iter()
        .map(|_| {
            let p = Point::new(rng.random::<f64>(), rng.random::<f64>());
            VirtualCoordinate {
                initial: p,
                current: p,
            }
        })
        .collect()
}

/// One synchronous round of closed-neighborhood averaging over the region
/// subgraph (local indices).
pub fn averaging_round(region_graph: &Graph, coords: &[Point]) -> Vec<Point> {
    (0..region_graph.node_count())
        .map(|v| {
            let nbrs = region_graph.neighbors(v);
            let (sx, sy) = nbrs
                .iter()
                .map(|&w| coords[w])
                .fold((coords[v].x, coords[v].y), |(sx, sy), p| (sx + p.x, sy + p.y));
            let k = (nbrs.len() + 1) as f64;
            Point::new(sx / k, sy / k)
        })
        .collect()
}

/// True when every pair of coordinates is closer than `delta`.
pub fn detect_convergence(coords: &[Point], delta: f64) -> bool {
    if coords.len() < 2 {
        return true;
    }
    let (mut min_x, mut max_x, mut min_y, mut max_y) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in coords {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let (w, h) = (max_x - min_x, max_y - min_y);
    if w.max(h) >= delta {
        return false;
    }
    if w.hypot(h) < delta {
        return true;
    }
    coords
        .iter()
        .enumerate()
        .all(|(i, p)| coords[i + 1..].iter().all(|q| p.distance(*q) < delta))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragingOutcome {
    pub coords: Vec<Point>,
    /// Mean of the final iterates.
    pub consensus: Point,
    pub rounds: usize,
    pub converged: bool,
}

/// Averages until [`detect_convergence`] holds or `max_rounds` is spent.
pub fn run_averaging(
    region_graph: &Graph,
    initial: &[Point],
    delta: f64,
    max_rounds: usize,
) -> AveragingOutcome {
    let mut coords = initial.to_vec();
    let mut rounds = 0;
    let mut converged = detect_convergence(&coords, delta);
    while !converged && rounds < max_rounds {
        coords = averaging_round(region_graph, &coords);
        rounds += 1;
        converged = detect_convergence(&coords, delta);
    }
    let k = coords.len().max(1) as f64;
    let consensus = Point::new(
        coords.iter().map(|p| p.x).sum::<f64>() / k,
        coords.iter().map(|p| p.y).sum::<f64>() / k,
    );
    AveragingOutcome {
        coords,
        consensus,
        rounds,
        converged,
    }
}

/// Picks the region's centroid.
///
/// Candidates are members whose initial coordinate is within `epsilon` of
/// the consensus; if none qualifies, the single member closest to it. The
/// candidate with the largest `degree + egocentric betweenness` (on the full
/// topology) wins, lower id on ties.
pub fn elect_centroid(
    region: &[NodeId],
    initials: &[Point],
    consensus: Point,
    epsilon: f64,
    topology: &Graph,
) -> NodeId {
    assert!(!region.is_empty(), "empty region");
    let mut candidates: Vec<NodeId> = region
        .iter()
        .zip(initials)
        .filter(|(_, p)| p.distance(consensus) <= epsilon)
        .map(|(&v, _)| v)
        .collect();
    if candidates.is_empty() {
        let nearest = region
            .iter()
            .zip(initials)
            .min_by(|a, b| {
                a.1.distance(consensus)
                    .total_cmp(&b.1.distance(consensus))
                    .then(a.0.cmp(b.0))
            })
            .map(|(&v, _)| v)
            .unwrap();
        candidates.push(nearest);
    }
    let score = |v: NodeId| {
        topology.degree(v) as f64
            + egocentric_betweenness(topology, v).expect("region members are topology nodes")
    };
    candidates
        .into_iter()
        .map(|v| (v, score(v)))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(v, _)| v)
        .unwrap()
}

/// Hop distance from `centroid` to every member within the region's induced
/// subgraph, in `region` order. Members the centroid cannot reach get `None`.
pub fn rebuild_gradient_from_centroid(
    region: &[NodeId],
    centroid: NodeId,
    topology: &Graph,
) -> Vec<Option<u32>> {
    let (sub, ids) = topology.induced_subgraph(region);
    let start = ids.iter().position(|&v| v == centroid).expect("centroid is a member");
    let mut dist = vec![None; sub.node_count()];
    dist[start] = Some(0u32);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let next = dist[u].unwrap() + 1;
        for &w in sub.neighbors(u) {
            if dist[w].is_none() {
                dist[w] = Some(next);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Convex hull (counter-clockwise, no collinear points) by monotone chain.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point, a: Point, b: Point| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Whether `p` lies in the convex hull of `points`, boundary included.
/// `slack` absorbs floating-point rounding in the averaging iterates.
pub fn in_convex_hull(p: Point, points: &[Point], slack: f64) -> bool {
    let hull = convex_hull(points);
    match hull.len() {
        0 => false,
        1 => p.distance(hull[0]) <= slack,
        2 => {
            let (a, b) = (hull[0], hull[1]);
            let len = a.distance(b);
            let along = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / len;
            let off = ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)).abs() / len;
            off <= slack && along >= -slack && along <= len + slack
        }
        _ => hull.iter().zip(hull.iter().cycle().skip(1)).all(|(&a, &b)| {
            let len = a.distance(b);
            ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) / len >= -slack
        }),
    }
}

#[derive(Debug, Error)]
pub enum CentroidError {
    #[error("averaging in region {head} did not converge within {rounds} rounds")]
    NonConvergence { head: NodeId, rounds: usize },
    #[error("region {head} is not connected to its centroid {centroid}")]
    Disconnected { head: NodeId, centroid: NodeId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionCentroid {
    pub head: NodeId,
    pub centroid: NodeId,
    pub members: Vec<NodeId>,
    pub initials: Vec<Point>,
    pub consensus: Point,
    pub rounds: usize,
}

/// Per-node view after the centroid has been announced.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeAssignment {
    pub region_head: NodeId,
    pub centroid: NodeId,
    pub hop_count: u32,
    /// Centroids this node knows of, with the smallest hopcount heard.
    pub known_centroids: BTreeMap<NodeId, u32>,
}

#[derive(Debug, Clone)]
pub struct CentroidOutcome {
    pub regions: Vec<RegionCentroid>,
    pub nodes: Vec<NodeAssignment>,
    /// Nodes whose rebuilt hopcount exceeds the formation gradient.
    pub gradient_violations: usize,
}

impl CentroidOutcome {
    pub fn centroids(&self) -> Vec<NodeId> {
        self.regions.iter().map(|r| r.centroid).collect()
    }

    /// `region_head centroid_id consensus_x consensus_y rounds` per region.
    pub fn dump(&self) -> String {
        self.regions
            .iter()
            .map(|r| {
                format!(
                    "{} {} {} {} {}\n",
                    r.head, r.centroid, r.consensus.x, r.consensus.y, r.rounds
                )
            })
            .collect()
    }
}

/// Elects a centroid in every region and rewrites each node's head, hopcount
/// and known-heads table to refer to centroids.
pub fn run_centroid_phase<R: Rng + ?Sized>(
    topology: &Graph,
    formation: &RegionOutcome,
    gradient: u32,
    epsilon: f64,
    delta: f64,
    rng: &mut R,
) -> Result<CentroidOutcome, CentroidError> {
    let n = topology.node_count();
    let mut regions = Vec::new();
    let mut hop = vec![0u32; n];
    let mut centroid_of_head = BTreeMap::new();
    let mut gradient_violations = 0;
    for (head, members) in formation.regions() {
        let coords = assign_virtual_coordinates(&members, rng);
        let initials: Vec<Point> = coords.iter().map(|c| c.initial).collect();
        let (sub, _) = topology.induced_subgraph(&members);
        let avg = run_averaging(&sub, &initials, delta, MAX_AVERAGING_ROUNDS);
        if !avg.converged {
            return Err(CentroidError::NonConvergence {
                head,
                rounds: avg.rounds,
            });
        }
        let centroid = elect_centroid(&members, &initials, avg.consensus, epsilon, topology);
        for (&v, d) in members
            .iter()
            .zip(rebuild_gradient_from_centroid(&members, centroid, topology))
        {
            let d = d.ok_or(CentroidError::Disconnected { head, centroid })?;
            if d > gradient {
                gradient_violations += 1;
            }
            hop[v] = d;
        }
        centroid_of_head.insert(head, centroid);
        regions.push(RegionCentroid {
            head,
            centroid,
            members,
            initials,
            consensus: avg.consensus,
            rounds: avg.rounds,
        });
    }

    let nodes = formation
        .states
        .iter()
        .map(|s| {
            let own = centroid_of_head[&s.head_id];
            let mut known: BTreeMap<NodeId, u32> = BTreeMap::new();
            for (head, &h) in &s.known_heads {
                if let Some(&c) = centroid_of_head.get(head) {
                    known.entry(c).and_modify(|x| *x = (*x).min(h)).or_insert(h);
                }
            }
            // Centroid announcements overheard from neighbors in other regions.
            for &w in topology.neighbors(s.node) {
                let other = centroid_of_head[&formation.states[w].head_id];
                if other != own {
                    known
                        .entry(other)
                        .and_modify(|x| *x = (*x).min(hop[w]))
                        .or_insert(hop[w]);
                }
            }
            known.insert(own, hop[s.node]);
            NodeAssignment {
                region_head: s.head_id,
                centroid: own,
                hop_count: hop[s.node],
                known_centroids: known,
            }
        })
        .collect();

    Ok(CentroidOutcome {
        regions,
        nodes,
        gradient_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::{run_region_formation, TieBreak};
    use crate::rng::stream_rng;

    #[test]
    fn k2_meets_in_one_round() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let p = Point::new(0.2, 0.4);
        let q = Point::new(0.6, 0.0);
        let next = averaging_round(&g, &[p, q]);
        let mid = Point::new(0.4, 0.2);
        assert!(next.iter().all(|c| c.distance(mid) < 1e-15));
        assert!(detect_convergence(&next, 1e-6));
        assert_eq!(averaging_round(&g, &next), next);
    }

    #[test]
    fn single_node_unchanged() {
        let g = Graph::new(1);
        let p = [Point::new(0.3, 0.9)];
        assert_eq!(averaging_round(&g, &p), p.to_vec());
        let out = run_averaging(&g, &p, 1e-6, 10);
        assert_eq!((out.rounds, out.consensus), (0, p[0]));
    }

    #[test]
    fn convergence_test() {
        let same = vec![Point::new(0.5, 0.5); 4];
        assert!(detect_convergence(&same, 1e-12));
        let spread = [Point::new(0.0, 0.0), Point::new(0.0, 0.1)];
        assert!(!detect_convergence(&spread, 0.1));
        assert!(detect_convergence(&spread, 0.1000001));
        // bounding box diagonal above delta, but every pair is closer
        let tri = [Point::new(0.0, 0.0), Point::new(0.8, 0.0), Point::new(0.0, 0.8)];
        assert!(!detect_convergence(&tri, 1.0));
        let tri2 = [Point::new(0.0, 0.0), Point::new(0.6, 0.0), Point::new(0.0, 0.6)];
        assert!(detect_convergence(&tri2, 0.9));
    }

    #[test]
    fn coordinates_are_distinct_and_reproducible() {
        let region = [0, 1, 2, 3, 4];
        let a = assign_virtual_coordinates(&region, &mut stream_rng(4, 2));
        let b = assign_virtual_coordinates(&region, &mut stream_rng(4, 2));
        assert_eq!(a, b);
        for (i, c) in a.iter().enumerate() {
            assert_eq!(c.initial, c.current);
            assert!((0.0..1.0).contains(&c.initial.x) && (0.0..1.0).contains(&c.initial.y));
            assert!(a[i + 1..].iter().all(|d| d.initial != c.initial));
        }
    }

    #[test]
    fn election_by_degree_plus_betweenness() {
        // Node 0: degree 4, ego-betweenness 0 (K5 minus nothing around it).
        // Node 5: degree 2, ego-betweenness 1 (bridges 6 and 7).
        let mut g = Graph::new(8);
        for u in 0..5 {
            for v in u + 1..5 {
                g.add_edge(u, v).unwrap();
            }
        }
        g.add_edge(5, 6).unwrap();
        g.add_edge(5, 7).unwrap();
        assert_eq!(egocentric_betweenness(&g, 0).unwrap(), 0.0);
        assert_eq!(egocentric_betweenness(&g, 5).unwrap(), 1.0);
        let c = Point::new(0.5, 0.5);
        let region = [0, 5];
        let initials = [Point::new(0.51, 0.5), Point::new(0.5, 0.49)];
        assert_eq!(elect_centroid(&region, &initials, c, 0.05, &g), 0);
    }

    #[test]
    fn election_fallback_to_nearest() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let initials = [Point::new(0.1, 0.1), Point::new(0.9, 0.9), Point::new(0.45, 0.5)];
        let c = elect_centroid(&[0, 1, 2], &initials, Point::new(0.5, 0.5), 1e-9, &g);
        assert_eq!(c, 2);
        assert_eq!(elect_centroid(&[1], &[Point::new(0.0, 0.0)], Point::new(0.0, 0.0), 1e-9, &g), 1);
    }

    #[test]
    fn election_ties_go_to_lower_id() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let p = Point::new(0.5, 0.5);
        assert_eq!(elect_centroid(&[3, 1], &[p, p], p, 0.1, &g), 1);
    }

    #[test]
    fn rebuild_on_path() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let d = rebuild_gradient_from_centroid(&[0, 1, 2], 1, &g);
        assert_eq!(d, vec![Some(1), Some(0), Some(1)]);
        let d = rebuild_gradient_from_centroid(&[0, 1, 2], 0, &g);
        assert_eq!(d, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn rebuild_from_interior_can_exceed_gradient() {
        // A path region formed around one end reaches hop 4 from its far
        // member once re-rooted there.
        let g = Graph::from_edges(5, (1..5).map(|v| (v - 1, v))).unwrap();
        let d = rebuild_gradient_from_centroid(&[0, 1, 2, 3, 4], 4, &g);
        assert_eq!(d[0], Some(4));
    }

    #[test]
    fn hull_membership() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(0.5, 0.5),
        ];
        assert_eq!(convex_hull(&pts).len(), 4);
        assert!(in_convex_hull(Point::new(0.5, 0.5), &pts, 0.0));
        assert!(in_convex_hull(Point::new(1.0, 0.5), &pts, 0.0));
        assert!(!in_convex_hull(Point::new(1.01, 0.5), &pts, 0.0));
        let seg = [Point::new(0.0, 0.0), Point::new(2.0, 2.0)];
        assert!(in_convex_hull(Point::new(1.0, 1.0), &seg, 1e-12));
        assert!(!in_convex_hull(Point::new(1.0, 1.1), &seg, 1e-12));
    }

    #[test]
    fn phase_on_two_cliques() {
        let mut g = Graph::new(6);
        for (u, v) in [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)] {
            g.add_edge(u, v).unwrap();
        }
        let formation = run_region_formation(&g, 1, 3, TieBreak::LowestId, None).unwrap();
        let out = run_centroid_phase(&g, &formation, 1, 0.05, 1e-6, &mut stream_rng(3, 2)).unwrap();
        assert_eq!(out.regions.len(), formation.regions().len());
        for r in &out.regions {
            assert!(r.members.contains(&r.centroid));
            for &m in &r.members {
                assert_eq!(out.nodes[m].centroid, r.centroid);
                assert_eq!(out.nodes[m].known_centroids[&r.centroid], out.nodes[m].hop_count);
            }
        }
        assert!(out.dump().lines().count() == out.regions.len());
    }
}
