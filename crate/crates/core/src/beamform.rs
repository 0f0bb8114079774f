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

//! Flocking-style beamforming on top of the centroid-rooted regions.
//!
//! * Alignment: nodes at a local maximum of their region's hop gradient are
//!   peripheral and may beamform.
//! * Cohesion: a peripheral aims at a centroid it has no path information
//!   for, otherwise at the farthest known foreign centroid, otherwise at its
//!   own centroid when that is more than one hop away.
//! * Separation: a peripheral's sector may not overlap a sector already
//!   claimed by a neighboring peripheral.
//!
//! Beams use the sector model: `k` elements give a beam `2π/k` wide reaching
//! `r0 · k^(1/α)`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::centroid::CentroidOutcome;
use crate::config::WorldConfig;
use crate::graph::{Graph, NodeId};
use crate::topology::{Placement, Point};

/// Slack for angular comparisons, far below the sweep resolution.
const ANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum BeamError {
    #[error("antenna element count must be at least 1, got {0}")]
    NoElements(u32),
    #[error("no beam from {peripheral} reaches centroid {centroid} to acknowledge")]
    MissingBeam { peripheral: NodeId, centroid: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorBeam {
    pub origin: NodeId,
    /// Boresight in `[0, 2π)`.
    pub azimuth: f64,
    pub width: f64,
    pub range: f64,
    pub elements: u32,
}

impl SectorBeam {
    pub fn covers(&self, origin: Point, p: Point) -> bool {
        covers(origin, self.azimuth, self.width, self.range, p)
    }

    pub fn interval(&self) -> AzimuthInterval {
        AzimuthInterval::centered(self.azimuth, self.width)
    }
}

fn covers(origin: Point, azimuth: f64, width: f64, range: f64, p: Point) -> bool {
    origin.distance(p) <= range
        && angular_offset(azimuth, origin.azimuth_to(p)) <= width / 2.0 + ANGLE_SLACK
}

/// Absolute angular difference in `[0, π]`.
pub fn angular_offset(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Beam width and range of a `k`-element sector antenna.
pub fn sector_geometry(elements: u32, radio_range: f64, alpha: f64) -> Result<(f64, f64), BeamError> {
    if elements < 1 {
        return Err(BeamError::NoElements(elements));
    }
    let k = elements as f64;
    Ok((TAU / k, radio_range * k.powf(1.0 / alpha)))
}

/// Half-open arc `[start, start + width)` on the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AzimuthInterval {
    pub start: f64,
    pub width: f64,
}

impl AzimuthInterval {
    pub fn centered(azimuth: f64, width: f64) -> Self {
        AzimuthInterval {
            start: (azimuth - width / 2.0).rem_euclid(TAU),
            width,
        }
    }

    pub fn overlaps(&self, other: &AzimuthInterval) -> bool {
        if self.width >= TAU - ANGLE_SLACK || other.width >= TAU - ANGLE_SLACK {
            return true;
        }
        let ahead = (other.start - self.start).rem_euclid(TAU);
        let behind = (self.start - other.start).rem_euclid(TAU);
        ahead < self.width - ANGLE_SLACK || behind < other.width - ANGLE_SLACK
    }
}

/// Undirected links plus one-way beam coverage that nobody acknowledged.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkSet {
    symmetric: BTreeSet<(NodeId, NodeId)>,
    directed: BTreeSet<(NodeId, NodeId)>,
}

fn pair(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl LinkSet {
    pub fn from_graph(g: &Graph) -> Self {
        LinkSet {
            symmetric: g.edges().collect(),
            directed: BTreeSet::new(),
        }
    }

    pub fn symmetric_edges(&self) -> &BTreeSet<(NodeId, NodeId)> {
        &self.symmetric
    }

    pub fn directed_edges(&self) -> &BTreeSet<(NodeId, NodeId)> {
        &self.directed
    }

    pub fn has_symmetric(&self, u: NodeId, v: NodeId) -> bool {
        self.symmetric.contains(&pair(u, v))
    }

    /// Graph over the symmetric links only.
    pub fn symmetric_graph(&self, node_count: usize) -> Graph {
        Graph::from_edges(node_count, self.symmetric.iter().copied())
            .expect("link endpoints are valid node ids")
    }

    /// Adds `origin -> v` for every node inside the sector that is not
    /// already a symmetric neighbor. Returns the covered nodes.
    pub fn apply_beam(&mut self, beam: &SectorBeam, placement: &Placement) -> Vec<NodeId> {
        let origin = placement.position(beam.origin);
        let covered: Vec<NodeId> = (0..placement.len())
            .filter(|&v| v != beam.origin && beam.covers(origin, placement.position(v)))
            .collect();
        for &v in &covered {
            if !self.has_symmetric(beam.origin, v) {
                self.directed.insert((beam.origin, v));
            }
        }
        covered
    }

    /// The centroid's one-time back-beam: promotes `peripheral -> centroid`
    /// to a symmetric link.
    pub fn acknowledge_beam(&mut self, centroid: NodeId, peripheral: NodeId) -> Result<(), BeamError> {
        if self.has_symmetric(peripheral, centroid) {
            return Ok(());
        }
        if !self.directed.remove(&(peripheral, centroid)) {
            return Err(BeamError::MissingBeam {
                peripheral,
                centroid,
            });
        }
        self.directed.remove(&(centroid, peripheral));
        self.symmetric.insert(pair(peripheral, centroid));
        Ok(())
    }
}

/// Members of a region (ascending ids) whose same-region neighbors all sit at
/// a hopcount no greater than their own. A member without same-region
/// neighbors is peripheral.
pub fn detect_peripherals(region: &[NodeId], hop_counts: &[u32], topology: &Graph) -> BTreeSet<NodeId> {
    let hop: BTreeMap<NodeId, u32> = region.iter().copied().zip(hop_counts.iter().copied()).collect();
    region
        .iter()
        .copied()
        .filter(|&v| {
            topology
                .neighbors(v)
                .iter()
                .filter_map(|w| hop.get(w))
                .all(|&h| h <= hop[&v])
        })
        .collect()
}

/// What a peripheral aims its beam at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    /// Centroids it holds no hopcount for (distance taken as infinite).
    Unknown(Vec<NodeId>),
    /// Farthest foreign centroid with a recorded hopcount.
    Foreign(NodeId),
    Own(NodeId),
}

impl Target {
    pub fn candidates(&self) -> Vec<NodeId> {
        match self {
            Target::Unknown(v) => v.clone(),
            Target::Foreign(c) | Target::Own(c) => vec![*c],
        }
    }
}

/// Cohesion rule. `unknown` lists centroids absent from `known` that the
/// node could reach; `known` maps centroids to recorded hopcounts.
pub fn choose_target(
    known: &BTreeMap<NodeId, u32>,
    self_hop: u32,
    own_centroid: NodeId,
    unknown: &[NodeId],
) -> Option<Target> {
    let unknown: Vec<NodeId> = unknown
        .iter()
        .copied()
        .filter(|c| *c != own_centroid && !known.contains_key(c))
        .collect();
    if !unknown.is_empty() {
        return Some(Target::Unknown(unknown));
    }
    let farthest = known
        .iter()
        .filter(|(&c, _)| c != own_centroid)
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)));
    match farthest {
        Some((&c, _)) => Some(Target::Foreign(c)),
        None if self_hop > 1 => Some(Target::Own(own_centroid)),
        None => None,
    }
}

/// Steps the boresight through `0, s, 2s, …` and returns the first azimuth
/// whose sector reaches one of `eligible` without overlapping `claimed`.
pub fn sweep_for_direction(
    origin: Point,
    width: f64,
    range: f64,
    eligible: &[Point],
    claimed: &[AzimuthInterval],
    sweep_step: f64,
) -> Option<f64> {
    let steps = (TAU / sweep_step).round() as usize;
    (0..steps).map(|i| i as f64 * sweep_step).find(|&az| {
        eligible.iter().any(|&p| covers(origin, az, width, range, p)) && {
            let sector = AzimuthInterval::centered(az, width);
            claimed.iter().all(|c| !sector.overlaps(c))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamStatus {
    Formed,
    Dropped,
    /// No beam attempted: a single element, or nothing to aim at.
    Omni,
}

impl fmt::Display for BeamStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BeamStatus::Formed => "formed",
            BeamStatus::Dropped => "dropped",
            BeamStatus::Omni => "omni",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamReport {
    pub peripheral: NodeId,
    pub elements: u32,
    pub azimuth: Option<f64>,
    pub width: f64,
    pub range: f64,
    /// Acknowledging centroid when formed; the aimed-at centroid when a
    /// known target was dropped.
    pub target: Option<NodeId>,
    pub status: BeamStatus,
}

impl fmt::Display for BeamReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dash = |o: Option<String>| o.unwrap_or_else(|| "-".to_string());
        write!(
            f,
            "{} {} {} {} {} {} {}",
            self.peripheral,
            self.elements,
            dash(self.azimuth.map(|a| a.to_string())),
            self.width,
            self.range,
            dash(self.target.map(|t| t.to_string())),
            self.status
        )
    }
}

#[derive(Debug, Clone)]
pub struct BeamformingOutcome {
    pub links: LinkSet,
    pub peripherals: BTreeSet<NodeId>,
    pub beams: Vec<SectorBeam>,
    pub report: Vec<BeamReport>,
    /// `(peripheral, centroid)` pairs joined by an acknowledged beam.
    pub acknowledged: Vec<(NodeId, NodeId)>,
}

impl BeamformingOutcome {
    pub fn count(&self, status: BeamStatus) -> usize {
        self.report.iter().filter(|r| r.status == status).count()
    }

    /// `p_id k azimuth width range target_centroid status` per peripheral.
    pub fn dump(&self) -> String {
        self.report.iter().map(|r| format!("{r}\n")).collect()
    }
}

/// Runs alignment, cohesion and separation for every peripheral in
/// ascending id order, so each one sees the sectors its lower-id neighbors
/// have already claimed.
pub fn run_beamforming<R: Rng + ?Sized>(
    topology: &Graph,
    placement: &Placement,
    centroids: &CentroidOutcome,
    config: &WorldConfig,
    rng: &mut R,
) -> Result<BeamformingOutcome, BeamError> {
    let mut peripherals = BTreeSet::new();
    for region in &centroids.regions {
        let hops: Vec<u32> = region.members.iter().map(|&v| centroids.nodes[v].hop_count).collect();
        peripherals.extend(detect_peripherals(&region.members, &hops, topology));
    }
    let all_centroids = centroids.centroids();
    let mut links = LinkSet::from_graph(topology);
    let mut claims: BTreeMap<NodeId, AzimuthInterval> = BTreeMap::new();
    let mut beams = Vec::new();
    let mut report = Vec::new();
    let mut acknowledged = Vec::new();

    for &p in &peripherals {
        let elements = rng.random_range(config.elements_min..=config.elements_max);
        let (width, range) = sector_geometry(elements, config.radio_range, config.alpha)?;
        let mut entry = BeamReport {
            peripheral: p,
            elements,
            azimuth: None,
            width,
            range,
            target: None,
            status: BeamStatus::Omni,
        };
        let node = &centroids.nodes[p];
        let origin = placement.position(p);
        let reachable: Vec<NodeId> = all_centroids
            .iter()
            .copied()
            .filter(|&c| c != node.centroid && origin.distance(placement.position(c)) <= range)
            .collect();
        let target = match choose_target(&node.known_centroids, node.hop_count, node.centroid, &reachable) {
            Some(t) if elements > 1 => t,
            _ => {
                report.push(entry);
                continue;
            }
        };
        let candidates = target.candidates();
        let eligible: Vec<Point> = candidates.iter().map(|&c| placement.position(c)).collect();
        let claimed: Vec<AzimuthInterval> = topology
            .neighbors(p)
            .iter()
            .filter_map(|w| claims.get(w).copied())
            .collect();
        let Some(azimuth) = sweep_for_direction(origin, width, range, &eligible, &claimed, config.sweep_step)
        else {
            entry.status = BeamStatus::Dropped;
            if let Target::Foreign(c) | Target::Own(c) = target {
                entry.target = Some(c);
            }
            report.push(entry);
            continue;
        };
        let beam = SectorBeam {
            origin: p,
            azimuth,
            width,
            range,
            elements,
        };
        links.apply_beam(&beam, placement);
        // The nearest covered candidate is the first the beam reaches.
        let reached = candidates
            .iter()
            .copied()
            .filter(|&c| beam.covers(origin, placement.position(c)))
            .min_by(|&a, &b| {
                origin
                    .distance(placement.position(a))
                    .total_cmp(&origin.distance(placement.position(b)))
                    .then(a.cmp(&b))
            })
            .expect("sweep only stops on a covering azimuth");
        links.acknowledge_beam(reached, p)?;
        acknowledged.push((p, reached));
        claims.insert(p, beam.interval());
        beams.push(beam);
        entry.azimuth = Some(azimuth);
        entry.target = Some(reached);
        entry.status = BeamStatus::Formed;
        report.push(entry);
    }

    Ok(BeamformingOutcome {
        links,
        peripherals,
        beams,
        report,
        acknowledged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn geometry_examples() {
        assert_eq!(sector_geometry(1, 1.0, 2.0).unwrap(), (TAU, 1.0));
        assert_eq!(sector_geometry(4, 1.0, 2.0).unwrap(), (FRAC_PI_2, 2.0));
        let (w, r) = sector_geometry(9, 1.0, 2.0).unwrap();
        assert!((w - TAU / 9.0).abs() < 1e-15 && (r - 3.0).abs() < 1e-15);
        assert_eq!(sector_geometry(0, 1.0, 2.0), Err(BeamError::NoElements(0)));
    }

    #[test]
    fn peripherals_on_path_and_singletons() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
        let p = detect_peripherals(&[0, 1, 2], &[1, 0, 1], &g);
        assert_eq!(p, BTreeSet::from([0, 2]));
        assert_eq!(detect_peripherals(&[3], &[0], &g), BTreeSet::from([3]));
    }

    #[test]
    fn peripherals_ignore_foreign_neighbors() {
        // 1 is region {0, 1}'s far end; its neighbor 2 belongs elsewhere.
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(detect_peripherals(&[0, 1], &[0, 1], &g), BTreeSet::from([1]));
    }

    #[test]
    fn target_prefers_unknown_then_farthest() {
        let known = BTreeMap::from([(0, 2), (10, 4), (11, 5)]);
        assert_eq!(choose_target(&known, 2, 0, &[]), Some(Target::Foreign(11)));
        assert_eq!(choose_target(&known, 2, 0, &[11, 12]), Some(Target::Unknown(vec![12])));
        let own_only = BTreeMap::from([(0, 1)]);
        assert_eq!(choose_target(&own_only, 1, 0, &[]), None);
        assert_eq!(choose_target(&own_only, 2, 0, &[]), Some(Target::Own(0)));
        assert_eq!(choose_target(&own_only, 1, 0, &[0]), None);
    }

    #[test]
    fn sweep_finds_east_target_at_zero() {
        let az = sweep_for_direction(
            Point::new(0.0, 0.0),
            FRAC_PI_2,
            2.0,
            &[Point::new(1.5, 0.0)],
            &[],
            TAU / 64.0,
        );
        assert_eq!(az, Some(0.0));
    }

    #[test]
    fn sweep_first_covering_step() {
        // Target at 100°; a 40° beam first reaches it at boresight 80°.
        let t = Point::new(100f64.to_radians().cos(), 100f64.to_radians().sin());
        let az = sweep_for_direction(Point::new(0.0, 0.0), 40f64.to_radians(), 2.0, &[t], &[], TAU / 36.0)
            .unwrap();
        assert!((az - 80f64.to_radians()).abs() < 1e-9, "{az}");
    }

    #[test]
    fn sweep_respects_neighbor_claim() {
        // Target at 45°, beam π/2 wide: only boresights within ±45° of the
        // target cover it, and every such sector overlaps the claim [0, π/2).
        let claim = AzimuthInterval { start: 0.0, width: FRAC_PI_2 };
        let t = Point::new(1.0, 1.0);
        let az = sweep_for_direction(Point::new(0.0, 0.0), FRAC_PI_2, 2.0, &[t], &[claim], TAU / 64.0);
        assert_eq!(az, None);
        // Without the claim the first covering step is boresight 0.
        let az = sweep_for_direction(Point::new(0.0, 0.0), FRAC_PI_2, 2.0, &[t], &[], TAU / 64.0);
        assert_eq!(az, Some(0.0));
    }

    #[test]
    fn sweep_out_of_range_is_none() {
        let az = sweep_for_direction(Point::new(0.0, 0.0), PI, 1.0, &[Point::new(3.0, 0.0)], &[], TAU / 8.0);
        assert_eq!(az, None);
    }

    #[test]
    fn interval_overlap() {
        let a = AzimuthInterval { start: 0.0, width: FRAC_PI_2 };
        let b = AzimuthInterval { start: FRAC_PI_2, width: FRAC_PI_2 };
        let c = AzimuthInterval { start: 1.0, width: 0.1 };
        let wrap = AzimuthInterval::centered(0.0, 0.4);
        assert!(!a.overlaps(&b) && !b.overlaps(&a));
        assert!(a.overlaps(&c) && c.overlaps(&a));
        assert!(wrap.overlaps(&a));
        assert!(!wrap.overlaps(&b));
    }

    fn line_placement() -> Placement {
        Placement {
            positions: vec![
                Point::new(0.0, 0.0),
                Point::new(0.9, 0.0),
                Point::new(1.8, 0.0),
                Point::new(0.5, 0.6),
            ],
        }
    }

    #[test]
    fn beam_links_and_acknowledgment() {
        let placement = line_placement();
        let omni = Graph::from_edges(4, [(0, 1), (0, 3)]).unwrap();
        let mut links = LinkSet::from_graph(&omni);
        let empty = SectorBeam { origin: 0, azimuth: PI, width: 0.5, range: 2.0, elements: 12 };
        assert!(links.apply_beam(&empty, &placement).is_empty());
        assert_eq!(links, LinkSet::from_graph(&omni));

        let east = SectorBeam { origin: 0, azimuth: 0.0, width: 0.5, range: 2.0, elements: 12 };
        assert_eq!(links.apply_beam(&east, &placement), vec![1, 2]);
        assert_eq!(links.directed_edges(), &BTreeSet::from([(0, 2)]));
        assert!(links.has_symmetric(0, 1));

        links.acknowledge_beam(2, 0).unwrap();
        assert!(links.has_symmetric(0, 2));
        assert!(links.directed_edges().is_empty());
        links.acknowledge_beam(1, 0).unwrap();
        assert_eq!(
            links.acknowledge_beam(3, 1),
            Err(BeamError::MissingBeam { peripheral: 1, centroid: 3 })
        );
    }

    #[test]
    fn unacknowledged_coverage_stays_directed() {
        let placement = line_placement();
        let mut links = LinkSet::from_graph(&Graph::new(4));
        let east = SectorBeam { origin: 0, azimuth: 0.0, width: 0.5, range: 2.0, elements: 12 };
        links.apply_beam(&east, &placement);
        links.acknowledge_beam(2, 0).unwrap();
        assert_eq!(links.directed_edges(), &BTreeSet::from([(0, 1)]));
        assert_eq!(links.symmetric_graph(4).edge_count(), 1);
    }

    #[test]
    fn report_line_format() {
        let r = BeamReport {
            peripheral: 4,
            elements: 1,
            azimuth: None,
            width: TAU,
            range: 1.0,
            target: None,
            status: BeamStatus::Omni,
        };
        assert_eq!(r.to_string(), format!("4 1 - {} 1 - omni", TAU));
    }
}
