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

//! Self-check suite: graph measures against the brute-force oracles, and
//! the hard per-trial invariants of the protocol pipeline.

use std::f64::consts::TAU;
use std::fmt;

use crate::beamform::{sector_geometry, BeamStatus};
use crate::config::WorldConfig;
use crate::experiment::{simulate, TrialOutcome};
use crate::graph::{self, connected_components, Graph, NodeId};
use crate::oracle;
use crate::rng::{stream_rng, trial_seed};

/// Absolute tolerance for oracle comparisons.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

/// The measures under validation. Abstracted so a deliberately broken
/// implementation can be injected to prove the suite notices.
pub trait GraphMeasures: Sync {
    fn average_path_length(&self, g: &Graph) -> f64;
    fn clustering_coefficient(&self, g: &Graph) -> f64;
    fn component_count(&self, g: &Graph) -> usize;
    fn egocentric_betweenness(&self, g: &Graph, v: NodeId) -> f64;
    fn closeness_centrality(&self, g: &Graph, v: NodeId) -> f64;
}

/// The library's own measures.
pub struct LibraryMeasures;

impl GraphMeasures for LibraryMeasures {
    fn average_path_length(&self, g: &Graph) -> f64 {
        graph::average_path_length(g)
    }
    fn clustering_coefficient(&self, g: &Graph) -> f64 {
        graph::clustering_coefficient(g)
    }
    fn component_count(&self, g: &Graph) -> usize {
        graph::component_count(g)
    }
    fn egocentric_betweenness(&self, g: &Graph, v: NodeId) -> f64 {
        graph::egocentric_betweenness(g, v).unwrap()
    }
    fn closeness_centrality(&self, g: &Graph, v: NodeId) -> f64 {
        graph::closeness_centrality(g, v).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}", self.name)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, failures: Vec<String>, total: usize) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed: failures.is_empty(),
            detail: match failures.first() {
                None => format!("{total} cases"),
                Some(first) => format!("{} of {total} failed; first: {first}", failures.len()),
            },
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// `count` random graphs of 1 to 12 nodes with assorted densities.
pub fn oracle_graphs(seed: u64, count: usize) -> Vec<Graph> {
    let mut rng = stream_rng(seed, 0);
    (0..count)
        .map(|i| {
            let n = 1 + i % 12;
            let p = [0.15, 0.3, 0.5, 0.8][i % 4];
            oracle::random_graph(n, p, &mut rng)
        })
        .collect()
}

/// Compares `measures` with the oracles on `graphs`.
pub fn check_oracles(measures: &dyn GraphMeasures, graphs: &[Graph]) -> ValidationReport {
    let close = |a: f64, b: f64| (a - b).abs() <= ORACLE_TOLERANCE;
    let mut report = ValidationReport::default();
    let mut apl = Vec::new();
    let mut cc = Vec::new();
    let mut comps = Vec::new();
    let mut ego = Vec::new();
    let mut clo = Vec::new();
    let mut nodes = 0;
    for (i, g) in graphs.iter().enumerate() {
        let (a, b) = (measures.average_path_length(g), oracle::apl(g));
        if !close(a, b) {
            apl.push(format!("graph {i}: {a} vs {b}"));
        }
        let (a, b) = (measures.clustering_coefficient(g), oracle::clustering(g));
        if !close(a, b) {
            cc.push(format!("graph {i}: {a} vs {b}"));
        }
        let (a, b) = (measures.component_count(g), oracle::union_find_components(g));
        if a != b {
            comps.push(format!("graph {i}: {a} vs {b}"));
        }
        for v in 0..g.node_count() {
            nodes += 1;
            let (a, b) = (measures.egocentric_betweenness(g, v), oracle::ego_betweenness(g, v));
            if !close(a, b) {
                ego.push(format!("graph {i} node {v}: {a} vs {b}"));
            }
            let (a, b) = (measures.closeness_centrality(g, v), oracle::closeness(g, v));
            if !close(a, b) {
                clo.push(format!("graph {i} node {v}: {a} vs {b}"));
            }
        }
    }
    let total = graphs.len();
    report.push("oracle: average path length vs Floyd-Warshall", apl, total);
    report.push("oracle: clustering coefficient vs triangle enumeration", cc, total);
    report.push("oracle: component count vs union-find", comps, total);
    report.push("oracle: egocentric betweenness vs Brandes on ego subgraph", ego, nodes);
    report.push("oracle: closeness vs all-pairs distances", clo, nodes);
    report
}

/// Names of the per-trial invariants, in report order.
pub const TRIAL_INVARIANTS: [&str; 10] = [
    "components_dir <= components_omni",
    "hopcount <= gradient during formation",
    "inhibition never lowers head degree",
    "exactly one centroid per region, inside it",
    "regions induce connected subgraphs",
    "beam width * k = 2pi and range = r0 * k^(1/alpha)",
    "symmetric links contain the omni graph",
    "acknowledged links join a peripheral and a centroid",
    "neighboring peripherals hold disjoint sectors",
    "cc and fractions lie in [0, 1]",
];

/// Evaluates every invariant of [`TRIAL_INVARIANTS`] on one trial.
/// Returns one `Err(detail)` per violated invariant, in the same order.
pub fn trial_invariants(t: &TrialOutcome) -> Vec<Result<(), String>> {
    let cfg = &t.config;
    let m = &t.metrics;
    let regions = t.formation.regions();
    let mut out = Vec::new();

    out.push(if m.components_dir <= m.components_omni {
        Ok(())
    } else {
        Err(format!("{} > {}", m.components_dir, m.components_omni))
    });

    let max_hop = t.formation.stats.max_hop_seen;
    out.push(if max_hop <= cfg.gradient {
        Ok(())
    } else {
        Err(format!("hop {max_hop} > {}", cfg.gradient))
    });

    let drops = t.formation.stats.adoption_degree_drops;
    out.push(if drops == 0 { Ok(()) } else { Err(format!("{drops} drops")) });

    let one_centroid = t.centroids.regions.len() == regions.len()
        && t.centroids
            .regions
            .iter()
            .all(|r| r.members.contains(&r.centroid) && regions.get(&r.head) == Some(&r.members));
    out.push(if one_centroid {
        Ok(())
    } else {
        Err("region/centroid mismatch".into())
    });

    let disconnected: Vec<NodeId> = regions
        .iter()
        .filter(|(_, members)| connected_components(&t.omni.induced_subgraph(members).0).len() != 1)
        .map(|(&h, _)| h)
        .collect();
    out.push(if disconnected.is_empty() {
        Ok(())
    } else {
        Err(format!("regions {disconnected:?}"))
    });

    let bad_beam = t.beams.report.iter().find(|b| {
        let k = b.elements as f64;
        let expected = sector_geometry(b.elements, cfg.radio_range, cfg.alpha).unwrap();
        (b.width * k - TAU).abs() > 1e-12 || b.range != expected.1
    });
    out.push(match bad_beam {
        None => Ok(()),
        Some(b) => Err(format!("peripheral {}", b.peripheral)),
    });

    let sym = t.beams.links.symmetric_edges();
    let missing = t.omni.edges().find(|e| !sym.contains(e));
    let both = t
        .beams
        .links
        .directed_edges()
        .iter()
        .find(|&&(u, v)| t.beams.links.has_symmetric(u, v));
    out.push(match (missing, both) {
        (None, None) => Ok(()),
        (Some(e), _) => Err(format!("omni edge {e:?} lost")),
        (_, Some(e)) => Err(format!("{e:?} both directed and symmetric")),
    });

    let centroids = t.centroids.centroids();
    let bad_ack = t.beams.acknowledged.iter().find(|(p, c)| {
        !t.beams.peripherals.contains(p) || !centroids.contains(c) || !t.beams.links.has_symmetric(*p, *c)
    });
    out.push(match bad_ack {
        None => Ok(()),
        Some(e) => Err(format!("{e:?}")),
    });

    let mut overlap = None;
    for (i, a) in t.beams.beams.iter().enumerate() {
        for b in &t.beams.beams[i + 1..] {
            if t.omni.has_edge(a.origin, b.origin) && a.interval().overlaps(&b.interval()) {
                overlap = Some((a.origin, b.origin));
            }
        }
    }
    out.push(match overlap {
        None => Ok(()),
        Some(p) => Err(format!("peripherals {p:?}")),
    });

    let unit = |x: f64| (0.0..=1.0).contains(&x);
    let formed = t.beams.count(BeamStatus::Formed);
    let fractions_ok = unit(m.cc_omni) && unit(m.cc_dir) && unit(m.frac_peripheral) && unit(m.frac_centroid);
    out.push(if fractions_ok && formed == t.beams.beams.len() {
        Ok(())
    } else {
        Err("value outside [0, 1]".into())
    });
    out
}

/// Runs the oracle comparisons and the trial invariants on a fixed seed set.
pub fn run_validation(measures: &dyn GraphMeasures, base: &WorldConfig) -> ValidationReport {
    let mut report = check_oracles(measures, &oracle_graphs(base.seed, 100));
    let mut failures: Vec<Vec<String>> = vec![Vec::new(); TRIAL_INVARIANTS.len()];
    let mut trials = 0;
    for &n in &[20usize, 60, 120, 200] {
        for &gradient in &[3u32, 6, 10] {
            for i in 0..4 {
                let cfg = WorldConfig {
                    node_count: n,
                    gradient,
                    seed: trial_seed(base.seed, i),
                    ..base.clone()
                };
                trials += 1;
                match simulate(&cfg, None) {
                    Ok(t) => {
                        for (slot, result) in failures.iter_mut().zip(trial_invariants(&t)) {
                            if let Err(e) = result {
                                slot.push(format!("n={n} g={gradient} seed#{i}: {e}"));
                            }
                        }
                    }
                    Err(e) => failures[0].push(format!("n={n} g={gradient} seed#{i}: trial failed: {e}")),
                }
            }
        }
    }
    for (name, f) in TRIAL_INVARIANTS.iter().zip(failures) {
        report.push(&format!("invariant: {name}"), f, trials);
    }
    report
}
