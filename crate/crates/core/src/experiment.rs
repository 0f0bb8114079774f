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

//! Trials, parameter sweeps and their statistical summary.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::beamform::{run_beamforming, BeamError, BeamformingOutcome, LinkSet};
use crate::centroid::{run_centroid_phase, CentroidError, CentroidOutcome};
use crate::config::{ConfigError, WorldConfig};
use crate::engine::Trace;
use crate::graph::{average_path_length, clustering_coefficient, component_count, Graph};
use crate::regions::{run_region_formation, RegionError, RegionOutcome, TieBreak};
use crate::rng::{stream, stream_rng, trial_seed};
use crate::topology::{place_nodes, unit_disk_graph, Placement};

#[derive(Debug, Error)]
pub enum TrialError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("region formation: {0}")]
    Regions(#[from] RegionError),
    #[error("centroid election: {0}")]
    Centroid(#[from] CentroidError),
    #[error("beamforming: {0}")]
    Beam(#[from] BeamError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Omni,
    Directional,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Omni, Mode::Directional];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Omni => "omni",
            Mode::Directional => "dir",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "omni" => Ok(Mode::Omni),
            "dir" => Ok(Mode::Directional),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// Outputs of one trial for both the omnidirectional and the directional
/// (omni + acknowledged beams) topology.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub n: usize,
    pub gradient: u32,
    pub seed: u64,
    pub apl_omni: f64,
    pub apl_dir: f64,
    pub cc_omni: f64,
    pub cc_dir: f64,
    pub components_omni: usize,
    pub components_dir: usize,
    pub frac_peripheral: f64,
    pub frac_centroid: f64,
    pub unidirectional_links: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Apl,
    Cc,
    Components,
    FracPeripheral,
    FracCentroid,
    UnidirectionalLinks,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Apl,
        Metric::Cc,
        Metric::Components,
        Metric::FracPeripheral,
        Metric::FracCentroid,
        Metric::UnidirectionalLinks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Apl => "apl",
            Metric::Cc => "cc",
            Metric::Components => "components",
            Metric::FracPeripheral => "frac_peripheral",
            Metric::FracCentroid => "frac_centroid",
            Metric::UnidirectionalLinks => "unidirectional_links",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl MetricsRecord {
    /// Value of `metric` as seen in `mode`. Trial-level quantities
    /// (fractions) are the same in both modes; the omnidirectional topology
    /// has no unidirectional links.
    pub fn value(&self, metric: Metric, mode: Mode) -> f64 {
        let dir = mode == Mode::Directional;
        match metric {
            Metric::Apl => if dir { self.apl_dir } else { self.apl_omni },
            Metric::Cc => if dir { self.cc_dir } else { self.cc_omni },
            Metric::Components => {
                (if dir { self.components_dir } else { self.components_omni }) as f64
            }
            Metric::FracPeripheral => self.frac_peripheral,
            Metric::FracCentroid => self.frac_centroid,
            Metric::UnidirectionalLinks => {
                if dir {
                    self.unidirectional_links as f64
                } else {
                    0.0
                }
            }
        }
    }
}

/// Metrics of the omnidirectional graph and of the symmetric part of the
/// final link set. Trial identifiers are left for the caller.
pub fn compute_metrics(
    omni: &Graph,
    links: &LinkSet,
    region_count: usize,
    peripheral_count: usize,
) -> MetricsRecord {
    let n = omni.node_count();
    let dir = links.symmetric_graph(n);
    MetricsRecord {
        n,
        gradient: 0,
        seed: 0,
        apl_omni: average_path_length(omni),
        apl_dir: average_path_length(&dir),
        cc_omni: clustering_coefficient(omni),
        cc_dir: clustering_coefficient(&dir),
        components_omni: component_count(omni),
        components_dir: component_count(&dir),
        frac_peripheral: peripheral_count as f64 / n as f64,
        frac_centroid: region_count as f64 / n as f64,
        unidirectional_links: links.directed_edges().len(),
    }
}

/// Everything one trial produced.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub config: WorldConfig,
    pub placement: Placement,
    pub omni: Graph,
    pub formation: RegionOutcome,
    pub centroids: CentroidOutcome,
    pub beams: BeamformingOutcome,
    pub metrics: MetricsRecord,
}

/// Placement, unit-disk graph, regions, centroids, beams and metrics, all
/// determined by `config.seed`.
pub fn simulate(config: &WorldConfig, trace: Option<&mut Trace>) -> Result<TrialOutcome, TrialError> {
    config.validate()?;
    let seed = config.seed;
    let placement = place_nodes(config, &mut stream_rng(seed, stream::PLACEMENT));
    let omni = unit_disk_graph(&placement, config.radio_range);
    let tie_break = if config.deterministic_ties {
        TieBreak::LowestId
    } else {
        TieBreak::Random
    };
    let formation = run_region_formation(&omni, config.gradient, seed, tie_break, trace)?;
    let centroids = run_centroid_phase(
        &omni,
        &formation,
        config.gradient,
        config.epsilon,
        config.delta,
        &mut stream_rng(seed, stream::VIRTUAL_COORDS),
    )?;
    let beams = run_beamforming(
        &omni,
        &placement,
        &centroids,
        config,
        &mut stream_rng(seed, stream::ANTENNA_ELEMENTS),
    )?;
    let mut metrics = compute_metrics(&omni, &beams.links, centroids.regions.len(), beams.peripherals.len());
    metrics.gradient = config.gradient;
    metrics.seed = seed;
    Ok(TrialOutcome {
        config: config.clone(),
        placement,
        omni,
        formation,
        centroids,
        beams,
        metrics,
    })
}

pub fn run_trial(config: &WorldConfig) -> Result<MetricsRecord, TrialError> {
    simulate(config, None).map(|t| t.metrics)
}

/// One cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSpec {
    pub n: usize,
    pub gradient: u32,
    pub seed_index: u64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub base: WorldConfig,
    pub n_values: Vec<usize>,
    pub gradients: Vec<u32>,
    pub seeds: u64,
}

impl SweepPlan {
    pub const DEFAULT_N: [usize; 5] = [20, 60, 120, 200, 400];
    pub const DEFAULT_GRADIENTS: [u32; 3] = [3, 6, 10];
    pub const DEFAULT_SEEDS: u64 = 50;

    pub fn new(base: WorldConfig) -> Self {
        SweepPlan {
            base,
            n_values: Self::DEFAULT_N.to_vec(),
            gradients: Self::DEFAULT_GRADIENTS.to_vec(),
            seeds: Self::DEFAULT_SEEDS,
        }
    }

    /// Cross product in `(n, gradient, seed index)` order. The trial seed
    /// depends only on the master seed and the seed index, so every `(n, g)`
    /// cell sees the same family of topologies per index.
    pub fn trials(&self) -> Vec<TrialSpec> {
        let mut out = Vec::new();
        for &n in &self.n_values {
            for &gradient in &self.gradients {
                for seed_index in 0..self.seeds {
                    out.push(TrialSpec {
                        n,
                        gradient,
                        seed_index,
                        seed: trial_seed(self.base.seed, seed_index),
                    });
                }
            }
        }
        out
    }

    pub fn config_for(&self, spec: &TrialSpec) -> WorldConfig {
        WorldConfig {
            node_count: spec.n,
            gradient: spec.gradient,
            seed: spec.seed,
            ..self.base.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialFailure {
    pub spec: TrialSpec,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Successful trials in plan order.
    pub records: Vec<MetricsRecord>,
    /// Failed trials, excluded from `records`.
    pub failures: Vec<TrialFailure>,
}

/// Runs every trial of `plan` on `jobs` worker threads. Results do not depend
/// on `jobs`.
pub fn run_sweep(plan: &SweepPlan, jobs: usize) -> SweepResult {
    run_sweep_with(plan, jobs, run_trial)
}

/// Like [`run_sweep`] but with a custom per-trial function.
pub fn run_sweep_with<F>(plan: &SweepPlan, jobs: usize, trial: F) -> SweepResult
where
    F: Fn(&WorldConfig) -> Result<MetricsRecord, TrialError> + Sync,
{
    let specs = plan.trials();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let outcomes: Vec<_> = pool.install(|| {
        specs
            .par_iter()
            .map(|spec| (spec, trial(&plan.config_for(spec))))
            .collect()
    });
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (spec, outcome) in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => failures.push(TrialFailure {
                spec: *spec,
                reason: e.to_string(),
            }),
        }
    }
    SweepResult { records, failures }
}

/// Mean and 95% Student-t half-width of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub gradient: u32,
    pub mode: Mode,
    pub metric: Metric,
    pub mean: f64,
    /// `None` when the group has fewer than two samples.
    pub ci95_halfwidth: Option<f64>,
    pub sample_count: usize,
}

impl SummaryRow {
    pub fn density(&self, field_size: f64) -> f64 {
        self.n as f64 / (field_size * field_size)
    }
}

/// Sample mean and `t(0.975, s-1) · sd / √s`.
pub fn mean_ci95(samples: &[f64]) -> (f64, Option<f64>) {
    let s = samples.len();
    if s == 0 {
        return (f64::NAN, None);
    }
    let mean = samples.iter().sum::<f64>() / s as f64;
    if s < 2 {
        return (mean, None);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (s - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (s - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    (mean, Some(t * var.sqrt() / (s as f64).sqrt()))
}

/// One row per `(n, gradient, mode)` group, ordered by that key.
pub fn summarize(records: &[MetricsRecord], metric: Metric) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, u32, Mode), Vec<f64>> = BTreeMap::new();
    for r in records {
        for mode in Mode::ALL {
            groups
                .entry((r.n, r.gradient, mode))
                .or_default()
                .push(r.value(metric, mode));
        }
    }
    groups
        .into_iter()
        .map(|((n, gradient, mode), samples)| {
            let (mean, ci) = mean_ci95(&samples);
            SummaryRow {
                n,
                gradient,
                mode,
                metric,
                mean,
                ci95_halfwidth: ci,
                sample_count: samples.len(),
            }
        })
        .collect()
}

/// Looks up the summary row for a group.
pub fn find_row(rows: &[SummaryRow], n: usize, gradient: u32, mode: Mode) -> Option<&SummaryRow> {
    rows.iter()
        .find(|r| r.n == n && r.gradient == gradient && r.mode == mode)
}
