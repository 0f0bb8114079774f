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

//! Simulator of self-organizing wireless nodes.
//!
//! Nodes are scattered in a square field and connected by omnidirectional
//! unit-disk links. They then organize themselves with local rules only:
//!
//! 1. [`regions`]: lateral inhibition elects region heads within a bounded
//!    hop gradient.
//! 2. [`centroid`]: virtual-coordinate averaging locates a centroid node in
//!    every region and the gradient is rebuilt around it.
//! 3. [`beamform`]: peripheral nodes steer a sector beam toward a foreign
//!    (or their own) centroid, keeping clear of their neighbors' beams, and
//!    the centroid acknowledges with a back-beam.
//!
//! [`experiment`] runs the whole pipeline per trial and sweeps it over node
//! counts, gradients and seeds, reporting path length, clustering and
//! connectivity for the omnidirectional and the directional topologies.

pub mod beamform;
pub mod centroid;
pub mod config;
pub mod engine;
pub mod experiment;
pub mod graph;
pub mod oracle;
pub mod regions;
pub mod report;
pub mod rng;
pub mod topology;
pub mod validate;

pub use config::{ConfigError, WorldConfig};
pub use experiment::{run_sweep, run_trial, MetricsRecord, Mode, TrialError};
pub use graph::{Graph, GraphError, NodeId};
