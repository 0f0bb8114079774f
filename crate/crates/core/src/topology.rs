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

//! Node placement and omnidirectional unit-disk connectivity.

use std::fmt::Write as _;

use rand::Rng;

use crate::config::WorldConfig;
use crate::graph::{Graph, GraphError, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Direction from `self` to `other` in `[0, 2π)`.
    pub fn azimuth_to(self, other: Point) -> f64 {
        let a = (other.y - self.y).atan2(other.x - self.x);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }
}

/// Node positions, indexed by node id.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub positions: Vec<Point>,
}

impl Placement {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, v: NodeId) -> Point {
        self.positions[v]
    }

    /// `id x y` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, p) in self.positions.iter().enumerate() {
            writeln!(out, "{id} {} {}", p.x, p.y).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut positions = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = || GraphError::Parse {
                line: i + 1,
                message: format!("expected `id x y`, found `{line}`"),
            };
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(err());
            }
            let id: usize = parts[0].parse().map_err(|_| err())?;
            if id != positions.len() {
                return Err(err());
            }
            let x: f64 = parts[1].parse().map_err(|_| err())?;
            let y: f64 = parts[2].parse().map_err(|_| err())?;
            positions.push(Point::new(x, y));
        }
        Ok(Placement { positions })
    }
}

/// Uniform i.i.d. placement of `config.node_count` nodes in `[0, L]²`.
pub fn place_nodes<R: Rng + ?Sized>(config: &WorldConfig, rng: &mut R) -> Placement {
    let side = config.field_size;
    let positions = (0..config.node_count)
        .map(|_| Point::new(rng.random_range(0.0..=side), rng.random_range(0.0..=side)))
        .collect();
    Placement { positions }
}

/// Connects every pair within `radio_range` (closed disk).
pub fn unit_disk_graph(placement: &Placement, radio_range: f64) -> Graph {
    let n = placement.len();
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if placement.positions[u].distance(placement.positions[v]) <= radio_range {
                g.add_edge(u, v).expect("distinct in-range ids");
            }
        }
    }
    g
}
