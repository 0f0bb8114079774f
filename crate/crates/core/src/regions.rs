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

//! Lateral-inhibition region formation.
//!
//! Every node starts as its own head and broadcasts `(head, hop, degree)`.
//! A node hearing a stronger head within the gradient bound inhibits itself,
//! adopts that head one hop further out and rebroadcasts it. The run ends
//! when no node changes any more.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{self, EngineError, Trace};
use crate::graph::{Graph, NodeId};
use crate::rng::{stream, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InhibitionStatus {
    Uninhibited,
    Inhibited,
}

/// How a node settles an equal-degree, equal-hop choice between two heads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Fair coin from the node's own seeded stream.
    #[default]
    Random,
    /// Prefer the lower head id.
    LowestId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeadMessage {
    pub head_id: NodeId,
    pub hop_count: u32,
    pub head_degree: usize,
}

impl fmt::Display for HeadMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "head={} hop={} degree={}", self.head_id, self.hop_count, self.head_degree)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionState {
    pub node: NodeId,
    pub status: InhibitionStatus,
    pub head_id: NodeId,
    pub head_degree: usize,
    pub hop_count: u32,
    /// Smallest hopcount heard for every head this node has heard of.
    pub known_heads: BTreeMap<NodeId, u32>,
}

impl RegionState {
    pub fn init(node: NodeId, degree: usize) -> Self {
        RegionState {
            node,
            status: InhibitionStatus::Uninhibited,
            head_id: node,
            head_degree: degree,
            hop_count: 0,
            known_heads: BTreeMap::from([(node, 0)]),
        }
    }

    pub fn announcement(&self) -> HeadMessage {
        HeadMessage {
            head_id: self.head_id,
            hop_count: self.hop_count,
            head_degree: self.head_degree,
        }
    }

    pub fn is_head(&self) -> bool {
        self.status == InhibitionStatus::Uninhibited
    }

    fn remember(&mut self, head: NodeId, hop: u32) {
        self.known_heads
            .entry(head)
            .and_modify(|h| *h = (*h).min(hop))
            .or_insert(hop);
    }

    fn adopt(&mut self, head_id: NodeId, hop_count: u32, head_degree: usize) {
        self.head_id = head_id;
        self.hop_count = hop_count;
        self.head_degree = head_degree;
        self.status = if head_id == self.node && hop_count == 0 {
            InhibitionStatus::Uninhibited
        } else {
            InhibitionStatus::Inhibited
        };
    }
}

/// What a single received announcement did to a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadUpdate {
    /// The node switched to the announced head; the payload is its rebroadcast.
    Adopted(HeadMessage),
    Ignored,
    /// Hopcount beyond the gradient bound; dropped without effect.
    Malformed,
}

/// Applies the inhibition rule for one announcement.
///
/// Adoption requires `msg.hop_count < gradient` and then one of: a higher
/// head degree than the current head's, an equal degree with a strictly
/// shorter resulting hopcount, or an equal degree and hopcount where the
/// tie-break selects the new head. `known_heads` is updated either way.
pub fn process_head_message<R: Rng + ?Sized>(
    state: &mut RegionState,
    msg: &HeadMessage,
    gradient: u32,
    tie_break: TieBreak,
    rng: &mut R,
) -> HeadUpdate {
    if msg.hop_count > gradient {
        return HeadUpdate::Malformed;
    }
    state.remember(msg.head_id, msg.hop_count);
    if msg.hop_count >= gradient {
        return HeadUpdate::Ignored;
    }
    let hop = msg.hop_count + 1;
    let adopt = if msg.head_degree != state.head_degree {
        msg.head_degree > state.head_degree
    } else if hop != state.hop_count {
        hop < state.hop_count
    } else if msg.head_id == state.head_id {
        false
    } else {
        match tie_break {
            TieBreak::Random => rng.random_bool(0.5),
            TieBreak::LowestId => msg.head_id < state.head_id,
        }
    };
    if !adopt {
        return HeadUpdate::Ignored;
    }
    state.adopt(msg.head_id, hop, msg.head_degree);
    HeadUpdate::Adopted(state.announcement())
}

fn is_tie(state: &RegionState, msg: &HeadMessage, gradient: u32) -> bool {
    msg.hop_count < gradient
        && msg.head_degree == state.head_degree
        && msg.hop_count + 1 == state.hop_count
        && msg.head_id != state.head_id
}

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("region formation did not quiesce within {rounds} rounds")]
    NonConvergence { rounds: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormationStats {
    pub rounds: usize,
    pub messages: usize,
    pub malformed_dropped: usize,
    /// Times a node lost every neighbor backing its head and had to re-choose.
    pub repairs: usize,
    /// Times an inhibition adoption lowered a node's head degree (never expected).
    pub adoption_degree_drops: usize,
    /// Equal-degree, equal-hop choices settled by the tie-break rule.
    pub tie_breaks: usize,
    /// Largest hopcount held by any node in any round.
    pub max_hop_seen: u32,
}

#[derive(Debug, Clone)]
pub struct RegionOutcome {
    pub states: Vec<RegionState>,
    pub stats: FormationStats,
}

impl RegionOutcome {
    /// Members of each region keyed by head id, members ascending.
    pub fn regions(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut map: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for s in &self.states {
            map.entry(s.head_id).or_default().push(s.node);
        }
        map
    }

    /// `node head hopcount` per line.
    pub fn dump(&self) -> String {
        self.states
            .iter()
            .map(|s| format!("{} {} {}\n", s.node, s.head_id, s.hop_count))
            .collect()
    }
}

struct FormationNode {
    state: RegionState,
    own_degree: usize,
    /// Latest announcement of every neighbor.
    view: BTreeMap<NodeId, HeadMessage>,
    rng: ChaCha8Rng,
}

impl FormationNode {
    fn supported(&self) -> bool {
        self.state.is_head()
            || self.view.values().any(|m| {
                m.head_id == self.state.head_id && m.hop_count + 1 == self.state.hop_count
            })
    }

    /// Re-chooses the best head among itself and the neighbors' current
    /// announcements: highest degree, then fewest hops, then lowest id.
    fn repair(&mut self, gradient: u32) {
        let own = (self.state.node, 0, self.own_degree);
        let best = self
            .view
            .values()
            .filter(|m| m.hop_count < gradient)
            .map(|m| (m.head_id, m.hop_count + 1, m.head_degree))
            .chain(std::iter::once(own))
            .min_by(|a, b| b.2.cmp(&a.2).then(a.1.cmp(&b.1)).then(a.0.cmp(&b.0)))
            .expect("own candidate always present");
        self.state.adopt(best.0, best.1, best.2);
    }
}

/// Runs lateral inhibition to quiescence on `topology`.
///
/// A node whose neighbors no longer back its head (the neighbor it adopted
/// from has moved to a head it cannot follow within the bound) re-chooses
/// from what its neighbors currently announce. This keeps every region
/// connected with a well-formed gradient at quiescence.
pub fn run_region_formation(
    topology: &Graph,
    gradient: u32,
    seed: u64,
    tie_break: TieBreak,
    trace: Option<&mut Trace>,
) -> Result<RegionOutcome, RegionError> {
    let n = topology.node_count();
    let nodes: Vec<FormationNode> = (0..n)
        .map(|v| FormationNode {
            state: RegionState::init(v, topology.degree(v)),
            own_degree: topology.degree(v),
            view: BTreeMap::new(),
            rng: stream_rng(seed, stream::NODE_TIES + v as u64),
        })
        .collect();
    let initial = nodes.iter().map(|fnode| Some(fnode.state.announcement())).collect();
    let mut stats = FormationStats::default();
    let outcome = engine::run_rounds(
        topology,
        nodes,
        initial,
        engine::default_max_rounds(n),
        trace,
        |_, fnode, inbox| {
            if inbox.is_empty() {
                return None;
            }
            let before = fnode.state.announcement();
            for env in inbox {
                fnode.view.insert(env.from, env.payload);
                let degree_before = fnode.state.head_degree;
                if is_tie(&fnode.state, &env.payload, gradient) {
                    stats.tie_breaks += 1;
                }
                match process_head_message(
                    &mut fnode.state,
                    &env.payload,
                    gradient,
                    tie_break,
                    &mut fnode.rng,
                ) {
                    HeadUpdate::Malformed => stats.malformed_dropped += 1,
                    HeadUpdate::Adopted(_) if fnode.state.head_degree < degree_before => {
                        stats.adoption_degree_drops += 1
                    }
                    _ => {}
                }
            }
            if !fnode.supported() {
                fnode.repair(gradient);
                stats.repairs += 1;
            }
            stats.max_hop_seen = stats.max_hop_seen.max(fnode.state.hop_count);
            let after = fnode.state.announcement();
            (after != before).then_some(after)
        },
    )?;
    if !outcome.converged {
        return Err(RegionError::NonConvergence {
            rounds: outcome.rounds,
        });
    }
    stats.rounds = outcome.rounds;
    stats.messages = outcome.messages_sent;
    Ok(RegionOutcome {
        states: outcome.states.into_iter().map(|fnode| fnode.state).collect(),
        stats,
    })
}
