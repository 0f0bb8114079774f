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

//! Synchronous-round broadcast substrate.
//!
//! A payload queued by a node in round `t` reaches every one-hop neighbor at
//! the start of round `t + 1`. Inboxes are ordered by sender id. The run
//! stops at the first round in which no node queues anything.

use std::fmt::{self, Display, Write as _};

use thiserror::Error;

use crate::graph::{Graph, NodeId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("max_rounds must be at least 1")]
    NoRounds,
    #[error("expected {expected} node states, got {actual}")]
    StateCount { expected: usize, actual: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope<M> {
    pub from: NodeId,
    pub payload: M,
}

/// Per-node inboxes for the current round and broadcasts queued for the next.
#[derive(Debug, Clone)]
pub struct RoundMailbox<M> {
    inboxes: Vec<Vec<Envelope<M>>>,
    outbox: Vec<Option<M>>,
}

impl<M: Clone> RoundMailbox<M> {
    pub fn new(node_count: usize) -> Self {
        RoundMailbox {
            inboxes: vec![Vec::new(); node_count],
            outbox: vec![None; node_count],
        }
    }

    pub fn queue(&mut self, node: NodeId, payload: M) {
        self.outbox[node] = Some(payload);
    }

    pub fn pending(&self) -> usize {
        self.outbox.iter().filter(|m| m.is_some()).count()
    }

    /// Moves queued broadcasts into the neighbors' inboxes. Senders are
    /// visited in ascending order, which keeps every inbox sorted by sender.
    pub fn deliver(&mut self, g: &Graph) {
        for inbox in &mut self.inboxes {
            inbox.clear();
        }
        for (from, slot) in self.outbox.iter_mut().enumerate() {
            if let Some(payload) = slot.take() {
                for &to in g.neighbors(from) {
                    self.inboxes[to].push(Envelope {
                        from,
                        payload: payload.clone(),
                    });
                }
            }
        }
    }

    pub fn inbox(&self, node: NodeId) -> &[Envelope<M>] {
        &self.inboxes[node]
    }
}

/// Optional round-by-round record: `round node event payload` lines.
#[derive(Debug, Default, Clone)]
pub struct Trace {
    lines: Vec<String>,
}

impl Trace {
    pub fn record(&mut self, round: usize, node: NodeId, event: &str, payload: impl Display) {
        self.lines.push(format!("{round} {node} {event} {payload}"));
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }
}

impl Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            f.write_str(line)?;
            f.write_char('\n')?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EngineOutcome<S> {
    pub states: Vec<S>,
    /// Rounds executed, including the final quiet one.
    pub rounds: usize,
    /// `false` when `max_rounds` was reached with messages still queued.
    pub converged: bool,
    pub messages_sent: usize,
}

pub fn default_max_rounds(node_count: usize) -> usize {
    (4 * node_count).max(1)
}

/// Runs `step` on every node, every round, until quiescence or `max_rounds`.
///
/// `initial` holds the broadcasts queued before round 1. `step` receives the
/// node's inbox for the round and returns the payload to broadcast next, if any.
pub fn run_rounds<S, M, F>(
    g: &Graph,
    mut states: Vec<S>,
    initial: Vec<Option<M>>,
    max_rounds: usize,
    mut trace: Option<&mut Trace>,
    mut step: F,
) -> Result<EngineOutcome<S>, EngineError>
where
    M: Clone + Display,
    F: FnMut(NodeId, &mut S, &[Envelope<M>]) -> Option<M>,
{
    let n = g.node_count();
    if max_rounds == 0 {
        return Err(EngineError::NoRounds);
    }
    if states.len() != n || initial.len() != n {
        return Err(EngineError::StateCount {
            expected: n,
            actual: states.len().min(initial.len()),
        });
    }
    let mut mailbox = RoundMailbox::new(n);
    let mut messages_sent = 0;
    for (node, payload) in initial.into_iter().enumerate() {
        if let Some(payload) = payload {
            if let Some(t) = trace.as_deref_mut() {
                t.record(0, node, "send", &payload);
            }
            mailbox.queue(node, payload);
            messages_sent += 1;
        }
    }
    for round in 1..=max_rounds {
        mailbox.deliver(g);
        for (node, state) in states.iter_mut().enumerate() {
            if let Some(payload) = step(node, state, mailbox.inbox(node)) {
                if let Some(t) = trace.as_deref_mut() {
                    t.record(round, node, "send", &payload);
                }
                mailbox.queue(node, payload);
                messages_sent += 1;
            }
        }
        if mailbox.pending() == 0 {
            return Ok(EngineOutcome {
                states,
                rounds: round,
                converged: true,
                messages_sent,
            });
        }
    }
    Ok(EngineOutcome {
        states,
        rounds: max_rounds,
        converged: false,
        messages_sent,
    })
}
