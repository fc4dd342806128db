//! Timestamped evolving network with windowed degree queries.
//!
//! Window conventions used throughout the crate:
//!
//! * "degree up to `t`" counts receipts at times `<= t`,
//! * the past window of length `tp` is `(t - tp, t]`,
//! * the future window of length `tf` is `(t, t + tf]`.
//!
//! Past and future are therefore disjoint, and a window that reaches before
//! the first event simply contributes nothing.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer time unit (day or month index since the dataset origin).
pub type Time = i64;

/// One timestamped link receipt: `source` links to `target` at `time`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkEvent {
    pub source: String,
    pub target: String,
    pub time: Time,
}

impl LinkEvent {
    pub fn new(source: impl Into<String>, target: impl Into<String>, time: Time) -> Self {
        LinkEvent {
            source: source.into(),
            target: target.into(),
            time,
        }
    }

    /// Checks the event invariants, returning the violated rule.
    pub fn check(&self) -> std::result::Result<(), &'static str> {
        if self.time < 0 {
            return Err("negative time");
        }
        if self.source == self.target {
            return Err("self-link");
        }
        if self.source.is_empty() || self.target.is_empty() {
            return Err("empty node id");
        }
        Ok(())
    }

    /// Canonical ordering key: time, then source, then target.
    pub(crate) fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time
            .cmp(&other.time)
            .then_with(|| self.source.cmp(&other.source))
            .then_with(|| self.target.cmp(&other.target))
    }
}

/// Dense node index. Indices follow the lexicographic order of node ids, so
/// comparing indices is the same as comparing ids.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeIdx(pub u32);

impl NodeIdx {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A directed edge of the event stream in index space.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub time: Time,
    pub source: NodeIdx,
    pub target: NodeIdx,
}

/// Immutable per-node receipt history of an event stream.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeHistory {
    names: Vec<String>,
    index: HashMap<String, NodeIdx>,
    receipts: Vec<Vec<Time>>,
    edges: Vec<Edge>,
    t_min: Time,
    t_max: Time,
}

impl DegreeHistory {
    /// Builds the history. Any permutation of `events` yields an identical
    /// structure.
    pub fn build(events: &[LinkEvent]) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (index, ev) in events.iter().enumerate() {
            ev.check().map_err(|reason| Error::InvalidEvent {
                index,
                reason: reason.to_string(),
            })?;
        }

        let mut names: Vec<String> = events
            .iter()
            .flat_map(|e| [e.source.clone(), e.target.clone()])
            .collect();
        names.sort_unstable();
        names.dedup();
        let index: HashMap<String, NodeIdx> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), NodeIdx(i as u32)))
            .collect();

        let mut receipts = vec![Vec::new(); names.len()];
        let mut edges = Vec::with_capacity(events.len());
        let (mut t_min, mut t_max) = (Time::MAX, Time::MIN);
        for ev in events {
            let source = index[&ev.source];
            let target = index[&ev.target];
            receipts[target.index()].push(ev.time);
            edges.push(Edge {
                time: ev.time,
                source,
                target,
            });
            t_min = t_min.min(ev.time);
            t_max = t_max.max(ev.time);
        }
        for r in &mut receipts {
            r.sort_unstable();
        }
        edges.sort_unstable();

        Ok(DegreeHistory {
            names,
            index,
            receipts,
            edges,
            t_min,
            t_max,
        })
    }

    pub fn t_min(&self) -> Time {
        self.t_min
    }

    pub fn t_max(&self) -> Time {
        self.t_max
    }

    /// Number of distinct node ids (sources and targets).
    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    /// Number of accepted link events.
    pub fn event_count(&self) -> usize {
        self.edges.len()
    }

    /// Nodes that received at least one link.
    pub fn target_count(&self) -> usize {
        self.receipts.iter().filter(|r| !r.is_empty()).count()
    }

    pub fn lookup(&self, id: &str) -> Result<NodeIdx> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn name(&self, node: NodeIdx) -> &str {
        &self.names[node.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Sorted receipt times of `node`.
    pub fn receipts(&self, node: NodeIdx) -> &[Time] {
        &self.receipts[node.index()]
    }

    /// All edges sorted by (time, source, target).
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edges with time `<= t`.
    pub fn edges_up_to(&self, t: Time) -> &[Edge] {
        let end = self.edges.partition_point(|e| e.time <= t);
        &self.edges[..end]
    }

    /// `k_o(t)`: receipts at or before `t`.
    pub fn degree_at(&self, node: NodeIdx, t: Time) -> usize {
        self.receipts(node).partition_point(|&x| x <= t)
    }

    /// Receipts in `(t - tp, t]`.
    pub fn window_gain(&self, node: NodeIdx, t: Time, tp: Time) -> usize {
        self.degree_at(node, t) - self.degree_at(node, t.saturating_sub(tp))
    }

    /// Receipts in `(t, t + tf]`: the ground truth predictors are scored on.
    pub fn future_gain(&self, node: NodeIdx, t: Time, tf: Time) -> usize {
        self.degree_at(node, t.saturating_add(tf)) - self.degree_at(node, t)
    }

    /// Sum of `exp(-gamma * (t - T))` over receipt times `T <= t`.
    pub fn aged_degree(&self, node: NodeIdx, t: Time, gamma: f64) -> f64 {
        let r = self.receipts(node);
        let end = r.partition_point(|&x| x <= t);
        if gamma == 0.0 {
            return end as f64;
        }
        r[..end]
            .iter()
            .map(|&at| (-gamma * (t - at) as f64).exp())
            .sum()
    }

    /// Nodes with at least one receipt at or before `t`, in id order.
    pub fn eligible_nodes(&self, t: Time) -> Vec<NodeIdx> {
        self.receipts
            .iter()
            .enumerate()
            .filter(|(_, r)| r.first().is_some_and(|&first| first <= t))
            .map(|(i, _)| NodeIdx(i as u32))
            .collect()
    }

    /// Convenience lookups by node id.
    pub fn degree_at_id(&self, id: &str, t: Time) -> Result<usize> {
        Ok(self.degree_at(self.lookup(id)?, t))
    }

    pub fn window_gain_id(&self, id: &str, t: Time, tp: Time) -> Result<usize> {
        Ok(self.window_gain(self.lookup(id)?, t, tp))
    }

    pub fn future_gain_id(&self, id: &str, t: Time, tf: Time) -> Result<usize> {
        Ok(self.future_gain(self.lookup(id)?, t, tf))
    }

    pub fn aged_degree_id(&self, id: &str, t: Time, gamma: f64) -> Result<f64> {
        Ok(self.aged_degree(self.lookup(id)?, t, gamma))
    }
}

/// Evaluation time plus past and future window lengths.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub t: Time,
    pub past: Time,
    pub future: Time,
}

impl WindowConfig {
    pub fn new(t: Time, past: Time, future: Time) -> Result<Self> {
        if past <= 0 || future <= 0 {
            return Err(Error::InvalidParameter(format!(
                "window lengths must be positive (tp={past}, tf={future})"
            )));
        }
        Ok(WindowConfig { t, past, future })
    }
}
