//! Link-gain predictors scored over the eligible nodes at an evaluation time.
//!
//! Four benchmarks (in-degree, PageRank, popularity-based, temporal-decay)
//! and the two recency models: recent-behavior dominant (`Rbdm`) and
//! recent-behavior non-dominant (`Rbndm`).

pub mod pagerank;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DegreeHistory, NodeIdx, Time};

pub use pagerank::{LinkGraph, PageRank};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorKind {
    Indegree,
    Pagerank,
    Pbp,
    Tbp,
    Rbdm,
    Rbndm,
    /// Pseudo-predictor that reads the future window. Only meaningful inside
    /// the evaluation harness as an upper bound.
    Oracle,
}

impl PredictorKind {
    /// The six real predictors, in report order.
    pub const ALL: [PredictorKind; 6] = [
        PredictorKind::Indegree,
        PredictorKind::Pagerank,
        PredictorKind::Pbp,
        PredictorKind::Tbp,
        PredictorKind::Rbdm,
        PredictorKind::Rbndm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PredictorKind::Indegree => "indegree",
            PredictorKind::Pagerank => "pagerank",
            PredictorKind::Pbp => "pbp",
            PredictorKind::Tbp => "tbp",
            PredictorKind::Rbdm => "rbdm",
            PredictorKind::Rbndm => "rbndm",
            PredictorKind::Oracle => "oracle",
        }
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PredictorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "indegree" => PredictorKind::Indegree,
            "pagerank" | "pr" => PredictorKind::Pagerank,
            "pbp" => PredictorKind::Pbp,
            "tbp" => PredictorKind::Tbp,
            "rbdm" => PredictorKind::Rbdm,
            "rbndm" => PredictorKind::Rbndm,
            "oracle" => PredictorKind::Oracle,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown predictor `{other}`"
                )))
            }
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictorParams {
    /// PBP recency weight.
    pub lambda: f64,
    /// Exponential decay rate per time unit (TBP, RBNDM aging).
    pub gamma: f64,
    /// Probability of following a link in PageRank.
    pub teleport: f64,
    pub pagerank_tol: f64,
    pub pagerank_max_iters: usize,
}

impl Default for PredictorParams {
    fn default() -> Self {
        PredictorParams {
            lambda: 0.98,
            gamma: 0.06,
            teleport: 0.9,
            pagerank_tol: 1e-12,
            pagerank_max_iters: 1000,
        }
    }
}

impl PredictorParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!(
                "lambda {} not in [0,1]",
                self.lambda
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma {} must be >= 0",
                self.gamma
            )));
        }
        if !(self.teleport > 0.0 && self.teleport < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "teleport {} not in (0,1)",
                self.teleport
            )));
        }
        if self.pagerank_tol.is_nan() || self.pagerank_tol <= 0.0 || self.pagerank_max_iters == 0 {
            return Err(Error::InvalidParameter(
                "pagerank tolerance and iteration cap must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Scores over the eligible node set at time `t`, sorted by node index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub predictor: PredictorKind,
    pub t: Time,
    pub params: PredictorParams,
    pub scores: Vec<(NodeIdx, f64)>,
}

impl ScoreVector {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn get(&self, node: NodeIdx) -> Option<f64> {
        self.scores
            .binary_search_by_key(&node, |&(n, _)| n)
            .ok()
            .map(|i| self.scores[i].1)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeIdx> + '_ {
        self.scores.iter().map(|&(n, _)| n)
    }

    pub fn values(&self) -> Vec<f64> {
        self.scores.iter().map(|&(_, s)| s).collect()
    }
}

/// Per-node dominance factor drawn from the empirical CDF of recent shares.
#[derive(Clone, Debug, PartialEq)]
pub enum DominanceWeights {
    Weights(Vec<(NodeIdx, f64)>),
    /// No node gained a link inside the past window.
    Degenerate,
}

/// `alpha_i = |{j : x_j <= x_i}| / N`. Ties share a value.
pub fn ecdf(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    values
        .iter()
        .map(|v| sorted.partition_point(|s| s.total_cmp(v).is_le()) as f64 / n)
        .collect()
}

fn shares(values: &[f64]) -> Option<Vec<f64>> {
    let total: f64 = values.iter().sum();
    (total > 0.0).then(|| values.iter().map(|v| v / total).collect())
}

/// Which way the dominance factor leans in [`dominance_mix`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Dominance {
    /// `alpha*recent + (1-alpha)*total`.
    Recent,
    /// `(1-alpha)*recent + alpha*total`.
    NonRecent,
}

/// Mixes recent and total shares with ECDF dominance weights.
///
/// `recent` and `total` are raw, nonnegative magnitudes per node. When the
/// recent magnitudes are all zero the result is the total share.
pub fn dominance_mix(recent: &[f64], total: &[f64], mode: Dominance) -> Vec<f64> {
    assert_eq!(recent.len(), total.len());
    let total_share = shares(total).unwrap_or_else(|| vec![0.0; total.len()]);
    let Some(recent_share) = shares(recent) else {
        return total_share;
    };
    let alpha = ecdf(&recent_share);
    recent_share
        .iter()
        .zip(&total_share)
        .zip(&alpha)
        .map(|((&r, &p), &a)| match mode {
            Dominance::Recent => a * r + (1.0 - a) * p,
            Dominance::NonRecent => (1.0 - a) * r + a * p,
        })
        .collect()
}

fn eligible(h: &DegreeHistory, t: Time) -> Result<Vec<NodeIdx>> {
    let nodes = h.eligible_nodes(t);
    if nodes.is_empty() {
        Err(Error::NoEligibleNodes(t))
    } else {
        Ok(nodes)
    }
}

fn check_window(tp: Time) -> Result<()> {
    if tp <= 0 {
        return Err(Error::InvalidParameter(format!(
            "past window must be positive, got {tp}"
        )));
    }
    Ok(())
}

fn vector(
    predictor: PredictorKind,
    t: Time,
    params: &PredictorParams,
    nodes: &[NodeIdx],
    values: Vec<f64>,
) -> ScoreVector {
    ScoreVector {
        predictor,
        t,
        params: *params,
        scores: nodes.iter().copied().zip(values).collect(),
    }
}

pub fn indegree_score(h: &DegreeHistory, t: Time) -> Result<ScoreVector> {
    let nodes = eligible(h, t)?;
    let values = nodes.iter().map(|&o| h.degree_at(o, t) as f64).collect();
    Ok(vector(
        PredictorKind::Indegree,
        t,
        &PredictorParams::default(),
        &nodes,
        values,
    ))
}

/// `k_o(t) - lambda * k_o(t - tp)`.
pub fn pbp_score(h: &DegreeHistory, t: Time, tp: Time, lambda: f64) -> Result<ScoreVector> {
    check_window(tp)?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "lambda {lambda} not in [0,1]"
        )));
    }
    let nodes = eligible(h, t)?;
    let values = nodes
        .iter()
        .map(|&o| h.degree_at(o, t) as f64 - lambda * h.degree_at(o, t - tp) as f64)
        .collect();
    let params = PredictorParams {
        lambda,
        ..PredictorParams::default()
    };
    Ok(vector(PredictorKind::Pbp, t, &params, &nodes, values))
}

/// Aged degree `sum exp(-gamma * (t - T))` over past receipts.
pub fn tbp_score(h: &DegreeHistory, t: Time, gamma: f64) -> Result<ScoreVector> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma {gamma} must be >= 0"
        )));
    }
    let nodes = eligible(h, t)?;
    let values = nodes.iter().map(|&o| h.aged_degree(o, t, gamma)).collect();
    let params = PredictorParams {
        gamma,
        ..PredictorParams::default()
    };
    Ok(vector(PredictorKind::Tbp, t, &params, &nodes, values))
}

fn recent_gains(h: &DegreeHistory, nodes: &[NodeIdx], t: Time, tp: Time) -> Vec<f64> {
    nodes
        .iter()
        .map(|&o| h.window_gain(o, t, tp) as f64)
        .collect()
}

pub fn dominance_weights(h: &DegreeHistory, t: Time, tp: Time) -> Result<DominanceWeights> {
    check_window(tp)?;
    let nodes = eligible(h, t)?;
    let gains = recent_gains(h, &nodes, t, tp);
    Ok(match shares(&gains) {
        None => DominanceWeights::Degenerate,
        Some(s) => DominanceWeights::Weights(nodes.into_iter().zip(ecdf(&s)).collect()),
    })
}

pub fn rbdm_score(h: &DegreeHistory, t: Time, tp: Time) -> Result<ScoreVector> {
    check_window(tp)?;
    let nodes = eligible(h, t)?;
    let recent = recent_gains(h, &nodes, t, tp);
    let total: Vec<f64> = nodes.iter().map(|&o| h.degree_at(o, t) as f64).collect();
    let values = dominance_mix(&recent, &total, Dominance::Recent);
    Ok(vector(
        PredictorKind::Rbdm,
        t,
        &PredictorParams::default(),
        &nodes,
        values,
    ))
}

/// Non-dominant mix; only the total term is aged.
pub fn rbndm_score(h: &DegreeHistory, t: Time, tp: Time, gamma: f64) -> Result<ScoreVector> {
    check_window(tp)?;
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma {gamma} must be >= 0"
        )));
    }
    let nodes = eligible(h, t)?;
    let recent = recent_gains(h, &nodes, t, tp);
    let total: Vec<f64> = nodes.iter().map(|&o| h.aged_degree(o, t, gamma)).collect();
    let values = dominance_mix(&recent, &total, Dominance::NonRecent);
    let params = PredictorParams {
        gamma,
        ..PredictorParams::default()
    };
    Ok(vector(PredictorKind::Rbndm, t, &params, &nodes, values))
}

/// PageRank over the snapshot of all links with time `<= t`, oriented
/// source to target. Returns the snapshot's nodes and their full rank vector.
pub fn pagerank_snapshot(
    h: &DegreeHistory,
    t: Time,
    params: &PredictorParams,
) -> Result<(Vec<NodeIdx>, PageRank)> {
    let edges = h.edges_up_to(t);
    let mut local: HashMap<NodeIdx, usize> = HashMap::new();
    let mut nodes: Vec<NodeIdx> = edges.iter().flat_map(|e| [e.source, e.target]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    if nodes.is_empty() {
        return Err(Error::NoEligibleNodes(t));
    }
    local.extend(nodes.iter().enumerate().map(|(i, &n)| (n, i)));
    let graph = LinkGraph::from_edges(
        nodes.len(),
        edges.iter().map(|e| (local[&e.source], local[&e.target])),
    );
    let pr = graph.pagerank(
        params.teleport,
        params.pagerank_tol,
        params.pagerank_max_iters,
    )?;
    Ok((nodes, pr))
}

pub fn pagerank_score(h: &DegreeHistory, t: Time, params: &PredictorParams) -> Result<ScoreVector> {
    let eligible_nodes = eligible(h, t)?;
    let (nodes, pr) = pagerank_snapshot(h, t, params)?;
    let values = eligible_nodes
        .iter()
        .map(|o| {
            let i = nodes
                .binary_search(o)
                .expect("eligible node missing from snapshot");
            pr.ranks[i]
        })
        .collect();
    Ok(vector(
        PredictorKind::Pagerank,
        t,
        params,
        &eligible_nodes,
        values,
    ))
}

/// Scores with the future window: each node gets its position in the true
/// ranking (future gain descending, node id ascending), best node highest.
/// All values are distinct.
pub fn oracle_score(h: &DegreeHistory, t: Time, tf: Time) -> Result<ScoreVector> {
    let nodes = eligible(h, t)?;
    let mut order: Vec<(usize, NodeIdx)> = nodes
        .iter()
        .map(|&o| (h.future_gain(o, t, tf), o))
        .collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let n = order.len();
    let mut scores: Vec<(NodeIdx, f64)> = order
        .into_iter()
        .enumerate()
        .map(|(rank, (_, o))| (o, (n - rank) as f64))
        .collect();
    scores.sort_by_key(|&(o, _)| o);
    Ok(ScoreVector {
        predictor: PredictorKind::Oracle,
        t,
        params: PredictorParams::default(),
        scores,
    })
}

/// Dispatches to the predictor named by `kind`.
pub fn score(
    h: &DegreeHistory,
    kind: PredictorKind,
    t: Time,
    tp: Time,
    params: &PredictorParams,
) -> Result<ScoreVector> {
    params.validate()?;
    let mut sv = match kind {
        PredictorKind::Indegree => indegree_score(h, t),
        PredictorKind::Pagerank => pagerank_score(h, t, params),
        PredictorKind::Pbp => pbp_score(h, t, tp, params.lambda),
        PredictorKind::Tbp => tbp_score(h, t, params.gamma),
        PredictorKind::Rbdm => rbdm_score(h, t, tp),
        PredictorKind::Rbndm => rbndm_score(h, t, tp, params.gamma),
        PredictorKind::Oracle => Err(Error::InvalidParameter(
            "the oracle needs a future window; use oracle_score".into(),
        )),
    }?;
    sv.params = *params;
    Ok(sv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LinkEvent;

    const EPS: f64 = 1e-12;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Two targets with recent gains (3, 1) in (expected t-30, t] and totals (4, 6).
    fn two_node() -> DegreeHistory {
        let mut ev = Vec::new();
        ev.push(LinkEvent::new("u0", "a", 100));
        for i in 0..3 {
            ev.push(LinkEvent::new(format!("u{i}"), "a", 490));
        }
        for i in 0..5 {
            ev.push(LinkEvent::new(format!("v{i}"), "b", 200));
        }
        ev.push(LinkEvent::new("v9", "b", 495));
        DegreeHistory::build(&ev).unwrap()
    }

    fn by_name(h: &DegreeHistory, sv: &ScoreVector) -> Vec<(String, f64)> {
        sv.scores
            .iter()
            .map(|&(n, s)| (h.name(n).to_string(), s))
            .collect()
    }

    #[test]
    fn indegree_counts() {
        let h = DegreeHistory::build(&[
            LinkEvent::new("u", "a", 1),
            LinkEvent::new("v", "a", 5),
            LinkEvent::new("u", "b", 3),
        ])
        .unwrap();
        let sv = indegree_score(&h, 5).unwrap();
        assert_eq!(by_name(&h, &sv), [("a".into(), 2.0), ("b".into(), 1.0)]);
        assert!(matches!(
            indegree_score(&h, 0),
            Err(Error::NoEligibleNodes(0))
        ));
    }

    #[test]
    fn pbp_hand_value() {
        // k(t)=10, k(t-tp)=4
        let mut ev: Vec<_> = (0..4)
            .map(|i| LinkEvent::new(format!("u{i}"), "x", 1))
            .collect();
        ev.extend((4..10).map(|i| LinkEvent::new(format!("u{i}"), "x", 8)));
        let h = DegreeHistory::build(&ev).unwrap();
        let sv = pbp_score(&h, 10, 5, 0.98).unwrap();
        assert!(close(sv.scores[0].1, 6.08, 1e-12));
    }

    #[test]
    fn pbp_limits() {
        let h = two_node();
        let deg = indegree_score(&h, 500).unwrap();
        let pbp0 = pbp_score(&h, 500, 30, 0.0).unwrap();
        assert_eq!(deg.values(), pbp0.values());
        let pbp1 = pbp_score(&h, 500, 30, 1.0).unwrap();
        assert_eq!(pbp1.values(), vec![3.0, 1.0]);
    }

    #[test]
    fn tbp_hand_value() {
        let h = DegreeHistory::build(&[LinkEvent::new("u", "x", 10), LinkEvent::new("v", "x", 0)])
            .unwrap();
        let sv = tbp_score(&h, 20, 0.06).unwrap();
        assert!(close(sv.scores[0].1, 0.850_006, 1e-6));
        assert!(close(
            sv.scores[0].1,
            (-0.6f64).exp() + (-1.2f64).exp(),
            EPS
        ));
        assert_eq!(tbp_score(&h, 20, 0.0).unwrap().values(), vec![2.0]);
    }

    #[test]
    fn ecdf_with_ties() {
        assert_eq!(ecdf(&[0.75, 0.25]), vec![1.0, 0.5]);
        let a = ecdf(&[0.25, 0.25, 0.5]);
        assert!(close(a[0], 2.0 / 3.0, EPS) && close(a[1], 2.0 / 3.0, EPS));
        assert_eq!(a[2], 1.0);
        assert_eq!(ecdf(&[0.1]), vec![1.0]);
    }

    #[test]
    fn dominance_weights_degenerate() {
        let h = two_node();
        match dominance_weights(&h, 500, 30).unwrap() {
            DominanceWeights::Weights(w) => {
                assert_eq!(w.iter().map(|x| x.1).collect::<Vec<_>>(), vec![1.0, 0.5])
            }
            DominanceWeights::Degenerate => panic!("expected weights"),
        }
        assert_eq!(
            dominance_weights(&h, 300, 30).unwrap(),
            DominanceWeights::Degenerate
        );
    }

    #[test]
    fn rbdm_and_rbndm_two_node() {
        let h = two_node();
        let d = rbdm_score(&h, 500, 30).unwrap().values();
        assert!(close(d[0], 0.75, EPS) && close(d[1], 0.425, EPS), "{d:?}");
        let nd = rbndm_score(&h, 500, 30, 0.0).unwrap().values();
        assert!(close(nd[0], 0.4, EPS) && close(nd[1], 0.425, EPS), "{nd:?}");
    }

    #[test]
    fn degenerate_window_falls_back_to_total_share() {
        let h = two_node();
        let d = rbdm_score(&h, 300, 30).unwrap().values();
        // totals at t=300 are (1, 5)
        assert!(close(d[0], 1.0 / 6.0, EPS) && close(d[1], 5.0 / 6.0, EPS));
        let nd = rbndm_score(&h, 300, 30, 0.0).unwrap().values();
        assert_eq!(d, nd);
    }

    #[test]
    fn single_node_models_score_one() {
        let h = DegreeHistory::build(&[LinkEvent::new("u", "x", 3)]).unwrap();
        assert_eq!(rbdm_score(&h, 3, 2).unwrap().values(), vec![1.0]);
        assert_eq!(rbndm_score(&h, 3, 2, 0.06).unwrap().values(), vec![1.0]);
    }

    #[test]
    fn pagerank_restricted_to_targets() {
        let h = DegreeHistory::build(&[LinkEvent::new("A", "B", 1)]).unwrap();
        let (nodes, pr) = pagerank_snapshot(&h, 1, &PredictorParams::default()).unwrap();
        assert_eq!(nodes.len(), 2);
        assert!(close(pr.ranks.iter().sum::<f64>(), 1.0, 1e-9));
        let sv = pagerank_score(&h, 1, &PredictorParams::default()).unwrap();
        assert_eq!(sv.len(), 1);
        assert!(close(sv.scores[0].1, 0.6552, 1e-3));
    }

    #[test]
    fn oracle_ranks_future_gain() {
        let h = two_node();
        // Between 300 and 500: a gains 3, b gains 1.
        let sv = oracle_score(&h, 300, 200).unwrap();
        assert!(sv.get(h.lookup("a").unwrap()).unwrap() > sv.get(h.lookup("b").unwrap()).unwrap());
    }

    #[test]
    fn predictor_names_round_trip() {
        for k in PredictorKind::ALL {
            assert_eq!(k.name().parse::<PredictorKind>().unwrap(), k);
        }
        assert!("fitness".parse::<PredictorKind>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(PredictorParams::default().validate().is_ok());
        let bad = PredictorParams {
            lambda: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = PredictorParams {
            teleport: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
