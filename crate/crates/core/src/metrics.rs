//! Top-n ranking metrics: precision, novelty, AUC and Kendall's tau.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeIdx, Time};
use crate::predictors::{PredictorKind, ScoreVector};

/// Score descending, then node ascending.
fn rank_order(a: &(NodeIdx, f64), b: &(NodeIdx, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// The `n` best nodes under the deterministic tie-break.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedList {
    pub n: usize,
    pub entries: Vec<(NodeIdx, f64)>,
    /// Fewer than `n` nodes were available.
    pub short: bool,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeIdx> + '_ {
        self.entries.iter().map(|&(n, _)| n)
    }

    fn node_set(&self) -> HashSet<NodeIdx> {
        self.nodes().collect()
    }
}

pub fn top_n(scores: &[(NodeIdx, f64)], n: usize) -> RankedList {
    let mut entries = scores.to_vec();
    let short = entries.len() < n;
    if !short && n < entries.len() {
        entries.select_nth_unstable_by(n, rank_order);
        entries.truncate(n);
    }
    entries.sort_by(rank_order);
    RankedList { n, entries, short }
}

fn check_n(n: usize, lists: &[&RankedList]) -> Result<()> {
    for l in lists {
        if l.n != n {
            return Err(Error::SizeMismatch {
                expected: n,
                found: l.n,
            });
        }
    }
    Ok(())
}

/// Intersection size and `D_n / n`. A short list divides by its own length.
pub fn precision_at_n(pred: &RankedList, real: &RankedList, n: usize) -> Result<(usize, f64)> {
    check_n(n, &[pred, real])?;
    let real_set = real.node_set();
    let common = pred.nodes().filter(|o| real_set.contains(o)).count();
    let denom = n.min(pred.len().max(real.len()));
    if denom == 0 {
        return Err(Error::Undefined("precision of empty lists"));
    }
    Ok((common, common as f64 / denom as f64))
}

/// Novelty counts for one sample.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct NoveltyCounts {
    /// Predicted nodes that are truly novel.
    pub ppo: usize,
    /// Truly novel nodes: in the real top-n but not the past top-n.
    pub pro: usize,
}

impl NoveltyCounts {
    /// `P_po / P_ro`, undefined when nothing novel entered the top-n.
    pub fn value(&self) -> Option<f64> {
        (self.pro > 0).then(|| self.ppo as f64 / self.pro as f64)
    }
}

pub fn novelty_qn(
    pred: &RankedList,
    real: &RankedList,
    past: &RankedList,
    n: usize,
) -> Result<NoveltyCounts> {
    check_n(n, &[pred, real, past])?;
    let past_set = past.node_set();
    let novel: HashSet<NodeIdx> = real.nodes().filter(|o| !past_set.contains(o)).collect();
    let ppo = pred.nodes().filter(|o| novel.contains(o)).count();
    Ok(NoveltyCounts {
        ppo,
        pro: novel.len(),
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AucMode {
    /// Positives are the real top-n, negatives every other eligible node.
    #[default]
    Classwise,
    /// Predictor scores of the predicted top-n against those of the real
    /// top-n, pair by pair.
    Literal,
}

impl fmt::Display for AucMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AucMode::Classwise => "classwise",
            AucMode::Literal => "literal",
        })
    }
}

impl FromStr for AucMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classwise" => Ok(AucMode::Classwise),
            "literal" => Ok(AucMode::Literal),
            other => Err(Error::InvalidParameter(format!(
                "unknown auc mode `{other}`"
            ))),
        }
    }
}

/// Twice the number of won pairs `(a, b)` with `a` from `left` and `b` from
/// `right`: 2 per strict win, 1 per tie.
fn doubled_wins(left: &[f64], right: &[f64]) -> u64 {
    let mut right = right.to_vec();
    right.sort_by(f64::total_cmp);
    left.iter()
        .map(|x| {
            let below = right.partition_point(|r| r.total_cmp(x).is_lt());
            let not_above = right.partition_point(|r| r.total_cmp(x).is_le());
            (2 * below + (not_above - below)) as u64
        })
        .sum()
}

fn pair_average(left: &[f64], right: &[f64]) -> Result<f64> {
    if left.is_empty() || right.is_empty() {
        return Err(Error::Undefined("auc needs both comparison sets nonempty"));
    }
    let wins = doubled_wins(left, right) as f64 / 2.0;
    Ok(wins / (left.len() as f64 * right.len() as f64))
}

pub fn auc(pred: &ScoreVector, real: &RankedList, n: usize, mode: AucMode) -> Result<f64> {
    check_n(n, &[real])?;
    if real.is_empty() {
        return Err(Error::Undefined("auc with an empty real list"));
    }
    let score_of = |o: NodeIdx| {
        pred.get(o)
            .ok_or_else(|| Error::InvalidParameter(format!("node {} has no predictor score", o.0)))
    };
    let positives: Vec<f64> = real.nodes().map(score_of).collect::<Result<_>>()?;
    match mode {
        AucMode::Literal => {
            let predicted: Vec<f64> = top_n(&pred.scores, n).entries.iter().map(|e| e.1).collect();
            pair_average(&predicted, &positives)
        }
        AucMode::Classwise => {
            let real_set = real.node_set();
            let negatives: Vec<f64> = pred
                .scores
                .iter()
                .filter(|(o, _)| !real_set.contains(o))
                .map(|&(_, s)| s)
                .collect();
            pair_average(&positives, &negatives)
        }
    }
}

/// Pair counts behind a Kendall tau value.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct TauCounts {
    pub concordant: u64,
    pub discordant: u64,
}

impl TauCounts {
    pub fn tau(&self) -> f64 {
        let total = self.concordant + self.discordant;
        if total == 0 {
            0.0
        } else {
            (self.concordant as f64 - self.discordant as f64) / total as f64
        }
    }
}

fn tied_pairs(sorted: &[f64]) -> u64 {
    let mut ties = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            ties += run * (run - 1) / 2;
            run = 1;
        }
    }
    ties + run * (run - 1) / 2
}

/// Merge sort on the second component, counting strict inversions.
fn merge_count(v: &mut [(f64, f64)], buf: &mut Vec<(f64, f64)>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], buf) + merge_count(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j].1 < v[i].1 {
            swaps += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Concordant and discordant pair counts, `O(n log n)`. Pairs tied in either
/// sequence count as neither.
pub fn tau_counts(x: &[f64], y: &[f64]) -> Result<TauCounts> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let n = x.len() as u64;
    if n < 2 {
        return Err(Error::Undefined("kendall tau needs at least two nodes"));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("NaN score".into()));
    }
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let total = n * (n - 1) / 2;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let tied_x = tied_pairs(&xs);
    let mut tied_xy = 0u64;
    let mut run = 1u64;
    for w in pairs.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            tied_xy += run * (run - 1) / 2;
            run = 1;
        }
    }
    tied_xy += run * (run - 1) / 2;

    let mut buf = Vec::with_capacity(pairs.len());
    let discordant = merge_count(&mut pairs, &mut buf);
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let tied_y = tied_pairs(&ys);

    let concordant = total + tied_xy - tied_x - tied_y - discordant;
    Ok(TauCounts {
        concordant,
        discordant,
    })
}

pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    tau_counts(x, y).map(|c| c.tau())
}

/// One predictor evaluated at one sample time for one list size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub novelty: Option<f64>,
    pub auc: f64,
    pub tau: f64,
    pub dn: usize,
    pub ppo: usize,
    pub pro: usize,
    pub c: u64,
    pub d: u64,
    pub t: Time,
    pub tp: Time,
    pub tf: Time,
    pub n: usize,
    pub predictor: PredictorKind,
    pub seed: u64,
    pub short_list: bool,
    pub future_clipped: bool,
}
