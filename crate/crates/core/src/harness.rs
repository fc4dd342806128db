//! Evaluation protocol: random evaluation times from the middle third of
//! the history, every predictor scored at each time, metrics averaged.
//!
//! Samples are evaluated in parallel but always reduced in
//! (predictor, n, sample) order, so output does not depend on the number of
//! threads.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DegreeHistory, NodeIdx, Time};
use crate::metrics::{auc, novelty_qn, precision_at_n, tau_counts, top_n, AucMode, EvalReport};
use crate::predictors::{self, PredictorKind, PredictorParams, ScoreVector};

/// How the history is cut into thirds for sampling.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThirdsBasis {
    /// Thirds of `t_max - t_min`.
    #[default]
    Time,
    /// Times of the events at one and two thirds of the event count.
    Events,
}

/// Ranking that defines "already in the top-n" for novelty.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoveltyReference {
    /// Total degree at `t`.
    #[default]
    Degree,
    /// Gain inside the past window.
    Recent,
}

macro_rules! str_enum {
    ($ty:ty { $($name:literal => $variant:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(Error::InvalidParameter(format!(
                        "unknown {} `{other}`", stringify!($ty)
                    ))),
                }
            }
        }
    };
}

str_enum!(ThirdsBasis { "time" => ThirdsBasis::Time, "events" => ThirdsBasis::Events });
str_enum!(NoveltyReference { "degree" => NoveltyReference::Degree, "recent" => NoveltyReference::Recent });

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub kind: PredictorKind,
    pub params: PredictorParams,
}

impl PredictorSpec {
    pub fn new(kind: PredictorKind, params: PredictorParams) -> Self {
        PredictorSpec { kind, params }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub sample_count: usize,
    pub seed: u64,
    pub tp: Time,
    pub tf: Time,
    pub n_values: Vec<usize>,
    pub predictors: Vec<PredictorSpec>,
    pub auc_mode: AucMode,
    pub thirds: ThirdsBasis,
    pub novelty_reference: NoveltyReference,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            sample_count: 10,
            seed: 1,
            tp: 30,
            tf: 30,
            n_values: vec![50, 100, 200],
            predictors: PredictorKind::ALL
                .iter()
                .map(|&k| PredictorSpec::new(k, PredictorParams::default()))
                .collect(),
            auc_mode: AucMode::Classwise,
            thirds: ThirdsBasis::Time,
            novelty_reference: NoveltyReference::Degree,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::InvalidParameter("sample count must be >= 1".into()));
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(Error::InvalidParameter("top-n sizes must be >= 1".into()));
        }
        if self.tp <= 0 || self.tf <= 0 {
            return Err(Error::InvalidParameter(
                "window lengths must be positive".into(),
            ));
        }
        if self.predictors.is_empty() {
            return Err(Error::InvalidParameter("no predictors selected".into()));
        }
        for p in &self.predictors {
            p.params.validate()?;
        }
        Ok(())
    }
}

/// Draws `sample_count` integer times uniformly from the middle third.
pub fn sample_times(h: &DegreeHistory, cfg: &ProtocolConfig) -> Result<Vec<Time>> {
    let (t_min, t_max) = (h.t_min(), h.t_max());
    let span = t_max - t_min;
    let too_small = Error::SpanTooSmall { t_min, t_max };
    if span < 3 {
        return Err(too_small);
    }
    let (lo, hi) = match cfg.thirds {
        ThirdsBasis::Time => (t_min + span / 3, t_min + 2 * span / 3),
        ThirdsBasis::Events => {
            let edges = h.edges();
            let m = edges.len();
            (edges[m / 3].time, edges[2 * m / 3].time)
        }
    };
    if hi <= lo {
        return Err(too_small);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok((0..cfg.sample_count)
        .map(|_| rng.gen_range(lo..hi))
        .collect())
}

fn score_for(
    h: &DegreeHistory,
    spec: &PredictorSpec,
    t: Time,
    tp: Time,
    tf: Time,
) -> Result<ScoreVector> {
    match spec.kind {
        PredictorKind::Oracle => predictors::oracle_score(h, t, tf),
        kind => predictors::score(h, kind, t, tp, &spec.params),
    }
}

fn scored(nodes: &[NodeIdx], values: impl Fn(NodeIdx) -> f64) -> Vec<(NodeIdx, f64)> {
    nodes.iter().map(|&o| (o, values(o))).collect()
}

/// Evaluates one predictor at time `t` for every list size in `n_values`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_sample(
    h: &DegreeHistory,
    t: Time,
    spec: &PredictorSpec,
    tp: Time,
    tf: Time,
    n_values: &[usize],
    auc_mode: AucMode,
    novelty_reference: NoveltyReference,
    seed: u64,
) -> Result<Vec<EvalReport>> {
    let pred = score_for(h, spec, t, tp, tf)?;
    let nodes: Vec<NodeIdx> = pred.nodes().collect();
    let truth = scored(&nodes, |o| h.future_gain(o, t, tf) as f64);
    let past = match novelty_reference {
        NoveltyReference::Degree => scored(&nodes, |o| h.degree_at(o, t) as f64),
        NoveltyReference::Recent => scored(&nodes, |o| h.window_gain(o, t, tp) as f64),
    };
    let pred_values = pred.values();
    let truth_values: Vec<f64> = truth.iter().map(|e| e.1).collect();
    let tau = if nodes.len() >= 2 {
        tau_counts(&pred_values, &truth_values)?
    } else {
        return Err(Error::Undefined("fewer than two eligible nodes"));
    };

    n_values
        .iter()
        .map(|&n| {
            let pred_list = top_n(&pred.scores, n);
            let real_list = top_n(&truth, n);
            let past_list = top_n(&past, n);
            let (dn, precision) = precision_at_n(&pred_list, &real_list, n)?;
            let novelty = novelty_qn(&pred_list, &real_list, &past_list, n)?;
            let auc = auc(&pred, &real_list, n, auc_mode)?;
            Ok(EvalReport {
                precision,
                novelty: novelty.value(),
                auc,
                tau: tau.tau(),
                dn,
                ppo: novelty.ppo,
                pro: novelty.pro,
                c: tau.concordant,
                d: tau.discordant,
                t,
                tp,
                tf,
                n,
                predictor: spec.kind,
                seed,
                short_list: real_list.short,
                future_clipped: t + tf > h.t_max(),
            })
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn evaluate_once(
    h: &DegreeHistory,
    t: Time,
    spec: &PredictorSpec,
    tp: Time,
    tf: Time,
    n: usize,
    auc_mode: AucMode,
) -> Result<EvalReport> {
    let mut v = evaluate_sample(
        h,
        t,
        spec,
        tp,
        tf,
        &[n],
        auc_mode,
        NoveltyReference::Degree,
        0,
    )?;
    Ok(v.remove(0))
}

/// Mean and population standard deviation over defined samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: Option<f64>,
    pub stddev: Option<f64>,
    pub count: usize,
    /// Samples where the metric was undefined.
    pub excluded: usize,
}

impl MetricStats {
    /// Sums in sorted order so the result is independent of sample order.
    pub fn from_values(values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let mut defined = Vec::new();
        let mut excluded = 0;
        for v in values {
            match v {
                Some(x) => defined.push(x),
                None => excluded += 1,
            }
        }
        defined.sort_by(f64::total_cmp);
        let count = defined.len();
        if count == 0 {
            return MetricStats {
                mean: None,
                stddev: None,
                count,
                excluded,
            };
        }
        let mean = defined.iter().sum::<f64>() / count as f64;
        let mut dev: Vec<f64> = defined.iter().map(|x| (x - mean) * (x - mean)).collect();
        dev.sort_by(f64::total_cmp);
        let var = dev.iter().sum::<f64>() / count as f64;
        MetricStats {
            mean: Some(mean),
            stddev: Some(var.sqrt()),
            count,
            excluded,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub precision: MetricStats,
    pub novelty: MetricStats,
    pub auc: MetricStats,
    pub tau: MetricStats,
    pub failed_samples: usize,
    pub short_list_samples: usize,
    pub clipped_samples: usize,
    pub samples: Vec<EvalReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictorSummary {
    pub predictor: PredictorKind,
    pub params: PredictorParams,
    pub per_n: Vec<SizeSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub t_min: Time,
    pub t_max: Time,
    pub seed: u64,
    pub tp: Time,
    pub tf: Time,
    pub auc_mode: AucMode,
    pub times: Vec<Time>,
    pub results: Vec<PredictorSummary>,
}

pub fn run_protocol(h: &DegreeHistory, cfg: &ProtocolConfig) -> Result<ProtocolReport> {
    cfg.validate()?;
    let times = sample_times(h, cfg)?;
    run_protocol_at(h, cfg, &times)
}

/// Runs the protocol at fixed evaluation times.
pub fn run_protocol_at(
    h: &DegreeHistory,
    cfg: &ProtocolConfig,
    times: &[Time],
) -> Result<ProtocolReport> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = (0..cfg.predictors.len())
        .flat_map(|p| (0..times.len()).map(move |s| (p, s)))
        .collect();
    let evaluated: Vec<Result<Vec<EvalReport>>> = cells
        .par_iter()
        .map(|&(p, s)| {
            evaluate_sample(
                h,
                times[s],
                &cfg.predictors[p],
                cfg.tp,
                cfg.tf,
                &cfg.n_values,
                cfg.auc_mode,
                cfg.novelty_reference,
                cfg.seed,
            )
        })
        .collect();

    let mut results = Vec::with_capacity(cfg.predictors.len());
    for (p, spec) in cfg.predictors.iter().enumerate() {
        let per_sample = &evaluated[p * times.len()..(p + 1) * times.len()];
        let failures: Vec<&Error> = per_sample.iter().filter_map(|r| r.as_ref().err()).collect();
        if failures.len() == per_sample.len() {
            log::warn!(
                "{}: every sample failed, first error: {}",
                spec.kind,
                failures[0]
            );
            return Err(Error::AllSamplesFailed(per_sample.len()));
        }
        for e in &failures {
            log::warn!("{}: sample skipped: {e}", spec.kind);
        }
        let ok: Vec<&Vec<EvalReport>> = per_sample.iter().filter_map(|r| r.as_ref().ok()).collect();
        let per_n = cfg
            .n_values
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let samples: Vec<EvalReport> = ok.iter().map(|v| v[k].clone()).collect();
                SizeSummary {
                    n,
                    precision: MetricStats::from_values(samples.iter().map(|r| Some(r.precision))),
                    novelty: MetricStats::from_values(samples.iter().map(|r| r.novelty)),
                    auc: MetricStats::from_values(samples.iter().map(|r| Some(r.auc))),
                    tau: MetricStats::from_values(samples.iter().map(|r| Some(r.tau))),
                    failed_samples: failures.len(),
                    short_list_samples: samples.iter().filter(|r| r.short_list).count(),
                    clipped_samples: samples.iter().filter(|r| r.future_clipped).count(),
                    samples,
                }
            })
            .collect();
        results.push(PredictorSummary {
            predictor: spec.kind,
            params: spec.params,
            per_n,
        });
    }
    Ok(ProtocolReport {
        t_min: h.t_min(),
        t_max: h.t_max(),
        seed: cfg.seed,
        tp: cfg.tp,
        tf: cfg.tf,
        auc_mode: cfg.auc_mode,
        times: times.to_vec(),
        results,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Past window fixed, future window swept.
    FutureOnly,
    /// Past and future windows equal and swept together.
    JointPastFuture,
}

str_enum!(SweepAxis { "tf" => SweepAxis::FutureOnly, "joint" => SweepAxis::JointPastFuture });

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::FutureOnly => "tf",
            SweepAxis::JointPastFuture => "joint",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<Time>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidParameter(
                "sweep needs at least one value".into(),
            ));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "sweep values must be strictly ascending".into(),
            ));
        }
        if self.values[0] <= 0 {
            return Err(Error::InvalidParameter(
                "sweep values must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: Time,
    pub report: ProtocolReport,
}

/// Runs the protocol once per swept value, reusing one set of sample times.
pub fn run_sweep(
    h: &DegreeHistory,
    cfg: &ProtocolConfig,
    sweep: &SweepSpec,
) -> Result<Vec<SweepRow>> {
    sweep.validate()?;
    cfg.validate()?;
    let times = sample_times(h, cfg)?;
    sweep
        .values
        .iter()
        .map(|&value| {
            let mut c = cfg.clone();
            match sweep.axis {
                SweepAxis::FutureOnly => c.tf = value,
                SweepAxis::JointPastFuture => {
                    c.tp = value;
                    c.tf = value;
                }
            }
            Ok(SweepRow {
                value,
                report: run_protocol_at(h, &c, &times)?,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlotRow {
    pub predictor: PredictorKind,
    pub n: usize,
    pub swept_value: Time,
    pub metric: &'static str,
    pub mean: Option<f64>,
    pub stddev: Option<f64>,
}

pub fn plot_rows(report: &ProtocolReport, swept_value: Time) -> Vec<PlotRow> {
    let mut rows = Vec::new();
    for r in &report.results {
        for s in &r.per_n {
            for (metric, stats) in [
                ("precision", &s.precision),
                ("novelty", &s.novelty),
                ("auc", &s.auc),
                ("tau", &s.tau),
            ] {
                rows.push(PlotRow {
                    predictor: r.predictor,
                    n: s.n,
                    swept_value,
                    metric,
                    mean: stats.mean,
                    stddev: stats.stddev,
                });
            }
        }
    }
    rows
}

pub fn plot_csv(rows: &[PlotRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut s = String::from("predictor,n,swept_value,metric,mean,stddev\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.predictor,
            r.n,
            r.swept_value,
            r.metric,
            opt(r.mean),
            opt(r.stddev)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LinkEvent;

    fn spread(span: Time) -> DegreeHistory {
        let ev: Vec<LinkEvent> = (0..=span)
            .map(|t| LinkEvent::new(format!("u{}", t % 7), format!("o{}", t % 5), t))
            .collect();
        DegreeHistory::build(&ev).unwrap()
    }

    #[test]
    fn samples_in_middle_third() {
        let h = spread(300);
        let cfg = ProtocolConfig::default();
        let times = sample_times(&h, &cfg).unwrap();
        assert_eq!(times.len(), 10);
        assert!(times.iter().all(|&t| (100..200).contains(&t)), "{times:?}");
        assert_eq!(times, sample_times(&h, &cfg).unwrap());
    }

    #[test]
    fn span_too_small() {
        let h = spread(2);
        assert!(matches!(
            sample_times(&h, &ProtocolConfig::default()),
            Err(Error::SpanTooSmall { .. })
        ));
    }

    #[test]
    fn event_thirds() {
        let h = spread(300);
        let cfg = ProtocolConfig {
            thirds: ThirdsBasis::Events,
            ..Default::default()
        };
        let times = sample_times(&h, &cfg).unwrap();
        assert!(times.iter().all(|&t| (100..200).contains(&t)));
    }

    #[test]
    fn stats_exclusion_and_single_sample() {
        let s = MetricStats::from_values([Some(1.0), None]);
        assert_eq!(s.mean, Some(1.0));
        assert_eq!(s.excluded, 1);
        assert_eq!(s.count, 1);
        let s = MetricStats::from_values([Some(0.25)]);
        assert_eq!((s.mean, s.stddev), (Some(0.25), Some(0.0)));
        let s = MetricStats::from_values([None]);
        assert_eq!(s.mean, None);
    }

    #[test]
    fn stats_permutation_invariant() {
        let v = [0.1, 0.7, 0.3333, 1e-9, 0.9];
        let a = MetricStats::from_values(v.iter().map(|&x| Some(x)));
        let b = MetricStats::from_values(v.iter().rev().map(|&x| Some(x)));
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_validation() {
        let bad = SweepSpec {
            axis: SweepAxis::JointPastFuture,
            values: vec![20, 10],
        };
        assert!(bad.validate().is_err());
        assert!(SweepSpec {
            axis: SweepAxis::FutureOnly,
            values: vec![]
        }
        .validate()
        .is_err());
    }
}
