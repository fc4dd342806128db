use proptest::prelude::*;

use trendlab::graph::{DegreeHistory, LinkEvent, NodeIdx};
use trendlab::metrics::{auc, kendall_tau, novelty_qn, precision_at_n, top_n, AucMode};
use trendlab::predictors::{self, DominanceWeights, PredictorKind, PredictorParams, ScoreVector};
use trendlab::{ingest, Time};

fn events() -> impl Strategy<Value = Vec<LinkEvent>> {
    prop::collection::vec((0u8..8, 0u8..8, 0i64..40), 1..40).prop_map(|raw| {
        raw.into_iter()
            .map(|(s, t, time)| {
                let t = if s == t { (t + 1) % 8 } else { t };
                LinkEvent::new(format!("n{s}"), format!("n{t}"), time)
            })
            .collect()
    })
}

fn scores(len: usize) -> impl Strategy<Value = Vec<(NodeIdx, f64)>> {
    prop::collection::vec(0u32..20, len).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, s)| (NodeIdx(i as u32), f64::from(s)))
            .collect()
    })
}

fn vector(scores: Vec<(NodeIdx, f64)>) -> ScoreVector {
    ScoreVector {
        predictor: PredictorKind::Indegree,
        t: 0,
        params: PredictorParams::default(),
        scores,
    }
}

proptest! {
    #[test]
    fn history_ignores_event_order(ev in events(), seed in any::<u64>()) {
        let mut shuffled = ev.clone();
        let k = (seed as usize) % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        prop_assert_eq!(DegreeHistory::build(&ev).unwrap(), DegreeHistory::build(&shuffled).unwrap());
    }

    #[test]
    fn windows_partition_degree(ev in events(), t in -2i64..45, tp in 1i64..20, tf in 1i64..20) {
        let h = DegreeHistory::build(&ev).unwrap();
        for i in 0..h.node_count() {
            let o = NodeIdx(i as u32);
            prop_assert!(h.degree_at(o, t) <= h.degree_at(o, t + 1));
            prop_assert_eq!(h.window_gain(o, t, tp), h.degree_at(o, t) - h.degree_at(o, t - tp));
            prop_assert_eq!(h.future_gain(o, t, tf), h.degree_at(o, t + tf) - h.degree_at(o, t));
            let aged = h.aged_degree(o, t, 0.1);
            prop_assert!(aged <= h.degree_at(o, t) as f64 + 1e-12);
            prop_assert_eq!(h.aged_degree(o, t, 0.0), h.degree_at(o, t) as f64);
        }
    }

    #[test]
    fn pbp_nonincreasing_in_lambda(ev in events(), t in 0i64..45, tp in 1i64..20, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let h = DegreeHistory::build(&ev).unwrap();
        if h.eligible_nodes(t).is_empty() {
            return Ok(());
        }
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let s_lo = predictors::pbp_score(&h, t, tp, lo).unwrap();
        let s_hi = predictors::pbp_score(&h, t, tp, hi).unwrap();
        for (x, y) in s_lo.values().iter().zip(s_hi.values()) {
            prop_assert!(y <= *x);
        }
    }

    #[test]
    fn tbp_decreases_with_gamma(ev in events(), t in 0i64..45, g in 0.0f64..0.5, dg in 0.01f64..0.5) {
        let h = DegreeHistory::build(&ev).unwrap();
        if h.eligible_nodes(t).is_empty() {
            return Ok(());
        }
        let a = predictors::tbp_score(&h, t, g).unwrap();
        let b = predictors::tbp_score(&h, t, g + dg).unwrap();
        for ((o, x), (_, y)) in a.scores.iter().zip(&b.scores) {
            let all_at_t = h.receipts(*o).iter().filter(|&&r| r <= t).all(|&r| r == t);
            if all_at_t {
                prop_assert_eq!(x, y);
            } else {
                prop_assert!(y < x);
            }
        }
    }

    #[test]
    fn alpha_follows_recent_share(ev in events(), t in 0i64..45, tp in 1i64..20) {
        let h = DegreeHistory::build(&ev).unwrap();
        if h.eligible_nodes(t).is_empty() {
            return Ok(());
        }
        match predictors::dominance_weights(&h, t, tp).unwrap() {
            DominanceWeights::Degenerate => {
                for o in h.eligible_nodes(t) {
                    prop_assert_eq!(h.window_gain(o, t, tp), 0);
                }
            }
            DominanceWeights::Weights(w) => {
                let max = w.iter().map(|e| e.1).fold(0.0, f64::max);
                prop_assert_eq!(max, 1.0);
                for &(u, au) in &w {
                    prop_assert!(au > 0.0 && au <= 1.0);
                    for &(v, av) in &w {
                        if h.window_gain(u, t, tp) <= h.window_gain(v, t, tp) {
                            prop_assert!(au <= av);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dominance_scores_in_unit_interval(ev in events(), t in 0i64..45, tp in 1i64..20, g in 0.0f64..0.5) {
        let h = DegreeHistory::build(&ev).unwrap();
        if h.eligible_nodes(t).is_empty() {
            return Ok(());
        }
        for sv in [predictors::rbdm_score(&h, t, tp).unwrap(), predictors::rbndm_score(&h, t, tp, g).unwrap()] {
            prop_assert!(sv.values().iter().all(|s| (0.0..=1.0).contains(s)));
        }
    }

    #[test]
    fn pagerank_is_a_distribution(ev in events(), t in 0i64..45, follow in 0.05f64..0.95) {
        let h = DegreeHistory::build(&ev).unwrap();
        let params = PredictorParams { teleport: follow, ..PredictorParams::default() };
        if let Ok((_, pr)) = predictors::pagerank_snapshot(&h, t, &params) {
            let sum: f64 = pr.ranks.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            prop_assert!(pr.ranks.iter().all(|&r| r >= 0.0));
            prop_assert!(pr.residual < params.pagerank_tol);
        }
    }

    #[test]
    fn precision_is_symmetric(a in scores(30), b in scores(30), n in 1usize..30) {
        let (pa, pb) = (top_n(&a, n), top_n(&b, n));
        let ab = precision_at_n(&pa, &pb, n).unwrap();
        let ba = precision_at_n(&pb, &pa, n).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=1.0).contains(&ab.1));
        prop_assert!(ab.0 <= n);
    }

    #[test]
    fn metric_ranges(pred in scores(25), truth in scores(25), past in scores(25), n in 1usize..24) {
        let (lp, lr, lo) = (top_n(&pred, n), top_n(&truth, n), top_n(&past, n));
        let q = novelty_qn(&lp, &lr, &lo, n).unwrap();
        prop_assert!(q.ppo <= q.pro);
        if let Some(v) = q.value() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        for mode in [AucMode::Classwise, AucMode::Literal] {
            let a = auc(&vector(pred.clone()), &lr, n, mode).unwrap();
            prop_assert!((0.0..=1.0).contains(&a));
        }
        let x: Vec<f64> = pred.iter().map(|e| e.1).collect();
        let y: Vec<f64> = truth.iter().map(|e| e.1).collect();
        let tau = kendall_tau(&x, &y).unwrap();
        prop_assert!((-1.0..=1.0).contains(&tau));
    }

    #[test]
    fn tau_invariant_under_monotone_maps(x in prop::collection::vec(-50i32..50, 2..60), y in prop::collection::vec(-50i32..50, 2..60)) {
        let len = x.len().min(y.len());
        let x: Vec<f64> = x[..len].iter().map(|&v| f64::from(v)).collect();
        let y: Vec<f64> = y[..len].iter().map(|&v| f64::from(v)).collect();
        let fx: Vec<f64> = x.iter().map(|v| v * v * v + 3.0 * v).collect();
        let gy: Vec<f64> = y.iter().map(|v| (v / 10.0).exp()).collect();
        prop_assert_eq!(kendall_tau(&x, &y).unwrap(), kendall_tau(&fx, &gy).unwrap());
    }

    #[test]
    fn perfect_predictor(perm in Just((0..40u32).collect::<Vec<_>>()).prop_shuffle(), n in 1usize..39) {
        let truth: Vec<(NodeIdx, f64)> = perm.iter().enumerate().map(|(i, &v)| (NodeIdx(i as u32), f64::from(v))).collect();
        let real = top_n(&truth, n);
        let pred = top_n(&truth, n);
        prop_assert_eq!(precision_at_n(&pred, &real, n).unwrap().1, 1.0);
        prop_assert_eq!(auc(&vector(truth.clone()), &real, n, AucMode::Classwise).unwrap(), 1.0);
        let v: Vec<f64> = truth.iter().map(|e| e.1).collect();
        prop_assert_eq!(kendall_tau(&v, &v).unwrap(), 1.0);
        let q = novelty_qn(&pred, &real, &top_n(&truth[..0], n), n).unwrap();
        prop_assert_eq!(q.value(), Some(1.0));
    }

    #[test]
    fn canonical_round_trip(ev in events()) {
        let text = ingest::to_canonical_string(&ev).unwrap();
        let back = ingest::parse_canonical(&text, "mem").unwrap();
        let mut sorted = ev.clone();
        ingest::canonical_sort(&mut sorted);
        prop_assert_eq!(&back, &sorted);
        prop_assert_eq!(ingest::to_canonical_string(&back).unwrap(), text);
        let times: Vec<Time> = back.iter().map(|e| e.time).collect();
        prop_assert!(times.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn wallpost_counts_add_up(rows in prop::collection::vec((0u8..5, 0u8..5, 0u32..4), 1..60)) {
        let lines: Vec<String> = rows
            .iter()
            .map(|&(p, w, kind)| match kind {
                0 => format!("{p} {w}"),
                _ => format!("{p} {w} {}", 1_199_133_531 + u64::from(kind) * 86_400),
            })
            .collect();
        let spec = ingest::DatasetSpec {
            max_malformed: 1.0,
            ..ingest::DatasetSpec::new(ingest::Format::Wallpost)
        };
        let parsed = ingest::parse_wallpost(&lines, &spec).unwrap();
        let r = &parsed.report;
        prop_assert_eq!(r.accepted + r.skipped_malformed + r.dropped_self + r.dropped_undated, lines.len());
        prop_assert!(parsed.events.iter().all(|e| e.check().is_ok()));
    }
}
