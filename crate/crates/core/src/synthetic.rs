//! Synthetic check of the two dominance models on random gains.
//!
//! Each trial draws independent recent and total gains uniformly with
//! replacement, mixes them with the ECDF dominance weights and measures
//! Kendall's tau between each model and each kind of gain.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::kendall_tau;
use crate::predictors::{dominance_mix, ecdf, Dominance};

pub const DEFAULT_POPULATION: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSample {
    pub n: usize,
    pub recent_gains: Vec<u64>,
    pub total_gains: Vec<u64>,
    pub seed: u64,
}

/// Draws `n` recent and `n` total gains uniformly from `1..=population_max`.
pub fn generate_sample(n: usize, population_max: u64, seed: u64) -> Result<SyntheticSample> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "system size must be >= 2, got {n}"
        )));
    }
    if population_max == 0 {
        return Err(Error::InvalidParameter("population must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<u64> {
        (0..n).map(|_| rng.gen_range(1..=population_max)).collect()
    };
    let recent_gains = draw(&mut rng);
    let total_gains = draw(&mut rng);
    Ok(SyntheticSample {
        n,
        recent_gains,
        total_gains,
        seed,
    })
}

/// Population bound per system size.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Population {
    Fixed(u64),
    /// `n * n` for system size `n`.
    Squared,
}

impl Population {
    pub fn for_size(self, n: usize) -> u64 {
        match self {
            Population::Fixed(p) => p,
            Population::Squared => (n as u64).saturating_mul(n as u64),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TauPair {
    RecentRbdm,
    RecentRbndm,
    TotalRbdm,
    TotalRbndm,
}

impl TauPair {
    pub const ALL: [TauPair; 4] = [
        TauPair::RecentRbdm,
        TauPair::RecentRbndm,
        TauPair::TotalRbdm,
        TauPair::TotalRbndm,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TauPair::RecentRbdm => "Recent:RBDM",
            TauPair::RecentRbndm => "Recent:RBNDM",
            TauPair::TotalRbdm => "Total:RBDM",
            TauPair::TotalRbndm => "Total:RBNDM",
        }
    }
}

impl fmt::Display for TauPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Model scores and correlations for one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub recent_share: Vec<f64>,
    pub alpha: Vec<f64>,
    pub rbdm: Vec<f64>,
    pub rbndm: Vec<f64>,
    /// Indexed like [`TauPair::ALL`].
    pub taus: [f64; 4],
}

impl TrialOutcome {
    pub fn tau(&self, pair: TauPair) -> f64 {
        self.taus[pair as usize]
    }
}

pub fn run_trial(sample: &SyntheticSample) -> Result<TrialOutcome> {
    let recent: Vec<f64> = sample.recent_gains.iter().map(|&g| g as f64).collect();
    let total: Vec<f64> = sample.total_gains.iter().map(|&g| g as f64).collect();
    let sum: f64 = recent.iter().sum();
    let recent_share: Vec<f64> = recent.iter().map(|r| r / sum).collect();
    let alpha = ecdf(&recent_share);
    let rbdm = dominance_mix(&recent, &total, Dominance::Recent);
    let rbndm = dominance_mix(&recent, &total, Dominance::NonRecent);
    let taus = [
        kendall_tau(&recent, &rbdm)?,
        kendall_tau(&recent, &rbndm)?,
        kendall_tau(&total, &rbdm)?,
        kendall_tau(&total, &rbndm)?,
    ];
    Ok(TrialOutcome {
        recent_share,
        alpha,
        rbdm,
        rbndm,
        taus,
    })
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one (size, trial) cell, independent of scheduling.
pub fn trial_seed(seed: u64, size: usize, trial: usize) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ size as u64) ^ trial as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainExperimentConfig {
    pub sizes: Vec<usize>,
    pub population: Population,
    pub trials: usize,
    pub seed: u64,
    pub bins: usize,
}

impl Default for GainExperimentConfig {
    fn default() -> Self {
        GainExperimentConfig {
            sizes: vec![10, 20, 50, 100, 200, 500, 1000],
            population: Population::Fixed(DEFAULT_POPULATION),
            trials: 20,
            seed: 1,
            bins: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauRow {
    pub size: usize,
    pub trial: usize,
    pub pair: TauPair,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub size: usize,
    pub variable: &'static str,
    pub bin_low: f64,
    pub bin_high: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub size: usize,
    pub pair: &'static str,
    pub mean_tau: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GainExperiment {
    pub taus: Vec<TauRow>,
    pub histograms: Vec<HistogramRow>,
}

fn histogram(
    size: usize,
    variable: &'static str,
    values: &[f64],
    hi: f64,
    bins: usize,
) -> Vec<HistogramRow> {
    let width = hi / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = if width > 0.0 { (v / width) as usize } else { 0 };
        counts[b.min(bins - 1)] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramRow {
            size,
            variable,
            bin_low: i as f64 * width,
            bin_high: if i + 1 == bins {
                hi
            } else {
                (i + 1) as f64 * width
            },
            count,
        })
        .collect()
}

pub fn gain_experiment(cfg: &GainExperimentConfig) -> Result<GainExperiment> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if cfg.bins == 0 {
        return Err(Error::InvalidParameter("bins must be >= 1".into()));
    }
    if let Some(&bad) = cfg.sizes.iter().find(|&&s| s < 2) {
        return Err(Error::InvalidParameter(format!(
            "system size must be >= 2, got {bad}"
        )));
    }
    let cells: Vec<(usize, usize)> = cfg
        .sizes
        .iter()
        .flat_map(|&s| (0..cfg.trials).map(move |k| (s, k)))
        .collect();
    let outcomes: Vec<TrialOutcome> = cells
        .par_iter()
        .map(|&(size, trial)| {
            let sample = generate_sample(
                size,
                cfg.population.for_size(size),
                trial_seed(cfg.seed, size, trial),
            )?;
            run_trial(&sample)
        })
        .collect::<Result<_>>()?;

    let mut taus = Vec::with_capacity(cells.len() * 4);
    for (&(size, trial), out) in cells.iter().zip(&outcomes) {
        for pair in TauPair::ALL {
            taus.push(TauRow {
                size,
                trial,
                pair,
                tau: out.tau(pair),
            });
        }
    }

    let mut histograms = Vec::new();
    for (k, &size) in cfg.sizes.iter().enumerate() {
        let block = &outcomes[k * cfg.trials..(k + 1) * cfg.trials];
        let shares: Vec<f64> = block
            .iter()
            .flat_map(|o| o.recent_share.iter().copied())
            .collect();
        let alphas: Vec<f64> = block.iter().flat_map(|o| o.alpha.iter().copied()).collect();
        let max_share = shares.iter().copied().fold(0.0, f64::max);
        histograms.extend(histogram(
            size,
            "recent_share",
            &shares,
            max_share,
            cfg.bins,
        ));
        histograms.extend(histogram(size, "alpha", &alphas, 1.0, cfg.bins));
    }
    Ok(GainExperiment { taus, histograms })
}

impl GainExperiment {
    /// Trial-mean tau per (size, pair), in size then pair order.
    pub fn curves(&self) -> Vec<CurvePoint> {
        let mut sizes: Vec<usize> = self.taus.iter().map(|r| r.size).collect();
        sizes.dedup();
        let mut out = Vec::new();
        for size in sizes {
            for pair in TauPair::ALL {
                let vals: Vec<f64> = self
                    .taus
                    .iter()
                    .filter(|r| r.size == size && r.pair == pair)
                    .map(|r| r.tau)
                    .collect();
                out.push(CurvePoint {
                    size,
                    pair: pair.label(),
                    mean_tau: vals.iter().sum::<f64>() / vals.len() as f64,
                });
            }
        }
        out
    }

    fn trial_taus(&self) -> Vec<[f64; 4]> {
        self.taus
            .chunks(4)
            .map(|c| [c[0].tau, c[1].tau, c[2].tau, c[3].tau])
            .collect()
    }

    /// Fraction of trials in which each model correlates more with its own
    /// kind of gain than with the other: `tau(recent,RBDM) > tau(total,RBDM)`
    /// and `tau(total,RBNDM) > tau(recent,RBNDM)`.
    pub fn separation_rate(&self) -> f64 {
        let trials = self.trial_taus();
        let ok = trials.iter().filter(|t| t[0] > t[2] && t[3] > t[1]).count();
        ok as f64 / trials.len() as f64
    }

    /// Fraction of trials with `tau(recent,RBDM) >= tau(recent,RBNDM)` and
    /// `tau(total,RBNDM) >= tau(total,RBDM)`.
    pub fn dominance_rate(&self) -> f64 {
        let trials = self.trial_taus();
        let ok = trials
            .iter()
            .filter(|t| t[0] >= t[1] && t[3] >= t[2])
            .count();
        ok as f64 / trials.len() as f64
    }

    /// One row per (size, pair): the trial-mean tau.
    pub fn curves_csv(&self) -> String {
        let mut s = String::from("size,pair,mean_tau\n");
        for p in self.curves() {
            let _ = writeln!(s, "{},{},{}", p.size, p.pair, p.mean_tau);
        }
        s
    }

    /// One row per (size, trial, pair).
    pub fn tau_csv(&self) -> String {
        let mut s = String::from("size,trial,pair,tau\n");
        for r in &self.taus {
            let _ = writeln!(s, "{},{},{},{}", r.size, r.trial, r.pair, r.tau);
        }
        s
    }

    pub fn distributions_csv(&self) -> String {
        let mut s = String::from("size,variable,bin_low,bin_high,count\n");
        for r in &self.histograms {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.size, r.variable, r.bin_low, r.bin_high, r.count
            );
        }
        s
    }
}
