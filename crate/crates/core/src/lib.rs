//! Rising-novelty prediction on evolving networks.
//!
//! The crate scores the nodes of a timestamped link stream by how likely
//! they are to gain links in a future window. Alongside in-degree,
//! PageRank, the popularity-based predictor and the temporal-decay
//! predictor it implements two recency models that mix recent and total
//! link shares with a per-node dominance factor taken from the empirical
//! distribution of recent shares.
//!
//! * [`graph`]: event stream and windowed degree queries
//! * [`predictors`]: the six predictors
//! * [`metrics`]: precision, novelty, AUC, Kendall's tau
//! * [`harness`]: sampling protocol, averaging and window sweeps
//! * [`synthetic`]: random-gain experiment for the dominance models
//! * [`ingest`]: dataset parsers and the canonical event file
//! * [`generate`]: seeded preferential-attachment networks with bursts
//! * [`cli`]: the `trendlab` command line

pub mod cli;
pub mod error;
pub mod generate;
pub mod graph;
pub mod harness;
pub mod ingest;
pub mod metrics;
pub mod predictors;
pub mod synthetic;

pub use error::{Error, Result};
pub use graph::{DegreeHistory, LinkEvent, NodeIdx, Time, WindowConfig};
pub use metrics::{AucMode, EvalReport, RankedList};
pub use predictors::{PredictorKind, PredictorParams, ScoreVector};
