//! PageRank by power iteration on the Google matrix
//! `M = a*S + (1 - a)/n * J`, where `S` is the column-stochastic transition
//! matrix with dangling columns replaced by `1/n` and `J` is all ones.
//!
//! Neither `S`'s dangling columns nor `J` are materialized: both collapse to
//! scalar mass spread uniformly across all nodes.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PageRank {
    pub ranks: Vec<f64>,
    pub iterations: usize,
    /// L1 norm of `M*PR - PR` at the last iterate.
    pub residual: f64,
}

/// Directed graph in compressed out-adjacency form with unit edge weights.
#[derive(Clone, Debug)]
pub struct LinkGraph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl LinkGraph {
    /// Builds from `(source, target)` pairs over nodes `0..n`. Repeated pairs
    /// collapse into one link.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut pairs: Vec<(usize, usize)> = edges.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = vec![0usize; n + 1];
        for &(s, _) in &pairs {
            assert!(s < n, "edge source {s} out of range for {n} nodes");
            offsets[s + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets = pairs
            .into_iter()
            .map(|(_, t)| {
                assert!(t < n, "edge target {t} out of range for {n} nodes");
                t
            })
            .collect();
        LinkGraph {
            n,
            offsets,
            targets,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn out_links(&self, node: usize) -> &[usize] {
        &self.targets[self.offsets[node]..self.offsets[node + 1]]
    }

    /// One application of the Google matrix.
    fn apply(&self, follow: f64, pr: &[f64], out: &mut [f64]) {
        let n = self.n as f64;
        let total: f64 = pr.iter().sum();
        let mut dangling = 0.0;
        out.iter_mut().for_each(|x| *x = 0.0);
        for (j, &mass) in pr.iter().enumerate() {
            let links = self.out_links(j);
            if links.is_empty() {
                dangling += mass;
            } else {
                let share = mass / links.len() as f64;
                for &i in links {
                    out[i] += share;
                }
            }
        }
        let uniform = follow * dangling / n + (1.0 - follow) * total / n;
        for x in out.iter_mut() {
            *x = follow * *x + uniform;
        }
    }

    /// Power iteration from the uniform vector until the L1 change drops
    /// below `tol`.
    pub fn pagerank(&self, follow: f64, tol: f64, max_iters: usize) -> Result<PageRank> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("pagerank on an empty graph".into()));
        }
        if !(follow > 0.0 && follow < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "teleport parameter must lie in (0,1), got {follow}"
            )));
        }
        let mut pr = vec![1.0 / self.n as f64; self.n];
        let mut next = vec![0.0; self.n];
        let mut residual = f64::INFINITY;
        for iteration in 1..=max_iters {
            self.apply(follow, &pr, &mut next);
            residual = pr.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
            std::mem::swap(&mut pr, &mut next);
            if residual < tol {
                return Ok(PageRank {
                    ranks: pr,
                    iterations: iteration,
                    residual,
                });
            }
        }
        Err(Error::NotConverged {
            iterations: max_iters,
            residual,
        })
    }
}
