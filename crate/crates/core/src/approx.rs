//! Approximate miner: prune series pairs by normalized mutual information first.

use std::time::Instant;

use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, Admission, GraphSummary, MinerConfig, MiningResult};
use crate::info::{mu_threshold, MuThreshold, ProbTable};
use crate::model::{EventId, SequenceDatabase, SymbolicDatabase};
use crate::season::ResolvedSeasonConfig;

/// Scores of one unordered series pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairScore<T> {
    pub u: usize,
    pub v: usize,
    pub nmi_uv: T,
    pub nmi_vu: T,
    /// Smallest threshold over both directions and all symbol pairs; absent
    /// when either series is constant.
    pub mu: Option<MuThreshold<T>>,
    pub edge: bool,
}

/// Undirected graph over series; an edge marks a pair worth mining.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationGraph<T> {
    pub vertices: Vec<String>,
    pub pairs: Vec<PairScore<T>>,
    #[serde(skip)]
    adjacency: Vec<bool>,
    #[serde(skip)]
    degree: Vec<usize>,
}

impl<T> CorrelationGraph<T> {
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u * self.vertices.len() + v]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.degree[u]
    }

    pub fn edges(&self) -> impl Iterator<Item = &PairScore<T>> {
        self.pairs.iter().filter(|p| p.edge)
    }

    pub fn n_edges(&self) -> usize {
        self.edges().count()
    }

    /// Fraction of series pairs without an edge.
    pub fn pruned_fraction(&self) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        1.0 - self.n_edges() as f64 / self.pairs.len() as f64
    }
}

/// Minimum μ for source series `x` against every symbol of target `y`.
fn directed_mu<T: Float + Send + Sync>(
    probs: &ProbTable<T>,
    x: usize,
    y: usize,
    season: &ResolvedSeasonConfig,
    n: usize,
) -> Result<Option<MuThreshold<T>>> {
    let Some(lambda1) = probs
        .marginal(x)
        .iter()
        .copied()
        .filter(|&p| p > T::zero())
        .reduce(T::min)
    else {
        return Ok(None);
    };
    if lambda1 >= T::one() {
        return Ok(None);
    }
    let mut best: Option<MuThreshold<T>> = None;
    for &lambda2 in probs.marginal(y) {
        if lambda2 <= T::zero() {
            continue;
        }
        let m = mu_threshold(lambda1, lambda2, season.min_season, season.min_density, n)?;
        if best.is_none_or(|b| m.raw < b.raw) {
            best = Some(m);
        }
    }
    Ok(best)
}

pub fn build_correlation_graph<T: Float + Send + Sync>(
    db: &SymbolicDatabase,
    season: &ResolvedSeasonConfig,
    n_granules: usize,
) -> Result<CorrelationGraph<T>> {
    let n = db.series().len();
    if n < 2 {
        return Err(Error::config("a correlation graph needs at least two series"));
    }
    let probs = ProbTable::<T>::from_db(db)?;
    let n_granules = n_granules.max(1);
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    let mut adjacency = vec![false; n * n];
    let mut degree = vec![0; n];
    for u in 0..n {
        for v in u + 1..n {
            let (nmi_uv, nmi_vu) = probs.nmi_pair(u, v);
            let constant = probs.entropy(u) <= T::zero() || probs.entropy(v) <= T::zero();
            let mu = if constant {
                None
            } else {
                let a = directed_mu(&probs, u, v, season, n_granules)?;
                let b = directed_mu(&probs, v, u, season, n_granules)?;
                match (a, b) {
                    (Some(a), Some(b)) => Some(if b.raw < a.raw { b } else { a }),
                    (a, b) => a.or(b),
                }
            };
            let edge = mu.is_some_and(|m| m.admits(nmi_uv) || m.admits(nmi_vu));
            if let Some(m) = mu {
                if m.raw <= T::zero() || m.raw > T::one() {
                    log::debug!(
                        "pair ({}, {}): mu = {} is outside (0, 1], pair {}",
                        db.series()[u].id,
                        db.series()[v].id,
                        m.raw.to_f64().unwrap_or(f64::NAN),
                        if m.raw <= T::zero() { "admitted" } else { "pruned" }
                    );
                }
            }
            if edge {
                adjacency[u * n + v] = true;
                adjacency[v * n + u] = true;
                degree[u] += 1;
                degree[v] += 1;
            }
            pairs.push(PairScore {
                u,
                v,
                nmi_uv,
                nmi_vu,
                mu,
                edge,
            });
        }
    }
    Ok(CorrelationGraph {
        vertices: db.series().iter().map(|s| s.id.clone()).collect(),
        pairs,
        adjacency,
        degree,
    })
}

struct GraphGate<'a, T>(&'a CorrelationGraph<T>);

impl<T: Sync> Admission for GraphGate<'_, T> {
    fn event(&self, e: EventId) -> bool {
        self.0.degree(e.series as usize) > 0
    }

    fn pair(&self, a: EventId, b: EventId) -> bool {
        a.series == b.series || self.0.has_edge(a.series as usize, b.series as usize)
    }
}

/// Mines with single events restricted to series that have an edge and
/// 2-event groups restricted to edge pairs (or pairs within one such series).
/// Larger patterns are grown exactly as in [`crate::mine`].
pub fn mine_approx(
    db: &SequenceDatabase,
    db_syb: &SymbolicDatabase,
    cfg: &MinerConfig,
) -> Result<MiningResult> {
    Ok(mine_approx_with_graph(db, db_syb, cfg)?.0)
}

/// Like [`mine_approx`], also returning the graph that gated the run.
pub fn mine_approx_with_graph(
    db: &SequenceDatabase,
    db_syb: &SymbolicDatabase,
    cfg: &MinerConfig,
) -> Result<(MiningResult, CorrelationGraph<f64>)> {
    let same_series = db.n_series() == db_syb.series().len()
        && db
            .series_ids()
            .iter()
            .zip(db_syb.series())
            .all(|(a, b)| *a == b.id);
    if !same_series {
        return Err(Error::config(
            "sequence and symbolic databases describe different series",
        ));
    }
    let season = cfg.season.resolve(db.len())?;
    let timer = Instant::now();
    let graph = build_correlation_graph::<f64>(db_syb, &season, db.len())?;
    let elapsed_ms = timer.elapsed().as_secs_f64() * 1e3;
    let mut result = exact::run(db, cfg, &GraphGate(&graph))?;
    result.stats.graph = Some(GraphSummary {
        pairs: graph.pairs.len(),
        edges: graph.n_edges(),
        elapsed_ms,
    });
    Ok((result, graph))
}
