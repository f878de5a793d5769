use serde::{Deserialize, Serialize};

use crate::approx::CorrelationGraph;
use crate::error::Result;
use crate::exact::{MinerConfig, Pruning};
use crate::model::SequenceDatabase;
use crate::relation::RelationKind;
use crate::result::{GraphSummary, LevelStats, MiningResult};
use crate::season::{ResolvedSeasonConfig, SeasonConfig};

use super::config::Mode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleRecord {
    pub relation: RelationKind,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRecord {
    /// Event labels such as `C:1`, in pattern order.
    pub events: Vec<String>,
    pub triples: Vec<TripleRecord>,
    pub support: Vec<u32>,
    pub seasons: Vec<Vec<u32>>,
    pub distances: Vec<u32>,
    /// Exact ratio, e.g. `8/3`.
    pub max_season: String,
}

/// Settings echoed into every output document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub mode: Mode,
    pub factor_m: u32,
    pub k_max: usize,
    pub epsilon: u32,
    pub min_overlap: u32,
    pub season: SeasonConfig,
    pub pruning: Pruning,
}

impl ConfigEcho {
    pub fn new(mode: Mode, factor_m: u32, cfg: &MinerConfig) -> Self {
        Self {
            mode,
            factor_m,
            k_max: cfg.k_max,
            epsilon: cfg.relation.epsilon,
            min_overlap: cfg.relation.min_overlap,
            season: cfg.season,
            pruning: cfg.pruning,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternsDocument {
    pub config: ConfigEcho,
    pub thresholds: Option<ResolvedSeasonConfig>,
    pub patterns: Vec<PatternRecord>,
}

impl PatternsDocument {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Renders a result with event labels from `db`.
pub fn patterns_document(
    result: &MiningResult,
    db: &SequenceDatabase,
    config: ConfigEcho,
) -> PatternsDocument {
    let patterns = result
        .patterns
        .iter()
        .map(|p| PatternRecord {
            events: p
                .key
                .events()
                .iter()
                .map(|&e| db.event_label(e).to_string())
                .collect(),
            triples: p
                .key
                .triples()
                .into_iter()
                .map(|t| TripleRecord {
                    relation: t.relation,
                    left: t.left,
                    right: t.right,
                })
                .collect(),
            support: p.support.as_slice().to_vec(),
            seasons: p.analysis.seasons.iter().map(|s| s.as_slice().to_vec()).collect(),
            distances: p.analysis.distances.clone(),
            max_season: p.max_season.to_string(),
        })
        .collect();
    PatternsDocument {
        config,
        thresholds: result.stats.thresholds,
        patterns,
    }
}

/// Wall time and best-effort allocator high-water mark of one phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub name: String,
    pub elapsed_ms: f64,
    pub peak_bytes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ConfigEcho,
    pub thresholds: Option<ResolvedSeasonConfig>,
    pub n_series: usize,
    pub n_granules: usize,
    pub n_patterns: usize,
    pub levels: Vec<LevelStats>,
    pub graph: Option<GraphSummary>,
    pub phases: Vec<Phase>,
    pub memory_note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPair {
    pub u: String,
    pub v: String,
    pub nmi_uv: f64,
    pub nmi_vu: f64,
    /// Raw threshold; absent when a series is constant.
    pub mu: Option<f64>,
    pub edge: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: Vec<String>,
    pub pairs: Vec<GraphPair>,
    pub n_edges: usize,
}

pub fn graph_document(g: &CorrelationGraph<f64>) -> GraphDocument {
    GraphDocument {
        vertices: g.vertices.clone(),
        pairs: g
            .pairs
            .iter()
            .map(|p| GraphPair {
                u: g.vertices[p.u].clone(),
                v: g.vertices[p.v].clone(),
                nmi_uv: p.nmi_uv,
                nmi_vu: p.nmi_vu,
                mu: p.mu.map(|m| m.raw),
                edge: p.edge,
            })
            .collect(),
        n_edges: g.n_edges(),
    }
}
