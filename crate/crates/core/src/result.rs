//! Mining output shared by every miner.

use serde::{Deserialize, Serialize};

use crate::pattern::PatternKey;
use crate::season::{ResolvedSeasonConfig, SeasonAnalysis, SupportSet};
use crate::MaxSeason;

/// A frequent seasonal pattern with its measures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinedPattern {
    pub key: PatternKey,
    pub support: SupportSet,
    pub analysis: SeasonAnalysis,
    pub max_season: MaxSeason,
}

/// Work done at one level. `candidates = generated - pruned`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    pub generated: usize,
    pub pruned: usize,
    pub pruned_by_support: usize,
    pub pruned_by_transitivity: usize,
    pub pruned_by_graph: usize,
    pub candidates: usize,
    pub candidate_patterns: usize,
    pub frequent: usize,
    pub elapsed_ms: f64,
}

impl LevelStats {
    pub(crate) fn new(level: usize) -> Self {
        Self {
            level,
            ..Default::default()
        }
    }
}

/// Correlation graph work done by the approximate miner.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub pairs: usize,
    pub edges: usize,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MiningStats {
    pub n_granules: usize,
    pub thresholds: Option<ResolvedSeasonConfig>,
    pub levels: Vec<LevelStats>,
    pub graph: Option<GraphSummary>,
}

impl MiningStats {
    /// Candidate groups summed over all levels.
    pub fn candidate_groups(&self) -> usize {
        self.levels.iter().map(|l| l.candidates).sum()
    }
}

#[derive(Debug, Clone, Default)]
pub struct MiningResult {
    /// Sorted by pattern key.
    pub patterns: Vec<MinedPattern>,
    pub stats: MiningStats,
}

impl MiningResult {
    pub fn keys(&self) -> impl Iterator<Item = &PatternKey> {
        self.patterns.iter().map(|p| &p.key)
    }

    pub fn find(&self, key: &PatternKey) -> Option<&MinedPattern> {
        self.patterns
            .binary_search_by(|p| p.key.cmp(key))
            .ok()
            .map(|i| &self.patterns[i])
    }
}
