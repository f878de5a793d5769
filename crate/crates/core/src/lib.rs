//! Frequent seasonal temporal pattern mining.
//!
//! Raw multivariate series are symbolized, cut into coarse granules and turned
//! into per-granule event instances. Two miners run on top of that database:
//! an exact one built on hierarchical lookup hash tables with maxSeason and
//! transitivity pruning, and an approximate one that first drops weakly
//! correlated series pairs using normalized mutual information.
//!
//! ```
//! use stpm::{
//!     build_sequence_db, mine, GranularitySpec, MinerConfig, RelationConfig, SeasonConfig,
//!     SymbolicDatabase, SymbolicSeries,
//! };
//!
//! let db = SymbolicDatabase::new(vec![
//!     SymbolicSeries::binary("A", &[1, 1, 0, 1, 1, 0, 0, 0, 0, 1, 1, 0]),
//!     SymbolicSeries::binary("B", &[1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0]),
//! ])
//! .unwrap();
//! let seq = build_sequence_db(&db, &GranularitySpec::new("minute", 3).unwrap()).unwrap();
//! let cfg = MinerConfig::new(
//!     SeasonConfig::absolute(1, 1, 1, 4, 2),
//!     RelationConfig::new(0, 1).unwrap(),
//!     2,
//! );
//! let result = mine(&seq, &cfg).unwrap();
//! assert!(!result.patterns.is_empty());
//! ```

pub mod approx;
pub mod error;
pub mod exact;
pub mod info;
pub mod io;
pub mod model;
pub mod oracle;
pub mod pattern;
pub mod relation;
pub mod result;
pub mod season;
pub mod symbolize;
pub mod synth;

pub use approx::{build_correlation_graph, mine_approx, mine_approx_with_graph, CorrelationGraph, PairScore};
pub use error::{Error, Result};
pub use exact::{mine, MinerConfig, Pruning};
pub use info::{
    conditional_entropy, entropy, lambert_w0, mu_at_domain_edge, mu_interior, mu_threshold,
    mutual_information, nmi, season_lower_bound, JointDist, MuThreshold, ProbTable,
};
pub use model::{
    build_sequence_db, period, EventId, EventInstance, GranularitySpec, Position, SequenceDatabase, Symbol,
    SymbolicDatabase, SymbolicSeries,
};
pub use oracle::{oracle_mine, OracleLimits};
pub use pattern::{PatternKey, Triple};
pub use relation::{classify, supports, RelationConfig, RelationKind};
pub use result::{GraphSummary, LevelStats, MinedPattern, MiningResult, MiningStats};
pub use season::{
    analyze, is_candidate, max_season, near_support_sets, ResolvedSeasonConfig, SeasonAnalysis, SeasonConfig,
    SupportSet, Threshold,
};
pub use symbolize::{symbolize, SymbolMapping, Symbolizer};
pub use synth::{
    emit_raw, generate, random_case, GeneratorConfig, PlantEvent, PlantRelation, PlantSpec, PlantedPattern,
    RandomCase, Synthetic,
};

/// Exact maxSeason value, `|SUP| / minDensity`.
pub type MaxSeason = num_rational::Ratio<u64>;

pub type ProbTable64 = ProbTable<f64>;
pub type JointDist64 = JointDist<f64>;
pub type MuThreshold64 = MuThreshold<f64>;
pub type SymbolMapping64 = SymbolMapping<f64>;
pub type CorrelationGraph64 = CorrelationGraph<f64>;
