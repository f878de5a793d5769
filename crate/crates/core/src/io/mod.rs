//! Files in and out: CSV series, TOML run configuration, JSON documents.

mod config;
mod csv;
mod output;

pub use self::config::{
    GranularitySection, MappingSpec, Mode, OutputSection, PruningSection, RelationSection, Run, RunConfig,
    SeasonSection, SymbolsSection,
};
pub use self::csv::{read_csv, read_csv_from, write_csv, RawTable};
pub use self::output::{
    graph_document, patterns_document, ConfigEcho, GraphDocument, GraphPair, Manifest, PatternRecord,
    PatternsDocument, Phase, TripleRecord,
};
