use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{MinerConfig, Pruning};
use crate::model::{GranularitySpec, SymbolicDatabase};
use crate::relation::RelationConfig;
use crate::season::{SeasonConfig, Threshold};
use crate::symbolize::{symbolize, SymbolMapping};

use super::csv::read_csv;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Approx,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "approx" => Ok(Mode::Approx),
            _ => Err(Error::config(format!(
                "unknown mode `{s}`, expected exact or approx"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Approx => "approx",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GranularitySection {
    pub fine_unit: Option<String>,
    pub factor_m: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeasonSection {
    pub max_period: Option<Threshold>,
    pub min_density: Option<Threshold>,
    pub dist_min: Option<u32>,
    pub dist_max: Option<u32>,
    pub min_season: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSection {
    pub epsilon: Option<u32>,
    pub min_overlap: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PruningSection {
    pub apriori: Option<bool>,
    pub transitivity: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub patterns: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub graph: Option<PathBuf>,
}

/// Cut points for one series; the alphabet defaults to `0..=thresholds.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingSpec {
    pub thresholds: Vec<f64>,
    pub alphabet: Option<Vec<String>>,
}

impl MappingSpec {
    fn build(&self) -> Result<SymbolMapping<f64>> {
        let alphabet = self
            .alphabet
            .clone()
            .unwrap_or_else(|| (0..=self.thresholds.len()).map(|i| i.to_string()).collect());
        SymbolMapping::new(alphabet, self.thresholds.clone())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolsSection {
    pub default: Option<MappingSpec>,
    #[serde(default)]
    pub series: BTreeMap<String, MappingSpec>,
}

/// Run configuration as written in a TOML file; every field optional so
/// command-line flags can fill or override it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub mode: Option<Mode>,
    pub k_max: Option<usize>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub granularity: GranularitySection,
    #[serde(default)]
    pub season: SeasonSection,
    #[serde(default)]
    pub relation: RelationSection,
    #[serde(default)]
    pub pruning: PruningSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub symbols: SymbolsSection,
}

fn line_col(text: &str, offset: usize) -> (u64, u64) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() as u64 + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) as u64 + 1;
    (line, col)
}

macro_rules! overlay {
    ($dst:expr, $src:expr; $($f:ident),+) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )+
    };
}

impl RunConfig {
    /// Parses TOML text; relative paths resolve against `base`.
    pub fn parse(text: &str, name: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            Error::Parse {
                path: name.to_owned(),
                line,
                column,
                message: e.message().to_owned(),
            }
        })?;
        if let Some(base) = base {
            let fix = |p: &mut Option<PathBuf>| {
                if let Some(path) = p.as_mut().filter(|p| p.is_relative()) {
                    *path = base.join(&*path);
                }
            };
            fix(&mut cfg.input);
            fix(&mut cfg.output.patterns);
            fix(&mut cfg.output.manifest);
            fix(&mut cfg.output.graph);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string(), path.parent())
    }

    /// Values set in `top` win over values in `self`.
    pub fn overlay(mut self, top: &RunConfig) -> Self {
        overlay!(self, top; input, mode, k_max, threads, seed);
        overlay!(self.granularity, top.granularity; fine_unit, factor_m);
        overlay!(self.season, top.season; max_period, min_density, dist_min, dist_max, min_season);
        overlay!(self.relation, top.relation; epsilon, min_overlap);
        overlay!(self.pruning, top.pruning; apriori, transitivity);
        overlay!(self.output, top.output; patterns, manifest, graph);
        if top.symbols.default.is_some() {
            self.symbols.default = top.symbols.default.clone();
        }
        self.symbols
            .series
            .extend(top.symbols.series.iter().map(|(k, v)| (k.clone(), v.clone())));
        self
    }

    /// Checks required fields and numeric constraints.
    pub fn resolve(&self) -> Result<Run> {
        fn need<T: Clone>(v: &Option<T>, key: &str) -> Result<T> {
            v.clone()
                .ok_or_else(|| Error::config(format!("missing required setting `{key}`")))
        }
        let input = need(&self.input, "input")?;
        if !input.is_file() {
            return Err(Error::config(format!(
                "input file `{}` does not exist",
                input.display()
            )));
        }
        let granularity = GranularitySpec::new(
            self.granularity
                .fine_unit
                .clone()
                .unwrap_or_else(|| "granule".into()),
            need(&self.granularity.factor_m, "granularity.factor_m")?,
        )?;
        let s = &self.season;
        let season = SeasonConfig {
            max_period: need(&s.max_period, "season.max_period")?,
            min_density: need(&s.min_density, "season.min_density")?,
            dist_min: need(&s.dist_min, "season.dist_min")?,
            dist_max: need(&s.dist_max, "season.dist_max")?,
            min_season: need(&s.min_season, "season.min_season")?,
        };
        if season.dist_min == 0 || season.dist_min > season.dist_max || season.min_season == 0 {
            return Err(Error::config(
                "season settings need 1 <= dist_min <= dist_max and min_season >= 1",
            ));
        }
        let relation = RelationConfig::new(
            self.relation.epsilon.unwrap_or(0),
            self.relation.min_overlap.unwrap_or(1),
        )?;
        let k_max = self.k_max.unwrap_or(3);
        if k_max == 0 {
            return Err(Error::config("k_max must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads must be at least 1"));
        }
        let miner = MinerConfig::new(season, relation, k_max).with_pruning(Pruning {
            apriori: self.pruning.apriori.unwrap_or(true),
            transitivity: self.pruning.transitivity.unwrap_or(true),
        });
        let mut mappings = BTreeMap::new();
        for (id, spec) in &self.symbols.series {
            mappings.insert(id.clone(), spec.build()?);
        }
        let default_mapping = match &self.symbols.default {
            Some(spec) => spec.build()?,
            None => SymbolMapping::binary(0.5)?,
        };
        Ok(Run {
            input,
            granularity,
            miner,
            mode: self.mode.unwrap_or_default(),
            threads: self.threads,
            seed: self.seed,
            output: self.output.clone(),
            mappings,
            default_mapping,
        })
    }
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub input: PathBuf,
    pub granularity: GranularitySpec,
    pub miner: MinerConfig,
    pub mode: Mode,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub output: OutputSection,
    pub mappings: BTreeMap<String, SymbolMapping<f64>>,
    pub default_mapping: SymbolMapping<f64>,
}

impl Run {
    /// Reads the input CSV and symbolizes every column.
    pub fn load_symbolic(&self) -> Result<SymbolicDatabase> {
        let table = read_csv(&self.input)?;
        for id in self.mappings.keys() {
            if !table.columns.contains(id) {
                return Err(Error::config(format!(
                    "symbol mapping given for unknown series `{id}`"
                )));
            }
        }
        let series = table
            .columns
            .iter()
            .zip(&table.values)
            .map(|(id, raw)| symbolize(id, raw, self.mappings.get(id).unwrap_or(&self.default_mapping)))
            .collect::<Result<Vec<_>>>()?;
        SymbolicDatabase::new(series)
    }
}
