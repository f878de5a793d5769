//! Support sets, near support sets, seasons and the maxSeason gate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::Position;
use crate::MaxSeason;

/// Strictly ascending granule positions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportSet(Vec<Position>);

impl SupportSet {
    pub fn new(positions: Vec<Position>) -> Result<Self> {
        if positions.windows(2).any(|w| w[0] >= w[1]) || positions.first() == Some(&0) {
            return Err(Error::config(
                "support positions must be 1-based and strictly ascending",
            ));
        }
        Ok(Self(positions))
    }

    pub(crate) fn from_sorted_unchecked(positions: Vec<Position>) -> Self {
        debug_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        Self(positions)
    }

    pub fn as_slice(&self) -> &[Position] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, p: Position) -> bool {
        self.0.binary_search(&p).is_ok()
    }

    /// Sorted-merge intersection.
    pub fn intersect(&self, other: &SupportSet) -> SupportSet {
        SupportSet(intersect_sorted(&self.0, &other.0))
    }

    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        let mut it = other.0.iter();
        self.0.iter().all(|p| it.by_ref().any(|q| q == p))
    }

    pub fn into_vec(self) -> Vec<Position> {
        self.0
    }
}

pub fn intersect_sorted(a: &[Position], b: &[Position]) -> Vec<Position> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Size of `a ∩ b` without materializing it.
pub fn intersection_len(a: &[Position], b: &[Position]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// A count given either absolutely (`3`) or as a percentage of the granule count (`0.5%`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Absolute(u32),
    Percent(f64),
}

impl Threshold {
    /// `ceil(pct / 100 * n)`, never below 1.
    pub fn resolve(self, n: usize) -> u32 {
        match self {
            Threshold::Absolute(k) => k,
            Threshold::Percent(p) => ((p / 100.0 * n as f64).ceil() as u32).max(1),
        }
    }
}

impl FromStr for Threshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(pct) = s.strip_suffix('%') {
            let p: f64 = pct
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("invalid percentage `{s}`")))?;
            if !(p > 0.0 && p <= 100.0) {
                return Err(Error::config(format!("percentage `{s}` must lie in (0, 100]")));
            }
            Ok(Threshold::Percent(p))
        } else {
            let k: u32 = s
                .parse()
                .map_err(|_| Error::config(format!("invalid threshold `{s}`, expected K or K%")))?;
            if k == 0 {
                return Err(Error::config("thresholds must be at least 1"));
            }
            Ok(Threshold::Absolute(k))
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Absolute(k) => write!(f, "{k}"),
            Threshold::Percent(p) => write!(f, "{p}%"),
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Threshold::Absolute(k) => s.serialize_u32(*k),
            Threshold::Percent(_) => s.collect_str(self),
        }
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(k) => u32::try_from(k)
                .ok()
                .filter(|&k| k > 0)
                .map(Threshold::Absolute)
                .ok_or_else(|| serde::de::Error::custom("threshold must be in 1..=u32::MAX")),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Seasonality thresholds as configured; counts may still be percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeasonConfig {
    pub max_period: Threshold,
    pub min_density: Threshold,
    pub dist_min: u32,
    pub dist_max: u32,
    pub min_season: u32,
}

impl SeasonConfig {
    pub fn absolute(
        max_period: u32,
        min_density: u32,
        dist_min: u32,
        dist_max: u32,
        min_season: u32,
    ) -> Self {
        Self {
            max_period: Threshold::Absolute(max_period),
            min_density: Threshold::Absolute(min_density),
            dist_min,
            dist_max,
            min_season,
        }
    }

    /// Resolves percentages against `n` granules and validates the result.
    pub fn resolve(&self, n: usize) -> Result<ResolvedSeasonConfig> {
        let r = ResolvedSeasonConfig {
            max_period: self.max_period.resolve(n),
            min_density: self.min_density.resolve(n),
            dist_min: self.dist_min,
            dist_max: self.dist_max,
            min_season: self.min_season,
        };
        r.validate()?;
        if matches!(self.max_period, Threshold::Percent(_))
            || matches!(self.min_density, Threshold::Percent(_))
        {
            log::info!(
                "resolved thresholds over {n} granules: max_period={} min_density={}",
                r.max_period,
                r.min_density
            );
        }
        Ok(r)
    }
}

/// Seasonality thresholds in absolute granule counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedSeasonConfig {
    pub max_period: u32,
    pub min_density: u32,
    pub dist_min: u32,
    pub dist_max: u32,
    pub min_season: u32,
}

impl ResolvedSeasonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_period == 0 || self.min_density == 0 || self.min_season == 0 {
            return Err(Error::config(
                "max_period, min_density and min_season must be at least 1",
            ));
        }
        if self.dist_min == 0 || self.dist_min > self.dist_max {
            return Err(Error::config(format!(
                "distance interval [{}, {}] must satisfy 1 <= dist_min <= dist_max",
                self.dist_min, self.dist_max
            )));
        }
        Ok(())
    }

    /// Smallest support size that can still hold `min_season` seasons.
    pub fn candidate_threshold(&self) -> u64 {
        u64::from(self.min_season) * u64::from(self.min_density)
    }
}

/// `|SUP| / min_density`.
pub fn max_season(support_len: usize, min_density: u32) -> MaxSeason {
    assert!(min_density >= 1);
    MaxSeason::new(support_len as u64, u64::from(min_density))
}

pub fn is_candidate(support_len: usize, cfg: &ResolvedSeasonConfig) -> bool {
    support_len as u64 >= cfg.candidate_threshold()
}

/// Maximal runs whose consecutive positions are at most `max_period` apart.
pub fn near_support_sets(sup: &[Position], max_period: u32) -> Vec<&[Position]> {
    let mut out = Vec::new();
    let mut lo = 0;
    for i in 1..=sup.len() {
        if i == sup.len() || sup[i] - sup[i - 1] > max_period {
            out.push(&sup[lo..i]);
            lo = i;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeasonAnalysis {
    pub near_sets: Vec<SupportSet>,
    pub seasons: Vec<SupportSet>,
    pub distances: Vec<u32>,
    pub season_count: usize,
    pub is_frequent_seasonal: bool,
}

/// Seasons are near sets dense enough; the pattern is frequent seasonal when
/// there are at least `min_season` of them and every gap between consecutive
/// seasons (last granule of one to first of the next) lies in the interval.
/// Near sets failing the density test are dropped and do not break the chain.
pub fn analyze(sup: &[Position], cfg: &ResolvedSeasonConfig) -> SeasonAnalysis {
    let near = near_support_sets(sup, cfg.max_period);
    let seasons: Vec<&[Position]> = near
        .iter()
        .copied()
        .filter(|s| s.len() >= cfg.min_density as usize)
        .collect();
    let distances: Vec<u32> = seasons
        .windows(2)
        .map(|w| w[1][0] - w[0][w[0].len() - 1])
        .collect();
    let is_frequent_seasonal = seasons.len() >= cfg.min_season as usize
        && distances
            .iter()
            .all(|d| (cfg.dist_min..=cfg.dist_max).contains(d));
    SeasonAnalysis {
        near_sets: near.iter().map(|s| SupportSet(s.to_vec())).collect(),
        season_count: seasons.len(),
        seasons: seasons.iter().map(|s| SupportSet(s.to_vec())).collect(),
        distances,
        is_frequent_seasonal,
    }
}
