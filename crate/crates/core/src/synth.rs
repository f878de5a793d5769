//! Synthetic symbolic databases with planted seasonal patterns.
//!
//! Background series are Markov chains over the alphabet. Each plant owns a
//! disjoint set of series and writes its events into the granules of its
//! seasons. The first series of a plant (its anchor) stays at symbol 0 outside
//! those granules, so at zero noise the planted pattern is supported exactly
//! where it was planted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::MinerConfig;
use crate::model::{
    EventId, EventInstance, GranularitySpec, Position, Symbol, SymbolicDatabase, SymbolicSeries,
};
use crate::pattern::PatternKey;
use crate::relation::{classify, RelationConfig, RelationKind};
use crate::season::{ResolvedSeasonConfig, SeasonConfig};

/// One event of a plant template, placed at local fine positions `start..=end` (1-based) of each planted granule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantEvent {
    pub series: usize,
    pub symbol: Symbol,
    pub start: u32,
    pub end: u32,
}

/// Optional expectation checked against the relations the template actually forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantRelation {
    pub relation: RelationKind,
    /// Indices into `PlantSpec::events`.
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub events: Vec<PlantEvent>,
    #[serde(default)]
    pub relations: Vec<PlantRelation>,
    pub season_count: u32,
    pub season_density: u32,
    /// Granule step inside a season.
    pub intra_period: u32,
    /// Granules from the last granule of a season to the first of the next.
    pub inter_distance: u32,
    #[serde(default)]
    pub noise_rate: f64,
    /// First planted granule; drawn at random when absent.
    #[serde(default)]
    pub offset: Option<Position>,
    /// Keep every plant series (not just the anchor) at 0 outside planted granules.
    #[serde(default)]
    pub isolate: bool,
}

impl PlantSpec {
    fn span(&self) -> u64 {
        let c = u64::from(self.season_count);
        let d = u64::from(self.season_density);
        c * (d - 1) * u64::from(self.intra_period) + (c - 1) * u64::from(self.inter_distance) + 1
    }

    /// Planted granules for a given first granule.
    pub fn granules(&self, offset: Position) -> Vec<Position> {
        let mut out = Vec::with_capacity((self.season_count * self.season_density) as usize);
        let mut g = offset;
        for s in 0..self.season_count {
            if s > 0 {
                g += self.inter_distance;
            }
            for j in 0..self.season_density {
                if j > 0 {
                    g += self.intra_period;
                }
                out.push(g);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_series: usize,
    pub n_granules: usize,
    pub factor_m: u32,
    pub alphabet_size: u16,
    /// Range of per-series probabilities of leaving the current symbol.
    pub switch_prob: (f64, f64),
    /// Thresholds under which plants must come out frequent seasonal.
    pub season: ResolvedSeasonConfig,
    pub relation: RelationConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedPattern {
    pub key: PatternKey,
    pub granules: Vec<Position>,
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub db: SymbolicDatabase,
    pub planted: Vec<PlantedPattern>,
}

fn infeasible(msg: impl Into<String>) -> Error {
    Error::InfeasiblePlant(msg.into())
}

impl GeneratorConfig {
    fn validate(&self) -> Result<()> {
        if self.factor_m == 0 || self.alphabet_size < 2 {
            return Err(Error::config("factor_m must be >= 1 and alphabet_size >= 2"));
        }
        let (lo, hi) = self.switch_prob;
        if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) {
            return Err(Error::config(
                "switch_prob must be an ordered range inside [0, 1]",
            ));
        }
        self.season.validate()?;
        self.relation.validate()
    }
}

/// Checks a plant against the generator and derives its pattern key.
fn plant_key(cfg: &GeneratorConfig, p: &PlantSpec, idx: usize) -> Result<PatternKey> {
    let s = &cfg.season;
    let name = format!("plant {idx}");
    if p.events.is_empty() {
        return Err(infeasible(format!("{name} has no events")));
    }
    if !(0.0..0.5).contains(&p.noise_rate) {
        return Err(infeasible(format!("{name}: noise_rate must lie in [0, 0.5)")));
    }
    if p.season_count < s.min_season || p.season_density < s.min_density {
        return Err(infeasible(format!(
            "{name}: {} seasons of {} granules cannot meet min_season {} / min_density {}",
            p.season_count, p.season_density, s.min_season, s.min_density
        )));
    }
    if p.intra_period == 0 || p.intra_period > s.max_period {
        return Err(infeasible(format!(
            "{name}: intra_period {} must lie in 1..={}",
            p.intra_period, s.max_period
        )));
    }
    if p.season_count > 1
        && (p.inter_distance <= s.max_period || !(s.dist_min..=s.dist_max).contains(&p.inter_distance))
    {
        return Err(infeasible(format!(
            "{name}: inter_distance {} must exceed max_period {} and lie in [{}, {}]",
            p.inter_distance, s.max_period, s.dist_min, s.dist_max
        )));
    }
    if p.span() > cfg.n_granules as u64 {
        return Err(infeasible(format!(
            "{name} spans {} granules but only {} exist",
            p.span(),
            cfg.n_granules
        )));
    }
    if let Some(o) = p.offset {
        if o == 0 || u64::from(o) - 1 + p.span() > cfg.n_granules as u64 {
            return Err(infeasible(format!(
                "{name}: offset {o} pushes the plant past the end"
            )));
        }
    }
    let mut insts = Vec::with_capacity(p.events.len());
    for (i, e) in p.events.iter().enumerate() {
        if e.series >= cfg.n_series {
            return Err(infeasible(format!(
                "{name} event {i}: series {} does not exist",
                e.series
            )));
        }
        if e.symbol == 0 || e.symbol >= cfg.alphabet_size {
            return Err(infeasible(format!(
                "{name} event {i}: symbol must lie in 1..{}",
                cfg.alphabet_size
            )));
        }
        if e.start == 0 || e.start > e.end || e.end > cfg.factor_m {
            return Err(infeasible(format!(
                "{name} event {i}: interval [{}, {}] does not fit a granule of {}",
                e.start, e.end, cfg.factor_m
            )));
        }
        if p.events[..i].iter().any(|o| o.series == e.series) {
            return Err(infeasible(format!("{name}: series {} used twice", e.series)));
        }
        insts.push((
            i,
            EventInstance::new(EventId::new(e.series as u32, e.symbol), e.start, e.end),
        ));
    }
    insts.sort_by_key(|a| a.1);
    let mut key = PatternKey::single(insts[0].1.event);
    for j in 1..insts.len() {
        let mut rels = Vec::with_capacity(j);
        for i in 0..j {
            let r = classify(&insts[i].1, &insts[j].1, &cfg.relation).ok_or_else(|| {
                infeasible(format!(
                    "{name}: events {} and {} form no relation under the relation config",
                    insts[i].0, insts[j].0
                ))
            })?;
            rels.push(r);
        }
        key = key.extend(insts[j].1.event, &rels);
    }
    let pos = |orig: usize| insts.iter().position(|(i, _)| *i == orig);
    for r in &p.relations {
        let (Some(a), Some(b)) = (pos(r.left), pos(r.right)) else {
            return Err(infeasible(format!("{name}: relation refers to a missing event")));
        };
        let actual = if a < b {
            key.relation(a, b)
        } else {
            key.relation(b, a)
        };
        if actual != r.relation || a > b {
            return Err(infeasible(format!(
                "{name}: events {} and {} form {:?}, not {:?} in that order",
                r.left, r.right, actual, r.relation
            )));
        }
    }
    Ok(key)
}

/// Generates the database; a pure function of `cfg` (including its seed) and `plants`.
pub fn generate(cfg: &GeneratorConfig, plants: &[PlantSpec]) -> Result<Synthetic> {
    cfg.validate()?;
    let mut owner = vec![None; cfg.n_series];
    let mut keys = Vec::with_capacity(plants.len());
    for (i, p) in plants.iter().enumerate() {
        keys.push(plant_key(cfg, p, i)?);
        for e in &p.events {
            if let Some(prev) = owner[e.series].replace(i) {
                return Err(infeasible(format!(
                    "plants {prev} and {i} both use series {}",
                    e.series
                )));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = cfg.factor_m as usize;
    let len = cfg.n_granules * m;
    let k = cfg.alphabet_size;
    let mut rows: Vec<Vec<Symbol>> = (0..cfg.n_series)
        .map(|_| {
            let switch = rng.random_range(cfg.switch_prob.0..=cfg.switch_prob.1);
            let mut cur: Symbol = rng.random_range(0..k);
            (0..len)
                .map(|_| {
                    if rng.random_bool(switch) {
                        cur = (cur + rng.random_range(1..k)) % k;
                    }
                    cur
                })
                .collect()
        })
        .collect();

    let mut planted = Vec::with_capacity(plants.len());
    for (p, key) in plants.iter().zip(keys) {
        let offset = match p.offset {
            Some(o) => o,
            None => rng.random_range(1..=(cfg.n_granules as u64 - p.span() + 1)) as Position,
        };
        let granules = p.granules(offset);
        for (i, e) in p.events.iter().enumerate() {
            let row = &mut rows[e.series];
            if i == 0 || p.isolate {
                row.fill(0);
            }
            for &g in &granules {
                let lo = (g as usize - 1) * m;
                row[lo..lo + m].fill(0);
                row[lo + e.start as usize - 1..lo + e.end as usize].fill(e.symbol);
            }
        }
        if p.noise_rate > 0.0 {
            for e in &p.events {
                for s in rows[e.series].iter_mut() {
                    if rng.random_bool(p.noise_rate) {
                        *s = (*s + rng.random_range(1..k)) % k;
                    }
                }
            }
        }
        planted.push(PlantedPattern { key, granules });
    }

    let alphabet: Vec<String> = (0..k).map(|a| a.to_string()).collect();
    let series = rows
        .into_iter()
        .enumerate()
        .map(|(i, syms)| SymbolicSeries::new(format!("S{i}"), alphabet.clone(), syms))
        .collect::<Result<Vec<_>>>()?;
    Ok(Synthetic {
        db: SymbolicDatabase::new(series)?,
        planted,
    })
}

/// Raw values that symbolize back to `db` under integer-level cut points
/// (symbol `k` becomes `k` plus jitter in `[-0.45, 0.45)`).
pub fn emit_raw(db: &SymbolicDatabase, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    db.series()
        .iter()
        .map(|s| {
            s.symbols
                .iter()
                .map(|&x| {
                    let v = f64::from(x) + rng.random_range(-0.45..0.45);
                    (v * 1e4).round() / 1e4
                })
                .collect()
        })
        .collect()
}

/// A small random binary database with matching mining settings, sized for
/// differential runs against the oracle.
#[derive(Debug, Clone)]
pub struct RandomCase {
    pub db: SymbolicDatabase,
    pub granularity: GranularitySpec,
    pub miner: MinerConfig,
}

/// Draws up to `max_series` binary series over up to `max_granules` granules
/// and loose thresholds so that multi-event patterns actually appear.
pub fn random_case(seed: u64, max_series: usize, max_granules: usize, k_max: usize) -> Result<RandomCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_series = rng.random_range(1..=max_series.max(1));
    let n_granules = rng.random_range(1..=max_granules.max(1));
    let m: u32 = rng.random_range(1..=4);
    let len = n_granules * m as usize;
    let series = (0..n_series)
        .map(|i| {
            let density = rng.random_range(0.2..0.8);
            let bits: Vec<u8> = (0..len).map(|_| u8::from(rng.random_bool(density))).collect();
            SymbolicSeries::binary(format!("S{i}"), &bits)
        })
        .collect();
    let dist_min = rng.random_range(1..=4);
    let season = SeasonConfig::absolute(
        rng.random_range(1..=3),
        rng.random_range(1..=3),
        dist_min,
        dist_min + rng.random_range(0..=10),
        rng.random_range(1..=3),
    );
    let relation = if rng.random_bool(0.75) {
        RelationConfig::default()
    } else {
        RelationConfig::new(1, 3)?
    };
    Ok(RandomCase {
        db: SymbolicDatabase::new(series)?,
        granularity: GranularitySpec::new("tick", m)?,
        miner: MinerConfig::new(season, relation, k_max),
    })
}
