//! Exact miner: candidate events, then k-event groups and patterns level by level.

mod hlh;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub(crate) use hlh::{Admission, AdmitAll, Ctx};
pub use hlh::{EventEntry, GroupEntry, Hlh1, HlhK, PatternEntry};

use crate::error::{Error, Result};
use crate::model::{EventId, SequenceDatabase};
use crate::relation::{RelationConfig, RelationKind};
pub use crate::result::{GraphSummary, LevelStats, MinedPattern, MiningResult, MiningStats};
use crate::season::{intersect_sorted, SeasonConfig, SupportSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pruning {
    /// Drop groups and patterns whose maxSeason is below `min_season`.
    pub apriori: bool,
    /// Only extend with events (and groups) backed by candidate 2-patterns.
    pub transitivity: bool,
}

impl Default for Pruning {
    fn default() -> Self {
        Self {
            apriori: true,
            transitivity: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinerConfig {
    pub season: SeasonConfig,
    pub relation: RelationConfig,
    /// Largest pattern size mined.
    pub k_max: usize,
    pub pruning: Pruning,
}

impl MinerConfig {
    pub fn new(season: SeasonConfig, relation: RelationConfig, k_max: usize) -> Self {
        Self {
            season,
            relation,
            k_max,
            pruning: Pruning::default(),
        }
    }

    pub fn with_pruning(mut self, pruning: Pruning) -> Self {
        self.pruning = pruning;
        self
    }

    pub(crate) fn ctx<'a>(&self, db: &'a SequenceDatabase) -> Result<Ctx<'a>> {
        if self.k_max == 0 {
            return Err(Error::config("k_max must be at least 1"));
        }
        self.relation.validate()?;
        let season = self.season.resolve(db.len())?;
        Ok(Ctx {
            db,
            season,
            relation: self.relation,
            floor: if self.pruning.apriori {
                season.candidate_threshold()
            } else {
                1
            },
            transitivity: self.pruning.transitivity,
        })
    }
}

/// All frequent seasonal patterns with at most `cfg.k_max` events.
pub fn mine(db: &SequenceDatabase, cfg: &MinerConfig) -> Result<MiningResult> {
    run(db, cfg, &AdmitAll)
}

pub(crate) fn run(db: &SequenceDatabase, cfg: &MinerConfig, admit: &dyn Admission) -> Result<MiningResult> {
    let ctx = cfg.ctx(db)?;
    let mut stats = MiningStats {
        n_granules: db.len(),
        thresholds: Some(ctx.season),
        levels: Vec::new(),
        graph: None,
    };
    let timer = Instant::now();
    let (hlh1, mut s1, mut patterns) = hlh::build_hlh1(&ctx, admit);
    s1.elapsed_ms = ms(timer);
    stats.levels.push(s1);

    if cfg.k_max >= 2 && !hlh1.is_empty() {
        let timer = Instant::now();
        let (hlh2, mut s2) = hlh::level2(&ctx, &hlh1, admit, cfg.k_max >= 3, &mut patterns);
        s2.elapsed_ms = ms(timer);
        stats.levels.push(s2);

        if let Some(hlh2) = hlh2 {
            let mut prev: Option<HlhK> = None;
            for k in 3..=cfg.k_max {
                let p = prev.as_ref().unwrap_or(&hlh2);
                if p.groups().is_empty() {
                    break;
                }
                let timer = Instant::now();
                let (next, mut sk) = hlh::level_k(&ctx, &hlh1, &hlh2, p, k < cfg.k_max, &mut patterns);
                sk.elapsed_ms = ms(timer);
                stats.levels.push(sk);
                match next {
                    Some(n) => prev = Some(n),
                    None => break,
                }
            }
        }
    }

    patterns.sort_unstable_by(|a, b| a.key.cmp(&b.key));
    debug_assert!(
        patterns.windows(2).all(|w| w[0].key != w[1].key),
        "duplicate pattern key"
    );
    Ok(MiningResult { patterns, stats })
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Builds the candidate event table and returns the frequent seasonal single events.
pub fn mine_single_events(db: &SequenceDatabase, cfg: &MinerConfig) -> Result<(Hlh1, Vec<MinedPattern>)> {
    let ctx = cfg.ctx(db)?;
    let (hlh1, _, frequent) = hlh::build_hlh1(&ctx, &AdmitAll);
    Ok((hlh1, frequent))
}

/// Builds the full level-2 table (tuples retained) and its frequent patterns.
pub fn mine_2event_patterns(
    db: &SequenceDatabase,
    hlh1: &Hlh1,
    cfg: &MinerConfig,
) -> Result<(HlhK, Vec<MinedPattern>)> {
    let ctx = cfg.ctx(db)?;
    let mut frequent = Vec::new();
    let (hlh2, _) = hlh::level2(&ctx, hlh1, &AdmitAll, true, &mut frequent);
    frequent.sort_unstable_by(|a, b| a.key.cmp(&b.key));
    Ok((hlh2.expect("level 2 retained"), frequent))
}

/// Candidate events that can still close a pattern of three or more events.
pub fn transitivity_filter(hlh1: &Hlh1, hlh2: &HlhK) -> Vec<EventId> {
    hlh::filtered_f1(hlh1, hlh2)
        .into_iter()
        .map(|i| hlh1.entries()[i].event)
        .collect()
}

/// Groups of `prev` extended by each event of `events`, kept when their
/// intersected support passes the candidate gate.
pub fn candidate_k_groups(
    db: &SequenceDatabase,
    hlh1: &Hlh1,
    prev: &HlhK,
    events: &[EventId],
    cfg: &MinerConfig,
) -> Result<Vec<(Vec<EventId>, SupportSet)>> {
    let ctx = cfg.ctx(db)?;
    let mut out = Vec::new();
    for g in prev.groups() {
        for &e in events {
            let Some(entry) = hlh1.get(e) else { continue };
            if g.events.contains(&e) {
                continue;
            }
            let sup = intersect_sorted(g.support.as_slice(), entry.support.as_slice());
            if ctx.keep(sup.len()) {
                let mut evs = g.events.clone();
                evs.push(e);
                out.push((evs, SupportSet::from_sorted_unchecked(sup)));
            }
        }
    }
    Ok(out)
}

/// Extends `prefix` by `event` under one relation vector (`rels[i]` relates
/// prefix event `i` to `event`), checking level-2 triples from the last
/// prefix event backwards and verifying the survivors granule by granule.
pub fn iterative_check(
    db: &SequenceDatabase,
    hlh1: &Hlh1,
    hlh2: &HlhK,
    prefix: &PatternEntry,
    event: EventId,
    rels: &[RelationKind],
    cfg: &MinerConfig,
) -> Result<Option<PatternEntry>> {
    if rels.len() != prefix.key.len() {
        return Err(Error::config("one relation per prefix event is required"));
    }
    let ctx = cfg.ctx(db)?;
    let Some(entry) = hlh1.get(event) else {
        return Ok(None);
    };
    if prefix.key.events().contains(&event) {
        return Ok(None);
    }
    let ext = hlh::Extension {
        ctx: &ctx,
        hlh2,
        prefix,
        event: entry,
        store: true,
    };
    let start = intersect_sorted(prefix.support.as_slice(), entry.support.as_slice());
    Ok(ext.check(rels, &start))
}

#[cfg(test)]
mod tests;
