//! Brute-force reference miner for toy databases.
//!
//! Enumerates every ordered tuple of distinct events and every relation
//! assignment, and counts support by searching each granule directly. It uses
//! nothing from the exact miner, so a bug in its tables or pruning cannot
//! hide here.

use crate::error::{Error, Result};
use crate::exact::MinerConfig;
use crate::model::{EventId, SequenceDatabase};
use crate::pattern::PatternKey;
use crate::relation::{supports, RelationKind};
use crate::result::{MinedPattern, MiningResult, MiningStats};
use crate::season::{analyze, max_season, SupportSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Refuse databases with more distinct events than this.
    pub max_events_total: usize,
    /// Largest pattern size enumerated; at most 3.
    pub max_pattern_size: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_events_total: 16,
            max_pattern_size: 3,
        }
    }
}

fn tuples(events: &[EventId], k: usize, cur: &mut Vec<EventId>, out: &mut Vec<Vec<EventId>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for &e in events {
        if !cur.contains(&e) {
            cur.push(e);
            tuples(events, k, cur, out);
            cur.pop();
        }
    }
}

pub fn oracle_mine(db: &SequenceDatabase, cfg: &MinerConfig, limits: &OracleLimits) -> Result<MiningResult> {
    if limits.max_pattern_size > 3 {
        return Err(Error::OracleLimit("pattern size limit cannot exceed 3".into()));
    }
    if cfg.k_max == 0 {
        return Err(Error::config("k_max must be at least 1"));
    }
    if cfg.k_max > limits.max_pattern_size {
        return Err(Error::OracleLimit(format!(
            "k_max {} exceeds the limit of {}",
            cfg.k_max, limits.max_pattern_size
        )));
    }
    cfg.relation.validate()?;
    let season = cfg.season.resolve(db.len())?;
    let events = db.distinct_events();
    if events.len() > limits.max_events_total {
        return Err(Error::OracleLimit(format!(
            "{} distinct events, limit is {}",
            events.len(),
            limits.max_events_total
        )));
    }

    let mut patterns = Vec::new();
    for k in 1..=cfg.k_max {
        let mut all = Vec::new();
        tuples(&events, k, &mut Vec::new(), &mut all);
        let n_pairs = k * (k - 1) / 2;
        let n_assign = 3usize.pow(n_pairs as u32);
        for evs in all {
            for code in 0..n_assign {
                let mut c = code;
                let mut triples = Vec::with_capacity(n_pairs);
                for i in 0..k {
                    for j in i + 1..k {
                        triples.push((RelationKind::ALL[c % 3], i, j));
                        c /= 3;
                    }
                }
                let key = PatternKey::from_triples(evs.clone(), &triples)?;
                let sup: Vec<u32> = db
                    .iter()
                    .filter(|(_, seq)| supports(seq, &key, &cfg.relation).is_some())
                    .map(|(p, _)| p)
                    .collect();
                let analysis = analyze(&sup, &season);
                if analysis.is_frequent_seasonal {
                    patterns.push(MinedPattern {
                        key,
                        max_season: max_season(sup.len(), season.min_density),
                        support: SupportSet::new(sup)?,
                        analysis,
                    });
                }
            }
        }
    }
    patterns.sort_unstable_by(|a, b| a.key.cmp(&b.key));
    Ok(MiningResult {
        patterns,
        stats: MiningStats {
            n_granules: db.len(),
            thresholds: Some(season),
            ..Default::default()
        },
    })
}
