//! Follows / Contains / Overlaps between ordered instance pairs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EventInstance;
use crate::pattern::PatternKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationKind {
    Follows,
    Contains,
    Overlaps,
}

impl RelationKind {
    pub const ALL: [RelationKind; 3] = [Self::Follows, Self::Contains, Self::Overlaps];

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Follows => "->",
            Self::Contains => ">=",
            Self::Overlaps => "()",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationConfig {
    /// Tolerance buffer, in fine granules.
    pub epsilon: u32,
    /// Minimal overlap duration `d_o`, in fine granules.
    pub min_overlap: u32,
}

impl RelationConfig {
    pub fn new(epsilon: u32, min_overlap: u32) -> Result<Self> {
        let cfg = Self { epsilon, min_overlap };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_overlap == 0 {
            return Err(Error::config("min_overlap must be at least 1"));
        }
        if u64::from(self.min_overlap) <= 2 * u64::from(self.epsilon) {
            return Err(Error::config(format!(
                "min_overlap ({}) must exceed twice epsilon ({})",
                self.min_overlap, self.epsilon
            )));
        }
        Ok(())
    }
}

impl Default for RelationConfig {
    fn default() -> Self {
        Self {
            epsilon: 0,
            min_overlap: 1,
        }
    }
}

fn bounds(a: &EventInstance, b: &EventInstance, eps: u32) -> (i64, i64, i64, i64, i64) {
    (
        i64::from(a.start),
        i64::from(a.end),
        i64::from(b.start),
        i64::from(b.end),
        i64::from(eps),
    )
}

/// `b` starts no earlier than `eps` before `a` ends and ends after `a`'s buffered end.
pub fn follows_raw(a: &EventInstance, b: &EventInstance, cfg: &RelationConfig) -> bool {
    let (_, ae, bs, be, eps) = bounds(a, b, cfg.epsilon);
    bs >= ae - eps && be > ae + eps
}

pub fn contains_raw(a: &EventInstance, b: &EventInstance, cfg: &RelationConfig) -> bool {
    let (as_, ae, bs, be, eps) = bounds(a, b, cfg.epsilon);
    as_ <= bs && be <= ae + eps
}

pub fn overlaps_raw(a: &EventInstance, b: &EventInstance, cfg: &RelationConfig) -> bool {
    let (as_, ae, bs, be, eps) = bounds(a, b, cfg.epsilon);
    as_ < bs && be > ae + eps && ae - bs >= i64::from(cfg.min_overlap) - eps
}

/// Relation between `a` and a later instance `b` (canonical order), if any.
#[inline]
pub fn classify(a: &EventInstance, b: &EventInstance, cfg: &RelationConfig) -> Option<RelationKind> {
    debug_assert!(a <= b, "classify expects canonically ordered instances");
    if follows_raw(a, b, cfg) {
        Some(RelationKind::Follows)
    } else if contains_raw(a, b, cfg) {
        Some(RelationKind::Contains)
    } else if overlaps_raw(a, b, cfg) {
        Some(RelationKind::Overlaps)
    } else {
        None
    }
}

/// Searches `seq` for instances realizing every event and relation of `pattern`.
///
/// Pattern events must be realized by strictly increasing instances, so the
/// assignment is injective and every pair is classified in canonical order.
/// Returns the indices of the first assignment found. A one-event pattern
/// reduces to occurrence of its event.
pub fn supports(seq: &[EventInstance], pattern: &PatternKey, cfg: &RelationConfig) -> Option<Vec<usize>> {
    let k = pattern.len();
    if k == 0 || (k >= 2 && seq.len() < 2) {
        return None;
    }
    let mut chosen = Vec::with_capacity(k);
    if extend(seq, pattern, cfg, 0, &mut chosen) {
        Some(chosen)
    } else {
        None
    }
}

fn extend(
    seq: &[EventInstance],
    pattern: &PatternKey,
    cfg: &RelationConfig,
    from: usize,
    chosen: &mut Vec<usize>,
) -> bool {
    let j = chosen.len();
    if j == pattern.len() {
        return true;
    }
    let target = pattern.events()[j];
    for idx in from..seq.len() {
        let inst = &seq[idx];
        if inst.event != target {
            continue;
        }
        let ok = chosen
            .iter()
            .enumerate()
            .all(|(i, &c)| classify(&seq[c], inst, cfg) == Some(pattern.relation(i, j)));
        if ok {
            chosen.push(idx);
            if extend(seq, pattern, cfg, idx + 1, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}
