//! Granularities, symbolic databases and the per-granule sequence database.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index into a series' alphabet.
pub type Symbol = u16;

/// 1-based granule position.
pub type Position = u32;

/// Distance between two granule positions.
pub fn period(a: Position, b: Position) -> u32 {
    a.abs_diff(b)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GranularitySpec {
    pub fine_unit_label: String,
    /// Fine granules per coarse granule.
    pub factor_m: u32,
}

impl GranularitySpec {
    pub fn new(fine_unit_label: impl Into<String>, factor_m: u32) -> Result<Self> {
        if factor_m == 0 {
            return Err(Error::config("granularity factor m must be at least 1"));
        }
        Ok(Self {
            fine_unit_label: fine_unit_label.into(),
            factor_m,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicSeries {
    pub id: String,
    pub alphabet: Vec<String>,
    pub symbols: Vec<Symbol>,
}

impl SymbolicSeries {
    pub fn new(id: impl Into<String>, alphabet: Vec<String>, symbols: Vec<Symbol>) -> Result<Self> {
        let id = id.into();
        if alphabet.len() < 2 {
            return Err(Error::Database(format!(
                "series `{id}` needs an alphabet of at least two symbols"
            )));
        }
        if alphabet.len() > Symbol::MAX as usize {
            return Err(Error::Database(format!("series `{id}` alphabet is too large")));
        }
        if let Some(pos) = symbols.iter().position(|&s| s as usize >= alphabet.len()) {
            return Err(Error::Database(format!(
                "series `{id}` position {} holds symbol {} outside its alphabet of {}",
                pos + 1,
                symbols[pos],
                alphabet.len()
            )));
        }
        Ok(Self {
            id,
            alphabet,
            symbols,
        })
    }

    /// Series over the alphabet `{"0", "1"}`. Panics on values other than 0 or 1.
    pub fn binary(id: impl Into<String>, bits: &[u8]) -> Self {
        let symbols = bits
            .iter()
            .map(|&b| {
                assert!(b <= 1, "binary series takes 0/1 values");
                Symbol::from(b)
            })
            .collect();
        Self {
            id: id.into(),
            alphabet: vec!["0".into(), "1".into()],
            symbols,
        }
    }

    /// Parses a compact string such as `"110100"` into a binary series.
    pub fn from_bits(id: impl Into<String>, bits: &str) -> Result<Self> {
        let id = id.into();
        let mut out = Vec::with_capacity(bits.len());
        for (i, c) in bits.chars().enumerate() {
            match c {
                '0' => out.push(0),
                '1' => out.push(1),
                _ => {
                    return Err(Error::Database(format!(
                        "series `{id}` position {}: expected 0 or 1, found {c:?}",
                        i + 1
                    )))
                }
            }
        }
        Ok(Self::binary(id, &out))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Equal-length symbolic series at the fine granularity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicDatabase {
    series: Vec<SymbolicSeries>,
}

impl SymbolicDatabase {
    pub fn new(series: Vec<SymbolicSeries>) -> Result<Self> {
        if series.len() > u32::MAX as usize {
            return Err(Error::Database("too many series".into()));
        }
        let mut seen = HashSet::new();
        for s in &series {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::Database(format!("duplicate series id `{}`", s.id)));
            }
        }
        if let Some(first) = series.first() {
            for s in &series[1..] {
                if s.len() != first.len() {
                    return Err(Error::Database(format!(
                        "series `{}` has length {} but `{}` has length {}",
                        s.id,
                        s.len(),
                        first.id,
                        first.len()
                    )));
                }
            }
            if first.len() > Position::MAX as usize {
                return Err(Error::Database("series too long".into()));
            }
        }
        Ok(Self { series })
    }

    pub fn series(&self) -> &[SymbolicSeries] {
        &self.series
    }

    /// Number of fine granules `L`.
    pub fn len(&self) -> usize {
        self.series.first().map_or(0, SymbolicSeries::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A `(series, symbol)` pair, e.g. `C:1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventId {
    pub series: u32,
    pub symbol: Symbol,
}

impl EventId {
    pub const fn new(series: u32, symbol: Symbol) -> Self {
        Self { series, symbol }
    }
}

/// One maximal run of a symbol inside a coarse granule, in fine positions (inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventInstance {
    pub event: EventId,
    pub start: Position,
    pub end: Position,
}

impl EventInstance {
    pub fn new(event: EventId, start: Position, end: Position) -> Self {
        debug_assert!(start <= end);
        Self { event, start, end }
    }
}

impl Ord for EventInstance {
    /// Start ascending, end descending, then series and symbol.
    fn cmp(&self, other: &Self) -> Ordering {
        self.start
            .cmp(&other.start)
            .then_with(|| other.end.cmp(&self.end))
            .then_with(|| self.event.cmp(&other.event))
    }
}

impl PartialOrd for EventInstance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Event instances grouped by coarse granule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceDatabase {
    granules: Vec<Vec<EventInstance>>,
    factor_m: u32,
    series_ids: Vec<String>,
    alphabets: Vec<Vec<String>>,
}

impl SequenceDatabase {
    /// Number of coarse granules `N`.
    pub fn len(&self) -> usize {
        self.granules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.granules.is_empty()
    }

    pub fn factor_m(&self) -> u32 {
        self.factor_m
    }

    /// Instances of granule `p` (1-based) in canonical order.
    pub fn granule(&self, p: Position) -> &[EventInstance] {
        &self.granules[p as usize - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Position, &[EventInstance])> + '_ {
        self.granules
            .iter()
            .enumerate()
            .map(|(i, g)| (i as Position + 1, g.as_slice()))
    }

    pub fn series_ids(&self) -> &[String] {
        &self.series_ids
    }

    pub fn n_series(&self) -> usize {
        self.series_ids.len()
    }

    pub fn alphabet(&self, series: u32) -> &[String] {
        &self.alphabets[series as usize]
    }

    pub fn n_instances(&self) -> usize {
        self.granules.iter().map(Vec::len).sum()
    }

    pub fn event_label(&self, e: EventId) -> EventLabel<'_> {
        EventLabel { db: self, event: e }
    }

    /// Parses a label such as `C:1` back into an event id.
    pub fn parse_event(&self, label: &str) -> Option<EventId> {
        let (series, symbol) = label.rsplit_once(':')?;
        let s = self.series_ids.iter().position(|id| id == series)?;
        let k = self.alphabets[s].iter().position(|a| a == symbol)?;
        Some(EventId::new(s as u32, k as Symbol))
    }

    /// Every event that occurs somewhere in the database, sorted.
    pub fn distinct_events(&self) -> Vec<EventId> {
        let mut seen: Vec<EventId> = self
            .granules
            .iter()
            .flatten()
            .map(|i| i.event)
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        seen.sort_unstable();
        seen
    }

    /// Rebuilds the first `N*m` symbols of one series from its instances.
    pub fn reconstruct(&self, series: u32) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(self.granules.len() * self.factor_m as usize);
        for g in &self.granules {
            let mut runs: Vec<&EventInstance> = g.iter().filter(|i| i.event.series == series).collect();
            runs.sort_by_key(|i| i.start);
            for r in runs {
                out.extend(std::iter::repeat_n(
                    r.event.symbol,
                    (r.end - r.start + 1) as usize,
                ));
            }
        }
        out
    }
}

pub struct EventLabel<'a> {
    db: &'a SequenceDatabase,
    event: EventId,
}

impl fmt::Display for EventLabel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.event.series as usize;
        write!(
            f,
            "{}:{}",
            self.db.series_ids[s], self.db.alphabets[s][self.event.symbol as usize]
        )
    }
}

/// Splits the symbolic database into coarse granules of `m` fine positions and
/// turns every maximal same-symbol run of each series into an instance. A
/// trailing partial granule is dropped.
pub fn build_sequence_db(db: &SymbolicDatabase, spec: &GranularitySpec) -> Result<SequenceDatabase> {
    if spec.factor_m == 0 {
        return Err(Error::config("granularity factor m must be at least 1"));
    }
    let m = spec.factor_m as usize;
    let n = db.len() / m;
    let mut granules = Vec::with_capacity(n);
    for g in 0..n {
        let lo = g * m;
        let mut insts = Vec::new();
        for (s, series) in db.series().iter().enumerate() {
            let sym = &series.symbols[lo..lo + m];
            let mut run_start = 0;
            for i in 1..=m {
                if i == m || sym[i] != sym[run_start] {
                    insts.push(EventInstance::new(
                        EventId::new(s as u32, sym[run_start]),
                        (lo + run_start + 1) as Position,
                        (lo + i) as Position,
                    ));
                    run_start = i;
                }
            }
        }
        insts.sort_unstable();
        granules.push(insts);
    }
    Ok(SequenceDatabase {
        granules,
        factor_m: spec.factor_m,
        series_ids: db.series().iter().map(|s| s.id.clone()).collect(),
        alphabets: db.series().iter().map(|s| s.alphabet.clone()).collect(),
    })
}
