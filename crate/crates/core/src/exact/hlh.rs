//! Hierarchical lookup hash tables and the per-level builders.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::model::{EventId, EventInstance, Position, SequenceDatabase};
use crate::pattern::PatternKey;
use crate::relation::{classify, RelationConfig, RelationKind};
use crate::season::{analyze, intersect_sorted, max_season, ResolvedSeasonConfig, SupportSet};

use super::{LevelStats, MinedPattern};

/// Which events and series pairs a run may look at. The exact miner admits
/// everything; the approximate miner plugs in its correlation graph.
pub(crate) trait Admission: Sync {
    fn event(&self, e: EventId) -> bool;
    fn pair(&self, a: EventId, b: EventId) -> bool;
}

pub(crate) struct AdmitAll;

impl Admission for AdmitAll {
    fn event(&self, _: EventId) -> bool {
        true
    }
    fn pair(&self, _: EventId, _: EventId) -> bool {
        true
    }
}

/// Resolved thresholds shared by every level of one run.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Ctx<'a> {
    pub db: &'a SequenceDatabase,
    pub season: ResolvedSeasonConfig,
    pub relation: RelationConfig,
    /// Minimum support size kept at every level (1 when apriori pruning is off, never 0).
    pub floor: u64,
    pub transitivity: bool,
}

impl Ctx<'_> {
    #[inline]
    pub fn keep(&self, support_len: usize) -> bool {
        support_len as u64 >= self.floor
    }

    pub fn mined(&self, key: PatternKey, support: &[Position]) -> Option<MinedPattern> {
        let analysis = analyze(support, &self.season);
        analysis.is_frequent_seasonal.then(|| MinedPattern {
            key,
            support: SupportSet::from_sorted_unchecked(support.to_vec()),
            max_season: max_season(support.len(), self.season.min_density),
            analysis,
        })
    }
}

#[inline]
fn rel_slot(r: RelationKind) -> usize {
    match r {
        RelationKind::Follows => 0,
        RelationKind::Contains => 1,
        RelationKind::Overlaps => 2,
    }
}

/// Support of one candidate event plus its instances per supporting granule.
#[derive(Debug, Clone)]
pub struct EventEntry {
    pub event: EventId,
    pub support: SupportSet,
    offsets: Vec<u32>,
    instances: Vec<u32>,
}

impl EventEntry {
    #[inline]
    fn slot(&self, slot: usize) -> &[u32] {
        &self.instances[self.offsets[slot] as usize..self.offsets[slot + 1] as usize]
    }

    /// Indices (into the granule's instance list) of this event's instances in granule `g`.
    pub fn instances_at(&self, g: Position) -> Option<&[u32]> {
        let slot = self.support.as_slice().binary_search(&g).ok()?;
        Some(self.slot(slot))
    }
}

/// Candidate single events: event table and granule table in one.
#[derive(Debug, Clone, Default)]
pub struct Hlh1 {
    entries: Vec<EventEntry>,
    index: HashMap<EventId, usize>,
}

impl Hlh1 {
    pub fn entries(&self) -> &[EventEntry] {
        &self.entries
    }

    pub fn get(&self, e: EventId) -> Option<&EventEntry> {
        self.index.get(&e).map(|&i| &self.entries[i])
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> + '_ {
        self.entries.iter().map(|e| e.event)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Default)]
struct EntryBuilder {
    support: Vec<Position>,
    offsets: Vec<u32>,
    instances: Vec<u32>,
}

/// One database scan; keeps admitted events whose support passes the floor.
pub(crate) fn build_hlh1(ctx: &Ctx, admit: &dyn Admission) -> (Hlh1, LevelStats, Vec<MinedPattern>) {
    let mut map: HashMap<EventId, EntryBuilder> = HashMap::new();
    for (g, insts) in ctx.db.iter() {
        for (idx, inst) in insts.iter().enumerate() {
            let b = map.entry(inst.event).or_default();
            if b.support.last() != Some(&g) {
                b.support.push(g);
                b.offsets.push(b.instances.len() as u32);
            }
            b.instances.push(idx as u32);
        }
    }
    let mut events: Vec<EventId> = map.keys().copied().collect();
    events.sort_unstable();

    let mut stats = LevelStats::new(1);
    stats.generated = events.len();
    let mut hlh1 = Hlh1::default();
    let mut frequent = Vec::new();
    for e in events {
        if !admit.event(e) {
            stats.pruned_by_graph += 1;
            continue;
        }
        let mut b = map.remove(&e).unwrap();
        if !ctx.keep(b.support.len()) {
            stats.pruned_by_support += 1;
            continue;
        }
        b.offsets.push(b.instances.len() as u32);
        frequent.extend(ctx.mined(PatternKey::single(e), &b.support));
        hlh1.index.insert(e, hlh1.entries.len());
        hlh1.entries.push(EventEntry {
            event: e,
            support: SupportSet::from_sorted_unchecked(b.support),
            offsets: b.offsets,
            instances: b.instances,
        });
    }
    stats.candidates = hlh1.len();
    stats.candidate_patterns = hlh1.len();
    stats.frequent = frequent.len();
    stats.pruned = stats.pruned_by_graph + stats.pruned_by_support;
    (hlh1, stats, frequent)
}

/// A candidate pattern with its realizing instance tuples (when retained).
#[derive(Debug, Clone)]
pub struct PatternEntry {
    pub key: PatternKey,
    pub support: SupportSet,
    offsets: Vec<u32>,
    tuples: Vec<u32>,
}

impl PatternEntry {
    /// Realizing tuples in the `slot`-th supporting granule; each has one instance index per event.
    fn tuples_at_slot(&self, slot: usize) -> std::slice::ChunksExact<'_, u32> {
        let lo = self.offsets[slot] as usize;
        let hi = self.offsets[slot + 1] as usize;
        self.tuples[lo..hi].chunks_exact(self.key.len())
    }

    /// Realizing instance tuples of granule `g`, empty when `g` is not supporting or tuples were not kept.
    pub fn tuples_at(&self, g: Position) -> Vec<&[u32]> {
        match self.support.as_slice().binary_search(&g) {
            Ok(slot) if !self.offsets.is_empty() => self.tuples_at_slot(slot).collect(),
            _ => Vec::new(),
        }
    }

    fn has_tuples(&self) -> bool {
        !self.offsets.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct GroupEntry {
    pub events: Vec<EventId>,
    pub support: SupportSet,
    /// Indices into the level's pattern table.
    pub patterns: Vec<usize>,
}

/// Candidate k-event groups and patterns.
#[derive(Debug, Clone)]
pub struct HlhK {
    pub k: usize,
    groups: Vec<GroupEntry>,
    patterns: Vec<PatternEntry>,
    /// Level 2 only: `(E_i, E_j)` to pattern index per relation.
    pairs: HashMap<(EventId, EventId), [Option<u32>; 3]>,
}

impl HlhK {
    pub(crate) fn new(k: usize) -> Self {
        Self {
            k,
            groups: Vec::new(),
            patterns: Vec::new(),
            pairs: HashMap::new(),
        }
    }

    pub fn groups(&self) -> &[GroupEntry] {
        &self.groups
    }

    pub fn patterns(&self) -> &[PatternEntry] {
        &self.patterns
    }

    pub fn pattern(&self, key: &PatternKey) -> Option<&PatternEntry> {
        if self.k == 2 && key.len() == 2 {
            let e = key.events();
            return self.pair(e[0], e[1], key.relation(0, 1));
        }
        self.patterns.iter().find(|p| &p.key == key)
    }

    /// Level-2 lookup of `(r, a, b)`.
    #[inline]
    pub fn pair(&self, a: EventId, b: EventId, r: RelationKind) -> Option<&PatternEntry> {
        let idx = self.pairs.get(&(a, b))?[rel_slot(r)]?;
        Some(&self.patterns[idx as usize])
    }

    fn has_pair(&self, a: EventId, b: EventId) -> bool {
        self.pairs.contains_key(&(a, b))
    }

    fn push_group(&mut self, events: Vec<EventId>, support: SupportSet, pats: Vec<PatternEntry>) {
        let mut idx = Vec::with_capacity(pats.len());
        for p in pats {
            if self.k == 2 {
                let e = p.key.events();
                let slot = rel_slot(p.key.relation(0, 1));
                self.pairs.entry((e[0], e[1])).or_default()[slot] = Some(self.patterns.len() as u32);
            }
            idx.push(self.patterns.len());
            self.patterns.push(p);
        }
        self.groups.push(GroupEntry {
            events,
            support,
            patterns: idx,
        });
    }
}

/// Per-relation accumulator of supports and tuples for one group.
#[derive(Default)]
struct Acc {
    support: Vec<Position>,
    offsets: Vec<u32>,
    tuples: Vec<u32>,
}

impl Acc {
    fn open(&mut self, g: Position, store: bool) {
        self.support.push(g);
        if store {
            self.offsets.push(self.tuples.len() as u32);
        }
    }

    fn into_entry(mut self, key: PatternKey, store: bool) -> PatternEntry {
        if store {
            self.offsets.push(self.tuples.len() as u32);
        }
        PatternEntry {
            key,
            support: SupportSet::from_sorted_unchecked(self.support),
            offsets: self.offsets,
            tuples: self.tuples,
        }
    }
}

/// Outcome of examining one generated group.
#[derive(Default)]
struct GroupOutcome {
    pruned_by_graph: bool,
    pruned_by_transitivity: bool,
    pruned_by_support: bool,
    candidate: Option<(Vec<EventId>, SupportSet, Vec<PatternEntry>)>,
    n_patterns: usize,
    frequent: Vec<MinedPattern>,
}

impl GroupOutcome {
    fn tally(
        outcomes: Vec<GroupOutcome>,
        stats: &mut LevelStats,
        next: &mut Option<HlhK>,
        out: &mut Vec<MinedPattern>,
    ) {
        stats.generated += outcomes.len();
        let mut candidates = 0;
        let mut patterns = 0;
        for o in outcomes {
            stats.pruned_by_graph += usize::from(o.pruned_by_graph);
            stats.pruned_by_transitivity += usize::from(o.pruned_by_transitivity);
            stats.pruned_by_support += usize::from(o.pruned_by_support);
            if !(o.pruned_by_graph || o.pruned_by_transitivity || o.pruned_by_support) {
                candidates += 1;
            }
            patterns += o.n_patterns;
            out.extend(o.frequent);
            if let (Some(level), Some((events, sup, pats))) = (next.as_mut(), o.candidate) {
                if !pats.is_empty() {
                    level.push_group(events, sup, pats);
                }
            }
        }
        stats.candidates = candidates;
        stats.candidate_patterns = patterns;
        stats.pruned = stats.pruned_by_graph + stats.pruned_by_transitivity + stats.pruned_by_support;
    }
}

/// Merges two event supports, returning `(granule, slot in a, slot in b)`.
fn merge_slots(a: &[Position], b: &[Position]) -> Vec<(Position, u32, u32)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push((a[i], i as u32, j as u32));
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Classifies every ordered instance pair of the group `(a, b)` in each shared granule.
fn pair_group(ctx: &Ctx, a: &EventEntry, b: &EventEntry, store: bool) -> GroupOutcome {
    let slots = merge_slots(a.support.as_slice(), b.support.as_slice());
    if !ctx.keep(slots.len()) {
        return GroupOutcome {
            pruned_by_support: true,
            ..Default::default()
        };
    }
    let mut acc: [Acc; 3] = Default::default();
    for &(g, sa, sb) in &slots {
        let insts = ctx.db.granule(g);
        let mut seen = [false; 3];
        for &x in a.slot(sa as usize) {
            for &y in b.slot(sb as usize) {
                if x >= y {
                    continue;
                }
                let Some(r) = classify(&insts[x as usize], &insts[y as usize], &ctx.relation) else {
                    continue;
                };
                let s = rel_slot(r);
                if !seen[s] {
                    seen[s] = true;
                    acc[s].open(g, store);
                }
                if store {
                    acc[s].tuples.extend([x, y]);
                }
            }
        }
    }
    let mut patterns = Vec::new();
    let mut frequent = Vec::new();
    for (r, acc) in RelationKind::ALL.into_iter().zip(acc) {
        if !ctx.keep(acc.support.len()) {
            continue;
        }
        let key = PatternKey::pair(a.event, b.event, r);
        frequent.extend(ctx.mined(key.clone(), &acc.support));
        patterns.push(acc.into_entry(key, store));
    }
    let n_patterns = patterns.len();
    let support = SupportSet::from_sorted_unchecked(slots.iter().map(|s| s.0).collect());
    GroupOutcome {
        candidate: Some((
            vec![a.event, b.event],
            support,
            if store { patterns } else { Vec::new() },
        )),
        n_patterns,
        frequent,
        ..Default::default()
    }
}

/// Level 2: every ordered pair of distinct candidate events.
pub(crate) fn level2(
    ctx: &Ctx,
    hlh1: &Hlh1,
    admit: &dyn Admission,
    store: bool,
    out: &mut Vec<MinedPattern>,
) -> (Option<HlhK>, LevelStats) {
    let entries = hlh1.entries();
    let outcomes: Vec<GroupOutcome> = (0..entries.len())
        .into_par_iter()
        .flat_map_iter(|i| (0..entries.len()).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| {
            let (a, b) = (&entries[i], &entries[j]);
            if !admit.pair(a.event, b.event) {
                return GroupOutcome {
                    pruned_by_graph: true,
                    ..Default::default()
                };
            }
            pair_group(ctx, a, b, store)
        })
        .collect();
    let mut stats = LevelStats::new(2);
    let mut next = store.then(|| HlhK::new(2));
    let before = out.len();
    GroupOutcome::tally(outcomes, &mut stats, &mut next, out);
    stats.frequent = out.len() - before;
    (next, stats)
}

/// Events that close at least one candidate 2-pattern as its right-hand event.
/// Any k-pattern (k >= 3) ending in `E` needs `(r, E_i, E)` in the level-2 table.
pub(crate) fn filtered_f1(hlh1: &Hlh1, hlh2: &HlhK) -> Vec<usize> {
    let mut rhs: Vec<EventId> = hlh2.pairs.keys().map(|&(_, b)| b).collect();
    rhs.sort_unstable();
    rhs.dedup();
    rhs.iter().filter_map(|e| hlh1.index.get(e).copied()).collect()
}

/// Extends candidate (k-1)-patterns of one prefix group by one event.
pub(crate) struct Extension<'a> {
    pub ctx: &'a Ctx<'a>,
    pub hlh2: &'a HlhK,
    pub prefix: &'a PatternEntry,
    pub event: &'a EventEntry,
    pub store: bool,
}

impl Extension<'_> {
    /// Enumerates relation vectors with the iterative triple check, last prefix event first.
    fn search(&self, i: usize, rels: &mut [RelationKind], sup: Vec<Position>, out: &mut Vec<PatternEntry>) {
        if i == 0 {
            if let Some(p) = self.verify(rels, &sup) {
                out.push(p);
            }
            return;
        }
        let left = self.prefix.key.events()[i - 1];
        for r in RelationKind::ALL {
            let Some(p2) = self.hlh2.pair(left, self.event.event, r) else {
                continue;
            };
            let narrowed = intersect_sorted(&sup, p2.support.as_slice());
            if self.ctx.keep(narrowed.len()) {
                rels[i - 1] = r;
                self.search(i - 1, rels, narrowed, out);
            }
        }
    }

    /// Checks one relation vector; `rels[i]` relates prefix event `i` to the new event.
    pub fn check(&self, rels: &[RelationKind], sup: &[Position]) -> Option<PatternEntry> {
        let mut sup = sup.to_vec();
        for i in (0..rels.len()).rev() {
            let p2 = self
                .hlh2
                .pair(self.prefix.key.events()[i], self.event.event, rels[i])?;
            sup = intersect_sorted(&sup, p2.support.as_slice());
            if !self.ctx.keep(sup.len()) {
                return None;
            }
        }
        self.verify(rels, &sup)
    }

    /// Scans the granules left after intersection for a realizing tuple.
    fn verify(&self, rels: &[RelationKind], sup: &[Position]) -> Option<PatternEntry> {
        let k1 = self.prefix.key.len();
        let psup = self.prefix.support.as_slice();
        let esup = self.event.support.as_slice();
        let (mut pp, mut pe) = (0, 0);
        let mut acc = Acc::default();
        for &g in sup {
            while psup[pp] < g {
                pp += 1;
            }
            while esup[pe] < g {
                pe += 1;
            }
            let insts = self.ctx.db.granule(g);
            let ys = self.event.slot(pe);
            let mut opened = false;
            'tuples: for t in self.prefix.tuples_at_slot(pp) {
                let last = t[k1 - 1];
                for &y in ys {
                    if y <= last || !realizes(insts, t, y, rels, &self.ctx.relation) {
                        continue;
                    }
                    if !opened {
                        opened = true;
                        acc.open(g, self.store);
                    }
                    if !self.store {
                        break 'tuples;
                    }
                    acc.tuples.extend_from_slice(t);
                    acc.tuples.push(y);
                }
            }
        }
        if !self.ctx.keep(acc.support.len()) {
            return None;
        }
        let key = self.prefix.key.extend(self.event.event, rels);
        Some(acc.into_entry(key, self.store))
    }
}

#[inline]
fn realizes(insts: &[EventInstance], t: &[u32], y: u32, rels: &[RelationKind], cfg: &RelationConfig) -> bool {
    let b = &insts[y as usize];
    t.iter()
        .zip(rels)
        .all(|(&x, &r)| classify(&insts[x as usize], b, cfg) == Some(r))
}

/// Level k >= 3: prefix groups times (filtered) candidate events.
pub(crate) fn level_k(
    ctx: &Ctx,
    hlh1: &Hlh1,
    hlh2: &HlhK,
    prev: &HlhK,
    store: bool,
    out: &mut Vec<MinedPattern>,
) -> (Option<HlhK>, LevelStats) {
    let k = prev.k + 1;
    let f1: Vec<usize> = if ctx.transitivity {
        filtered_f1(hlh1, hlh2)
    } else {
        (0..hlh1.len()).collect()
    };
    let groups = prev.groups();
    let outcomes: Vec<GroupOutcome> = groups
        .par_iter()
        .flat_map_iter(|grp| f1.iter().map(move |&e| (grp, e)))
        .filter(|(grp, e)| !grp.events.contains(&hlh1.entries[*e].event))
        .map(|(grp, e)| extend_group(ctx, hlh2, prev, grp, &hlh1.entries[e], store))
        .collect();
    let mut stats = LevelStats::new(k);
    let mut next = store.then(|| HlhK::new(k));
    let before = out.len();
    GroupOutcome::tally(outcomes, &mut stats, &mut next, out);
    stats.frequent = out.len() - before;
    (next, stats)
}

fn extend_group(
    ctx: &Ctx,
    hlh2: &HlhK,
    prev: &HlhK,
    grp: &GroupEntry,
    e: &EventEntry,
    store: bool,
) -> GroupOutcome {
    if ctx.transitivity && !grp.events.iter().all(|&a| hlh2.has_pair(a, e.event)) {
        return GroupOutcome {
            pruned_by_transitivity: true,
            ..Default::default()
        };
    }
    let support = intersect_sorted(grp.support.as_slice(), e.support.as_slice());
    if !ctx.keep(support.len()) {
        return GroupOutcome {
            pruned_by_support: true,
            ..Default::default()
        };
    }
    let mut patterns = Vec::new();
    for &pi in &grp.patterns {
        let prefix = &prev.patterns[pi];
        debug_assert!(prefix.has_tuples());
        let ext = Extension {
            ctx,
            hlh2,
            prefix,
            event: e,
            store,
        };
        let start = intersect_sorted(prefix.support.as_slice(), &support);
        if !ctx.keep(start.len()) {
            continue;
        }
        let mut rels = vec![RelationKind::Follows; prefix.key.len()];
        ext.search(prefix.key.len(), &mut rels, start, &mut patterns);
    }
    let frequent = patterns
        .iter()
        .filter_map(|p| ctx.mined(p.key.clone(), p.support.as_slice()))
        .collect();
    let mut events = grp.events.clone();
    events.push(e.event);
    GroupOutcome {
        n_patterns: patterns.len(),
        candidate: Some((
            events,
            SupportSet::from_sorted_unchecked(support),
            if store { patterns } else { Vec::new() },
        )),
        frequent,
        ..Default::default()
    }
}
