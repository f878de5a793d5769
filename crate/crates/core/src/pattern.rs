//! Canonical temporal pattern keys.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EventId;
use crate::relation::RelationKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub relation: RelationKind,
    pub left: usize,
    pub right: usize,
}

/// Events in realization order plus the relation of every pair `i < j`.
///
/// Relations are stored grouped by the right-hand event, so appending an event
/// appends its relations to every earlier event.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternKey {
    events: Vec<EventId>,
    relations: Vec<RelationKind>,
}

#[inline]
fn slot(i: usize, j: usize) -> usize {
    j * (j - 1) / 2 + i
}

impl PatternKey {
    pub fn single(e: EventId) -> Self {
        Self {
            events: vec![e],
            relations: Vec::new(),
        }
    }

    pub fn pair(a: EventId, b: EventId, r: RelationKind) -> Self {
        Self {
            events: vec![a, b],
            relations: vec![r],
        }
    }

    /// Builds a key from `(relation, left, right)` triples covering every pair once.
    pub fn from_triples(events: Vec<EventId>, triples: &[(RelationKind, usize, usize)]) -> Result<Self> {
        let k = events.len();
        if k == 0 {
            return Err(Error::config("a pattern needs at least one event"));
        }
        let pairs = k * (k - 1) / 2;
        if triples.len() != pairs {
            return Err(Error::config(format!(
                "a {k}-event pattern needs {pairs} triples, got {}",
                triples.len()
            )));
        }
        let mut relations = vec![None; pairs];
        for &(r, i, j) in triples {
            if i >= j || j >= k {
                return Err(Error::config(format!("invalid triple indices ({i}, {j})")));
            }
            if relations[slot(i, j)].replace(r).is_some() {
                return Err(Error::config(format!("pair ({i}, {j}) given twice")));
            }
        }
        Ok(Self {
            events,
            relations: relations.into_iter().map(Option::unwrap).collect(),
        })
    }

    /// Appends `e`; `rels[i]` is the relation between event `i` and `e`.
    pub fn extend(&self, e: EventId, rels: &[RelationKind]) -> Self {
        assert_eq!(rels.len(), self.events.len());
        let mut events = Vec::with_capacity(self.events.len() + 1);
        events.extend_from_slice(&self.events);
        events.push(e);
        let mut relations = Vec::with_capacity(self.relations.len() + rels.len());
        relations.extend_from_slice(&self.relations);
        relations.extend_from_slice(rels);
        Self { events, relations }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[EventId] {
        &self.events
    }

    pub fn relation(&self, i: usize, j: usize) -> RelationKind {
        debug_assert!(i < j);
        self.relations[slot(i, j)]
    }

    /// The pattern without its last event.
    pub fn prefix(&self) -> Self {
        let k = self.events.len() - 1;
        Self {
            events: self.events[..k].to_vec(),
            relations: self.relations[..k * k.saturating_sub(1) / 2].to_vec(),
        }
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let k = self.events.len();
        (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j)))
    }

    /// Triples sorted by `(left, right)`.
    pub fn triples(&self) -> Vec<Triple> {
        self.pairs()
            .map(|(i, j)| Triple {
                relation: self.relation(i, j),
                left: i,
                right: j,
            })
            .collect()
    }
}

impl Ord for PatternKey {
    /// Size first, then events, then relations in `(left, right)` order.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.events.cmp(&other.events))
            .then_with(|| {
                self.pairs()
                    .map(|(i, j)| self.relation(i, j))
                    .cmp(other.pairs().map(|(i, j)| other.relation(i, j)))
            })
    }
}

impl PartialOrd for PatternKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
