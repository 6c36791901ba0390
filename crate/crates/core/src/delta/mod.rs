//! Ground deltas between entity states.
//!
//! A [`Delta`] is a pair of disjoint quad sets. It can be computed from two
//! states ([`diff`]), inverted, applied to a quad set, and serialized to the
//! `DELETE DATA` / `INSERT DATA` text stored with each snapshot.

mod text;

use std::collections::BTreeSet;

use crate::rdf::{EntityGraph, NamedNode, Quad, QuadSet, SyntaxError};

pub use text::{from_update_text, to_update_text};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeltaError {
    #[error("quad {0} is both inserted and deleted")]
    Inconsistent(Box<Quad>),
    #[error("quad {0} contains a blank node; deltas must be ground")]
    BlankNode(Box<Quad>),
    #[error("blank node at {0} in update text; deltas must be ground")]
    BlankNodeInUpdate(crate::rdf::Position),
    #[error("cannot diff states of different entities ({0} vs {1})")]
    EntityMismatch(NamedNode, NamedNode),
    #[error("unsupported update form: {0}")]
    DisallowedForm(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// Paired insertion and deletion sets.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct Delta {
    insertions: QuadSet,
    deletions: QuadSet,
}

impl Delta {
    /// Checks disjointness and groundness.
    pub fn new(insertions: QuadSet, deletions: QuadSet) -> Result<Self, DeltaError> {
        if let Some(q) = insertions.intersection(&deletions).next() {
            return Err(DeltaError::Inconsistent(Box::new(q.clone())));
        }
        if let Some(q) = insertions.iter().chain(&deletions).find(|q| !q.is_ground()) {
            return Err(DeltaError::BlankNode(Box::new(q.clone())));
        }
        Ok(Self {
            insertions,
            deletions,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// A delta that only adds `quads`.
    pub fn insert_only(quads: QuadSet) -> Result<Self, DeltaError> {
        Self::new(quads, QuadSet::new())
    }

    pub fn insertions(&self) -> &QuadSet {
        &self.insertions
    }

    pub fn deletions(&self) -> &QuadSet {
        &self.deletions
    }

    pub fn is_empty(&self) -> bool {
        self.insertions.is_empty() && self.deletions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.insertions.len() + self.deletions.len()
    }

    /// Swaps insertions and deletions.
    pub fn invert(&self) -> Delta {
        Delta {
            insertions: self.deletions.clone(),
            deletions: self.insertions.clone(),
        }
    }

    /// `(graph \ deletions) ∪ insertions`.
    pub fn apply(&self, graph: &QuadSet) -> QuadSet {
        let mut out = graph.clone();
        self.apply_in_place(&mut out);
        out
    }

    pub fn apply_in_place(&self, graph: &mut QuadSet) {
        for q in &self.deletions {
            graph.remove(q);
        }
        graph.extend(self.insertions.iter().cloned());
    }

    /// The delta turning `before` into `after`, for arbitrary quad sets.
    pub fn between(before: &QuadSet, after: &QuadSet) -> Result<Delta, DeltaError> {
        Delta::new(
            after.difference(before).cloned().collect(),
            before.difference(after).cloned().collect(),
        )
    }

    pub fn to_update_text(&self) -> String {
        to_update_text(self)
    }
}

/// The delta between two states of the same entity.
pub fn diff(before: &EntityGraph, after: &EntityGraph) -> Result<Delta, DeltaError> {
    if before.entity != after.entity {
        return Err(DeltaError::EntityMismatch(before.entity.clone(), after.entity.clone()));
    }
    Delta::between(&before.quads, &after.quads)
}

pub fn invert(delta: &Delta) -> Delta {
    delta.invert()
}

pub fn apply(delta: &Delta, graph: &BTreeSet<Quad>) -> BTreeSet<Quad> {
    delta.apply(graph)
}
