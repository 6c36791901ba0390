use std::collections::BTreeSet;
use std::sync::{Condvar, Mutex};

use crate::rdf::NamedNode;

/// Per-entity write locks. A set of entities is acquired all at once, so
/// multi-entity operations cannot deadlock against each other.
#[derive(Default)]
pub struct EntityLocks {
    held: Mutex<BTreeSet<NamedNode>>,
    released: Condvar,
}

pub struct LockGuard<'a> {
    locks: &'a EntityLocks,
    entities: BTreeSet<NamedNode>,
}

impl EntityLocks {
    pub fn new() -> Self {
        Self::default()
    }

    /// Blocks until none of `entities` is held, then holds all of them.
    pub fn acquire<'a>(&'a self, entities: impl IntoIterator<Item = NamedNode>) -> LockGuard<'a> {
        let entities: BTreeSet<NamedNode> = entities.into_iter().collect();
        let mut held = self.held.lock().expect("lock table poisoned");
        while entities.iter().any(|e| held.contains(e)) {
            held = self.released.wait(held).expect("lock table poisoned");
        }
        held.extend(entities.iter().cloned());
        LockGuard { locks: self, entities }
    }
}

impl LockGuard<'_> {
    pub fn covers(&self, entity: &NamedNode) -> bool {
        self.entities.contains(entity)
    }
}

impl Drop for LockGuard<'_> {
    fn drop(&mut self) {
        let mut held = self.locks.held.lock().expect("lock table poisoned");
        for e in &self.entities {
            held.remove(e);
        }
        self.locks.released.notify_all();
    }
}
