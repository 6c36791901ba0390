use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::write::Transition;
use super::{ser, Service, ServiceError};
use crate::delta::Delta;
use crate::provenance::{self, ProvenanceChain, Snapshot, Timestamp};
use crate::rdf::{NamedNode, QuadSet, Term};
use crate::time_travel;

/// One added or removed value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Change {
    pub property: NamedNode,
    pub label: String,
    #[serde(serialize_with = "ser::term")]
    pub value: Term,
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SnapshotSummary {
    pub id: NamedNode,
    pub sequence: u64,
    pub agent: NamedNode,
    pub primary_source: Option<NamedNode>,
    #[serde(serialize_with = "ser::timestamp")]
    pub generated_at: Timestamp,
    #[serde(serialize_with = "ser::opt_timestamp")]
    pub invalidated_at: Option<Timestamp>,
    pub description: String,
    pub is_deletion: bool,
    pub additions: Vec<Change>,
    pub deletions: Vec<Change>,
}

impl Service {
    /// Snapshots of an entity, newest first. Changes follow the order of
    /// the display rule's properties.
    pub fn get_history(&self, entity: &NamedNode) -> Result<Vec<SnapshotSummary>, ServiceError> {
        let chain = self.load_chain(entity)?;
        if chain.is_empty() {
            return Err(ServiceError::NotFound(entity.clone()));
        }
        let types: Vec<NamedNode> = chain
            .snapshots
            .iter()
            .flat_map(|s| Self::types_in(s.delta.insertions()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let rule = self.rule_for(&types);
        let mut labels: BTreeMap<NamedNode, String> = BTreeMap::new();
        let mut displays: BTreeMap<NamedNode, String> = BTreeMap::new();
        let mut changes = |quads: &QuadSet| -> Result<Vec<Change>, ServiceError> {
            let mut out = Vec::new();
            for q in quads {
                let label = labels
                    .entry(q.predicate.clone())
                    .or_insert_with(|| {
                        rule.and_then(|r| r.property(&q.predicate))
                            .map_or_else(|| q.predicate.as_str().to_owned(), |pd| pd.display_name.clone())
                    })
                    .clone();
                let display = match &q.object {
                    Term::NamedNode(o) => match displays.get(o) {
                        Some(d) => d.clone(),
                        None => {
                            let d = self.display_of(o)?;
                            displays.insert(o.clone(), d.clone());
                            d
                        }
                    },
                    other => other.value().to_owned(),
                };
                out.push(Change {
                    property: q.predicate.clone(),
                    label,
                    value: q.object.clone(),
                    display,
                });
            }
            out.sort_by_key(|c: &Change| {
                let at = rule.and_then(|r| r.display_properties.iter().position(|pd| pd.property == c.property));
                (at.unwrap_or(usize::MAX), c.property.clone(), c.value.clone())
            });
            Ok(out)
        };
        let mut out = Vec::with_capacity(chain.snapshots.len());
        for s in chain.snapshots.iter().rev() {
            out.push(SnapshotSummary {
                id: s.id.clone(),
                sequence: s.sequence,
                agent: s.agent.clone(),
                primary_source: s.primary_source.clone(),
                generated_at: s.generated_at,
                invalidated_at: s.invalidated_at,
                description: s.description.clone(),
                is_deletion: s.is_terminal(),
                additions: changes(s.delta.insertions())?,
                deletions: changes(s.delta.deletions())?,
            });
        }
        Ok(out)
    }

    /// The entity as it was right after snapshot `k`.
    pub fn get_version(&self, entity: &NamedNode, k: u64) -> Result<time_travel::VersionView, ServiceError> {
        let chain = self.load_chain(entity)?;
        if chain.is_empty() {
            return Err(ServiceError::NotFound(entity.clone()));
        }
        let current = self.live_state(&chain)?;
        Ok(time_travel::materialize(&chain, &current, k)?)
    }

    /// Live quads, or nothing for a deleted entity.
    fn live_state(&self, chain: &ProvenanceChain) -> Result<QuadSet, ServiceError> {
        if chain.is_deleted() {
            Ok(QuadSet::new())
        } else {
            self.entity_quads(&chain.entity)
        }
    }

    /// Every entity a restore of `entity` to `k` touches, with its target
    /// sequence (0: delete). Linked entities whose state changed since
    /// snapshot `k` was taken are reverted too; the search continues past
    /// them only through entities the display config hides from the catalog.
    fn restore_plan(&self, entity: &NamedNode, k: u64) -> Result<BTreeMap<NamedNode, u64>, ServiceError> {
        let chain = self.load_chain(entity)?;
        if chain.is_empty() {
            return Err(ServiceError::NotFound(entity.clone()));
        }
        let n = chain.len();
        if k == 0 || k >= n {
            return Err(ServiceError::OutOfRange { k, n: n - 1 });
        }
        let at_time = chain.get(k).expect("k in range").generated_at;
        let mut plan = BTreeMap::from([(entity.clone(), k)]);
        let mut queue = vec![(chain, k)];
        while let Some((chain, k)) = queue.pop() {
            let current = self.live_state(&chain)?;
            let restored = match k {
                0 => QuadSet::new(),
                k => time_travel::materialize(&chain, &current, k)?.quads,
            };
            let targets = time_travel::cascade_targets(&chain.entity, &restored, &current, &self.data, &self.prov, &at_time)?;
            for (target, kt) in targets {
                if plan.contains_key(&target) {
                    continue;
                }
                plan.insert(target.clone(), kt);
                let target_chain = self.load_chain(&target)?;
                let live = self.live_state(&target_chain)?;
                let mut types = Self::types_in(&live);
                if kt > 0 {
                    types.extend(Self::types_in(&time_travel::materialize(&target_chain, &live, kt)?.quads));
                }
                if self.is_dependent(&types) {
                    queue.push((target_chain, kt));
                }
            }
        }
        Ok(plan)
    }

    /// Restores `entity` to snapshot `k` together with the linked entities
    /// that changed since then. Works on deleted entities,
    /// which is how the vault brings them back. Returns the new head.
    pub fn restore_version(&self, entity: &NamedNode, k: u64, agent: &NamedNode) -> Result<Snapshot, ServiceError> {
        let mut plan = self.restore_plan(entity, k)?;
        let (guard, plan) = loop {
            let guard = self.locks.acquire(plan.keys().cloned());
            let fresh = self.restore_plan(entity, k)?;
            if fresh.keys().all(|e| guard.covers(e)) {
                break (guard, fresh);
            }
            drop(guard);
            plan = fresh.into_iter().chain(plan).collect();
        };
        let now = self.now();
        let mut transitions = Vec::new();
        for (target, kt) in &plan {
            if let Some(t) = self.revert(target, *kt, agent, now)? {
                transitions.push(t);
            }
        }
        self.commit(&transitions)?;
        drop(guard);
        let root = transitions
            .iter()
            .find(|t| t.entity == *entity)
            .expect("the restored entity is always planned");
        Ok(root.after.head().expect("just appended").clone())
    }

    fn revert(&self, entity: &NamedNode, k: u64, agent: &NamedNode, now: Timestamp) -> Result<Option<Transition>, ServiceError> {
        let chain = self.load_chain(entity)?;
        let current = self.live_state(&chain)?;
        if k == 0 {
            if chain.is_deleted() || current.is_empty() {
                return Ok(None);
            }
            let delta = Delta::new(QuadSet::new(), current).map_err(|e| ServiceError::Conflict(e.to_string()))?;
            let display = self.display_of(entity)?;
            let after = provenance::record_deletion(&chain, delta.clone(), agent, None, &format!("The entity '{display}' was deleted."), now)?;
            return Ok(Some(Transition {
                entity: entity.clone(),
                data_delta: delta,
                before: chain,
                after,
            }));
        }
        if k >= chain.len() {
            return Ok(None);
        }
        let (_, after) = time_travel::restore(&chain, &current, k, agent, now).map_err(ServiceError::from)?;
        let data_delta = after.head().expect("just appended").delta.clone();
        Ok(Some(Transition {
            entity: entity.clone(),
            data_delta,
            before: chain,
            after,
        }))
    }
}

