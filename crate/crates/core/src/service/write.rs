//! Dual-store commits. The data delta is announced by an intent record in
//! the provenance store, then applied; the provenance delta and the intent's
//! removal are applied together. A failure at any step undoes what was
//! written; [`Service::recover`] rolls back intents left by a crash.

use super::{Service, ServiceError};
use crate::delta::{from_update_text, Delta};
use crate::provenance::{self, ProvenanceChain};
use crate::rdf::vocab::{qv, rdf};
use crate::rdf::{Literal, NamedNode, Quad, QuadSet};

/// One entity's state change: the data delta and the extended chain.
#[derive(Debug, Clone)]
pub(crate) struct Transition {
    pub entity: NamedNode,
    pub data_delta: Delta,
    pub before: ProvenanceChain,
    pub after: ProvenanceChain,
}

fn merge<'a>(deltas: impl Iterator<Item = &'a Delta>) -> Result<Delta, ServiceError> {
    let mut ins = QuadSet::new();
    let mut del = QuadSet::new();
    for d in deltas {
        ins.extend(d.insertions().iter().cloned());
        del.extend(d.deletions().iter().cloned());
    }
    Delta::new(ins, del).map_err(|e| ServiceError::Conflict(e.to_string()))
}

fn intent_quads(entity: &NamedNode, data: &Delta) -> QuadSet {
    let graph = Some(provenance::prov_graph(entity));
    let id = NamedNode::new_unchecked(format!("{}/prov/intent", entity.as_str()));
    QuadSet::from([
        Quad::new(id.clone(), NamedNode::new_unchecked(rdf::TYPE), NamedNode::new_unchecked(qv::WRITE_INTENT), graph.clone()),
        Quad::new(id, NamedNode::new_unchecked(qv::DATA_UPDATE), Literal::new_simple(data.to_update_text()), graph),
    ])
}

impl Service {
    pub(crate) fn commit(&self, transitions: &[Transition]) -> Result<(), ServiceError> {
        self.commit_with(transitions, &Delta::empty())
    }

    /// Commits `transitions` with `extra` applied to the provenance store in
    /// the same step.
    pub(crate) fn commit_with(&self, transitions: &[Transition], extra: &Delta) -> Result<(), ServiceError> {
        let Some(first) = transitions.first() else { return Ok(()) };
        let data = merge(transitions.iter().map(|t| &t.data_delta))?;
        let prov_deltas: Vec<Delta> = transitions.iter().map(|t| provenance::write_delta(&t.before, &t.after)).collect();
        let prov = merge(prov_deltas.iter().chain([extra]))?;
        let intent = if data.is_empty() { QuadSet::new() } else { intent_quads(&first.entity, &data) };

        let insert_intent = Delta::insert_only(intent.clone()).expect("intent quads are ground");
        self.prov.update(&insert_intent.to_update_text())?;
        if let Err(e) = self.data.update(&data.to_update_text()) {
            self.discard_intent(&insert_intent);
            return Err(e.into());
        }
        let mut finish_del = prov.deletions().clone();
        finish_del.extend(intent.iter().cloned());
        let finish = Delta::new(prov.insertions().clone(), finish_del).map_err(|e| ServiceError::Conflict(e.to_string()))?;
        if let Err(e) = self.prov.update(&finish.to_update_text()) {
            match self.data.update(&data.invert().to_update_text()) {
                Ok(()) => self.discard_intent(&insert_intent),
                Err(rollback) => tracing::error!("rollback failed, intent kept for recovery: {rollback}"),
            }
            return Err(e.into());
        }
        Ok(())
    }

    fn discard_intent(&self, insert_intent: &Delta) {
        if let Err(e) = self.prov.update(&insert_intent.invert().to_update_text()) {
            tracing::error!("could not remove write intent: {e}");
        }
    }

    /// Rolls back the data side of every pending intent and removes the
    /// intents. Returns how many were found. Run before serving requests.
    pub fn recover(&self) -> Result<usize, ServiceError> {
        let query = format!(
            "SELECT ?g ?i ?u WHERE {{ GRAPH ?g {{ ?i a <{}> ; <{}> ?u }} }}",
            qv::WRITE_INTENT,
            qv::DATA_UPDATE
        );
        let rows = self.prov.select(&query)?;
        for row in &rows.rows {
            let (Some(g), Some(i), Some(u)) = (row.get("g"), row.get("i"), row.get("u")) else { continue };
            let (Some(g), Some(i)) = (g.as_named_node(), i.as_named_node()) else { continue };
            let text = u.value();
            let data = from_update_text(text).map_err(|e| ServiceError::Conflict(e.to_string()))?;
            self.data.update(&data.invert().to_update_text())?;
            let intent = QuadSet::from([
                Quad::new(i.clone(), NamedNode::new_unchecked(rdf::TYPE), NamedNode::new_unchecked(qv::WRITE_INTENT), Some(g.clone())),
                Quad::new(i.clone(), NamedNode::new_unchecked(qv::DATA_UPDATE), u.clone(), Some(g.clone())),
            ]);
            let remove = Delta::new(QuadSet::new(), intent).expect("intent quads are ground");
            self.prov.update(&remove.to_update_text())?;
            tracing::warn!("rolled back interrupted write {i}");
        }
        Ok(rows.len())
    }
}
