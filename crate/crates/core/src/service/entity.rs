use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{ser, Service, ServiceError};
use crate::delta::Delta;
use crate::display::{self, InputType, PropertyDisplay};
use crate::provenance::{self, ProvenanceChain, Snapshot, Timestamp};
use crate::rdf::vocab::{qv, rdf};
use crate::rdf::{EntityGraph, Literal, NamedNode, Quad, QuadSet, Term};
use crate::shacl::{self, FormField, ShapeSchema, ValidationReport};
use crate::sparql::{self, MemoryStore, StoreHandle};
use crate::time_travel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenderedValue {
    pub display: String,
    pub link: Option<NamedNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldView {
    pub property: NamedNode,
    pub label: String,
    #[serde(serialize_with = "ser::terms")]
    pub values: Vec<Term>,
    pub rendered: Vec<RenderedValue>,
    pub form: Option<FormField>,
    pub can_add: bool,
    pub can_remove: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntityDetail {
    pub entity: NamedNode,
    pub types: Vec<NamedNode>,
    pub class_name: Option<String>,
    pub display: String,
    /// Sequence of the head snapshot; 0 for data that predates tracking.
    pub head: u64,
    pub fields: Vec<FieldView>,
    pub form: Vec<FormField>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditRequest {
    pub entity: NamedNode,
    pub expected_head: u64,
    pub additions: Vec<(NamedNode, Term)>,
    pub removals: Vec<(NamedNode, Term)>,
    pub agent: NamedNode,
    pub primary_source: Option<NamedNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldValue {
    Term(Term),
    New(NewEntity),
}

/// An entity created together with the one that links to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewEntity {
    pub class: NamedNode,
    pub fields: Vec<(NamedNode, FieldValue)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CreateRequest {
    pub class: NamedNode,
    pub fields: Vec<(NamedNode, FieldValue)>,
    pub agent: NamedNode,
    pub source: Option<NamedNode>,
}

fn delta_error(e: crate::delta::DeltaError) -> ServiceError {
    ServiceError::Conflict(e.to_string())
}

impl Service {
    /// Schemas for these types merged into one form; the first schema to
    /// mention a path wins.
    pub(crate) fn merged_schema(&self, types: &[NamedNode]) -> Option<ShapeSchema> {
        let mut schemas = self.config.shapes.matching(types);
        let mut merged = schemas.next()?.clone();
        for s in schemas {
            for c in &s.constraints {
                if !merged.constraints.iter().any(|m| m.path == c.path) {
                    merged.constraints.push(c.clone());
                }
            }
        }
        Some(merged)
    }

    /// Form fields for a set of types; text paths configured with
    /// `inputType: textarea` get a multi-line widget.
    pub fn form_for(&self, types: &[NamedNode]) -> Vec<FormField> {
        let Some(schema) = self.merged_schema(types) else { return Vec::new() };
        let rule = self.rule_for(types);
        shacl::compile_form_with(&schema, |p| {
            rule.and_then(|r| r.property(p)).is_some_and(|pd| pd.input_type == Some(InputType::Textarea))
        })
    }

    pub(crate) fn load_chain(&self, entity: &NamedNode) -> Result<ProvenanceChain, ServiceError> {
        Ok(time_travel::load_chain(&self.prov, entity)?)
    }

    /// The live entity with its fields rendered for display and editing.
    pub fn get_entity(&self, entity: &NamedNode) -> Result<EntityDetail, ServiceError> {
        let chain = self.load_chain(entity)?;
        if chain.is_deleted() {
            return Err(ServiceError::Deleted(entity.clone()));
        }
        let quads = self.entity_quads(entity)?;
        if quads.is_empty() {
            return Err(ServiceError::NotFound(entity.clone()));
        }
        let mut types = Self::types_in(&quads);
        types.sort();
        types.dedup();
        let rule = self.rule_for(&types);
        let form = self.form_for(&types);
        let mut by_property: BTreeMap<&NamedNode, Vec<Term>> = BTreeMap::new();
        for q in &quads {
            by_property.entry(&q.predicate).or_default().push(q.object.clone());
        }
        let properties: Vec<PropertyDisplay> = match rule {
            Some(r) => r.display_properties.iter().filter(|p| p.should_be_displayed).cloned().collect(),
            None => by_property.keys().map(|p| PropertyDisplay::fallback((*p).clone())).collect(),
        };
        let fields = properties
            .into_iter()
            .map(|pd| {
                let mut values = by_property.get(&pd.property).cloned().unwrap_or_default();
                values.sort();
                values.dedup();
                let rendered = if pd.property.as_str() == rdf::TYPE && pd.fetch_value_from_query.is_none() {
                    values
                        .iter()
                        .filter_map(Term::as_named_node)
                        .map(|c| RenderedValue { display: self.config.display.class_name(c), link: Some(c.clone()) })
                        .collect()
                } else {
                    display::render_property_values(entity, &pd, &self.data)
                        .into_iter()
                        .map(|(display, link)| RenderedValue { display, link })
                        .collect()
                };
                let field = form.iter().find(|f| f.path == pd.property).cloned();
                let n = values.len() as u32;
                FieldView {
                    can_add: field.as_ref().is_none_or(|f| f.max.is_none_or(|m| n < m)),
                    can_remove: field.as_ref().map_or(n > 0, |f| n > f.min),
                    property: pd.property,
                    label: pd.display_name,
                    values,
                    rendered,
                    form: field,
                }
            })
            .collect();
        Ok(EntityDetail {
            entity: entity.clone(),
            class_name: rule.map(|r| r.display_name.clone()),
            display: self.display_with_types(entity, &types),
            head: chain.head_sequence(),
            types,
            fields,
            form,
        })
    }

    /// Validates the entity's own quads, with the types of linked entities
    /// merged in for class constraints. `known` supplies quads of entities
    /// not yet in the store.
    pub(crate) fn validate_state(&self, entity: &NamedNode, quads: &QuadSet, known: &QuadSet) -> Result<ValidationReport, ServiceError> {
        let mut graph = EntityGraph::from_quads(entity.clone(), quads.iter().cloned());
        let linked: BTreeSet<NamedNode> = graph.own_quads().filter_map(|q| q.object.as_named_node().cloned()).collect();
        let rdf_type = NamedNode::new_unchecked(rdf::TYPE);
        for o in linked {
            let local: Vec<Quad> = known
                .iter()
                .filter(|q| q.subject.as_named_node() == Some(&o) && q.predicate == rdf_type)
                .cloned()
                .collect();
            if local.is_empty() {
                for t in self.types_of(&o)? {
                    graph.merge([Quad::new(o.clone(), rdf_type.clone(), t, None)]);
                }
            } else {
                graph.merge(local);
            }
        }
        Ok(shacl::validate_with(&graph, &self.config.shapes.schemas))
    }

    /// Chain of an entity whose data predates tracking, given a creation
    /// snapshot holding its current quads.
    fn adopt(&self, chain: ProvenanceChain, current: &QuadSet, agent: &NamedNode, now: Timestamp) -> Result<ProvenanceChain, ServiceError> {
        if !chain.is_empty() {
            return Ok(chain);
        }
        let delta = Delta::insert_only(current.clone()).map_err(delta_error)?;
        Ok(provenance::record_snapshot(&chain, delta, agent, None, provenance::IMPORTED, now)?)
    }

    /// Applies an edit after checking the head token and validating the
    /// result. Returns the new head snapshot.
    pub fn apply_edit(&self, req: &EditRequest) -> Result<Snapshot, ServiceError> {
        if req.additions.is_empty() && req.removals.is_empty() {
            return Err(ServiceError::EmptyEdit);
        }
        let entity = &req.entity;
        let _guard = self.locks.acquire([entity.clone()]);
        let chain = self.load_chain(entity)?;
        if chain.is_deleted() {
            return Err(ServiceError::Deleted(entity.clone()));
        }
        let current = self.entity_quads(entity)?;
        if chain.is_empty() && current.is_empty() {
            return Err(ServiceError::NotFound(entity.clone()));
        }
        if req.expected_head != chain.head_sequence() {
            return Err(ServiceError::Stale {
                entity: entity.clone(),
                expected: req.expected_head,
                actual: chain.head_sequence(),
            });
        }
        let graph = current.iter().next().map_or(self.config.data_graph.clone(), |q| q.graph.clone());
        let mut after = current.clone();
        for (p, o) in &req.removals {
            after.retain(|q| !(q.predicate == *p && q.object == *o));
        }
        for (p, o) in &req.additions {
            if !after.iter().any(|q| q.predicate == *p && q.object == *o) {
                after.insert(Quad::new(entity.clone(), p.clone(), o.clone(), graph.clone()));
            }
        }
        let delta = Delta::between(&current, &after).map_err(delta_error)?;
        if delta.is_empty() {
            return Err(ServiceError::EmptyEdit);
        }
        let report = self.validate_state(entity, &after, &QuadSet::new())?;
        if !report.conforms {
            return Err(ServiceError::Validation(report));
        }
        let now = self.now();
        let display = self.display_of(entity)?;
        let adopted = self.adopt(chain.clone(), &current, &req.agent, now)?;
        let next = provenance::record_snapshot(
            &adopted,
            delta.clone(),
            &req.agent,
            req.primary_source.as_ref(),
            &format!("The entity '{display}' was modified."),
            now,
        )?;
        let head = next.head().expect("just appended").clone();
        self.commit(&[super::write::Transition {
            entity: entity.clone(),
            data_delta: delta,
            before: chain,
            after: next,
        }])?;
        Ok(head)
    }

    /// Deletes every quad of a live entity and appends a terminal snapshot.
    pub fn delete_entity(&self, entity: &NamedNode, agent: &NamedNode) -> Result<Snapshot, ServiceError> {
        let _guard = self.locks.acquire([entity.clone()]);
        let transition = self.deletion(entity, agent)?;
        let head = transition.after.head().expect("just appended").clone();
        self.commit(&[transition])?;
        Ok(head)
    }

    pub(crate) fn deletion(&self, entity: &NamedNode, agent: &NamedNode) -> Result<super::write::Transition, ServiceError> {
        let chain = self.load_chain(entity)?;
        if chain.is_deleted() {
            return Err(ServiceError::Deleted(entity.clone()));
        }
        let current = self.entity_quads(entity)?;
        if current.is_empty() {
            return Err(ServiceError::NotFound(entity.clone()));
        }
        let now = self.now();
        let display = self.display_of(entity)?;
        let adopted = self.adopt(chain.clone(), &current, agent, now)?;
        let delta = Delta::new(QuadSet::new(), current).map_err(delta_error)?;
        let after = provenance::record_deletion(&adopted, delta.clone(), agent, None, &format!("The entity '{display}' was deleted."), now)?;
        Ok(super::write::Transition {
            entity: entity.clone(),
            data_delta: delta,
            before: chain,
            after,
        })
    }

    /// Creates an entity and any nested new entities in one write. Returns
    /// the new IRIs with their creation snapshots, top-level entity first.
    pub fn create_entity(&self, req: &CreateRequest) -> Result<Vec<(NamedNode, Snapshot)>, ServiceError> {
        if !self.config.display.is_displayed(&req.class) {
            return Err(ServiceError::NotCreatable(req.class.clone()));
        }
        let mut planned: Vec<(NamedNode, QuadSet)> = Vec::new();
        self.plan_new(&req.class, &req.fields, &mut planned)?;
        let known: QuadSet = planned.iter().flat_map(|(_, q)| q.iter().cloned()).collect();
        let mut violations = Vec::new();
        for (iri, quads) in &planned {
            violations.extend(self.validate_state(iri, quads, &known)?.violations);
        }
        if !violations.is_empty() {
            return Err(ServiceError::Validation(ValidationReport { conforms: false, violations }));
        }
        let _guard = self.locks.acquire(planned.iter().map(|(e, _)| e.clone()));
        let scratch = self.scratch_store(&known)?;
        let now = self.now();
        let mut transitions = Vec::new();
        for (iri, quads) in &planned {
            let types = Self::types_in(quads);
            let display = match self.rule_for(&types) {
                Some(rule) => display::render_uri_display(iri, rule, &scratch),
                None => iri.as_str().to_owned(),
            };
            let before = ProvenanceChain::new(iri.clone());
            let delta = Delta::insert_only(quads.clone()).map_err(delta_error)?;
            let after = provenance::record_snapshot(
                &before,
                delta.clone(),
                &req.agent,
                req.source.as_ref(),
                &format!("The entity '{display}' was created."),
                now,
            )?;
            transitions.push(super::write::Transition {
                entity: iri.clone(),
                data_delta: delta,
                before,
                after,
            });
        }
        let _mint = self.mint.lock().expect("mint lock poisoned");
        let counters = self.counter_delta(&planned.iter().map(|(e, _)| e).collect::<Vec<_>>())?;
        self.commit_with(&transitions, &counters)?;
        Ok(transitions
            .into_iter()
            .map(|t| {
                let head = t.after.head().expect("just appended").clone();
                (t.entity, head)
            })
            .collect())
    }

    /// New quads plus one hop of linked live data, for rendering labels of
    /// entities that are not written yet.
    fn scratch_store(&self, new: &QuadSet) -> Result<StoreHandle, ServiceError> {
        let store = MemoryStore::new();
        let mut quads = new.clone();
        let linked: BTreeSet<NamedNode> = new.iter().filter_map(|q| q.object.as_named_node().cloned()).collect();
        for o in linked {
            quads.extend(sparql::describe(&self.data, &o)?);
        }
        let handle = StoreHandle::from_memory(std::sync::Arc::new(store));
        handle.load_quads(&quads)?;
        Ok(handle)
    }

    fn plan_new(&self, class: &NamedNode, fields: &[(NamedNode, FieldValue)], out: &mut Vec<(NamedNode, QuadSet)>) -> Result<NamedNode, ServiceError> {
        let iri = self.mint(class)?;
        let slot = out.len();
        out.push((iri.clone(), QuadSet::new()));
        let graph = self.config.data_graph.clone();
        let mut quads = QuadSet::from([Quad::new(iri.clone(), NamedNode::new_unchecked(rdf::TYPE), class.clone(), graph.clone())]);
        for (p, v) in fields {
            let object = match v {
                FieldValue::Term(t) => t.clone(),
                FieldValue::New(n) => Term::NamedNode(self.plan_new(&n.class, &n.fields, out)?),
            };
            quads.insert(Quad::new(iri.clone(), p.clone(), object, graph.clone()));
        }
        out[slot].1 = quads;
        Ok(iri)
    }

    fn counter_node(&self, class: &NamedNode) -> NamedNode {
        NamedNode::new_unchecked(format!("{}/{}", self.config.base_iri, class.local_name()))
    }

    fn counter_graph(&self) -> NamedNode {
        NamedNode::new_unchecked(format!("{}/counters", self.config.base_iri))
    }

    fn stored_counter(&self, node: &NamedNode) -> Result<Vec<Term>, ServiceError> {
        let q = format!("SELECT ?n WHERE {{ GRAPH {} {{ {node} <{}> ?n }} }}", self.counter_graph(), qv::COUNTER_VALUE);
        Ok(self.prov.select(&q)?.column("n").cloned().collect())
    }

    /// Next unused `{base}/{class local name}/{n}`. The counter lives in the
    /// provenance store and is only advanced by a successful create.
    fn mint(&self, class: &NamedNode) -> Result<NamedNode, ServiceError> {
        let mut issued = self.mint.lock().expect("mint lock poisoned");
        let node = self.counter_node(class);
        let stored = self.stored_counter(&node)?.iter().filter_map(|t| t.value().parse().ok()).max().unwrap_or(0);
        let mut n = stored.max(issued.get(&node).copied().unwrap_or(0));
        let iri = loop {
            n += 1;
            let candidate = NamedNode::new_unchecked(format!("{}/{n}", node.as_str()));
            let taken = !self.entity_quads(&candidate)?.is_empty()
                || !sparql::graph_quads(&self.prov, &provenance::prov_graph(&candidate))?.is_empty();
            if !taken {
                break candidate;
            }
        };
        issued.insert(node, n);
        Ok(iri)
    }

    /// Moves each counter up to the highest of `minted` under it.
    fn counter_delta(&self, minted: &[&NamedNode]) -> Result<Delta, ServiceError> {
        let mut top: BTreeMap<NamedNode, u64> = BTreeMap::new();
        for iri in minted {
            let Some((node, n)) = iri.as_str().rsplit_once('/') else { continue };
            let Ok(n) = n.parse::<u64>() else { continue };
            let slot = top.entry(NamedNode::new_unchecked(node)).or_default();
            *slot = (*slot).max(n);
        }
        let graph = Some(self.counter_graph());
        let value_pred = NamedNode::new_unchecked(qv::COUNTER_VALUE);
        let (mut ins, mut del) = (QuadSet::new(), QuadSet::new());
        for (node, n) in top {
            let old = self.stored_counter(&node)?;
            if old.iter().filter_map(|t| t.value().parse::<u64>().ok()).any(|o| o >= n) {
                continue;
            }
            del.extend(old.into_iter().map(|o| Quad::new(node.clone(), value_pred.clone(), o, graph.clone())));
            let value = Literal::new_typed(n.to_string(), NamedNode::new_unchecked(crate::rdf::vocab::xsd::INTEGER));
            ins.insert(Quad::new(node, value_pred.clone(), value, graph.clone()));
        }
        Delta::new(ins, del).map_err(delta_error)
    }
}
