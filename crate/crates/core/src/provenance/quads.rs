use std::collections::{BTreeMap, BTreeSet};

use super::{format_timestamp, parse_timestamp, prov_graph, ProvError, ProvenanceChain, Snapshot, Timestamp};
use crate::delta::{from_update_text, Delta};
use crate::rdf::vocab::{dcterms, oco, prov, rdf, xsd};
use crate::rdf::{Literal, NamedNode, Quad, QuadSet, Subject, Term};

fn p(iri: &str) -> NamedNode {
    NamedNode::new_unchecked(iri)
}

fn date_time(t: &Timestamp) -> Term {
    Literal::new_typed(format_timestamp(t), p(xsd::DATE_TIME)).into()
}

/// The quads describing `s` in `prov_graph`.
pub fn to_prov_quads(s: &Snapshot, prov_graph: &NamedNode) -> QuadSet {
    let g = Some(prov_graph.clone());
    let q = |pred: &str, o: Term| Quad::new(s.id.clone(), p(pred), o, g.clone());
    let mut out = QuadSet::new();
    out.insert(q(rdf::TYPE, p(prov::ENTITY).into()));
    out.insert(q(prov::SPECIALIZATION_OF, s.entity.clone().into()));
    out.insert(q(prov::GENERATED_AT_TIME, date_time(&s.generated_at)));
    if let Some(t) = &s.invalidated_at {
        out.insert(q(prov::INVALIDATED_AT_TIME, date_time(t)));
    }
    out.insert(q(prov::WAS_ATTRIBUTED_TO, s.agent.clone().into()));
    if let Some(src) = &s.primary_source {
        out.insert(q(prov::HAS_PRIMARY_SOURCE, src.clone().into()));
    }
    out.insert(q(dcterms::DESCRIPTION, Literal::new_simple(s.description.clone()).into()));
    if !s.delta.is_empty() {
        out.insert(q(oco::HAS_UPDATE_QUERY, Literal::new_simple(s.delta.to_update_text()).into()));
    }
    if let Some(prev) = &s.derived_from {
        out.insert(q(prov::WAS_DERIVED_FROM, prev.clone().into()));
    }
    out
}

/// Every quad of the chain in the entity's provenance graph.
pub fn chain_quads(chain: &ProvenanceChain) -> QuadSet {
    let g = prov_graph(&chain.entity);
    chain.snapshots.iter().flat_map(|s| to_prov_quads(s, &g)).collect()
}

/// The provenance-store delta turning `before` into `after`, where `after`
/// extends `before` by appending. Only the old head and the new snapshots
/// are serialized.
pub fn write_delta(before: &ProvenanceChain, after: &ProvenanceChain) -> Delta {
    let g = prov_graph(&after.entity);
    let from = before.snapshots.len().saturating_sub(1);
    let old: QuadSet = before.snapshots[from..].iter().flat_map(|s| to_prov_quads(s, &g)).collect();
    let new: QuadSet = after.snapshots[from.min(after.snapshots.len())..]
        .iter()
        .flat_map(|s| to_prov_quads(s, &g))
        .collect();
    Delta::between(&old, &new).expect("provenance quads are ground")
}

#[derive(Default)]
struct Fields {
    generated: Vec<String>,
    invalidated: Vec<String>,
    agent: Vec<NamedNode>,
    source: Vec<NamedNode>,
    description: Vec<String>,
    update: Vec<String>,
    derived: Vec<NamedNode>,
}

fn one<T: Clone>(id: &NamedNode, values: &[T], what: &str) -> Result<Option<T>, ProvError> {
    match values {
        [] => Ok(None),
        [v] => Ok(Some(v.clone())),
        _ => Err(ProvError::Malformed {
            snapshot: id.clone(),
            reason: format!("{} values for {what}", values.len()),
        }),
    }
}

fn required<T: Clone>(id: &NamedNode, values: &[T], what: &str) -> Result<T, ProvError> {
    one(id, values, what)?.ok_or_else(|| ProvError::Malformed {
        snapshot: id.clone(),
        reason: format!("missing {what}"),
    })
}

/// Rebuilds the chain of `entity` from provenance quads in any order.
/// Subjects that are not specializations of `entity` are ignored.
pub fn from_prov_quads(quads: &QuadSet, entity: &NamedNode) -> Result<ProvenanceChain, ProvError> {
    let entity_term = Term::NamedNode(entity.clone());
    let ids: BTreeSet<NamedNode> = quads
        .iter()
        .filter(|q| q.predicate.as_str() == prov::SPECIALIZATION_OF && q.object == entity_term)
        .filter_map(|q| q.subject.as_named_node().cloned())
        .collect();
    let mut fields: BTreeMap<NamedNode, Fields> = ids.iter().map(|id| (id.clone(), Fields::default())).collect();
    for q in quads {
        let Subject::NamedNode(s) = &q.subject else { continue };
        let Some(f) = fields.get_mut(s) else { continue };
        let lexical = || q.object.as_literal().map(|l| l.value().to_owned());
        let node = || q.object.as_named_node().cloned();
        match q.predicate.as_str() {
            prov::GENERATED_AT_TIME => f.generated.extend(lexical()),
            prov::INVALIDATED_AT_TIME => f.invalidated.extend(lexical()),
            prov::WAS_ATTRIBUTED_TO => f.agent.extend(node()),
            prov::HAS_PRIMARY_SOURCE | prov::HAD_PRIMARY_SOURCE => f.source.extend(node()),
            dcterms::DESCRIPTION => f.description.extend(lexical()),
            oco::HAS_UPDATE_QUERY => f.update.extend(lexical()),
            prov::WAS_DERIVED_FROM => f.derived.extend(node()),
            _ => {}
        }
    }

    let mut snapshots = BTreeMap::new();
    for (id, f) in fields {
        let generated_at = parse_timestamp(&required(&id, &f.generated, "generatedAtTime")?)?;
        let invalidated_at = one(&id, &f.invalidated, "invalidatedAtTime")?
            .map(|t| parse_timestamp(&t))
            .transpose()?;
        let delta = match one(&id, &f.update, "hasUpdateQuery")? {
            Some(text) => from_update_text(&text).map_err(|source| ProvError::UpdateQuery {
                snapshot: id.clone(),
                source,
            })?,
            None => Delta::empty(),
        };
        let snapshot = Snapshot {
            entity: entity.clone(),
            sequence: 0,
            generated_at,
            invalidated_at,
            agent: required(&id, &f.agent, "wasAttributedTo")?,
            primary_source: one(&id, &f.source, "primary source")?,
            description: one(&id, &f.description, "description")?.unwrap_or_default(),
            delta,
            derived_from: one(&id, &f.derived, "wasDerivedFrom")?,
            id: id.clone(),
        };
        snapshots.insert(id, snapshot);
    }

    let ordered = topological(&snapshots)?;
    let mut chain = ProvenanceChain::new(entity.clone());
    for (i, id) in ordered.into_iter().enumerate() {
        let mut s = snapshots.remove(&id).expect("ordered ids come from the map");
        s.sequence = i as u64 + 1;
        chain.snapshots.push(s);
    }
    if chain.snapshots.iter().filter(|s| s.invalidated_at.is_none()).count() > 1 {
        return Err(ProvError::BrokenChain("two live heads".into()));
    }
    chain.check()?;
    Ok(chain)
}

/// Orders snapshots along `wasDerivedFrom`. The result must be a single
/// linear path: forks and cycles are broken chains.
fn topological(snapshots: &BTreeMap<NamedNode, Snapshot>) -> Result<Vec<NamedNode>, ProvError> {
    let mut children: BTreeMap<&NamedNode, Vec<&NamedNode>> = BTreeMap::new();
    let mut ready = Vec::new();
    for (id, s) in snapshots {
        match &s.derived_from {
            None => ready.push(id),
            Some(prev) if snapshots.contains_key(prev) => children.entry(prev).or_default().push(id),
            Some(prev) => return Err(ProvError::BrokenChain(format!("{id} derives from missing {prev}"))),
        }
    }
    let mut out = Vec::with_capacity(snapshots.len());
    while !ready.is_empty() {
        if ready.len() > 1 {
            let names: Vec<String> = ready.iter().map(|id| id.to_string()).collect();
            return Err(ProvError::BrokenChain(format!("fork at {}", names.join(", "))));
        }
        let id = ready.remove(0);
        out.push(id.clone());
        if let Some(next) = children.get(id) {
            ready.extend(next.iter().copied());
        }
    }
    if out.len() != snapshots.len() {
        return Err(ProvError::BrokenChain("cycle in wasDerivedFrom".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{record_deletion, record_snapshot};
    use super::*;
    use crate::rdf::nquads::iri;
    use chrono::{TimeZone, Utc};

    fn at(secs: i64) -> Timestamp {
        Utc.timestamp_opt(1_738_000_000 + secs, 0).unwrap()
    }

    fn ins(o: &str) -> Delta {
        let q = Quad::new(iri("urn:e"), iri("urn:p"), Literal::new_simple(o), Some(iri("urn:g")));
        Delta::insert_only(QuadSet::from([q])).unwrap()
    }

    fn three() -> ProvenanceChain {
        let agent = iri("https://orcid.org/0009-0002-5790-4804");
        let src = iri("https://doi.org/10.5281/zenodo.13768531");
        let mut c = ProvenanceChain::new(iri("urn:e"));
        c = record_snapshot(&c, ins("a"), &agent, None, "created", at(0)).unwrap();
        c = record_snapshot(&c, ins("b"), &agent, Some(&src), "modified", at(60)).unwrap();
        record_snapshot(&c, ins("c"), &agent, None, "modified \"again\"", at(60)).unwrap()
    }

    #[test]
    fn round_trip() {
        let c = three();
        let quads = chain_quads(&c);
        assert_eq!(from_prov_quads(&quads, &c.entity).unwrap(), c);
    }

    #[test]
    fn creation_has_no_derivation() {
        let c = three();
        let q = to_prov_quads(&c.snapshots[0], &prov_graph(&c.entity));
        assert!(q.iter().all(|q| q.predicate.as_str() != prov::WAS_DERIVED_FROM));
        assert!(q.iter().all(|q| q.graph.as_ref().map(|g| g.as_str()) == Some("urn:e/prov")));
    }

    #[test]
    fn empty_delta_omits_update_query() {
        let mut s = three().snapshots[0].clone();
        s.delta = Delta::empty();
        let q = to_prov_quads(&s, &iri("urn:e/prov"));
        assert!(q.iter().all(|q| q.predicate.as_str() != oco::HAS_UPDATE_QUERY));
    }

    #[test]
    fn deleted_chain_round_trips() {
        let c = three();
        let agent = c.snapshots[0].agent.clone();
        let d = Delta::new(QuadSet::new(), ins("a").insertions().clone()).unwrap();
        let c = record_deletion(&c, d, &agent, None, "deleted", at(90)).unwrap();
        let back = from_prov_quads(&chain_quads(&c), &c.entity).unwrap();
        assert!(back.is_deleted());
        assert_eq!(back, c);
    }

    #[test]
    fn write_delta_touches_only_old_head() {
        let c = three();
        let mut before = c.clone();
        before.snapshots.pop();
        before.snapshots[1].invalidated_at = None;
        let d = write_delta(&before, &c);
        assert!(d.deletions().is_empty());
        let applied = d.apply(&chain_quads(&before));
        assert_eq!(applied, chain_quads(&c));
        let from_empty = write_delta(&ProvenanceChain::new(c.entity.clone()), &c);
        assert_eq!(from_empty.insertions(), &chain_quads(&c));
    }

    #[test]
    fn cycle_and_missing_link() {
        let c = three();
        let g = prov_graph(&c.entity);
        let mut quads = chain_quads(&c);
        let first = &c.snapshots[0].id;
        quads.insert(Quad::new(first.clone(), p(prov::WAS_DERIVED_FROM), c.snapshots[2].id.clone(), Some(g.clone())));
        assert!(matches!(from_prov_quads(&quads, &c.entity), Err(ProvError::BrokenChain(_)) | Err(ProvError::Invariant(_))));

        let quads: QuadSet = chain_quads(&c)
            .into_iter()
            .filter(|q| q.subject != Subject::NamedNode(c.snapshots[1].id.clone()))
            .collect();
        assert!(matches!(from_prov_quads(&quads, &c.entity), Err(ProvError::BrokenChain(_))));
    }

    #[test]
    fn two_live_heads() {
        let c = three();
        let quads: QuadSet = chain_quads(&c)
            .into_iter()
            .filter(|q| !(q.subject == Subject::NamedNode(c.snapshots[1].id.clone()) && q.predicate.as_str() == prov::INVALIDATED_AT_TIME))
            .collect();
        assert!(matches!(from_prov_quads(&quads, &c.entity), Err(ProvError::BrokenChain(_))));
    }

    #[test]
    fn malformed_values() {
        let c = three();
        let g = prov_graph(&c.entity);
        let id = c.snapshots[0].id.clone();
        let mut quads: QuadSet = chain_quads(&c)
            .into_iter()
            .filter(|q| !(q.subject == Subject::NamedNode(id.clone()) && q.predicate.as_str() == prov::GENERATED_AT_TIME))
            .collect();
        let mut bad_time = quads.clone();
        bad_time.insert(Quad::new(id.clone(), p(prov::GENERATED_AT_TIME), Literal::new_simple("yesterday"), Some(g.clone())));
        assert!(matches!(from_prov_quads(&bad_time, &c.entity), Err(ProvError::MalformedTimestamp(_))));

        quads.insert(Quad::new(id.clone(), p(prov::GENERATED_AT_TIME), date_time(&at(0)), Some(g.clone())));
        quads.retain(|q| !(q.subject == Subject::NamedNode(id.clone()) && q.predicate.as_str() == oco::HAS_UPDATE_QUERY));
        quads.insert(Quad::new(id, p(oco::HAS_UPDATE_QUERY), Literal::new_simple("DELETE WHERE { ?s ?p ?o }"), Some(g)));
        assert!(matches!(from_prov_quads(&quads, &c.entity), Err(ProvError::UpdateQuery { .. })));
    }

    #[test]
    fn accepts_had_primary_source() {
        let c = three();
        let quads: QuadSet = chain_quads(&c)
            .into_iter()
            .map(|mut q| {
                if q.predicate.as_str() == prov::HAS_PRIMARY_SOURCE {
                    q.predicate = p(prov::HAD_PRIMARY_SOURCE);
                }
                q
            })
            .collect();
        assert_eq!(from_prov_quads(&quads, &c.entity).unwrap(), c);
    }

    #[test]
    fn other_entities_ignored() {
        let c = three();
        let mut quads = chain_quads(&c);
        let other = three_for("urn:f");
        quads.extend(chain_quads(&other));
        quads.insert(Quad::new(iri("urn:intent"), p(rdf::TYPE), iri("urn:Intent"), Some(prov_graph(&c.entity))));
        assert_eq!(from_prov_quads(&quads, &c.entity).unwrap(), c);
        assert!(from_prov_quads(&quads, &iri("urn:none")).unwrap().is_empty());
    }

    fn three_for(entity: &str) -> ProvenanceChain {
        let agent = iri("urn:agent");
        let q = Quad::new(iri(entity), iri("urn:p"), Literal::new_simple("x"), None);
        let c = ProvenanceChain::new(iri(entity));
        record_snapshot(&c, Delta::insert_only(QuadSet::from([q])).unwrap(), &agent, None, "", at(0)).unwrap()
    }
}
