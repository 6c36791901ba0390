#![allow(dead_code)]

use chrono::{Duration, TimeZone, Utc};
use proptest::prelude::*;
use quadvault::delta::Delta;
use quadvault::provenance::{self, ProvenanceChain, Timestamp};
use quadvault::rdf::{EntityGraph, Literal, NamedNode, Quad, QuadSet, Term};
use quadvault::time_travel;

pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

pub fn iri(s: &str) -> NamedNode {
    NamedNode::new(s).unwrap()
}

pub fn entity() -> NamedNode {
    iri("https://w3id.org/oc/meta/br/1")
}

/// An entity graph holding `quads` as they are, subjects included.
pub fn graph(quads: &QuadSet) -> EntityGraph {
    EntityGraph {
        entity: entity(),
        graph_name: None,
        quads: quads.clone(),
    }
}

pub fn start() -> Timestamp {
    Utc.with_ymd_and_hms(2025, 1, 28, 12, 26, 9).unwrap()
}

fn text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 \"'\\\\\n\t{}#<>.;éß中😀]{0,10}"
}

pub fn object() -> impl Strategy<Value = Term> {
    prop_oneof![
        (0..4u8).prop_map(|i| Term::from(iri(&format!("https://w3id.org/oc/meta/ra/{i}")))),
        text().prop_map(|s| Term::from(Literal::new_simple(s))),
        (text(), prop_oneof![Just("en"), Just("it"), Just("en-GB")])
            .prop_map(|(s, l)| Term::from(Literal::new_language_tagged(s, l).unwrap())),
        prop_oneof![Just(("01", "integer")), Just(("1", "integer")), Just(("2020-05", "gYearMonth")), Just(("2017-06-30", "date"))]
            .prop_map(|(v, t)| Term::from(Literal::new_typed(v, iri(&format!("{XSD}{t}"))))),
    ]
}

/// Quads about a handful of subjects, so random sets overlap.
pub fn quad() -> impl Strategy<Value = Quad> {
    let subject = prop_oneof![Just("https://w3id.org/oc/meta/br/1"), Just("https://w3id.org/oc/meta/br/2"), Just("urn:x")];
    let predicate = prop_oneof![
        Just("http://purl.org/dc/terms/title"),
        Just("http://prismstandard.org/namespaces/basic/2.0/keyword"),
        Just("http://purl.org/spar/pro/isDocumentContextFor"),
    ];
    let graph = prop_oneof![Just(None), Just(Some("https://w3id.org/oc/meta/br/")), Just(Some("urn:g"))];
    (subject, predicate, object(), graph).prop_map(|(s, p, o, g)| Quad::new(iri(s), iri(p), o, g.map(iri)))
}

pub fn quad_set(max: usize) -> impl Strategy<Value = QuadSet> {
    proptest::collection::btree_set(quad(), 0..=max)
}

/// Two disjoint sets.
pub fn delta() -> impl Strategy<Value = Delta> {
    (quad_set(10), quad_set(10)).prop_map(|(ins, del)| {
        let del = del.difference(&ins).cloned().collect();
        Delta::new(ins, del).unwrap()
    })
}

/// One edit: quads to add and indices (modulo the current size) to remove.
#[derive(Debug, Clone)]
pub struct Edit {
    pub add: Vec<Quad>,
    pub remove: Vec<usize>,
    pub gap_ms: i64,
}

pub fn edit() -> impl Strategy<Value = Edit> {
    (proptest::collection::vec(quad(), 0..4), proptest::collection::vec(any::<usize>(), 0..3), 0..5_000i64)
        .prop_map(|(add, remove, gap_ms)| Edit { add, remove, gap_ms })
}

pub fn history(max_edits: usize) -> impl Strategy<Value = Vec<Edit>> {
    proptest::collection::vec(edit(), 1..=max_edits)
}

/// Replays `edits` into a chain. Returns the chain, every state after each
/// snapshot (index 0 is the empty graph) and the final state. Edits that would
/// change nothing add a marker quad instead.
pub fn build_history(edits: &[Edit]) -> (ProvenanceChain, Vec<QuadSet>) {
    let agent = iri("https://orcid.org/0009-0002-5790-4804");
    let mut chain = ProvenanceChain::new(entity());
    let mut states = vec![QuadSet::new()];
    let mut now = start();
    for (i, e) in edits.iter().enumerate() {
        let before = states.last().unwrap().clone();
        let mut after = before.clone();
        let listed: Vec<Quad> = before.iter().cloned().collect();
        if !listed.is_empty() {
            for r in &e.remove {
                after.remove(&listed[r % listed.len()]);
            }
        }
        after.extend(e.add.iter().cloned());
        if after == before {
            after.insert(Quad::new(entity(), iri("urn:marker"), Literal::new_simple(i.to_string()), None));
        }
        let delta = Delta::between(&before, &after).unwrap();
        now += Duration::milliseconds(e.gap_ms);
        chain = provenance::record_snapshot(&chain, delta, &agent, None, "edit", now).unwrap();
        states.push(after);
    }
    (chain, states)
}

#[derive(Debug, Clone)]
pub enum Op {
    Edit(Edit),
    Delete,
    Restore(usize),
}

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![6 => edit().prop_map(Op::Edit), 1 => Just(Op::Delete), 2 => any::<usize>().prop_map(Op::Restore)]
}

/// Applies an interleaving of edits, deletions and restores to a chain the
/// way the service does; inapplicable operations are skipped. Returns the
/// chain and the live quads (empty once deleted).
pub fn run_ops(ops: &[Op], sources: &[Option<NamedNode>]) -> (ProvenanceChain, QuadSet) {
    let agent = iri("https://orcid.org/0009-0002-5790-4804");
    let mut chain = ProvenanceChain::new(entity());
    let mut current = QuadSet::new();
    let mut now = start();
    for (i, op) in ops.iter().enumerate() {
        now += Duration::milliseconds(i as i64 % 3 * 250);
        let source = sources.get(i % sources.len().max(1)).cloned().flatten();
        match op {
            Op::Edit(e) if !chain.is_deleted() => {
                let mut after = current.clone();
                let listed: Vec<Quad> = current.iter().cloned().collect();
                for r in &e.remove {
                    if !listed.is_empty() {
                        after.remove(&listed[r % listed.len()]);
                    }
                }
                after.extend(e.add.iter().cloned());
                let Ok(delta) = Delta::between(&current, &after) else { continue };
                if delta.is_empty() || (chain.is_empty() && !delta.deletions().is_empty()) {
                    continue;
                }
                let description = format!("The entity '{}' was \"modified\".\n{i}", entity());
                chain = provenance::record_snapshot(&chain, delta, &agent, source.as_ref(), &description, now).unwrap();
                current = after;
            }
            Op::Delete if !chain.is_empty() && !chain.is_deleted() => {
                let delta = Delta::between(&current, &QuadSet::new()).unwrap();
                chain = provenance::record_deletion(&chain, delta, &agent, source.as_ref(), "deleted", now).unwrap();
                current = QuadSet::new();
            }
            Op::Restore(k) if chain.len() >= 2 => {
                let k = 1 + (*k as u64 % (chain.len() - 1));
                let (restored, next) = time_travel::restore(&chain, &current, k, &agent, now).unwrap();
                chain = next;
                current = restored;
            }
            _ => {}
        }
    }
    (chain, current)
}

pub fn ops(max: usize) -> impl Strategy<Value = (Vec<Op>, Vec<Option<NamedNode>>)> {
    let source = prop_oneof![Just(None), Just(Some(iri("https://doi.org/10.5281/zenodo.13768531")))];
    (proptest::collection::vec(op(), 1..=max), proptest::collection::vec(source, 1..3))
}
