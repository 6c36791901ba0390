use std::collections::BTreeSet;

use super::term::{NamedNode, Quad, Subject};

/// The quads describing one entity, all in one graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntityGraph {
    pub entity: NamedNode,
    pub graph_name: Option<NamedNode>,
    pub quads: BTreeSet<Quad>,
}

impl EntityGraph {
    pub fn new(entity: NamedNode, graph_name: Option<NamedNode>) -> Self {
        Self {
            entity,
            graph_name,
            quads: BTreeSet::new(),
        }
    }

    /// Builds the graph from the quads whose subject is `entity`, placed in
    /// the graph the entity already lives in.
    pub fn from_quads(entity: NamedNode, quads: impl IntoIterator<Item = Quad>) -> Self {
        let subject = Subject::NamedNode(entity.clone());
        let quads: BTreeSet<Quad> = quads.into_iter().filter(|q| q.subject == subject).collect();
        let graph_name = quads.iter().next().and_then(|q| q.graph.clone());
        Self {
            entity,
            graph_name,
            quads,
        }
    }

    /// Inserts a quad about the entity; returns false if it was already present.
    pub fn insert(&mut self, predicate: NamedNode, object: impl Into<crate::rdf::Term>) -> bool {
        let quad = Quad::new(self.entity.clone(), predicate, object, self.graph_name.clone());
        self.quads.insert(quad)
    }

    /// Adds quads of other subjects (e.g. linked satellites) for validation context.
    pub fn merge(&mut self, quads: impl IntoIterator<Item = Quad>) {
        self.quads.extend(quads);
    }

    /// Quads whose subject is the entity.
    pub fn own_quads(&self) -> impl Iterator<Item = &Quad> {
        let entity = self.entity.clone();
        self.quads
            .iter()
            .filter(move |q| q.subject.as_named_node() == Some(&entity))
    }

    pub fn types(&self) -> Vec<NamedNode> {
        self.own_quads()
            .filter(|q| q.predicate.as_str() == super::vocab::rdf::TYPE)
            .filter_map(|q| q.object.as_named_node().cloned())
            .collect()
    }
}
