use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, RwLock};

use super::eval::Evaluator;
use super::{SelectResult, SparqlError, SparqlStore};
use crate::delta::from_update_text;
use crate::rdf::{Quad, QuadSet, Subject, Term};

/// Graph id of the unnamed default graph.
pub(crate) const DEFAULT_GRAPH: u32 = 0;

/// Interned quads with three access paths plus a graph-first index.
#[derive(Default)]
pub(crate) struct Dataset {
    terms: Vec<Arc<Term>>,
    ids: HashMap<Arc<Term>, u32>,
    spog: BTreeSet<[u32; 4]>,
    posg: BTreeSet<[u32; 4]>,
    ospg: BTreeSet<[u32; 4]>,
    gspo: BTreeSet<[u32; 4]>,
}

/// Which graphs a pattern may match.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum GraphSel {
    Default,
    Named(u32),
}

impl GraphSel {
    fn id(self) -> u32 {
        match self {
            GraphSel::Default => DEFAULT_GRAPH,
            GraphSel::Named(g) => g,
        }
    }
}

impl Dataset {
    pub(crate) fn id_of(&self, term: &Term) -> Option<u32> {
        self.ids.get(term).copied()
    }

    pub(crate) fn term(&self, id: u32) -> &Arc<Term> {
        &self.terms[(id - 1) as usize]
    }

    fn intern(&mut self, term: Term) -> u32 {
        if let Some(id) = self.ids.get(&term) {
            return *id;
        }
        let term = Arc::new(term);
        self.terms.push(term.clone());
        let id = self.terms.len() as u32;
        self.ids.insert(term, id);
        id
    }

    fn key(&mut self, quad: &Quad) -> [u32; 4] {
        let s = self.intern(Term::from(quad.subject.clone()));
        let p = self.intern(Term::NamedNode(quad.predicate.clone()));
        let o = self.intern(quad.object.clone());
        let g = quad
            .graph
            .as_ref()
            .map_or(DEFAULT_GRAPH, |g| self.intern(Term::NamedNode(g.clone())));
        [s, p, o, g]
    }

    fn lookup_key(&self, quad: &Quad) -> Option<[u32; 4]> {
        let s = self.id_of(&Term::from(quad.subject.clone()))?;
        let p = self.id_of(&Term::NamedNode(quad.predicate.clone()))?;
        let o = self.id_of(&quad.object)?;
        let g = match &quad.graph {
            None => DEFAULT_GRAPH,
            Some(g) => self.id_of(&Term::NamedNode(g.clone()))?,
        };
        Some([s, p, o, g])
    }

    pub(crate) fn insert(&mut self, quad: &Quad) {
        let [s, p, o, g] = self.key(quad);
        if self.spog.insert([s, p, o, g]) {
            self.posg.insert([p, o, s, g]);
            self.ospg.insert([o, s, p, g]);
            self.gspo.insert([g, s, p, o]);
        }
    }

    pub(crate) fn remove(&mut self, quad: &Quad) {
        if let Some([s, p, o, g]) = self.lookup_key(quad) {
            if self.spog.remove(&[s, p, o, g]) {
                self.posg.remove(&[p, o, s, g]);
                self.ospg.remove(&[o, s, p, g]);
                self.gspo.remove(&[g, s, p, o]);
            }
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.spog.len()
    }

    /// Matches `(s, p, o)` in graph `g`; returns `[s, p, o]` triples.
    pub(crate) fn matching(&self, s: Option<u32>, p: Option<u32>, o: Option<u32>, g: GraphSel) -> Vec<[u32; 3]> {
        let g = g.id();
        let mut out = Vec::new();
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                if self.spog.contains(&[s, p, o, g]) {
                    out.push([s, p, o]);
                }
            }
            (Some(s), Some(p), None) => {
                for k in prefix2(&self.spog, s, p) {
                    if k[3] == g {
                        out.push([k[0], k[1], k[2]]);
                    }
                }
            }
            (Some(s), None, Some(o)) => {
                for k in prefix2(&self.ospg, o, s) {
                    if k[3] == g {
                        out.push([k[1], k[2], k[0]]);
                    }
                }
            }
            (None, Some(p), Some(o)) => {
                for k in prefix2(&self.posg, p, o) {
                    if k[3] == g {
                        out.push([k[2], k[0], k[1]]);
                    }
                }
            }
            (Some(s), None, None) => {
                for k in prefix2(&self.gspo, g, s) {
                    out.push([k[1], k[2], k[3]]);
                }
            }
            (None, Some(p), None) => {
                for k in prefix1(&self.posg, p) {
                    if k[3] == g {
                        out.push([k[2], k[0], k[1]]);
                    }
                }
            }
            (None, None, Some(o)) => {
                for k in prefix1(&self.ospg, o) {
                    if k[3] == g {
                        out.push([k[1], k[2], k[0]]);
                    }
                }
            }
            (None, None, None) => {
                for k in prefix1(&self.gspo, g) {
                    out.push([k[1], k[2], k[3]]);
                }
            }
        }
        out
    }

    /// Ids of all named graphs, ascending.
    pub(crate) fn named_graphs(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut from = DEFAULT_GRAPH + 1;
        while let Some(k) = self.gspo.range([from, 0, 0, 0]..).next() {
            out.push(k[0]);
            if k[0] == u32::MAX {
                break;
            }
            from = k[0] + 1;
        }
        out
    }

    /// Every subject and object id that occurs in graph `g`.
    pub(crate) fn nodes(&self, g: GraphSel) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        for k in prefix1(&self.gspo, g.id()) {
            out.insert(k[1]);
            out.insert(k[3]);
        }
        out
    }

    pub(crate) fn quads(&self) -> QuadSet {
        self.spog
            .iter()
            .map(|&[s, p, o, g]| {
                let subject = Subject::try_from((**self.term(s)).clone()).expect("subjects are IRIs or blank nodes");
                let predicate = self.term(p).as_named_node().cloned().expect("predicates are IRIs");
                let graph = (g != DEFAULT_GRAPH).then(|| self.term(g).as_named_node().cloned().expect("graph names are IRIs"));
                Quad::new(subject, predicate, (**self.term(o)).clone(), graph)
            })
            .collect()
    }
}

fn prefix1(index: &BTreeSet<[u32; 4]>, a: u32) -> impl Iterator<Item = &[u32; 4]> {
    index.range([a, 0, 0, 0]..=[a, u32::MAX, u32::MAX, u32::MAX])
}

fn prefix2(index: &BTreeSet<[u32; 4]>, a: u32, b: u32) -> impl Iterator<Item = &[u32; 4]> {
    index.range([a, b, 0, 0]..=[a, b, u32::MAX, u32::MAX])
}

/// Embedded quad store. Reads run concurrently; writes are serialized and
/// all-or-nothing.
#[derive(Default)]
pub struct MemoryStore {
    data: RwLock<Dataset>,
    writer: Mutex<()>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Snapshot of all stored quads.
    pub fn quads(&self) -> QuadSet {
        self.data.read().expect("store lock poisoned").quads()
    }

    pub fn len(&self) -> usize {
        self.data.read().expect("store lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl SparqlStore for MemoryStore {
    fn select(&self, query: &str) -> Result<SelectResult, SparqlError> {
        let parsed = super::parse_query(query)?;
        let data = self.data.read().expect("store lock poisoned");
        Evaluator::new(&data).select(&parsed)
    }

    fn update(&self, update_text: &str) -> Result<(), SparqlError> {
        let delta = from_update_text(update_text)?;
        let _writer = self.writer.lock().expect("writer lock poisoned");
        let mut data = self.data.write().expect("store lock poisoned");
        for q in delta.deletions() {
            data.remove(q);
        }
        for q in delta.insertions() {
            data.insert(q);
        }
        Ok(())
    }

    fn load_quads(&self, quads: &QuadSet) -> Result<(), SparqlError> {
        let _writer = self.writer.lock().expect("writer lock poisoned");
        let mut data = self.data.write().expect("store lock poisoned");
        for q in quads {
            data.insert(q);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_nquads;

    fn store(nq: &str) -> MemoryStore {
        let s = MemoryStore::new();
        s.load_quads(&parse_nquads(nq).unwrap()).unwrap();
        s
    }

    #[test]
    fn empty_store_selects_nothing() {
        let s = MemoryStore::new();
        assert!(s.select("SELECT ?s WHERE { ?s ?p ?o }").unwrap().is_empty());
    }

    #[test]
    fn insert_select_delete() {
        let s = MemoryStore::new();
        s.update("INSERT DATA { <urn:a> <urn:p> \"x\" }").unwrap();
        assert_eq!(s.select("SELECT ?o WHERE { <urn:a> <urn:p> ?o }").unwrap().len(), 1);
        s.update("DELETE DATA { <urn:zz> <urn:p> \"absent\" }").unwrap();
        assert_eq!(s.len(), 1);
        s.update("DELETE DATA { <urn:a> <urn:p> \"x\" }").unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn rejected_update_leaves_state() {
        let s = store("<urn:a> <urn:p> \"x\" .");
        assert!(s.update("DELETE WHERE { ?s ?p ?o }").is_err());
        assert!(s.update("INSERT DATA { <urn:b> <urn:p> ").is_err());
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn load_is_idempotent() {
        let quads = parse_nquads("<urn:a> <urn:p> \"x\" <urn:g> .\n<urn:a> <urn:p> <urn:b> .").unwrap();
        let s = MemoryStore::new();
        s.load_quads(&quads).unwrap();
        s.load_quads(&quads).unwrap();
        assert_eq!(s.quads(), quads);
    }

    #[test]
    fn index_paths_agree() {
        let s = store(concat!(
            "<urn:a> <urn:p> <urn:b> .\n",
            "<urn:a> <urn:q> <urn:b> <urn:g> .\n",
            "<urn:b> <urn:p> <urn:a> .\n",
        ));
        let d = s.data.read().unwrap();
        let a = d.id_of(&Term::NamedNode(crate::rdf::nquads::iri("urn:a"))).unwrap();
        let b = d.id_of(&Term::NamedNode(crate::rdf::nquads::iri("urn:b"))).unwrap();
        assert_eq!(d.matching(Some(a), None, Some(b), GraphSel::Default).len(), 1);
        assert_eq!(d.matching(None, None, Some(b), GraphSel::Default).len(), 1);
        assert_eq!(d.matching(None, None, None, GraphSel::Default).len(), 2);
        assert_eq!(d.named_graphs().len(), 1);
        let g = d.named_graphs()[0];
        assert_eq!(d.matching(Some(a), None, None, GraphSel::Named(g)).len(), 1);
    }
}
