use std::collections::BTreeSet;

use super::term::{BlankNode, NamedNode, Quad, Subject, Term};

/// Replaces every blank node with `{base}/.well-known/genid/{label}`.
///
/// The label is kept (percent-encoding anything outside the unreserved set),
/// so equal labels map to the same IRI and distinct labels to distinct IRIs.
pub fn skolemize(quads: &BTreeSet<Quad>, base: &NamedNode) -> BTreeSet<Quad> {
    let base = base.as_str().trim_end_matches('/');
    let mint = |b: &BlankNode| NamedNode::new_unchecked(format!("{base}/.well-known/genid/{}", encode_label(b.as_str())));
    quads
        .iter()
        .map(|q| Quad {
            subject: match &q.subject {
                Subject::BlankNode(b) => Subject::NamedNode(mint(b)),
                s => s.clone(),
            },
            predicate: q.predicate.clone(),
            object: match &q.object {
                Term::BlankNode(b) => Term::NamedNode(mint(b)),
                o => o.clone(),
            },
            graph: q.graph.clone(),
        })
        .collect()
}

fn encode_label(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for c in label.chars() {
        if c.is_ascii_alphanumeric() || matches!(c, '-' | '.' | '_' | '~') {
            out.push(c);
        } else {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{b:02X}"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::nquads::{iri, parse_nquads};

    fn base() -> NamedNode {
        iri("https://example.org")
    }

    #[test]
    fn no_blanks_is_identity() {
        let quads = parse_nquads("<urn:a> <urn:p> \"x\" .\n<urn:a> <urn:q> <urn:b> <urn:g> .").unwrap();
        assert_eq!(skolemize(&quads, &base()), quads);
    }

    #[test]
    fn same_label_same_iri_distinct_labels_distinct_iris() {
        let quads = parse_nquads("_:b1 <urn:p> _:b2 .\n<urn:a> <urn:q> _:b1 .").unwrap();
        let out = skolemize(&quads, &base());
        assert!(out.iter().all(Quad::is_ground));
        let b1 = Term::NamedNode(iri("https://example.org/.well-known/genid/b1"));
        let b2 = Term::NamedNode(iri("https://example.org/.well-known/genid/b2"));
        assert!(out.iter().any(|q| Term::from(q.subject.clone()) == b1 && q.object == b2));
        assert!(out.iter().any(|q| q.object == b1));
        assert_ne!(b1, b2);
    }

    #[test]
    fn idempotent() {
        let quads = parse_nquads("_:x <urn:p> _:y .").unwrap();
        let once = skolemize(&quads, &base());
        assert_eq!(skolemize(&once, &base()), once);
    }
}
