//! Diff two states of an entity, undo the change, and round-trip the delta
//! through its `DELETE DATA` / `INSERT DATA` text.

use quadvault::delta::{self, from_update_text};
use quadvault::rdf::nquads::iri;
use quadvault::rdf::{parse_nquads, EntityGraph};

const BEFORE: &str = r#"
<https://w3id.org/oc/meta/br/06215> <http://purl.org/dc/terms/title> "Towards a new critical edition of the scholia to the Iliad: a specimen" .
<https://w3id.org/oc/meta/br/06215> <http://prismstandard.org/namespaces/basic/2.0/publicationDate> "2017"^^<http://www.w3.org/2001/XMLSchema#gYear> .
"#;

const AFTER: &str = r#"
<https://w3id.org/oc/meta/br/06215> <http://purl.org/dc/terms/title> "Towards a new critical edition of the scholia to the Iliad: a specimen" .
<https://w3id.org/oc/meta/br/06215> <http://prismstandard.org/namespaces/basic/2.0/publicationDate> "2017-06"^^<http://www.w3.org/2001/XMLSchema#gYearMonth> .
<https://w3id.org/oc/meta/br/06215> <http://prismstandard.org/namespaces/basic/2.0/keyword> "Scholia" .
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e = iri("https://w3id.org/oc/meta/br/06215");
    let before = EntityGraph::from_quads(e.clone(), parse_nquads(BEFORE)?);
    let after = EntityGraph::from_quads(e, parse_nquads(AFTER)?);

    let d = delta::diff(&before, &after)?;
    println!("{} insertions, {} deletions", d.insertions().len(), d.deletions().len());
    let text = d.to_update_text();
    println!("redo: {text}");
    println!("undo: {}", d.invert().to_update_text());

    assert_eq!(delta::apply(&d, &before.quads), after.quads);
    assert_eq!(delta::apply(&d.invert(), &after.quads), before.quads);
    assert_eq!(from_update_text(&text)?, d);
    Ok(())
}
