//! Parse Turtle, replace blank nodes with IRIs, write N-Quads.

use quadvault::rdf::nquads::iri;
use quadvault::rdf::{parse_nquads, parse_turtle, serialize_nquads, skolemize};

const TTL: &str = r#"
@prefix fabio: <http://purl.org/spar/fabio/> .
@prefix dcterms: <http://purl.org/dc/terms/> .
@prefix datacite: <http://purl.org/spar/datacite/> .

<br/06357> a fabio:BookChapter ;
  dcterms:title "Al crocevia tra filologia e storia"@it ;
  datacite:hasIdentifier [ datacite:usesIdentifierScheme datacite:doi ] .
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let quads = parse_turtle(TTL, Some("https://w3id.org/oc/meta/"))?;
    let ground = skolemize(&quads, &iri("https://w3id.org/oc/meta/"));
    let text = serialize_nquads(&ground);
    print!("{text}");
    assert!(ground.iter().all(|q| q.is_ground()));
    assert_eq!(parse_nquads(&text)?, ground);
    Ok(())
}
