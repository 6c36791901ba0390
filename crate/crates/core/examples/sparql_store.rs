//! The embedded store: named graphs, SELECT, and ground updates.

use quadvault::rdf::parse_nquads;
use quadvault::sparql::{describe, StoreHandle};
use quadvault::rdf::nquads::iri;

const DATA: &str = r#"
<https://w3id.org/oc/meta/ra/09110155> <http://xmlns.com/foaf/0.1/givenName> "Franco" .
<https://w3id.org/oc/meta/ra/09110155> <http://xmlns.com/foaf/0.1/familyName> "Montanari" .
<https://w3id.org/oc/meta/ra/09110155> <http://xmlns.com/foaf/0.1/familyName> "Montanari F." <urn:drafts> .
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let store = StoreHandle::memory();
    store.load_quads(&parse_nquads(DATA)?)?;

    let q = "SELECT ?g ?name WHERE { { ?s <http://xmlns.com/foaf/0.1/familyName> ?name } UNION { GRAPH ?g { ?s <http://xmlns.com/foaf/0.1/familyName> ?name } } } ORDER BY ?name";
    for row in store.select(q)?.rows {
        let g = row.get("g").map_or("default".to_owned(), |g| g.to_string());
        println!("{:<14} {}", row["name"].value(), g);
    }

    store.update(r#"DELETE DATA { GRAPH <urn:drafts> { <https://w3id.org/oc/meta/ra/09110155> <http://xmlns.com/foaf/0.1/familyName> "Montanari F." } }"#)?;
    match store.update("DELETE WHERE { ?s ?p ?o }") {
        Err(e) => println!("rejected: {e}"),
        Ok(()) => println!("pattern update accepted?"),
    }
    println!("{} quads describe the agent", describe(&store, &iri("https://w3id.org/oc/meta/ra/09110155"))?.len());
    Ok(())
}
