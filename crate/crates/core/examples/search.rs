//! Suggestions for a field that supports search.

use quadvault::rdf::nquads::iri;
use quadvault::sample;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let service = sample::service();
    let agent = iri("http://xmlns.com/foaf/0.1/Agent");
    let given = iri("http://xmlns.com/foaf/0.1/givenName");
    for q in ["F", "Franco", "fr"] {
        let found = service.search_suggestions(q, &given, &agent)?;
        println!("{q:?}: {} match(es)", found.len());
        for s in found {
            println!("  {}. {}", s.score, s.display);
        }
    }

    let chapter = iri("http://purl.org/spar/fabio/BookChapter");
    let identifier = iri("http://purl.org/spar/datacite/hasIdentifier");
    for s in service.search_suggestions("10.1515/9783110354348-019", &identifier, &chapter)? {
        println!("DOI match: {}", s.display);
    }
    Ok(())
}
