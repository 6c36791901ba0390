//! Edit an entity, read its history, and roll it back.

use quadvault::rdf::nquads::iri;
use quadvault::rdf::Literal;
use quadvault::sample;
use quadvault::service::{EditRequest, ServiceError};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let service = sample::service();
    let article = iri("https://w3id.org/oc/meta/br/06215");
    let curator = iri("https://orcid.org/0009-0002-5790-4804");
    let keyword = iri("http://prismstandard.org/namespaces/basic/2.0/keyword");

    let detail = service.get_entity(&article)?;
    println!("{} (head {})", detail.display, detail.head);

    let edit = EditRequest {
        entity: article.clone(),
        expected_head: detail.head,
        additions: vec![
            (iri("http://purl.org/dc/terms/abstract"), Literal::new_simple("A specimen of the new edition.").into()),
            (keyword.clone(), Literal::new_simple("Scholia").into()),
            (keyword.clone(), Literal::new_simple("Iliad").into()),
        ],
        removals: vec![],
        agent: curator.clone(),
        primary_source: Some(iri("https://doi.org/10.5281/zenodo.13768531")),
    };
    let snap = service.apply_edit(&edit)?;
    println!("{}", snap.description);

    match service.apply_edit(&edit) {
        Err(ServiceError::Stale { expected, actual, .. }) => println!("second submit rejected: head {expected} is now {actual}"),
        other => println!("unexpected: {other:?}"),
    }

    for s in service.get_history(&article)? {
        println!("#{} {} by {}", s.sequence, s.description, s.agent);
        for c in &s.additions {
            println!("    + {}: {}", c.label, c.display);
        }
    }

    let back = service.restore_version(&article, 1, &curator)?;
    println!("{} (head {})", back.description, back.sequence);
    Ok(())
}
