//! Delete an entity, find it in the vault, bring it back.

use quadvault::rdf::nquads::iri;
use quadvault::sample;
use quadvault::service::ServiceError;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let service = sample::service();
    let chapter = iri("https://w3id.org/oc/meta/br/06357");
    let curator = iri("https://orcid.org/0009-0002-5790-4804");

    let gone = service.delete_entity(&chapter, &curator)?;
    println!("{}", gone.description);
    assert!(matches!(service.get_entity(&chapter), Err(ServiceError::Deleted(_))));

    for v in service.list_vault()? {
        println!("{} deleted by {} ({} quads, restorable to snapshot {})", v.entity, v.agent, v.last_live_view.quads.len(), v.last_live_view.at_snapshot);
        let back = service.restore_version(&v.entity, v.last_live_view.at_snapshot, &curator)?;
        println!("{}", back.description);
    }
    assert!(service.list_vault()?.is_empty());
    println!("{}", service.get_entity(&chapter)?.display);
    Ok(())
}
