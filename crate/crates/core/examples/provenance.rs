//! Build a snapshot chain by hand and persist it as provenance quads.

use chrono::{Duration, TimeZone, Utc};
use quadvault::delta::Delta;
use quadvault::provenance::{self, chain_quads, from_prov_quads, ProvenanceChain};
use quadvault::rdf::nquads::iri;
use quadvault::rdf::{parse_nquads, serialize_nquads};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e = iri("https://w3id.org/oc/meta/br/06215");
    let curator = iri("https://orcid.org/0009-0002-5790-4804");
    let source = iri("https://doi.org/10.5281/zenodo.13768531");
    let t0 = Utc.with_ymd_and_hms(2025, 1, 28, 12, 26, 9).unwrap();

    let created = parse_nquads(
        "<https://w3id.org/oc/meta/br/06215> <http://purl.org/dc/terms/title> \"Towards a new critical edition\" .\n",
    )?;
    let keyword = parse_nquads(
        "<https://w3id.org/oc/meta/br/06215> <http://prismstandard.org/namespaces/basic/2.0/keyword> \"Scholia\" .\n",
    )?;

    let chain = ProvenanceChain::new(e.clone());
    let chain = provenance::record_snapshot(&chain, Delta::insert_only(created.clone())?, &curator, None, "created", t0)?;
    let chain = provenance::record_snapshot(
        &chain,
        Delta::insert_only(keyword.clone())?,
        &curator,
        Some(&source),
        "The entity 'Towards a new critical edition' was modified.",
        t0 + Duration::minutes(5),
    )?;
    let mut remaining = created;
    remaining.extend(keyword);
    let chain = provenance::record_deletion(
        &chain,
        Delta::new(Default::default(), remaining)?,
        &curator,
        None,
        "deleted",
        t0 + Duration::hours(1),
    )?;
    chain.check()?;

    for s in &chain.snapshots {
        let until = s.invalidated_at.map(|t| provenance::format_timestamp(&t)).unwrap_or_else(|| "now".into());
        println!("{} [{} .. {until}] {}", s.id, provenance::format_timestamp(&s.generated_at), s.description);
    }
    println!("deleted: {}", chain.is_deleted());

    let quads = chain_quads(&chain);
    println!("\n{}", serialize_nquads(&quads));
    assert_eq!(from_prov_quads(&quads, &e)?, chain);
    Ok(())
}
