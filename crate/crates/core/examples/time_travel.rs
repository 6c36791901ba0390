//! Look at every version of an entity, then restore an old one.

use chrono::{Duration, TimeZone, Utc};
use quadvault::delta::Delta;
use quadvault::provenance::{self, ProvenanceChain};
use quadvault::rdf::nquads::iri;
use quadvault::rdf::{Literal, Quad, QuadSet};
use quadvault::time_travel::{materialize, restore};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e = iri("https://w3id.org/oc/meta/br/06357");
    let title = iri("http://purl.org/dc/terms/title");
    let agent = iri("https://orcid.org/0009-0002-5790-4804");
    let mut now = Utc.with_ymd_and_hms(2025, 1, 28, 12, 0, 0).unwrap();

    let titles = ["Al crocevia", "Al crocevia delle tradizioni", "Al crocevia tra filologia e storia"];
    let mut chain = ProvenanceChain::new(e.clone());
    let mut current = QuadSet::new();
    for t in titles {
        let next = QuadSet::from([Quad::new(e.clone(), title.clone(), Literal::new_simple(t), None)]);
        let d = Delta::between(&current, &next)?;
        chain = provenance::record_snapshot(&chain, d, &agent, None, "edit", now)?;
        current = next;
        now += Duration::days(1);
    }

    for k in 1..=chain.len() {
        let v = materialize(&chain, &current, k)?;
        let shown: Vec<&str> = v.quads.iter().map(|q| q.object.value()).collect();
        println!("snapshot {k}: {shown:?}");
    }

    let (restored, chain) = restore(&chain, &current, 1, &agent, now)?;
    println!("{}: {:?}", chain.head().unwrap().description, restored.iter().map(|q| q.object.value()).collect::<Vec<_>>());
    assert_eq!(chain.len(), 4);
    assert_eq!(materialize(&chain, &restored, 3)?.quads, current);
    Ok(())
}
