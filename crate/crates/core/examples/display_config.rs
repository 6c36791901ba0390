//! Load display rules from YAML and render entities with them.

use quadvault::display::{parse_config, render_property_values, render_uri_display};
use quadvault::rdf::nquads::iri;
use quadvault::rdf::parse_nquads;
use quadvault::sample;
use quadvault::sparql::StoreHandle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = parse_config(sample::DISPLAY_YAML)?;
    for r in &config.rules {
        println!("{:<55} priority {} shown {:<5} {}", r.class, r.priority, r.should_be_displayed, r.display_name);
    }

    let store = StoreHandle::memory();
    store.load_quads(&parse_nquads(sample::DATA_NQ)?)?;

    let article = iri("https://w3id.org/oc/meta/br/062501777134");
    let rule = config.for_class(&iri("http://purl.org/spar/fabio/JournalArticle")).expect("article rule");
    println!("\n{article}\n  -> {}", render_uri_display(&article, rule, &store));

    let chapter = iri("https://w3id.org/oc/meta/br/06357");
    let types = [iri("http://purl.org/spar/fabio/BookChapter"), iri("http://purl.org/spar/fabio/Expression")];
    let rule = config.resolve(&types).expect("chapter rule");
    println!("{chapter} ({})", rule.display_name);
    for pd in rule.display_properties.iter().filter(|p| p.should_be_displayed) {
        for (shown, link) in render_property_values(&chapter, pd, &store) {
            let link = link.map(|l| format!(" -> {l}")).unwrap_or_default();
            println!("  {}: {shown}{link}", pd.display_name);
        }
    }
    Ok(())
}
