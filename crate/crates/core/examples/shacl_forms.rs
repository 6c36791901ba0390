//! Turn SHACL shapes into form fields and validate entities against them.

use quadvault::rdf::nquads::iri;
use quadvault::rdf::{parse_nquads, EntityGraph};
use quadvault::sample;
use quadvault::shacl::{compile_form, lexical_valid, load_shapes_turtle, validate_with};

const DRAFT: &str = r#"
<urn:draft> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://purl.org/spar/fabio/JournalArticle> .
<urn:draft> <http://prismstandard.org/namespaces/basic/2.0/publicationDate> "2020-13"^^<http://www.w3.org/2001/XMLSchema#gYearMonth> .
<urn:draft> <http://purl.org/dc/terms/description> "one" .
<urn:draft> <http://purl.org/dc/terms/description> "two" .
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let shapes = load_shapes_turtle(sample::SHAPES_TTL)?;
    let article = shapes.for_class(&iri("http://purl.org/spar/fabio/JournalArticle")).expect("article shape");

    for f in compile_form(article) {
        let max = f.max.map_or("n".to_owned(), |m| m.to_string());
        let options: Vec<String> = f.datatype_options.iter().map(|o| format!("{:?}", o.widget)).collect();
        println!("{:<28} {:?} [{}..{max}] {}", f.label, f.widget, f.min, options.join("/"));
    }

    let draft = EntityGraph::from_quads(iri("urn:draft"), parse_nquads(DRAFT)?);
    let report = validate_with(&draft, &shapes.schemas);
    println!("\nconforms: {}", report.conforms);
    for v in &report.violations {
        println!("{:?}: {}", v.kind, v.message);
    }

    let xsd = "http://www.w3.org/2001/XMLSchema#";
    for (value, dt) in [("2020-05", "gYearMonth"), ("2020-13", "gYearMonth"), ("2024-02-29", "date"), ("2023-02-29", "date")] {
        println!("{value:>10} as xsd:{dt}: {}", lexical_valid(value, &format!("{xsd}{dt}"))?);
    }
    Ok(())
}
