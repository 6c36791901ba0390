use super::*;
use crate::rdf::nquads::iri;
use crate::rdf::parse_nquads;

const LISTING: &str = r#"
- class: "http://purl.org/spar/fabio/JournalArticle"
  priority: 1
  shouldBeDisplayed: true
  displayName: "Journal Article"
  fetchUriDisplay: |
    PREFIX dcterms: <http://purl.org/dc/terms/>
    PREFIX fabio: <http://purl.org/spar/fabio/>
    PREFIX foaf: <http://xmlns.com/foaf/0.1/>
    PREFIX pro: <http://purl.org/spar/pro/>
    SELECT ?display
    WHERE {
      [[uri]] dcterms:title ?title .
      OPTIONAL {SELECT (GROUP_CONCAT(?authorName; SEPARATOR = " & ")
        AS ?authorList)
        WHERE {
          [[uri]] pro:isDocumentContextFor ?authorRole .
          ?authorRole pro:withRole pro:author ;
            pro:isHeldBy ?author .
          ?author foaf:familyName ?authorName .
        }
      }
      BIND(CONCAT(
        COALESCE(?authorList, ""),
        IF(BOUND(?authorList), ". ", ""),
        ?title
      ) AS ?display)
    }
  displayProperties:
  - property: "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
    displayName: "Type"
    shouldBeDisplayed: true
    supportsSearch: false
  - property: "http://purl.org/dc/terms/title"
    displayName: "Title"
    shouldBeDisplayed: true
    inputType: "textarea"
    supportsSearch: true
    minCharsForSearch: 2
    searchTarget: "self"
  - property: "http://purl.org/spar/datacite/hasIdentifier"
    displayName: "Identifier"
    shouldBeDisplayed: true
    supportsSearch: true
    searchTarget: "parent"
    fetchValueFromQuery: |
      PREFIX datacite: <http://purl.org/spar/datacite/>
      PREFIX literal:
        <http://www.essepuntato.it/2010/06/literalreification/>
      SELECT (CONCAT(STRAFTER(STR(?scheme), "datacite/"), ":",
        ?literal) AS ?id) ?identifier
      WHERE {
        [[subject]] datacite:hasIdentifier ?identifier.
        ?identifier datacite:usesIdentifierScheme ?scheme;
          literal:hasLiteralValue ?literal.
      }
  - property: "http://purl.org/vocab/frbr/core#partOf"
    displayName: "Issue"
    shouldBeDisplayed: true
    supportsSearch: true
    fetchValueFromQuery: |
      PREFIX frbr: <http://purl.org/vocab/frbr/core#>
      PREFIX dcterms: <http://purl.org/dc/terms/>
      PREFIX fabio: <http://purl.org/spar/fabio/>
      SELECT ?containerName ?container
      WHERE {
        [[subject]] frbr:partOf+ ?container.
        ?container a fabio:JournalIssue.
        ?container dcterms:title ?containerName.
      }
"#;

const DATA: &str = r#"
<https://w3id.org/oc/meta/br/062501777134> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://purl.org/spar/fabio/JournalArticle> .
<https://w3id.org/oc/meta/br/062501777134> <http://purl.org/dc/terms/title> "OpenCitations, an infrastructure organization for open scholarship" .
<https://w3id.org/oc/meta/br/062501777134> <http://purl.org/spar/pro/isDocumentContextFor> <https://w3id.org/oc/meta/ar/1> .
<https://w3id.org/oc/meta/br/062501777134> <http://purl.org/spar/pro/isDocumentContextFor> <https://w3id.org/oc/meta/ar/2> .
<https://w3id.org/oc/meta/ar/1> <http://purl.org/spar/pro/withRole> <http://purl.org/spar/pro/author> .
<https://w3id.org/oc/meta/ar/1> <http://purl.org/spar/pro/isHeldBy> <https://w3id.org/oc/meta/ra/1> .
<https://w3id.org/oc/meta/ar/2> <http://purl.org/spar/pro/withRole> <http://purl.org/spar/pro/author> .
<https://w3id.org/oc/meta/ar/2> <http://purl.org/spar/pro/isHeldBy> <https://w3id.org/oc/meta/ra/2> .
<https://w3id.org/oc/meta/ra/1> <http://xmlns.com/foaf/0.1/familyName> "Peroni" .
<https://w3id.org/oc/meta/ra/2> <http://xmlns.com/foaf/0.1/familyName> "Shotton" .
<https://w3id.org/oc/meta/br/2> <http://purl.org/dc/terms/title> "Towards a new critical edition of the scholia to the Iliad" .
<https://w3id.org/oc/meta/br/2> <http://purl.org/spar/datacite/hasIdentifier> <https://w3id.org/oc/meta/id/1> .
<https://w3id.org/oc/meta/br/2> <http://purl.org/vocab/frbr/core#partOf> <https://w3id.org/oc/meta/br/10> .
<https://w3id.org/oc/meta/id/1> <http://purl.org/spar/datacite/usesIdentifierScheme> <http://purl.org/spar/datacite/doi> .
<https://w3id.org/oc/meta/id/1> <http://www.essepuntato.it/2010/06/literalreification/hasLiteralValue> "10.1515/9783110354348-019" .
<https://w3id.org/oc/meta/br/10> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://purl.org/spar/fabio/JournalIssue> .
<https://w3id.org/oc/meta/br/10> <http://purl.org/dc/terms/title> "Issue 9" .
<https://w3id.org/oc/meta/br/10> <http://purl.org/vocab/frbr/core#partOf> <https://w3id.org/oc/meta/br/11> .
<https://w3id.org/oc/meta/br/11> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://purl.org/spar/fabio/JournalVolume> .
<https://w3id.org/oc/meta/br/11> <http://purl.org/dc/terms/title> "Volume 1" .
"#;

fn store() -> StoreHandle {
    let s = StoreHandle::memory();
    s.load_quads(&parse_nquads(DATA).unwrap()).unwrap();
    s
}

fn listing_rule() -> DisplayRule {
    parse_config(LISTING).unwrap().rules.remove(0)
}

#[test]
fn listing_parses() {
    let config = parse_config(LISTING).unwrap();
    assert_eq!(config.rules.len(), 1);
    assert!(config.warnings.is_empty());
    let r = &config.rules[0];
    assert_eq!(r.class.as_str(), "http://purl.org/spar/fabio/JournalArticle");
    assert_eq!(r.priority, 1);
    assert_eq!(r.display_name, "Journal Article");
    assert_eq!(r.display_properties.len(), 4);
    assert_eq!(r.fetch_uri_display.as_ref().unwrap().expected_vars, ["display"]);
    let title = &r.display_properties[1];
    assert_eq!(title.min_chars_for_search, 2);
    assert_eq!(title.input_type, Some(InputType::Textarea));
    let id = &r.display_properties[2];
    assert_eq!(id.search_target, SearchTarget::Parent);
    assert_eq!(id.min_chars_for_search, DEFAULT_MIN_CHARS);
    assert_eq!(r.sort_keys, [iri("http://purl.org/dc/terms/title")]);
}

#[test]
fn empty_config() {
    assert!(parse_config("").unwrap().rules.is_empty());
    assert!(parse_config("# nothing\n").unwrap().rules.is_empty());
}

#[test]
fn config_errors_and_warnings() {
    let dup = "- class: urn:C\n  priority: 1\n- class: urn:C\n  priority: 1\n";
    assert!(matches!(parse_config(dup), Err(ConfigError::Duplicate { .. })));
    let bad = "- class: urn:C\n  fetchUriDisplay: \"SELECT ?d WHERE { [[uri]] \"\n";
    assert!(matches!(parse_config(bad), Err(ConfigError::Template { .. })));
    let zero = "- class: urn:C\n  displayProperties:\n  - property: urn:p\n    minCharsForSearch: 0\n";
    assert!(matches!(parse_config(zero), Err(ConfigError::Invalid { .. })));
    let extra = "- class: urn:C\n  colour: red\n  displayProperties:\n  - property: urn:p\n    width: 3\n";
    let config = parse_config(extra).unwrap();
    assert_eq!(config.warnings.len(), 2);
    assert_eq!(config.rules[0].display_name, "urn:C");
    assert!(parse_config("class: urn:C").is_err());
}

#[test]
fn priority_resolution() {
    let yaml = "- class: http://purl.org/spar/fabio/Expression\n  priority: 2\n".to_owned() + LISTING;
    let rules = parse_config(&yaml).unwrap().rules;
    let types = [iri("http://purl.org/spar/fabio/Expression"), iri("http://purl.org/spar/fabio/JournalArticle")];
    assert_eq!(resolve_rule(&types, &rules).unwrap().display_name, "Journal Article");
    let mut reversed = rules.clone();
    reversed.reverse();
    assert_eq!(resolve_rule(&types, &reversed), resolve_rule(&types, &rules));
    assert_eq!(resolve_rule(&types[..1], &rules).unwrap().priority, 2);
    assert!(resolve_rule(&[iri("urn:none")], &rules).is_none());
}

#[test]
fn uri_display() {
    let rule = listing_rule();
    let s = store();
    assert_eq!(
        render_uri_display(&iri("https://w3id.org/oc/meta/br/062501777134"), &rule, &s),
        "Peroni & Shotton. OpenCitations, an infrastructure organization for open scholarship"
    );
    // An empty aggregate still binds ?authorList to "".
    assert_eq!(
        render_uri_display(&iri("https://w3id.org/oc/meta/br/2"), &rule, &s),
        ". Towards a new critical edition of the scholia to the Iliad"
    );
    assert_eq!(render_uri_display(&iri("https://w3id.org/oc/meta/br/404"), &rule, &s), "https://w3id.org/oc/meta/br/404");
}

#[test]
fn property_values() {
    let rule = listing_rule();
    let s = store();
    let br2 = iri("https://w3id.org/oc/meta/br/2");
    assert_eq!(
        render_property_values(&br2, &rule.display_properties[2], &s),
        [("doi:10.1515/9783110354348-019".to_owned(), Some(iri("https://w3id.org/oc/meta/id/1")))]
    );
    assert_eq!(
        render_property_values(&br2, &rule.display_properties[3], &s),
        [("Issue 9".to_owned(), Some(iri("https://w3id.org/oc/meta/br/10")))]
    );
    assert_eq!(
        render_property_values(&br2, &rule.display_properties[1], &s),
        [("Towards a new critical edition of the scholia to the Iliad".to_owned(), None)]
    );
    let absent = iri("https://w3id.org/oc/meta/br/062501777134");
    assert!(render_property_values(&absent, &rule.display_properties[2], &s).is_empty());
}

#[test]
fn failures_degrade() {
    let mut rule = listing_rule();
    rule.fetch_uri_display = Some(QueryTemplate {
        text: "SELECT ?display WHERE { [[uri]] ?p ?display } GROUP BY ?nope HAVING(".into(),
        expected_vars: vec!["display".into()],
    });
    let e = iri("https://w3id.org/oc/meta/br/2");
    assert_eq!(render_uri_display(&e, &rule, &store()), e.as_str());
    let mut pd = rule.display_properties[2].clone();
    pd.fetch_value_from_query = rule.fetch_uri_display.clone();
    assert!(render_property_values(&e, &pd, &store()).is_empty());
}

#[test]
fn serialize_round_trip() {
    let yaml = "- class: urn:C\n  priority: 3\n  shouldBeDisplayed: false\n".to_owned() + LISTING;
    let rules = parse_config(&yaml).unwrap().rules;
    let text = serialize_config(&rules);
    assert_eq!(parse_config(&text).unwrap().rules, rules);
    assert_eq!(serialize_config(&[]), "");
}
