//! One PASS/FAIL line per primary acceptance criterion. Runs without the
//! libtest harness so the lines always reach stdout; exits non-zero if any
//! criterion fails.

mod common;

use std::collections::BTreeSet;
use std::net::SocketAddr;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Barrier};
use std::time::{Duration, Instant};

use chrono::{NaiveDate, NaiveTime};
use common::*;
use oxigraph::sparql::{QueryResults, SparqlEvaluator};
use oxigraph::store::Store;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use quadvault::delta::{self, from_update_text, Delta};
use quadvault::provenance::{self, chain_quads, from_prov_quads, ProvenanceChain};
use quadvault::rdf::{EntityGraph, Literal, Quad, QuadSet, Term};
use quadvault::sample;
use quadvault::service::{
    CreateRequest, EditRequest, FieldValue, NewEntity, Service, ServiceError, SortDir, StaticToken,
};
use quadvault::shacl::{lexical_valid, load_shapes_turtle, validate_with, ViolationKind};
use quadvault::sparql::{MemoryStore, SelectResult, SparqlError, SparqlStore, StoreHandle};
use quadvault::time_travel::{self, materialize};
use regex::Regex;

const CHAPTER: &str = "https://w3id.org/oc/meta/br/06357";
const ARTICLE: &str = "https://w3id.org/oc/meta/br/06215";
const LISTING: &str = "https://w3id.org/oc/meta/br/062501777134";
const CURATOR: &str = "https://orcid.org/0009-0002-5790-4804";
const TITLE: &str = "http://purl.org/dc/terms/title";
const KEYWORD: &str = "http://prismstandard.org/namespaces/basic/2.0/keyword";
const DATE: &str = "http://prismstandard.org/namespaces/basic/2.0/publicationDate";
const HAS_ID: &str = "http://purl.org/spar/datacite/hasIdentifier";
const SCHEME: &str = "http://purl.org/spar/datacite/usesIdentifierScheme";
const LITERAL: &str = "http://www.essepuntato.it/2010/06/literalreification/hasLiteralValue";
const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const FABIO: &str = "http://purl.org/spar/fabio/";

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("delta algebra", delta_algebra),
        ("dual replay", dual_replay),
        ("provenance round trip", provenance_round_trip),
        ("fixture renderings", fixture_renderings),
        ("shacl conformance", shacl_conformance),
        ("atomicity and concurrency", atomicity),
        ("desk-scale performance", performance),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} ({secs:.2}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.2}s): {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn delta_algebra() -> Outcome {
    let started = Instant::now();
    let cases = 1000;
    runner(cases)
        .run(&delta(), |d| {
            prop_assert_eq!(delta::invert(&delta::invert(&d)), d.clone());
            prop_assert_eq!(from_update_text(&d.to_update_text()).unwrap(), d);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    runner(cases)
        .run(&(quad_set(12), quad_set(12)), |(a, b)| {
            let d = delta::diff(&graph(&a), &graph(&b)).unwrap();
            prop_assert_eq!(delta::apply(&d, &a), b);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    check(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!("{cases} cases per law, 0 failures"))
}

fn dual_replay() -> Outcome {
    let cases = 200;
    let checked = AtomicUsize::new(0);
    runner(cases)
        .run(&history(50), |edits| {
            let (chain, states) = build_history(&edits);
            let current = states.last().unwrap();
            for k in 1..=chain.len() {
                prop_assert_eq!(&materialize(&chain, current, k).unwrap().quads, &states[k as usize]);
                checked.fetch_add(1, Ordering::Relaxed);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{cases} histories, {} versions, 0 mismatches", checked.into_inner()))
}

fn provenance_round_trip() -> Outcome {
    let cases = 200;
    let lengths = std::sync::Mutex::new(Vec::new());
    runner(cases)
        .run(&ops(40), |(ops, sources)| {
            let (chain, _) = run_ops(&ops, &sources);
            prop_assert!(chain.check().is_ok(), "{:?}", chain.check());
            let live = chain.snapshots.iter().filter(|s| s.invalidated_at.is_none()).count();
            prop_assert_eq!(live, usize::from(!chain.is_empty() && !chain.is_deleted()));
            prop_assert_eq!(from_prov_quads(&chain_quads(&chain), &chain.entity).unwrap(), chain.clone());
            lengths.lock().unwrap().push(chain.len());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let lengths = lengths.into_inner().unwrap();
    let service = service_lifecycle()?;
    Ok(format!(
        "{cases} chains (up to {} snapshots) round-trip; service lifecycle: {service}",
        lengths.iter().max().unwrap_or(&0)
    ))
}

/// Random edit/delete/restore sequences through the service, checking the
/// stored chains after every step.
fn service_lifecycle() -> Outcome {
    let s = sample::service();
    let agent = iri(CURATOR);
    let targets = [iri(CHAPTER), iri(ARTICLE)];
    let mut rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let mut done = 0;
    for step in 0..60 {
        let e = &targets[rng.random_range(0..targets.len())];
        let chain = time_travel::load_chain(s.prov_store(), e).map_err(|x| x.to_string())?;
        let r = match rng.random_range(0..6) {
            0 if !chain.is_empty() => s.delete_entity(e, &agent).map(|_| ()),
            1 | 2 if chain.len() >= 2 => {
                let k = rng.random_range(1..chain.len());
                s.restore_version(e, k, &agent).map(|_| ())
            }
            _ => s
                .apply_edit(&EditRequest {
                    entity: e.clone(),
                    expected_head: chain.head_sequence(),
                    additions: vec![(iri(KEYWORD), Literal::new_simple(format!("k{step}")).into())],
                    removals: vec![],
                    agent: agent.clone(),
                    primary_source: None,
                })
                .map(|_| ()),
        };
        match r {
            Ok(()) => done += 1,
            Err(ServiceError::Deleted(_)) => {}
            Err(other) => return Err(format!("step {step}: {other}")),
        }
        for t in &targets {
            let chain = time_travel::load_chain(s.prov_store(), t).map_err(|x| x.to_string())?;
            chain.check().map_err(|x| x.to_string())?;
            let live = chain.snapshots.iter().filter(|s| s.invalidated_at.is_none()).count();
            check(live == usize::from(!chain.is_empty() && !chain.is_deleted()), format!("{t}: {live} live heads"))?;
            if !chain.is_empty() {
                let current = if chain.is_deleted() { QuadSet::new() } else { s.entity_quads(t).map_err(|x| x.to_string())? };
                materialize(&chain, &current, chain.len()).map_err(|x| x.to_string())?;
            }
        }
    }
    Ok(format!("{done} committed operations, invariants held"))
}

fn start_api(service: Service) -> String {
    let (tx, rx) = std::sync::mpsc::channel::<SocketAddr>();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let auth = StaticToken {
                token: None,
                agent: iri(CURATOR),
            };
            let app = quadvault::http::router(Arc::new(service), Arc::new(auth));
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    format!("http://{}", rx.recv().unwrap())
}

fn get_json(base: &str, path: &str, query: &[(&str, &str)]) -> Result<serde_json::Value, String> {
    let qs = form_urlencoded::Serializer::new(String::new()).extend_pairs(query).finish();
    let r = reqwest::blocking::get(format!("{base}{path}?{qs}")).map_err(|e| e.to_string())?;
    check(r.status().is_success(), format!("{path}: {}", r.status()))?;
    serde_json::from_str(&r.text().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn fixture_renderings() -> Outcome {
    let s = sample::service();
    let want = [153, 25, 27, 77, 66, 10, 62];
    let counts: Vec<u64> = s.list_categories().map_err(|e| e.to_string())?.iter().map(|c| c.count).collect();
    check(counts == want, format!("category counts {counts:?}"))?;

    let detail = s.get_entity(&iri(CHAPTER)).map_err(|e| e.to_string())?;
    let ids: Vec<&str> = detail
        .fields
        .iter()
        .filter(|f| f.property.as_str() == HAS_ID)
        .flat_map(|f| f.rendered.iter().map(|r| r.display.as_str()))
        .collect();
    check(ids == ["doi:10.1515/9783110354348-019"], format!("identifier rendering {ids:?}"))?;

    let label = s.display_of(&iri(LISTING)).map_err(|e| e.to_string())?;
    let expected = "Peroni & Shotton. OpenCitations, an infrastructure organization for open scholarship";
    check(label == expected, format!("uri display {label:?}"))?;

    let given = iri("http://xmlns.com/foaf/0.1/givenName");
    let agent = iri("http://xmlns.com/foaf/0.1/Agent");
    let found = s.search_suggestions("Franco", &given, &agent).map_err(|e| e.to_string())?;
    check(found.first().is_some_and(|f| f.display.starts_with("Franco Montanari")), format!("suggestions {found:?}"))?;

    let base = start_api(sample::service());
    let cats = get_json(&base, "/api/categories", &[])?;
    let http_counts: Vec<u64> = cats.as_array().unwrap().iter().map(|c| c["count"].as_u64().unwrap()).collect();
    check(http_counts == want, format!("http category counts {http_counts:?}"))?;
    let sugg = get_json(&base, "/api/search", &[("q", "Franco"), ("property", given.as_str()), ("class", agent.as_str())])?;
    let first = sugg[0]["display"].as_str().unwrap_or_default().to_owned();
    check(first.starts_with("Franco Montanari"), format!("http suggestion {first:?}"))?;
    let entity = get_json(&base, "/api/entity", &[("iri", CHAPTER)])?;
    let shown = entity["fields"].as_array().unwrap().iter().find(|f| f["property"] == HAS_ID).map(|f| f["rendered"][0]["display"].clone());
    check(shown == Some("doi:10.1515/9783110354348-019".into()), format!("http identifier {shown:?}"))?;
    Ok(format!("counts {counts:?}, \"{}\", \"{label}\", \"{first}\"", ids[0]))
}

const SHAPES: &str = r#"
@prefix sh: <http://www.w3.org/ns/shacl#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
@prefix fabio: <http://purl.org/spar/fabio/> .
@prefix dcterms: <http://purl.org/dc/terms/> .
@prefix prism: <http://prismstandard.org/namespaces/basic/2.0/> .
@prefix datacite: <http://purl.org/spar/datacite/> .
@prefix literal: <http://www.essepuntato.it/2010/06/literalreification/> .
@prefix ex: <urn:ex:> .

ex:ArticleShape a sh:NodeShape ;
  sh:targetClass fabio:JournalArticle ;
  sh:property [ sh:path dcterms:title ; sh:datatype xsd:string ; sh:minCount 1 ; sh:maxCount 1 ] ;
  sh:property [ sh:path prism:publicationDate ; sh:maxCount 1 ;
                sh:or ( [ sh:datatype xsd:date ] [ sh:datatype xsd:gYearMonth ] [ sh:datatype xsd:gYear ] ) ] ;
  sh:property [ sh:path prism:keyword ; sh:maxCount 3 ] ;
  sh:property [ sh:path datacite:hasIdentifier ; sh:class datacite:Identifier ] .

ex:IdentifierShape a sh:NodeShape ;
  sh:targetClass datacite:Identifier ;
  sh:property [ sh:path literal:hasLiteralValue ; sh:datatype xsd:string ; sh:minCount 1 ; sh:maxCount 1 ;
                sh:pattern "^10\\.\\d{4,9}/\\S+$" ; sh:message "Not a valid DOI" ] ;
  sh:property [ sh:path datacite:usesIdentifierScheme ; sh:in ( datacite:doi ) ; sh:minCount 1 ; sh:maxCount 1 ] .

ex:BookShape a sh:NodeShape ;
  sh:targetClass fabio:Book ;
  sh:property [ sh:path ex:pages ; sh:datatype xsd:integer ; sh:pattern "^[1-9]" ] .
"#;

fn typed(v: &str, dt: &str) -> Term {
    Literal::new_typed(v, iri(&format!("{XSD}{dt}"))).into()
}

fn plain(v: &str) -> Term {
    Literal::new_simple(v).into()
}

fn node(v: &str) -> Term {
    iri(v).into()
}

struct Case {
    class: &'static str,
    values: Vec<(&'static str, Term)>,
    expected: Vec<(ViolationKind, &'static str)>,
}

fn case(class: &'static str, values: Vec<(&'static str, Term)>, expected: Vec<(ViolationKind, &'static str)>) -> Case {
    Case { class, values, expected }
}

fn corpus() -> Vec<Case> {
    use ViolationKind::*;
    let art = "JournalArticle";
    let id = "Identifier";
    let book = "Book";
    let t = || (TITLE, plain("A title"));
    let scheme = || (SCHEME, node("http://purl.org/spar/datacite/doi"));
    let pages = "urn:ex:pages";
    vec![
        case(art, vec![t()], vec![]),
        case(art, vec![], vec![(MinCount, TITLE)]),
        case(art, vec![t(), (TITLE, plain("Another"))], vec![(MaxCount, TITLE)]),
        case(art, vec![(TITLE, typed("5", "integer"))], vec![(Datatype, TITLE)]),
        case(art, vec![(TITLE, Literal::new_language_tagged("Titolo", "it").unwrap().into())], vec![(Datatype, TITLE)]),
        case(art, vec![t(), (DATE, typed("2020-05-17", "date"))], vec![]),
        case(art, vec![t(), (DATE, typed("2020-05", "gYearMonth"))], vec![]),
        case(art, vec![t(), (DATE, typed("2020", "gYear"))], vec![]),
        case(art, vec![t(), (DATE, typed("-0044", "gYear"))], vec![]),
        case(art, vec![t(), (DATE, typed("2020-05-17Z", "date"))], vec![]),
        case(art, vec![t(), (DATE, typed("2024-02-29", "date"))], vec![]),
        case(art, vec![t(), (DATE, typed("2023-02-29", "date"))], vec![(Datatype, DATE)]),
        case(art, vec![t(), (DATE, typed("2020-13", "gYearMonth"))], vec![(Datatype, DATE)]),
        case(art, vec![t(), (DATE, typed("2020-05", "date"))], vec![(Datatype, DATE)]),
        case(art, vec![t(), (DATE, typed("20", "gYear"))], vec![(Datatype, DATE)]),
        case(art, vec![t(), (DATE, typed("2020", "string"))], vec![(Datatype, DATE)]),
        case(art, vec![t(), (DATE, plain("2020"))], vec![(Datatype, DATE)]),
        case(art, vec![t(), (DATE, typed("2020-05-17T10:00:00", "dateTime"))], vec![(Datatype, DATE)]),
        case(art, vec![t(), (DATE, typed("2020", "gYear")), (DATE, typed("2021", "gYear"))], vec![(MaxCount, DATE)]),
        case(art, vec![t(), (DATE, typed("2020", "gYear")), (DATE, typed("2020-00", "gYearMonth"))], vec![(MaxCount, DATE), (Datatype, DATE)]),
        case(art, vec![t(), (KEYWORD, plain("a")), (KEYWORD, plain("b")), (KEYWORD, plain("c"))], vec![]),
        case(
            art,
            vec![t(), (KEYWORD, plain("a")), (KEYWORD, plain("b")), (KEYWORD, plain("c")), (KEYWORD, plain("d"))],
            vec![(MaxCount, KEYWORD)],
        ),
        case(art, vec![(KEYWORD, plain("a")), (KEYWORD, plain("b")), (KEYWORD, plain("c")), (KEYWORD, plain("d"))], vec![(MinCount, TITLE), (MaxCount, KEYWORD)]),
        case(art, vec![t(), (HAS_ID, node("urn:ex:typed-id"))], vec![]),
        case(art, vec![t(), (HAS_ID, node("urn:ex:untyped-id"))], vec![(Class, HAS_ID)]),
        case(art, vec![t(), (HAS_ID, plain("10.1515/9783110354348-019"))], vec![(Class, HAS_ID)]),
        case(id, vec![(LITERAL, plain("10.1515/9783110354348-019")), scheme()], vec![]),
        case(id, vec![(LITERAL, plain("10.1162/qss_a_00292")), scheme()], vec![]),
        case(id, vec![(LITERAL, plain("doi:banana")), scheme()], vec![(Pattern, LITERAL)]),
        case(id, vec![(LITERAL, plain("10.151/x")), scheme()], vec![(Pattern, LITERAL)]),
        case(id, vec![(LITERAL, plain("10.1515/has space")), scheme()], vec![(Pattern, LITERAL)]),
        case(id, vec![(LITERAL, plain("10.1515/")), scheme()], vec![(Pattern, LITERAL)]),
        case(id, vec![(LITERAL, plain("x10.1515/abc")), scheme()], vec![(Pattern, LITERAL)]),
        case(id, vec![scheme()], vec![(MinCount, LITERAL)]),
        case(id, vec![(LITERAL, plain("10.1515/a")), (LITERAL, plain("10.1515/b")), scheme()], vec![(MaxCount, LITERAL)]),
        case(id, vec![(LITERAL, plain("10.1515/a"))], vec![(MinCount, SCHEME)]),
        case(id, vec![(LITERAL, plain("10.1515/a")), (SCHEME, node("http://purl.org/spar/datacite/isbn"))], vec![(Value, SCHEME)]),
        case(id, vec![(LITERAL, node("https://doi.org/10.1515/a")), scheme()], vec![(Datatype, LITERAL), (Pattern, LITERAL)]),
        case(book, vec![(pages, typed("12", "integer"))], vec![]),
        case(book, vec![(pages, typed("012", "integer"))], vec![(Pattern, pages)]),
        case(book, vec![(pages, typed("1.5", "integer"))], vec![(Datatype, pages)]),
        case(book, vec![(pages, typed("abc", "integer"))], vec![(Datatype, pages), (Pattern, pages)]),
        case(book, vec![(pages, typed("12", "decimal"))], vec![(Datatype, pages)]),
    ]
}

/// Independent regex engine: SPARQL `REGEX` as evaluated by oxigraph.
fn oxigraph_matches(store: &Store, value: &str, pattern: &str) -> Result<bool, String> {
    let q = format!("ASK {{ FILTER(REGEX({}, {})) }}", serde_json::to_string(value).unwrap(), serde_json::to_string(pattern).unwrap());
    match SparqlEvaluator::new().parse_query(&q).map_err(|e| e.to_string())?.on_store(store).execute().map_err(|e| e.to_string())? {
        QueryResults::Boolean(b) => Ok(b),
        _ => Err("ASK did not return a boolean".into()),
    }
}

fn shacl_conformance() -> Outcome {
    let shapes = load_shapes_turtle(SHAPES).map_err(|e| e.to_string())?;
    check(shapes.warnings.is_empty(), format!("warnings {:?}", shapes.warnings))?;
    let oxi = Store::new().map_err(|e| e.to_string())?;
    let doi = shapes
        .schemas
        .iter()
        .flat_map(|s| &s.constraints)
        .find(|c| c.path.as_str() == LITERAL)
        .and_then(|c| c.pattern.clone())
        .ok_or("DOI pattern missing")?;
    let cases = corpus();
    for (i, c) in cases.iter().enumerate() {
        let e = iri(&format!("urn:ex:case{i}"));
        let class = if c.class == "Identifier" { "http://purl.org/spar/datacite/Identifier".to_owned() } else { format!("{FABIO}{}", c.class) };
        let mut quads: QuadSet = c.values.iter().map(|(p, o)| Quad::new(e.clone(), iri(p), o.clone(), None)).collect();
        quads.insert(Quad::new(e.clone(), iri(RDF_TYPE), iri(&class), None));
        let mut g = EntityGraph::from_quads(e.clone(), quads);
        g.merge([Quad::new(iri("urn:ex:typed-id"), iri(RDF_TYPE), iri("http://purl.org/spar/datacite/Identifier"), None)]);
        let report = validate_with(&g, &shapes.schemas);
        let mut got: Vec<(ViolationKind, String)> = report.violations.iter().map(|v| (v.kind, v.path.as_str().to_owned())).collect();
        got.sort();
        let mut want: Vec<(ViolationKind, String)> = c.expected.iter().map(|(k, p)| (*k, p.to_string())).collect();
        want.sort();
        check(got == want && report.conforms == want.is_empty(), format!("case {i}: got {got:?}, expected {want:?}"))?;
        for v in &report.violations {
            if v.kind == ViolationKind::Pattern && v.path.as_str() == LITERAL {
                check(v.message == "Not a valid DOI", format!("case {i}: message {:?}", v.message))?;
            }
            if v.kind == ViolationKind::Pattern && v.path.as_str() == "urn:ex:pages" {
                check(v.message.contains("expected a value matching ^[1-9]"), format!("case {i}: message {:?}", v.message))?;
            }
        }
        for (p, o) in &c.values {
            if *p == LITERAL {
                let ours = o.as_literal().is_some() && Regex::new(&doi).unwrap().is_match(o.value());
                let flagged = report.violations.iter().any(|v| v.kind == ViolationKind::Pattern);
                let theirs = o.as_literal().is_some() && oxigraph_matches(&oxi, o.value(), &doi)?;
                check(ours == theirs && flagged == !theirs, format!("case {i}: pattern verdict disagrees for {o}"))?;
            }
        }
    }
    let lexical = lexical_oracle()?;
    Ok(format!("{} entity/shape pairs match; {lexical}", cases.len()))
}

fn xsd_reference(value: &str, local: &str) -> bool {
    const YEAR: &str = r"(-?(?:[1-9][0-9]{3,}|0[0-9]{3}))";
    const TZ: &str = r"(?:Z|[+-](?:(?:0[0-9]|1[0-3]):[0-5][0-9]|14:00))?";
    // The Gregorian calendar repeats every 400 years; this keeps years
    // beyond chrono's range checkable.
    let calendar = |y: &str, m: &str, d: &str| {
        let y = 2000 + y.parse::<i64>().unwrap().rem_euclid(400) as i32;
        NaiveDate::from_ymd_opt(y, m.parse().unwrap(), d.parse().unwrap()).is_some()
    };
    match local {
        "integer" => Regex::new(r"^[+-]?[0-9]+$").unwrap().is_match(value),
        "decimal" => Regex::new(r"^[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)$").unwrap().is_match(value),
        "boolean" => Regex::new(r"^(?:true|false|1|0)$").unwrap().is_match(value),
        "gYear" => Regex::new(&format!("^{YEAR}{TZ}$")).unwrap().is_match(value),
        "gYearMonth" => Regex::new(&format!("^{YEAR}-(?:0[1-9]|1[0-2]){TZ}$")).unwrap().is_match(value),
        "date" => Regex::new(&format!("^{YEAR}-([0-9]{{2}})-([0-9]{{2}}){TZ}$"))
            .unwrap()
            .captures(value)
            .is_some_and(|c| calendar(&c[1], &c[2], &c[3])),
        "dateTime" => Regex::new(&format!(r"^{YEAR}-([0-9]{{2}})-([0-9]{{2}})T([0-9]{{2}}):([0-9]{{2}}):([0-9]{{2}})(\.[0-9]+)?{TZ}$"))
            .unwrap()
            .captures(value)
            .is_some_and(|c| {
                let (h, mi, s): (u32, u32, u32) = (c[4].parse().unwrap(), c[5].parse().unwrap(), c[6].parse().unwrap());
                let frac_zero = c.get(7).is_none_or(|f| f.as_str()[1..].bytes().all(|b| b == b'0'));
                let time = (h == 24 && mi == 0 && s == 0 && frac_zero) || NaiveTime::from_hms_opt(h, mi, s).is_some_and(|_| s < 60);
                calendar(&c[1], &c[2], &c[3]) && time
            }),
        _ => unreachable!(),
    }
}

fn lexical_candidate() -> impl Strategy<Value = String> {
    let year = prop_oneof!["-?[0-9]{2,6}", Just("2024".to_owned()), Just("1900".to_owned()), Just("2000".to_owned())];
    let two = "[0-3][0-9]";
    let tz = prop_oneof![Just(String::new()), Just("Z".to_owned()), "[+-][01][0-9]:[0-6][0-9]", Just("+14:00".to_owned()), Just("+5:00".to_owned())];
    let time = ("[0-2][0-9]", "[0-6][0-9]", "[0-6][0-9]", prop_oneof![Just(String::new()), "\\.[0-9]{1,3}", Just(".".to_owned())])
        .prop_map(|(h, m, s, f)| format!("{h}:{m}:{s}{f}"));
    prop_oneof![
        (year.clone(), tz.clone()).prop_map(|(y, z)| format!("{y}{z}")),
        (year.clone(), two, tz.clone()).prop_map(|(y, m, z)| format!("{y}-{m}{z}")),
        (year.clone(), two, two, tz.clone()).prop_map(|(y, m, d, z)| format!("{y}-{m}-{d}{z}")),
        (year, two, two, time, tz).prop_map(|(y, m, d, t, z)| format!("{y}-{m}-{d}T{t}{z}")),
        "[+-]?[0-9]{0,4}(\\.[0-9]{0,3})?",
        "[0-9:TZ+.\\-a-z ]{0,12}",
    ]
}

fn lexical_oracle() -> Outcome {
    let datatypes = ["date", "gYearMonth", "gYear", "dateTime", "integer", "decimal", "boolean"];
    let cases = 3000;
    let valid = AtomicUsize::new(0);
    runner(cases)
        .run(&lexical_candidate(), |v| {
            for dt in datatypes {
                let ours = lexical_valid(&v, &format!("{XSD}{dt}")).unwrap();
                prop_assert_eq!(ours, xsd_reference(&v, dt), "{:?} as xsd:{}", v, dt);
                valid.fetch_add(usize::from(ours), Ordering::Relaxed);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "lexical checker agrees with the reference on {cases} random strings x {} datatypes ({} valid verdicts)",
        datatypes.len(),
        valid.into_inner()
    ))
}

/// Fails the n-th update; with `sticky`, every later update fails too.
struct Faulty {
    inner: Arc<MemoryStore>,
    faults: Arc<Faults>,
}

#[derive(Default)]
struct Faults {
    calls: AtomicUsize,
    fail_at: AtomicUsize,
    sticky: AtomicBool,
}

impl Faults {
    fn arm(&self, at: usize, sticky: bool) {
        self.calls.store(0, Ordering::SeqCst);
        self.fail_at.store(at, Ordering::SeqCst);
        self.sticky.store(sticky, Ordering::SeqCst);
    }
}

impl SparqlStore for Faulty {
    fn select(&self, query: &str) -> Result<SelectResult, SparqlError> {
        self.inner.select(query)
    }

    fn update(&self, update_text: &str) -> Result<(), SparqlError> {
        let n = self.faults.calls.fetch_add(1, Ordering::SeqCst) + 1;
        let at = self.faults.fail_at.load(Ordering::SeqCst);
        if at != 0 && (n == at || (self.faults.sticky.load(Ordering::SeqCst) && n > at)) {
            return Err(SparqlError::Failure(format!("injected failure on update {n}")));
        }
        self.inner.update(update_text)
    }

    fn load_quads(&self, quads: &QuadSet) -> Result<(), SparqlError> {
        self.inner.load_quads(quads)
    }
}

fn atomicity() -> Outcome {
    let data = Arc::new(MemoryStore::new());
    let prov = Arc::new(MemoryStore::new());
    data.load_quads(&quadvault::rdf::parse_nquads(sample::DATA_NQ).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let faults = Arc::new(Faults::default());
    let handle = |m: &Arc<MemoryStore>| StoreHandle::custom(Arc::new(Faulty { inner: m.clone(), faults: faults.clone() }));
    let s = Service::new(handle(&data), handle(&prov), sample::config());
    let agent = iri(CURATOR);
    let dump = || (data.quads(), prov.quads());
    let head = |e: &str| time_travel::load_chain(s.prov_store(), &iri(e)).unwrap().head_sequence();

    let edit = |tag: &str| {
        s.apply_edit(&EditRequest {
            entity: iri(ARTICLE),
            expected_head: head(ARTICLE),
            additions: vec![(iri(KEYWORD), plain(tag))],
            removals: vec![],
            agent: agent.clone(),
            primary_source: None,
        })
        .map(|_| ())
    };
    let create = || {
        let person = NewEntity {
            class: iri("http://xmlns.com/foaf/0.1/Agent"),
            fields: vec![(iri("http://xmlns.com/foaf/0.1/familyName"), FieldValue::Term(plain("Pagani")))],
        };
        let role = NewEntity {
            class: iri("http://purl.org/spar/pro/RoleInTime"),
            fields: vec![
                (iri("http://purl.org/spar/pro/withRole"), FieldValue::Term(node("http://purl.org/spar/pro/author"))),
                (iri("http://purl.org/spar/pro/isHeldBy"), FieldValue::New(person)),
            ],
        };
        s.create_entity(&CreateRequest {
            class: iri(&format!("{FABIO}JournalArticle")),
            fields: vec![
                (iri(TITLE), FieldValue::Term(plain("Pioneers of grammar"))),
                (iri("http://purl.org/spar/pro/isDocumentContextFor"), FieldValue::New(role)),
            ],
            agent: agent.clone(),
            source: None,
        })
        .map(|_| ())
    };
    let delete = || s.delete_entity(&iri(CHAPTER), &agent).map(|_| ());
    let restore = || s.restore_version(&iri(CHAPTER), 1, &agent).map(|_| ());

    type Op<'a> = (&'a str, &'a dyn Fn() -> Result<(), ServiceError>);
    let ops: [Op; 4] =
        [("edit", &|| edit("atomic")), ("create", &create), ("delete", &delete), ("restore", &restore)];
    let mut injected = 0;
    for (name, op) in ops {
        let mut step = 1;
        loop {
            let before = dump();
            faults.arm(step, false);
            let clean = op();
            faults.arm(0, false);
            if clean.is_ok() {
                break;
            }
            check(dump() == before, format!("{name}: failure at update {step} left partial writes"))?;
            faults.arm(step, true);
            let crashed = op();
            faults.arm(0, false);
            check(crashed.is_err(), format!("{name}: crash at update {step} went unnoticed"))?;
            s.recover().map_err(|e| e.to_string())?;
            check(dump() == before, format!("{name}: recovery after crash at update {step} did not restore the stores"))?;
            injected += 2;
            step += 1;
            check(step < 20, format!("{name}: never completed"))?;
        }
        check(s.recover().map_err(|e| e.to_string())? == 0, format!("{name}: intent left after success"))?;
    }

    let racing = sample::service();
    let rounds = 25;
    for round in 0..rounds {
        let expected = time_travel::load_chain(racing.prov_store(), &iri(ARTICLE)).unwrap().head_sequence();
        let barrier = Barrier::new(2);
        let results: Vec<Result<_, ServiceError>> = std::thread::scope(|sc| {
            let hs: Vec<_> = (0..2)
                .map(|t| {
                    let (racing, barrier, agent) = (&racing, &barrier, agent.clone());
                    sc.spawn(move || {
                        barrier.wait();
                        racing.apply_edit(&EditRequest {
                            entity: iri(ARTICLE),
                            expected_head: expected,
                            additions: vec![(iri(KEYWORD), plain(&format!("race {round} {t}")))],
                            removals: vec![],
                            agent,
                            primary_source: None,
                        })
                    })
                })
                .collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let wins = results.iter().filter(|r| r.is_ok()).count();
        let stale = results.iter().filter(|r| matches!(r, Err(ServiceError::Stale { .. }))).count();
        check((wins, stale) == (1, 1), format!("round {round}: {results:?}"))?;
    }
    let chain = time_travel::load_chain(racing.prov_store(), &iri(ARTICLE)).unwrap();
    check(chain.len() == rounds + 1, format!("{} snapshots after {rounds} races", chain.len()))?;
    Ok(format!("{injected} injected failures left both stores unchanged; {rounds} races, one winner each"))
}

fn performance() -> Outcome {
    let e = iri("https://w3id.org/oc/meta/br/1");
    let agent = iri(CURATOR);
    let mut chain = ProvenanceChain::new(e.clone());
    let mut current = QuadSet::new();
    let mut now = start();
    let keyword = iri(KEYWORD);
    current.insert(Quad::new(e.clone(), iri(RDF_TYPE), iri(&format!("{FABIO}JournalArticle")), None));
    current.insert(Quad::new(e.clone(), iri(TITLE), plain("A long history"), None));
    chain = provenance::record_snapshot(&chain, Delta::insert_only(current.clone()).unwrap(), &agent, None, "created", now).unwrap();
    for i in 1..1000 {
        let add = Quad::new(e.clone(), keyword.clone(), plain(&format!("keyword {i}")), None);
        let mut del = QuadSet::new();
        if i % 3 == 0 {
            del.insert(Quad::new(e.clone(), keyword.clone(), plain(&format!("keyword {}", i - 1)), None));
        }
        let d = Delta::new(QuadSet::from([add]), del).unwrap();
        d.apply_in_place(&mut current);
        now += chrono::Duration::seconds(1);
        chain = provenance::record_snapshot(&chain, d, &agent, None, "edit", now).unwrap();
    }
    let s = Service::new(StoreHandle::memory(), StoreHandle::memory(), sample::config());
    s.data_store().load_quads(&current).map_err(|x| x.to_string())?;
    s.prov_store().load_quads(&chain_quads(&chain)).map_err(|x| x.to_string())?;
    let mut worst = Duration::ZERO;
    for k in [1, 250, 500, 999, 1000] {
        let started = Instant::now();
        let view = s.get_version(&e, k).map_err(|x| x.to_string())?;
        worst = worst.max(started.elapsed());
        check(view.at_snapshot == k, "wrong snapshot")?;
    }
    check(worst < Duration::from_secs(2), format!("materialize took {worst:?}"))?;

    let big = Service::new(StoreHandle::memory(), StoreHandle::memory(), sample::config());
    let class = iri(&format!("{FABIO}JournalArticle"));
    let mut quads = QuadSet::new();
    for i in 0..10_000 {
        let b = iri(&format!("https://w3id.org/oc/meta/br/{i}"));
        quads.insert(Quad::new(b.clone(), iri(RDF_TYPE), class.clone(), None));
        quads.insert(Quad::new(b, iri(TITLE), plain(&format!("Title {:05}", (i * 7919) % 10_000)), None));
    }
    big.data_store().load_quads(&quads).map_err(|x| x.to_string())?;
    let mut slowest = Duration::ZERO;
    let title = iri(TITLE);
    for (page, sort) in [(1, None), (100, None), (1, Some(&title)), (50, Some(&title))] {
        let started = Instant::now();
        let p = big.get_page(&class, page, 100, sort, SortDir::Asc).map_err(|x| x.to_string())?;
        slowest = slowest.max(started.elapsed());
        check(p.total == 10_000 && p.items.len() == 100, format!("page {page}: {} items of {}", p.items.len(), p.total))?;
    }
    let first = big.get_page(&class, 1, 20, Some(&title), SortDir::Asc).map_err(|x| x.to_string())?;
    check(first.items[0].1.ends_with("Title 00000"), format!("sorted first item {:?}", first.items[0]))?;
    check(slowest < Duration::from_secs(1), format!("catalog page took {slowest:?}"))?;
    let distinct: BTreeSet<_> = first.items.iter().map(|(e, _)| e.clone()).collect();
    check(distinct.len() == 20, "duplicate items")?;
    Ok(format!("1000-snapshot materialize worst {worst:?}; 10k-entity catalog page worst {slowest:?}"))
}
