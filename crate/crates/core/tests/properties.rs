mod common;

use common::*;
use proptest::prelude::*;
use quadvault::delta::{self, from_update_text, Delta};
use quadvault::provenance::{chain_quads, from_prov_quads};
use quadvault::rdf::{parse_nquads, serialize_nquads, QuadSet};
use quadvault::sparql::StoreHandle;
use quadvault::time_travel::{self, materialize};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn invert_is_an_involution(d in delta()) {
        prop_assert_eq!(delta::invert(&delta::invert(&d)), d);
    }

    #[test]
    fn diff_then_apply_reaches_the_target(a in quad_set(12), b in quad_set(12)) {
        let d = delta::diff(&graph(&a), &graph(&b)).unwrap();
        prop_assert_eq!(delta::apply(&d, &a), b.clone());
        prop_assert_eq!(delta::apply(&d.invert(), &b), a);
    }

    #[test]
    fn update_text_round_trips(d in delta()) {
        let text = d.to_update_text();
        prop_assert_eq!(from_update_text(&text).unwrap(), d);
    }

    #[test]
    fn nquads_round_trip(q in quad_set(12)) {
        prop_assert_eq!(parse_nquads(&serialize_nquads(&q)).unwrap(), q);
    }

    #[test]
    fn store_insert_then_delete_is_identity(base in quad_set(12), d in delta()) {
        let store = StoreHandle::memory();
        store.load_quads(&base).unwrap();
        let d = Delta::between(&base, &d.apply(&base)).unwrap();
        store.update(&d.to_update_text()).unwrap();
        prop_assert_eq!(dump(&store), d.apply(&base));
        store.update(&d.invert().to_update_text()).unwrap();
        prop_assert_eq!(dump(&store), base);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn backward_replay_matches_forward(edits in history(50)) {
        let (chain, states) = build_history(&edits);
        let current = states.last().unwrap();
        for k in 1..=chain.len() {
            prop_assert_eq!(&materialize(&chain, current, k).unwrap().quads, &states[k as usize]);
        }
    }

    #[test]
    fn prov_quads_round_trip((ops, sources) in ops(30)) {
        let (chain, _) = run_ops(&ops, &sources);
        chain.check().unwrap();
        let live = chain.snapshots.iter().filter(|s| s.invalidated_at.is_none()).count();
        prop_assert_eq!(live, usize::from(!chain.is_empty() && !chain.is_deleted()));
        prop_assert_eq!(from_prov_quads(&chain_quads(&chain), &chain.entity).unwrap(), chain.clone());
        let store = StoreHandle::memory();
        store.load_quads(&chain_quads(&chain)).unwrap();
        prop_assert_eq!(time_travel::load_chain(&store, &chain.entity).unwrap(), chain);
    }

    #[test]
    fn restore_is_undoable(edits in history(12), pick in any::<usize>()) {
        let (chain, states) = build_history(&edits);
        prop_assume!(chain.len() >= 2);
        let n = chain.len();
        let k = 1 + (pick as u64 % (n - 1));
        let current = states.last().unwrap();
        let agent = iri("urn:agent");
        let later = chain.head().unwrap().generated_at;
        let (restored, chain2) = time_travel::restore(&chain, current, k, &agent, later).unwrap();
        prop_assert_eq!(&restored, &states[k as usize]);
        prop_assert_eq!(&materialize(&chain2, &restored, n + 1).unwrap().quads, &restored);
        let (back, _) = time_travel::restore(&chain2, &restored, n, &agent, later).unwrap();
        prop_assert_eq!(&back, current);
    }
}

fn dump(store: &StoreHandle) -> QuadSet {
    let rows = store.select("SELECT ?s ?p ?o ?g WHERE { { ?s ?p ?o } UNION { GRAPH ?g { ?s ?p ?o } } }").unwrap();
    rows.rows
        .iter()
        .map(|r| {
            quadvault::rdf::Quad::new(
                quadvault::rdf::Subject::try_from(r["s"].clone()).unwrap(),
                r["p"].as_named_node().unwrap().clone(),
                r["o"].clone(),
                r.get("g").and_then(|g| g.as_named_node()).cloned(),
            )
        })
        .collect()
}
