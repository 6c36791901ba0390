//! The bundled bibliographic sample: display rules, shapes and data.

use std::sync::Arc;

use crate::display::parse_config;
use crate::rdf::parse_nquads;
use crate::service::{Clock, Service, ServiceConfig};
use crate::shacl::load_shapes_turtle;
use crate::sparql::StoreHandle;

pub const DISPLAY_YAML: &str = include_str!("../data/display.yaml");
pub const SHAPES_TTL: &str = include_str!("../data/shapes.ttl");
pub const DATA_NQ: &str = include_str!("../data/sample.nq");
pub const BASE_IRI: &str = "https://w3id.org/oc/meta";

pub fn config() -> ServiceConfig {
    let mut config = ServiceConfig::new(BASE_IRI);
    config.display = parse_config(DISPLAY_YAML).expect("bundled display config parses");
    config.shapes = load_shapes_turtle(SHAPES_TTL).expect("bundled shapes parse");
    config
}

/// A service over one fresh in-memory store holding the sample data and
/// its provenance.
pub fn service() -> Service {
    let store = StoreHandle::memory();
    store
        .load_quads(&parse_nquads(DATA_NQ).expect("bundled data parses"))
        .expect("memory store accepts quads");
    Service::new(store.clone(), store, config())
}

pub fn service_with_clock(clock: Arc<dyn Clock>) -> Service {
    service().with_clock(clock)
}
