pub mod delta;
pub mod display;
pub mod http;
pub mod provenance;
pub mod rdf;
pub mod sample;
pub mod service;
pub mod shacl;
pub mod sparql;
pub mod time_travel;
