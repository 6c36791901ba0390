use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::Parser;
use quadvault::display::parse_config;
use quadvault::rdf::{parse_nquads, NamedNode};
use quadvault::service::{Service, ServiceConfig, StaticToken};
use quadvault::shacl::load_shapes_turtle;
use quadvault::sparql::StoreHandle;

/// Serve the curation API over a SPARQL store.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Display rules (YAML).
    #[arg(long, env = "HT_CONFIG")]
    config: Option<PathBuf>,
    /// SHACL shapes (Turtle).
    #[arg(long, env = "HT_SHAPES")]
    shapes: Option<PathBuf>,
    /// SPARQL endpoint for data, used for both query and update.
    #[arg(long, env = "HT_DATA_ENDPOINT", required_unless_present = "memory")]
    data_endpoint: Option<String>,
    /// SPARQL endpoint for provenance; defaults to the data endpoint.
    #[arg(long, env = "HT_PROV_ENDPOINT")]
    prov_endpoint: Option<String>,
    /// Use an embedded in-memory store for both data and provenance.
    #[arg(long, env = "HT_MEMORY", conflicts_with = "data_endpoint")]
    memory: bool,
    /// N-Quads loaded into the embedded store at startup.
    #[arg(long, env = "HT_SEED", requires = "memory")]
    seed: Option<PathBuf>,
    #[arg(long, env = "HT_PORT", default_value_t = 5000)]
    port: u16,
    #[arg(long, env = "HT_HOST", default_value = "127.0.0.1")]
    host: String,
    #[arg(long, env = "HT_BASE_IRI", default_value = "https://example.org/data")]
    base_iri: String,
    /// Bearer token required for writes; without it writes are open.
    #[arg(long, env = "HT_TOKEN")]
    token: Option<String>,
    /// Agent IRI that writes are attributed to.
    #[arg(long, env = "HT_AGENT", default_value = "https://example.org/agent/curator")]
    agent: String,
    /// Seconds before a remote SPARQL request gives up.
    #[arg(long, env = "HT_TIMEOUT", default_value_t = 30)]
    timeout: u64,
}

fn read(path: &PathBuf) -> Result<String, Box<dyn std::error::Error>> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn build(args: &Args) -> Result<Service, Box<dyn std::error::Error>> {
    let mut config = ServiceConfig::new(&args.base_iri);
    if let Some(p) = &args.config {
        config.display = parse_config(&read(p)?)?;
        for w in &config.display.warnings {
            tracing::warn!("display config: {w}");
        }
    }
    if let Some(p) = &args.shapes {
        config.shapes = load_shapes_turtle(&read(p)?)?;
        for w in &config.shapes.warnings {
            tracing::warn!("shapes: {w}");
        }
    }
    let timeout = Duration::from_secs(args.timeout);
    let (data, prov) = if args.memory {
        let store = StoreHandle::memory();
        if let Some(seed) = &args.seed {
            store.load_quads(&parse_nquads(&read(seed)?)?)?;
        }
        (store.clone(), store)
    } else {
        let d = args.data_endpoint.as_deref().expect("clap requires an endpoint without --memory");
        let p = args.prov_endpoint.as_deref().unwrap_or(d);
        (StoreHandle::remote(d, d, timeout)?, StoreHandle::remote(p, p, timeout)?)
    };
    Ok(Service::new(data, prov, config))
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let args = Args::parse();
    let service = build(&args)?;
    let recovered = service.recover()?;
    if recovered > 0 {
        tracing::warn!("rolled back {recovered} interrupted write(s)");
    }
    let auth = StaticToken {
        token: args.token.clone(),
        agent: NamedNode::new(args.agent.clone())?,
    };
    let app = quadvault::http::router(Arc::new(service), Arc::new(auth));
    let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port)).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}
