//! Serve the sample data over HTTP on a free port and call a few routes.

use std::sync::Arc;

use quadvault::rdf::nquads::iri;
use quadvault::sample;
use quadvault::service::StaticToken;
use serde_json::Value;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().expect("runtime");
        rt.block_on(async move {
            let auth = StaticToken {
                token: Some("secret".into()),
                agent: iri("https://orcid.org/0009-0002-5790-4804"),
            };
            let app = quadvault::http::router(Arc::new(sample::service()), Arc::new(auth));
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.expect("bind");
            tx.send(listener.local_addr().expect("addr")).expect("send");
            axum::serve(listener, app).await.expect("serve");
        });
    });
    let base = format!("http://{}", rx.recv()?);
    let client = reqwest::blocking::Client::new();

    let cats: Value = serde_json::from_str(&client.get(format!("{base}/api/categories")).send()?.text()?)?;
    for c in cats.as_array().into_iter().flatten() {
        println!("{} {}", c["display_name"], c["count"]);
    }

    let article = "https%3A%2F%2Fw3id.org%2Foc%2Fmeta%2Fbr%2F06215";
    let body = r#"{"iri": "https://w3id.org/oc/meta/br/06215", "expected_head": 0,
                   "additions": [{"property": "http://prismstandard.org/namespaces/basic/2.0/keyword", "value": "Scholia"}]}"#;
    let patch = |token: Option<&str>| {
        let mut req = client.patch(format!("{base}/api/entity")).header("content-type", "application/json").body(body);
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        req.send()
    };
    println!("without token: {}", patch(None)?.status());
    let ok = patch(Some("secret"))?;
    println!("with token: {} {}", ok.status(), ok.text()?);
    println!("again: {}", patch(Some("secret"))?.status());

    let history: Value = serde_json::from_str(&client.get(format!("{base}/api/entity/history?iri={article}")).send()?.text()?)?;
    println!("{} snapshots, newest: {}", history.as_array().map_or(0, Vec::len), history[0]["description"]);
    Ok(())
}
