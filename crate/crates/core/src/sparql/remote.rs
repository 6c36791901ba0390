use std::time::Duration;

use reqwest::blocking::Client;

use super::json::{from_json, MEDIA_TYPE};
use super::{SelectResult, SparqlError, SparqlStore};
use crate::rdf::QuadSet;

/// Statements per `INSERT DATA` request when bulk loading.
const LOAD_BATCH: usize = 5_000;

/// SPARQL 1.1 Protocol client.
pub struct RemoteStore {
    client: Client,
    query_endpoint: String,
    update_endpoint: String,
    timeout: Duration,
}

impl RemoteStore {
    pub fn new(query_endpoint: &str, update_endpoint: &str, timeout: Duration) -> Result<Self, SparqlError> {
        let client = Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| SparqlError::Failure(e.to_string()))?;
        Ok(Self {
            client,
            query_endpoint: query_endpoint.to_owned(),
            update_endpoint: update_endpoint.to_owned(),
            timeout,
        })
    }

    fn post(&self, url: &str, field: &str, body: &str, accept: Option<&str>) -> Result<String, SparqlError> {
        let mut request = self.client.post(url).form(&[(field, body)]);
        if let Some(accept) = accept {
            request = request.header(reqwest::header::ACCEPT, accept);
        }
        let response = request.send().map_err(|e| self.transport_error(e))?;
        let status = response.status();
        let text = response.text().map_err(|e| self.transport_error(e))?;
        if !status.is_success() {
            return Err(SparqlError::Endpoint {
                status: status.as_u16(),
                body: text,
            });
        }
        Ok(text)
    }

    fn transport_error(&self, e: reqwest::Error) -> SparqlError {
        if e.is_timeout() {
            SparqlError::Timeout(self.timeout)
        } else {
            SparqlError::Unreachable(e.to_string())
        }
    }
}

impl SparqlStore for RemoteStore {
    fn select(&self, query: &str) -> Result<SelectResult, SparqlError> {
        super::parse_query(query)?;
        let body = self.post(&self.query_endpoint, "query", query, Some(MEDIA_TYPE))?;
        from_json(&body)
    }

    fn update(&self, update_text: &str) -> Result<(), SparqlError> {
        crate::delta::from_update_text(update_text)?;
        self.post(&self.update_endpoint, "update", update_text, None).map(|_| ())
    }

    fn load_quads(&self, quads: &QuadSet) -> Result<(), SparqlError> {
        let quads: Vec<_> = quads.iter().collect();
        for chunk in quads.chunks(LOAD_BATCH) {
            let mut text = String::from("INSERT DATA { ");
            for q in chunk {
                match &q.graph {
                    Some(g) => text.push_str(&format!("GRAPH {g} {{ {} }} ", q.triple_statement())),
                    None => {
                        text.push_str(&q.triple_statement());
                        text.push(' ');
                    }
                }
            }
            text.push('}');
            self.post(&self.update_endpoint, "update", &text, None)?;
        }
        Ok(())
    }
}
