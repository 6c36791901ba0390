//! SPARQL 1.1 Protocol server over any store, used to expose the memory
//! store to remote clients.

use std::collections::HashMap;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;

use super::json::{to_json, MEDIA_TYPE};
use super::{SparqlError, StoreHandle};

/// Routes: `GET|POST /query`, `POST /update`.
pub fn router(store: StoreHandle) -> Router {
    Router::new()
        .route("/query", get(query_get).post(query_post))
        .route("/update", post(update_post))
        .with_state(store)
}

fn form_field(body: &[u8], field: &str) -> Option<String> {
    form_urlencoded::parse(body)
        .find(|(k, _)| k == field)
        .map(|(_, v)| v.into_owned())
}

fn content_type(headers: &HeaderMap) -> &str {
    headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("")
}

fn error_response(e: SparqlError) -> Response {
    let status = match e {
        SparqlError::Syntax(_) | SparqlError::Update(_) | SparqlError::Unsupported(_) => StatusCode::BAD_REQUEST,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    };
    (status, e.to_string()).into_response()
}

async fn run_query(store: StoreHandle, query: String) -> Response {
    let result = tokio::task::spawn_blocking(move || store.select(&query)).await;
    match result {
        Ok(Ok(r)) => ([(header::CONTENT_TYPE, MEDIA_TYPE)], to_json(&r).to_string()).into_response(),
        Ok(Err(e)) => error_response(e),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

async fn query_get(State(store): State<StoreHandle>, Query(params): Query<HashMap<String, String>>) -> Response {
    match params.get("query") {
        Some(q) => run_query(store, q.clone()).await,
        None => (StatusCode::BAD_REQUEST, "missing `query` parameter").into_response(),
    }
}

async fn query_post(State(store): State<StoreHandle>, headers: HeaderMap, body: Bytes) -> Response {
    let query = if content_type(&headers).starts_with("application/sparql-query") {
        String::from_utf8(body.to_vec()).ok()
    } else {
        form_field(&body, "query")
    };
    match query {
        Some(q) => run_query(store, q).await,
        None => (StatusCode::BAD_REQUEST, "missing `query`").into_response(),
    }
}

async fn update_post(State(store): State<StoreHandle>, headers: HeaderMap, body: Bytes) -> Response {
    let update = if content_type(&headers).starts_with("application/sparql-update") {
        String::from_utf8(body.to_vec()).ok()
    } else {
        form_field(&body, "update")
    };
    let Some(update) = update else {
        return (StatusCode::BAD_REQUEST, "missing `update`").into_response();
    };
    match tokio::task::spawn_blocking(move || store.update(&update)).await {
        Ok(Ok(())) => StatusCode::NO_CONTENT.into_response(),
        Ok(Err(e)) => error_response(e),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}
