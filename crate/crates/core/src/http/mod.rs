//! JSON API over a [`Service`].
//!
//! Reads are open; writes need an agent from the [`AgentResolver`], fed
//! with the `Authorization: Bearer` token. Terms use the SPARQL results
//! JSON shape (`{"type": "uri", "value": ...}`); a bare string is a plain
//! literal.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::provenance::{format_timestamp, Snapshot};
use crate::rdf::{Literal, NamedNode, Term};
use crate::service::{
    AgentResolver, CreateRequest, EditRequest, FieldValue, NewEntity, Service, ServiceError, SortDir, PER_PAGE_DEFAULT,
};
use crate::sparql::json::{term_from_json, term_to_json};

#[derive(Clone)]
struct AppState {
    service: Arc<Service>,
    auth: Arc<dyn AgentResolver>,
}

pub fn router(service: Arc<Service>, auth: Arc<dyn AgentResolver>) -> Router {
    Router::new()
        .route("/api/categories", get(categories))
        .route("/api/catalog/{class}", get(catalog))
        .route("/api/entity", get(entity).post(create).patch(edit).delete(delete))
        .route("/api/entity/history", get(history))
        .route("/api/entity/version", get(version))
        .route("/api/entity/restore", post(restore))
        .route("/api/search", get(search))
        .route("/api/vault", get(vault))
        .route("/api/form-schema", get(form_schema))
        .with_state(AppState { service, auth })
}

pub struct ApiError(StatusCode, Value);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn bad_request(message: impl std::fmt::Display) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, json!({"error": "bad_request", "message": message.to_string()}))
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let message = e.to_string();
        let (status, code, extra) = match &e {
            ServiceError::NotFound(_) | ServiceError::UnknownCategory(_) => (StatusCode::NOT_FOUND, "not_found", json!({})),
            ServiceError::Deleted(_) => (StatusCode::GONE, "deleted", json!({"vault": "/api/vault"})),
            ServiceError::Stale { expected, actual, .. } => {
                (StatusCode::CONFLICT, "stale", json!({"expected_head": expected, "current_head": actual}))
            }
            ServiceError::Conflict(_) => (StatusCode::CONFLICT, "conflict", json!({})),
            ServiceError::Validation(report) => {
                let violations: Vec<Value> = report
                    .violations
                    .iter()
                    .map(|v| {
                        json!({
                            "entity": v.entity,
                            "path": v.path,
                            "kind": v.kind,
                            "message": v.message,
                            "value": v.offending_value.as_ref().map(term_to_json),
                        })
                    })
                    .collect();
                (StatusCode::UNPROCESSABLE_ENTITY, "validation", json!({"violations": violations}))
            }
            ServiceError::NotCreatable(_) => (StatusCode::FORBIDDEN, "not_creatable", json!({})),
            ServiceError::Unauthorized => (StatusCode::UNAUTHORIZED, "unauthorized", json!({})),
            ServiceError::InvalidPerPage(_)
            | ServiceError::InvalidPage
            | ServiceError::InvalidSort(_)
            | ServiceError::EmptyEdit
            | ServiceError::OutOfRange { .. } => (StatusCode::BAD_REQUEST, "bad_request", json!({})),
            ServiceError::Store(_) => (StatusCode::BAD_GATEWAY, "store", json!({})),
            ServiceError::Prov(_) | ServiceError::History(_) => (StatusCode::INTERNAL_SERVER_ERROR, "provenance", json!({})),
        };
        let mut body = json!({"error": code, "message": message});
        if let (Value::Object(b), Value::Object(x)) = (&mut body, extra) {
            b.extend(x);
        }
        ApiError(status, body)
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static) -> Result<T, ApiError> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError::from),
        Err(e) => Err(ApiError(StatusCode::INTERNAL_SERVER_ERROR, json!({"error": "internal", "message": e.to_string()}))),
    }
}

fn agent(state: &AppState, headers: &HeaderMap) -> Result<NamedNode, ApiError> {
    let bearer = headers
        .get(axum::http::header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    state.auth.resolve(bearer).ok_or_else(|| ServiceError::Unauthorized.into())
}

fn parse_iri(s: &str) -> Result<NamedNode, ApiError> {
    NamedNode::new(s).map_err(|e| bad_request(format!("{s:?}: {e}")))
}

fn parse_term(v: &Value) -> Result<Term, ApiError> {
    match v {
        Value::String(s) => Ok(Literal::new_simple(s.clone()).into()),
        other => term_from_json(other).map_err(bad_request),
    }
}

pub fn snapshot_json(s: &Snapshot) -> Value {
    json!({
        "id": s.id,
        "entity": s.entity,
        "sequence": s.sequence,
        "generated_at": format_timestamp(&s.generated_at),
        "invalidated_at": s.invalidated_at.as_ref().map(format_timestamp),
        "agent": s.agent,
        "primary_source": s.primary_source,
        "description": s.description,
        "is_deletion": s.is_terminal(),
        "update_query": s.delta.to_update_text(),
    })
}

async fn categories(State(st): State<AppState>) -> ApiResult {
    let cats = blocking(move || st.service.list_categories()).await?;
    Ok(Json(json!(cats)))
}

#[derive(Deserialize)]
struct CatalogParams {
    page: Option<u32>,
    per_page: Option<u32>,
    sort_by: Option<String>,
    sort_dir: Option<SortDir>,
}

async fn catalog(State(st): State<AppState>, Path(class): Path<String>, Query(p): Query<CatalogParams>) -> ApiResult {
    let class = parse_iri(&class)?;
    let sort_by = p.sort_by.as_deref().map(parse_iri).transpose()?;
    let page = blocking(move || {
        st.service.get_page(
            &class,
            p.page.unwrap_or(1),
            p.per_page.unwrap_or(PER_PAGE_DEFAULT),
            sort_by.as_ref(),
            p.sort_dir.unwrap_or_default(),
        )
    })
    .await?;
    let items: Vec<Value> = page.items.iter().map(|(e, d)| json!({"entity": e, "display": d})).collect();
    Ok(Json(json!({
        "category": page.category,
        "total": page.total,
        "page": page.page,
        "per_page": page.per_page,
        "sort_by": page.sort_by,
        "sort_dir": page.sort_dir,
        "items": items,
    })))
}

#[derive(Deserialize)]
struct IriParam {
    iri: String,
}

async fn entity(State(st): State<AppState>, Query(p): Query<IriParam>) -> ApiResult {
    let e = parse_iri(&p.iri)?;
    let detail = blocking(move || st.service.get_entity(&e)).await?;
    Ok(Json(json!(detail)))
}

#[derive(Deserialize)]
struct FieldBody {
    property: String,
    value: Value,
}

#[derive(Deserialize)]
struct CreateBody {
    class: String,
    #[serde(default)]
    fields: Vec<FieldBody>,
    source: Option<String>,
}

/// A field value is a term, or `{"class": ..., "fields": [...]}` for a
/// nested new entity.
fn field_values(fields: &[FieldBody]) -> Result<Vec<(NamedNode, FieldValue)>, ApiError> {
    fields
        .iter()
        .map(|f| {
            let p = parse_iri(&f.property)?;
            let v = match f.value.get("class") {
                Some(Value::String(class)) => {
                    let nested: Vec<FieldBody> = match f.value.get("fields") {
                        Some(v) => serde_json::from_value(v.clone()).map_err(bad_request)?,
                        None => Vec::new(),
                    };
                    FieldValue::New(NewEntity {
                        class: parse_iri(class)?,
                        fields: field_values(&nested)?,
                    })
                }
                _ => FieldValue::Term(parse_term(&f.value)?),
            };
            Ok((p, v))
        })
        .collect()
}

async fn create(State(st): State<AppState>, headers: HeaderMap, Json(body): Json<CreateBody>) -> Result<(StatusCode, Json<Value>), ApiError> {
    let req = CreateRequest {
        agent: agent(&st, &headers)?,
        class: parse_iri(&body.class)?,
        fields: field_values(&body.fields)?,
        source: body.source.as_deref().map(parse_iri).transpose()?,
    };
    let created = blocking(move || st.service.create_entity(&req)).await?;
    let snapshots: Vec<Value> = created.iter().map(|(_, s)| snapshot_json(s)).collect();
    Ok((StatusCode::CREATED, Json(json!({"entity": created[0].0, "snapshots": snapshots}))))
}

#[derive(Deserialize)]
struct EditBody {
    iri: String,
    expected_head: u64,
    #[serde(default)]
    additions: Vec<FieldBody>,
    #[serde(default)]
    removals: Vec<FieldBody>,
    primary_source: Option<String>,
}

fn pairs(fields: &[FieldBody]) -> Result<Vec<(NamedNode, Term)>, ApiError> {
    fields.iter().map(|f| Ok((parse_iri(&f.property)?, parse_term(&f.value)?))).collect()
}

async fn edit(State(st): State<AppState>, headers: HeaderMap, Json(body): Json<EditBody>) -> ApiResult {
    let req = EditRequest {
        entity: parse_iri(&body.iri)?,
        expected_head: body.expected_head,
        additions: pairs(&body.additions)?,
        removals: pairs(&body.removals)?,
        agent: agent(&st, &headers)?,
        primary_source: body.primary_source.as_deref().map(parse_iri).transpose()?,
    };
    let snap = blocking(move || st.service.apply_edit(&req)).await?;
    Ok(Json(snapshot_json(&snap)))
}

async fn delete(State(st): State<AppState>, headers: HeaderMap, Query(p): Query<IriParam>) -> ApiResult {
    let who = agent(&st, &headers)?;
    let e = parse_iri(&p.iri)?;
    let snap = blocking(move || st.service.delete_entity(&e, &who)).await?;
    Ok(Json(snapshot_json(&snap)))
}

async fn history(State(st): State<AppState>, Query(p): Query<IriParam>) -> ApiResult {
    let e = parse_iri(&p.iri)?;
    let h = blocking(move || st.service.get_history(&e)).await?;
    Ok(Json(json!(h)))
}

#[derive(Deserialize)]
struct VersionParams {
    iri: String,
    snapshot: u64,
}

async fn version(State(st): State<AppState>, Query(p): Query<VersionParams>) -> ApiResult {
    let e = parse_iri(&p.iri)?;
    let v = blocking(move || st.service.get_version(&e, p.snapshot)).await?;
    let quads: Vec<Value> = v
        .quads
        .iter()
        .map(|q| {
            json!({
                "subject": term_to_json(&Term::from(q.subject.clone())),
                "property": q.predicate,
                "value": term_to_json(&q.object),
                "graph": q.graph,
            })
        })
        .collect();
    Ok(Json(json!({"entity": v.entity, "snapshot": snapshot_json(&v.snapshot_meta), "quads": quads})))
}

#[derive(Deserialize)]
struct RestoreBody {
    iri: String,
    snapshot: u64,
}

async fn restore(State(st): State<AppState>, headers: HeaderMap, Json(body): Json<RestoreBody>) -> ApiResult {
    let who = agent(&st, &headers)?;
    let e = parse_iri(&body.iri)?;
    let snap = blocking(move || st.service.restore_version(&e, body.snapshot, &who)).await?;
    Ok(Json(snapshot_json(&snap)))
}

#[derive(Deserialize)]
struct SearchParams {
    q: String,
    property: String,
    class: String,
}

async fn search(State(st): State<AppState>, Query(p): Query<SearchParams>) -> ApiResult {
    let property = parse_iri(&p.property)?;
    let class = parse_iri(&p.class)?;
    let found = blocking(move || st.service.search_suggestions(&p.q, &property, &class)).await?;
    Ok(Json(json!(found)))
}

async fn vault(State(st): State<AppState>) -> ApiResult {
    let entries = blocking(move || st.service.list_vault()).await?;
    let out: Vec<Value> = entries
        .iter()
        .map(|v| {
            let quads: Vec<Value> = v
                .last_live_view
                .quads
                .iter()
                .map(|q| json!({"property": q.predicate, "value": term_to_json(&q.object)}))
                .collect();
            json!({
                "entity": v.entity,
                "deleted_at": format_timestamp(&v.deleted_at),
                "agent": v.agent,
                "restore_to": v.last_live_view.at_snapshot,
                "last_live": quads,
            })
        })
        .collect();
    Ok(Json(json!(out)))
}

#[derive(Deserialize)]
struct ClassParam {
    class: String,
}

async fn form_schema(State(st): State<AppState>, Query(p): Query<ClassParam>) -> ApiResult {
    let class = parse_iri(&p.class)?;
    let service = st.service.clone();
    let c = class.clone();
    let fields = blocking(move || Ok(service.form_for(&[c]))).await?;
    let config = &st.service.config().display;
    Ok(Json(json!({
        "class": class,
        "display_name": config.class_name(&class),
        "creatable": config.is_displayed(&class),
        "fields": fields,
    })))
}
