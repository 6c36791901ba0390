//! SPARQL 1.1 Query Results JSON format.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use super::{SelectResult, SparqlError};
use crate::rdf::vocab::{rdf, xsd};
use crate::rdf::{BlankNode, Literal, NamedNode, Term};

pub const MEDIA_TYPE: &str = "application/sparql-results+json";

pub fn term_to_json(term: &Term) -> Value {
    match term {
        Term::NamedNode(n) => json!({"type": "uri", "value": n.as_str()}),
        Term::BlankNode(b) => json!({"type": "bnode", "value": b.as_str()}),
        Term::Literal(l) => {
            let mut obj = Map::new();
            obj.insert("type".into(), "literal".into());
            obj.insert("value".into(), l.value().into());
            if let Some(lang) = l.language() {
                obj.insert("xml:lang".into(), lang.into());
            } else if l.datatype().as_str() != xsd::STRING {
                obj.insert("datatype".into(), l.datatype().as_str().into());
            }
            Value::Object(obj)
        }
    }
}

pub fn to_json(result: &SelectResult) -> Value {
    let bindings: Vec<Value> = result
        .rows
        .iter()
        .map(|row| Value::Object(row.iter().map(|(k, t)| (k.clone(), term_to_json(t))).collect()))
        .collect();
    json!({
        "head": {"vars": result.variables},
        "results": {"bindings": bindings},
    })
}

fn bad(msg: impl Into<String>) -> SparqlError {
    SparqlError::Results(msg.into())
}

pub fn term_from_json(v: &Value) -> Result<Term, SparqlError> {
    let kind = v.get("type").and_then(Value::as_str).ok_or_else(|| bad("term without type"))?;
    let value = v.get("value").and_then(Value::as_str).ok_or_else(|| bad("term without value"))?;
    match kind {
        "uri" => NamedNode::new(value).map(Term::NamedNode).map_err(|e| bad(e.to_string())),
        "bnode" => BlankNode::new(value).map(Term::BlankNode).map_err(|e| bad(e.to_string())),
        "literal" | "typed-literal" => {
            if let Some(lang) = v.get("xml:lang").and_then(Value::as_str) {
                return Literal::new_language_tagged(value, lang)
                    .map(Term::Literal)
                    .map_err(|e| bad(e.to_string()));
            }
            match v.get("datatype").and_then(Value::as_str) {
                Some(dt) if dt != rdf::LANG_STRING => {
                    let dt = NamedNode::new(dt).map_err(|e| bad(e.to_string()))?;
                    Ok(Term::Literal(Literal::new_typed(value, dt)))
                }
                _ => Ok(Term::Literal(Literal::new_simple(value))),
            }
        }
        other => Err(bad(format!("unknown term type `{other}`"))),
    }
}

pub fn from_json(text: &str) -> Result<SelectResult, SparqlError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let variables = doc
        .pointer("/head/vars")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing head.vars"))?
        .iter()
        .map(|v| v.as_str().map(str::to_owned).ok_or_else(|| bad("non-string variable")))
        .collect::<Result<Vec<_>, _>>()?;
    let bindings = doc
        .pointer("/results/bindings")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing results.bindings"))?;
    let mut rows = Vec::with_capacity(bindings.len());
    for b in bindings {
        let obj = b.as_object().ok_or_else(|| bad("binding is not an object"))?;
        let mut row = BTreeMap::new();
        for (k, v) in obj {
            row.insert(k.clone(), term_from_json(v)?);
        }
        rows.push(row);
    }
    Ok(SelectResult { variables, rows })
}
