use serde::Serialize;

use super::{lexical_valid, PropertyConstraint, ShapeSchema};
use crate::rdf::vocab::rdf;
use crate::rdf::{EntityGraph, NamedNode, Subject, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    MinCount,
    MaxCount,
    Datatype,
    Pattern,
    Class,
    Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub entity: NamedNode,
    pub path: NamedNode,
    pub kind: ViolationKind,
    pub message: String,
    pub offending_value: Option<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub conforms: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn conforming() -> Self {
        Self {
            conforms: true,
            violations: Vec::new(),
        }
    }

    fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            conforms: violations.is_empty(),
            violations,
        }
    }
}

/// Checks the entity's own quads against one schema. Object-class checks
/// look for `rdf:type` quads of the linked node in the same graph, so callers
/// merge linked entities' types in first.
pub fn validate(entity: &EntityGraph, schema: &ShapeSchema) -> ValidationReport {
    let mut out = Vec::new();
    for c in &schema.constraints {
        check(entity, c, &mut out);
    }
    ValidationReport::from_violations(out)
}

/// Validates against every schema targeting one of the entity's types and
/// merges the reports. No matching schema conforms.
pub fn validate_with(entity: &EntityGraph, schemas: &[ShapeSchema]) -> ValidationReport {
    let types = entity.types();
    let mut out = Vec::new();
    for s in schemas.iter().filter(|s| types.contains(&s.target_class)) {
        out.extend(validate(entity, s).violations);
    }
    ValidationReport::from_violations(out)
}

fn check(entity: &EntityGraph, c: &PropertyConstraint, out: &mut Vec<Violation>) {
    let values: Vec<&Term> = entity
        .own_quads()
        .filter(|q| q.predicate == c.path)
        .map(|q| &q.object)
        .collect();
    let violation = |kind, message: String, value: Option<&Term>| Violation {
        entity: entity.entity.clone(),
        path: c.path.clone(),
        kind,
        message,
        offending_value: value.cloned(),
    };
    let template = |expected: String, found: String| format!("`{}`: expected {expected}, found {found}", c.path.as_str());
    let n = values.len() as u32;
    if let Some(min) = c.min_count {
        if n < min {
            out.push(violation(ViolationKind::MinCount, template(format!("at least {min} value(s)"), n.to_string()), None));
        }
    }
    if let Some(max) = c.max_count {
        if n > max {
            out.push(violation(ViolationKind::MaxCount, template(format!("at most {max} value(s)"), n.to_string()), None));
        }
    }
    let pattern = c.pattern.as_deref().and_then(|p| regex::Regex::new(p).ok());
    for value in values {
        if !c.datatypes.is_empty() && !datatype_ok(value, &c.datatypes) {
            let names: Vec<&str> = c.datatypes.iter().map(|d| d.as_str()).collect();
            out.push(violation(ViolationKind::Datatype, template(names.join(" or "), value.to_string()), Some(value)));
        }
        if let Some(re) = &pattern {
            if value.is_blank() || !re.is_match(value.value()) {
                let message = c
                    .pattern_message
                    .clone()
                    .unwrap_or_else(|| template(format!("a value matching {}", re.as_str()), value.to_string()));
                out.push(violation(ViolationKind::Pattern, message, Some(value)));
            }
        }
        if let Some(class) = &c.object_class {
            if !has_type(entity, value, class) {
                out.push(violation(ViolationKind::Class, template(format!("an instance of {}", class.as_str()), value.to_string()), Some(value)));
            }
        }
        if let Some(allowed) = &c.allowed_values {
            if !allowed.contains(value) {
                let names: Vec<String> = allowed.iter().map(|t| t.to_string()).collect();
                out.push(violation(ViolationKind::Value, template(format!("one of {}", names.join(", ")), value.to_string()), Some(value)));
            }
        }
    }
}

/// The literal's datatype is allowed and its lexical form is valid for it.
/// Datatypes outside the checked set are accepted on datatype match alone.
fn datatype_ok(value: &Term, allowed: &[NamedNode]) -> bool {
    let Some(lit) = value.as_literal() else { return false };
    allowed.contains(lit.datatype()) && lexical_valid(lit.value(), lit.datatype().as_str()).unwrap_or(true)
}

fn has_type(entity: &EntityGraph, value: &Term, class: &NamedNode) -> bool {
    let Some(node) = value.as_named_node() else { return false };
    let subject = Subject::NamedNode(node.clone());
    entity.quads.iter().any(|q| {
        q.subject == subject && q.predicate.as_str() == rdf::TYPE && q.object.as_named_node() == Some(class)
    })
}
