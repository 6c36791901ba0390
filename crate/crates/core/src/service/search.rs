use std::collections::BTreeMap;

use serde::Serialize;

use super::{Service, ServiceError};
use crate::display::SearchTarget;
use crate::rdf::{NamedNode, Term};
use crate::sparql::escape_literal;

pub const MAX_SUGGESTIONS: usize = 5;

const SUBJECT_VAR: &str = "qv_subject";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Suggestion {
    pub entity: NamedNode,
    /// `{label} [{compact IRI}]`
    pub display: String,
    /// 1 for the best match.
    pub score: u32,
}

struct Candidate {
    entity: NamedNode,
    value: String,
    /// Must carry the searched class to count.
    check_class: bool,
}

impl Service {
    /// Existing entities whose values for `property` contain `query`,
    /// case-insensitively. `class` is the class whose display rule
    /// configures the property. Prefix matches rank first, then shorter
    /// values, then IRIs.
    pub fn search_suggestions(&self, query: &str, property: &NamedNode, class: &NamedNode) -> Result<Vec<Suggestion>, ServiceError> {
        let Some(pd) = self.config.display.for_class(class).and_then(|r| r.property(property)) else {
            return Ok(Vec::new());
        };
        let query = query.trim();
        if !pd.supports_search || (query.chars().count() as u32) < pd.min_chars_for_search {
            return Ok(Vec::new());
        }
        let needle = query.to_lowercase();
        let filter = format!("FILTER(isLiteral(?v) && CONTAINS(LCASE(STR(?v)), \"{}\"))", escape_literal(&needle));
        let mut candidates = Vec::new();
        match &pd.fetch_value_from_query {
            Some(t) => {
                let Some(open) = t.open(SUBJECT_VAR) else {
                    tracing::warn!("value query for {property} cannot be searched");
                    return Ok(Vec::new());
                };
                let display_var = t.expected_vars.first().cloned().unwrap_or_default();
                let target_var = t.expected_vars.get(1);
                for row in &self.data.select(&open)?.rows {
                    let (Some(Term::NamedNode(s)), Some(v)) = (row.get(SUBJECT_VAR), row.get(&display_var)) else { continue };
                    let target = target_var.and_then(|tv| row.get(tv)).and_then(Term::as_named_node);
                    let (entity, check_class) = match (pd.search_target, target) {
                        (SearchTarget::Itself, Some(t)) => (t.clone(), false),
                        _ => (s.clone(), true),
                    };
                    candidates.push(Candidate { entity, value: v.value().to_owned(), check_class });
                }
            }
            None => {
                let pattern = match pd.search_target {
                    SearchTarget::Itself => format!("?s a {class} ; {property} ?v ."),
                    SearchTarget::Parent => format!("?s a {class} ; {property} ?o . ?o ?q ?v ."),
                };
                let q = format!("SELECT DISTINCT ?s ?v WHERE {{ {pattern} {filter} }}");
                for row in &self.data.select(&q)?.rows {
                    let (Some(Term::NamedNode(s)), Some(v)) = (row.get("s"), row.get("v")) else { continue };
                    candidates.push(Candidate { entity: s.clone(), value: v.value().to_owned(), check_class: false });
                }
            }
        }
        let mut best: BTreeMap<NamedNode, (bool, usize)> = BTreeMap::new();
        for c in candidates {
            let lower = c.value.to_lowercase();
            let Some(at) = lower.find(&needle) else { continue };
            let key = (at != 0, c.value.chars().count());
            if best.get(&c.entity).is_some_and(|k| *k <= key) {
                continue;
            }
            if c.check_class && !self.types_of(&c.entity)?.contains(class) {
                continue;
            }
            best.insert(c.entity, key);
        }
        let mut ranked: Vec<((bool, usize), NamedNode)> = best.into_iter().map(|(e, k)| (k, e)).collect();
        ranked.sort();
        ranked
            .into_iter()
            .take(MAX_SUGGESTIONS)
            .enumerate()
            .map(|(i, (_, entity))| {
                let display = format!("{} [{}]", self.display_of(&entity)?, self.compact(&entity));
                Ok(Suggestion { entity, display, score: i as u32 + 1 })
            })
            .collect()
    }
}
