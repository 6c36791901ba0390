//! YAML display rules: class labels and priorities, human-readable entity
//! labels from query templates, per-property display and search settings.

mod template;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_yaml::Value;

use crate::rdf::vocab::rdf;
use crate::rdf::{NamedNode, Term};
use crate::sparql::StoreHandle;

pub use template::{substitute, QueryTemplate};

pub const DEFAULT_MIN_CHARS: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("malformed YAML: {0}")]
    Yaml(String),
    #[error("duplicate rule for {class} with priority {priority}")]
    Duplicate { class: NamedNode, priority: i64 },
    #[error("template for {owner} does not parse: {error}")]
    Template { owner: String, error: String },
    #[error("invalid value in rule for {owner}: {reason}")]
    Invalid { owner: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchTarget {
    #[serde(rename = "self")]
    Itself,
    Parent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputType {
    Textarea,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyDisplay {
    pub property: NamedNode,
    pub display_name: String,
    pub should_be_displayed: bool,
    pub supports_search: bool,
    pub min_chars_for_search: u32,
    pub search_target: SearchTarget,
    pub input_type: Option<InputType>,
    pub fetch_value_from_query: Option<QueryTemplate>,
}

impl PropertyDisplay {
    /// Defaults for a property with no configuration.
    pub fn fallback(property: NamedNode) -> Self {
        Self {
            display_name: property.as_str().to_owned(),
            property,
            should_be_displayed: true,
            supports_search: false,
            min_chars_for_search: DEFAULT_MIN_CHARS,
            search_target: SearchTarget::Itself,
            input_type: None,
            fetch_value_from_query: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisplayRule {
    pub class: NamedNode,
    pub priority: i64,
    pub should_be_displayed: bool,
    pub display_name: String,
    pub fetch_uri_display: Option<QueryTemplate>,
    pub display_properties: Vec<PropertyDisplay>,
    /// Displayed properties expected to hold literals: not `rdf:type` and
    /// not rendered through a query.
    pub sort_keys: Vec<NamedNode>,
}

impl DisplayRule {
    pub fn property(&self, property: &NamedNode) -> Option<&PropertyDisplay> {
        self.display_properties.iter().find(|p| p.property == *property)
    }
}

/// Parsed rules plus the unknown keys that were ignored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DisplayConfig {
    pub rules: Vec<DisplayRule>,
    pub warnings: Vec<String>,
}

impl DisplayConfig {
    /// The lowest-priority rule declared for exactly this class.
    pub fn for_class(&self, class: &NamedNode) -> Option<&DisplayRule> {
        self.rules
            .iter()
            .filter(|r| r.class == *class)
            .min_by_key(|r| r.priority)
    }

    pub fn resolve(&self, types: &[NamedNode]) -> Option<&DisplayRule> {
        resolve_rule(types, &self.rules)
    }

    /// Configured label, or the class IRI's local name.
    pub fn class_name(&self, class: &NamedNode) -> String {
        self.for_class(class)
            .map(|r| r.display_name.clone())
            .unwrap_or_else(|| class.local_name().to_owned())
    }

    /// False only when a rule hides the class.
    pub fn is_displayed(&self, class: &NamedNode) -> bool {
        self.for_class(class).is_none_or(|r| r.should_be_displayed)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawRule {
    class: String,
    #[serde(default)]
    priority: i64,
    #[serde(default = "yes")]
    should_be_displayed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    display_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fetch_uri_display: Option<String>,
    #[serde(default)]
    display_properties: Vec<RawProperty>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawProperty {
    property: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    display_name: Option<String>,
    #[serde(default = "yes")]
    should_be_displayed: bool,
    #[serde(default)]
    supports_search: bool,
    #[serde(default = "default_min_chars")]
    min_chars_for_search: u32,
    #[serde(default = "default_target")]
    search_target: SearchTarget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_type: Option<InputType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fetch_value_from_query: Option<String>,
}

fn yes() -> bool {
    true
}

fn default_min_chars() -> u32 {
    DEFAULT_MIN_CHARS
}

fn default_target() -> SearchTarget {
    SearchTarget::Itself
}

const RULE_KEYS: [&str; 6] = ["class", "priority", "shouldBeDisplayed", "displayName", "fetchUriDisplay", "displayProperties"];
const PROPERTY_KEYS: [&str; 8] = [
    "property",
    "displayName",
    "shouldBeDisplayed",
    "supportsSearch",
    "minCharsForSearch",
    "searchTarget",
    "inputType",
    "fetchValueFromQuery",
];

fn unknown_keys(value: &Value, known: &[&str], owner: &str, warnings: &mut Vec<String>) {
    if let Value::Mapping(map) = value {
        for key in map.keys() {
            let name = key.as_str().unwrap_or("?");
            if !known.contains(&name) {
                warnings.push(format!("{owner}: unknown key `{name}` ignored"));
            }
        }
    }
}

fn iri(text: &str, owner: &str) -> Result<NamedNode, ConfigError> {
    NamedNode::new(text).map_err(|e| ConfigError::Invalid {
        owner: owner.to_owned(),
        reason: e.to_string(),
    })
}

fn template(text: Option<String>, owner: &str) -> Result<Option<QueryTemplate>, ConfigError> {
    text.map(|t| {
        QueryTemplate::parse(&t).map_err(|error| ConfigError::Template {
            owner: owner.to_owned(),
            error,
        })
    })
    .transpose()
}

/// Parses a YAML list of rules. An empty document has no rules.
pub fn parse_config(yaml_text: &str) -> Result<DisplayConfig, ConfigError> {
    let value: Value = serde_yaml::from_str(yaml_text).map_err(|e| ConfigError::Yaml(e.to_string()))?;
    let mut config = DisplayConfig::default();
    if value.is_null() {
        return Ok(config);
    }
    let Value::Sequence(items) = &value else {
        return Err(ConfigError::Yaml("top level must be a list of rules".into()));
    };
    let mut seen = BTreeSet::new();
    for (i, item) in items.iter().enumerate() {
        let owner = item.get("class").and_then(Value::as_str).map_or_else(|| format!("rule {i}"), str::to_owned);
        unknown_keys(item, &RULE_KEYS, &owner, &mut config.warnings);
        if let Some(Value::Sequence(props)) = item.get("displayProperties") {
            for p in props {
                let name = p.get("property").and_then(Value::as_str).unwrap_or("?");
                unknown_keys(p, &PROPERTY_KEYS, &format!("{owner} / {name}"), &mut config.warnings);
            }
        }
        let raw: RawRule = serde_yaml::from_value(item.clone()).map_err(|e| ConfigError::Yaml(format!("{owner}: {e}")))?;
        let rule = build_rule(raw)?;
        if !seen.insert((rule.class.clone(), rule.priority)) {
            return Err(ConfigError::Duplicate {
                class: rule.class,
                priority: rule.priority,
            });
        }
        config.rules.push(rule);
    }
    for w in &config.warnings {
        tracing::warn!("{w}");
    }
    Ok(config)
}

fn build_rule(raw: RawRule) -> Result<DisplayRule, ConfigError> {
    let class = iri(&raw.class, &raw.class)?;
    let owner = raw.class.clone();
    let mut display_properties = Vec::new();
    for p in raw.display_properties {
        let prop_owner = format!("{owner} / {}", p.property);
        let property = iri(&p.property, &prop_owner)?;
        if p.min_chars_for_search == 0 {
            return Err(ConfigError::Invalid {
                owner: prop_owner,
                reason: "minCharsForSearch must be at least 1".into(),
            });
        }
        display_properties.push(PropertyDisplay {
            display_name: non_empty(p.display_name).unwrap_or_else(|| property.local_name().to_owned()),
            property,
            should_be_displayed: p.should_be_displayed,
            supports_search: p.supports_search,
            min_chars_for_search: p.min_chars_for_search,
            search_target: p.search_target,
            input_type: p.input_type,
            fetch_value_from_query: template(p.fetch_value_from_query, &prop_owner)?,
        });
    }
    let sort_keys = display_properties
        .iter()
        .filter(|p| p.should_be_displayed && p.property.as_str() != rdf::TYPE && p.fetch_value_from_query.is_none())
        .map(|p| p.property.clone())
        .collect();
    Ok(DisplayRule {
        display_name: non_empty(raw.display_name).unwrap_or_else(|| class.local_name().to_owned()),
        class,
        priority: raw.priority,
        should_be_displayed: raw.should_be_displayed,
        fetch_uri_display: template(raw.fetch_uri_display, &owner)?,
        display_properties,
        sort_keys,
    })
}

fn non_empty(s: Option<String>) -> Option<String> {
    s.filter(|s| !s.is_empty())
}

/// Writes rules back as YAML; [`parse_config`] reads the same rules.
pub fn serialize_config(rules: &[DisplayRule]) -> String {
    let raw: Vec<RawRule> = rules
        .iter()
        .map(|r| RawRule {
            class: r.class.as_str().to_owned(),
            priority: r.priority,
            should_be_displayed: r.should_be_displayed,
            display_name: Some(r.display_name.clone()),
            fetch_uri_display: r.fetch_uri_display.as_ref().map(|t| t.text.clone()),
            display_properties: r
                .display_properties
                .iter()
                .map(|p| RawProperty {
                    property: p.property.as_str().to_owned(),
                    display_name: Some(p.display_name.clone()),
                    should_be_displayed: p.should_be_displayed,
                    supports_search: p.supports_search,
                    min_chars_for_search: p.min_chars_for_search,
                    search_target: p.search_target,
                    input_type: p.input_type,
                    fetch_value_from_query: p.fetch_value_from_query.as_ref().map(|t| t.text.clone()),
                })
                .collect(),
        })
        .collect();
    if raw.is_empty() {
        return String::new();
    }
    serde_yaml::to_string(&raw).expect("rules serialize")
}

/// Among rules for one of `entity_types`, the one with the lowest priority.
/// Equal priorities fall back to the smaller class IRI so the result does
/// not depend on rule order.
pub fn resolve_rule<'a>(entity_types: &[NamedNode], rules: &'a [DisplayRule]) -> Option<&'a DisplayRule> {
    rules
        .iter()
        .filter(|r| entity_types.contains(&r.class))
        .min_by(|a, b| a.priority.cmp(&b.priority).then_with(|| a.class.cmp(&b.class)))
}

fn term_text(t: &Term) -> String {
    t.value().to_owned()
}

/// The entity's label from the rule's `fetchUriDisplay` query, or the raw
/// IRI when there is no query, no row, or the query fails.
pub fn render_uri_display(entity: &NamedNode, rule: &DisplayRule, store: &StoreHandle) -> String {
    let Some(t) = &rule.fetch_uri_display else {
        return entity.as_str().to_owned();
    };
    let var = if t.expected_vars.iter().any(|v| v == "display") {
        "display".to_owned()
    } else {
        t.expected_vars.first().cloned().unwrap_or_default()
    };
    match store.select(&t.fill(entity)) {
        Ok(result) => result
            .rows
            .first()
            .and_then(|row| row.get(&var))
            .map(term_text)
            .unwrap_or_else(|| entity.as_str().to_owned()),
        Err(e) => {
            tracing::warn!("display query for {entity} failed: {e}");
            entity.as_str().to_owned()
        }
    }
}

/// Rendered values of one property: `(display, link target)`. Query rows
/// map their first variable to the display and the second to the target.
pub fn render_property_values(entity: &NamedNode, pd: &PropertyDisplay, store: &StoreHandle) -> Vec<(String, Option<NamedNode>)> {
    let (query, display_var, target_var) = match &pd.fetch_value_from_query {
        Some(t) => (
            t.fill(entity),
            t.expected_vars.first().cloned().unwrap_or_default(),
            t.expected_vars.get(1).cloned(),
        ),
        None => (
            format!("SELECT DISTINCT ?o WHERE {{ {{ {entity} {p} ?o }} UNION {{ GRAPH ?g {{ {entity} {p} ?o }} }} }} ORDER BY ?o", p = pd.property),
            "o".to_owned(),
            Some("o".to_owned()),
        ),
    };
    match store.select(&query) {
        Ok(result) => result
            .rows
            .iter()
            .filter_map(|row| {
                let display = row.get(&display_var).map(term_text)?;
                let target = target_var
                    .as_ref()
                    .and_then(|v| row.get(v))
                    .and_then(Term::as_named_node)
                    .cloned();
                Some((display, target))
            })
            .collect(),
        Err(e) => {
            tracing::warn!("value query for {entity} {} failed: {e}", pd.property);
            Vec::new()
        }
    }
}

#[cfg(test)]
mod tests;
