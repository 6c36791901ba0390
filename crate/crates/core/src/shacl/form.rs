use serde::Serialize;

use super::{PropertyConstraint, ShapeSchema};
use crate::rdf::vocab::xsd;
use crate::rdf::{NamedNode, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Widget {
    Text,
    Textarea,
    DateFull,
    DateYearMonth,
    DateYear,
    Number,
    UriRef,
    NestedEntity,
    Dropdown,
}

/// One choice of a datatype dropdown and the input shown once it is picked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatatypeOption {
    pub datatype: NamedNode,
    pub widget: Widget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormField {
    pub path: NamedNode,
    pub label: String,
    pub widget: Widget,
    pub datatype_options: Vec<DatatypeOption>,
    pub min: u32,
    pub max: Option<u32>,
    pub pattern: Option<String>,
    pub pattern_message: Option<String>,
    pub required: bool,
    /// More than one value may be added.
    pub repeatable: bool,
    pub object_class: Option<NamedNode>,
    #[serde(serialize_with = "terms")]
    pub allowed_values: Vec<Term>,
}

fn terms<S: serde::Serializer>(values: &[Term], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(values.iter().map(crate::sparql::json::term_to_json))
}

fn datatype_widget(dt: &str) -> Widget {
    match dt {
        xsd::DATE => Widget::DateFull,
        xsd::G_YEAR_MONTH => Widget::DateYearMonth,
        xsd::G_YEAR => Widget::DateYear,
        xsd::ANY_URI => Widget::UriRef,
        xsd::INTEGER | xsd::DECIMAL | xsd::DOUBLE | xsd::FLOAT | xsd::LONG | xsd::INT | xsd::NON_NEGATIVE_INTEGER
        | xsd::POSITIVE_INTEGER => Widget::Number,
        _ => Widget::Text,
    }
}

/// One field per constraint.
pub fn compile_form(schema: &ShapeSchema) -> Vec<FormField> {
    compile_form_with(schema, |_| false)
}

/// As [`compile_form`]; `textarea` marks plain-text paths that get a
/// multi-line input.
pub fn compile_form_with(schema: &ShapeSchema, textarea: impl Fn(&NamedNode) -> bool) -> Vec<FormField> {
    schema.constraints.iter().map(|c| field(c, &textarea)).collect()
}

fn field(c: &PropertyConstraint, textarea: &impl Fn(&NamedNode) -> bool) -> FormField {
    let options: Vec<DatatypeOption> = c
        .datatypes
        .iter()
        .map(|d| DatatypeOption {
            datatype: d.clone(),
            widget: datatype_widget(d.as_str()),
        })
        .collect();
    let widget = if c.object_class.is_some() {
        Widget::NestedEntity
    } else if options.len() > 1 || c.allowed_values.is_some() {
        Widget::Dropdown
    } else {
        match options.first().map(|o| o.widget) {
            Some(Widget::Text) | None if textarea(&c.path) => Widget::Textarea,
            Some(w) => w,
            None => Widget::Text,
        }
    };
    let min = c.min_count.unwrap_or(0);
    FormField {
        path: c.path.clone(),
        label: c.name.clone().unwrap_or_else(|| c.path.local_name().to_owned()),
        widget,
        datatype_options: options,
        min,
        max: c.max_count,
        pattern: c.pattern.clone(),
        pattern_message: c.pattern_message.clone(),
        required: min >= 1,
        repeatable: c.max_count.is_none_or(|m| m > 1),
        object_class: c.object_class.clone(),
        allowed_values: c.allowed_values.clone().unwrap_or_default(),
    }
}
