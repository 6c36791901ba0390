//! A SHACL subset: node shapes with property constraints, validation
//! reports, and form schemas derived from shapes.

mod form;
mod lexical;
mod validate;

use std::collections::BTreeMap;

use crate::rdf::vocab::{rdf, sh};
use crate::rdf::{parse_turtle, NamedNode, QuadSet, Subject, SyntaxError, Term};

pub use form::{compile_form, compile_form_with, DatatypeOption, FormField, Widget};
pub use lexical::{lexical_valid, SUPPORTED as SUPPORTED_DATATYPES};
pub use validate::{validate, validate_with, ValidationReport, Violation, ViolationKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ShaclError {
    #[error("node shape {0} has no sh:targetClass")]
    MissingTargetClass(String),
    #[error("unsupported datatype {0}")]
    UnsupportedDatatype(String),
    #[error("invalid pattern on {path}: {error}")]
    InvalidPattern { path: NamedNode, error: String },
    #[error("invalid constraint in {shape}: {reason}")]
    InvalidConstraint { shape: String, reason: String },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyConstraint {
    pub path: NamedNode,
    /// `sh:name`, used as the form label.
    pub name: Option<String>,
    pub datatypes: Vec<NamedNode>,
    pub min_count: Option<u32>,
    pub max_count: Option<u32>,
    pub pattern: Option<String>,
    pub pattern_message: Option<String>,
    pub object_class: Option<NamedNode>,
    pub allowed_values: Option<Vec<Term>>,
}

impl PropertyConstraint {
    pub fn new(path: NamedNode) -> Self {
        Self {
            path,
            name: None,
            datatypes: Vec::new(),
            min_count: None,
            max_count: None,
            pattern: None,
            pattern_message: None,
            object_class: None,
            allowed_values: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeSchema {
    pub target_class: NamedNode,
    pub constraints: Vec<PropertyConstraint>,
}

/// A constraint component that was skipped while loading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeWarning {
    pub shape: String,
    pub component: NamedNode,
}

impl std::fmt::Display for ShapeWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: unsupported component {} skipped", self.shape, self.component)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Shapes {
    pub schemas: Vec<ShapeSchema>,
    pub warnings: Vec<ShapeWarning>,
}

impl Shapes {
    /// Schemas whose target class is among `types`.
    pub fn matching<'a>(&'a self, types: &'a [NamedNode]) -> impl Iterator<Item = &'a ShapeSchema> + 'a {
        self.schemas.iter().filter(move |s| types.contains(&s.target_class))
    }

    pub fn for_class(&self, class: &NamedNode) -> Option<&ShapeSchema> {
        self.schemas.iter().find(|s| s.target_class == *class)
    }
}

/// One schema per target class; unsupported components are logged and skipped.
pub fn parse_shapes(shape_quads: &QuadSet) -> Result<Vec<ShapeSchema>, ShaclError> {
    let shapes = parse_shapes_report(shape_quads)?;
    for w in &shapes.warnings {
        tracing::warn!("{w}");
    }
    Ok(shapes.schemas)
}

/// Reads a Turtle shapes file.
pub fn load_shapes_turtle(text: &str) -> Result<Shapes, ShaclError> {
    parse_shapes_report(&parse_turtle(text, None)?)
}

type Props = BTreeMap<Subject, Vec<(NamedNode, Term)>>;

const NODE_KEYS: [&str; 5] = [rdf::TYPE, sh::TARGET_CLASS, sh::PROPERTY, sh::NAME, sh::DESCRIPTION];
const PROPERTY_KEYS: [&str; 14] = [
    rdf::TYPE,
    sh::PATH,
    sh::DATATYPE,
    sh::OR,
    sh::MIN_COUNT,
    sh::MAX_COUNT,
    sh::PATTERN,
    sh::MESSAGE,
    sh::CLASS,
    sh::IN,
    sh::NAME,
    sh::DESCRIPTION,
    sh::ORDER,
    "http://www.w3.org/ns/shacl#flags",
];

/// Like [`parse_shapes`], returning the skipped components instead of logging.
pub fn parse_shapes_report(shape_quads: &QuadSet) -> Result<Shapes, ShaclError> {
    let mut props: Props = BTreeMap::new();
    for q in shape_quads {
        props.entry(q.subject.clone()).or_default().push((q.predicate.clone(), q.object.clone()));
    }
    let mut out = Shapes::default();
    let mut by_class: BTreeMap<NamedNode, Vec<(Option<String>, PropertyConstraint)>> = BTreeMap::new();
    for (shape, values) in &props {
        let is_node_shape = values
            .iter()
            .any(|(p, o)| p.as_str() == rdf::TYPE && o.as_named_node().is_some_and(|c| c.as_str() == sh::NODE_SHAPE));
        if !is_node_shape {
            continue;
        }
        let label = shape.to_string();
        let targets: Vec<NamedNode> = objects(values, sh::TARGET_CLASS).filter_map(|o| o.as_named_node().cloned()).collect();
        if targets.is_empty() {
            return Err(ShaclError::MissingTargetClass(label));
        }
        warn_unknown(&mut out.warnings, &label, values, &NODE_KEYS);
        let mut constraints = Vec::new();
        for p in objects(values, sh::PROPERTY) {
            let Ok(subject) = Subject::try_from(p.clone()) else { continue };
            let empty = Vec::new();
            let pv = props.get(&subject).unwrap_or(&empty);
            if let Some(c) = property(&props, &subject, pv, &mut out.warnings)? {
                constraints.push(c);
            }
        }
        for class in targets {
            by_class.entry(class).or_default().extend(constraints.iter().cloned());
        }
    }
    for (class, mut constraints) in by_class {
        constraints.sort_by(|(a, ca), (b, cb)| order_key(a).total_cmp(&order_key(b)).then_with(|| ca.path.cmp(&cb.path)));
        let mut kept: Vec<PropertyConstraint> = Vec::new();
        for (_, c) in constraints {
            let dup = kept
                .iter()
                .any(|k| k.path == c.path && k.object_class == c.object_class && k.datatypes == c.datatypes);
            if !dup {
                kept.push(c);
            }
        }
        out.schemas.push(ShapeSchema {
            target_class: class,
            constraints: kept,
        });
    }
    Ok(out)
}

fn order_key(order: &Option<String>) -> f64 {
    order.as_deref().and_then(|o| o.parse().ok()).unwrap_or(f64::INFINITY)
}

fn objects<'a>(values: &'a [(NamedNode, Term)], predicate: &'a str) -> impl Iterator<Item = &'a Term> + 'a {
    values.iter().filter(move |(p, _)| p.as_str() == predicate).map(|(_, o)| o)
}

fn warn_unknown(warnings: &mut Vec<ShapeWarning>, shape: &str, values: &[(NamedNode, Term)], known: &[&str]) {
    for (p, _) in values {
        if !known.contains(&p.as_str()) && !warnings.iter().any(|w| w.shape == shape && w.component == *p) {
            warnings.push(ShapeWarning {
                shape: shape.to_owned(),
                component: p.clone(),
            });
        }
    }
}

fn rdf_list(props: &Props, head: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    let mut node = head.clone();
    while let Ok(subject) = Subject::try_from(node.clone()) {
        let Some(values) = props.get(&subject) else { break };
        out.extend(objects(values, rdf::FIRST).next().cloned());
        match objects(values, rdf::REST).next() {
            Some(next) if next.as_named_node().is_none_or(|n| n.as_str() != rdf::NIL) => node = next.clone(),
            _ => break,
        }
    }
    out
}

fn count(shape: &str, term: &Term, what: &str, positive: bool) -> Result<u32, ShaclError> {
    let n: Option<u32> = term.as_literal().and_then(|l| l.value().parse().ok());
    match n {
        Some(n) if !positive || n > 0 => Ok(n),
        _ => Err(ShaclError::InvalidConstraint {
            shape: shape.to_owned(),
            reason: format!("{what} must be a {} integer, found {term}", if positive { "positive" } else { "non-negative" }),
        }),
    }
}

fn property(
    props: &Props,
    subject: &Subject,
    values: &[(NamedNode, Term)],
    warnings: &mut Vec<ShapeWarning>,
) -> Result<Option<(Option<String>, PropertyConstraint)>, ShaclError> {
    let label = subject.to_string();
    warn_unknown(warnings, &label, values, &PROPERTY_KEYS);
    let Some(path) = objects(values, sh::PATH).next() else {
        return Err(ShaclError::InvalidConstraint {
            shape: label,
            reason: "property shape without sh:path".into(),
        });
    };
    let Some(path) = path.as_named_node().cloned() else {
        warnings.push(ShapeWarning {
            shape: label,
            component: NamedNode::new_unchecked(sh::PATH),
        });
        return Ok(None);
    };
    let mut c = PropertyConstraint::new(path);
    let literal = |key: &str| objects(values, key).next().and_then(|o| o.as_literal()).map(|l| l.value().to_owned());
    c.name = literal(sh::NAME);
    c.pattern = literal(sh::PATTERN);
    c.pattern_message = literal(sh::MESSAGE);
    let order = literal(sh::ORDER);
    c.datatypes = objects(values, sh::DATATYPE).filter_map(|o| o.as_named_node().cloned()).collect();
    for list in objects(values, sh::OR) {
        for member in rdf_list(props, list) {
            let member_values = Subject::try_from(member).ok().and_then(|s| props.get(&s));
            let dts: Vec<NamedNode> = member_values
                .map(|v| objects(v, sh::DATATYPE).filter_map(|o| o.as_named_node().cloned()).collect())
                .unwrap_or_default();
            if dts.is_empty() {
                warnings.push(ShapeWarning {
                    shape: label.clone(),
                    component: NamedNode::new_unchecked(sh::OR),
                });
            }
            c.datatypes.extend(dts);
        }
    }
    c.object_class = objects(values, sh::CLASS).next().and_then(|o| o.as_named_node().cloned());
    if let Some(n) = objects(values, sh::MIN_COUNT).next() {
        c.min_count = Some(count(&label, n, "sh:minCount", false)?);
    }
    if let Some(n) = objects(values, sh::MAX_COUNT).next() {
        c.max_count = Some(count(&label, n, "sh:maxCount", true)?);
    }
    if let Some(list) = objects(values, sh::IN).next() {
        c.allowed_values = Some(rdf_list(props, list));
    }
    if let (Some(min), Some(max)) = (c.min_count, c.max_count) {
        if min > max {
            return Err(ShaclError::InvalidConstraint {
                shape: label,
                reason: format!("sh:minCount {min} exceeds sh:maxCount {max}"),
            });
        }
    }
    if !c.datatypes.is_empty() && c.object_class.is_some() {
        return Err(ShaclError::InvalidConstraint {
            shape: label,
            reason: "sh:datatype and sh:class are mutually exclusive".into(),
        });
    }
    if let Some(p) = &c.pattern {
        if let Err(e) = regex::Regex::new(p) {
            return Err(ShaclError::InvalidPattern {
                path: c.path.clone(),
                error: e.to_string(),
            });
        }
    }
    Ok(Some((order, c)))
}
