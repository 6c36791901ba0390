//! Expression evaluation. `None` stands for a SPARQL evaluation error or an
//! unbound value.

use std::cmp::Ordering;
use std::sync::Arc;

use chrono::{DateTime, Datelike, FixedOffset, NaiveDate, Timelike};
use spargebra::algebra::{Expression, Function};

use super::eval::{get, Evaluator, Solution};
use super::memory::GraphSel;
use crate::rdf::vocab::{rdf, xsd};
use crate::rdf::{Literal, NamedNode, Term};

pub(crate) type Value = Option<Arc<Term>>;

const INTEGER_TYPES: &[&str] = &[
    xsd::INTEGER,
    xsd::LONG,
    xsd::INT,
    xsd::NON_NEGATIVE_INTEGER,
    xsd::POSITIVE_INTEGER,
    "http://www.w3.org/2001/XMLSchema#short",
    "http://www.w3.org/2001/XMLSchema#byte",
    "http://www.w3.org/2001/XMLSchema#negativeInteger",
    "http://www.w3.org/2001/XMLSchema#nonPositiveInteger",
    "http://www.w3.org/2001/XMLSchema#unsignedLong",
    "http://www.w3.org/2001/XMLSchema#unsignedInt",
    "http://www.w3.org/2001/XMLSchema#unsignedShort",
    "http://www.w3.org/2001/XMLSchema#unsignedByte",
];

#[derive(Clone, Copy, Debug)]
pub(crate) enum Num {
    Int(i64),
    Dec(f64),
    Dbl(f64),
}

impl Num {
    fn f64(self) -> f64 {
        match self {
            Num::Int(i) => i as f64,
            Num::Dec(f) | Num::Dbl(f) => f,
        }
    }

    fn rank(self) -> u8 {
        match self {
            Num::Int(_) => 0,
            Num::Dec(_) => 1,
            Num::Dbl(_) => 2,
        }
    }

    fn term(self) -> Arc<Term> {
        match self {
            Num::Int(i) => integer(i),
            Num::Dec(f) => typed(format_decimal(f), xsd::DECIMAL),
            Num::Dbl(f) => typed(format_double(f), xsd::DOUBLE),
        }
    }
}

fn format_decimal(f: f64) -> String {
    let s = format!("{f}");
    if s.contains('.') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

fn format_double(f: f64) -> String {
    if f.is_nan() {
        "NaN".into()
    } else if f.is_infinite() {
        if f > 0.0 { "INF".into() } else { "-INF".into() }
    } else {
        format!("{f:E}")
    }
}

pub(crate) fn integer(i: i64) -> Arc<Term> {
    typed(i.to_string(), xsd::INTEGER)
}

fn typed(lexical: impl Into<String>, datatype: &str) -> Arc<Term> {
    Arc::new(Term::Literal(Literal::new_typed(lexical, NamedNode::new_unchecked(datatype))))
}

fn boolean(b: bool) -> Arc<Term> {
    typed(if b { "true" } else { "false" }, xsd::BOOLEAN)
}

fn simple(s: impl Into<String>) -> Arc<Term> {
    Arc::new(Term::Literal(Literal::new_simple(s)))
}

/// String result carrying over the language tag of `like`, if any.
fn string_like(s: impl Into<String>, like: &Literal) -> Arc<Term> {
    match like.language() {
        Some(lang) => Arc::new(Term::Literal(
            Literal::new_language_tagged(s, lang).expect("tag already validated"),
        )),
        None => simple(s),
    }
}

pub(crate) fn numeric(t: &Term) -> Option<Num> {
    let l = t.as_literal()?;
    let dt = l.datatype().as_str();
    let v = l.value().trim();
    if INTEGER_TYPES.contains(&dt) {
        v.strip_prefix('+').unwrap_or(v).parse().ok().map(Num::Int)
    } else if dt == xsd::DECIMAL {
        if v.contains(['e', 'E']) {
            return None;
        }
        v.parse().ok().map(Num::Dec)
    } else if dt == xsd::DOUBLE || dt == xsd::FLOAT {
        match v {
            "INF" | "+INF" => Some(Num::Dbl(f64::INFINITY)),
            "-INF" => Some(Num::Dbl(f64::NEG_INFINITY)),
            "NaN" => Some(Num::Dbl(f64::NAN)),
            _ => v.parse().ok().map(Num::Dbl),
        }
    } else {
        None
    }
}

fn is_string(l: &Literal) -> bool {
    l.datatype().as_str() == xsd::STRING
}

pub(crate) fn is_string_term(t: &Term) -> bool {
    string_literal(t).is_some()
}

/// Simple literal, `xsd:string` or language-tagged string.
fn string_literal(t: &Term) -> Option<&Literal> {
    let l = t.as_literal()?;
    (is_string(l) || l.language().is_some()).then_some(l)
}

fn date_time(t: &Term) -> Option<DateTime<FixedOffset>> {
    let l = t.as_literal()?;
    match l.datatype().as_str() {
        xsd::DATE_TIME => {
            let v = l.value();
            DateTime::parse_from_rfc3339(v)
                .ok()
                .or_else(|| DateTime::parse_from_rfc3339(&format!("{v}Z")).ok())
        }
        xsd::DATE => {
            let d = NaiveDate::parse_from_str(l.value().get(..10)?, "%Y-%m-%d").ok()?;
            Some(d.and_hms_opt(0, 0, 0)?.and_utc().fixed_offset())
        }
        _ => None,
    }
}

fn arith(a: Num, b: Num, op: fn(f64, f64) -> f64, int_op: fn(i64, i64) -> Option<i64>) -> Option<Num> {
    match (a, b) {
        (Num::Int(x), Num::Int(y)) => int_op(x, y).map(Num::Int),
        _ if a.rank().max(b.rank()) == 1 => Some(Num::Dec(op(a.f64(), b.f64()))),
        _ => Some(Num::Dbl(op(a.f64(), b.f64()))),
    }
}

/// Value comparison for `=`, `<` and friends; `None` when incomparable.
pub(crate) fn compare(a: &Term, b: &Term) -> Option<Ordering> {
    if let (Some(x), Some(y)) = (numeric(a), numeric(b)) {
        return x.f64().partial_cmp(&y.f64());
    }
    let (la, lb) = (a.as_literal()?, b.as_literal()?);
    if is_string(la) && is_string(lb) {
        return Some(la.value().cmp(lb.value()));
    }
    if la.language().is_some() && la.language() == lb.language() {
        return Some(la.value().cmp(lb.value()));
    }
    let (da, db) = (la.datatype().as_str(), lb.datatype().as_str());
    if da == xsd::BOOLEAN && db == xsd::BOOLEAN {
        return Some(parse_bool(la.value())?.cmp(&parse_bool(lb.value())?));
    }
    if let (Some(x), Some(y)) = (date_time(a), date_time(b)) {
        return Some(x.cmp(&y));
    }
    if da == db && (da == xsd::G_YEAR || da == xsd::G_YEAR_MONTH) {
        return Some(la.value().cmp(lb.value()));
    }
    None
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

fn equals(a: &Term, b: &Term) -> Option<bool> {
    if a == b {
        return Some(true);
    }
    match (a, b) {
        (Term::Literal(la), Term::Literal(lb)) => match compare(a, b) {
            Some(o) => Some(o == Ordering::Equal),
            None if la.datatype() == lb.datatype() && la.language() == lb.language() && known_type(la) => Some(false),
            None if la.language().is_some() || lb.language().is_some() || is_string(la) || is_string(lb) => Some(false),
            None => None,
        },
        _ => Some(false),
    }
}

fn known_type(l: &Literal) -> bool {
    let dt = l.datatype().as_str();
    dt == xsd::STRING || dt == rdf::LANG_STRING || dt == xsd::BOOLEAN || INTEGER_TYPES.contains(&dt)
}

/// Total order used by ORDER BY, MIN and MAX: unbound, blank nodes, IRIs,
/// then literals.
pub(crate) fn order_cmp(a: Option<&Term>, b: Option<&Term>) -> Ordering {
    fn class(t: Option<&Term>) -> u8 {
        match t {
            None => 0,
            Some(Term::BlankNode(_)) => 1,
            Some(Term::NamedNode(_)) => 2,
            Some(Term::Literal(_)) => 3,
        }
    }
    match (a, b) {
        (Some(x), Some(y)) if class(a) == class(b) => {
            if let (Term::Literal(_), Term::Literal(_)) = (x, y) {
                if let Some(o) = compare(x, y) {
                    if o != Ordering::Equal {
                        return o;
                    }
                }
            }
            x.value().cmp(y.value()).then_with(|| x.cmp(y))
        }
        _ => class(a).cmp(&class(b)),
    }
}

pub(crate) fn sum(values: &[Arc<Term>]) -> Option<Arc<Term>> {
    let mut acc = Num::Int(0);
    for v in values {
        acc = arith(acc, numeric(v)?, |a, b| a + b, i64::checked_add)?;
    }
    Some(acc.term())
}

pub(crate) fn avg(values: &[Arc<Term>]) -> Option<Arc<Term>> {
    if values.is_empty() {
        return Some(integer(0));
    }
    let mut acc = Num::Int(0);
    for v in values {
        acc = arith(acc, numeric(v)?, |a, b| a + b, i64::checked_add)?;
    }
    let n = values.len() as f64;
    Some(match acc {
        Num::Dbl(f) => Num::Dbl(f / n),
        other => Num::Dec(other.f64() / n),
    }
    .term())
}

impl Evaluator<'_> {
    pub(crate) fn ebv(&self, e: &Expression, sol: &Solution, g: GraphSel) -> Option<bool> {
        match e {
            Expression::And(a, b) => match (self.ebv(a, sol, g), self.ebv(b, sol, g)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Expression::Or(a, b) => match (self.ebv(a, sol, g), self.ebv(b, sol, g)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
            _ => effective_boolean(&*self.value(e, sol, g)?),
        }
    }

    pub(crate) fn value(&self, e: &Expression, sol: &Solution, g: GraphSel) -> Value {
        let v = |x: &Expression| self.value(x, sol, g);
        match e {
            Expression::NamedNode(n) => Some(Arc::new(Term::NamedNode(NamedNode::new_unchecked(n.as_str())))),
            Expression::Literal(l) => Some(Arc::new(Term::Literal(super::eval::convert_literal(l)))),
            Expression::Variable(var) => get(sol, self.slot(var.as_str())).cloned(),
            Expression::Or(..) | Expression::And(..) => self.ebv(e, sol, g).map(boolean),
            Expression::Not(a) => self.ebv(a, sol, g).map(|b| boolean(!b)),
            Expression::Equal(a, b) => equals(&*v(a)?, &*v(b)?).map(boolean),
            Expression::SameTerm(a, b) => Some(boolean(v(a)? == v(b)?)),
            Expression::Greater(a, b) => cmp_op(v(a), v(b), |o| o == Ordering::Greater),
            Expression::GreaterOrEqual(a, b) => cmp_op(v(a), v(b), |o| o != Ordering::Less),
            Expression::Less(a, b) => cmp_op(v(a), v(b), |o| o == Ordering::Less),
            Expression::LessOrEqual(a, b) => cmp_op(v(a), v(b), |o| o != Ordering::Greater),
            Expression::In(a, list) => {
                let a = v(a)?;
                let mut error = false;
                for item in list {
                    match v(item).and_then(|x| equals(&a, &x)) {
                        Some(true) => return Some(boolean(true)),
                        Some(false) => {}
                        None => error = true,
                    }
                }
                if error { None } else { Some(boolean(false)) }
            }
            Expression::Add(a, b) => arith(numeric(&*v(a)?)?, numeric(&*v(b)?)?, |x, y| x + y, i64::checked_add).map(Num::term),
            Expression::Subtract(a, b) => {
                arith(numeric(&*v(a)?)?, numeric(&*v(b)?)?, |x, y| x - y, i64::checked_sub).map(Num::term)
            }
            Expression::Multiply(a, b) => {
                arith(numeric(&*v(a)?)?, numeric(&*v(b)?)?, |x, y| x * y, i64::checked_mul).map(Num::term)
            }
            Expression::Divide(a, b) => {
                let (x, y) = (numeric(&*v(a)?)?, numeric(&*v(b)?)?);
                match (x, y) {
                    (Num::Dbl(_), _) | (_, Num::Dbl(_)) => Some(Num::Dbl(x.f64() / y.f64()).term()),
                    _ if y.f64() == 0.0 => None,
                    _ => Some(Num::Dec(x.f64() / y.f64()).term()),
                }
            }
            Expression::UnaryPlus(a) => numeric(&*v(a)?).map(Num::term),
            Expression::UnaryMinus(a) => match numeric(&*v(a)?)? {
                Num::Int(i) => Some(integer(-i)),
                Num::Dec(f) => Some(Num::Dec(-f).term()),
                Num::Dbl(f) => Some(Num::Dbl(-f).term()),
            },
            Expression::Exists(p) => self.exists(p, sol, g).map(boolean),
            Expression::Bound(var) => Some(boolean(get(sol, self.slot(var.as_str())).is_some())),
            Expression::If(c, a, b) => {
                if self.ebv(c, sol, g)? {
                    v(a)
                } else {
                    v(b)
                }
            }
            Expression::Coalesce(list) => list.iter().find_map(v),
            Expression::FunctionCall(f, args) => {
                let args: Vec<Value> = args.iter().map(v).collect();
                self.call(f, args)
            }
        }
    }

    fn call(&self, f: &Function, args: Vec<Value>) -> Value {
        let arg = |i: usize| args.get(i).cloned().flatten();
        let str_arg = |i: usize| -> Option<Literal> { arg(i).and_then(|t| string_literal(&t).cloned()) };
        match f {
            Function::Str => match &*arg(0)? {
                Term::NamedNode(n) => Some(simple(n.as_str())),
                Term::Literal(l) => Some(simple(l.value())),
                Term::BlankNode(_) => None,
            },
            Function::Lang => Some(simple(arg(0)?.as_literal()?.language().unwrap_or(""))),
            Function::LangMatches => {
                let tag = arg(0)?.as_literal()?.value().to_ascii_lowercase();
                let range = arg(1)?.as_literal()?.value().to_ascii_lowercase();
                let ok = if range == "*" {
                    !tag.is_empty()
                } else {
                    tag == range || tag.starts_with(&format!("{range}-"))
                };
                Some(boolean(ok))
            }
            Function::Datatype => Some(Arc::new(Term::NamedNode(arg(0)?.as_literal()?.datatype().clone()))),
            Function::Iri => match &*arg(0)? {
                t @ Term::NamedNode(_) => Some(Arc::new(t.clone())),
                Term::Literal(l) => NamedNode::new(l.value()).ok().map(|n| Arc::new(Term::NamedNode(n))),
                Term::BlankNode(_) => None,
            },
            Function::Abs => unary_num(arg(0)?, f64::abs, i64::checked_abs),
            Function::Ceil => unary_num(arg(0)?, f64::ceil, Some),
            Function::Floor => unary_num(arg(0)?, f64::floor, Some),
            Function::Round => unary_num(arg(0)?, |x| (x + 0.5).floor(), Some),
            Function::Concat => {
                let parts: Option<Vec<Literal>> = (0..args.len()).map(str_arg).collect();
                let parts = parts?;
                let joined: String = parts.iter().map(Literal::value).collect();
                let lang = parts.first().and_then(|p| p.language());
                if lang.is_some() && parts.iter().all(|p| p.language() == lang) {
                    Some(string_like(joined, &parts[0]))
                } else {
                    Some(simple(joined))
                }
            }
            Function::SubStr => {
                let s = str_arg(0)?;
                let start = numeric(&*arg(1)?)?.f64().round() as i64;
                let chars: Vec<char> = s.value().chars().collect();
                let end = match arg(2) {
                    Some(len) => start.saturating_add(numeric(&len)?.f64().round() as i64),
                    None => i64::MAX,
                };
                let from = start.max(1) as usize - 1;
                let to = (end.max(1) as usize - 1).min(chars.len());
                let out: String = if from < to { chars[from..to].iter().collect() } else { String::new() };
                Some(string_like(out, &s))
            }
            Function::StrLen => Some(integer(str_arg(0)?.value().chars().count() as i64)),
            Function::Replace => {
                let s = str_arg(0)?;
                let flags = match arg(3) {
                    Some(f) => f.as_literal()?.value().to_owned(),
                    None => String::new(),
                };
                let re = self.regex(str_arg(1)?.value(), &flags)?;
                let replacement = str_arg(2)?.value().to_owned();
                Some(string_like(re.replace_all(s.value(), replacement.as_str()), &s))
            }
            Function::UCase => {
                let s = str_arg(0)?;
                Some(string_like(s.value().to_uppercase(), &s))
            }
            Function::LCase => {
                let s = str_arg(0)?;
                Some(string_like(s.value().to_lowercase(), &s))
            }
            Function::EncodeForUri => {
                let s = str_arg(0)?;
                let mut out = String::new();
                for b in s.value().bytes() {
                    if b.is_ascii_alphanumeric() || b"-_.~".contains(&b) {
                        out.push(b as char);
                    } else {
                        out.push_str(&format!("%{b:02X}"));
                    }
                }
                Some(simple(out))
            }
            Function::Contains => Some(boolean(str_arg(0)?.value().contains(str_arg(1)?.value()))),
            Function::StrStarts => Some(boolean(str_arg(0)?.value().starts_with(str_arg(1)?.value()))),
            Function::StrEnds => Some(boolean(str_arg(0)?.value().ends_with(str_arg(1)?.value()))),
            Function::StrBefore => {
                let s = str_arg(0)?;
                let needle = str_arg(1)?;
                Some(match s.value().find(needle.value()) {
                    Some(i) => string_like(&s.value()[..i], &s),
                    None => simple(""),
                })
            }
            Function::StrAfter => {
                let s = str_arg(0)?;
                let needle = str_arg(1)?;
                Some(match s.value().find(needle.value()) {
                    Some(i) => string_like(&s.value()[i + needle.value().len()..], &s),
                    None => simple(""),
                })
            }
            Function::Year => Some(integer(i64::from(date_time(&*arg(0)?)?.year()))),
            Function::Month => Some(integer(i64::from(date_time(&*arg(0)?)?.month()))),
            Function::Day => Some(integer(i64::from(date_time(&*arg(0)?)?.day()))),
            Function::Hours => Some(integer(i64::from(date_time(&*arg(0)?)?.hour()))),
            Function::Minutes => Some(integer(i64::from(date_time(&*arg(0)?)?.minute()))),
            Function::Seconds => {
                let d = date_time(&*arg(0)?)?;
                let secs = f64::from(d.second()) + f64::from(d.nanosecond()) / 1e9;
                Some(Num::Dec(secs).term())
            }
            Function::Now => Some(typed(
                self.now.to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
                xsd::DATE_TIME,
            )),
            Function::StrLang => {
                let s = str_arg(0)?;
                if s.language().is_some() {
                    return None;
                }
                let lang = arg(1)?.as_literal()?.value().to_owned();
                Literal::new_language_tagged(s.value(), lang).ok().map(|l| Arc::new(Term::Literal(l)))
            }
            Function::StrDt => {
                let s = str_arg(0)?;
                if s.language().is_some() {
                    return None;
                }
                let dt = arg(1)?.as_named_node()?.clone();
                Some(Arc::new(Term::Literal(Literal::new_typed(s.value(), dt))))
            }
            Function::IsIri => Some(boolean(matches!(&*arg(0)?, Term::NamedNode(_)))),
            Function::IsBlank => Some(boolean(matches!(&*arg(0)?, Term::BlankNode(_)))),
            Function::IsLiteral => Some(boolean(matches!(&*arg(0)?, Term::Literal(_)))),
            Function::IsNumeric => Some(boolean(numeric(&*arg(0)?).is_some())),
            Function::Regex => {
                let s = str_arg(0)?;
                let flags = match arg(2) {
                    Some(f) => f.as_literal()?.value().to_owned(),
                    None => String::new(),
                };
                let re = self.regex(str_arg(1)?.value(), &flags)?;
                Some(boolean(re.is_match(s.value())))
            }
            Function::Custom(name) => cast(name.as_str(), &*arg(0)?),
            _ => {
                tracing::debug!(function = %f, "unsupported function");
                None
            }
        }
    }

    fn regex(&self, pattern: &str, flags: &str) -> Option<regex::Regex> {
        let key = (pattern.to_owned(), flags.to_owned());
        if let Some(cached) = self.regex_cache.borrow().get(&key) {
            return cached.clone();
        }
        let mut builder = regex::RegexBuilder::new(pattern);
        for f in flags.chars() {
            match f {
                'i' => builder.case_insensitive(true),
                's' => builder.dot_matches_new_line(true),
                'm' => builder.multi_line(true),
                'x' => builder.ignore_whitespace(true),
                _ => return None,
            };
        }
        let compiled = builder.build().ok();
        self.regex_cache.borrow_mut().insert(key, compiled.clone());
        compiled
    }
}

fn cmp_op(a: Value, b: Value, test: fn(Ordering) -> bool) -> Value {
    compare(&*a?, &*b?).map(|o| boolean(test(o)))
}

fn unary_num(t: Arc<Term>, op: fn(f64) -> f64, int_op: fn(i64) -> Option<i64>) -> Value {
    Some(match numeric(&t)? {
        Num::Int(i) => integer(int_op(i)?),
        Num::Dec(f) => Num::Dec(op(f)).term(),
        Num::Dbl(f) => Num::Dbl(op(f)).term(),
    })
}

pub(crate) fn effective_boolean(t: &Term) -> Option<bool> {
    let l = t.as_literal()?;
    if l.datatype().as_str() == xsd::BOOLEAN {
        return parse_bool(l.value());
    }
    if let Some(n) = numeric(t) {
        let f = n.f64();
        return Some(f != 0.0 && !f.is_nan());
    }
    if is_string(l) || l.language().is_some() {
        return Some(!l.value().is_empty());
    }
    None
}

fn cast(datatype: &str, t: &Term) -> Value {
    let lexical = match t {
        Term::Literal(l) => l.value().to_owned(),
        Term::NamedNode(n) if datatype == xsd::STRING => n.as_str().to_owned(),
        _ => return None,
    };
    match datatype {
        xsd::STRING => Some(simple(lexical)),
        xsd::INTEGER => match numeric(t) {
            Some(n) => Some(integer(n.f64().trunc() as i64)),
            None => lexical.trim().parse::<i64>().ok().map(integer),
        },
        xsd::DECIMAL => match numeric(t) {
            Some(n) => Some(Num::Dec(n.f64()).term()),
            None => lexical.trim().parse::<f64>().ok().map(|f| Num::Dec(f).term()),
        },
        xsd::DOUBLE | xsd::FLOAT => match numeric(t) {
            Some(n) => Some(Num::Dbl(n.f64()).term()),
            None => lexical.trim().parse::<f64>().ok().map(|f| Num::Dbl(f).term()),
        },
        xsd::BOOLEAN => match numeric(t) {
            Some(n) => Some(boolean(n.f64() != 0.0)),
            None => parse_bool(lexical.trim()).map(boolean),
        },
        xsd::DATE_TIME | xsd::DATE | xsd::G_YEAR | xsd::G_YEAR_MONTH => Some(typed(lexical, datatype)),
        _ => None,
    }
}
