use std::collections::BTreeMap;

use super::{Delta, DeltaError};
use crate::rdf::nquads::end_position;
use crate::rdf::{Cursor, Lexer, NamedNode, Quad, QuadSet, Subject, SyntaxError, Term, Token};

/// Canonical SPARQL update text: `DELETE DATA { … }` then `INSERT DATA { … }`,
/// joined by ` ; `. Statements are sorted, named-graph statements are wrapped
/// in `GRAPH <g> { … }`. The empty delta yields the empty string.
pub fn to_update_text(delta: &Delta) -> String {
    let mut blocks = Vec::new();
    if !delta.deletions.is_empty() {
        blocks.push(format!("DELETE DATA {{ {}}}", data_block(&delta.deletions)));
    }
    if !delta.insertions.is_empty() {
        blocks.push(format!("INSERT DATA {{ {}}}", data_block(&delta.insertions)));
    }
    blocks.join(" ; ")
}

type Keyed<'a> = (&'a Quad, (String, String, String, String));

fn data_block(quads: &QuadSet) -> String {
    let mut by_graph: BTreeMap<String, Vec<Keyed>> = BTreeMap::new();
    for q in quads {
        let key = q.canonical_key();
        by_graph.entry(key.0.clone()).or_default().push((q, key));
    }
    let mut out = String::new();
    for (graph, mut statements) in by_graph {
        statements.sort_by(|a, b| a.1.cmp(&b.1));
        if !graph.is_empty() {
            out.push_str(&format!("GRAPH {graph} {{ "));
        }
        for (q, _) in statements {
            out.push_str(&q.triple_statement());
            out.push(' ');
        }
        if !graph.is_empty() {
            out.push_str("} ");
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Operation {
    Insert,
    Delete,
}

/// Parses any sequence of `INSERT DATA` / `DELETE DATA` operations (with
/// optional `PREFIX`/`BASE` prologues and `GRAPH` blocks) into one delta.
pub fn from_update_text(text: &str) -> Result<Delta, DeltaError> {
    let tokens = Lexer::new(text).tokenize()?;
    let mut cursor = Cursor::new(tokens, end_position(text));
    let mut insertions = QuadSet::new();
    let mut deletions = QuadSet::new();
    loop {
        prologue(&mut cursor)?;
        if cursor.at_end() {
            break;
        }
        let op = operation_header(&mut cursor)?;
        let target = match op {
            Operation::Insert => &mut insertions,
            Operation::Delete => &mut deletions,
        };
        cursor.expect_punct('{')?;
        quad_data(&mut cursor, target)?;
        if cursor.at_end() {
            break;
        }
        cursor.expect_punct(';')?;
    }
    Delta::new(insertions, deletions)
}

fn prologue(cursor: &mut Cursor) -> Result<(), SyntaxError> {
    loop {
        if cursor.eat_keyword("PREFIX") {
            let prefix = match cursor.next()? {
                (Token::PrefixedName(p, l), _) if l.is_empty() => p,
                (other, pos) => return Err(SyntaxError::new(pos, format!("expected prefix name, found {other}"))),
            };
            let ns = match cursor.next()? {
                (t @ Token::IriRef(_), pos) => cursor.iri_from_token(&t, pos)?,
                (other, pos) => return Err(SyntaxError::new(pos, format!("expected IRI, found {other}"))),
            };
            cursor.prefixes.insert(prefix, ns.into_string());
        } else if cursor.eat_keyword("BASE") {
            let base = match cursor.next()? {
                (t @ Token::IriRef(_), pos) => cursor.iri_from_token(&t, pos)?,
                (other, pos) => return Err(SyntaxError::new(pos, format!("expected IRI, found {other}"))),
            };
            cursor.base = Some(base.into_string());
        } else {
            return Ok(());
        }
    }
}

fn operation_header(cursor: &mut Cursor) -> Result<Operation, DeltaError> {
    let op = if cursor.eat_keyword("INSERT") {
        Operation::Insert
    } else if cursor.eat_keyword("DELETE") {
        Operation::Delete
    } else {
        return Err(match cursor.peek() {
            Some(Token::Word(w)) => DeltaError::DisallowedForm(w.to_ascii_uppercase()),
            Some(other) => cursor.error(format!("expected INSERT DATA or DELETE DATA, found {other}")).into(),
            None => cursor.error("unexpected end of input").into(),
        });
    };
    if cursor.eat_keyword("DATA") {
        return Ok(op);
    }
    let verb = if op == Operation::Insert { "INSERT" } else { "DELETE" };
    Err(match cursor.peek() {
        Some(Token::Word(w)) => DeltaError::DisallowedForm(format!("{verb} {}", w.to_ascii_uppercase())),
        Some(Token::Punct('{')) => DeltaError::DisallowedForm(format!("{verb} {{ … }} WHERE")),
        _ => cursor.error(format!("expected DATA after {verb}")).into(),
    })
}

/// Reads statements up to and including the closing `}` of a data block.
fn quad_data(cursor: &mut Cursor, target: &mut QuadSet) -> Result<(), DeltaError> {
    loop {
        if cursor.eat_punct('}') {
            return Ok(());
        }
        if cursor.eat_keyword("GRAPH") {
            let graph = graph_name(cursor)?;
            cursor.expect_punct('{')?;
            while !cursor.eat_punct('}') {
                triples(cursor, Some(&graph), target)?;
            }
            cursor.eat_punct('.');
            continue;
        }
        triples(cursor, None, target)?;
    }
}

fn graph_name(cursor: &mut Cursor) -> Result<NamedNode, DeltaError> {
    match cursor.peek() {
        Some(Token::Variable(v)) => Err(DeltaError::DisallowedForm(format!("variable ?{v} in data block"))),
        Some(Token::BlankLabel(_)) => Err(cursor.error("blank node graph names are not allowed").into()),
        _ => Ok(cursor.iri()?),
    }
}

/// One subject with its predicate-object list, followed by an optional `.`.
fn triples(cursor: &mut Cursor, graph: Option<&NamedNode>, target: &mut QuadSet) -> Result<(), DeltaError> {
    let subject: Subject = match data_term(cursor, false)? {
        Term::NamedNode(n) => n.into(),
        Term::Literal(_) => return Err(cursor.error("literal in subject position").into()),
        Term::BlankNode(_) => unreachable!("rejected by data_term"),
    };
    loop {
        let predicate = match data_term(cursor, true)? {
            Term::NamedNode(n) => n,
            _ => return Err(cursor.error("predicate must be an IRI").into()),
        };
        loop {
            let object = data_term(cursor, false)?;
            target.insert(Quad::new(subject.clone(), predicate.clone(), object, graph.cloned()));
            if !cursor.eat_punct(',') {
                break;
            }
        }
        if !cursor.eat_punct(';') {
            break;
        }
        while cursor.eat_punct(';') {}
        if matches!(cursor.peek(), Some(Token::Punct('.' | '}'))) {
            break;
        }
    }
    cursor.eat_punct('.');
    Ok(())
}

fn data_term(cursor: &mut Cursor, predicate_position: bool) -> Result<Term, DeltaError> {
    match cursor.peek() {
        Some(Token::BlankLabel(_)) | Some(Token::Punct('[')) => {
            Err(DeltaError::BlankNodeInUpdate(cursor.position()))
        }
        Some(Token::Variable(v)) => Err(DeltaError::DisallowedForm(format!("variable ?{v} in data block"))),
        _ => Ok(cursor.ground_term(predicate_position)?),
    }
}
