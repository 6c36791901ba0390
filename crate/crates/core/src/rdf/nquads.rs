//! N-Quads reading and canonical writing.

use std::collections::BTreeSet;

use super::cursor::Cursor;
use super::lexer::{Lexer, SyntaxError, Token};
use super::term::{BlankNode, NamedNode, Quad, Subject, Term};

/// Parses an N-Quads document into a set of quads.
pub fn parse_nquads(text: &str) -> Result<BTreeSet<Quad>, SyntaxError> {
    let tokens = Lexer::new(text).tokenize()?;
    let end = end_position(text);
    let mut cursor = Cursor::new(tokens, end);
    let mut quads = BTreeSet::new();
    while !cursor.at_end() {
        let subject: Subject = match cursor.next()? {
            (Token::IriRef(iri), pos) => cursor.iri_from_token(&Token::IriRef(iri), pos)?.into(),
            (Token::BlankLabel(label), pos) => blank(label, pos)?.into(),
            (other, pos) => return Err(SyntaxError::new(pos, format!("expected subject, found {other}"))),
        };
        let predicate = match cursor.next()? {
            (t @ Token::IriRef(_), pos) => cursor.iri_from_token(&t, pos)?,
            (other, pos) => return Err(SyntaxError::new(pos, format!("expected predicate IRI, found {other}"))),
        };
        let object: Term = match cursor.next()? {
            (t @ Token::IriRef(_), pos) => cursor.iri_from_token(&t, pos)?.into(),
            (Token::BlankLabel(label), pos) => blank(label, pos)?.into(),
            (Token::String(value), _) => cursor.string_literal(value)?.into(),
            (other, pos) => return Err(SyntaxError::new(pos, format!("expected object, found {other}"))),
        };
        let graph = match cursor.peek() {
            Some(Token::IriRef(_)) => Some(cursor.iri()?),
            Some(Token::BlankLabel(_)) => {
                return Err(cursor.error("blank node graph names are not supported"));
            }
            _ => None,
        };
        cursor.expect_punct('.')?;
        quads.insert(Quad::new(subject, predicate, object, graph));
    }
    Ok(quads)
}

fn blank(label: String, pos: super::lexer::Position) -> Result<BlankNode, SyntaxError> {
    BlankNode::new(label).map_err(|e| SyntaxError::new(pos, e.to_string()))
}

pub(crate) fn end_position(text: &str) -> super::lexer::Position {
    let line = text.matches('\n').count() + 1;
    let column = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    super::lexer::Position { line, column }
}

/// Writes one statement per line, sorted by graph, subject, predicate, object.
pub fn serialize_nquads<'a>(quads: impl IntoIterator<Item = &'a Quad>) -> String {
    let mut sorted: Vec<&Quad> = quads.into_iter().collect();
    sorted.sort_by_cached_key(|q| q.canonical_key());
    sorted.dedup();
    let mut out = String::new();
    for q in sorted {
        out.push_str(&q.to_string());
        out.push('\n');
    }
    out
}

/// Convenience for tests and fixtures: an IRI that is known to be valid.
pub fn iri(s: &str) -> NamedNode {
    NamedNode::new(s).unwrap_or_else(|e| panic!("{e}"))
}
