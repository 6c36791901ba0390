//! Read-only Turtle parser, used for SHACL shape files.

use std::collections::BTreeSet;

use super::cursor::Cursor;
use super::lexer::{Lexer, SyntaxError, Token};
use super::nquads::end_position;
use super::term::{BlankNode, NamedNode, Quad, Subject, Term};
use super::vocab::rdf;

/// Parses a Turtle document; all statements land in the default graph.
pub fn parse_turtle(text: &str, base: Option<&str>) -> Result<BTreeSet<Quad>, SyntaxError> {
    let tokens = Lexer::new(text).tokenize()?;
    let mut parser = TurtleParser {
        cursor: Cursor::new(tokens, end_position(text)),
        quads: BTreeSet::new(),
        anon: 0,
    };
    parser.cursor.base = base.map(str::to_owned);
    parser.document()?;
    Ok(parser.quads)
}

struct TurtleParser {
    cursor: Cursor,
    quads: BTreeSet<Quad>,
    anon: usize,
}

impl TurtleParser {
    fn document(&mut self) -> Result<(), SyntaxError> {
        while !self.cursor.at_end() {
            if !self.directive()? {
                self.triples()?;
                self.cursor.expect_punct('.')?;
            }
        }
        Ok(())
    }

    fn directive(&mut self) -> Result<bool, SyntaxError> {
        let (sparql_style, kind) = match self.cursor.peek() {
            Some(Token::At(w)) if w == "prefix" || w == "base" => (false, w.clone()),
            Some(Token::Word(w)) if w.eq_ignore_ascii_case("prefix") || w.eq_ignore_ascii_case("base") => {
                (true, w.to_ascii_lowercase())
            }
            _ => return Ok(false),
        };
        self.cursor.next()?;
        if kind == "prefix" {
            let prefix = match self.cursor.next()? {
                (Token::PrefixedName(p, l), _) if l.is_empty() => p,
                (other, pos) => return Err(SyntaxError::new(pos, format!("expected prefix name, found {other}"))),
            };
            let ns = self.iri_ref()?;
            self.cursor.prefixes.insert(prefix, ns.into_string());
        } else {
            let base = self.iri_ref()?;
            self.cursor.base = Some(base.into_string());
        }
        if !sparql_style {
            self.cursor.expect_punct('.')?;
        }
        Ok(true)
    }

    fn iri_ref(&mut self) -> Result<NamedNode, SyntaxError> {
        match self.cursor.next()? {
            (t @ Token::IriRef(_), pos) => self.cursor.iri_from_token(&t, pos),
            (other, pos) => Err(SyntaxError::new(pos, format!("expected IRI, found {other}"))),
        }
    }

    fn fresh_blank(&mut self) -> BlankNode {
        self.anon += 1;
        BlankNode::new(format!("anon{}", self.anon)).expect("valid label")
    }

    fn triples(&mut self) -> Result<(), SyntaxError> {
        if self.cursor.peek() == Some(&Token::Punct('[')) {
            let subject = self.blank_property_list()?;
            if self.cursor.peek() != Some(&Token::Punct('.')) {
                self.predicate_object_list(&subject.into())?;
            }
            return Ok(());
        }
        let subject: Subject = match self.object()? {
            Term::NamedNode(n) => n.into(),
            Term::BlankNode(b) => b.into(),
            Term::Literal(_) => return Err(self.cursor.error("literal in subject position")),
        };
        self.predicate_object_list(&subject)
    }

    fn predicate_object_list(&mut self, subject: &Subject) -> Result<(), SyntaxError> {
        loop {
            let predicate = match self.cursor.ground_term(true)? {
                Term::NamedNode(n) => n,
                _ => return Err(self.cursor.error("predicate must be an IRI")),
            };
            loop {
                let object = self.object()?;
                self.quads.insert(Quad::new(subject.clone(), predicate.clone(), object, None));
                if !self.cursor.eat_punct(',') {
                    break;
                }
            }
            if !self.cursor.eat_punct(';') {
                return Ok(());
            }
            while self.cursor.eat_punct(';') {}
            if matches!(self.cursor.peek(), Some(Token::Punct('.' | ']')) | None) {
                return Ok(());
            }
        }
    }

    fn blank_property_list(&mut self) -> Result<BlankNode, SyntaxError> {
        self.cursor.expect_punct('[')?;
        let node = self.fresh_blank();
        if !self.cursor.eat_punct(']') {
            self.predicate_object_list(&node.clone().into())?;
            self.cursor.expect_punct(']')?;
        }
        Ok(node)
    }

    fn collection(&mut self) -> Result<Term, SyntaxError> {
        self.cursor.expect_punct('(')?;
        let mut items = Vec::new();
        while !self.cursor.eat_punct(')') {
            if self.cursor.at_end() {
                return Err(self.cursor.error("unterminated collection"));
            }
            items.push(self.object()?);
        }
        let mut head: Term = NamedNode::new_unchecked(rdf::NIL).into();
        for item in items.into_iter().rev() {
            let node = self.fresh_blank();
            self.quads.insert(Quad::new(node.clone(), NamedNode::new_unchecked(rdf::FIRST), item, None));
            self.quads.insert(Quad::new(node.clone(), NamedNode::new_unchecked(rdf::REST), head, None));
            head = node.into();
        }
        Ok(head)
    }

    fn object(&mut self) -> Result<Term, SyntaxError> {
        match self.cursor.peek() {
            Some(Token::Punct('[')) => Ok(self.blank_property_list()?.into()),
            Some(Token::Punct('(')) => self.collection(),
            Some(Token::BlankLabel(_)) => {
                let (Token::BlankLabel(label), pos) = self.cursor.next()? else { unreachable!() };
                BlankNode::new(label)
                    .map(Term::from)
                    .map_err(|e| SyntaxError::new(pos, e.to_string()))
            }
            _ => self.cursor.ground_term(false),
        }
    }
}
