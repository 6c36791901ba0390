use std::collections::HashMap;

use super::lexer::{resolve_iri, Position, SyntaxError, Token};
use super::term::{Literal, NamedNode, Term};
use super::vocab::{rdf, xsd};

/// Token stream with the prefix/base context needed by Turtle-like syntaxes.
pub(crate) struct Cursor {
    tokens: Vec<(Token, Position)>,
    index: usize,
    end: Position,
    pub(crate) prefixes: HashMap<String, String>,
    pub(crate) base: Option<String>,
}

impl Cursor {
    pub(crate) fn new(tokens: Vec<(Token, Position)>, end: Position) -> Self {
        Self {
            tokens,
            index: 0,
            end,
            prefixes: HashMap::new(),
            base: None,
        }
    }

    pub(crate) fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.index).map(|(t, _)| t)
    }


    pub(crate) fn position(&self) -> Position {
        self.tokens.get(self.index).map(|(_, p)| *p).unwrap_or(self.end)
    }

    pub(crate) fn next(&mut self) -> Result<(Token, Position), SyntaxError> {
        let item = self
            .tokens
            .get(self.index)
            .cloned()
            .ok_or_else(|| SyntaxError::new(self.end, "unexpected end of input"))?;
        self.index += 1;
        Ok(item)
    }

    pub(crate) fn at_end(&self) -> bool {
        self.index >= self.tokens.len()
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.position(), message)
    }

    pub(crate) fn eat_punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Token::Punct(c)) {
            self.index += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect_punct(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            let found = self.peek().map(|t| t.to_string()).unwrap_or_else(|| "end of input".into());
            Err(self.error(format!("expected '{c}', found {found}")))
        }
    }

    /// Consumes a case-insensitive keyword.
    pub(crate) fn eat_keyword(&mut self, keyword: &str) -> bool {
        match self.peek() {
            Some(Token::Word(w)) if w.eq_ignore_ascii_case(keyword) => {
                self.index += 1;
                true
            }
            _ => false,
        }
    }

    pub(crate) fn iri_from_token(&self, token: &Token, pos: Position) -> Result<NamedNode, SyntaxError> {
        match token {
            Token::IriRef(iri) => {
                let resolved = resolve_iri(self.base.as_deref(), iri)
                    .ok_or_else(|| SyntaxError::new(pos, format!("relative IRI <{iri}> without base")))?;
                NamedNode::new(resolved).map_err(|e| SyntaxError::new(pos, e.to_string()))
            }
            Token::PrefixedName(prefix, local) => {
                let ns = self
                    .prefixes
                    .get(prefix)
                    .ok_or_else(|| SyntaxError::new(pos, format!("undeclared prefix `{prefix}:`")))?;
                NamedNode::new(format!("{ns}{local}")).map_err(|e| SyntaxError::new(pos, e.to_string()))
            }
            other => Err(SyntaxError::new(pos, format!("expected an IRI, found {other}"))),
        }
    }

    pub(crate) fn iri(&mut self) -> Result<NamedNode, SyntaxError> {
        let (token, pos) = self.next()?;
        self.iri_from_token(&token, pos)
    }

    /// Completes a literal whose quoted lexical form was just consumed.
    pub(crate) fn string_literal(&mut self, value: String) -> Result<Literal, SyntaxError> {
        match self.peek() {
            Some(Token::At(_)) => {
                let (Token::At(lang), pos) = self.next()? else { unreachable!() };
                Literal::new_language_tagged(value, lang).map_err(|e| SyntaxError::new(pos, e.to_string()))
            }
            Some(Token::DoubleCaret) => {
                self.next()?;
                let datatype = self.iri()?;
                Ok(Literal::new_typed(value, datatype))
            }
            _ => Ok(Literal::new_simple(value)),
        }
    }

    /// Parses literal shorthand tokens (numbers, booleans) and quoted strings.
    pub(crate) fn try_literal(&mut self) -> Result<Option<Literal>, SyntaxError> {
        let datatype = match self.peek() {
            Some(Token::String(_)) => {
                let (Token::String(value), _) = self.next()? else { unreachable!() };
                return self.string_literal(value).map(Some);
            }
            Some(Token::Integer(_)) => xsd::INTEGER,
            Some(Token::Decimal(_)) => xsd::DECIMAL,
            Some(Token::Double(_)) => xsd::DOUBLE,
            Some(Token::Word(w)) if w == "true" || w == "false" => xsd::BOOLEAN,
            _ => return Ok(None),
        };
        let (token, _) = self.next()?;
        let lexical = match token {
            Token::Integer(s) | Token::Decimal(s) | Token::Double(s) | Token::Word(s) => s,
            _ => unreachable!(),
        };
        Ok(Some(Literal::new_typed(lexical, NamedNode::new_unchecked(datatype))))
    }

    /// An IRI, prefixed name, `a` (in predicate position), or literal.
    pub(crate) fn ground_term(&mut self, predicate_position: bool) -> Result<Term, SyntaxError> {
        if let Some(lit) = self.try_literal()? {
            return Ok(lit.into());
        }
        if predicate_position && self.eat_keyword_exact("a") {
            return Ok(NamedNode::new_unchecked(rdf::TYPE).into());
        }
        Ok(self.iri()?.into())
    }

    pub(crate) fn eat_keyword_exact(&mut self, word: &str) -> bool {
        match self.peek() {
            Some(Token::Word(w)) if w == word => {
                self.index += 1;
                true
            }
            _ => false,
        }
    }
}
