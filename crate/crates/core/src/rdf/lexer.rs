//! Tokenizer shared by the N-Quads, Turtle and SPARQL-update-data parsers.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    /// `<...>` with escapes resolved, not yet checked or resolved against a base.
    IriRef(String),
    /// `prefix:local` (either part may be empty).
    PrefixedName(String, String),
    BlankLabel(String),
    /// A quoted string, escapes resolved.
    String(String),
    /// `@word`: a language tag after a string, or a Turtle directive.
    At(String),
    DoubleCaret,
    Integer(String),
    Decimal(String),
    Double(String),
    /// Unprefixed bare word: keywords, `a`, `true`, `false`.
    Word(String),
    Variable(String),
    Punct(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::IriRef(i) => write!(f, "<{i}>"),
            Token::PrefixedName(p, l) => write!(f, "{p}:{l}"),
            Token::BlankLabel(b) => write!(f, "_:{b}"),
            Token::String(s) => write!(f, "{s:?}"),
            Token::At(w) => write!(f, "@{w}"),
            Token::DoubleCaret => f.write_str("^^"),
            Token::Integer(n) | Token::Decimal(n) | Token::Double(n) => f.write_str(n),
            Token::Word(w) => f.write_str(w),
            Token::Variable(v) => write!(f, "?{v}"),
            Token::Punct(c) => write!(f, "{c}"),
        }
    }
}

/// A position in the source text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

/// A syntax error located in the source text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at {position}: {message}")]
pub struct SyntaxError {
    pub position: Position,
    pub message: String,
}

impl SyntaxError {
    pub(crate) fn new(position: Position, message: impl Into<String>) -> Self {
        Self {
            position,
            message: message.into(),
        }
    }
}

pub(crate) struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Self {
            chars: src.char_indices().peekable(),
            src,
            line: 1,
            column: 1,
        }
    }

    /// Tokenizes the whole input.
    pub(crate) fn tokenize(mut self) -> Result<Vec<(Token, Position)>, SyntaxError> {
        let mut out = Vec::new();
        while let Some(item) = self.next_token()? {
            out.push(item);
        }
        Ok(out)
    }

    fn position(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        let start = self.chars.clone().next().map(|(i, _)| i)?;
        self.src[start..].chars().nth(offset)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<(Token, Position)>, SyntaxError> {
        self.skip_trivia();
        let pos = self.position();
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let token = match c {
            '<' => self.iri_ref(pos)?,
            '"' | '\'' => self.string(pos)?,
            '@' => {
                self.bump();
                let word = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                if word.is_empty() {
                    return Err(SyntaxError::new(pos, "expected a word after '@'"));
                }
                Token::At(word)
            }
            '^' => {
                self.bump();
                if self.bump() != Some('^') {
                    return Err(SyntaxError::new(pos, "expected '^^'"));
                }
                Token::DoubleCaret
            }
            '?' | '$' => {
                self.bump();
                let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
                if name.is_empty() {
                    return Err(SyntaxError::new(pos, "empty variable name"));
                }
                Token::Variable(name)
            }
            '_' if self.peek_at(1) == Some(':') => {
                self.bump();
                self.bump();
                let label = self.name_chars();
                if label.is_empty() {
                    return Err(SyntaxError::new(pos, "empty blank node label"));
                }
                Token::BlankLabel(label)
            }
            '.' if !self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => {
                self.bump();
                Token::Punct('.')
            }
            ';' | ',' | '{' | '}' | '[' | ']' | '(' | ')' => {
                self.bump();
                Token::Punct(c)
            }
            '+' | '-' | '.' | '0'..='9' => self.number(pos)?,
            c if c.is_alphabetic() || c == ':' || c == '_' => self.name(pos)?,
            other => {
                return Err(SyntaxError::new(pos, format!("unexpected character {other:?}")));
            }
        };
        Ok(Some((token, pos)))
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    /// Name characters, allowing inner dots but not a trailing one.
    fn name_chars(&mut self) -> String {
        let mut s = String::new();
        loop {
            match self.peek() {
                Some(c) if c.is_alphanumeric() || matches!(c, '_' | '-' | '\u{B7}') => {
                    s.push(c);
                    self.bump();
                }
                Some('.') if self.peek_at(1).is_some_and(|n| n.is_alphanumeric() || matches!(n, '_' | '-' | ':' | '%')) => {
                    s.push('.');
                    self.bump();
                }
                _ => break,
            }
        }
        s
    }

    fn name(&mut self, pos: Position) -> Result<Token, SyntaxError> {
        let prefix = if self.peek() == Some(':') {
            String::new()
        } else {
            self.name_chars()
        };
        if self.peek() != Some(':') {
            return Ok(Token::Word(prefix));
        }
        self.bump();
        let mut local = String::new();
        loop {
            match self.peek() {
                Some(c) if c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '\u{B7}') => {
                    local.push(c);
                    self.bump();
                }
                Some('.') if self.peek_at(1).is_some_and(|n| n.is_alphanumeric() || matches!(n, '_' | '-' | ':' | '%' | '\\')) => {
                    local.push('.');
                    self.bump();
                }
                Some('%') => {
                    self.bump();
                    let hex: String = (0..2).filter_map(|_| self.bump()).collect();
                    if hex.len() != 2 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
                        return Err(SyntaxError::new(pos, "invalid percent escape in local name"));
                    }
                    local.push('%');
                    local.push_str(&hex);
                }
                Some('\\') => {
                    self.bump();
                    match self.bump() {
                        Some(c) if "_~.-!$&'()*+,;=/?#@%".contains(c) => local.push(c),
                        _ => return Err(SyntaxError::new(pos, "invalid escape in local name")),
                    }
                }
                _ => break,
            }
        }
        Ok(Token::PrefixedName(prefix, local))
    }

    fn number(&mut self, pos: Position) -> Result<Token, SyntaxError> {
        let mut s = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            s.push(c);
            self.bump();
        }
        s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        let mut decimal = false;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            decimal = true;
            s.push('.');
            self.bump();
            s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            s.push(e);
            self.bump();
            if let Some(c @ ('+' | '-')) = self.peek() {
                s.push(c);
                self.bump();
            }
            let exp = self.take_while(|c| c.is_ascii_digit());
            if exp.is_empty() {
                return Err(SyntaxError::new(pos, "malformed exponent"));
            }
            s.push_str(&exp);
            return Ok(Token::Double(s));
        }
        if !s.chars().any(|c| c.is_ascii_digit()) {
            return Err(SyntaxError::new(pos, format!("malformed number `{s}`")));
        }
        Ok(if decimal { Token::Decimal(s) } else { Token::Integer(s) })
    }

    fn iri_ref(&mut self, pos: Position) -> Result<Token, SyntaxError> {
        self.bump();
        let mut iri = String::new();
        loop {
            match self.bump() {
                None => return Err(SyntaxError::new(pos, "unterminated IRI")),
                Some('>') => break,
                Some('\\') => iri.push(self.unicode_escape(pos)?),
                Some(c) if c <= ' ' || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return Err(SyntaxError::new(pos, format!("invalid character {c:?} in IRI")));
                }
                Some(c) => iri.push(c),
            }
        }
        Ok(Token::IriRef(iri))
    }

    fn unicode_escape(&mut self, pos: Position) -> Result<char, SyntaxError> {
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(SyntaxError::new(pos, "invalid escape sequence")),
        };
        let hex: String = (0..len).filter_map(|_| self.bump()).collect();
        u32::from_str_radix(&hex, 16)
            .ok()
            .filter(|_| hex.len() == len)
            .and_then(char::from_u32)
            .ok_or_else(|| SyntaxError::new(pos, format!("invalid unicode escape `{hex}`")))
    }

    fn string(&mut self, pos: Position) -> Result<Token, SyntaxError> {
        let quote = self.bump().expect("peeked");
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        }
        let mut value = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(SyntaxError::new(pos, "unterminated string literal"));
            };
            match c {
                '\\' => {
                    let escaped = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{C}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u' | 'U') => {
                            value.push(self.unicode_escape(pos)?);
                            continue;
                        }
                        _ => return Err(SyntaxError::new(self.position(), "invalid string escape")),
                    };
                    self.bump();
                    value.push(escaped);
                }
                c if c == quote && !long => break,
                c if c == quote
                    && self.peek() == Some(quote)
                    && self.peek_at(1) == Some(quote) =>
                {
                    self.bump();
                    self.bump();
                    // `""""` closes with the extra quote kept as content.
                    while self.peek() == Some(quote) {
                        value.push(quote);
                        self.bump();
                    }
                    break;
                }
                '\n' | '\r' if !long => {
                    return Err(SyntaxError::new(pos, "line break in short string literal"));
                }
                c => value.push(c),
            }
        }
        Ok(Token::String(value))
    }
}

/// Resolves `reference` against `base` (RFC 3986 section 5.2, without
/// normalisation beyond dot-segment removal).
pub(crate) fn resolve_iri(base: Option<&str>, reference: &str) -> Option<String> {
    if super::term::is_absolute_iri(reference) {
        return Some(reference.to_owned());
    }
    let base = base?;
    let scheme_end = base.find(':')?;
    let scheme = &base[..scheme_end];
    let rest = &base[scheme_end + 1..];
    let (authority, path_and_more) = if let Some(stripped) = rest.strip_prefix("//") {
        let end = stripped.find(['/', '?', '#']).unwrap_or(stripped.len());
        (Some(&stripped[..end]), &stripped[end..])
    } else {
        (None, rest)
    };
    let base_path = &path_and_more[..path_and_more.find(['?', '#']).unwrap_or(path_and_more.len())];
    let base_no_fragment = &base[..base.find('#').unwrap_or(base.len())];
    let prefix = match authority {
        Some(a) => format!("{scheme}://{a}"),
        None => format!("{scheme}:"),
    };
    let resolved = if reference.is_empty() {
        base_no_fragment.to_owned()
    } else if let Some(r) = reference.strip_prefix("//") {
        format!("{scheme}://{r}")
    } else if reference.starts_with('#') {
        format!("{base_no_fragment}{reference}")
    } else if reference.starts_with('?') {
        format!("{prefix}{base_path}{reference}")
    } else if reference.starts_with('/') {
        format!("{prefix}{}", remove_dot_segments(reference))
    } else {
        let dir = match base_path.rfind('/') {
            Some(i) => &base_path[..=i],
            None if authority.is_some() => "/",
            None => "",
        };
        let (path, tail) = match reference.find(['?', '#']) {
            Some(i) => (&reference[..i], &reference[i..]),
            None => (reference, ""),
        };
        format!("{prefix}{}{tail}", remove_dot_segments(&format!("{dir}{path}")))
    };
    Some(resolved)
}

fn remove_dot_segments(path: &str) -> String {
    let mut out: Vec<&str> = Vec::new();
    let segments: Vec<&str> = path.split('/').collect();
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        match *seg {
            "." => {
                if last {
                    out.push("");
                }
            }
            ".." => {
                if out.len() > 1 {
                    out.pop();
                }
                if last {
                    out.push("");
                }
            }
            s => out.push(s),
        }
    }
    out.join("/")
}
