use crate::rdf::NamedNode;
use crate::sparql::{SparqlStore, MemoryStore};

/// A SELECT query with `[[uri]]` / `[[subject]]` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryTemplate {
    pub text: String,
    pub expected_vars: Vec<String>,
}

const PLACEHOLDERS: [&str; 2] = ["[[uri]]", "[[subject]]"];
const PROBE: &str = "urn:quadvault:probe";

impl QueryTemplate {
    /// Checks that the text parses as a SELECT once placeholders are filled.
    pub fn parse(text: &str) -> Result<Self, String> {
        let probe = substitute(text, &NamedNode::new_unchecked(PROBE));
        let result = MemoryStore::new().select(&probe).map_err(|e| e.to_string())?;
        Ok(Self {
            text: text.to_owned(),
            expected_vars: result.variables,
        })
    }

    pub fn fill(&self, iri: &NamedNode) -> String {
        substitute(&self.text, iri)
    }

    /// The query with its placeholders replaced by `?{var}` and that
    /// variable added to the outer projection. `None` for `SELECT *`.
    pub fn open(&self, var: &str) -> Option<String> {
        let text = replace_placeholders(&self.text, &format!("?{var}"));
        let at = find_keyword(&text, "SELECT")?;
        let mut head = at + "SELECT".len();
        let rest = text[head..].trim_start();
        for modifier in ["DISTINCT", "REDUCED"] {
            if rest.len() >= modifier.len() && rest[..modifier.len()].eq_ignore_ascii_case(modifier) {
                head = text.len() - rest.len() + modifier.len();
            }
        }
        if text[head..].trim_start().starts_with('*') {
            return None;
        }
        Some(format!("{} ?{var}{}", &text[..head], &text[head..]))
    }
}

/// Byte offset of the first case-insensitive `keyword` outside literals,
/// IRIs and comments.
fn find_keyword(text: &str, keyword: &str) -> Option<usize> {
    let mut i = 0;
    while let Some(c) = text[i..].chars().next() {
        let rest = &text[i..];
        let boundary_before = text[..i].chars().next_back().is_none_or(|p| !p.is_alphanumeric() && p != '_' && p != '?');
        if boundary_before && rest.len() >= keyword.len() && rest[..keyword.len()].eq_ignore_ascii_case(keyword) {
            let after = rest[keyword.len()..].chars().next();
            if after.is_none_or(|a| !a.is_alphanumeric() && a != '_') {
                return Some(i);
            }
        }
        i += skip_len(rest, c);
    }
    None
}

fn skip_len(rest: &str, c: char) -> usize {
    match c {
        '"' | '\'' => string_len(rest, c),
        '<' => rest.find('>').filter(|&i| !rest[..i].contains(char::is_whitespace)).map(|i| i + 1),
        '#' => Some(rest.find('\n').unwrap_or(rest.len())),
        _ => None,
    }
    .unwrap_or(c.len_utf8())
}

/// Replaces placeholders with `<iri>` outside string literals, IRIs and
/// comments.
pub fn substitute(text: &str, iri: &NamedNode) -> String {
    replace_placeholders(text, &iri.to_string())
}

fn replace_placeholders(text: &str, replacement: &str) -> String {
    let mut out = String::with_capacity(text.len() + 32);
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if let Some(p) = PLACEHOLDERS.iter().find(|p| rest.starts_with(**p)) {
            out.push_str(replacement);
            rest = &rest[p.len()..];
            continue;
        }
        let skip = skip_len(rest, c);
        out.push_str(&rest[..skip]);
        rest = &rest[skip..];
    }
    out
}

/// Byte length of the string literal at the start of `s`, quotes included.
fn string_len(s: &str, quote: char) -> Option<usize> {
    let long: String = std::iter::repeat_n(quote, 3).collect();
    let (open, close) = if s.starts_with(&long) { (3, long.as_str()) } else { (1, &s[..1]) };
    let mut i = open;
    while i < s.len() {
        if s[i..].starts_with('\\') {
            i += 1 + s[i + 1..].chars().next().map_or(0, char::len_utf8);
            continue;
        }
        if s[i..].starts_with(close) {
            return Some(i + close.len());
        }
        if open == 1 && s[i..].starts_with('\n') {
            return None;
        }
        i += s[i..].chars().next().map_or(1, char::len_utf8);
    }
    None
}
