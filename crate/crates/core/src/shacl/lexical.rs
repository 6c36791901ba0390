//! XSD 1.1 lexical-space checks for the datatypes forms can produce.

use super::ShaclError;
use crate::rdf::vocab::xsd;

pub const SUPPORTED: [&str; 9] = [
    xsd::STRING,
    xsd::INTEGER,
    xsd::DECIMAL,
    xsd::BOOLEAN,
    xsd::DATE,
    xsd::G_YEAR_MONTH,
    xsd::G_YEAR,
    xsd::DATE_TIME,
    xsd::ANY_URI,
];

/// True iff `value` is in the lexical space of `datatype`. Surrounding
/// whitespace is not collapsed.
pub fn lexical_valid(value: &str, datatype: &str) -> Result<bool, ShaclError> {
    let ok = match datatype {
        xsd::STRING => value.chars().all(is_xml_char),
        xsd::INTEGER => integer(value),
        xsd::DECIMAL => decimal(value),
        xsd::BOOLEAN => matches!(value, "true" | "false" | "1" | "0"),
        xsd::DATE => Scan::new(value).date().and_then(|s| s.opt_timezone()).is_some_and(|s| s.done()),
        xsd::G_YEAR_MONTH => Scan::new(value)
            .year()
            .and_then(|(s, _)| s.lit('-'))
            .and_then(|s| s.month())
            .and_then(|(s, _)| s.opt_timezone())
            .is_some_and(|s| s.done()),
        xsd::G_YEAR => Scan::new(value)
            .year()
            .and_then(|(s, _)| s.opt_timezone())
            .is_some_and(|s| s.done()),
        xsd::DATE_TIME => Scan::new(value)
            .date()
            .and_then(|s| s.lit('T'))
            .and_then(|s| s.time())
            .and_then(|s| s.opt_timezone())
            .is_some_and(|s| s.done()),
        xsd::ANY_URI => any_uri(value),
        other => return Err(ShaclError::UnsupportedDatatype(other.to_owned())),
    };
    Ok(ok)
}

fn is_xml_char(c: char) -> bool {
    matches!(c, '\t' | '\n' | '\r' | '\u{20}'..='\u{D7FF}' | '\u{E000}'..='\u{FFFD}' | '\u{10000}'..='\u{10FFFF}')
}

fn digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn unsigned(s: &str) -> &str {
    s.strip_prefix(['+', '-']).unwrap_or(s)
}

fn integer(s: &str) -> bool {
    digits(unsigned(s))
}

fn decimal(s: &str) -> bool {
    match unsigned(s).split_once('.') {
        None => digits(unsigned(s)),
        Some((int, frac)) => {
            (int.is_empty() || digits(int)) && (frac.is_empty() || digits(frac)) && !(int.is_empty() && frac.is_empty())
        }
    }
}

/// Absolute or relative IRI reference: no spaces or excluded delimiters, and
/// every `%` starts a two-digit hex escape.
fn any_uri(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'%' => {
                if i + 2 >= b.len() || !(b[i + 1].is_ascii_hexdigit() && b[i + 2].is_ascii_hexdigit()) {
                    return false;
                }
                i += 3;
                continue;
            }
            b'<' | b'>' | b'"' | b'{' | b'}' | b'|' | b'\\' | b'^' | b'`' => return false,
            c if c <= b' ' || c == 0x7f => return false,
            _ => {}
        }
        i += 1;
    }
    s.chars().all(is_xml_char)
}

fn leap(year: i64) -> bool {
    year % 400 == 0 || (year % 4 == 0 && year % 100 != 0)
}

fn days_in(year: i64, month: u32) -> u32 {
    match month {
        2 if leap(year) => 29,
        2 => 28,
        4 | 6 | 9 | 11 => 30,
        _ => 31,
    }
}

#[derive(Clone, Copy)]
struct Scan<'a> {
    rest: &'a str,
}

impl<'a> Scan<'a> {
    fn new(s: &'a str) -> Self {
        Self { rest: s }
    }

    fn done(self) -> bool {
        self.rest.is_empty()
    }

    fn lit(self, c: char) -> Option<Self> {
        self.rest.strip_prefix(c).map(Self::new)
    }

    /// Exactly `n` ASCII digits.
    fn fixed(self, n: usize) -> Option<(Self, u32)> {
        let head = self.rest.get(..n)?;
        digits(head).then(|| (Self::new(&self.rest[n..]), head.parse().expect("digits")))
    }

    /// `-`? followed by four digits, or more without a leading zero.
    fn year(self) -> Option<(Self, i64)> {
        let (neg, body) = match self.rest.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, self.rest),
        };
        let len = body.bytes().take_while(u8::is_ascii_digit).count();
        if len < 4 || (len > 4 && body.starts_with('0')) {
            return None;
        }
        let value: i64 = body[..len].parse().ok()?;
        Some((Self::new(&body[len..]), if neg { -value } else { value }))
    }

    fn month(self) -> Option<(Self, u32)> {
        let (s, m) = self.fixed(2)?;
        (1..=12).contains(&m).then_some((s, m))
    }

    fn date(self) -> Option<Self> {
        let (s, y) = self.year()?;
        let (s, m) = s.lit('-')?.month()?;
        let (s, d) = s.lit('-')?.fixed(2)?;
        (d >= 1 && d <= days_in(y, m)).then_some(s)
    }

    fn time(self) -> Option<Self> {
        let (s, h) = self.fixed(2)?;
        let (s, mi) = s.lit(':')?.fixed(2)?;
        let (mut s, sec) = s.lit(':')?.fixed(2)?;
        let mut frac_zero = true;
        if let Some(f) = s.lit('.') {
            let len = f.rest.bytes().take_while(u8::is_ascii_digit).count();
            if len == 0 {
                return None;
            }
            frac_zero = f.rest[..len].bytes().all(|b| b == b'0');
            s = Self::new(&f.rest[len..]);
        }
        let ok = if h == 24 {
            mi == 0 && sec == 0 && frac_zero
        } else {
            h < 24 && mi < 60 && sec < 60
        };
        ok.then_some(s)
    }

    fn opt_timezone(self) -> Option<Self> {
        if let Some(s) = self.lit('Z') {
            return Some(s);
        }
        let Some(s) = self.lit('+').or_else(|| self.lit('-')) else {
            return Some(self);
        };
        let (s, h) = s.fixed(2)?;
        let (s, m) = s.lit(':')?.fixed(2)?;
        let ok = (h < 14 && m < 60) || (h == 14 && m == 0);
        ok.then_some(s)
    }
}
