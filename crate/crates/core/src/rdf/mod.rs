//! RDF terms and quads, N-Quads/Turtle I/O and skolemization.

mod cursor;
mod graph;
pub(crate) mod lexer;
pub mod nquads;
mod skolem;
mod term;
mod turtle;
pub mod vocab;

pub use graph::EntityGraph;
pub use lexer::{Position, SyntaxError};
pub use nquads::{parse_nquads, serialize_nquads};
pub use skolem::skolemize;
pub use term::{is_absolute_iri, BlankNode, Literal, NamedNode, Quad, Subject, Term, TermError, TermKind};
pub use turtle::parse_turtle;

pub(crate) use cursor::Cursor;
pub(crate) use lexer::{Lexer, Token};

/// A set of quads with deterministic iteration order.
pub type QuadSet = std::collections::BTreeSet<Quad>;
