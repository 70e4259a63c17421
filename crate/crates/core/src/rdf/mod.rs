//! RDF terms, quads, datasets and the N-Quads syntax.

mod dataset;
mod nquads;
mod term;

pub use dataset::Dataset;
pub(crate) use nquads::Cursor;
pub use nquads::{canonical_order, parse_nquads, serialize_nquads, SyntaxError};
pub use term::{
    make_iri, BlankNode, Iri, Literal, Quad, Subject, Term, TermError, RDF_LANG_STRING, RDF_TYPE,
    XSD_STRING,
};
