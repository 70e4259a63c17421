//! Declarative tabular-to-RDF mapping.

mod dsl;
mod execute;
mod table;
mod template;

use thiserror::Error;

pub use dsl::{
    parse_mapping, resolve_curie, MappingDocument, ObjectSpec, TripleMap, RDF_NS, XSD_NS,
};
pub use execute::execute_mapping;
pub use table::{CellSource, Row, Table, TableError};
pub use template::{expand_template, normalize_date, Position, Segment, Template, Transform};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("mapping syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown prefix {0:?}")]
    UnknownPrefix(String),
    #[error("duplicate mapping {0:?}")]
    DuplicateMapping(String),
    #[error("no table named {0:?}")]
    MissingTable(String),
    #[error("mapping {map}, row {row}: expansion {text:?} is not a valid IRI")]
    InvalidExpandedIri {
        map: String,
        row: usize,
        text: String,
    },
}
