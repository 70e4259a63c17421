//! Catalog engine for FAIR-by-design cultural-heritage digitisation.
//!
//! Tabular bibliographic and process data are mapped to RDF with a small
//! declarative mapping language, stored in a named-graph quad store, and
//! tracked with snapshot provenance whose reversible deltas allow any entity
//! to be restored to an earlier state. Recorded 3D asset versions are checked
//! against pipeline constraints, and the whole catalog can be audited against
//! a three-level FAIR checklist.

#![allow(clippy::result_large_err)]

pub mod audit;
pub mod mapping;
pub mod provenance;
pub mod rdf;
pub mod store;
pub mod vocab;
pub mod workflow;
