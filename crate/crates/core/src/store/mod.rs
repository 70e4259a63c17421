//! In-memory named-graph quad store.
//!
//! Quads are kept in a primary set plus three secondary indexes (by graph,
//! by subject, by subject and predicate). Every mutation goes through
//! [`Store::insert`] / [`Store::remove`] so the indexes never drift from the
//! primary set.

mod pattern;
mod query;
mod update;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::rdf::{parse_nquads, serialize_nquads, Dataset, Iri, Quad, Subject, SyntaxError};

pub use pattern::{bgp_query, subject_term, GraphPattern, PatternTerm, QuadPattern, Solution};
pub use query::{parse_bgp, pattern_variables, solutions_csv};
pub use update::{invert_delta, parse_update, serialize_update, Delta, UpdateError};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("delta not applicable: {0}")]
    PreconditionViolation(Precondition),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Precondition {
    MissingDelete(Quad),
    PresentInsert(Quad),
}

impl std::fmt::Display for Precondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Precondition::MissingDelete(q) => write!(f, "quad to delete is absent: {q}"),
            Precondition::PresentInsert(q) => write!(f, "quad to insert is already present: {q}"),
        }
    }
}

/// How [`Store::apply_delta`] treats deltas that do not match the store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyMode {
    /// Every delete must be present and no insert may be present.
    Strict,
    /// Plain set difference and union.
    Lax,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Store {
    quads: Dataset,
    by_graph: BTreeMap<Option<Iri>, BTreeSet<Quad>>,
    by_subject: BTreeMap<Subject, BTreeSet<Quad>>,
    by_subject_predicate: BTreeMap<(Subject, Iri), BTreeSet<Quad>>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_dataset(dataset: Dataset) -> Self {
        let mut store = Store::new();
        store.insert_quads(dataset);
        store
    }

    pub fn dataset(&self) -> &Dataset {
        &self.quads
    }

    pub fn len(&self) -> usize {
        self.quads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    pub fn contains(&self, quad: &Quad) -> bool {
        self.quads.contains(quad)
    }

    pub fn insert(&mut self, quad: Quad) -> bool {
        if !self.quads.insert(quad.clone()) {
            return false;
        }
        self.by_graph
            .entry(quad.graph.clone())
            .or_default()
            .insert(quad.clone());
        self.by_subject
            .entry(quad.subject.clone())
            .or_default()
            .insert(quad.clone());
        self.by_subject_predicate
            .entry((quad.subject.clone(), quad.predicate.clone()))
            .or_default()
            .insert(quad);
        true
    }

    pub fn remove(&mut self, quad: &Quad) -> bool {
        if !self.quads.remove(quad) {
            return false;
        }
        remove_indexed(&mut self.by_graph, &quad.graph, quad);
        remove_indexed(&mut self.by_subject, &quad.subject, quad);
        remove_indexed(
            &mut self.by_subject_predicate,
            &(quad.subject.clone(), quad.predicate.clone()),
            quad,
        );
        true
    }

    /// Adds every quad; returns how many were not already present.
    pub fn insert_quads(&mut self, quads: impl IntoIterator<Item = Quad>) -> usize {
        quads.into_iter().filter(|q| self.insert(q.clone())).count()
    }

    /// Removes every quad; returns how many were present.
    pub fn delete_quads<'a>(&mut self, quads: impl IntoIterator<Item = &'a Quad>) -> usize {
        quads.into_iter().filter(|q| self.remove(q)).count()
    }

    /// Graphs that currently hold at least one quad.
    pub fn named_graphs(&self) -> Vec<Iri> {
        self.by_graph.keys().flatten().cloned().collect()
    }

    pub fn graph(&self, graph: Option<&Iri>) -> impl Iterator<Item = &Quad> + '_ {
        self.by_graph.get(&graph.cloned()).into_iter().flatten()
    }

    pub fn subject_quads(&self, subject: &Subject) -> impl Iterator<Item = &Quad> + '_ {
        self.by_subject.get(subject).into_iter().flatten()
    }

    /// All quads whose subject is `entity`, in any graph.
    pub fn entity_state(&self, entity: &Iri) -> Dataset {
        self.subject_quads(&Subject::Iri(entity.clone()))
            .cloned()
            .collect()
    }

    pub fn subject_predicate_quads(
        &self,
        subject: &Subject,
        predicate: &Iri,
    ) -> impl Iterator<Item = &Quad> + '_ {
        self.by_subject_predicate
            .get(&(subject.clone(), predicate.clone()))
            .into_iter()
            .flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Quad> + '_ {
        self.quads.iter()
    }

    pub fn check_applicable(&self, delta: &Delta) -> Result<(), Precondition> {
        if let Some(q) = delta.deletes().iter().find(|q| !self.contains(q)) {
            return Err(Precondition::MissingDelete(q.clone()));
        }
        if let Some(q) = delta.inserts().iter().find(|q| self.contains(q)) {
            return Err(Precondition::PresentInsert(q.clone()));
        }
        Ok(())
    }

    /// `store := (store \ deletes) ∪ inserts`. In strict mode nothing changes
    /// when the precondition fails.
    pub fn apply_delta(&mut self, delta: &Delta, mode: ApplyMode) -> Result<(), StoreError> {
        if mode == ApplyMode::Strict {
            self.check_applicable(delta)
                .map_err(StoreError::PreconditionViolation)?;
        }
        self.delete_quads(delta.deletes());
        self.insert_quads(delta.inserts().iter().cloned());
        Ok(())
    }

    pub fn to_nquads(&self) -> String {
        serialize_nquads(&self.quads)
    }

    /// Writes canonical N-Quads through a temporary file renamed into place.
    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        write_atomically(path, self.to_nquads().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Store, StoreError> {
        let text = fs::read_to_string(path).map_err(|source| StoreError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Store::from_dataset(parse_nquads(&text)?))
    }

    /// Rebuilds the indexes from the primary set and compares; used by tests.
    pub fn indexes_consistent(&self) -> bool {
        let rebuilt = Store::from_dataset(self.quads.clone());
        rebuilt.by_graph == self.by_graph
            && rebuilt.by_subject == self.by_subject
            && rebuilt.by_subject_predicate == self.by_subject_predicate
    }
}

fn remove_indexed<K: Ord + Clone>(index: &mut BTreeMap<K, BTreeSet<Quad>>, key: &K, quad: &Quad) {
    if let Some(set) = index.get_mut(key) {
        set.remove(quad);
        if set.is_empty() {
            index.remove(key);
        }
    }
}

pub fn insert_quads(store: &mut Store, quads: &Dataset) -> usize {
    store.insert_quads(quads.iter().cloned())
}

pub fn delete_quads(store: &mut Store, quads: &Dataset) -> usize {
    store.delete_quads(quads)
}

pub fn apply_delta(store: &mut Store, delta: &Delta, mode: ApplyMode) -> Result<(), StoreError> {
    store.apply_delta(delta, mode)
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomically(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let io_err = |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
