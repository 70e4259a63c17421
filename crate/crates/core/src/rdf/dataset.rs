use std::collections::BTreeSet;

use super::term::{Iri, Quad, Subject};

/// A set of quads. Inserting a quad that is already present is a no-op.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Dataset {
    quads: BTreeSet<Quad>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `true` when the quad was not already present.
    pub fn insert(&mut self, quad: Quad) -> bool {
        self.quads.insert(quad)
    }

    pub fn remove(&mut self, quad: &Quad) -> bool {
        self.quads.remove(quad)
    }

    pub fn contains(&self, quad: &Quad) -> bool {
        self.quads.contains(quad)
    }

    pub fn len(&self) -> usize {
        self.quads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Quad> + '_ {
        self.quads.iter()
    }

    pub fn extend(&mut self, other: impl IntoIterator<Item = Quad>) {
        self.quads.extend(other);
    }

    pub fn union(&self, other: &Dataset) -> Dataset {
        self.quads.union(&other.quads).cloned().collect()
    }

    pub fn difference(&self, other: &Dataset) -> Dataset {
        self.quads.difference(&other.quads).cloned().collect()
    }

    pub fn intersection(&self, other: &Dataset) -> Dataset {
        self.quads.intersection(&other.quads).cloned().collect()
    }

    pub fn is_disjoint(&self, other: &Dataset) -> bool {
        self.quads.is_disjoint(&other.quads)
    }

    pub fn is_subset(&self, other: &Dataset) -> bool {
        self.quads.is_subset(&other.quads)
    }

    /// Quads whose subject is the given IRI.
    pub fn with_subject(&self, subject: &Iri) -> Dataset {
        let subject = Subject::Iri(subject.clone());
        self.iter()
            .filter(|q| q.subject == subject)
            .cloned()
            .collect()
    }

    pub fn graph_names(&self) -> BTreeSet<Iri> {
        self.iter().filter_map(|q| q.graph.clone()).collect()
    }
}

impl FromIterator<Quad> for Dataset {
    fn from_iter<T: IntoIterator<Item = Quad>>(iter: T) -> Self {
        Dataset {
            quads: iter.into_iter().collect(),
        }
    }
}

impl IntoIterator for Dataset {
    type Item = Quad;
    type IntoIter = std::collections::btree_set::IntoIter<Quad>;

    fn into_iter(self) -> Self::IntoIter {
        self.quads.into_iter()
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a Quad;
    type IntoIter = std::collections::btree_set::Iter<'a, Quad>;

    fn into_iter(self) -> Self::IntoIter {
        self.quads.iter()
    }
}
