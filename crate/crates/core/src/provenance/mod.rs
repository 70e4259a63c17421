//! Snapshot provenance for catalog entities.
//!
//! Each entity (the set of quads with that IRI as subject) has a chain of
//! snapshots `<entity>/prov/se/1 .. n`. A snapshot records who changed the
//! entity, when, from which source, and the exact delta applied to the data
//! store. Deltas are invertible, so the state at any instant is recovered by
//! undoing the later deltas from the current state.

mod export;
mod time;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::rdf::{Dataset, Iri, Quad, Subject};
use crate::store::{ApplyMode, Delta, Precondition, Store, StoreError};

pub use export::{prov_graph_iri, PROV_GRAPH_SUFFIX, SNAPSHOT_SEGMENT};
pub use time::{Timestamp, TimestampError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProvError {
    #[error("entity {0} already has a provenance chain")]
    AlreadyExists(Iri),
    #[error("quad does not belong to the entity: {0}")]
    ForeignSubject(Box<Quad>),
    #[error("no provenance chain for {0}")]
    NoSuchEntity(Iri),
    #[error("entity {0} has been deleted")]
    EntityDeleted(Iri),
    #[error("delta not applicable to {entity}: {reason}")]
    PreconditionViolation {
        entity: Iri,
        reason: Box<Precondition>,
    },
    #[error("time {given} is not after the last snapshot of {entity} ({last})")]
    NonMonotonicTime {
        entity: Iri,
        last: Timestamp,
        given: Timestamp,
    },
    #[error("cannot merge {0} into itself")]
    SelfMerge(Iri),
    #[error("malformed provenance for {entity}: {reason}")]
    MalformedChain { entity: String, reason: String },
}

/// Outcome of [`Provenance::record_changes`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChangeSummary {
    pub inserted: usize,
    pub deleted: usize,
    pub created: Vec<Iri>,
    pub modified: Vec<Iri>,
}

impl ChangeSummary {
    pub fn entities(&self) -> usize {
        self.created.len() + self.modified.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SnapshotKind {
    Creation,
    Modification,
    Merge,
    Deletion,
}

impl fmt::Display for SnapshotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SnapshotKind::Creation => "creation",
            SnapshotKind::Modification => "modification",
            SnapshotKind::Merge => "merge",
            SnapshotKind::Deletion => "deletion",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub iri: Iri,
    pub entity: Iri,
    pub index: u32,
    pub generated_at: Timestamp,
    pub invalidated_at: Option<Timestamp>,
    pub attributed_to: Vec<Iri>,
    pub primary_source: Option<Iri>,
    pub derived_from: Option<Iri>,
    /// For merge snapshots: the absorbed entity's last live snapshot.
    pub merged_from: Option<Iri>,
    pub update_query: Delta,
    pub kind: SnapshotKind,
}

impl Snapshot {
    pub fn description(&self) -> String {
        let e = self.entity.as_str();
        match (self.kind, &self.primary_source) {
            (SnapshotKind::Creation, _) => format!("The entity '{e}' has been created."),
            (SnapshotKind::Modification, _) => format!("The entity '{e}' has been modified."),
            (SnapshotKind::Merge, Some(other)) => {
                format!(
                    "The entity '{e}' has been merged with '{}'.",
                    other.as_str()
                )
            }
            (SnapshotKind::Merge, None) => format!("The entity '{e}' has been merged."),
            (SnapshotKind::Deletion, _) => format!("The entity '{e}' has been deleted."),
        }
    }
}

pub fn snapshot_iri(entity: &Iri, index: u32) -> Iri {
    Iri::new(format!("{}{SNAPSHOT_SEGMENT}{index}", entity.as_str()))
        .expect("suffix keeps the IRI valid")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvChain {
    pub entity: Iri,
    pub snapshots: Vec<Snapshot>,
}

impl ProvChain {
    pub fn latest(&self) -> &Snapshot {
        self.snapshots.last().expect("chains are never empty")
    }

    pub fn is_live(&self) -> bool {
        self.latest().kind != SnapshotKind::Deletion
    }

    /// Snapshot in force at `time`: the last one generated at or before it.
    pub fn snapshot_at(&self, time: Timestamp) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .take_while(|s| s.generated_at <= time)
            .last()
    }

    /// Forward replay of deltas `1..=k` starting from the empty state.
    pub fn replay(&self, k: usize) -> Dataset {
        let mut state = Dataset::new();
        for s in self.snapshots.iter().take(k) {
            state = state
                .difference(s.update_query.deletes())
                .union(s.update_query.inserts());
        }
        state
    }

    /// Checks every structural chain invariant.
    pub fn validate(&self) -> Result<(), String> {
        if self.snapshots.is_empty() {
            return Err("empty chain".into());
        }
        let last = self.snapshots.len() - 1;
        for (i, s) in self.snapshots.iter().enumerate() {
            let index = i as u32 + 1;
            if s.index != index {
                return Err(format!("index gap at position {index}"));
            }
            if s.entity != self.entity || s.iri != snapshot_iri(&self.entity, index) {
                return Err(format!("snapshot {index} does not belong to the entity"));
            }
            if (index == 1) != (s.kind == SnapshotKind::Creation)
                || (index == 1) != s.derived_from.is_none()
            {
                return Err(format!(
                    "snapshot {index}: creation must be exactly the first snapshot"
                ));
            }
            if index > 1 && s.derived_from.as_ref() != Some(&snapshot_iri(&self.entity, index - 1))
            {
                return Err(format!(
                    "snapshot {index} is not derived from its predecessor"
                ));
            }
            if s.attributed_to.is_empty() {
                return Err(format!("snapshot {index} has no responsible agent"));
            }
            if let Some(inv) = s.invalidated_at {
                if inv < s.generated_at {
                    return Err(format!("snapshot {index} invalidated before generation"));
                }
            }
            if s.kind == SnapshotKind::Deletion
                && (i != last || s.invalidated_at != Some(s.generated_at))
            {
                return Err(format!(
                    "snapshot {index}: deletion must be final and self-invalidating"
                ));
            }
            if i < last {
                let next = &self.snapshots[i + 1];
                if next.generated_at <= s.generated_at {
                    return Err(format!("snapshot {} is not later than {index}", index + 1));
                }
                if s.invalidated_at != Some(next.generated_at) {
                    return Err(format!("snapshot {index} not invalidated by its successor"));
                }
            } else if s.kind != SnapshotKind::Deletion && s.invalidated_at.is_some() {
                return Err("live snapshot is invalidated".into());
            }
            let subject = Subject::Iri(self.entity.clone());
            if s.update_query.quads().any(|q| q.subject != subject) {
                return Err(format!("snapshot {index} touches another entity"));
            }
        }
        Ok(())
    }
}

/// All provenance chains of a catalog.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    chains: BTreeMap<Iri, ProvChain>,
}

impl Provenance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn chain(&self, entity: &Iri) -> Option<&ProvChain> {
        self.chains.get(entity)
    }

    pub fn chains(&self) -> impl Iterator<Item = &ProvChain> + '_ {
        self.chains.values()
    }

    pub fn entities(&self) -> impl Iterator<Item = &Iri> + '_ {
        self.chains.keys()
    }

    pub fn latest_time(&self) -> Option<Timestamp> {
        self.chains.values().map(|c| c.latest().generated_at).max()
    }

    fn live_chain(&self, entity: &Iri) -> Result<&ProvChain, ProvError> {
        let chain = self
            .chains
            .get(entity)
            .ok_or_else(|| ProvError::NoSuchEntity(entity.clone()))?;
        if !chain.is_live() {
            return Err(ProvError::EntityDeleted(entity.clone()));
        }
        Ok(chain)
    }

    fn check_time(chain: &ProvChain, time: Timestamp) -> Result<(), ProvError> {
        let last = chain.latest().generated_at;
        if time <= last {
            return Err(ProvError::NonMonotonicTime {
                entity: chain.entity.clone(),
                last,
                given: time,
            });
        }
        Ok(())
    }

    fn check_subjects<'a>(
        entity: &Iri,
        quads: impl IntoIterator<Item = &'a Quad>,
    ) -> Result<(), ProvError> {
        let subject = Subject::Iri(entity.clone());
        match quads.into_iter().find(|q| q.subject != subject) {
            Some(q) => Err(ProvError::ForeignSubject(Box::new(q.clone()))),
            None => Ok(()),
        }
    }

    fn apply(data: &mut Store, entity: &Iri, delta: &Delta) -> Result<(), ProvError> {
        data.apply_delta(delta, ApplyMode::Strict)
            .map_err(|e| match e {
                StoreError::PreconditionViolation(reason) => ProvError::PreconditionViolation {
                    entity: entity.clone(),
                    reason: Box::new(reason),
                },
                other => unreachable!("in-memory apply cannot fail with {other}"),
            })
    }

    /// Appends a snapshot to a live chain, invalidating its predecessor.
    fn push(&mut self, entity: &Iri, mut snapshot: Snapshot) -> Snapshot {
        let chain = self.chains.get_mut(entity).expect("checked by caller");
        let prev = chain.snapshots.last_mut().expect("chains are never empty");
        prev.invalidated_at = Some(snapshot.generated_at);
        snapshot.index = prev.index + 1;
        snapshot.iri = snapshot_iri(entity, snapshot.index);
        snapshot.derived_from = Some(prev.iri.clone());
        chain.snapshots.push(snapshot.clone());
        snapshot
    }

    pub fn record_creation(
        &mut self,
        data: &mut Store,
        entity: &Iri,
        initial: Dataset,
        agent: &Iri,
        source: Option<&Iri>,
        time: Timestamp,
    ) -> Result<Snapshot, ProvError> {
        if self.chains.contains_key(entity) {
            return Err(ProvError::AlreadyExists(entity.clone()));
        }
        Self::check_subjects(entity, &initial)?;
        let delta = Delta::inserting(initial);
        if let Some(q) = data.entity_state(entity).into_iter().next() {
            return Err(ProvError::PreconditionViolation {
                entity: entity.clone(),
                reason: Box::new(Precondition::PresentInsert(q)),
            });
        }
        Self::apply(data, entity, &delta)?;
        let snapshot = Snapshot {
            iri: snapshot_iri(entity, 1),
            entity: entity.clone(),
            index: 1,
            generated_at: time,
            invalidated_at: None,
            attributed_to: vec![agent.clone()],
            primary_source: source.cloned(),
            derived_from: None,
            merged_from: None,
            update_query: delta,
            kind: SnapshotKind::Creation,
        };
        self.chains.insert(
            entity.clone(),
            ProvChain {
                entity: entity.clone(),
                snapshots: vec![snapshot.clone()],
            },
        );
        Ok(snapshot)
    }

    pub fn record_modification(
        &mut self,
        data: &mut Store,
        entity: &Iri,
        delta: Delta,
        agent: &Iri,
        source: Option<&Iri>,
        time: Timestamp,
    ) -> Result<Snapshot, ProvError> {
        let chain = self.live_chain(entity)?;
        Self::check_time(chain, time)?;
        Self::check_subjects(entity, delta.quads())?;
        Self::apply(data, entity, &delta)?;
        Ok(self.push(
            entity,
            Snapshot {
                iri: entity.clone(),
                entity: entity.clone(),
                index: 0,
                generated_at: time,
                invalidated_at: None,
                attributed_to: vec![agent.clone()],
                primary_source: source.cloned(),
                derived_from: None,
                merged_from: None,
                update_query: delta,
                kind: SnapshotKind::Modification,
            },
        ))
    }

    /// Moves every quad of `absorbed` onto `survivor` (subject rewritten),
    /// then deletes `absorbed`. Quads the survivor already has collapse.
    pub fn record_merge(
        &mut self,
        data: &mut Store,
        survivor: &Iri,
        absorbed: &Iri,
        agent: &Iri,
        source: Option<&Iri>,
        time: Timestamp,
    ) -> Result<(Snapshot, Snapshot), ProvError> {
        if survivor == absorbed {
            return Err(ProvError::SelfMerge(survivor.clone()));
        }
        let survivor_chain = self.live_chain(survivor)?;
        let absorbed_chain = self.live_chain(absorbed)?;
        Self::check_time(survivor_chain, time)?;
        Self::check_time(absorbed_chain, time)?;
        let absorbed_last = absorbed_chain.latest().iri.clone();

        let absorbed_state = data.entity_state(absorbed);
        let rewritten: Dataset = absorbed_state
            .iter()
            .map(|q| q.with_subject(Subject::Iri(survivor.clone())))
            .filter(|q| !data.contains(q))
            .collect();
        let survivor_delta = Delta::inserting(rewritten);
        let absorbed_delta = Delta::deleting(absorbed_state);
        Self::apply(data, survivor, &survivor_delta)?;
        Self::apply(data, absorbed, &absorbed_delta)?;

        let merge = self.push(
            survivor,
            Snapshot {
                iri: survivor.clone(),
                entity: survivor.clone(),
                index: 0,
                generated_at: time,
                invalidated_at: None,
                attributed_to: vec![agent.clone()],
                primary_source: Some(absorbed.clone()),
                derived_from: None,
                merged_from: Some(absorbed_last),
                update_query: survivor_delta,
                kind: SnapshotKind::Merge,
            },
        );
        let deletion = self.push_deletion(absorbed, absorbed_delta, agent, source, time);
        Ok((merge, deletion))
    }

    pub fn record_deletion(
        &mut self,
        data: &mut Store,
        entity: &Iri,
        agent: &Iri,
        source: Option<&Iri>,
        time: Timestamp,
    ) -> Result<Snapshot, ProvError> {
        let chain = self.live_chain(entity)?;
        Self::check_time(chain, time)?;
        let delta = Delta::deleting(data.entity_state(entity));
        Self::apply(data, entity, &delta)?;
        Ok(self.push_deletion(entity, delta, agent, source, time))
    }

    fn push_deletion(
        &mut self,
        entity: &Iri,
        delta: Delta,
        agent: &Iri,
        source: Option<&Iri>,
        time: Timestamp,
    ) -> Snapshot {
        let mut snapshot = self.push(
            entity,
            Snapshot {
                iri: entity.clone(),
                entity: entity.clone(),
                index: 0,
                generated_at: time,
                invalidated_at: Some(time),
                attributed_to: vec![agent.clone()],
                primary_source: source.cloned(),
                derived_from: None,
                merged_from: None,
                update_query: delta,
                kind: SnapshotKind::Deletion,
            },
        );
        snapshot.invalidated_at = Some(time);
        snapshot
    }

    /// Moves the data store from one output of a source (`old`) to the next
    /// (`new`), recording a creation or modification snapshot for every
    /// subject whose quads change. Quads present in the store but absent
    /// from `old` are left alone.
    pub fn record_changes(
        &mut self,
        data: &mut Store,
        old: &Dataset,
        new: &Dataset,
        agent: &Iri,
        source: Option<&Iri>,
        time: Timestamp,
    ) -> Result<ChangeSummary, ProvError> {
        let mut by_subject: BTreeMap<Iri, (Dataset, Dataset)> = BTreeMap::new();
        for (side, dataset) in [(0, old), (1, new)] {
            for q in dataset.iter() {
                let Subject::Iri(s) = &q.subject else {
                    return Err(ProvError::ForeignSubject(Box::new(q.clone())));
                };
                let entry = by_subject.entry(s.clone()).or_default();
                if side == 0 {
                    &mut entry.0
                } else {
                    &mut entry.1
                }
                .insert(q.clone());
            }
        }
        let mut summary = ChangeSummary::default();
        for (entity, (old_s, new_s)) in by_subject {
            let deletes: Dataset = old_s
                .difference(&new_s)
                .iter()
                .filter(|q| data.contains(q))
                .cloned()
                .collect();
            let inserts: Dataset = new_s
                .iter()
                .filter(|q| !data.contains(q))
                .cloned()
                .collect();
            if deletes.is_empty() && inserts.is_empty() {
                continue;
            }
            summary.inserted += inserts.len();
            summary.deleted += deletes.len();
            if self.chains.contains_key(&entity) {
                let delta = Delta::new(deletes, inserts).expect("disjoint by construction");
                self.record_modification(data, &entity, delta, agent, source, time)?;
                summary.modified.push(entity);
            } else {
                self.record_creation(data, &entity, inserts, agent, source, time)?;
                summary.created.push(entity);
            }
        }
        Ok(summary)
    }

    pub fn snapshot_at(&self, entity: &Iri, time: Timestamp) -> Option<&Snapshot> {
        self.chains.get(entity)?.snapshot_at(time)
    }

    /// State of `entity` at `time`, obtained by undoing every later delta
    /// from the entity's current quads in `data`.
    pub fn restore_state(
        &self,
        data: &Store,
        entity: &Iri,
        time: Timestamp,
    ) -> Result<Dataset, ProvError> {
        let chain = self
            .chains
            .get(entity)
            .ok_or_else(|| ProvError::NoSuchEntity(entity.clone()))?;
        let k = chain.snapshot_at(time).map_or(0, |s| s.index as usize);
        let mut state = data.entity_state(entity);
        for s in chain.snapshots[k..].iter().rev() {
            let undo = s.update_query.invert();
            state = state.difference(undo.deletes()).union(undo.inserts());
        }
        Ok(state)
    }

    /// Checks that forward replay of every chain reproduces the entity's
    /// current quads in `data`. Returns the first entity that disagrees.
    pub fn verify_against(&self, data: &Store) -> Result<(), Iri> {
        for chain in self.chains.values() {
            if chain.replay(chain.snapshots.len()) != data.entity_state(&chain.entity) {
                return Err(chain.entity.clone());
            }
        }
        Ok(())
    }

    pub(crate) fn insert_chain(&mut self, chain: ProvChain) {
        self.chains.insert(chain.entity.clone(), chain);
    }
}
