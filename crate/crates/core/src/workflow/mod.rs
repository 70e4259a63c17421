//! Digitisation workflow: phase registration, asset versions, format and size
//! constraints, storage accounting and deposit bundles.

mod bundle;
mod constraints;
mod process;
mod storage;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use thiserror::Error;

use crate::provenance::Timestamp;
use crate::rdf::Iri;

pub use bundle::{export_bundle, BundleError, Manifest, ManifestEntry, MANIFEST_FILE};
pub use constraints::{format_allowed, validate_asset, ConstraintProfile, Violation};
pub use process::{ingest_process_table, process_dataset, ProcessData, PROCESS_COLUMNS};
pub use storage::{storage_report, StorageReport, StorageRow};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkflowError {
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("line {line}: bad date {cell:?}")]
    BadDate { line: usize, cell: String },
    #[error("line {line}: unknown phase {value:?}")]
    UnknownPhase { line: usize, value: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("{kind} for {cho} requires a completed {missing} phase")]
    OutOfOrder {
        cho: Iri,
        kind: PhaseKind,
        missing: PhaseKind,
    },
    #[error("no such object {0}")]
    NoSuchObject(Iri),
    #[error("malformed workflow data on {subject}: {message}")]
    Malformed { subject: Iri, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PhaseKind {
    Acquisition,
    Processing,
    Modelling,
    Optimisation,
    Export,
    MetadataCreation,
    ProvenanceCreation,
    Upload,
}

impl PhaseKind {
    /// Canonical order.
    pub const ALL: [PhaseKind; 8] = [
        PhaseKind::Acquisition,
        PhaseKind::Processing,
        PhaseKind::Modelling,
        PhaseKind::Optimisation,
        PhaseKind::Export,
        PhaseKind::MetadataCreation,
        PhaseKind::ProvenanceCreation,
        PhaseKind::Upload,
    ];

    /// Step number; metadata and provenance creation share step 6.
    pub fn rank(self) -> u8 {
        match self {
            PhaseKind::Acquisition => 1,
            PhaseKind::Processing => 2,
            PhaseKind::Modelling => 3,
            PhaseKind::Optimisation => 4,
            PhaseKind::Export => 5,
            PhaseKind::MetadataCreation | PhaseKind::ProvenanceCreation => 6,
            PhaseKind::Upload => 7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PhaseKind::Acquisition => "acquisition",
            PhaseKind::Processing => "processing",
            PhaseKind::Modelling => "modelling",
            PhaseKind::Optimisation => "optimisation",
            PhaseKind::Export => "export",
            PhaseKind::MetadataCreation => "metadata_creation",
            PhaseKind::ProvenanceCreation => "provenance_creation",
            PhaseKind::Upload => "upload",
        }
    }
}

impl fmt::Display for PhaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhaseKind {
    type Err = String;

    /// Case-insensitive; spaces and hyphens count as underscores.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .trim()
            .chars()
            .map(|c| {
                if c == ' ' || c == '-' {
                    '_'
                } else {
                    c.to_ascii_lowercase()
                }
            })
            .collect();
        PhaseKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseRecord {
    pub cho: Iri,
    pub kind: PhaseKind,
    pub unit: String,
    pub agents: Vec<Iri>,
    /// Acquisition only, e.g. `photogrammetry` or `SLS`.
    pub technique: Option<String>,
    pub tools: Vec<String>,
    pub start: NaiveDate,
    /// Absent while the phase is in progress.
    pub end: Option<NaiveDate>,
    pub inputs: Vec<Iri>,
    pub outputs: Vec<Iri>,
}

impl PhaseRecord {
    pub fn is_complete(&self) -> bool {
        self.end.is_some()
    }

    pub fn check(&self) -> Result<(), String> {
        if self.agents.is_empty() {
            return Err("a phase needs at least one agent".into());
        }
        if let Some(end) = self.end {
            if end < self.start {
                return Err(format!("end {end} precedes start {}", self.start));
            }
        }
        let has_technique = self.technique.as_deref().is_some_and(|t| !t.is_empty());
        match (self.kind == PhaseKind::Acquisition, has_technique) {
            (true, false) => Err("acquisition needs a technique".into()),
            (false, true) => Err(format!(
                "technique only applies to acquisition, not {}",
                self.kind
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AssetKind {
    RawMaterial,
    ProcessedRaw,
    HighPoly,
    Optimised,
    Documentation,
}

impl AssetKind {
    pub const ALL: [AssetKind; 5] = [
        AssetKind::RawMaterial,
        AssetKind::ProcessedRaw,
        AssetKind::HighPoly,
        AssetKind::Optimised,
        AssetKind::Documentation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AssetKind::RawMaterial => "raw_material",
            AssetKind::ProcessedRaw => "processed_raw",
            AssetKind::HighPoly => "high_poly",
            AssetKind::Optimised => "optimised",
            AssetKind::Documentation => "documentation",
        }
    }
}

impl fmt::Display for AssetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AssetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        AssetKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssetVersion {
    pub id: Iri,
    pub dcho: Iri,
    pub kind: AssetKind,
    /// Uppercase extension token such as `GLB`.
    pub format: String,
    pub size_bytes: u64,
    pub polygon_count: Option<u64>,
    pub texture_width: Option<u32>,
    pub texture_height: Option<u32>,
    pub texture_format: Option<String>,
    pub checksum: String,
}

impl AssetVersion {
    pub fn check(&self) -> Result<(), String> {
        if self.format.is_empty()
            || !self
                .format
                .chars()
                .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit())
        {
            return Err(format!(
                "format {:?} is not an uppercase extension token",
                self.format
            ));
        }
        if self.checksum.is_empty() || !self.checksum.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(format!("checksum {:?} is not a hex digest", self.checksum));
        }
        if self.kind == AssetKind::Optimised && self.polygon_count.is_none() {
            return Err("optimised assets need a polygon count".into());
        }
        if self.kind == AssetKind::Documentation && self.polygon_count.is_some() {
            return Err("documentation assets carry no polygon count".into());
        }
        if self.polygon_count == Some(0)
            || self.texture_width == Some(0)
            || self.texture_height == Some(0)
        {
            return Err("polygon and texture counts must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UploadRecord {
    pub dcho: Iri,
    pub scene_id: String,
    pub target: String,
    pub time: Timestamp,
}

impl UploadRecord {
    pub fn check(&self) -> Result<(), String> {
        if self.scene_id.is_empty() || !self.scene_id.chars().all(|c| c.is_ascii_alphanumeric()) {
            return Err(format!("scene id {:?} is not alphanumeric", self.scene_id));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseStatus {
    Absent,
    InProgress,
    Complete,
}

impl fmt::Display for PhaseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseStatus::Absent => "absent",
            PhaseStatus::InProgress => "in_progress",
            PhaseStatus::Complete => "complete",
        })
    }
}

/// Workflow state of a catalog.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Workflow {
    objects: BTreeSet<Iri>,
    phases: BTreeMap<Iri, BTreeMap<PhaseKind, PhaseRecord>>,
    assets: BTreeMap<Iri, AssetVersion>,
    uploads: BTreeMap<Iri, UploadRecord>,
    counterparts: BTreeMap<Iri, Iri>,
}

impl Workflow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_object(&mut self, cho: Iri) {
        self.objects.insert(cho);
    }

    /// Records that `dcho` digitises `cho`.
    pub fn link_counterpart(&mut self, dcho: Iri, cho: Iri) {
        self.objects.insert(cho.clone());
        self.counterparts.insert(dcho, cho);
    }

    pub fn counterpart(&self, dcho: &Iri) -> Option<&Iri> {
        self.counterparts.get(dcho)
    }

    pub fn objects(&self) -> impl Iterator<Item = &Iri> + '_ {
        self.objects.iter()
    }

    /// Stores a phase once its predecessor step is complete. A record for the
    /// same object and kind replaces the earlier one.
    pub fn register_phase(&mut self, record: PhaseRecord) -> Result<(), WorkflowError> {
        let rank = record.kind.rank();
        if rank > 1 {
            let done = self.phases.get(&record.cho).is_some_and(|by_kind| {
                by_kind
                    .values()
                    .any(|p| p.kind.rank() == rank - 1 && p.is_complete())
            });
            if !done {
                let missing = PhaseKind::ALL
                    .into_iter()
                    .find(|k| k.rank() == rank - 1)
                    .expect("every rank above 1 has a predecessor");
                return Err(WorkflowError::OutOfOrder {
                    cho: record.cho,
                    kind: record.kind,
                    missing,
                });
            }
        }
        self.objects.insert(record.cho.clone());
        self.phases
            .entry(record.cho.clone())
            .or_default()
            .insert(record.kind, record);
        Ok(())
    }

    /// Registers phases in canonical order, so table row order is irrelevant.
    pub fn register_all(&mut self, mut records: Vec<PhaseRecord>) -> Result<(), WorkflowError> {
        records.sort_by_key(|r| r.kind.rank());
        records.into_iter().try_for_each(|r| self.register_phase(r))
    }

    pub fn phases(&self, cho: &Iri) -> impl Iterator<Item = &PhaseRecord> + '_ {
        self.phases.get(cho).into_iter().flat_map(|m| m.values())
    }

    pub fn all_phases(&self) -> impl Iterator<Item = &PhaseRecord> + '_ {
        self.phases.values().flat_map(|m| m.values())
    }

    pub fn add_asset(&mut self, asset: AssetVersion) {
        self.assets.insert(asset.id.clone(), asset);
    }

    pub fn assets(&self) -> impl Iterator<Item = &AssetVersion> + '_ {
        self.assets.values()
    }

    pub fn assets_of<'a>(&'a self, dcho: &'a Iri) -> impl Iterator<Item = &'a AssetVersion> + 'a {
        self.assets.values().filter(move |a| &a.dcho == dcho)
    }

    pub fn add_upload(&mut self, upload: UploadRecord) {
        self.uploads.insert(upload.dcho.clone(), upload);
    }

    pub fn upload(&self, dcho: &Iri) -> Option<&UploadRecord> {
        self.uploads.get(dcho)
    }

    pub fn uploads(&self) -> impl Iterator<Item = &UploadRecord> + '_ {
        self.uploads.values()
    }

    /// Acquisition technique of the object a DCHO digitises.
    pub fn technique_for(&self, dcho: &Iri) -> Option<&str> {
        let cho = self.counterparts.get(dcho)?;
        self.phases
            .get(cho)?
            .get(&PhaseKind::Acquisition)?
            .technique
            .as_deref()
    }

    pub fn workflow_status(
        &self,
        cho: &Iri,
    ) -> Result<Vec<(PhaseKind, PhaseStatus)>, WorkflowError> {
        if !self.objects.contains(cho) {
            return Err(WorkflowError::NoSuchObject(cho.clone()));
        }
        let recorded = self.phases.get(cho);
        Ok(PhaseKind::ALL
            .into_iter()
            .map(|k| {
                let status = match recorded.and_then(|m| m.get(&k)) {
                    None => PhaseStatus::Absent,
                    Some(p) if p.is_complete() => PhaseStatus::Complete,
                    Some(_) => PhaseStatus::InProgress,
                };
                (k, status)
            })
            .collect())
    }

    /// Violations of every recorded asset, keyed by asset IRI.
    pub fn validate_all(&self, profile: &ConstraintProfile) -> Vec<(Iri, Violation)> {
        self.assets
            .values()
            .flat_map(|a| {
                validate_asset(a, profile, self.technique_for(&a.dcho))
                    .into_iter()
                    .map(|v| (a.id.clone(), v))
            })
            .collect()
    }
}
