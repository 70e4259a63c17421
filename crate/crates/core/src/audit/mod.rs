//! Three-level FAIR checklist: digital objects, metadata about objects, and
//! the metadata records themselves.

mod checks;
mod render;

use std::collections::BTreeMap;
use std::fmt;

use crate::rdf::Iri;
use crate::vocab::{Role, Vocabulary};
use crate::workflow::ConstraintProfile;

pub use checks::run_audit;
pub use render::{render_report, report_dataset, ReportFormat, UnknownFormat, EARL, REPORT_GRAPH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Object,
    ObjectMetadata,
    MetadataRecord,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Object, Level::ObjectMetadata, Level::MetadataRecord];

    pub fn name(self) -> &'static str {
        match self {
            Level::Object => "object",
            Level::ObjectMetadata => "object_metadata",
            Level::MetadataRecord => "metadata_record",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Facet {
    F,
    A,
    I,
    R,
}

impl Facet {
    pub const ALL: [Facet; 4] = [Facet::F, Facet::A, Facet::I, Facet::R];

    pub fn letter(self) -> char {
        match self {
            Facet::F => 'F',
            Facet::A => 'A',
            Facet::I => 'I',
            Facet::R => 'R',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Check {
    pub id: &'static str,
    pub level: Level,
    pub facet: Facet,
    pub description: &'static str,
    /// Checklist wording the predicate operationalises.
    pub anchor: &'static str,
}

macro_rules! registry {
    ($($id:literal, $level:ident, $facet:ident, $desc:literal, $anchor:literal;)*) => {
        const REGISTRY: &[Check] = &[
            $(Check { id: $id, level: Level::$level, facet: Facet::$facet, description: $desc, anchor: $anchor },)*
        ];
    };
}

registry! {
    "OBJ-F1", Object, F, "object has an IRI-form persistent identifier", "globally unique persistent identifier";
    "OBJ-F2", Object, F, "object has at least one descriptive quad", "described with metadata";
    "OBJ-A1", Object, A, "storage location recorded", "sustainable storage (hardware, storage medium)";
    "OBJ-A2", Object, A, "access IRI uses an open scheme", "open universal access protocols";
    "OBJ-A3", Object, A, "at least one asset version recorded", "version management";
    "OBJ-A4", Object, A, "backup location recorded", "Backups";
    "OBJ-I1", Object, I, "every asset format is on the profile's lists", "preferred or acceptable formats";
    "OBJ-R1", Object, R, "timestamp interval recorded", "have a date-timestamp";
    "OBJ-R2", Object, R, "licence IRI recorded", "licence for reuse, which is also available in a machine readable form";
    "MET-F1", ObjectMetadata, F, "metadata contains the object's PID", "metadata specify the global persistent identifier (PID) of the object";
    "MET-F2", ObjectMetadata, F, "catalogue registration quad exists", "available via one or more searchable online repositories";
    "MET-A1", ObjectMetadata, A, "access-rights statement present", "availability, obtainability and/or access options";
    "MET-I1", ObjectMetadata, I, "schema declaration present", "at least in one metadata schema";
    "MET-I2", ObjectMetadata, I, "at least two serializations listed", "various additional generic standard data formats";
    "MET-I3", ObjectMetadata, I, "at least one authority-file link", "references to other objects/authority files";
    "MET-R1", ObjectMetadata, R, "rights holder present", "specify the object's rights holder";
    "MET-R2", ObjectMetadata, R, "licence statement present", "licence information referring to the object";
    "MET-R3", ObjectMetadata, R, "holding institution and production agents present", "specify the object's provenance";
    "REC-F1", MetadataRecord, F, "record graph has its own IRI", "their own global persistent identifier";
    "REC-A1", MetadataRecord, A, "record round-trips through N-Quads", "machine readable";
    "REC-A2", MetadataRecord, A, "record retrievable through the query interface", "accessible using open universal protocols";
    "REC-I1", MetadataRecord, I, "required-field coverage meets the threshold", "of sufficient quality";
    "REC-R1", MetadataRecord, R, "snapshot chain with agent, time and source", "specify the metadata record's provenance";
    "REC-R2", MetadataRecord, R, "responsible agent on the latest snapshot", "entity responsible for the metadata record";
    "REC-R3", MetadataRecord, R, "record licence IRI present", "their own licence for reuse";
}

/// The fixed check registry, in presentation order.
pub fn check_registry() -> &'static [Check] {
    REGISTRY
}

pub fn find_check(id: &str) -> Option<&'static Check> {
    REGISTRY.iter().find(|c| c.id == id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::NotApplicable => "not_applicable",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub check_id: &'static str,
    pub subject: Iri,
    pub outcome: Outcome,
    pub evidence: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub not_applicable: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FairReport {
    pub results: Vec<CheckResult>,
    pub summary: BTreeMap<(Level, Facet), Tally>,
}

impl FairReport {
    /// Sorts results by (subject, check id) and recomputes the summary.
    pub fn from_results(mut results: Vec<CheckResult>) -> Self {
        results.sort_by(|a, b| a.subject.cmp(&b.subject).then(a.check_id.cmp(b.check_id)));
        let mut summary: BTreeMap<(Level, Facet), Tally> = Level::ALL
            .iter()
            .flat_map(|&l| Facet::ALL.iter().map(move |&f| ((l, f), Tally::default())))
            .collect();
        for r in &results {
            let check = find_check(r.check_id).expect("results only name registered checks");
            let tally = summary
                .get_mut(&(check.level, check.facet))
                .expect("all cells present");
            match r.outcome {
                Outcome::Pass => tally.pass += 1,
                Outcome::Fail => tally.fail += 1,
                Outcome::NotApplicable => tally.not_applicable += 1,
            }
        }
        FairReport { results, summary }
    }

    pub fn fails(&self) -> impl Iterator<Item = &CheckResult> + '_ {
        self.results.iter().filter(|r| r.outcome == Outcome::Fail)
    }

    pub fn has_failures(&self) -> bool {
        self.fails().next().is_some()
    }
}

/// Tunable parts of the audit.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditProfile {
    pub constraints: ConstraintProfile,
    /// Hosts (or parent domains) counted as authority files.
    pub authority_domains: Vec<String>,
    /// Schemes accepted as open access protocols.
    pub access_schemes: Vec<String>,
    /// Predicates a record's topic should carry.
    pub required_fields: Vec<Iri>,
    pub quality_threshold: f64,
}

impl Default for AuditProfile {
    fn default() -> Self {
        AuditProfile::new(&Vocabulary::default())
    }
}

impl AuditProfile {
    pub fn new(vocab: &Vocabulary) -> Self {
        let mut required_fields = vec![Vocabulary::rdf_type()];
        required_fields.extend(
            [
                Role::Title,
                Role::Licence,
                Role::RightsHolder,
                Role::AccessRights,
            ]
            .map(|r| vocab.term(r).clone()),
        );
        AuditProfile {
            constraints: ConstraintProfile::default(),
            authority_domains: ["viaf.org", "getty.edu", "wikidata.org"]
                .map(String::from)
                .to_vec(),
            access_schemes: vec!["http".into(), "https".into()],
            required_fields,
            quality_threshold: 0.8,
        }
    }

    pub fn is_authority(&self, iri: &Iri) -> bool {
        iri.host().is_some_and(|host| {
            let host = host.to_ascii_lowercase();
            self.authority_domains
                .iter()
                .any(|d| host == *d || host.ends_with(&format!(".{d}")))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn registry_shape() {
        let ids: BTreeSet<_> = REGISTRY.iter().map(|c| c.id).collect();
        assert_eq!(ids.len(), REGISTRY.len());
        assert!(REGISTRY.iter().all(|c| !c.anchor.is_empty()));
        for c in REGISTRY {
            let prefix = match c.level {
                Level::Object => "OBJ-",
                Level::ObjectMetadata => "MET-",
                Level::MetadataRecord => "REC-",
            };
            assert!(c.id.starts_with(prefix));
            assert_eq!(c.id.chars().nth(4), Some(c.facet.letter()));
        }
    }

    #[test]
    fn authority_matching() {
        let p = AuditProfile::default();
        assert!(p.is_authority(&Iri::new("http://www.wikidata.org/entity/Q1").unwrap()));
        assert!(p.is_authority(&Iri::new("https://viaf.org/viaf/1").unwrap()));
        assert!(!p.is_authority(&Iri::new("https://notviaf.org/x").unwrap()));
        assert!(!p.is_authority(&Iri::new("urn:isbn:1").unwrap()));
    }
}
