//! Application-profile term table.
//!
//! Every predicate and class the catalog reads or writes is looked up here by
//! role, so a deployment can swap individual terms without touching code.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::rdf::{Iri, RDF_TYPE};

pub const HC: &str = "https://w3id.org/heritage-catalog/ns#";
pub const CRM: &str = "http://www.cidoc-crm.org/cidoc-crm/";
pub const CRMDIG: &str = "http://www.ics.forth.gr/isl/CRMdig/";
pub const DCT: &str = "http://purl.org/dc/terms/";
pub const DCAT: &str = "http://www.w3.org/ns/dcat#";
pub const FOAF: &str = "http://xmlns.com/foaf/0.1/";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// Schema the generated metadata records declare conformance to.
pub const APPLICATION_PROFILE: &str = "https://w3id.org/dharc/ontology/chad-ap";

macro_rules! roles {
    ($($variant:ident => $name:literal, $ns:ident, $local:literal;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Role {
            $($variant,)*
        }

        impl Role {
            pub const ALL: &'static [Role] = &[$(Role::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Role::$variant => $name,)*
                }
            }

            pub fn default_iri(self) -> String {
                match self {
                    $(Role::$variant => format!("{}{}", $ns, $local),)*
                }
            }
        }
    };
}

roles! {
    ChoClass => "cho_class", CRM, "E22_Human-Made_Object";
    DchoClass => "dcho_class", CRMDIG, "D1_Digital_Object";
    Title => "title", DCT, "title";
    Identifier => "identifier", DCT, "identifier";
    Licence => "licence", DCT, "license";
    RightsHolder => "rights_holder", DCT, "rightsHolder";
    AccessRights => "access_rights", DCT, "accessRights";
    Creator => "creator", DCT, "creator";
    Keeper => "keeper", CRM, "P50_has_current_keeper";
    Registration => "registration", DCT, "isReferencedBy";
    ConformsTo => "conforms_to", DCT, "conformsTo";
    HasFormat => "has_format", DCT, "hasFormat";
    PrimaryTopic => "primary_topic", FOAF, "primaryTopic";
    StorageLocation => "storage_location", HC, "storageLocation";
    BackupLocation => "backup_location", HC, "backupLocation";
    AccessUrl => "access_url", DCAT, "accessURL";
    CounterpartOf => "counterpart_of", HC, "digitalCounterpartOf";
    PhaseClass => "phase_class", CRM, "E7_Activity";
    PhaseKind => "phase_kind", HC, "phaseKind";
    PhaseOf => "phase_of", HC, "phaseOf";
    Unit => "unit", HC, "unit";
    CarriedOutBy => "carried_out_by", CRM, "P14_carried_out_by";
    Technique => "technique", HC, "technique";
    Tool => "tool", HC, "tool";
    StartDate => "start_date", HC, "startDate";
    EndDate => "end_date", HC, "endDate";
    UsedAsset => "used_asset", HC, "usedAsset";
    AssetClass => "asset_class", HC, "AssetVersion";
    VersionOf => "version_of", HC, "versionOf";
    AssetKind => "asset_kind", HC, "assetKind";
    Format => "format", DCT, "format";
    SizeBytes => "size_bytes", HC, "sizeBytes";
    PolygonCount => "polygon_count", HC, "polygonCount";
    TextureWidth => "texture_width", HC, "textureWidth";
    TextureHeight => "texture_height", HC, "textureHeight";
    TextureFormat => "texture_format", HC, "textureFormat";
    Checksum => "checksum", HC, "checksum";
    ProducedBy => "produced_by", HC, "producedBy";
    UploadClass => "upload_class", HC, "Upload";
    UploadOf => "upload_of", HC, "uploadOf";
    SceneId => "scene_id", HC, "sceneId";
    UploadTarget => "upload_target", HC, "uploadTarget";
    UploadedAt => "uploaded_at", HC, "uploadedAt";
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VocabError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown role {role:?}")]
    UnknownRole { line: usize, role: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: BTreeMap<Role, Iri>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        let terms = Role::ALL
            .iter()
            .map(|&r| {
                (
                    r,
                    Iri::new(r.default_iri()).expect("default terms are valid IRIs"),
                )
            })
            .collect();
        Vocabulary { terms }
    }
}

impl Vocabulary {
    pub fn term(&self, role: Role) -> &Iri {
        &self.terms[&role]
    }

    pub fn set(&mut self, role: Role, iri: Iri) {
        self.terms.insert(role, iri);
    }

    /// Applies `role = iri` override lines; `#` starts a comment.
    pub fn with_overrides(mut self, text: &str) -> Result<Self, VocabError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (name, value) = content.split_once('=').ok_or_else(|| VocabError::Syntax {
                line,
                message: "expected role = iri".into(),
            })?;
            let name = name.trim();
            let role = Role::ALL
                .iter()
                .copied()
                .find(|r| r.name() == name)
                .ok_or_else(|| VocabError::UnknownRole {
                    line,
                    role: name.to_owned(),
                })?;
            let value = value.trim();
            let value = value
                .strip_prefix('<')
                .and_then(|v| v.strip_suffix('>'))
                .unwrap_or(value);
            let iri = Iri::new(value).map_err(|e| VocabError::Syntax {
                line,
                message: e.to_string(),
            })?;
            self.set(role, iri);
        }
        Ok(self)
    }

    pub fn rdf_type() -> Iri {
        Iri::new(RDF_TYPE).expect("static IRI")
    }
}

pub fn xsd(local: &str) -> Iri {
    Iri::new(format!("{XSD}{local}")).expect("static IRI")
}

/// IRI scheme for objects, records and workflow entities under a base IRI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Naming {
    base: String,
}

impl Naming {
    /// `base` must be an absolute IRI ending in `/`.
    pub fn new(base: &str) -> Option<Self> {
        (base.ends_with('/') && Iri::new(base).is_ok()).then(|| Naming {
            base: base.to_owned(),
        })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn mint(&self, path: &str) -> Iri {
        Iri::new(format!("{}{path}", self.base)).expect("base IRI plus encoded path")
    }

    pub fn cho(&self, id: &str) -> Iri {
        self.mint(&format!("cho/{}", encode_segment(id)))
    }

    pub fn dcho(&self, id: &str) -> Iri {
        self.mint(&format!("dcho/{}", encode_segment(id)))
    }

    pub fn cho_record(&self, id: &str) -> Iri {
        self.mint(&format!("record/cho/{}", encode_segment(id)))
    }

    pub fn dcho_record(&self, id: &str) -> Iri {
        self.mint(&format!("record/dcho/{}", encode_segment(id)))
    }

    pub fn phase(&self, id: &str, phase: &str) -> Iri {
        self.mint(&format!(
            "phase/{}/{}",
            encode_segment(id),
            encode_segment(phase)
        ))
    }

    pub fn asset(&self, id: &str) -> Iri {
        self.mint(&format!("asset/{}", encode_segment(id)))
    }

    pub fn upload(&self, id: &str) -> Iri {
        self.mint(&format!("upload/{}", encode_segment(id)))
    }

    pub fn agent(&self, name: &str) -> Iri {
        self.mint(&format!("agent/{}", encode_segment(name)))
    }

    pub fn catalogue(&self) -> Iri {
        self.mint("catalogue")
    }

    /// Encoded local id of an IRI minted by [`Naming::cho`] or [`Naming::dcho`].
    pub fn object_id<'a>(&self, object: &'a Iri) -> Option<&'a str> {
        let rest = object.as_str().strip_prefix(&self.base)?;
        rest.strip_prefix("cho/")
            .or_else(|| rest.strip_prefix("dcho/"))
    }

    /// Record graph of an object minted under this base.
    pub fn record_of(&self, object: &Iri) -> Option<Iri> {
        let rest = object.as_str().strip_prefix(&self.base)?;
        (rest.starts_with("cho/") || rest.starts_with("dcho/"))
            .then(|| self.mint(&format!("record/{rest}")))
    }
}

fn encode_segment(text: &str) -> String {
    use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
    const SAFE: &percent_encoding::AsciiSet = &NON_ALPHANUMERIC
        .remove(b'-')
        .remove(b'.')
        .remove(b'_')
        .remove(b'~');
    utf8_percent_encode(text, SAFE).to_string()
}

const PREFIXES: [(&str, &str); 7] = [
    ("hc", HC),
    ("crm", CRM),
    ("crmdig", CRMDIG),
    ("dct", DCT),
    ("dcat", DCAT),
    ("foaf", FOAF),
    ("xsd", XSD),
];

fn compact(iri: &Iri) -> String {
    for (label, ns) in PREFIXES {
        if let Some(local) = iri.as_str().strip_prefix(ns) {
            if !local.is_empty()
                && local
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || "_-".contains(c))
            {
                return format!("{label}:{local}");
            }
        }
    }
    format!("<{}>", iri.as_str())
}

/// Columns the bibliographic table must provide.
pub const BIBLIOGRAPHIC_COLUMNS: [&str; 11] = [
    "id",
    "title",
    "author",
    "keeper",
    "rights_holder",
    "licence",
    "access_rights",
    "digitiser",
    "storage",
    "backup",
    "access_url",
];

/// Mapping that turns one bibliographic row into a CHO record graph and a
/// DCHO record graph.
pub fn bibliographic_mapping(vocab: &Vocabulary, naming: &Naming, table: &str) -> String {
    let t = |r: Role| compact(vocab.term(r));
    let mut out = String::from("prefixes:\n");
    for (label, ns) in PREFIXES {
        let _ = writeln!(out, "  {label}: {ns}");
    }
    let _ = writeln!(out, "  cat: {}", naming.base());
    out.push_str("mappings:\n");

    let record = |out: &mut String, name: &str, kind: &str| {
        let _ = writeln!(out, "  {name}_record:");
        let _ = writeln!(out, "    sources: [{table}]");
        let _ = writeln!(out, "    g: cat:record/{kind}/$(id)");
        let _ = writeln!(out, "    s: cat:record/{kind}/$(id)");
        out.push_str("    po:\n");
        let _ = writeln!(
            out,
            "      - [{}, cat:{kind}/$(id)~iri]",
            t(Role::PrimaryTopic)
        );
        let _ = writeln!(out, "      - [{}, $(licence)~iri]", t(Role::Licence));
        let _ = writeln!(
            out,
            "      - [{}, <{APPLICATION_PROFILE}>~iri]",
            t(Role::ConformsTo)
        );
        let _ = writeln!(
            out,
            "      - [{}, \"application/n-quads\"]",
            t(Role::HasFormat)
        );
        let _ = writeln!(out, "      - [{}, \"text/csv\"]", t(Role::HasFormat));
    };
    let common = |out: &mut String| {
        let _ = writeln!(out, "      - [{}, $(title)]", t(Role::Title));
        let _ = writeln!(out, "      - [{}, $(id)]", t(Role::Identifier));
        let _ = writeln!(out, "      - [{}, $(keeper)~iri]", t(Role::Keeper));
        let _ = writeln!(
            out,
            "      - [{}, $(rights_holder)~iri]",
            t(Role::RightsHolder)
        );
        let _ = writeln!(out, "      - [{}, $(licence)~iri]", t(Role::Licence));
        let _ = writeln!(out, "      - [{}, $(access_rights)]", t(Role::AccessRights));
        let _ = writeln!(
            out,
            "      - [{}, cat:catalogue~iri]",
            t(Role::Registration)
        );
    };

    let _ = writeln!(out, "  cho:");
    let _ = writeln!(out, "    sources: [{table}]");
    let _ = writeln!(out, "    g: cat:record/cho/$(id)");
    let _ = writeln!(out, "    s: cat:cho/$(id)");
    out.push_str("    po:\n");
    let _ = writeln!(out, "      - [a, {}~iri]", t(Role::ChoClass));
    common(&mut out);
    let _ = writeln!(out, "      - [{}, $(author)~iri]", t(Role::Creator));
    record(&mut out, "cho", "cho");

    let _ = writeln!(out, "  dcho:");
    let _ = writeln!(out, "    sources: [{table}]");
    let _ = writeln!(out, "    g: cat:record/dcho/$(id)");
    let _ = writeln!(out, "    s: cat:dcho/$(id)");
    out.push_str("    po:\n");
    let _ = writeln!(out, "      - [a, {}~iri]", t(Role::DchoClass));
    common(&mut out);
    let _ = writeln!(out, "      - [{}, $(digitiser)~iri]", t(Role::Creator));
    let _ = writeln!(out, "      - [{}, $(storage)]", t(Role::StorageLocation));
    let _ = writeln!(out, "      - [{}, $(backup)]", t(Role::BackupLocation));
    let _ = writeln!(out, "      - [{}, $(access_url)~iri]", t(Role::AccessUrl));
    let _ = writeln!(
        out,
        "      - [{}, cat:cho/$(id)~iri]",
        t(Role::CounterpartOf)
    );
    record(&mut out, "dcho", "dcho");
    out
}
