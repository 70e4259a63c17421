use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::Workflow;
use crate::provenance::Provenance;
use crate::rdf::{serialize_nquads, Iri, Subject, Term};
use crate::store::Store;
use crate::vocab::{Role, Vocabulary};

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("{0} has no licence")]
    MissingLicence(Iri),
    #[error("{0} has no asset versions")]
    NoAssets(Iri),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("manifest line {line}: {message}")]
    BadManifest { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Relative, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.txt";

impl Manifest {
    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{}\t{}\t{}\n", e.path, e.sha256, e.bytes))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Manifest, BundleError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let bad = |message: &str| BundleError::BadManifest {
                line: i + 1,
                message: message.to_owned(),
            };
            let mut fields = line.split('\t');
            let (Some(path), Some(sha256), Some(bytes), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(bad("expected path, digest and size"));
            };
            entries.push(ManifestEntry {
                path: path.to_owned(),
                sha256: sha256.to_owned(),
                bytes: bytes.parse().map_err(|_| bad("size is not a number"))?,
            });
        }
        Ok(Manifest { entries })
    }

    /// Paths whose current digest or size differs from the manifest.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>, BundleError> {
        let mut mismatched = Vec::new();
        for e in &self.entries {
            let path = dir.join(&e.path);
            let bytes = fs::read(&path).map_err(|source| BundleError::Io { path, source })?;
            if hex::encode(Sha256::digest(&bytes)) != e.sha256 || bytes.len() as u64 != e.bytes {
                mismatched.push(e.path.clone());
            }
        }
        Ok(mismatched)
    }
}

fn escape(value: &str) -> String {
    value
        .replace('\\', "\\\\")
        .replace('\n', "\\n")
        .replace('\r', "\\r")
}

fn term_text(t: &Term) -> String {
    match t {
        Term::Iri(i) => i.as_str().to_owned(),
        Term::Literal(l) => l.lexical().to_owned(),
        Term::Blank(b) => format!("_:{}", b.label()),
    }
}

/// Writes a deposit package for one DCHO into `out_dir`: asset placeholders,
/// a key=value descriptor, the provenance graph and a digest manifest.
pub fn export_bundle(
    workflow: &Workflow,
    store: &Store,
    provenance: &Provenance,
    vocab: &Vocabulary,
    dcho: &Iri,
    out_dir: &Path,
) -> Result<Manifest, BundleError> {
    let subject = Subject::Iri(dcho.clone());
    let values = |role: Role| -> Vec<String> {
        let mut v: Vec<String> = store
            .subject_predicate_quads(&subject, vocab.term(role))
            .map(|q| term_text(&q.object))
            .collect();
        v.sort();
        v.dedup();
        v
    };
    let licence = store
        .subject_predicate_quads(&subject, vocab.term(Role::Licence))
        .find_map(|q| q.object.as_iri().cloned())
        .ok_or_else(|| BundleError::MissingLicence(dcho.clone()))?;
    let assets: Vec<_> = workflow.assets_of(dcho).collect();
    if assets.is_empty() {
        return Err(BundleError::NoAssets(dcho.clone()));
    }

    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    for a in &assets {
        let local = a.id.as_str().rsplit('/').next().unwrap_or("asset");
        let name = format!("assets/{local}.{}", a.format.to_ascii_lowercase());
        let body = format!(
            "placeholder=true\nasset={}\nkind={}\nformat={}\nsize_bytes={}\nsha256={}\n",
            a.id.as_str(),
            a.kind,
            a.format,
            a.size_bytes,
            a.checksum
        );
        files.push((name, body.into_bytes()));
    }

    let chain = provenance.chain(dcho);
    let mut agents: Vec<String> = values(Role::Creator);
    if let Some(c) = chain {
        agents.extend(
            c.snapshots
                .iter()
                .flat_map(|s| s.attributed_to.iter().map(|a| a.as_str().to_owned())),
        );
    }
    agents.sort();
    agents.dedup();
    let mut descriptor = String::new();
    let mut kv = |k: &str, v: &str| {
        let _ = writeln!(descriptor, "{k}={}", escape(v));
    };
    kv("entity", dcho.as_str());
    kv("title", &values(Role::Title).join("; "));
    kv("identifiers", &values(Role::Identifier).join("; "));
    kv("agents", &agents.join("; "));
    kv("licence", licence.as_str());
    kv("rights_holder", &values(Role::RightsHolder).join("; "));
    if let Some(c) = chain {
        kv("created", &c.snapshots[0].generated_at.to_string());
        kv("modified", &c.latest().generated_at.to_string());
    }
    kv("asset_versions", &assets.len().to_string());
    files.push(("descriptor.txt".into(), descriptor.into_bytes()));

    let prov_text = chain
        .map(|c| serialize_nquads(&c.to_dataset()))
        .unwrap_or_default();
    files.push(("provenance.nq".into(), prov_text.into_bytes()));

    let io = |path: PathBuf| move |source| BundleError::Io { path, source };
    fs::create_dir_all(out_dir.join("assets")).map_err(io(out_dir.join("assets")))?;
    let mut manifest = Manifest::default();
    for (name, bytes) in &files {
        let path = out_dir.join(name);
        fs::write(&path, bytes).map_err(io(path.clone()))?;
        manifest.entries.push(ManifestEntry {
            path: name.clone(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
    }
    let path = out_dir.join(MANIFEST_FILE);
    fs::write(&path, manifest.render()).map_err(io(path.clone()))?;
    Ok(manifest)
}
