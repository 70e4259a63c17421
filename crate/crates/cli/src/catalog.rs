//! Catalog directory layout and its `key = value` configuration file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use heritage_core::audit::AuditProfile;
use heritage_core::provenance::{Provenance, Timestamp};
use heritage_core::rdf::{parse_nquads, serialize_nquads, Iri};
use heritage_core::store::{write_atomically, Store};
use heritage_core::vocab::{Naming, Role, Vocabulary};
use heritage_core::workflow::{ConstraintProfile, Workflow};

use crate::{Coded, Failure, SETUP};

pub const DATA_FILE: &str = "data.nq";
pub const PROV_FILE: &str = "prov.nq";
pub const CONFIG_FILE: &str = "catalog.cfg";
pub const TABLES_DIR: &str = "tables";
pub const MAPPINGS_DIR: &str = "mappings";
pub const BUNDLES_DIR: &str = "bundles";
pub const DEFAULT_BASE: &str = "https://w3id.org/example-catalog/";
pub const DEFAULT_PORT: u16 = 7878;

#[derive(Debug, Clone)]
pub struct Config {
    pub base_iri: String,
    /// Agent name (minted under the base) or absolute IRI.
    pub agent: String,
    pub vocab: Vocabulary,
    pub audit: AuditProfile,
    pub endpoint_port: u16,
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

impl Config {
    pub fn parse(text: &str) -> anyhow::Result<Config> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
            entries.push((i + 1, key.trim(), value.trim()));
        }

        let mut vocab = Vocabulary::default();
        for &(line, key, value) in &entries {
            let Some(name) = key.strip_prefix("term.") else {
                continue;
            };
            let role = Role::ALL
                .iter()
                .copied()
                .find(|r| r.name() == name)
                .ok_or_else(|| anyhow!("line {line}: unknown term role {name:?}"))?;
            let value = value
                .strip_prefix('<')
                .and_then(|v| v.strip_suffix('>'))
                .unwrap_or(value);
            vocab.set(
                role,
                Iri::new(value).map_err(|e| anyhow!("line {line}: {e}"))?,
            );
        }

        let mut config = Config {
            base_iri: DEFAULT_BASE.into(),
            agent: "cataloguer".into(),
            audit: AuditProfile::new(&vocab),
            vocab,
            endpoint_port: DEFAULT_PORT,
        };
        for &(line, key, value) in &entries {
            let at = |e: String| anyhow!("line {line}: {e}");
            match key {
                k if k.starts_with("term.") => {}
                "base_iri" => {
                    Naming::new(value).ok_or_else(|| {
                        at(format!(
                            "base_iri {value:?} must be absolute and end in '/'"
                        ))
                    })?;
                    config.base_iri = value.into();
                }
                "agent" => {
                    if value.is_empty() {
                        return Err(at("agent must not be empty".into()));
                    }
                    config.agent = value.into();
                }
                "authority_domains" => config.audit.authority_domains = list(value),
                "access_schemes" => config.audit.access_schemes = list(value),
                "quality_threshold" => {
                    let t: f64 = value
                        .parse()
                        .map_err(|_| at(format!("quality_threshold {value:?} is not a number")))?;
                    if !(0.0..=1.0).contains(&t) {
                        return Err(at("quality_threshold must lie in [0, 1]".into()));
                    }
                    config.audit.quality_threshold = t;
                }
                "endpoint_port" => {
                    config.endpoint_port = value
                        .parse()
                        .map_err(|_| at(format!("endpoint_port {value:?} is not a port")))?
                }
                _ => config.audit.constraints.set(key, value).map_err(at)?,
            }
        }
        Ok(config)
    }

    /// Default configuration file contents, listing every setting.
    pub fn default_text(base_iri: &str) -> String {
        let p = AuditProfile::default();
        let c = ConstraintProfile::default();
        let join = |s: &std::collections::BTreeSet<String>| {
            s.iter().cloned().collect::<Vec<_>>().join(",")
        };
        format!(
            "# heritage catalog settings\n\
             base_iri = {base_iri}\n\
             agent = cataloguer\n\
             authority_domains = {}\n\
             access_schemes = {}\n\
             quality_threshold = {}\n\
             endpoint_port = {DEFAULT_PORT}\n\
             \n\
             # asset limits\n\
             scanned_polygons_min = {}\n\
             scanned_polygons_max = {}\n\
             texture_max_px = {}\n\
             sls_processed_max_bytes = {}\n\
             optimised_formats = {}\n\
             high_poly_formats = {}\n\
             texture_formats = {}\n\
             raw_photogrammetry_formats = {}\n\
             raw_sls_formats = {}\n\
             \n\
             # vocabulary overrides: term.<role> = <iri>\n\
             # term.licence = http://purl.org/dc/terms/license\n",
            p.authority_domains.join(","),
            p.access_schemes.join(","),
            p.quality_threshold,
            c.scanned_polygons_min,
            c.scanned_polygons_max,
            c.texture_max_px,
            c.sls_processed_max_bytes,
            join(&c.optimised_formats),
            join(&c.high_poly_formats),
            join(&c.texture_formats),
            join(&c.raw_photogrammetry_formats),
            join(&c.raw_sls_formats),
        )
    }

    pub fn naming(&self) -> Naming {
        Naming::new(&self.base_iri).expect("checked when parsed")
    }

    pub fn agent_iri(&self) -> Iri {
        match Iri::new(&self.agent) {
            Ok(iri) if self.agent.contains("://") => iri,
            _ => self.naming().agent(&self.agent),
        }
    }
}

/// A loaded catalog directory.
pub struct CatalogDir {
    pub root: PathBuf,
    pub config: Config,
    pub naming: Naming,
    pub store: Store,
    pub provenance: Provenance,
    pub workflow: Workflow,
}

impl CatalogDir {
    /// Writes an empty catalog skeleton into `root`, which must be absent or empty.
    pub fn init(root: &Path, base_iri: &str) -> anyhow::Result<()> {
        let naming = Naming::new(base_iri)
            .ok_or_else(|| anyhow!("base IRI {base_iri:?} must be absolute and end in '/'"))?;
        let mapping = heritage_core::vocab::bibliographic_mapping(
            &Vocabulary::default(),
            &naming,
            "bibliographic",
        );
        for dir in [
            root.to_path_buf(),
            root.join(TABLES_DIR).join("bibliographic"),
            root.join(TABLES_DIR).join("process"),
            root.join(MAPPINGS_DIR),
            root.join(BUNDLES_DIR),
        ] {
            fs::create_dir_all(&dir).with_context(|| dir.display().to_string())?;
        }
        for (name, body) in [
            (DATA_FILE.to_string(), String::new()),
            (PROV_FILE.to_string(), String::new()),
            (CONFIG_FILE.to_string(), Config::default_text(base_iri)),
            (format!("{MAPPINGS_DIR}/bibliographic.yml"), mapping),
        ] {
            let path = root.join(name);
            fs::write(&path, body).with_context(|| path.display().to_string())?;
        }
        Ok(())
    }

    pub fn open(root: &Path) -> Result<CatalogDir, Failure> {
        let read = |name: &str| {
            let path = root.join(name);
            fs::read_to_string(&path)
                .with_context(|| {
                    format!(
                        "{} is not a catalog: cannot read {}",
                        root.display(),
                        path.display()
                    )
                })
                .code(SETUP)
        };
        let config = Config::parse(&read(CONFIG_FILE)?)
            .with_context(|| root.join(CONFIG_FILE).display().to_string())
            .code(SETUP)?;
        let data = parse_nquads(&read(DATA_FILE)?)
            .context(DATA_FILE)
            .code(SETUP)?;
        let store = Store::from_dataset(data);
        let prov = parse_nquads(&read(PROV_FILE)?)
            .context(PROV_FILE)
            .code(SETUP)?;
        let provenance = Provenance::from_dataset(&prov)
            .context(PROV_FILE)
            .code(SETUP)?;
        let workflow = Workflow::from_store(&store, &config.vocab)
            .context(DATA_FILE)
            .code(SETUP)?;
        Ok(CatalogDir {
            root: root.to_path_buf(),
            naming: config.naming(),
            config,
            store,
            provenance,
            workflow,
        })
    }

    pub fn save(&self) -> anyhow::Result<()> {
        self.store.save(&self.root.join(DATA_FILE))?;
        let prov = serialize_nquads(&self.provenance.to_dataset());
        write_atomically(&self.root.join(PROV_FILE), prov.as_bytes())?;
        Ok(())
    }

    /// Time for the next recorded change: now, or one second past the latest
    /// snapshot if the clock is behind it.
    pub fn next_time(&self) -> Timestamp {
        let now = Timestamp::now();
        match self.provenance.latest_time() {
            Some(last) if last >= now => last.plus_seconds(1),
            _ => now,
        }
    }

    pub fn table_path(&self, kind: &str, file_name: &str) -> PathBuf {
        self.root.join(TABLES_DIR).join(kind).join(file_name)
    }

    /// Stored tables as `(stem, path)`, sorted by path.
    pub fn tables(&self) -> anyhow::Result<Vec<(String, PathBuf)>> {
        let mut out = Vec::new();
        let dir = self.root.join(TABLES_DIR);
        if !dir.is_dir() {
            return Ok(out);
        }
        for kind in fs::read_dir(&dir)? {
            let kind = kind?.path();
            if !kind.is_dir() {
                continue;
            }
            for file in fs::read_dir(&kind)? {
                let path = file?.path();
                if path.extension().is_some_and(|e| e == "csv") {
                    let stem = path
                        .file_stem()
                        .unwrap_or_default()
                        .to_string_lossy()
                        .into_owned();
                    out.push((stem, path));
                }
            }
        }
        out.sort_by(|a, b| a.1.cmp(&b.1));
        Ok(out)
    }

    pub fn bibliographic_mapping(&self) -> String {
        let path = self.root.join(MAPPINGS_DIR).join("bibliographic.yml");
        fs::read_to_string(path).unwrap_or_else(|_| {
            heritage_core::vocab::bibliographic_mapping(
                &self.config.vocab,
                &self.naming,
                "bibliographic",
            )
        })
    }

    /// Absolute IRIs pass through; anything else is minted with `mint`.
    pub fn resolve(&self, arg: &str, mint: impl Fn(&Naming, &str) -> Iri) -> Iri {
        match Iri::new(arg) {
            Ok(iri) if arg.contains(':') => iri,
            _ => mint(&self.naming, arg),
        }
    }

    /// Entity IRI, or a path relative to the base IRI such as `dcho/1`.
    pub fn entity(&self, arg: &str) -> Result<Iri, Failure> {
        if arg.contains(':') {
            return Iri::new(arg).map_err(|e| anyhow!("{e}")).code(crate::INPUT);
        }
        Iri::new(format!("{}{arg}", self.naming.base()))
            .map_err(|e| anyhow!("{e}"))
            .code(crate::INPUT)
    }
}

pub fn ensure_initialisable(root: &Path) -> anyhow::Result<()> {
    if root.exists() {
        if !root.is_dir() {
            bail!("{} exists and is not a directory", root.display());
        }
        if fs::read_dir(root)?.next().is_some() {
            bail!("{} is not empty", root.display());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_text_round_trips() {
        let c = Config::parse(&Config::default_text(DEFAULT_BASE)).unwrap();
        assert_eq!(c.base_iri, DEFAULT_BASE);
        assert_eq!(c.audit, AuditProfile::default());
        assert_eq!(c.endpoint_port, DEFAULT_PORT);
        assert_eq!(
            c.agent_iri().as_str(),
            "https://w3id.org/example-catalog/agent/cataloguer"
        );
    }

    #[test]
    fn overrides_and_errors() {
        let c = Config::parse("texture_max_px = 8192\nterm.licence = <http://ex.org/lic>\nagent = https://orcid.org/0000\n").unwrap();
        assert_eq!(c.audit.constraints.texture_max_px, 8192);
        assert_eq!(c.vocab.term(Role::Licence).as_str(), "http://ex.org/lic");
        assert!(c
            .audit
            .required_fields
            .iter()
            .any(|f| f.as_str() == "http://ex.org/lic"));
        assert_eq!(c.agent_iri().as_str(), "https://orcid.org/0000");
        for bad in [
            "base_iri = http://ex.org/no-slash",
            "nokey",
            "colour = red",
            "quality_threshold = 2",
            "term.colour = http://x/",
        ] {
            assert!(Config::parse(bad).is_err(), "{bad}");
        }
    }
}
