use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;

use super::{
    AssetKind, AssetVersion, PhaseKind, PhaseRecord, UploadRecord, Workflow, WorkflowError,
};
use crate::mapping::{Row, Table};
use crate::provenance::Timestamp;
use crate::rdf::{Dataset, Iri, Literal, Quad, Subject, Term};
use crate::store::Store;
use crate::vocab::{xsd, Naming, Role, Vocabulary};

/// Columns every process table must have.
pub const PROCESS_COLUMNS: [&str; 8] = [
    "object_id",
    "phase",
    "unit",
    "agents",
    "technique",
    "tools",
    "start",
    "end",
];

/// Validated contents of a process table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProcessData {
    pub phases: Vec<PhaseRecord>,
    pub assets: Vec<AssetVersion>,
    pub uploads: Vec<UploadRecord>,
    /// `(dcho, cho)` pairs named by the table.
    pub counterparts: BTreeMap<Iri, Iri>,
}

impl ProcessData {
    pub fn apply_to(&self, workflow: &mut Workflow) -> Result<(), WorkflowError> {
        for (dcho, cho) in &self.counterparts {
            workflow.link_counterpart(dcho.clone(), cho.clone());
        }
        workflow.register_all(self.phases.clone())?;
        for a in &self.assets {
            workflow.add_asset(a.clone());
        }
        for u in &self.uploads {
            workflow.add_upload(u.clone());
        }
        Ok(())
    }
}

fn cell<'a>(row: &Row<'a>, column: &str) -> &'a str {
    row.get(column).map_or("", str::trim)
}

fn list(text: &str) -> impl Iterator<Item = &str> {
    text.split(';').map(str::trim).filter(|s| !s.is_empty())
}

fn agent_iri(text: &str, naming: &Naming) -> Iri {
    match Iri::new(text) {
        Ok(iri) if text.contains("://") => iri,
        _ => naming.agent(text),
    }
}

/// Parses and validates every row. `line` numbers in errors count the header
/// as line 1.
pub fn ingest_process_table(table: &Table, naming: &Naming) -> Result<ProcessData, WorkflowError> {
    if let Some(missing) = PROCESS_COLUMNS.iter().find(|c| !table.has_column(c)) {
        return Err(WorkflowError::MissingColumn((*missing).to_owned()));
    }
    let mut data = ProcessData::default();
    let mut seen = BTreeSet::new();
    for (i, row) in table.rows().enumerate() {
        let line = i + 2;
        let invalid = |message: String| WorkflowError::Invalid { line, message };
        let id = cell(&row, "object_id");
        if id.is_empty() {
            return Err(invalid("empty object_id".into()));
        }
        let phase_text = cell(&row, "phase");
        let kind: PhaseKind = phase_text
            .parse()
            .map_err(|_| WorkflowError::UnknownPhase {
                line,
                value: phase_text.to_owned(),
            })?;
        if !seen.insert((id.to_owned(), kind)) {
            return Err(invalid(format!("duplicate {kind} row for object {id:?}")));
        }
        let date = |column: &str| -> Result<Option<NaiveDate>, WorkflowError> {
            let text = cell(&row, column);
            if text.is_empty() {
                return Ok(None);
            }
            NaiveDate::parse_from_str(text, "%Y-%m-%d")
                .map(Some)
                .map_err(|_| WorkflowError::BadDate {
                    line,
                    cell: text.to_owned(),
                })
        };
        let start = date("start")?.ok_or_else(|| WorkflowError::BadDate {
            line,
            cell: String::new(),
        })?;
        let end = date("end")?;
        let cho = naming.cho(id);
        let dcho = naming.dcho(id);
        data.counterparts.insert(dcho.clone(), cho.clone());

        let mut outputs = Vec::new();
        if let Some(asset) = asset_from_row(&row, naming, &dcho).map_err(invalid)? {
            outputs.push(asset.id.clone());
            data.assets.push(asset);
        }
        let technique = cell(&row, "technique");
        let record = PhaseRecord {
            cho,
            kind,
            unit: cell(&row, "unit").to_owned(),
            agents: list(cell(&row, "agents"))
                .map(|a| agent_iri(a, naming))
                .collect(),
            technique: (!technique.is_empty()).then(|| technique.to_owned()),
            tools: list(cell(&row, "tools")).map(str::to_owned).collect(),
            start,
            end,
            inputs: list(cell(&row, "inputs"))
                .map(|a| naming.asset(a))
                .collect(),
            outputs,
        };
        record.check().map_err(invalid)?;

        if kind == PhaseKind::Upload {
            let day = end.unwrap_or(start);
            let upload = UploadRecord {
                dcho,
                scene_id: cell(&row, "scene_id").to_owned(),
                target: cell(&row, "target").to_owned(),
                time: Timestamp::from(day.and_hms_opt(0, 0, 0).expect("midnight").and_utc()),
            };
            upload.check().map_err(invalid)?;
            if upload.target.is_empty() {
                return Err(invalid("upload needs a target".into()));
            }
            data.uploads.push(upload);
        }
        data.phases.push(record);
    }
    Ok(data)
}

fn asset_from_row(
    row: &Row<'_>,
    naming: &Naming,
    dcho: &Iri,
) -> Result<Option<AssetVersion>, String> {
    let id = cell(row, "output_id");
    if id.is_empty() {
        return Ok(None);
    }
    let required = |column: &str| {
        let v = cell(row, column);
        if v.is_empty() {
            Err(format!("asset {id:?} needs {column}"))
        } else {
            Ok(v)
        }
    };
    let optional = |column: &str| -> Result<Option<u64>, String> {
        let v = cell(row, column);
        if v.is_empty() {
            return Ok(None);
        }
        v.parse()
            .map(Some)
            .map_err(|_| format!("{column} {v:?} is not a non-negative integer"))
    };
    let u32_field = |column: &str| -> Result<Option<u32>, String> {
        optional(column)?
            .map(|n| u32::try_from(n).map_err(|_| format!("{column} out of range")))
            .transpose()
    };
    let kind_text = required("output_kind")?;
    let kind: AssetKind = kind_text
        .parse()
        .map_err(|_| format!("unknown asset kind {kind_text:?}"))?;
    let size_text = required("size_bytes")?;
    let texture_format = cell(row, "texture_format");
    let asset = AssetVersion {
        id: naming.asset(id),
        dcho: dcho.clone(),
        kind,
        format: required("format")?.to_ascii_uppercase(),
        size_bytes: size_text
            .parse()
            .map_err(|_| format!("size_bytes {size_text:?} is not a non-negative integer"))?,
        polygon_count: optional("polygons")?,
        texture_width: u32_field("texture_width")?,
        texture_height: u32_field("texture_height")?,
        texture_format: (!texture_format.is_empty()).then(|| texture_format.to_ascii_uppercase()),
        checksum: required("checksum")?.to_ascii_lowercase(),
    };
    asset.check()?;
    Ok(Some(asset))
}

/// Quads describing the process data, each placed in the record graph of
/// the DCHO it concerns.
pub fn process_dataset(data: &ProcessData, vocab: &Vocabulary, naming: &Naming) -> Dataset {
    let mut out = Dataset::new();
    let dcho_of: BTreeMap<&Iri, &Iri> = data.counterparts.iter().map(|(d, c)| (c, d)).collect();
    let graph_of = |dcho: &Iri| naming.record_of(dcho);
    let t = |role: Role| vocab.term(role);
    let mut add = |s: &Iri, p: &Iri, o: Term, g: &Option<Iri>| {
        out.insert(Quad::new(s.clone(), p.clone(), o, g.clone()));
    };
    let lit = |s: &str| Term::Literal(Literal::string(s));
    let typed = |s: String, dt: &str| Term::Literal(Literal::typed(s, xsd(dt)));
    let rdf_type = Vocabulary::rdf_type();

    for (dcho, cho) in &data.counterparts {
        add(
            dcho,
            t(Role::CounterpartOf),
            Term::Iri(cho.clone()),
            &graph_of(dcho),
        );
    }
    for p in &data.phases {
        let g = dcho_of.get(&p.cho).and_then(|d| graph_of(d));
        let s = naming.phase(
            naming.object_id(&p.cho).unwrap_or(p.cho.as_str()),
            p.kind.name(),
        );
        add(&s, &rdf_type, Term::Iri(t(Role::PhaseClass).clone()), &g);
        add(&s, t(Role::PhaseKind), lit(p.kind.name()), &g);
        add(&s, t(Role::PhaseOf), Term::Iri(p.cho.clone()), &g);
        if !p.unit.is_empty() {
            add(&s, t(Role::Unit), lit(&p.unit), &g);
        }
        for a in &p.agents {
            add(&s, t(Role::CarriedOutBy), Term::Iri(a.clone()), &g);
        }
        if let Some(technique) = &p.technique {
            add(&s, t(Role::Technique), lit(technique), &g);
        }
        for tool in &p.tools {
            add(&s, t(Role::Tool), lit(tool), &g);
        }
        add(
            &s,
            t(Role::StartDate),
            typed(p.start.to_string(), "date"),
            &g,
        );
        if let Some(end) = p.end {
            add(&s, t(Role::EndDate), typed(end.to_string(), "date"), &g);
        }
        for i in &p.inputs {
            add(&s, t(Role::UsedAsset), Term::Iri(i.clone()), &g);
        }
        for o in &p.outputs {
            add(o, t(Role::ProducedBy), Term::Iri(s.clone()), &g);
        }
    }
    for a in &data.assets {
        let g = graph_of(&a.dcho);
        add(&a.id, &rdf_type, Term::Iri(t(Role::AssetClass).clone()), &g);
        add(&a.id, t(Role::VersionOf), Term::Iri(a.dcho.clone()), &g);
        add(&a.id, t(Role::AssetKind), lit(a.kind.name()), &g);
        add(&a.id, t(Role::Format), lit(&a.format), &g);
        add(
            &a.id,
            t(Role::SizeBytes),
            typed(a.size_bytes.to_string(), "integer"),
            &g,
        );
        if let Some(n) = a.polygon_count {
            add(
                &a.id,
                t(Role::PolygonCount),
                typed(n.to_string(), "integer"),
                &g,
            );
        }
        if let Some(n) = a.texture_width {
            add(
                &a.id,
                t(Role::TextureWidth),
                typed(n.to_string(), "integer"),
                &g,
            );
        }
        if let Some(n) = a.texture_height {
            add(
                &a.id,
                t(Role::TextureHeight),
                typed(n.to_string(), "integer"),
                &g,
            );
        }
        if let Some(f) = &a.texture_format {
            add(&a.id, t(Role::TextureFormat), lit(f), &g);
        }
        add(&a.id, t(Role::Checksum), lit(&a.checksum), &g);
    }
    for u in &data.uploads {
        let g = graph_of(&u.dcho);
        let s = naming.upload(naming.object_id(&u.dcho).unwrap_or(u.dcho.as_str()));
        add(&s, &rdf_type, Term::Iri(t(Role::UploadClass).clone()), &g);
        add(&s, t(Role::UploadOf), Term::Iri(u.dcho.clone()), &g);
        add(&s, t(Role::SceneId), lit(&u.scene_id), &g);
        add(&s, t(Role::UploadTarget), lit(&u.target), &g);
        add(
            &s,
            t(Role::UploadedAt),
            typed(u.time.to_string(), "dateTime"),
            &g,
        );
    }
    out
}

/// Read access to one subject's properties.
struct Props<'a> {
    store: &'a Store,
    vocab: &'a Vocabulary,
    subject: &'a Iri,
}

impl<'a> Props<'a> {
    fn all(&self, role: Role) -> impl Iterator<Item = &'a Term> + 'a {
        let s = Subject::Iri(self.subject.clone());
        let p = self.vocab.term(role).clone();
        let terms: Vec<&'a Term> = self
            .store
            .subject_predicate_quads(&s, &p)
            .map(|q| &q.object)
            .collect();
        terms.into_iter()
    }

    fn err(&self, message: String) -> WorkflowError {
        WorkflowError::Malformed {
            subject: self.subject.clone(),
            message,
        }
    }

    fn text(&self, role: Role) -> Result<Option<&'a str>, WorkflowError> {
        let mut values = self.all(role);
        let first = values.next();
        if values.next().is_some() {
            return Err(self.err(format!("several {} values", role.name())));
        }
        first
            .map(|t| {
                t.as_literal()
                    .map(|l| l.lexical())
                    .ok_or_else(|| self.err(format!("{} is not a literal", role.name())))
            })
            .transpose()
    }

    fn required_text(&self, role: Role) -> Result<&'a str, WorkflowError> {
        self.text(role)?
            .ok_or_else(|| self.err(format!("missing {}", role.name())))
    }

    fn iris(&self, role: Role) -> Result<Vec<Iri>, WorkflowError> {
        self.all(role)
            .map(|t| {
                t.as_iri()
                    .cloned()
                    .ok_or_else(|| self.err(format!("{} is not an IRI", role.name())))
            })
            .collect()
    }

    fn required_iri(&self, role: Role) -> Result<Iri, WorkflowError> {
        let mut iris = self.iris(role)?;
        match iris.len() {
            1 => Ok(iris.remove(0)),
            0 => Err(self.err(format!("missing {}", role.name()))),
            _ => Err(self.err(format!("several {} values", role.name()))),
        }
    }

    fn number<T: std::str::FromStr>(&self, role: Role) -> Result<Option<T>, WorkflowError> {
        self.text(role)?
            .map(|t| {
                t.parse()
                    .map_err(|_| self.err(format!("{} is not a number", role.name())))
            })
            .transpose()
    }

    fn date(&self, role: Role) -> Result<Option<NaiveDate>, WorkflowError> {
        self.text(role)?
            .map(|t| {
                NaiveDate::parse_from_str(t, "%Y-%m-%d")
                    .map_err(|_| self.err(format!("bad {}", role.name())))
            })
            .transpose()
    }
}

fn typed_subjects<'a>(store: &'a Store, vocab: &Vocabulary, class: Role) -> BTreeSet<&'a Iri> {
    let rdf_type = Vocabulary::rdf_type();
    let class = Term::Iri(vocab.term(class).clone());
    store
        .iter()
        .filter(|q| q.predicate == rdf_type && q.object == class)
        .filter_map(|q| q.subject.as_iri())
        .collect()
}

impl Workflow {
    /// Rebuilds workflow state from catalog quads.
    pub fn from_store(store: &Store, vocab: &Vocabulary) -> Result<Workflow, WorkflowError> {
        let mut w = Workflow::new();
        for cho in typed_subjects(store, vocab, Role::ChoClass) {
            w.declare_object(cho.clone());
        }
        let counterpart = vocab.term(Role::CounterpartOf);
        for q in store.iter().filter(|q| &q.predicate == counterpart) {
            if let (Some(d), Some(c)) = (q.subject.as_iri(), q.object.as_iri()) {
                w.link_counterpart(d.clone(), c.clone());
            }
        }
        let props = |subject| Props {
            store,
            vocab,
            subject,
        };
        let mut records = Vec::new();
        for s in typed_subjects(store, vocab, Role::PhaseClass) {
            let p = props(s);
            let kind_text = p.required_text(Role::PhaseKind)?;
            let kind = kind_text
                .parse()
                .map_err(|_| p.err(format!("unknown phase {kind_text:?}")))?;
            let record = PhaseRecord {
                cho: p.required_iri(Role::PhaseOf)?,
                kind,
                unit: p.text(Role::Unit)?.unwrap_or("").to_owned(),
                agents: p.iris(Role::CarriedOutBy)?,
                technique: p.text(Role::Technique)?.map(str::to_owned),
                tools: p
                    .all(Role::Tool)
                    .filter_map(|t| t.as_literal().map(|l| l.lexical().to_owned()))
                    .collect(),
                start: p
                    .date(Role::StartDate)?
                    .ok_or_else(|| p.err("missing start_date".into()))?,
                end: p.date(Role::EndDate)?,
                inputs: p.iris(Role::UsedAsset)?,
                outputs: store
                    .iter()
                    .filter(|q| {
                        &q.predicate == vocab.term(Role::ProducedBy) && q.object.as_iri() == Some(s)
                    })
                    .filter_map(|q| q.subject.as_iri().cloned())
                    .collect(),
            };
            record.check().map_err(|m| p.err(m))?;
            records.push(record);
        }
        w.register_all(records)?;
        for s in typed_subjects(store, vocab, Role::AssetClass) {
            let p = props(s);
            let kind_text = p.required_text(Role::AssetKind)?;
            let asset = AssetVersion {
                id: s.clone(),
                dcho: p.required_iri(Role::VersionOf)?,
                kind: kind_text
                    .parse()
                    .map_err(|_| p.err(format!("unknown asset kind {kind_text:?}")))?,
                format: p.required_text(Role::Format)?.to_owned(),
                size_bytes: p
                    .number(Role::SizeBytes)?
                    .ok_or_else(|| p.err("missing size_bytes".into()))?,
                polygon_count: p.number(Role::PolygonCount)?,
                texture_width: p.number(Role::TextureWidth)?,
                texture_height: p.number(Role::TextureHeight)?,
                texture_format: p.text(Role::TextureFormat)?.map(str::to_owned),
                checksum: p.required_text(Role::Checksum)?.to_owned(),
            };
            asset.check().map_err(|m| p.err(m))?;
            w.add_asset(asset);
        }
        for s in typed_subjects(store, vocab, Role::UploadClass) {
            let p = props(s);
            let time_text = p.required_text(Role::UploadedAt)?;
            let upload = UploadRecord {
                dcho: p.required_iri(Role::UploadOf)?,
                scene_id: p.required_text(Role::SceneId)?.to_owned(),
                target: p.required_text(Role::UploadTarget)?.to_owned(),
                time: time_text
                    .parse()
                    .map_err(|_| p.err(format!("bad time {time_text:?}")))?,
            };
            upload.check().map_err(|m| p.err(m))?;
            w.add_upload(upload);
        }
        Ok(w)
    }
}
