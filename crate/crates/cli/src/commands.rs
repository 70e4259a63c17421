use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use anyhow::{anyhow, Context};
use heritage_core::audit::{render_report, run_audit, ReportFormat};
use heritage_core::mapping::{execute_mapping, parse_mapping, Table};
use heritage_core::provenance::{ChangeSummary, ProvError, Timestamp};
use heritage_core::rdf::{serialize_nquads, Dataset, Iri, Subject};
use heritage_core::store::{parse_bgp, solutions_csv};
use heritage_core::vocab::Naming;
use heritage_core::workflow::{
    export_bundle, ingest_process_table, process_dataset, storage_report, PhaseStatus, Workflow,
    WorkflowError,
};
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

use crate::catalog::{ensure_initialisable, CatalogDir, BUNDLES_DIR};
use crate::{
    server, Cli, Coded, Command, Failure, ProvCommand, ReportCommand, TableKind, FINDINGS, INPUT,
    OK, SETUP, UNKNOWN,
};

type Outcome = Result<u8, Failure>;

pub(crate) fn dispatch(cli: Cli, input: &mut dyn Read, out: &mut dyn Write) -> Outcome {
    let root = cli.catalog.as_path();
    match cli.command {
        Command::Init { path, base_iri } => init(&path, &base_iri, out),
        Command::Ingest { csv, kind } => ingest(root, &csv, kind, out),
        Command::Map { mapping, table } => map(root, &mapping, &table, out),
        Command::Prov { command } => prov(root, command, out),
        Command::Audit { format } => audit(root, &format, out),
        Command::Validate => validate(root, out),
        Command::Query {
            pattern,
            serve,
            port,
        } => {
            if serve {
                serve_queries(root, port, out)
            } else {
                query(root, pattern, input, out)
            }
        }
        Command::Report { command } => report(root, command, out),
    }
}

fn init(path: &Path, base_iri: &str, out: &mut dyn Write) -> Outcome {
    ensure_initialisable(path).code(SETUP)?;
    heritage_core::vocab::Naming::new(base_iri).ok_or_else(|| {
        Failure::msg(
            INPUT,
            format!("base IRI {base_iri:?} must be absolute and end in '/'"),
        )
    })?;
    CatalogDir::init(path, base_iri).code(SETUP)?;
    writeln!(out, "initialised catalog in {}", path.display())?;
    Ok(OK)
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .code(INPUT)
}

fn table_from_csv(name: &str, path: &Path, text: &str) -> Result<Table, Failure> {
    Table::from_csv(name, text)
        .with_context(|| path.display().to_string())
        .code(INPUT)
}

fn process_output(
    cat: &CatalogDir,
    table: &Table,
) -> Result<(Dataset, usize, usize, usize), WorkflowError> {
    let data = ingest_process_table(table, &cat.naming)?;
    let quads = process_dataset(&data, &cat.config.vocab, &cat.naming);
    Ok((
        quads,
        data.phases.len(),
        data.assets.len(),
        data.uploads.len(),
    ))
}

fn workflow_message(path: &Path, e: WorkflowError) -> Failure {
    let detail = match &e {
        WorkflowError::MissingColumn(_) => format!("line 1: {e}"),
        _ => e.to_string(),
    };
    Failure::msg(INPUT, format!("{}: {detail}", path.display()))
}

fn ingest(root: &Path, csv: &Path, kind: TableKind, out: &mut dyn Write) -> Outcome {
    let mut cat = CatalogDir::open(root)?;
    let text = read_input(csv)?;
    let file_name = csv
        .file_name()
        .ok_or_else(|| Failure::msg(INPUT, format!("{} is not a file", csv.display())))?
        .to_string_lossy()
        .into_owned();
    let stored = cat.table_path(kind.name(), &file_name);
    let previous = fs::read_to_string(&stored).ok();
    let table = table_from_csv(kind.name(), csv, &text)?;

    let (old, new, counts) = match kind {
        TableKind::Bibliographic => {
            let doc = parse_mapping(&cat.bibliographic_mapping())
                .context("bibliographic mapping")
                .code(SETUP)?;
            let run = |t: &Table| execute_mapping(&doc, std::slice::from_ref(t));
            let new = run(&table)
                .with_context(|| csv.display().to_string())
                .code(INPUT)?;
            let old = previous
                .and_then(|p| Table::from_csv(kind.name(), &p).ok())
                .and_then(|t| run(&t).ok())
                .unwrap_or_default();
            (old, new, format!("rows={}", table.len()))
        }
        TableKind::Process => {
            let (new, phases, assets, uploads) =
                process_output(&cat, &table).map_err(|e| workflow_message(csv, e))?;
            let old = previous
                .and_then(|p| Table::from_csv(kind.name(), &p).ok())
                .and_then(|t| process_output(&cat, &t).ok())
                .map(|o| o.0)
                .unwrap_or_default();
            (
                old,
                new,
                format!(
                    "rows={} phases={phases} assets={assets} uploads={uploads}",
                    table.len()
                ),
            )
        }
    };

    let source = Iri::new(format!(
        "{}table/{}/{}",
        cat.naming.base(),
        kind.name(),
        encode(&file_name)
    ))
    .context("table source IRI")
    .code(INPUT)?;
    let time = cat.next_time();
    let agent = cat.config.agent_iri();
    let summary = cat
        .provenance
        .record_changes(&mut cat.store, &old, &new, &agent, Some(&source), time)
        .with_context(|| csv.display().to_string())
        .code(INPUT)?;
    cat.workflow = Workflow::from_store(&cat.store, &cat.config.vocab)
        .with_context(|| format!("{} conflicts with the catalog", csv.display()))
        .code(INPUT)?;

    cat.save().code(SETUP)?;
    heritage_core::store::write_atomically(&stored, text.as_bytes()).code(SETUP)?;
    writeln!(out, "{} {counts} {}", kind.name(), summary_line(&summary))?;
    Ok(OK)
}

fn summary_line(s: &ChangeSummary) -> String {
    format!(
        "inserted={} deleted={} created={} modified={}",
        s.inserted,
        s.deleted,
        s.created.len(),
        s.modified.len()
    )
}

fn encode(segment: &str) -> String {
    const SAFE: &AsciiSet = &NON_ALPHANUMERIC
        .remove(b'-')
        .remove(b'.')
        .remove(b'_')
        .remove(b'~');
    utf8_percent_encode(segment, SAFE).to_string()
}

fn map(root: &Path, mapping: &Path, table_arg: &str, out: &mut dyn Write) -> Outcome {
    let mut cat = CatalogDir::open(root)?;
    let doc = parse_mapping(&read_input(mapping)?)
        .with_context(|| mapping.display().to_string())
        .code(INPUT)?;
    let arg_path = Path::new(table_arg);
    let table = if arg_path.is_file() {
        let name = arg_path
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        table_from_csv(&name, arg_path, &read_input(arg_path)?)?
    } else {
        let stored = cat.tables().code(SETUP)?;
        let (name, path) = stored
            .iter()
            .find(|(name, _)| name == table_arg)
            .ok_or_else(|| Failure::msg(INPUT, format!("unknown table {table_arg:?}")))?;
        table_from_csv(name, path, &read_input(path)?)?
    };
    let output = execute_mapping(&doc, &[table])
        .with_context(|| mapping.display().to_string())
        .code(INPUT)?;
    let file_name = mapping
        .file_name()
        .unwrap_or_default()
        .to_string_lossy()
        .into_owned();
    let source = Iri::new(format!(
        "{}mapping/{}",
        cat.naming.base(),
        encode(&file_name)
    ))
    .context("mapping source IRI")
    .code(INPUT)?;
    let time = cat.next_time();
    let agent = cat.config.agent_iri();
    let summary = cat
        .provenance
        .record_changes(
            &mut cat.store,
            &Dataset::new(),
            &output,
            &agent,
            Some(&source),
            time,
        )
        .with_context(|| mapping.display().to_string())
        .code(INPUT)?;
    if summary.inserted > 0 {
        cat.workflow = Workflow::from_store(&cat.store, &cat.config.vocab)
            .with_context(|| format!("output of {} conflicts with the catalog", mapping.display()))
            .code(INPUT)?;
        cat.save().code(SETUP)?;
    }
    writeln!(
        out,
        "quads={} entities={}",
        summary.inserted,
        summary.entities()
    )?;
    Ok(OK)
}

fn prov(root: &Path, command: ProvCommand, out: &mut dyn Write) -> Outcome {
    let cat = CatalogDir::open(root)?;
    let unknown = |e: &Iri| Failure::msg(UNKNOWN, format!("no provenance for {}", e.as_str()));
    match command {
        ProvCommand::Log { entity } => {
            let entity = cat.entity(&entity)?;
            let chain = cat
                .provenance
                .chain(&entity)
                .ok_or_else(|| unknown(&entity))?;
            for s in &chain.snapshots {
                let agents: Vec<&str> = s.attributed_to.iter().map(Iri::as_str).collect();
                writeln!(
                    out,
                    "{} {} {} {}",
                    s.index,
                    s.kind,
                    s.generated_at,
                    agents.join(",")
                )?;
            }
        }
        ProvCommand::Restore { entity, timestamp } => {
            let time: Timestamp = timestamp.parse().code(INPUT)?;
            let entity = cat.entity(&entity)?;
            let state = match cat.provenance.restore_state(&cat.store, &entity, time) {
                Ok(state) => state,
                Err(ProvError::NoSuchEntity(e)) => return Err(unknown(&e)),
                Err(e) => return Err(Failure::new(SETUP, e)),
            };
            write!(out, "{}", serialize_nquads(&state))?;
        }
    }
    Ok(OK)
}

fn audit(root: &Path, format: &str, out: &mut dyn Write) -> Outcome {
    let format: ReportFormat = format.parse().code(INPUT)?;
    let cat = CatalogDir::open(root)?;
    let report = run_audit(
        &cat.store,
        &cat.provenance,
        &cat.workflow,
        &cat.config.vocab,
        &cat.config.audit,
    );
    write!(out, "{}", render_report(&report, format))?;
    Ok(if report.has_failures() { FINDINGS } else { OK })
}

fn validate(root: &Path, out: &mut dyn Write) -> Outcome {
    let cat = CatalogDir::open(root)?;
    let violations = cat.workflow.validate_all(&cat.config.audit.constraints);
    for (asset, v) in &violations {
        writeln!(out, "{} {v}", asset.as_str())?;
    }
    writeln!(
        out,
        "assets={} violations={}",
        cat.workflow.assets().count(),
        violations.len()
    )?;
    Ok(if violations.is_empty() { OK } else { FINDINGS })
}

fn query(
    root: &Path,
    pattern: Option<String>,
    input: &mut dyn Read,
    out: &mut dyn Write,
) -> Outcome {
    let text = match pattern {
        Some(p) => p,
        None => {
            let mut s = String::new();
            input
                .read_to_string(&mut s)
                .context("reading pattern from standard input")
                .code(INPUT)?;
            s
        }
    };
    let patterns = parse_bgp(&text).context("bad pattern").code(INPUT)?;
    let cat = CatalogDir::open(root)?;
    write!(
        out,
        "{}",
        solutions_csv(&patterns, &cat.store.bgp_query(&patterns))
    )?;
    Ok(OK)
}

fn serve_queries(root: &Path, port: Option<u16>, out: &mut dyn Write) -> Outcome {
    let cat = CatalogDir::open(root)?;
    let port = port.unwrap_or(cat.config.endpoint_port);
    let server = server::start(cat.store, port)
        .with_context(|| format!("cannot listen on port {port}"))
        .code(SETUP)?;
    writeln!(out, "listening on {}", server.addr())?;
    out.flush()?;
    server.wait().code(SETUP)?;
    Ok(OK)
}

fn report(root: &Path, command: ReportCommand, out: &mut dyn Write) -> Outcome {
    let cat = CatalogDir::open(root)?;
    match command {
        ReportCommand::Storage => {
            writeln!(out, "{}", storage_report(cat.workflow.assets()))?;
        }
        ReportCommand::Status { cho } => {
            let cho = cat.resolve(&cho, Naming::cho);
            let status = match cat.workflow.workflow_status(&cho) {
                Ok(s) => s,
                Err(WorkflowError::NoSuchObject(e)) => {
                    return Err(Failure::msg(
                        UNKNOWN,
                        format!("unknown object {}", e.as_str()),
                    ))
                }
                Err(e) => return Err(Failure::new(SETUP, e)),
            };
            for (kind, s) in &status {
                writeln!(out, "{kind} {s}")?;
            }
            let count = |x: PhaseStatus| status.iter().filter(|(_, s)| *s == x).count();
            writeln!(
                out,
                "complete={} in_progress={} absent={}",
                count(PhaseStatus::Complete),
                count(PhaseStatus::InProgress),
                count(PhaseStatus::Absent)
            )?;
        }
        ReportCommand::Bundle { dcho, dir } => {
            let iri = cat.resolve(&dcho, Naming::dcho);
            let known = cat
                .store
                .subject_quads(&Subject::Iri(iri.clone()))
                .next()
                .is_some()
                || cat.workflow.assets_of(&iri).next().is_some();
            if !known {
                return Err(Failure::msg(
                    UNKNOWN,
                    format!("unknown object {}", iri.as_str()),
                ));
            }
            let dir = dir.unwrap_or_else(|| {
                let id = cat
                    .naming
                    .object_id(&iri)
                    .map(str::to_owned)
                    .unwrap_or_else(|| encode(iri.as_str()));
                cat.root.join(BUNDLES_DIR).join(id)
            });
            let manifest = export_bundle(
                &cat.workflow,
                &cat.store,
                &cat.provenance,
                &cat.config.vocab,
                &iri,
                &dir,
            )
            .map_err(|e| anyhow!("{e}"))
            .code(INPUT)?;
            write!(out, "{}", manifest.render())?;
            writeln!(
                out,
                "wrote {} files to {}",
                manifest.entries.len() + 1,
                dir.display()
            )?;
        }
    }
    Ok(OK)
}
