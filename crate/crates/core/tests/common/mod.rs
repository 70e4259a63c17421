//! Shared fixtures, random generators and independent oracles.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use heritage_core::audit::{AuditProfile, FairReport, Outcome};
use heritage_core::mapping::{execute_mapping, parse_mapping, Table};
use heritage_core::provenance::{Provenance, Timestamp};
use heritage_core::rdf::{BlankNode, Dataset, Iri, Literal, Quad, Subject, Term};
use heritage_core::store::{Delta, GraphPattern, PatternTerm, QuadPattern, Solution, Store};
use heritage_core::vocab::{bibliographic_mapping, Naming, Role, Vocabulary};
use heritage_core::workflow::{ingest_process_table, process_dataset, Workflow};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub const BASE: &str = "https://w3id.org/example-catalog/";

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Gold catalog

pub struct Catalog {
    pub store: Store,
    pub provenance: Provenance,
    pub workflow: Workflow,
    pub vocab: Vocabulary,
    pub naming: Naming,
    pub profile: AuditProfile,
    pub agent: Iri,
}

pub const T0: i64 = 1_700_000_000;

/// Both fixture tables loaded through the same path the command line uses:
/// mapping output and process quads enter the store via `record_changes`.
pub fn gold_catalog() -> Catalog {
    let vocab = Vocabulary::default();
    let naming = Naming::new(BASE).unwrap();
    let agent = naming.agent("cataloguer");
    let mut store = Store::new();
    let mut provenance = Provenance::new();

    let table = Table::from_csv("bibliographic", &fixture("bibliographic.csv")).unwrap();
    let doc = parse_mapping(&bibliographic_mapping(&vocab, &naming, "bibliographic")).unwrap();
    let mapped = execute_mapping(&doc, &[table]).unwrap();
    let source = iri(&format!("{BASE}table/bibliographic/bibliographic.csv"));
    provenance
        .record_changes(
            &mut store,
            &Dataset::new(),
            &mapped,
            &agent,
            Some(&source),
            Timestamp::from_unix(T0),
        )
        .unwrap();

    let process = Table::from_csv("process", &fixture("process.csv")).unwrap();
    let data = ingest_process_table(&process, &naming).unwrap();
    let quads = process_dataset(&data, &vocab, &naming);
    let source = iri(&format!("{BASE}table/process/process.csv"));
    provenance
        .record_changes(
            &mut store,
            &Dataset::new(),
            &quads,
            &agent,
            Some(&source),
            Timestamp::from_unix(T0 + 60),
        )
        .unwrap();
    let mut workflow = Workflow::new();
    data.apply_to(&mut workflow).unwrap();

    Catalog {
        store,
        provenance,
        workflow,
        profile: AuditProfile::new(&vocab),
        vocab,
        naming,
        agent,
    }
}

// ---------------------------------------------------------------------------
// Random terms covering every escape class

const LEXICAL_POOL: &[&str] = &[
    "",
    "plain",
    "with space",
    "quote\"inside",
    "back\\slash",
    "new\nline",
    "carriage\rreturn",
    "tab\there",
    "bell\u{7}",
    "nul\u{0}",
    "del\u{7F}",
    "unit\u{1F}sep",
    "è accentato",
    "日本語",
    "emoji 😀",
    "mixed \"\\\n\r\t\u{1}",
    "trailing\\",
    "\"",
    "  ",
    "a@b.c",
];

pub fn random_iri(r: &mut StdRng) -> Iri {
    const POOL: &[&str] = &[
        "http://ex.org/a",
        "http://ex.org/b",
        "http://ex.org/c",
        "https://ex.org/d#frag",
        "urn:isbn:978",
        "http://ex.org/%C3%A8",
        "http://ex.org/è",
        "http://ex.org/x?y=1&z=2",
        "tag:ex.org,2024:id",
        "http://ex.org/p",
        "http://ex.org/q",
    ];
    if r.gen_bool(0.7) {
        iri(POOL.choose(r).unwrap())
    } else {
        iri(&format!("http://ex.org/n/{}", r.gen_range(0..50)))
    }
}

pub fn random_literal(r: &mut StdRng) -> Literal {
    let mut text = (*LEXICAL_POOL.choose(r).unwrap()).to_owned();
    if r.gen_bool(0.3) {
        text.push_str(&r.gen_range(0..100).to_string());
    }
    match r.gen_range(0..4) {
        0 => Literal::lang(
            text,
            ["en", "it", "en-GB", "zh-Hant-TW"]
                .choose(r)
                .unwrap()
                .to_string(),
        )
        .unwrap(),
        1 => Literal::typed(text, iri("http://www.w3.org/2001/XMLSchema#integer")),
        _ => Literal::string(text),
    }
}

pub fn random_blank(r: &mut StdRng) -> BlankNode {
    BlankNode::new(format!("b{}", r.gen_range(0..10))).unwrap()
}

pub fn random_quad(r: &mut StdRng) -> Quad {
    let subject: Subject = if r.gen_bool(0.15) {
        Subject::Blank(random_blank(r))
    } else {
        random_iri(r).into()
    };
    let object: Term = match r.gen_range(0..10) {
        0 => Term::Blank(random_blank(r)),
        1..=4 => random_iri(r).into(),
        _ => random_literal(r).into(),
    };
    let graph = match r.gen_range(0..3) {
        0 => None,
        _ => Some(iri(&format!("http://ex.org/g/{}", r.gen_range(0..4)))),
    };
    Quad::new(subject, random_iri(r), object, graph)
}

pub fn random_dataset(r: &mut StdRng, n: usize) -> Dataset {
    let mut d = Dataset::new();
    let mut attempts = 0;
    while d.len() < n && attempts < n * 50 {
        d.insert(random_quad(r));
        attempts += 1;
    }
    d
}

/// A delta that applies strictly to `store`: deletions drawn from the store,
/// insertions absent from it.
pub fn random_strict_delta(r: &mut StdRng, store: &Dataset) -> Delta {
    let deletes: Dataset = store.iter().filter(|_| r.gen_bool(0.3)).cloned().collect();
    let mut inserts = Dataset::new();
    for _ in 0..r.gen_range(0..10) {
        let q = random_quad(r);
        if !store.contains(&q) {
            inserts.insert(q);
        }
    }
    Delta::new(deletes, inserts).unwrap()
}

/// Any delta with disjoint sides (possibly including blank nodes).
pub fn random_delta(r: &mut StdRng) -> Delta {
    let (nd, ni) = (r.gen_range(0..8), r.gen_range(0..8));
    let deletes = random_dataset(r, nd);
    let inserts: Dataset = random_dataset(r, ni).difference(&deletes);
    Delta::new(deletes, inserts).unwrap()
}

// ---------------------------------------------------------------------------
// Brute-force BGP oracle: full scan per pattern, bag semantics.

fn oracle_bind(p: &PatternTerm, value: &Term, sol: &mut Solution) -> bool {
    match p {
        PatternTerm::Any => true,
        PatternTerm::Term(t) => t == value,
        PatternTerm::Variable(v) => match sol.get(v) {
            Some(bound) => bound == value,
            None => {
                sol.insert(v.clone(), value.clone());
                true
            }
        },
    }
}

pub fn brute_force_bgp(quads: &[Quad], patterns: &[QuadPattern]) -> Vec<Solution> {
    let mut solutions = vec![Solution::new()];
    for p in patterns {
        let mut next = Vec::new();
        for sol in &solutions {
            for q in quads {
                let mut s = sol.clone();
                let subject: Term = q.subject.clone().into();
                let ok = oracle_bind(&p.subject, &subject, &mut s)
                    && oracle_bind(&p.predicate, &Term::Iri(q.predicate.clone()), &mut s)
                    && oracle_bind(&p.object, &q.object, &mut s)
                    && match (&p.graph, &q.graph) {
                        (GraphPattern::Any, _) => true,
                        (GraphPattern::Default, g) => g.is_none(),
                        (GraphPattern::Named(n), g) => g.as_ref() == Some(n),
                        (GraphPattern::Variable(v), Some(g)) => oracle_bind(
                            &PatternTerm::Variable(v.clone()),
                            &Term::Iri(g.clone()),
                            &mut s,
                        ),
                        (GraphPattern::Variable(_), None) => false,
                    };
                if ok {
                    next.push(s);
                }
            }
        }
        solutions = next;
    }
    solutions
}

pub fn as_multiset(solutions: &[Solution]) -> BTreeMap<Vec<(String, String)>, usize> {
    let mut out = BTreeMap::new();
    for s in solutions {
        let key = s.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

/// Patterns anchored on a stored quad so that constants co-occur and joins
/// have something to find.
pub fn random_bgp(r: &mut StdRng, quads: &[Quad]) -> Vec<QuadPattern> {
    const VARS: &[&str] = &["x", "y", "z"];
    let n = r.gen_range(1..=3);
    (0..n)
        .map(|_| {
            let anchor = quads.choose(r).cloned().unwrap_or_else(|| random_quad(r));
            let values: [Term; 3] = [
                anchor.subject.clone().into(),
                Term::Iri(anchor.predicate.clone()),
                anchor.object.clone(),
            ];
            let [subject, predicate, object] = values.map(|v| match r.gen_range(0..6) {
                0 => PatternTerm::Any,
                1..=3 => PatternTerm::var(VARS.choose(r).unwrap()),
                _ => PatternTerm::Term(v),
            });
            let graph = match r.gen_range(0..5) {
                0 => GraphPattern::Default,
                1 => GraphPattern::Variable("g".into()),
                2 => anchor
                    .graph
                    .clone()
                    .map_or(GraphPattern::Default, GraphPattern::Named),
                _ => GraphPattern::Any,
            };
            QuadPattern {
                subject,
                predicate,
                object,
                graph,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Percent-encoding oracle written from the character-class definition.

pub fn percent_encode_oracle(value: &str) -> String {
    let mut out = String::new();
    for b in value.bytes() {
        let unreserved = b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~');
        if unreserved {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Random provenance histories with an independently tracked truth.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Create,
    Modify,
    Merge,
    Delete,
}

pub struct History {
    pub store: Store,
    pub provenance: Provenance,
    pub entities: Vec<Iri>,
    /// Per entity: the time of every event touching it and the entity's
    /// quads right after that event.
    pub truth: BTreeMap<Iri, Vec<(Timestamp, Dataset)>>,
    pub kinds: Vec<EventKind>,
}

fn entity_quad(r: &mut StdRng, entity: &Iri) -> Quad {
    let object: Term = if r.gen_bool(0.5) {
        random_literal(r).into()
    } else {
        random_iri(r).into()
    };
    let graph = r
        .gen_bool(0.5)
        .then(|| iri(&format!("{}/record", entity.as_str())));
    Quad::new(
        entity.clone(),
        iri(&format!("http://ex.org/p/{}", r.gen_range(0..5))),
        object,
        graph,
    )
}

/// Plays `events` random events over `n_entities` entities. The truth map is
/// maintained by direct set manipulation, never by reading the chains.
pub fn random_history(r: &mut StdRng, n_entities: usize, events: usize) -> History {
    let entities: Vec<Iri> = (0..n_entities)
        .map(|i| iri(&format!("http://ex.org/entity/{i}")))
        .collect();
    let agent = iri("http://ex.org/agent/tester");
    let mut store = Store::new();
    let mut provenance = Provenance::new();
    let mut state: BTreeMap<Iri, Dataset> = BTreeMap::new();
    let mut created: BTreeMap<Iri, bool> = BTreeMap::new(); // entity -> live
    let mut truth: BTreeMap<Iri, Vec<(Timestamp, Dataset)>> = BTreeMap::new();
    let mut kinds = Vec::new();
    let mut time = Timestamp::from_unix(T0);

    let record = |truth: &mut BTreeMap<Iri, Vec<(Timestamp, Dataset)>>,
                  e: &Iri,
                  t: Timestamp,
                  d: &Dataset| {
        truth.entry(e.clone()).or_default().push((t, d.clone()));
    };

    while kinds.len() < events {
        time = time.plus_seconds(r.gen_range(1..100));
        let live: Vec<Iri> = created
            .iter()
            .filter(|(_, l)| **l)
            .map(|(e, _)| e.clone())
            .collect();
        let fresh: Vec<Iri> = entities
            .iter()
            .filter(|e| !created.contains_key(*e))
            .cloned()
            .collect();
        let kind = match r.gen_range(0..10) {
            0..=2 if !fresh.is_empty() => EventKind::Create,
            3..=6 if !live.is_empty() => EventKind::Modify,
            7 if live.len() >= 3 => EventKind::Merge,
            8 if live.len() >= 3 => EventKind::Delete,
            _ if !fresh.is_empty() => EventKind::Create,
            _ if !live.is_empty() => EventKind::Modify,
            _ => break,
        };
        match kind {
            EventKind::Create => {
                let e = fresh.choose(r).unwrap().clone();
                let initial: Dataset = (0..r.gen_range(1..6)).map(|_| entity_quad(r, &e)).collect();
                provenance
                    .record_creation(&mut store, &e, initial.clone(), &agent, None, time)
                    .unwrap();
                created.insert(e.clone(), true);
                state.insert(e.clone(), initial.clone());
                record(&mut truth, &e, time, &initial);
            }
            EventKind::Modify => {
                let e = live.choose(r).unwrap().clone();
                let current = state[&e].clone();
                let deletes: Dataset = current
                    .iter()
                    .filter(|_| r.gen_bool(0.4))
                    .cloned()
                    .collect();
                let inserts: Dataset = (0..r.gen_range(0..4))
                    .map(|_| entity_quad(r, &e))
                    .filter(|q| !current.contains(q))
                    .collect();
                let delta = Delta::new(deletes.clone(), inserts.clone()).unwrap();
                provenance
                    .record_modification(&mut store, &e, delta, &agent, None, time)
                    .unwrap();
                let next = current.difference(&deletes).union(&inserts);
                state.insert(e.clone(), next.clone());
                record(&mut truth, &e, time, &next);
            }
            EventKind::Merge => {
                let mut pair = live.clone();
                pair.shuffle(r);
                let (survivor, absorbed) = (pair[0].clone(), pair[1].clone());
                provenance
                    .record_merge(&mut store, &survivor, &absorbed, &agent, None, time)
                    .unwrap();
                let moved: Dataset = state[&absorbed]
                    .iter()
                    .map(|q| q.with_subject(survivor.clone().into()))
                    .collect();
                let merged = state[&survivor].union(&moved);
                state.insert(survivor.clone(), merged.clone());
                state.insert(absorbed.clone(), Dataset::new());
                created.insert(absorbed.clone(), false);
                record(&mut truth, &survivor, time, &merged);
                record(&mut truth, &absorbed, time, &Dataset::new());
            }
            EventKind::Delete => {
                let e = live.choose(r).unwrap().clone();
                provenance
                    .record_deletion(&mut store, &e, &agent, None, time)
                    .unwrap();
                state.insert(e.clone(), Dataset::new());
                created.insert(e.clone(), false);
                record(&mut truth, &e, time, &Dataset::new());
            }
        }
        kinds.push(kind);
    }
    History {
        store,
        provenance,
        entities,
        truth,
        kinds,
    }
}

/// Truth state of `entity` at `time` (the last event at or before it).
pub fn truth_at(history: &History, entity: &Iri, time: Timestamp) -> Dataset {
    history
        .truth
        .get(entity)
        .and_then(|events| events.iter().rev().find(|(t, _)| *t <= time))
        .map(|(_, d)| d.clone())
        .unwrap_or_default()
}

// ---------------------------------------------------------------------------
// Mapping inputs

pub fn split_table(table: &Table, mask: &[bool]) -> (Table, Table) {
    let header = table.header().to_vec();
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for (row, &m) in table.raw_rows().iter().zip(mask) {
        if m { &mut left } else { &mut right }.push(row.clone());
    }
    (
        Table::new(table.name(), header.clone(), left).unwrap(),
        Table::new(table.name(), header, right).unwrap(),
    )
}

pub fn random_objects_table(r: &mut rand::rngs::StdRng, rows: usize) -> Table {
    const TITLES: &[&str] = &[
        "vaso",
        "Erbario, vol. 1",
        "Ritratto \"bis\"",
        "",
        "città",
        "a/b?c",
    ];
    const TYPES: &[&str] = &["Vase", "Herbarium", "", "Painting"];
    const DATES: &[&str] = &["12/03/1590", "1595-01-01", "", "not a date", "2020.10.01"];
    let header: Vec<String> = ["id", "title", "creator", "made", "keeper", "type"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = (0..rows)
        .map(|_| {
            vec![
                r.gen_range(0..20).to_string(),
                TITLES.choose(r).unwrap().to_string(),
                ["", "Niccolò", "Anna Maria"].choose(r).unwrap().to_string(),
                DATES.choose(r).unwrap().to_string(),
                ["", "http://viaf.org/viaf/1"]
                    .choose(r)
                    .unwrap()
                    .to_string(),
                TYPES.choose(r).unwrap().to_string(),
            ]
        })
        .collect();
    Table::new("objects", header, rows).unwrap()
}

// ---------------------------------------------------------------------------
// Audit monotonicity

/// A quad carrying one metadata term on one of the gold catalog's objects or
/// records, in the default graph or a record graph.
pub fn random_metadata_quad(r: &mut StdRng, c: &Catalog) -> Quad {
    const ROLES: [Role; 13] = [
        Role::Title,
        Role::Identifier,
        Role::Licence,
        Role::RightsHolder,
        Role::AccessRights,
        Role::Creator,
        Role::Keeper,
        Role::Registration,
        Role::ConformsTo,
        Role::HasFormat,
        Role::StorageLocation,
        Role::BackupLocation,
        Role::AccessUrl,
    ];
    let id = ["1", "2"].choose(r).unwrap();
    let subject = match r.gen_range(0..4) {
        0 => c.naming.cho(id),
        1 => c.naming.dcho(id),
        2 => c.naming.cho_record(id),
        _ => c.naming.dcho_record(id),
    };
    let object: Term = if r.gen_bool(0.5) {
        Literal::string(format!("value {}", r.gen_range(0..1000))).into()
    } else {
        random_iri(r).into()
    };
    let graph = match r.gen_range(0..3) {
        0 => None,
        1 => Some(c.naming.cho_record("1")),
        _ => Some(c.naming.dcho_record("2")),
    };
    Quad::new(
        subject,
        c.vocab.term(*ROLES.choose(r).unwrap()).clone(),
        object,
        graph,
    )
}

/// `(check, subject)` pairs that passed in `before` but not in `after`.
pub fn broken_passes(before: &FairReport, after: &FairReport) -> Vec<String> {
    before
        .results
        .iter()
        .filter(|p| p.outcome == Outcome::Pass)
        .filter(|p| {
            !after.results.iter().any(|n| {
                n.subject == p.subject && n.check_id == p.check_id && n.outcome == Outcome::Pass
            })
        })
        .map(|p| format!("{} {}", p.check_id, p.subject.as_str()))
        .collect()
}
