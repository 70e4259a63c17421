//! Acceptance criteria, one test each. Every test writes a single
//! `PASS <criterion>: ...` or `FAIL <criterion>: ...` line to standard output.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::{Path, PathBuf};
use std::time::Instant;

use common::*;
use heritage_core::audit::{check_registry, run_audit, FairReport, Outcome};
use heritage_core::mapping::{execute_mapping, parse_mapping, Table};
use heritage_core::rdf::{parse_nquads, serialize_nquads, Quad};
use heritage_core::store::{parse_update, serialize_update, solutions_csv, ApplyMode, Store};
use heritage_core::vocab::Role;
use heritage_core::workflow::{
    storage_report, validate_asset, AssetKind, AssetVersion, ConstraintProfile, Manifest,
};
use rand::Rng;
use sha2::{Digest, Sha256};

type Verdict = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {} else {
            return Err(format!($($msg)+));
        }
    };
}

fn verdict(criterion: &str, result: Verdict) {
    let line = match &result {
        Ok(detail) => format!("PASS {criterion}: {detail}\n"),
        Err(reason) => format!("FAIL {criterion}: {reason}\n"),
    };
    // written past the test harness's capture so the line always shows
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    if let Err(reason) = result {
        panic!("{criterion}: {reason}");
    }
}

// ---------------------------------------------------------------------------

#[test]
fn provenance_duality() {
    verdict(
        "provenance duality",
        (|| {
            let started = Instant::now();
            let (mut restores, mut merges) = (0, 0);
            for seed in 0..20 {
                let h = random_history(&mut rng(5000 + seed), 10, 50);
                ensure!(
                    h.kinds.len() == 50,
                    "history {seed} has {} events",
                    h.kinds.len()
                );
                merges += h.kinds.iter().filter(|k| **k == EventKind::Merge).count();
                for chain in h.provenance.chains() {
                    for s in &chain.snapshots {
                        let restored = h
                            .provenance
                            .restore_state(&h.store, &chain.entity, s.generated_at)
                            .map_err(|e| e.to_string())?;
                        ensure!(
                            restored == truth_at(&h, &chain.entity, s.generated_at),
                            "seed {seed}: {} differs from forward replay",
                            s.iri
                        );
                        restores += 1;
                    }
                }
            }
            let secs = started.elapsed().as_secs_f64();
            ensure!(merges > 0, "no merge events generated");
            ensure!(secs < 5.0, "took {secs:.2} s");
            Ok(format!(
                "20 histories, {restores} restores, {merges} merges, {secs:.2} s"
            ))
        })(),
    );
}

#[test]
fn delta_algebra() {
    verdict(
        "delta algebra",
        (|| {
            let mut r = rng(5100);
            for case in 0..1000 {
                let size = r.gen_range(0..40);
                let initial = random_dataset(&mut r, size);
                let mut store = Store::from_dataset(initial.clone());
                let before = store.to_nquads();
                let delta = random_strict_delta(&mut r, &initial);
                ensure!(
                    delta.invert().invert() == delta,
                    "case {case}: invert is not an involution"
                );
                store
                    .apply_delta(&delta, ApplyMode::Strict)
                    .map_err(|e| format!("case {case}: {e}"))?;
                store
                    .apply_delta(&delta.invert(), ApplyMode::Strict)
                    .map_err(|e| format!("case {case}: {e}"))?;
                ensure!(
                    store.to_nquads() == before,
                    "case {case}: store not restored"
                );
            }
            Ok("1000 random store/delta pairs".into())
        })(),
    );
}

#[test]
fn serialization_round_trips() {
    verdict(
        "serialization round trips",
        (|| {
            let data = random_dataset(&mut rng(5200), 1000);
            ensure!(data.len() == 1000, "fixture has {} quads", data.len());
            let text = serialize_nquads(&data);
            for class in [
                "\\\"", "\\\\", "\\n", "\\r", "\\u0000", "\\u007F", "@", "^^<", "_:",
            ] {
                ensure!(text.contains(class), "fixture lacks escape class {class}");
            }
            let parsed = parse_nquads(&text).map_err(|e| e.to_string())?;
            ensure!(parsed == data, "parse(serialize(d)) != d");
            ensure!(
                serialize_nquads(&parsed) == text,
                "serialize(parse(t)) != t"
            );
            let mut r = rng(5201);
            for case in 0..200 {
                let delta = random_delta(&mut r);
                let text = serialize_update(&delta);
                let back = parse_update(&text).map_err(|e| format!("case {case}: {e}"))?;
                ensure!(back == delta, "case {case}: update round trip differs");
            }
            Ok("1000-quad fixture, 200 update deltas".into())
        })(),
    );
}

#[test]
fn mapping_golden_file() {
    verdict(
        "mapping golden file",
        (|| {
            let doc = parse_mapping(&fixture("objects.yml")).map_err(|e| e.to_string())?;
            let table =
                Table::from_csv("objects", &fixture("objects.csv")).map_err(|e| e.to_string())?;
            let run = |t: &Table| {
                execute_mapping(&doc, std::slice::from_ref(t)).map_err(|e| e.to_string())
            };
            let first = serialize_nquads(&run(&table)?);
            ensure!(
                first == fixture("objects.nt"),
                "output differs from the golden file"
            );
            ensure!(
                serialize_nquads(&run(&table)?) == first,
                "second run differs"
            );
            let mut r = rng(5300);
            for case in 0..50 {
                let rows = r.gen_range(0..12);
                let t = random_objects_table(&mut r, rows);
                let mask: Vec<bool> = (0..t.len()).map(|_| r.gen_bool(0.5)).collect();
                let (a, b) = split_table(&t, &mask);
                ensure!(
                    run(&t)? == run(&a)?.union(&run(&b)?),
                    "row union fails on split {case}"
                );
            }
            Ok(format!("{} golden lines, 50 splits", first.lines().count()))
        })(),
    );
}

fn asset(kind: AssetKind, format: &str) -> AssetVersion {
    AssetVersion {
        id: iri("http://ex.org/asset/a"),
        dcho: iri("http://ex.org/dcho/1"),
        kind,
        format: format.into(),
        size_bytes: 1,
        polygon_count: Some(600_000),
        texture_width: None,
        texture_height: None,
        texture_format: None,
        checksum: "00".into(),
    }
}

#[test]
fn constraint_boundaries() {
    verdict(
        "constraint boundaries",
        (|| {
            let p = ConstraintProfile::default();
            let passes = |a: &AssetVersion| validate_asset(a, &p, Some("SLS")).is_empty();
            let mut cases: Vec<(String, AssetVersion, bool)> = Vec::new();
            for (polys, ok) in [(1_000_000, true), (1_000_001, false)] {
                let a = AssetVersion {
                    polygon_count: Some(polys),
                    ..asset(AssetKind::ProcessedRaw, "OBJ")
                };
                cases.push((format!("{polys} polygons"), a, ok));
            }
            for (side, ok) in [(16_384, true), (16_385, false)] {
                let a = AssetVersion {
                    texture_width: Some(side),
                    texture_height: Some(side),
                    texture_format: Some("PNG".into()),
                    ..asset(AssetKind::HighPoly, "OBJ")
                };
                cases.push((format!("{side} px texture"), a, ok));
            }
            for (bytes, ok) in [(800_000_000, true), (800_000_001, false)] {
                let a = AssetVersion {
                    size_bytes: bytes,
                    ..asset(AssetKind::ProcessedRaw, "OBJ")
                };
                cases.push((format!("{bytes} bytes"), a, ok));
            }
            for (format, ok) in [("GLTF", true), ("GLB", true), ("OBJ", false)] {
                cases.push((
                    format!("optimised {format}"),
                    asset(AssetKind::Optimised, format),
                    ok,
                ));
            }
            for (name, a, ok) in &cases {
                ensure!(
                    passes(a) == *ok,
                    "{name}: expected {}",
                    if *ok { "pass" } else { "fail" }
                );
            }
            Ok(format!("{} boundary cases", cases.len()))
        })(),
    );
}

#[test]
fn storage_distribution() {
    verdict(
        "storage distribution",
        (|| {
            let gb = 1_000_000_000u64;
            let expected = [
                (AssetKind::RawMaterial, 46 * gb, 46.0),
                (AssetKind::ProcessedRaw, 43 * gb, 43.0),
                (AssetKind::HighPoly, 7 * gb, 7.0),
                (AssetKind::Optimised, gb / 2, 0.5),
                (AssetKind::Documentation, 7 * gb / 2, 3.5),
            ];
            let assets: Vec<AssetVersion> = expected
                .iter()
                .map(|&(kind, size, _)| AssetVersion {
                    size_bytes: size,
                    ..asset(kind, "X")
                })
                .collect();
            let report = storage_report(&assets);
            for (kind, _, pct) in expected {
                let got = report.percent(kind);
                ensure!((got - pct).abs() <= 0.1, "{kind}: {got} vs {pct}");
            }
            let mut r = rng(5400);
            for case in 0..1000 {
                let n = r.gen_range(1..30);
                let assets: Vec<AssetVersion> = (0..n)
                    .map(|_| AssetVersion {
                        size_bytes: r.gen_range(0..u64::MAX / 32),
                        ..asset(AssetKind::ALL[r.gen_range(0..5)], "X")
                    })
                    .collect();
                let report = storage_report(&assets);
                let sum: f64 = report.rows.iter().map(|row| row.percent).sum();
                ensure!(
                    report.total == 0 || (sum - 100.0).abs() <= 0.2,
                    "case {case}: sum {sum}"
                );
            }
            Ok("46.0/43.0/7.0/0.5/3.5, 1000 random sums".into())
        })(),
    );
}

fn audit(c: &Catalog, store: &Store) -> FairReport {
    run_audit(store, &c.provenance, &c.workflow, &c.vocab, &c.profile)
}

#[test]
fn fair_audit() {
    verdict(
        "FAIR audit",
        (|| {
            let c = gold_catalog();
            let gold = audit(&c, &c.store);
            let fails: Vec<String> = gold
                .fails()
                .map(|f| format!("{} {}", f.check_id, f.subject.as_str()))
                .collect();
            ensure!(fails.is_empty(), "gold catalog fails {fails:?}");
            let used: BTreeSet<&str> = gold.results.iter().map(|r| r.check_id).collect();
            ensure!(
                used.len() == check_registry().len(),
                "{} of {} checks evaluated",
                used.len(),
                check_registry().len()
            );

            let dcho = c.naming.dcho("2");
            let record = c.naming.dcho_record("2");
            let licence = c.vocab.term(Role::Licence).clone();
            let doomed: Vec<Quad> = c
                .store
                .iter()
                .filter(|q| {
                    q.predicate == licence
                        && [Some(&dcho), Some(&record)].contains(&q.subject.as_iri())
                })
                .cloned()
                .collect();
            let mut stripped = c.store.clone();
            stripped.delete_quads(&doomed);
            let after = audit(&c, &stripped);
            let flipped: BTreeSet<(String, &str)> = gold
                .results
                .iter()
                .zip(&after.results)
                .filter(|(b, a)| b.outcome != a.outcome)
                .map(|(_, a)| (a.subject.as_str().to_owned(), a.check_id))
                .collect();
            let want = BTreeSet::from([
                (dcho.as_str().to_owned(), "OBJ-R2"),
                (dcho.as_str().to_owned(), "MET-R2"),
                (record.as_str().to_owned(), "REC-R3"),
            ]);
            ensure!(flipped == want, "licence removal flipped {flipped:?}");
            ensure!(
                after
                    .results
                    .iter()
                    .filter(|r| r.outcome == Outcome::Fail)
                    .count()
                    == 3,
                "extra failures"
            );

            // half targeted metadata terms, half arbitrary quads
            let mut r = rng(5500);
            let mut store = c.store.clone();
            let mut previous = gold;
            for step in 0..100 {
                let q = if r.gen_bool(0.5) {
                    random_metadata_quad(&mut r, &c)
                } else {
                    random_quad(&mut r)
                };
                store.insert(q.clone());
                let next = audit(&c, &store);
                let broken = broken_passes(&previous, &next);
                ensure!(
                    broken.is_empty(),
                    "step {step}, adding {q} broke {broken:?}"
                );
                previous = next;
            }
            Ok(format!(
                "0 fails over {} checks, 3 flips, 100 monotone additions",
                used.len()
            ))
        })(),
    );
}

#[test]
fn query_correctness() {
    verdict(
        "query correctness",
        (|| {
            let mut r = rng(5600);
            let mut nonempty = 0;
            for case in 0..200 {
                let size = r.gen_range(0..=100);
                let data = random_dataset(&mut r, size);
                let quads: Vec<Quad> = data.iter().cloned().collect();
                let store = Store::from_dataset(data);
                let patterns = random_bgp(&mut r, &quads);
                let got = store.bgp_query(&patterns);
                ensure!(
                    as_multiset(&got) == as_multiset(&brute_force_bgp(&quads, &patterns)),
                    "case {case}: solutions differ from nested-loop oracle"
                );
                let mut reversed = Store::new();
                for q in quads.iter().rev() {
                    reversed.insert(q.clone());
                }
                let csv = solutions_csv(&patterns, &got);
                ensure!(
                    csv == solutions_csv(&patterns, &reversed.bgp_query(&patterns)),
                    "case {case}: CSV depends on insertion order"
                );
                nonempty += usize::from(!got.is_empty());
            }
            ensure!(nonempty > 50, "only {nonempty} cases had solutions");
            Ok(format!("200 cases, {nonempty} with solutions"))
        })(),
    );
}

// ---------------------------------------------------------------------------
// Command line

struct Run {
    code: u8,
    out: String,
    err: String,
}

fn cli(catalog: &Path, args: &[&str]) -> Run {
    let mut argv = vec![
        "heritage".to_string(),
        "--catalog".into(),
        catalog.display().to_string(),
    ];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = heritage_cli::run(argv, &mut std::io::empty(), &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8_lossy(&out).into_owned(),
        err: String::from_utf8_lossy(&err).into_owned(),
    }
}

fn digests(root: &Path) -> BTreeMap<PathBuf, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.clone(),
                    hex::encode(Sha256::digest(std::fs::read(&p).unwrap())),
                );
            }
        }
    }
    out
}

fn http_get(addr: SocketAddr, target: &str) -> Result<(u16, String, String), String> {
    let mut s = TcpStream::connect(addr).map_err(|e| e.to_string())?;
    write!(
        s,
        "GET {target} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
    )
    .map_err(|e| e.to_string())?;
    let mut raw = String::new();
    s.read_to_string(&mut raw).map_err(|e| e.to_string())?;
    let (head, body) = raw.split_once("\r\n\r\n").ok_or("malformed response")?;
    let status = head
        .split(' ')
        .nth(1)
        .and_then(|c| c.parse().ok())
        .ok_or("no status")?;
    Ok((status, head.to_ascii_lowercase(), body.to_owned()))
}

fn url_encode(text: &str) -> String {
    text.bytes()
        .map(|b| {
            if b.is_ascii_alphanumeric() {
                (b as char).to_string()
            } else {
                format!("%{b:02X}")
            }
        })
        .collect()
}

#[test]
fn cli_end_to_end() {
    verdict(
        "CLI end-to-end",
        (|| {
            let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
            let cat = tmp.path().join("catalog");
            let f = |name: &str| fixture_path(name).display().to_string();
            let steps: Vec<(Vec<String>, u8)> = vec![
                (vec!["init".into(), cat.display().to_string()], 0),
                (
                    vec![
                        "ingest".into(),
                        f("bibliographic.csv"),
                        "--kind".into(),
                        "bibliographic".into(),
                    ],
                    0,
                ),
                (
                    vec![
                        "ingest".into(),
                        f("process.csv"),
                        "--kind".into(),
                        "process".into(),
                    ],
                    0,
                ),
                (vec!["map".into(), f("objects.yml"), f("objects.csv")], 0),
                (vec!["validate".into()], 0),
                (vec!["audit".into()], 0),
                (
                    vec![
                        "prov".into(),
                        "restore".into(),
                        "dcho/1".into(),
                        "2999-01-01".into(),
                    ],
                    0,
                ),
                (vec!["report".into(), "bundle".into(), "1".into()], 0),
            ];
            let mut outputs = Vec::new();
            for (args, want) in &steps {
                let args: Vec<&str> = args.iter().map(String::as_str).collect();
                let r = cli(&cat, &args);
                ensure!(
                    r.code == *want,
                    "{} exited {} (want {want}): {}{}",
                    args[0],
                    r.code,
                    r.out,
                    r.err
                );
                outputs.push(r.out);
            }
            ensure!(
                outputs[3].trim() == "quads=18 entities=6",
                "map printed {:?}",
                outputs[3]
            );
            ensure!(
                !parse_nquads(&outputs[6])
                    .map_err(|e| e.to_string())?
                    .is_empty(),
                "restore printed nothing"
            );
            let bundle = cat.join("bundles/1");
            let manifest = Manifest::parse(
                &std::fs::read_to_string(bundle.join("manifest.txt")).map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())?;
            for e in &manifest.entries {
                let bytes = std::fs::read(bundle.join(&e.path)).map_err(|e| e.to_string())?;
                ensure!(
                    hex::encode(Sha256::digest(&bytes)) == e.sha256,
                    "digest mismatch for {}",
                    e.path
                );
            }
            ensure!(
                cli(&cat, &["prov", "restore", "dcho/404", "2999-01-01"]).code == 4,
                "unknown entity exit"
            );
            ensure!(cli(&cat, &["query", "?s ?p"]).code == 3, "bad pattern exit");
            ensure!(
                cli(&cat, &["init", &cat.display().to_string()]).code == 2,
                "init twice exit"
            );

            let before = digests(&cat);
            let read_only: [&[&str]; 7] = [
                &["query", "?s ?p ?o"],
                &["audit", "--format", "rdf"],
                &["validate"],
                &["report", "storage"],
                &["report", "status", "1"],
                &["prov", "log", "dcho/1"],
                &["prov", "restore", "dcho/1", "2022-01-01"],
            ];
            for args in read_only {
                cli(&cat, args);
                ensure!(digests(&cat) == before, "{args:?} changed catalog files");
            }

            let catalog =
                heritage_cli::CatalogDir::open(&cat).map_err(|f| format!("{:#}", f.error))?;
            let server =
                heritage_cli::server::start(catalog.store, 0).map_err(|e| e.to_string())?;
            let (status, _, _) = http_get(server.addr(), "/health")?;
            ensure!(status == 200, "/health answered {status}");
            let pattern = "?s <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> ?t";
            let (status, head, body) =
                http_get(server.addr(), &format!("/query?q={}", url_encode(pattern)))?;
            ensure!(
                status == 200 && head.contains("content-type: text/csv"),
                "/query answered {status}"
            );
            ensure!(
                body == cli(&cat, &["query", pattern]).out,
                "HTTP and CLI answers differ"
            );
            let (status, _, _) =
                http_get(server.addr(), &format!("/query?q={}", url_encode("?s ?p")))?;
            ensure!(status == 400, "bad query answered {status}");
            let (status, _, body) = http_get(
                server.addr(),
                &format!("/query?q={}", url_encode("?s <http://none.org/p> ?o")),
            )?;
            ensure!(
                status == 200 && body.is_empty(),
                "empty result answered {status} {body:?}"
            );
            Ok(format!(
                "{} steps, {} read-only commands, 4 HTTP probes",
                steps.len(),
                read_only.len()
            ))
        })(),
    );
}
