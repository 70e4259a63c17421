use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use heritage_bench::{dataset, history, objects_table};
use heritage_core::mapping::{execute_mapping, parse_mapping};
use heritage_core::provenance::Timestamp;
use heritage_core::rdf::{parse_nquads, serialize_nquads};
use heritage_core::store::{parse_bgp, Store};

const MAPPING: &str = "prefixes:
  ex: http://example.org/
  dct: http://purl.org/dc/terms/
mappings:
  object:
    sources: [objects]
    s: ex:obj/$(id)
    po:
      - [a, ex:$(type)~iri]
      - [dct:title, $(title), @it]
      - [dct:creator, ex:agent/$(creator)~iri]
      - [dct:created, fn(date, $(made)), xsd:date]
      - [ex:keeper, $(keeper)~iri]
";

fn nquads(c: &mut Criterion) {
    let mut g = c.benchmark_group("nquads");
    for n in [1_000, 10_000] {
        let data = dataset(n, 1);
        let text = serialize_nquads(&data);
        g.bench_with_input(BenchmarkId::new("serialize", n), &data, |b, d| {
            b.iter(|| serialize_nquads(black_box(d)))
        });
        g.bench_with_input(BenchmarkId::new("parse", n), &text, |b, t| {
            b.iter(|| parse_nquads(black_box(t)).unwrap())
        });
    }
    g.finish();
}

fn bgp(c: &mut Criterion) {
    let mut g = c.benchmark_group("bgp");
    let patterns = parse_bgp(
        "?a <http://ex.org/p/1> ?b .\n?b <http://ex.org/p/2> ?c .\n?c <http://ex.org/p/3> ?d ?g",
    )
    .unwrap();
    for n in [1_000, 10_000] {
        let store = Store::from_dataset(dataset(n, 2));
        g.bench_with_input(BenchmarkId::new("three_way_join", n), &store, |b, s| {
            b.iter(|| s.bgp_query(black_box(&patterns)))
        });
    }
    g.finish();
}

fn mapping(c: &mut Criterion) {
    let doc = parse_mapping(MAPPING).unwrap();
    let table = [objects_table(1_000)];
    c.bench_function("mapping/1000_rows", |b| {
        b.iter(|| execute_mapping(black_box(&doc), black_box(&table)).unwrap())
    });
}

fn restore(c: &mut Criterion) {
    let mut g = c.benchmark_group("restore");
    for events in [10, 100, 1_000] {
        let (store, prov, entity) = history(events);
        let earliest = Timestamp::from_unix(1_700_000_000);
        g.bench_with_input(BenchmarkId::new("to_creation", events), &events, |b, _| {
            b.iter(|| {
                prov.restore_state(&store, &entity, black_box(earliest))
                    .unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, nquads, bgp, mapping, restore);
criterion_main!(benches);
