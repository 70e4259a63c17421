//! Deterministic synthetic inputs for the benchmarks.

use heritage_core::mapping::Table;
use heritage_core::provenance::{Provenance, Timestamp};
use heritage_core::rdf::{Dataset, Iri, Literal, Quad};
use heritage_core::store::{Delta, Store};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn iri(text: String) -> Iri {
    Iri::new(text).expect("generated IRIs are absolute")
}

/// `n` quads over `n / 8` subjects, eight predicates and four named graphs.
pub fn dataset(n: usize, seed: u64) -> Dataset {
    let mut r = StdRng::seed_from_u64(seed);
    let subjects = (n / 8).max(1);
    let mut d = Dataset::new();
    while d.len() < n {
        let s = iri(format!("http://ex.org/s/{}", r.gen_range(0..subjects)));
        let p = iri(format!("http://ex.org/p/{}", r.gen_range(0..8)));
        let g = r
            .gen_bool(0.5)
            .then(|| iri(format!("http://ex.org/g/{}", r.gen_range(0..4))));
        let q = if r.gen_bool(0.5) {
            let o = iri(format!("http://ex.org/s/{}", r.gen_range(0..subjects)));
            Quad::new(s, p, o, g)
        } else {
            let o = Literal::string(format!("value \"{}\"\n", r.gen_range(0..1000)));
            Quad::new(s, p, o, g)
        };
        d.insert(q);
    }
    d
}

/// Objects table for the mapping benchmark.
pub fn objects_table(rows: usize) -> Table {
    let header = ["id", "title", "creator", "made", "keeper", "type"]
        .map(String::from)
        .to_vec();
    let rows = (0..rows)
        .map(|i| {
            vec![
                i.to_string(),
                format!("Oggetto n. {i}"),
                format!("Autore {}", i % 50),
                format!("{:02}/03/1{:03}", 1 + i % 28, i % 1000),
                "http://viaf.org/viaf/1".into(),
                ["Vase", "Herbarium", "Painting"][i % 3].into(),
            ]
        })
        .collect();
    Table::new("objects", header, rows).expect("rectangular table")
}

/// One entity with `events` modification snapshots after its creation.
pub fn history(events: usize) -> (Store, Provenance, Iri) {
    let entity = iri("http://ex.org/entity/1".into());
    let agent = iri("http://ex.org/agent".into());
    let p = iri("http://ex.org/p/value".into());
    let mut store = Store::new();
    let mut prov = Provenance::new();
    let t0 = Timestamp::from_unix(1_700_000_000);
    let first = Quad::new(entity.clone(), p.clone(), Literal::string("0"), None);
    prov.record_creation(
        &mut store,
        &entity,
        Dataset::from_iter([first.clone()]),
        &agent,
        None,
        t0,
    )
    .expect("fresh entity");
    let mut current = first;
    for i in 1..=events {
        let next = Quad::new(
            entity.clone(),
            p.clone(),
            Literal::string(i.to_string()),
            None,
        );
        let delta = Delta::new(
            Dataset::from_iter([current]),
            Dataset::from_iter([next.clone()]),
        )
        .expect("disjoint sides");
        prov.record_modification(
            &mut store,
            &entity,
            delta,
            &agent,
            None,
            t0.plus_seconds(i as i64),
        )
        .expect("increasing times");
        current = next;
    }
    (store, prov, entity)
}
