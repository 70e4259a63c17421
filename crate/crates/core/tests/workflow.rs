mod common;

use common::*;
use heritage_core::mapping::Table;
use heritage_core::rdf::Iri;
use heritage_core::workflow::{
    export_bundle, ingest_process_table, storage_report, validate_asset, AssetKind, AssetVersion,
    ConstraintProfile, Manifest, PhaseKind, PhaseStatus, Workflow, WorkflowError, MANIFEST_FILE,
};
use proptest::prelude::*;

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

fn violations(a: &AssetVersion, technique: &str) -> Vec<&'static str> {
    validate_asset(a, &ConstraintProfile::default(), Some(technique))
        .into_iter()
        .map(|v| v.constraint)
        .collect()
}

#[test]
fn polygon_bounds_are_inclusive() {
    let mut a = asset(AssetKind::ProcessedRaw, "OBJ");
    a.polygon_count = Some(1_000_000);
    assert!(violations(&a, "SLS").is_empty());
    a.polygon_count = Some(1_000_001);
    assert_eq!(violations(&a, "SLS"), ["scanned_polygons_max"]);
    a.polygon_count = Some(500_000);
    assert!(violations(&a, "SLS").is_empty());
    a.polygon_count = Some(499_999);
    assert_eq!(violations(&a, "SLS"), ["scanned_polygons_min"]);
    a.polygon_count = Some(5_000_000);
    assert!(
        violations(&a, "photogrammetry").is_empty(),
        "limits apply to scanned data only"
    );
}

#[test]
fn texture_side_limit() {
    let mut a = asset(AssetKind::HighPoly, "OBJ");
    a.texture_format = Some("PNG".into());
    a.texture_width = Some(16_384);
    a.texture_height = Some(16_384);
    assert!(violations(&a, "SLS").is_empty());
    a.texture_width = Some(16_385);
    let v = validate_asset(&a, &ConstraintProfile::default(), None);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].constraint, "texture_max_px");
    assert_eq!(v[0].observed, "16385x16384");
    a.texture_width = Some(16_384);
    a.texture_format = Some("TGA".into());
    assert_eq!(violations(&a, "SLS"), ["texture_formats"]);
}

#[test]
fn scanned_processed_size_limit() {
    let mut a = asset(AssetKind::ProcessedRaw, "OBJ");
    a.size_bytes = 800_000_000;
    assert!(violations(&a, "SLS").is_empty());
    a.size_bytes = 800_000_001;
    assert_eq!(violations(&a, "SLS"), ["sls_processed_max_bytes"]);
}

#[test]
fn optimised_models_are_gltf_only() {
    for ok in ["GLTF", "GLB"] {
        assert!(violations(&asset(AssetKind::Optimised, ok), "SLS").is_empty());
    }
    assert_eq!(
        violations(&asset(AssetKind::Optimised, "OBJ"), "SLS"),
        ["optimised_formats"]
    );
}

#[test]
fn storage_distribution_from_proportional_sizes() {
    let gb = 1_000_000_000u64;
    let sizes = [
        (AssetKind::RawMaterial, 46 * gb),
        (AssetKind::ProcessedRaw, 43 * gb),
        (AssetKind::HighPoly, 7 * gb),
        (AssetKind::Optimised, gb / 2),
        (AssetKind::Documentation, 7 * gb / 2),
    ];
    let assets: Vec<AssetVersion> = sizes
        .iter()
        .map(|&(kind, size)| AssetVersion {
            size_bytes: size,
            ..asset(kind, "X")
        })
        .collect();
    let report = storage_report(&assets);
    for (kind, expected) in [
        (AssetKind::RawMaterial, 46.0),
        (AssetKind::ProcessedRaw, 43.0),
        (AssetKind::HighPoly, 7.0),
        (AssetKind::Optimised, 0.5),
        (AssetKind::Documentation, 3.5),
    ] {
        assert!(
            (report.percent(kind) - expected).abs() <= 0.1,
            "{kind}: {}",
            report.percent(kind)
        );
    }
}

#[test]
fn gold_catalog_storage_and_status() {
    let c = gold_catalog();
    let report = storage_report(c.workflow.assets());
    assert_eq!(report.total, 100_000_000_000);
    assert_eq!(report.percent(AssetKind::RawMaterial), 46.0);
    assert_eq!(report.percent(AssetKind::Optimised), 0.5);

    let full = c.workflow.workflow_status(&c.naming.cho("1")).unwrap();
    assert!(full.iter().all(|(_, s)| *s == PhaseStatus::Complete));
    let partial = c.workflow.workflow_status(&c.naming.cho("2")).unwrap();
    let complete: Vec<PhaseKind> = partial
        .iter()
        .filter(|(_, s)| *s == PhaseStatus::Complete)
        .map(|(k, _)| *k)
        .collect();
    assert_eq!(complete, [PhaseKind::Acquisition, PhaseKind::Processing]);
    assert!(c.workflow.validate_all(&c.profile.constraints).is_empty());
}

#[test]
fn workflow_reloads_from_store() {
    let c = gold_catalog();
    let w = Workflow::from_store(&c.store, &c.vocab).unwrap();
    assert_eq!(w.assets().count(), c.workflow.assets().count());
    assert_eq!(w.all_phases().count(), c.workflow.all_phases().count());
    for a in c.workflow.assets() {
        assert!(w.assets().any(|b| b == a), "{}", a.id);
    }
    assert_eq!(w.uploads().count(), 1);
    let cho = c.naming.cho("1");
    assert_eq!(
        w.workflow_status(&cho).unwrap(),
        c.workflow.workflow_status(&cho).unwrap()
    );
}

#[test]
fn process_table_errors_name_lines_and_columns() {
    let naming = heritage_core::vocab::Naming::new(BASE).unwrap();
    let no_start = Table::from_csv(
        "p",
        "object_id,phase,unit,agents,technique,tools,end\n1,acquisition,u,a,SLS,t,2022-01-01\n",
    )
    .unwrap();
    assert!(
        matches!(ingest_process_table(&no_start, &naming), Err(WorkflowError::MissingColumn(c)) if c == "start")
    );
    let header = "object_id,phase,unit,agents,technique,tools,start,end\n";
    let bad_date = Table::from_csv(
        "p",
        &format!("{header}1,acquisition,u,a,SLS,t,2022-01-01,\n1,processing,u,a,,t,01/02/2022,\n"),
    )
    .unwrap();
    assert!(matches!(
        ingest_process_table(&bad_date, &naming),
        Err(WorkflowError::BadDate { line: 3, .. })
    ));
    let bad_phase =
        Table::from_csv("p", &format!("{header}1,scanning,u,a,SLS,t,2022-01-01,\n")).unwrap();
    assert!(matches!(
        ingest_process_table(&bad_phase, &naming),
        Err(WorkflowError::UnknownPhase { line: 2, .. })
    ));
}

#[test]
fn bundle_manifest_digests_verify() {
    let c = gold_catalog();
    let dir = tempfile::tempdir().unwrap();
    let dcho = c.naming.dcho("1");
    let manifest = export_bundle(
        &c.workflow,
        &c.store,
        &c.provenance,
        &c.vocab,
        &dcho,
        dir.path(),
    )
    .unwrap();
    assert_eq!(
        manifest.entries.len(),
        5 + 2,
        "five assets, descriptor and provenance"
    );
    let on_disk =
        Manifest::parse(&std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(on_disk, manifest);
    // independent recomputation
    use sha2::Digest;
    for e in &manifest.entries {
        let bytes = std::fs::read(dir.path().join(&e.path)).unwrap();
        assert_eq!(hex::encode(sha2::Sha256::digest(&bytes)), e.sha256);
        assert_eq!(bytes.len() as u64, e.bytes);
    }
    let descriptor = std::fs::read_to_string(dir.path().join("descriptor.txt")).unwrap();
    assert!(descriptor.contains("licence=http://creativecommons.org/publicdomain/zero/1.0/"));
    let prov = heritage_core::rdf::parse_nquads(
        &std::fs::read_to_string(dir.path().join("provenance.nq")).unwrap(),
    )
    .unwrap();
    assert!(!prov.is_empty());
}

fn profile_strategy() -> impl Strategy<Value = ConstraintProfile> {
    (
        1u64..2_000_000,
        1u64..2_000_000,
        1u32..40_000,
        1u64..2_000_000_000,
    )
        .prop_map(|(a, b, t, s)| ConstraintProfile {
            scanned_polygons_min: a.min(b),
            scanned_polygons_max: a.max(b),
            texture_max_px: t,
            sls_processed_max_bytes: s,
            ..ConstraintProfile::default()
        })
}

fn asset_strategy() -> impl Strategy<Value = AssetVersion> {
    (
        prop::sample::select(AssetKind::ALL.to_vec()),
        prop::sample::select(vec!["OBJ", "GLB", "PLY", "TIFF", "FBX", "PDF"]),
        1u64..3_000_000_000,
        1u64..3_000_000,
        prop::option::of(1u32..50_000),
        prop::option::of(1u32..50_000),
    )
        .prop_map(|(kind, format, size, polys, w, h)| AssetVersion {
            size_bytes: size,
            polygon_count: (kind != AssetKind::Documentation).then_some(polys),
            texture_width: w,
            texture_height: h,
            ..asset(kind, format)
        })
}

proptest! {
    #[test]
    fn loosening_limits_never_adds_violations(
        a in asset_strategy(),
        p in profile_strategy(),
        slack in (0u64..1_000_000, 0u32..10_000, 0u64..1_000_000_000),
        technique in prop::sample::select(vec!["SLS", "photogrammetry", "other"]),
    ) {
        let loose = ConstraintProfile {
            scanned_polygons_min: p.scanned_polygons_min.saturating_sub(slack.0),
            scanned_polygons_max: p.scanned_polygons_max + slack.0,
            texture_max_px: p.texture_max_px + slack.1,
            sls_processed_max_bytes: p.sls_processed_max_bytes + slack.2,
            ..p.clone()
        };
        let strict = validate_asset(&a, &p, Some(technique));
        let relaxed = validate_asset(&a, &loose, Some(technique));
        prop_assert!(relaxed.len() <= strict.len());
        for v in &relaxed {
            prop_assert!(strict.iter().any(|s| s.constraint == v.constraint));
        }
    }

    #[test]
    fn storage_percents_sum_to_hundred(sizes in prop::collection::vec((0usize..5, 0u64..u64::MAX / 8), 1..30)) {
        let assets: Vec<AssetVersion> = sizes
            .iter()
            .map(|&(k, s)| AssetVersion { size_bytes: s, ..asset(AssetKind::ALL[k], "X") })
            .collect();
        let report = storage_report(&assets);
        let sum: f64 = report.rows.iter().map(|r| r.percent).sum();
        if report.total > 0 {
            prop_assert!((sum - 100.0).abs() <= 0.2, "sum {}", sum);
        }
        for row in &report.rows {
            let exact = if report.total == 0 { 0.0 } else { row.bytes as f64 / report.total as f64 * 100.0 };
            prop_assert!((row.percent - exact).abs() <= 0.1 + 1e-9);
        }
    }
}

#[test]
fn unknown_objects_are_reported() {
    let w = Workflow::new();
    let ghost: Iri = iri("http://ex.org/cho/none");
    assert!(matches!(
        w.workflow_status(&ghost),
        Err(WorkflowError::NoSuchObject(_))
    ));
}
