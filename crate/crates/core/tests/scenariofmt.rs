use serde_json::Value;
use terasim_core::drf::{run_report, Convention, DrfReport, GridShape, RxReport};
use terasim_core::scenariofmt::{
    cells_csv, load_report, load_scenario, parse_scenario, save_report, save_scenario, scene_digest, summary_csv,
    FormatError, ReportDocument, ReportFormat, SimulationConfig,
};
use terasim_core::scene::build_grid;

fn fixture_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes/sitting_room.json")
}

fn fixture_value() -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture_path()).unwrap()).unwrap()
}

fn parse_value(v: &Value) -> Result<(terasim_core::scene::Scene, SimulationConfig), FormatError> {
    parse_scenario(&serde_json::to_string_pretty(v).unwrap())
}

#[test]
fn fixture_loads_with_727_positions() {
    let (scene, sim) = load_scenario(&fixture_path()).unwrap();
    let grid = build_grid(&scene, sim.grid.dx, sim.grid.dy).unwrap();
    assert_eq!(grid.free_count(), 727);
    assert_eq!(scene.ris.len(), 4);
    assert_eq!(scene.receivers().count(), 4);
}

#[test]
fn defaults_are_filled_in() {
    let (scene, sim) = load_scenario(&fixture_path()).unwrap();
    assert_eq!(sim.reflection_order, 1);
    assert_eq!(sim.phase_bits, 0);
    assert_eq!(sim.convention, Convention::Raw);
    for p in &scene.ris {
        assert_eq!(p.amplitude, 1.0);
        assert_eq!(p.phase_bits, 0);
    }
}

#[test]
fn scenario_round_trip() {
    let (scene, sim) = load_scenario(&fixture_path()).unwrap();
    let text = save_scenario(&scene, &sim).unwrap();
    let (scene2, sim2) = parse_scenario(&text).unwrap();
    assert_eq!(scene, scene2);
    assert_eq!(sim, sim2);
    assert_eq!(save_scenario(&scene2, &sim2).unwrap(), text);
}

#[test]
fn negative_pitch_names_the_field() {
    let mut v = fixture_value();
    v["ris"][0]["d_x"] = (-1.0).into();
    match parse_value(&v) {
        Err(FormatError::Schema { path, .. }) => assert_eq!(path, "ris[0].d_x"),
        other => panic!("expected schema error, got {other:?}"),
    }
}

#[test]
fn unknown_field_is_rejected_with_path() {
    let mut v = fixture_value();
    v["nodes"][1]["colour"] = "red".into();
    match parse_value(&v) {
        Err(FormatError::Schema { path, .. }) => assert!(path.starts_with("nodes[1]"), "{path}"),
        other => panic!("expected schema error, got {other:?}"),
    }
}

#[test]
fn dangling_material_reference() {
    let mut v = fixture_value();
    v["obstacles"][2]["material"] = "unobtainium".into();
    match parse_value(&v) {
        Err(FormatError::DanglingReference { id, .. }) => assert_eq!(id, "unobtainium"),
        other => panic!("expected dangling reference, got {other:?}"),
    }
    let mut v = fixture_value();
    v["materials"].as_array_mut().unwrap().push("unobtainium".into());
    assert!(matches!(parse_value(&v), Err(FormatError::DanglingReference { .. })));
}

#[test]
fn syntax_error_reports_line_and_column() {
    let text = "{\n  \"schema\": \"thz-scene/1\",\n  \"frequency_ghz\": 300,,\n}";
    match parse_scenario(text) {
        Err(FormatError::Parse { line, column, .. }) => {
            assert_eq!(line, 3);
            assert!(column > 0);
        }
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn unsupported_schema_version() {
    let mut v = fixture_value();
    v["schema"] = "thz-scene/9".into();
    assert!(matches!(parse_value(&v), Err(FormatError::UnsupportedSchema(s)) if s == "thz-scene/9"));
}

#[test]
fn errors_map_to_validation_exit_code() {
    let mut v = fixture_value();
    v["ris"][0]["d_x"] = (-1.0).into();
    assert_eq!(parse_value(&v).unwrap_err().exit_code(), 2);
}

#[test]
fn digest_tracks_physical_content_only() {
    let v = fixture_value();
    let (scene, _) = parse_value(&v).unwrap();
    let base = scene_digest(&scene).unwrap();

    let mut renamed = v.clone();
    renamed["name"] = "another name".into();
    let (s2, _) = parse_scenario(&serde_json::to_string(&renamed).unwrap()).unwrap();
    assert_eq!(scene_digest(&s2).unwrap(), base);

    let mut moved = v.clone();
    moved["nodes"][1]["position"][0] = (4.401).into();
    let (s3, _) = parse_value(&moved).unwrap();
    assert_ne!(scene_digest(&s3).unwrap(), base);

    let mut retuned = v;
    retuned["frequency_ghz"] = 301.into();
    let (s4, _) = parse_value(&retuned).unwrap();
    assert_ne!(scene_digest(&s4).unwrap(), base);
}

fn fixture_report(rx: &str) -> ReportDocument {
    let (scene, sim) = load_scenario(&fixture_path()).unwrap();
    let grid = build_grid(&scene, sim.grid.dx, sim.grid.dy).unwrap();
    let report = run_report(&scene, &[rx.to_string()], &grid, &sim.drf_options()).unwrap();
    ReportDocument::new(report, sim)
}

#[test]
fn report_json_round_trip() {
    let doc = fixture_report("RX-3");
    let bytes = save_report(&doc, ReportFormat::Json).unwrap();
    let back = load_report(&bytes).unwrap();
    assert_eq!(back, doc);
    assert_eq!(save_report(&back, ReportFormat::Json).unwrap(), bytes);
}

#[test]
fn report_digest_matches_scene() {
    let doc = fixture_report("RX-1");
    let (scene, _) = load_scenario(&fixture_path()).unwrap();
    assert_eq!(doc.scene_digest, scene_digest(&scene).unwrap());
}

#[test]
fn cells_csv_has_one_row_per_position() {
    let doc = fixture_report("RX-3");
    let bytes = save_report(&doc, ReportFormat::Csv).unwrap();
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(&header[..6], ["rx", "i", "cell", "x", "y", "los"]);
    assert!(header.contains(&"pl_ris_4".to_string()));
    assert!(header.contains(&"j_star".to_string()));
    assert_eq!(r.records().count(), 727);
}

#[test]
fn summary_occurrences_sum_to_one() {
    let doc = fixture_report("RX-3");
    let bytes = summary_csv(&doc.report).unwrap();
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let mut sums = std::collections::BTreeMap::<String, f64>::new();
    for rec in r.records() {
        let rec = rec.unwrap();
        *sums.entry(rec[1].to_string()).or_default() += rec[4].parse::<f64>().unwrap();
    }
    assert_eq!(sums.len(), 4);
    for (option, s) in sums {
        assert!((s - 1.0).abs() < 1e-12, "{option}: {s}");
    }
}

#[test]
fn empty_report_is_valid() {
    let (scene, sim) = load_scenario(&fixture_path()).unwrap();
    let report = DrfReport {
        scene_digest: scene_digest(&scene).unwrap(),
        options: sim.drf_options(),
        grid: GridShape { nx: 0, ny: 0, cell_dx: 0.1, cell_dy: 0.2 },
        grid_free_cells: 0,
        receivers: vec![RxReport {
            rx_id: "RX-1".into(),
            ris_ids: vec![],
            records: vec![],
            strategies: vec![],
            recommended: None,
        }],
    };
    let doc = ReportDocument::new(report, sim);
    let json = save_report(&doc, ReportFormat::Json).unwrap();
    assert_eq!(load_report(&json).unwrap(), doc);
    let csv_bytes = cells_csv(&doc.report).unwrap();
    let mut r = csv::Reader::from_reader(csv_bytes.as_slice());
    assert!(r.headers().is_ok());
    assert_eq!(r.records().count(), 0);
}
