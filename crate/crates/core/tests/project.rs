mod common;

use fiberloom::export::{parse_path_export, path_export, render_svg};
use fiberloom::pattern::solve_all_layers;
use fiberloom::plan::Planner;
use fiberloom::project::{Project, ProjectFile};
use fiberloom::report::{derive_report, PatternRecord};

const FIXTURES: [&str; 3] = ["minimal", "two_sheets", "cantilever"];

#[test]
fn fixtures_round_trip() {
    for name in FIXTURES {
        let p = common::fixture(name);
        let text = p.to_file().to_toml().unwrap();
        let again = Project::from_toml(&text).unwrap();
        assert_eq!(again.graph, p.graph, "{name}");
        assert_eq!(again.params, p.params);
        assert_eq!(again.plan, p.plan);
        assert_eq!(again.to_file().to_toml().unwrap(), text);
    }
}

#[test]
fn target_overrides_survive_a_round_trip() {
    let text = std::fs::read_to_string(common::fixture_path("minimal")).unwrap();
    let with = text.replacen(
        "[params]",
        "connection_targets = [{ edge1 = 4, edge2 = 0, target = 5.5 }]\n\n[params]",
        1,
    );
    let p = Project::from_toml(&with).unwrap();
    let c = p.graph.connection_between(0, 4).unwrap();
    assert_eq!(p.graph.connections[c].target, 5.5);
    let again = Project::from_toml(&p.to_file().to_toml().unwrap()).unwrap();
    assert_eq!(again.graph, p.graph);
}

#[test]
fn bad_input_is_addressed() {
    let text = std::fs::read_to_string(common::fixture_path("minimal")).unwrap();
    let unknown = text.replace("fiber_width = 2.0", "fiber_width = 2.0\nnozzle = 1");
    assert!(Project::from_toml(&unknown).unwrap_err().to_string().contains("nozzle"));
    let loose = text.replace("{ edges = [0, 4, 5, 6, 0] }", "{ edges = [0, 2] }");
    let err = Project::from_toml(&loose).unwrap_err().to_string();
    assert!(err.contains("sheets[0]"), "{err}");
    assert!(ProjectFile::parse("schema_version = ").is_err());
}

#[test]
fn derive_report_lists_the_tables() {
    let g = common::fixture("minimal").graph;
    let text = derive_report(&g);
    // connection 2 joins edges 0 and 6 and is part of loops 0 and 2
    let row = text.lines().find(|l| l.trim_start().starts_with("2   0-6")).unwrap();
    assert!(row.trim_end().ends_with("0.0 0.2"), "{row}");
    assert!(text.contains("loop 2: edges (0,1,2,3,5,6) connections (0,3,5,7,9,2) closed"));
    let c_rows: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.starts_with("C ("))
        .skip(1)
        .take(10)
        .collect();
    let printed: Vec<Vec<f64>> = c_rows
        .iter()
        .map(|l| l.split_whitespace().skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(printed, g.sheets[0].c.to_rows());
}

#[test]
fn pattern_records_round_trip() {
    let p = common::fixture("two_sheets");
    let h = solve_all_layers(&p.graph, &p.params).unwrap();
    let rec = PatternRecord::new(&p.name, p.params.p, &h, &p.graph);
    let json = serde_json::to_string_pretty(&rec).unwrap();
    let back: PatternRecord = serde_json::from_str(&json).unwrap();
    assert_eq!(back, rec);
    assert_eq!(back.schema_version, 1);
}

#[test]
fn path_export_matches_the_plan() {
    let p = common::fixture("minimal");
    let planner = Planner::new(&p.graph, p.plan).unwrap();
    let (plan, _) = planner.plan(3, 0, &[1, 1, 1]).unwrap();
    let text = path_export(std::slice::from_ref(&plan));
    let parsed = parse_path_export(&text).unwrap();
    assert_eq!(parsed.len(), plan.paths.len());
    for (e, path) in parsed.iter().zip(&plan.paths) {
        assert_eq!(e.layer, 3);
        assert_eq!(e.closed, path.closed);
        assert_eq!(e.points.len(), path.points.len());
        for (a, b) in e.points.iter().zip(&path.points) {
            assert!((a.x - b.x).abs() <= 5e-7 && (a.y - b.y).abs() <= 5e-7);
        }
    }
    let svg = render_svg(&plan, &p.graph, p.plan.fiber_width, true);
    assert_eq!(svg.matches("class=\"bundle\"").count(), parsed.len());
    assert!(svg.contains("class=\"rim\""));
}
