use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dpgraph::io::parse_instance;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn dpgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpgraph"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn extend_writes_the_optimal_mechanism() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let o = dpgraph(&[
        "extend",
        "-i",
        p(&fixture("mixed_path.dpg.json")),
        "-o",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let v0 = file["mechanism"]["v0"].as_f64().unwrap();
    assert!((v0 - 0.8).abs() < 1e-12);
    assert_eq!(file["mechanism"]["v1"].as_f64(), Some(0.6));
    assert_eq!(
        file["metadata"]["compatible"],
        serde_json::Value::Bool(true)
    );
    assert_eq!(file["metadata"]["origin"]["v1"], "v1");

    let check = dpgraph(&[
        "check",
        "-i",
        p(&fixture("mixed_path.dpg.json")),
        "-m",
        p(&out),
    ]);
    assert!(check.status.success());
    assert_eq!(stdout(&check), "u,v,inequality,lhs,rhs,slack\n");
}

#[test]
fn extend_reports_the_witness() {
    let o = dpgraph(&["extend", "-i", p(&fixture("incompatible_edge.dpg.json"))]);
    assert_eq!(o.status.code(), Some(4));
    let err = stderr(&o);
    assert!(
        err.contains("witness: u=u v=v bound=0.2 actual=0.5"),
        "{err}"
    );
    assert!(err.contains("no epsilon-DP extension exists"));
    assert!(stdout(&o).is_empty());
}

#[test]
fn naive_schedule_writes_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let cube = dir.path().join("cube.dpg.json");
    assert!(dpgraph(&[
        "gen",
        "hypercube",
        "--n",
        "5",
        "--eps",
        "0.4",
        "-o",
        p(&cube)
    ])
    .status
    .success());
    let heap = dpgraph(&["extend", "-i", p(&cube)]);
    let naive = dpgraph(&["extend", "-i", p(&cube), "--naive"]);
    assert!(heap.status.success() && naive.status.success());
    assert_eq!(heap.stdout, naive.stdout);
}

#[test]
fn check_accepts_constants_and_lists_violations() {
    let inst = fixture("mixed_path.dpg.json");
    let o = dpgraph(&[
        "check",
        "-i",
        p(&inst),
        "-m",
        p(&fixture("constant.mech.json")),
    ]);
    assert!(o.status.success());

    let o = dpgraph(&[
        "check",
        "-i",
        p(&inst),
        "-m",
        p(&fixture("leaky.mech.json")),
    ]);
    assert_eq!(o.status.code(), Some(5));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 2, "{text}");
    assert!(rows[1].starts_with("v0,v1,ratio_vu,0.5,0.2,"), "{text}");
}

#[test]
fn exit_codes_by_failure_class() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"vertices\": [").unwrap();
    assert_eq!(
        dpgraph(&["boundary", "-i", p(&broken)]).status.code(),
        Some(2)
    );

    let o = dpgraph(&["boundary", "-i", p(&fixture("negative_epsilon.dpg.json"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("edges[0].epsilon"));

    assert_eq!(
        dpgraph(&["gen", "hypercube", "--n", "4"]).status.code(),
        Some(3)
    );
    assert_eq!(
        dpgraph(&["path", "--alpha", "0.1", "--eps", "0.5,0"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn path_matches_golden_csv() {
    let o = dpgraph(&[
        "path",
        "--alpha",
        "0.1",
        "--eps",
        &["0.6931471805599453"; 4].join(","),
    ]);
    assert!(o.status.success());
    let golden = std::fs::read_to_string(fixture("running_path.csv")).unwrap();
    assert_eq!(stdout(&o), golden);
    assert_eq!(stderr(&o), "tau=2\n");
}

#[test]
fn boundary_of_generated_cubes() {
    let o = dpgraph(&["gen", "hypercube", "--n", "1"]);
    let inst = parse_instance(&stdout(&o)).unwrap();
    assert_eq!(inst.graph.len(), 2);
    assert_eq!(inst.graph.edge_count(), 1);

    let dir = tempfile::tempdir().unwrap();
    let cube = dir.path().join("cube.dpg.json");
    dpgraph(&["gen", "hypercube", "--n", "3", "-o", p(&cube)]);
    let o = dpgraph(&["boundary", "-i", p(&cube)]);
    assert_eq!(stdout(&o), "112\n121\n122\n211\n212\n221\n");

    let o = dpgraph(&[
        "gen",
        "hypercube",
        "--n",
        "4",
        "--ties",
        "1",
        "--seeds",
        "none",
    ]);
    let inst = parse_instance(&stdout(&o)).unwrap();
    assert_eq!(inst.graph.len(), 16);
    assert!(inst.partial.is_none());
}

#[test]
fn hypercube_overrides_and_coordinates() {
    let o = dpgraph(&[
        "gen",
        "hypercube",
        "--n",
        "3",
        "--eps",
        "1.0",
        "--override",
        "121,221,0.25",
        "--override",
        "112,212,0.25",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let inst = parse_instance(&stdout(&o)).unwrap();
    let g = &inst.graph;
    let eps = |a: &str, b: &str| {
        g.epsilon(g.index_of(a).unwrap(), g.index_of(b).unwrap())
            .unwrap()
            .value()
    };
    assert_eq!(eps("121", "221"), 0.25);
    assert_eq!(eps("212", "112"), 0.25);
    assert_eq!(eps("111", "211"), 1.0);

    let o = dpgraph(&["gen", "hypercube", "--n", "3", "--override", "111,222,0.1"]);
    assert_eq!(o.status.code(), Some(3));

    let o = dpgraph(&[
        "gen",
        "hypercube",
        "--n",
        "3",
        "--coordinate-eps",
        "0.1,0.2,0.3",
    ]);
    let inst = parse_instance(&stdout(&o)).unwrap();
    let g = &inst.graph;
    assert_eq!(
        g.epsilon(g.index_of("111").unwrap(), g.index_of("112").unwrap())
            .unwrap()
            .value(),
        0.3
    );
}

#[test]
fn gen_path_shapes() {
    let o = dpgraph(&["gen", "path", "--n", "0", "--alpha", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(parse_instance(&stdout(&o)).unwrap().graph.len(), 1);

    let o = dpgraph(&[
        "gen",
        "path",
        "--n",
        "2",
        "--alpha",
        "0.3",
        "--eps",
        "0.6931471805599453,1.0986122886681098",
    ]);
    let inst = parse_instance(&stdout(&o)).unwrap();
    assert_eq!(inst.graph.edge_count(), 2);

    let o = dpgraph(&[
        "gen", "path", "--n", "3", "--alpha", "0.3", "--eps", "0.1,0.2",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn outputs_are_deterministic_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cube = dir.path().join("cube.dpg.json");
    dpgraph(&[
        "gen",
        "hypercube",
        "--n",
        "5",
        "--coordinate-eps",
        "0.1,0.7,0.3,1.1,0.05",
        "-o",
        p(&cube),
    ]);
    let text = std::fs::read_to_string(&cube).unwrap();
    let again = dpgraph(&[
        "gen",
        "hypercube",
        "--n",
        "5",
        "--coordinate-eps",
        "0.1,0.7,0.3,1.1,0.05",
    ]);
    assert_eq!(stdout(&again), text);
    assert_eq!(
        dpgraph::io::serialize_instance(&parse_instance(&text).unwrap()),
        text
    );

    let a = dpgraph(&["extend", "-i", p(&cube)]);
    let b = dpgraph(&["extend", "-i", p(&cube)]);
    assert_eq!(a.stdout, b.stdout);
    let c = dpgraph(&[
        "bounds",
        "-i",
        p(&cube),
        "--source",
        "12121",
        "--alpha",
        "0.2",
    ]);
    let d = dpgraph(&[
        "bounds",
        "-i",
        p(&cube),
        "--source",
        "12121",
        "--alpha",
        "0.2",
        "--naive",
    ]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn bounds_rows_follow_the_witness_tree() {
    let o = dpgraph(&[
        "bounds",
        "-i",
        p(&fixture("mixed_path.dpg.json")),
        "--source",
        "v0",
        "--alpha",
        "0.1",
    ]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "vertex,bound,predecessor\nv0,0.1,\nv1,0.2,v0\nv2,0.4,v1\n"
    );
    let o = dpgraph(&[
        "bounds",
        "-i",
        p(&fixture("mixed_path.dpg.json")),
        "--source",
        "zz",
        "--alpha",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn oracle_agrees_on_fixtures() {
    let o = dpgraph(&["oracle", "-i", p(&fixture("mixed_path.dpg.json"))]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = dpgraph(&["oracle", "-i", p(&fixture("incompatible_edge.dpg.json"))]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("both refuse"));
}
