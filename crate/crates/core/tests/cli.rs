use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use csp_sampling::formulas::{canonical_database, Atom, Instance};
use csp_sampling::io::{parse_instance, parse_structures, parse_theory_spec};
use csp_sampling::model::is_homomorphism;
use csp_sampling::solvers::solve_via_sampling;

fn theories() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../theories")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csp-sampling"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(": "))
}

fn robot() -> String {
    theories().join("robot.theory").display().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn satisfiable_robot_instance_prints_checked_witness() {
    let inst_path = theories().join("robot_sat.inst");
    let out = run(&["solve", "--theory", &robot(), "--instance", inst_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(field(&text, "verdict"), Some("satisfiable"));

    // map the printed labels back to elements and check the map directly
    let spec = parse_theory_spec(&fs::read_to_string(robot()).unwrap()).unwrap();
    let family = spec.last().unwrap();
    let inst = parse_instance(&fs::read_to_string(&inst_path).unwrap(), family.signature()).unwrap();
    let index: usize = field(&text, "sample_index").unwrap().parse().unwrap();
    let sample = &family.generate(inst.num_vars()).unwrap()[index];
    let map: Vec<u32> = inst
        .variables()
        .map(|v| {
            let label = field(&text, &format!("witness.{v}")).unwrap();
            sample.elements().find(|&e| sample.label(e) == label).unwrap()
        })
        .collect();
    let relational = Instance::from_parts(
        inst.signature().clone(),
        inst.variables().map(String::from).collect(),
        inst.atoms().iter().filter(|a| matches!(a, Atom::Rel { .. })).cloned().collect(),
    );
    let db = canonical_database(&relational).unwrap();
    assert!(is_homomorphism(&map, &db, sample).unwrap());
    let (frame, cover) = (inst.var("frame").unwrap(), inst.var("cover").unwrap());
    assert_ne!(map[frame], map[cover]);
}

#[test]
fn non_convex_instance_is_unsatisfiable() {
    let dir = tempfile::tempdir().unwrap();
    // min3 forces x = y or x = z, so ruling out both is contradictory
    let inst = write(dir.path(), "g.inst", "min3(x,y,z); x != y; x != z");
    let out = run(&["solve", "--theory", &robot(), "--instance", &inst]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(field(&stdout(&out), "verdict"), Some("unsatisfiable"));
    assert_eq!(field(&stdout(&out), "sample_index"), None);

    // whereas x = z < y satisfies this one
    let inst = write(dir.path(), "h.inst", "min3(x,y,z); x != y; y != z");
    let text = stdout(&run(&["solve", "--theory", &robot(), "--instance", &inst]));
    assert_eq!(field(&text, "verdict"), Some("satisfiable"));
    assert_eq!(field(&text, "witness.x"), field(&text, "witness.z"));
}

#[test]
fn json_report() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "g.inst", "lt(x, y) & p1(y)");
    let out = run(&["solve", "--theory", &robot(), "--instance", &inst, "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["verdict"], "satisfiable");
    assert_eq!(v["sample_index"], 0);
    assert!(v["witness"]["x"].is_string() && v["witness"]["y"].is_string());
    assert!(v["timings"]["generate_ms"].is_number() && v["timings"]["solve_ms"].is_number());
}

#[test]
fn consistency_methods_warn() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "g.inst", "lt(x, y); lt(y, z); lt(z, x)");
    for method in ["ac", "nu"] {
        let out = run(&["solve", "--theory", &robot(), "--instance", &inst, "--method", method]);
        assert_eq!(out.status.code(), Some(1), "{method}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("warning:"));
    }
}

#[test]
fn errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_inst = write(dir.path(), "bad.inst", "lt(x)");
    let out = run(&["solve", "--theory", &robot(), "--instance", &bad_inst]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1:1"));

    let bad_theory = write(dir.path(), "bad.theory", "theory A = dense_order\ntheory X = union(A, A)");
    let out = run(&["solve", "--theory", &bad_theory, "--instance", &bad_inst]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("share the symbol"));

    let out = run(&["solve", "--theory", "/nonexistent", "--instance", &bad_inst]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "--theory", &robot()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_writes_structure_format() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("w.str");
    let theory = theories().join("succ2col.theory");
    let out = run(&[
        "sample",
        "--theory",
        theory.to_str().unwrap(),
        "-n",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed = parse_structures(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(parsed.len(), 1);
    assert_eq!(parsed[0].1.domain_size(), 8);
}

#[test]
fn checkpoly_reports_properties() {
    let dir = tempfile::tempdir().unwrap();
    let structure = dir.path().join("a.str");
    let out = run(&[
        "sample",
        "--theory",
        &robot(),
        "--name",
        "A",
        "-n",
        "3",
        "--out",
        structure.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let s = structure.to_str().unwrap();

    let out = run(&["checkpoly", "--structure", s, "--builtin", "min:3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(field(&text, "polymorphism"), Some("true"));
    assert_eq!(field(&text, "totally_symmetric"), Some("true"));
    assert_eq!(field(&text, "near_unanimity"), Some("false"));

    let op = write(dir.path(), "proj.op", "0 0 0 1 1 1 2 2 2");
    let text = stdout(&run(&["checkpoly", "--structure", s, "--op", &op]));
    assert_eq!(field(&text, "polymorphism"), Some("true"));
    assert_eq!(field(&text, "totally_symmetric"), Some("false"));
    assert_eq!(field(&text, "near_unanimity"), Some("n/a"));

    let out = run(&["checkpoly", "--structure", s, "--builtin", "majority"]);
    let text = stdout(&out);
    assert_eq!(field(&text, "polymorphism"), Some("false"));
    assert_eq!(field(&text, "near_unanimity"), Some("true"));

    let out = run(&["checkpoly", "--structure", s, "--builtin", "max"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cli_matches_library_on_small_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let spec = parse_theory_spec(&fs::read_to_string(robot()).unwrap()).unwrap();
    let family = spec.last().unwrap();
    let corpus = [
        "lt(x, y); p0(x); p0(y)",
        "lt(x, y); lt(y, x)",
        "min3(x, y, z); lt(y, z); p1(x)",
        "min3(x, y, z); lt(x, y); lt(x, z); x != y",
        "p0(x); p1(x)",
        "p0(x); p1(y); x = y",
        "vars(a, b); a != b",
        "false",
        "true",
    ];
    for (i, text) in corpus.iter().enumerate() {
        let inst = write(dir.path(), &format!("{i}.inst"), text);
        let out = run(&["solve", "--theory", &robot(), "--instance", &inst]);
        let expected = solve_via_sampling(family, &parse_instance(text, family.signature()).unwrap())
            .unwrap()
            .is_sat();
        assert_eq!(out.status.code(), Some(if expected { 0 } else { 1 }), "{text}");
    }
}
