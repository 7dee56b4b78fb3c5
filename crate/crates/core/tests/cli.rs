use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bocacti")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let out = run(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn pentagon_and_hexagon_lattices() {
    let p = json(&["figure", "pentagon"]);
    assert_eq!(p["corners"].as_array().unwrap().len(), 5);
    assert_eq!(p["edges"].as_array().unwrap().len(), 5);
    assert!(p["edges"].as_array().unwrap().iter().all(|e| e["corners"].as_array().unwrap().len() == 2));
    let h = json(&["figure", "hexagon"]);
    assert_eq!(h["corners"].as_array().unwrap().len(), 6);
    assert_eq!(h["edges"].as_array().unwrap().len(), 6);
    assert_eq!(h["faces_by_dimension"]["2"].as_array().unwrap().len(), 1);
}

#[test]
fn cactus_composition_figure() {
    let f = json(&["figure", "cact-composition"]);
    assert_eq!(f["x"]["k"], 2);
    assert_eq!(f["y"]["k"], 3);
    assert_eq!(f["result"]["k"], 4);
}

#[test]
fn enumeration_counts() {
    for (tree, count) in [("caterpillar:3", 2), ("caterpillar:4", 5), ("caterpillar:5", 14), ("star:3", 6)] {
        assert_eq!(json(&["brackets", "enumerate", "--tree", tree, "--max"])["count"], count, "{tree}");
    }
    let f = json(&["brackets", "enumerate", "--tree", "caterpillar:3", "--fvector"]);
    assert_eq!(f["f_vector"], serde_json::json!(["3", "2"]));
    assert_eq!(f["euler_characteristic"], "1");
    let too_big = run(&["brackets", "enumerate", "--tree", "caterpillar:8"]);
    assert_eq!(too_big.status.code(), Some(2));
}

#[test]
fn witness_prints_the_quarter() {
    let out = run(&["witness", "nonassoc"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.ends_with("distance 1/4\n"), "{text}");
    assert_eq!(json(&["witness", "nonassoc"])["distance"], "1/4");
}

#[test]
fn compositions_round_trip_through_json() {
    let w = json(&["witness", "nonassoc"]);
    let (x, a) = (w["x"].to_string(), w["a"].to_string());
    let xa = json(&["cacti", "compose", "--x", &x, "--i", "0", "--y", &a]);
    let left = json(&["cacti", "compose", "--x", &xa.to_string(), "--i", "0", "--y", &a]);
    assert_eq!(left, w["left"]);
    let d = json(&["cacti", "metric", "--x", &w["left"].to_string(), "--y", &w["right"].to_string()]);
    assert_eq!(d["distance"], "1/4");
    let invalid = run(&["cacti", "validate", "--x", r#"{"k":2,"arcs":[["0","1/3",0],["1/3","1",1]]}"#]);
    assert_eq!(invalid.status.code(), Some(1));
}

#[test]
fn verify_is_deterministic() {
    let a = run(&["verify", "weight-zero-seam", "--seed", "42", "--json"]);
    let b = run(&["verify", "weight-zero-seam", "--seed", "42", "--json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["checks"][0]["cases"], 200);
    let small = json(&["verify", "coend", "--samples", "20"]);
    let ids: Vec<&str> = small["checks"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["average-is-identity", "composition-pointwise", "maps-roundtrip"]);
    assert!(small["checks"].as_array().unwrap().iter().all(|c| c["cases"] == 20));
}

#[test]
fn unknown_names_are_errors() {
    assert_eq!(run(&["verify", "nope"]).status.code(), Some(2));
    assert!(!run(&["figure", "nope"]).status.success());
}
