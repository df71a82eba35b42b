use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_properaff")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let v: Value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", String::from_utf8_lossy(&out.stdout)));
    (out.status.code().unwrap(), v)
}

fn strip_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn classify_swinging_a3_example() {
    let (code, v) = report(&["classify-rep", "A", "3", "--highest", "5,0,1"]);
    assert_eq!(code, 0);
    let r = &v["results"];
    assert_eq!(r["weight_count"], 119);
    assert_eq!(r["dimension"], 189);
    assert_eq!(r["classification"]["swinging"], true);
    assert_eq!(v["spec"]["highest_weight"], serde_json::json!(["4", "-1", "-1", "-2"]));
    assert_eq!(v["schema_version"], "properaff-report/1");
    assert!(v["tolerances"]["rank"].as_f64().unwrap() > 0.0);
}

#[test]
fn classify_named_representations() {
    let (_, v) = report(&["classify-rep", "A", "2", "--sym", "3"]);
    assert_eq!(v["results"]["dimension"], 10);
    assert_eq!(v["results"]["classification"]["swinging"], true);
    let (_, v) = report(&["classify-rep", "--family", "B", "--rank", "2", "--adjoint"]);
    let c = &v["results"]["classification"];
    assert_eq!(c["limited"], true);
    assert_eq!(c["abundant"], true);
    assert_eq!(v["results"]["dimension"], 10);
    // Concrete realization: SO(3,2) is split, so the standard rep has 5 weights.
    let (_, v) = report(&["classify-rep", "--group", "so(3,2)", "--standard"]);
    assert_eq!(v["results"]["dimension"], 5);
    assert_eq!(v["results"]["weight_count"], 5);
}

#[test]
fn bad_input_exits_two() {
    let (code, v) = report(&["classify-rep", "E", "6", "--standard"]);
    assert_eq!(code, 2);
    assert_eq!(v["status"], "bad-input");
    let (code, _) = report(&["classify-rep", "A", "3", "--highest", "1,2"]);
    assert_eq!(code, 2);
    let (code, _) = report(&["check-criterion", "C", "3", "--standard"]);
    assert_eq!(code, 2);
    // Usage errors come from the argument parser.
    assert_eq!(run(&["classify-rep", "A", "2", "--sym", "3", "--adjoint"]).status.code(), Some(2));
}

#[test]
fn trivial_rep_is_not_applicable() {
    let (code, v) = report(&["find-x0", "A", "2", "--trivial"]);
    assert_eq!(code, 3);
    assert!(v["message"].as_str().unwrap().contains("criterion trivially fails"));
}

#[test]
fn find_x0_checks_the_a3_vector() {
    let (code, v) = report(&["find-x0", "A", "3", "--highest", "5,0,1", "--check", "10,1,-1,-10", "--predicates", "16,2,-3,-15"]);
    assert_eq!(code, 0);
    let cert = &v["results"]["certificate"];
    assert_eq!(cert["generically_symmetric"], true);
    assert_eq!(cert["extreme"], true);
    assert_eq!(cert["partition"]["eq"].as_array().unwrap().len(), 3);
    let p = &v["results"]["predicates"];
    assert_eq!(p["asymptotically_contracting"], true);
    assert_eq!(p["rho_regular"], false);
    // A non-extreme vector of the generic type is reported as a violation.
    let (code, _) = report(&["find-x0", "C", "4", "--wedge", "4", "--check", "41/10,21/10,11/10,1/10"]);
    assert_eq!(code, 1);
}

#[test]
fn find_x0_search_reaches_both_c4_wall_sets() {
    let mut walls = std::collections::BTreeSet::new();
    for seed in 0..16 {
        let (code, v) = report(&["find-x0", "C", "4", "--wedge", "4", "--seed", &seed.to_string()]);
        assert_eq!(code, 0);
        walls.insert(v["results"]["certificate"]["pi_x0"].to_string());
    }
    assert_eq!(walls, ["[3]".to_string(), "[]".to_string()].into_iter().collect());
}

#[test]
fn check_criterion_witness_and_failure() {
    let (code, v) = report(&["check-criterion", "A", "2", "--sym", "3"]);
    assert_eq!(code, 0);
    let w: Vec<f64> = v["results"]["witness"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(w.len(), 10);
    assert!((w.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    // The standard representation of SL(3) has no zero weight.
    let (code, v) = report(&["check-criterion", "A", "2", "--standard"]);
    assert_eq!(code, 1);
    assert_eq!(v["results"]["v0_dim"], 0);
}

#[test]
fn build_group_generators_round_trip_through_margulis() {
    let (code, v) = report(&["build-group", "--group", "so21", "--seed", "3"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["results"]["all_hold"], true);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gens.json");
    std::fs::write(&path, v["results"]["generators"].to_string()).unwrap();
    let (code, m) = report(&["margulis", "--group", "so21", "--elements", path.to_str().unwrap(), "--random", "3"]);
    assert_eq!(code, 0, "{m}");
    let els = m["results"]["elements"].as_array().unwrap();
    assert_eq!(els.len(), 5);
    for e in &els[..2] {
        assert!((e["m_norm"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    }
    for e in els {
        assert!(e["inverse_residual"].as_f64().unwrap() <= 1e-6);
    }
}

#[test]
fn margulis_rejects_malformed_elements() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "[1, 0, 0, 0, 1, 0, 0, 0, 1]").unwrap();
    let (code, v) = report(&["margulis", "--group", "so21", "--elements", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(v["message"].as_str().unwrap().contains("element 0"));
    let (code, _) = report(&["margulis", "--group", "so21"]);
    assert_eq!(code, 2);
}

#[test]
fn word_survey_writes_csv_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("words.csv");
    let (code, v) = report(&["word-survey", "--group", "so21", "--max-len", "6", "--seed", "7", "--csv", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["results"]["words"], 1104);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("word,length,regular,s,m_norm,deviation,error"));
    assert_eq!(lines.count(), 1104);
}

#[test]
fn sabotaged_survey_fails_properness() {
    let (code, v) = report(&["word-survey", "--group", "so21", "--max-len", "3", "--seed", "3", "--properness", "--sabotage", "1"]);
    assert_eq!(code, 1);
    assert_eq!(v["results"]["properness"]["passed"], false);
    let (code, v) = report(&["word-survey", "--group", "so21", "--max-len", "3", "--seed", "3", "--properness"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["properness"]["passed"], true);
}

#[test]
fn same_seed_gives_identical_payload() {
    for args in [
        &["word-survey", "--group", "so21", "--max-len", "4", "--seed", "7"][..],
        &["margulis", "--group", "sl3", "--rep", "sym3", "--random", "3", "--jd-norm", "0.5", "--seed", "2"][..],
        &["find-x0", "C", "4", "--wedge", "4", "--seed", "5"][..],
    ] {
        let a = strip_timing(report(args).1);
        let b = strip_timing(report(args).1);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap(), "{args:?}");
    }
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let out = run(&["margulis", "--group", "so21", "--random", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"m_norm\"")).unwrap();
    let num = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = num.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{num}");
}

#[test]
fn tolerance_overrides_are_reported() {
    let (_, v) = report(&["check-criterion", "A", "2", "--sym", "3", "--tol-rank", "1e-9", "--tol-cluster", "1e-5"]);
    assert_eq!(v["tolerances"]["rank"].as_f64(), Some(1e-9));
    assert_eq!(v["tolerances"]["cluster"].as_f64(), Some(1e-5));
    assert_eq!(v["seed"], 0);
}

#[test]
fn text_output_is_aligned() {
    let out = run(&["classify-rep", "A", "2", "--sym", "3", "--text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let col = |key: &str| {
        let l = text.lines().find(|l| l.starts_with(key)).unwrap();
        l.len() - l[key.len()..].trim_start().len()
    };
    assert_eq!(col("status "), col("results.dimension "));
    assert!(text.contains("results.classification.swinging"));
}
