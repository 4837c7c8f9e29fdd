//! End-to-end tests of the `modalforge` binary.

use std::io::Write;
use std::process::{Command, Output};

fn modalforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modalforge"))
        .args(args)
        .env_remove("MODALFORGE_AXIOMS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

#[test]
fn reduce_prints_the_one_var_sentinel() {
    let out = modalforge(&["reduce", "--fragment", "one-var", "p1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "<>(p & (<>[]false & ~<><>[]false))"
    );
}

#[test]
fn reduce_var_free_output_has_no_atoms() {
    let out = modalforge(&[
        "--json",
        "reduce",
        "--fragment",
        "var-free",
        "--mode",
        "repaired",
        "p1 & ~p1",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(parsed["atoms"], serde_json::json!([]));
    assert_eq!(parsed["fragment"], "var-free");
}

#[test]
fn reduce_two_var_size_matches_sentinel() {
    let out = modalforge(&["--json", "reduce", "--fragment", "two-var", "p2"]);
    let parsed: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    // |beta_2| = 14*2 + 16
    assert_eq!(parsed["size"], 44);
}

#[test]
fn parse_errors_exit_with_code_two() {
    let out = modalforge(&["parse", "p & ("]);
    assert_eq!(out.status.code(), Some(2));
    let out = modalforge(&["reduce", "--fragment", "one-var", "[]p1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_small_sweep_is_clean_and_exits_zero() {
    let out = modalforge(&[
        "--json",
        "--seed",
        "7",
        "verify",
        "--theorem",
        "2",
        "--max-vars",
        "2",
        "--max-size",
        "6",
        "--random",
        "40",
        "--records",
        "none",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let summary: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(summary["summary"]["disagreements"], 0);
    assert_eq!(summary["summary"]["stability_violations"], 0);
    assert!(summary["summary"]["cases"].as_u64().unwrap() > 13_000);
}

#[test]
fn verify_reports_are_seed_deterministic() {
    let args = [
        "--json",
        "--seed",
        "42",
        "verify",
        "--theorem",
        "1",
        "--max-vars",
        "1",
        "--max-size",
        "5",
        "--random",
        "25",
    ];
    let normalize = |text: String| -> String {
        text.lines()
            .map(|line| {
                // timing is the only permitted difference between runs
                match line.find("\"wall_ms\":") {
                    Some(at) => {
                        let rest = &line[at..];
                        let end = rest.find([',', '}']).unwrap();
                        format!("{}{}", &line[..at], &rest[end..])
                    }
                    None => line.to_string(),
                }
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let first = normalize(stdout(&modalforge(&args)));
    let second = normalize(stdout(&modalforge(&args)));
    assert_eq!(first, second);
    assert!(first.contains("\"case\":0"));
}

#[test]
fn verify_var_free_repaired_sweep_is_clean() {
    let out = modalforge(&[
        "--json",
        "verify",
        "--theorem",
        "3",
        "--max-vars",
        "2",
        "--max-size",
        "6",
        "--random",
        "40",
        "--records",
        "none",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let summary: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(summary["summary"]["disagreements"], 0);
    assert_eq!(summary["summary"]["fragment"], "var-free");
}

#[test]
fn verify_literal_mode_documents_disagreements_and_exits_zero() {
    let out = modalforge(&[
        "--json",
        "verify",
        "--theorem",
        "3",
        "--mode",
        "literal",
        "--max-vars",
        "2",
        "--max-size",
        "5",
        "--random",
        "10",
        "--records",
        "disagreements",
    ]);
    assert!(out.status.success(), "literal mode must exit zero");
    let text = stdout(&out);
    let summary: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert!(summary["summary"]["disagreements"].as_u64().unwrap() > 0);
    // every emitted case record is a disagreement
    for line in text.lines().filter(|l| l.contains("\"case\":")) {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(record["agreement"], false);
    }
}

#[test]
fn sat_separates_e_from_em_and_witnesses_recheck() {
    let out = modalforge(&["sat", "--logic", "EM", "[](p & q) & ~[]p"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("unsatisfiable"));

    let out = modalforge(&["--json", "sat", "--logic", "E", "[](p & q) & ~[]p"]);
    let parsed: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(parsed["satisfiable"], true);
    let witness = serde_json::to_string(&parsed["witness"]).unwrap();
    let world = parsed["world"].as_u64().unwrap().to_string();

    // feed the witness back through the model checker
    let mut path = std::env::temp_dir();
    path.push(format!("modalforge-witness-{}.json", std::process::id()));
    let mut file = std::fs::File::create(&path).unwrap();
    file.write_all(witness.as_bytes()).unwrap();
    drop(file);
    let out = modalforge(&[
        "mc",
        "--model",
        path.to_str().unwrap(),
        "--world",
        &world,
        "[](p & q) & ~[]p",
    ]);
    std::fs::remove_file(&path).ok();
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "true");
}

#[test]
fn sat_brute_engine_agrees_on_unit_probe() {
    let out = modalforge(&["sat", "--logic", "EN", "--engine", "brute", "~[]true"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("unsatisfiable"));
    let out = modalforge(&["sat", "--logic", "E", "--engine", "brute", "~[]true"]);
    assert!(stdout(&out).starts_with("satisfiable"));
}

#[test]
fn sat_brute_rejects_oversized_world_budget() {
    let out = modalforge(&["sat", "--logic", "E", "--engine", "brute", "--max-worlds", "9", "p"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn axioms_battery_on_the_chain_frames() {
    let out = modalforge(&["axioms", "--frame", "f", "--chain", "10", "grz", "dot3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("grz = []([](p -> []p) -> p) -> p: valid (exhaustive)"));
    assert!(text.contains("dot3 = []([]p -> q) | []([]q -> p): no counterexample in 100000 trials"));
    assert!(text.contains("reflexive=true"));

    let out = modalforge(&["axioms", "--frame", "f-strict", "--chain", "10", "gl"]);
    assert!(stdout(&out).contains("gl = []([]p -> p) -> []p: valid (exhaustive)"));

    // the honest verdict for the default weak-Grzegorczyk axiom on the
    // pruned bundle frame is a refutation, countermodel included
    let out = modalforge(&["axioms", "--frame", "f-vf", "--vars", "3", "wgrz"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("wgrz = []([](p -> []p) -> p) -> []p: refuted"));
}

#[test]
fn axioms_unknown_name_exits_two() {
    let out = modalforge(&["axioms", "--frame", "f", "nonexistent_axiom"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn axioms_accepts_a_custom_config() {
    let mut path = std::env::temp_dir();
    path.push(format!("modalforge-axioms-{}.cfg", std::process::id()));
    std::fs::write(&path, "axiom t = []p -> p\nlogic T = t\n").unwrap();
    let out = modalforge(&[
        "--axioms",
        path.to_str().unwrap(),
        "axioms",
        "--frame",
        "f",
        "--chain",
        "6",
        "T",
    ]);
    std::fs::remove_file(&path).ok();
    assert!(out.status.success());
    assert!(stdout(&out).contains("t = []p -> p: valid (exhaustive)"));
}

#[test]
fn axioms_config_can_come_from_the_environment() {
    let mut path = std::env::temp_dir();
    path.push(format!("modalforge-env-axioms-{}.cfg", std::process::id()));
    std::fs::write(&path, "axiom serial = []p -> <>p\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_modalforge"))
        .args(["axioms", "--frame", "f", "--chain", "5", "serial"])
        .env("MODALFORGE_AXIOMS", &path)
        .output()
        .expect("binary runs");
    std::fs::remove_file(&path).ok();
    assert!(out.status.success());
    assert!(stdout(&out).contains("serial = []p -> <>p: valid (exhaustive)"));
}

#[test]
fn print_config_round_trips_through_the_parser() {
    let out = modalforge(&["axioms", "--print-config"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("axiom wgrz"));
    // the printed catalog must be loadable as a config file again
    let mut path = std::env::temp_dir();
    path.push(format!("modalforge-default-{}.cfg", std::process::id()));
    std::fs::write(&path, &text).unwrap();
    let out = modalforge(&[
        "--axioms",
        path.to_str().unwrap(),
        "axioms",
        "--frame",
        "f",
        "--chain",
        "4",
        "grz",
    ]);
    std::fs::remove_file(&path).ok();
    assert!(out.status.success());
}

#[test]
fn bench_table_is_exactly_affine() {
    let out = modalforge(&[
        "--json",
        "bench",
        "--fragment",
        "one-var",
        "--from",
        "1",
        "--to",
        "30",
        "--cnf-vars",
        "5",
        "--cnf-clauses",
        "8",
        "--cnf-samples",
        "5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut fits = 0;
    let mut cnf_rows = 0;
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v.get("family").is_some() {
            assert_eq!(v["exact"], true, "family {} not affine", v["family"]);
            fits += 1;
        }
        if v.get("within").is_some() {
            assert_eq!(v["within"], true);
            cnf_rows += 1;
        }
    }
    assert_eq!(fits, 3);
    assert_eq!(cnf_rows, 5);
}

#[test]
fn mc_checks_a_kripke_model_file() {
    // two-world irreflexive chain, p at the root only
    let model = r#"{"worlds":2,"edges":[[0,1]],"valuation":{"p":[0]},"designated":0}"#;
    let mut path = std::env::temp_dir();
    path.push(format!("modalforge-model-{}.json", std::process::id()));
    std::fs::write(&path, model).unwrap();
    let holds = modalforge(&["mc", "--model", path.to_str().unwrap(), "p -> []p"]);
    assert_eq!(stdout(&holds).trim(), "false");
    let at_leaf = modalforge(&[
        "mc",
        "--model",
        path.to_str().unwrap(),
        "--world",
        "1",
        "[]false",
    ]);
    std::fs::remove_file(&path).ok();
    assert_eq!(stdout(&at_leaf).trim(), "true");
}
