use std::process::{Command, Output};

fn dynck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynck")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn prove_muddy_succeeds() {
    let o = dynck(&["prove-muddy", "--children", "2", "--muddy", "1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("[.] TRUE -> [*] (mu 2 -> K 2 mu 2)"));
}

#[test]
fn prove_muddy_json_and_trace() {
    let o = dynck(&["--json", "prove-muddy", "--children", "3", "--muddy", "2", "--agent", "3", "--trace"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let proof = &v["proofs"][0];
    assert_eq!(proof["agent"], 3);
    assert_eq!(proof["verdict"], true);
    let trace: Vec<&str> = proof["trace"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    assert_eq!(trace.last(), Some(&"Concl"));
    assert!(trace.contains(&"GainConn"));
}

#[test]
fn emitted_script_checks_and_forgery_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("concl.proof");
    let p = path.to_str().unwrap();
    let o = dynck(&["prove-muddy", "--children", "2", "--muddy", "0", "--emit", p]);
    assert_eq!(code(&o), 0);
    let o = dynck(&["check", p]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("2 of 2 lemmas checked"));

    // The wrong theory lacks the muddy axioms.
    assert_eq!(code(&dynck(&["check", p, "--theory", "logic"])), 1);

    let forged = dir.path().join("forged.proof");
    std::fs::write(
        &forged,
        "dynck-script 1\ntheory logic\nlemma forged\n\
         a = Classical |- mu 1 -> mu 1\n\
         b = Classical |- TRUE\n\
         c = MP from a b |- mu 1\n\
         qed c\n",
    )
    .unwrap();
    let o = dynck(&["--json", "check", forged.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["lemma"], "forged");
    assert_eq!(v[0]["verdict"], false);
    assert_eq!(v[0]["step"], serde_json::json!([]));
}

#[test]
fn model_check_endpoint() {
    let o = dynck(&["model-check", "--children", "2", "--muddy", "1", "--after", ".,*", "--formula", "K 2 mu 2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("actual world 11: true"));
    let o = dynck(&["model-check", "--children", "2", "--muddy", "1", "--after", ".", "--formula", "K 2 mu 2"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn model_check_all_worlds_json() {
    let o = dynck(&[
        "--json", "model-check", "--children", "2", "--muddy", "0", "--after", ".", "--formula", "lambda 1", "--all-worlds",
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["worlds"].as_array().unwrap().len(), 3);
    assert_eq!(v["history"], serde_json::json!(["point"]));
}

#[test]
fn validate_passes() {
    let o = dynck(&["--json", "validate", "--children", "3", "--muddy", "1"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["traces"].as_array().unwrap().len(), 3);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&dynck(&["prove-muddy", "--children", "2", "--muddy", "2"])), 2);
    assert_eq!(code(&dynck(&["prove-muddy", "--children", "2", "--muddy", "1", "--agent", "3"])), 2);
    assert_eq!(code(&dynck(&["model-check", "--children", "2", "--muddy", "0", "--formula", "K 2 ("])), 2);
    assert_eq!(code(&dynck(&["model-check", "--children", "2", "--muddy", "0", "--after", "x", "--formula", "TRUE"])), 2);
    assert_eq!(code(&dynck(&["check", "/nonexistent/file.proof"])), 2);
    assert_eq!(code(&dynck(&["frobnicate"])), 2);
}
