use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/corpus")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn mfj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfj")).args(args).env_remove("MFJ_PRELUDE").output().expect("run mfj")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn scratch(name: &str, text: &str) -> String {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn check_accepts_well_typed_files() {
    let o = mfj(&["check", &corpus("bool.mfj")]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with("bool.mfj: ok"));
}

#[test]
fn check_reports_override_errors() {
    let o = mfj(&["check", &corpus("bad/bad_override.mfj")]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("OverrideError"), "{out}");
    assert!(out.contains("bad_override.mfj:"), "{out}");
}

#[test]
fn check_json_is_one_object_per_diagnostic() {
    let o = mfj(&["check", "--json", &corpus("bad/bad_override.mfj")]);
    assert_eq!(code(&o), 1);
    for line in stdout(&o).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["code"], "OverrideError");
        assert!(v["file"].as_str().unwrap().ends_with("bad_override.mfj"));
        assert!(v["line"].is_u64() && v["rule"].is_string());
    }
}

#[test]
fn missing_files_are_usage_errors() {
    let o = mfj(&["check"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("no input files"));
    assert_eq!(code(&mfj(&["run", "/does/not/exist.mfj"])), 2);
    assert_eq!(code(&mfj(&["run", "--monad", "nope", &corpus("exc_e1.mfj")])), 2);
}

#[test]
fn run_prints_results_per_monad() {
    assert_eq!(stdout(&mfj(&["run", &corpus("exc_e1.mfj")])).trim(), "One");
    assert_eq!(stdout(&mfj(&["run", &corpus("exc_e2.mfj")])).trim(), "raised E");
    assert_eq!(stdout(&mfj(&["run", "--monad", "list", &corpus("nd_m1.mfj")])).trim(), "[One, Zero]");
    let dist = stdout(&mfj(&["run", "--monad", "dist", &corpus("nd_m1.mfj")]));
    assert!(dist.contains("One: 1/2") && dist.contains("Zero: 1/2"), "{dist}");
}

#[test]
fn run_json_is_stable() {
    let o = mfj(&["run", "--json", "--monad", "list", &corpus("nd_m1.mfj")]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["result"]["prefix"], serde_json::json!(["One", "Zero"]));
    assert_eq!(v["result"]["exhausted"], true);
    assert_eq!(v["steps"], 6);
    assert_eq!(stdout(&o), stdout(&mfj(&["run", "--json", "--monad", "list", &corpus("nd_m1.mfj")])));
}

#[test]
fn run_reports_divergence_and_approximations() {
    let o = mfj(&["run", "--monad", "list", "--fuel", "300", "--approx", "40", &corpus("nd_m2.mfj")]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("diverged (fuel=300)"), "{out}");
    let last = out.lines().find(|l| l.starts_with("approx 40: ")).expect("approximation 40");
    assert!(last.starts_with("approx 40: [Zero, One, Two"), "{last}");
}

#[test]
fn trace_numbers_configurations_from_one() {
    let out = stdout(&mfj(&["run", "--trace", &corpus("exc_e1.mfj")]));
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("1: try "), "{out}");
    assert!(lines.iter().any(|l| l.starts_with("2: ")));
    assert_eq!(*lines.last().unwrap(), "One");
}

#[test]
fn id_has_no_approximations_and_no_soundness() {
    assert_eq!(code(&mfj(&["run", "--monad", "id", "--approx", "3", &corpus("exc_e1.mfj")])), 2);
    assert_eq!(code(&mfj(&["soundness", "--monad", "id", &corpus("exc_e1.mfj")])), 2);
    assert!(!stdout(&mfj(&["run", "--monad", "id", &corpus("nat_sum.mfj")])).is_empty());
}

#[test]
fn soundness_passes_on_the_corpus_examples() {
    let o = mfj(&["soundness", &corpus("nd_m1.mfj")]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    for interp in ["list-forall", "list-exists", "dist-forall", "dist-exists"] {
        assert!(out.contains(&format!("[{interp}]: PASS")), "{out}");
    }
    assert!(out.contains("skipped exc"));
}

#[test]
fn soundness_refuses_explicitly_inapplicable_monads() {
    assert_eq!(code(&mfj(&["soundness", "--monad", "exc", &corpus("nd_m1.mfj")])), 2);
}

#[test]
fn soundness_refuses_ill_typed_programs() {
    let text = std::fs::read_to_string(corpus("bad/unhandled_in_pure.mfj")).unwrap();
    let path = scratch("liar.mfj", &format!("{text}\nmain = Liar.m()\n"));
    let o = mfj(&["soundness", &path]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("cannot check soundness of ill-typed program"), "{}", stdout(&o));
}

#[test]
fn soundness_catches_corrupted_run_functions() {
    let o = mfj(&["soundness", "--monad", "list", "--corrupt-registry", &corpus("nd_m1.mfj")]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn soundness_json_reports_every_check() {
    let o = mfj(&["soundness", "--json", "--monad", "exc", &corpus("exc_e2.mfj")]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["result"], "raised E");
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["theorem"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        ["progress", "preservation", "subject-reduction", "no-wrong", "finitary-soundness", "infinitary-soundness"]
    );
}

#[test]
fn several_files_keep_their_order_and_the_worst_code() {
    let o = mfj(&["run", &corpus("exc_e1.mfj"), &corpus("exc_e2.mfj")]);
    let out = stdout(&o);
    let a = out.find("exc_e1.mfj").unwrap();
    let b = out.find("exc_e2.mfj").unwrap();
    assert!(a < b);
    assert_eq!(code(&o), 0);
    let o = mfj(&["check", &corpus("bool.mfj"), &corpus("bad/bad_override.mfj")]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("bool.mfj: ok"));
}

#[test]
fn parse_output_reparses_to_the_same_text() {
    let once = stdout(&mfj(&["parse", "--no-prelude", &corpus("mixin.mfj")]));
    let path = scratch("mixin_printed.mfj", &once);
    let twice = stdout(&mfj(&["parse", "--no-prelude", &path]));
    assert_eq!(once, twice);
}

#[test]
fn the_prelude_can_be_replaced() {
    let prelude = scratch("tiny_prelude.mfj", "Unit { }\n");
    let prog = scratch("uses_unit.mfj", "main = return Unit\n");
    let o = Command::new(env!("CARGO_BIN_EXE_mfj")).args(["run", &prog]).env("MFJ_PRELUDE", &prelude).output().unwrap();
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert_eq!(stdout(&o).trim(), "Unit");
    let o = Command::new(env!("CARGO_BIN_EXE_mfj"))
        .args(["run", &corpus("exc_e1.mfj")])
        .env("MFJ_PRELUDE", &prelude)
        .output()
        .unwrap();
    assert_ne!(code(&o), 0, "the corpus needs the standard prelude");
}
