mod common;

use common::*;
use mfj_core::soundness::{check_program, check_program_corrupted, interp_law_suite, HarnessError, Interp, Options};
use mfj_core::{parse_source_with, prelude, Printer};

const THEOREMS: [&str; 6] =
    ["progress", "preservation", "subject-reduction", "no-wrong", "finitary-soundness", "infinitary-soundness"];

fn opts() -> Options {
    Options { fuel: 2000, prefix: 256, approx: 32 }
}

#[test]
fn reports_carry_every_check() {
    let src = load("exc_e1");
    let r = check_program(&src.program, src.main.as_ref().unwrap(), Interp::Exc, &opts(), &Printer::plain()).unwrap();
    assert!(r.passed());
    assert_eq!(r.outcome, "finite");
    for t in THEOREMS {
        let c = r.check(t).unwrap_or_else(|| panic!("missing {t}"));
        assert!(c.pass && c.witness.is_none(), "{t}");
    }
}

#[test]
fn ill_typed_programs_are_refused() {
    for bad in ["bad_override", "no_such_method", "unhandled_in_pure"] {
        let path = corpus_dir().join("bad").join(format!("{bad}.mfj"));
        let text = std::fs::read_to_string(&path).unwrap();
        let text = if text.contains("main =") { text } else { format!("{text}\nmain = return Zero\n") };
        let src = parse_source_with(&prelude(), &text).unwrap();
        let err = check_program(&src.program, src.main.as_ref().unwrap(), Interp::Exc, &opts(), &Printer::plain())
            .unwrap_err();
        assert!(matches!(err, HarnessError::IllTyped(_)), "{bad}: {err}");
        assert!(err.to_string().starts_with("cannot check soundness of ill-typed program: "), "{bad}");
    }
}

#[test]
fn corrupted_run_functions_are_caught() {
    let src = load("nd_m1");
    let main = src.main.as_ref().unwrap();
    for interp in [Interp::ListForall, Interp::DistForall] {
        let honest = check_program(&src.program, main, interp, &opts(), &Printer::plain()).unwrap();
        assert!(honest.passed(), "{interp}");
        let bad = check_program_corrupted(&src.program, main, interp, &opts(), &Printer::plain()).unwrap();
        assert!(!bad.passed(), "{interp}: corruption went unnoticed");
        assert!(bad.checks.iter().any(|c| !c.pass && c.witness.is_some()), "{interp}: failure without a witness");
    }
}

#[test]
fn uncaught_exceptions_and_stopped_failures_are_sound() {
    let src = load("uncaught");
    let main = src.main.as_ref().unwrap();
    let r = check_program(&src.program, main, Interp::Exc, &opts(), &Printer::plain()).unwrap();
    assert!(r.passed());
    let stop = load("failure_stop");
    let r = check_program(&stop.program, stop.main.as_ref().unwrap(), Interp::Exc, &opts(), &Printer::plain()).unwrap();
    assert!(r.passed());
}

#[test]
fn the_exception_reading_satisfies_the_conditions_and_its_broken_twin_does_not() {
    let p = prelude().program;
    let good = interp_law_suite(Interp::Exc, &p);
    assert!(good.passed());
    let broken = interp_law_suite(Interp::BrokenExc, &p);
    assert!(!broken.condition(2).passed());
}

#[test]
fn list_forall_satisfies_the_conditions() {
    assert!(interp_law_suite(Interp::ListForall, &prelude().program).passed());
}
