#![allow(dead_code)]

use std::path::PathBuf;

use mfj_core::evaluator::{Finitary, Machine, Res};
use mfj_core::monads::{Monad, Registry, Shape};
use mfj_core::{parse_source_with, prelude, Source};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn corpus_files() -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("corpus entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "mfj"))
        .collect();
    out.sort();
    out
}

pub fn load(name: &str) -> Source {
    let path = corpus_dir().join(format!("{name}.mfj"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_source_with(&prelude(), &text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn machine<M: Monad>(src: &Source) -> Machine<M> {
    Machine::new(src.program.clone(), Registry::standard())
}

/// The finitary result of `main`, observed up to 256 elements.
pub fn run<M: Monad>(src: &Source, fuel: usize) -> Option<(Shape<Res>, usize)> {
    let m = machine::<M>(src);
    match m.finitary(src.main.as_ref().expect("main"), fuel) {
        Finitary::Finite { result, steps } => Some((M::shape(&result, 256), steps)),
        Finitary::Diverged { .. } => None,
    }
}

pub fn value(src: &Source, text: &str) -> Res {
    Res::Value(mfj_core::syntax::parse_value(text, &src.aliases).unwrap_or_else(|e| panic!("{text}: {e}")))
}
