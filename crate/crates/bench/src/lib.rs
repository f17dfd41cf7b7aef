//! Shared inputs for the benchmarks.

use std::path::PathBuf;

use mfj_core::evaluator::Machine;
use mfj_core::monads::{Monad, Registry};
use mfj_core::{parse_source_with, prelude, Expr, Source};

/// A corpus program parsed against the standard prelude.
pub fn load(name: &str) -> Source {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(format!("{name}.mfj"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_source_with(&prelude(), &text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// A machine for `name` together with its `main`.
pub fn setup<M: Monad>(name: &str) -> (Machine<M>, Expr) {
    let src = load(name);
    let main = src.main.clone().unwrap_or_else(|| panic!("{name} has no main"));
    (Machine::new(src.program, Registry::standard()), main)
}
