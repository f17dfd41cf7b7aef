//! Seeded faults for mutation testing.
//!
//! Each fault is off unless enabled for the current thread with [`with`].
//! The acceptance suite turns them on one at a time and checks that some
//! other acceptance check notices.

use std::cell::Cell;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// Clause matching picks the last matching clause instead of the first.
    ClauseOrder,
    /// Method invocation forgets to substitute the method's type arguments.
    InvkTypeSubst,
    /// The kind table of the symmetric signature sum is flipped.
    SymSumKinds,
    /// `try` filters the body effect before simplifying it.
    FilterBeforeSimplify,
    /// List bind concatenates the per-element results right to left.
    ListBindOrder,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::ClauseOrder,
        Mutation::InvkTypeSubst,
        Mutation::SymSumKinds,
        Mutation::FilterBeforeSimplify,
        Mutation::ListBindOrder,
    ];
}

thread_local! {
    static ACTIVE: Cell<Option<Mutation>> = const { Cell::new(None) };
}

pub fn active(m: Mutation) -> bool {
    ACTIVE.with(|a| a.get() == Some(m))
}

/// Run `f` with `m` enabled on this thread.
pub fn with<R>(m: Mutation, f: impl FnOnce() -> R) -> R {
    struct Reset(Option<Mutation>);
    impl Drop for Reset {
        fn drop(&mut self) {
            ACTIVE.with(|a| a.set(self.0));
        }
    }
    let _reset = Reset(ACTIVE.with(|a| a.replace(Some(m))));
    f()
}
