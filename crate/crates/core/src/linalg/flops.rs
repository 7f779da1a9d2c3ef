//! Per-thread floating-point operation counter used by the cost audit.
//!
//! Dense BLAS-1 helpers and the dense factorizations report their work
//! here. Sparse products are not counted; callers count those as matvecs.

use std::cell::Cell;

thread_local! {
    static FLOPS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub fn add(n: usize) {
    FLOPS.with(|f| f.set(f.get() + n as u64));
}

pub fn current() -> u64 {
    FLOPS.with(|f| f.get())
}

/// Runs `f` and returns its result together with the flops it performed
/// on this thread.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let start = current();
    let out = f();
    (out, current() - start)
}
