//! Numerical laboratory for the arithmetic of the fiber family `n^r + k`
//! (`r` prime): prime counting along fibers against singular-series
//! predictions, Dirichlet characters of exact order `r` and their power
//! residue symbols, an empirical large-sieve tester for that character
//! family, and a solubility pipeline for the surfaces
//! `y^2 - a z^2 = t^r + k != 0`.
//!
//! Layout:
//! * [`arith`] — sieves, deterministic primality, von Mangoldt, discrete logs
//! * [`chars`] — exact-order-`r` Dirichlet characters, Gauss sums
//! * [`residue`] — `r`-th power residue symbols at split primes
//! * [`singular`] — root counts, Ramanujan sums, the singular series
//! * [`bh`] — fiber Lambda-sum experiments and deviation statistics
//! * [`sieve_lab`] — large-sieve ratio sweeps and the duality check
//! * [`forms`], [`varieties`] — class numbers, Hilbert symbols, point search
//! * [`report`] — deterministic CSV/manifest emission

pub mod arith;
pub mod bh;
pub mod chars;
mod error;
pub mod forms;
pub mod report;
pub mod residue;
pub mod sieve_lab;
pub mod singular;
pub mod varieties;

pub use error::{Error, Result};

/// Configure the global worker pool. Call at most once, before any parallel
/// evaluation; later calls are ignored (the first pool wins).
pub fn set_worker_threads(workers: usize) {
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global();
}
