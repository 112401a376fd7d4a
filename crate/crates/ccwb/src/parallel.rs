//! Multi-threaded candidate evaluation.
//!
//! Candidates are split into contiguous chunks, one per worker. Results are
//! stitched back in enumeration order, so the outcome does not depend on
//! the number of workers or on scheduling.

use std::num::NonZeroUsize;
use std::thread;

use ccwb_core::search::{check_arch, evaluate_candidate, Evaluation};
use ccwb_core::{Architecture, Corpus, Cost, Result, SearchSpace};

pub fn default_jobs() -> NonZeroUsize {
    thread::available_parallelism().unwrap_or(NonZeroUsize::MIN)
}

pub fn evaluate(space: &SearchSpace, corpus: &Corpus, arch: &Architecture, jobs: NonZeroUsize) -> Result<Evaluation> {
    check_arch(space, arch)?;
    let candidates = space.enumerate()?;
    let chunk = candidates.len().div_ceil(jobs.get()).max(1);
    let parts: Vec<Result<Vec<Vec<Cost>>>> = thread::scope(|s| {
        let handles: Vec<_> = candidates
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|c| evaluate_candidate(c, corpus, arch)).collect()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("evaluation worker panicked")).collect()
    });
    let mut entry_costs = Vec::with_capacity(candidates.len());
    for part in parts {
        entry_costs.extend(part?);
    }
    Ok(Evaluation { candidates, entry_costs })
}
