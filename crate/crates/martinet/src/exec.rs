//! Batched execution helpers.
//!
//! Estimators split their work into indexed batches. Each batch derives its
//! own RNG stream from the seed and the batch index, and reduction happens in
//! batch order, so results are bit-identical whether batches run on the
//! rayon pool (feature `parallel`, on by default) or sequentially.

use std::sync::atomic::{AtomicBool, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Deterministic per-batch RNG: one base seed, one independent stream per
/// batch index.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

static PARALLEL: AtomicBool = AtomicBool::new(true);

/// Enables or disables the thread pool at runtime. No-op when the crate is
/// built without the `parallel` feature.
pub fn set_parallel(enabled: bool) {
    PARALLEL.store(enabled, Ordering::SeqCst);
}

/// True when batches will be dispatched to the rayon pool.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && PARALLEL.load(Ordering::SeqCst)
}

/// Maps `f` over `0..n`, preserving index order in the output.
pub fn map_batches<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if PARALLEL.load(Ordering::SeqCst) {
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}
