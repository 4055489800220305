// SPDX-License-Identifier: Apache-2.0

//! Deterministic random streams.
//!
//! A master seed fixes a ChaCha key; independent tasks use distinct stream ids of that key.
//! Monte Carlo loops are split into fixed-size chunks, chunk `i` drawing from stream
//! `base + i`, so results do not depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Trials per chunk in [`chunked`].
pub const CHUNK: usize = 2048;

/// Stream `stream` of the ChaCha key derived from `master`.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Runs `trials` trials in chunks of [`CHUNK`], in parallel, and returns the per-chunk
/// results in chunk order. `f` receives the chunk's generator and its trial count.
pub fn chunked<T, F>(master: u64, base_stream: u64, trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(trials - c * CHUNK);
            let mut rng = stream_rng(master, base_stream + c as u64);
            f(&mut rng, count)
        })
        .collect()
}

/// Mean and standard error of a Bernoulli estimate.
pub fn bernoulli_summary(hits: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 0.0);
    }
    let p = hits as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_differ_and_repeat() {
        let a: u64 = stream_rng(1, 0).gen();
        let b: u64 = stream_rng(1, 1).gen();
        assert_ne!(a, b);
        assert_eq!(a, stream_rng(1, 0).gen::<u64>());
    }

    #[test]
    fn chunked_is_independent_of_pool_size() {
        let run = || chunked(7, 0, 10_000, |rng, n| (0..n).map(|_| rng.gen::<u32>() as u64).sum::<u64>());
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(run);
        assert_eq!(one, four);
        assert_eq!(one.len(), 5);
    }
}
