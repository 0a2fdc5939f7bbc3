//! Seeded, shard-stable random streams.
//!
//! Every stream is ChaCha20 keyed by the 64-bit seed, with the shard index as
//! the stream id. Work is cut into fixed-size shards before any thread sees
//! it, so results never depend on the thread count or on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Samples per shard in [`sharded_map`].
pub const SHARD_SIZE: usize = 256;

pub fn stream(seed: u64, shard: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Runs `f(shard_index, range, rng)` for each shard of `0..count` on up to
/// `threads` workers and returns the results in shard order.
pub fn sharded_map<R, F>(count: usize, threads: usize, seed: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize, std::ops::Range<usize>, &mut ChaCha20Rng) -> R + Sync,
{
    let shards: Vec<std::ops::Range<usize>> = (0..count)
        .step_by(SHARD_SIZE)
        .map(|start| start..(start + SHARD_SIZE).min(count))
        .collect();
    let threads = threads.max(1).min(shards.len().max(1));
    let mut out: Vec<Option<R>> = (0..shards.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut slots: Vec<&mut [Option<R>]> = Vec::new();
        let chunk = shards.len().div_ceil(threads).max(1);
        let mut rest = out.as_mut_slice();
        while !rest.is_empty() {
            let (head, tail) = rest.split_at_mut(chunk.min(rest.len()));
            slots.push(head);
            rest = tail;
        }
        for (t, slot) in slots.into_iter().enumerate() {
            let f = &f;
            let shards = &shards;
            scope.spawn(move || {
                for (j, cell) in slot.iter_mut().enumerate() {
                    let idx = t * chunk + j;
                    let mut rng = stream(seed, idx as u64);
                    *cell = Some(f(idx, shards[idx].clone(), &mut rng));
                }
            });
        }
    });
    out.into_iter().map(|r| r.expect("every shard ran")).collect()
}
