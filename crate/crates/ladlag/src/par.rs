//! Deterministic fan-out over path indices.
//!
//! Work is cut into fixed-size blocks of indices and the block results come
//! back in block order, so any fold over them sees the same sequence no
//! matter how many workers ran. Combined with per-index generator streams
//! this makes every ensemble computation independent of the worker count.

use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Fixed block size for ensemble reductions.
pub const BLOCK: u64 = 1024;

/// Applies `f` to each block of `0..n` using up to `threads` workers and
/// returns the block results in block order.
pub fn map_blocks<T, F>(n: u64, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync,
{
    let n_blocks = (n.div_ceil(BLOCK)) as usize;
    if n_blocks == 0 {
        return Vec::new();
    }
    let workers = threads.max(1).min(n_blocks);
    if workers == 1 {
        return (0..n_blocks).map(|b| f(block_range(b, n))).collect();
    }

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n_blocks).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let b = next.fetch_add(1, Ordering::Relaxed);
                if b >= n_blocks {
                    break;
                }
                let out = f(block_range(b, n));
                slots.lock().expect("no poisoned workers")[b] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("no poisoned workers")
        .into_iter()
        .map(|slot| slot.expect("every block ran"))
        .collect()
}

fn block_range(b: usize, n: u64) -> Range<u64> {
    let lo = b as u64 * BLOCK;
    lo..(lo + BLOCK).min(n)
}
