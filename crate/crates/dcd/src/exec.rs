//! Std implementations of the pipeline's executor and clock.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;
use std::time::Instant;

use dcd_core::pipeline::{Clock, Executor};

/// Runs tasks on up to `limit` scoped threads that pull indices from a
/// shared counter. Results come back in index order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Threads;

impl Executor for Threads {
    fn map<R: Send>(&self, count: usize, limit: usize, task: &(dyn Fn(usize) -> R + Sync)) -> Vec<R> {
        let workers = limit.max(1).min(count);
        if workers <= 1 {
            return (0..count).map(task).collect();
        }
        let next = AtomicUsize::new(0);
        let finished: Vec<(usize, R)> = thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    s.spawn(|| {
                        let mut out = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            if i >= count {
                                break out;
                            }
                            out.push((i, task(i)));
                        }
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().unwrap_or_else(|e| std::panic::resume_unwind(e)))
                .collect()
        });
        let mut slots: Vec<Option<R>> = (0..count).map(|_| None).collect();
        for (i, r) in finished {
            slots[i] = Some(r);
        }
        slots.into_iter().map(|r| r.expect("every index is claimed once")).collect()
    }
}

/// Milliseconds since construction, from [`Instant`].
#[derive(Debug, Clone, Copy)]
pub struct MonotonicClock {
    origin: Instant,
}

impl MonotonicClock {
    pub fn new() -> Self {
        MonotonicClock { origin: Instant::now() }
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for MonotonicClock {
    fn now_ms(&self) -> f64 {
        self.origin.elapsed().as_secs_f64() * 1000.0
    }
}
