use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Exponential backoff: the sleep before retry `k` (0-based) is
/// `base * factor^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackoffPolicy {
    pub base_secs: f64,
    pub factor: f64,
    pub max_attempts: u32,
}

impl Default for BackoffPolicy {
    fn default() -> Self {
        Self {
            base_secs: 1.0,
            factor: 2.0,
            max_attempts: 5,
        }
    }
}

impl BackoffPolicy {
    pub fn delay(&self, retry: u32) -> Duration {
        Duration::from_secs_f64(self.base_secs * self.factor.powi(retry as i32))
    }

    /// All sleeps a request can incur (one fewer than the attempts).
    pub fn schedule(&self) -> Vec<Duration> {
        (0..self.max_attempts.saturating_sub(1)).map(|k| self.delay(k)).collect()
    }
}

pub trait Sleeper: Send + Sync {
    fn sleep(&self, d: Duration);
}

pub struct ThreadSleeper;

impl Sleeper for ThreadSleeper {
    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Records requested sleeps without waiting.
#[derive(Default)]
pub struct RecordingSleeper {
    slept: Mutex<Vec<Duration>>,
}

impl RecordingSleeper {
    pub fn sleeps(&self) -> Vec<Duration> {
        self.slept.lock().unwrap().clone()
    }
}

impl Sleeper for RecordingSleeper {
    fn sleep(&self, d: Duration) {
        self.slept.lock().unwrap().push(d);
    }
}

/// Counting semaphore bounding concurrent requests.
pub struct InFlightLimiter {
    max: usize,
    state: Mutex<(usize, usize)>,
    freed: Condvar,
}

pub struct InFlightGuard<'a> {
    limiter: &'a InFlightLimiter,
}

impl InFlightLimiter {
    pub fn new(max: usize) -> Self {
        Self {
            max: max.max(1),
            state: Mutex::new((0, 0)),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> InFlightGuard<'_> {
        let mut s = self.state.lock().unwrap();
        while s.0 >= self.max {
            s = self.freed.wait(s).unwrap();
        }
        s.0 += 1;
        s.1 = s.1.max(s.0);
        InFlightGuard { limiter: self }
    }

    /// Highest number of simultaneous holders seen so far.
    pub fn peak(&self) -> usize {
        self.state.lock().unwrap().1
    }

    pub fn limit(&self) -> usize {
        self.max
    }
}

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        let mut s = self.limiter.state.lock().unwrap();
        s.0 -= 1;
        self.limiter.freed.notify_one();
    }
}
