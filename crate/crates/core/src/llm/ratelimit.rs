use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

/// Blocking token bucket shared by all callers of a gateway.
pub struct TokenBucket {
    capacity: f64,
    per_sec: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    pub fn new(capacity: u32, per_sec: f64) -> Self {
        let capacity = f64::from(capacity.max(1));
        TokenBucket {
            capacity,
            per_sec,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    pub fn per_minute(rpm: u32) -> Self {
        Self::new(rpm, f64::from(rpm.max(1)) / 60.0)
    }

    /// Takes a token if one is available, otherwise reports the wait needed.
    pub fn try_acquire(&self) -> Result<(), Duration> {
        let mut st = self.state.lock().unwrap();
        let now = Instant::now();
        let refill = now.duration_since(st.1).as_secs_f64() * self.per_sec;
        st.0 = (st.0 + refill).min(self.capacity);
        st.1 = now;
        if st.0 >= 1.0 {
            st.0 -= 1.0;
            Ok(())
        } else {
            Err(Duration::from_secs_f64((1.0 - st.0) / self.per_sec))
        }
    }

    pub fn acquire(&self) {
        while let Err(wait) = self.try_acquire() {
            thread::sleep(wait);
        }
    }
}
